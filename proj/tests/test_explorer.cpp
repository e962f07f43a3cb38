#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "radmax/explorer.hpp"

using namespace radmax;

namespace {

// Sign changes of b -> int_a^b F(y)(y - x) dy on a uniform grid of `points`
// over [a, hi]. Integrating by parts leaves [g(y)(y - x)]_a^b - int_a^b g, and
// the trapezoid rule on the continuous g is accurate to O(h^2).
std::vector<double> scanned_roots(const LineField& f, double x, double a, double hi, int points) {
  std::vector<double> roots;
  const double h = (hi - a) / points;
  const double base = f.g(a) * (a - x);
  double G = 0.0, prev_m = 0.0, prev_g = f.g(a);
  for (int i = 1; i <= points; ++i) {
    const double b = a + i * h;
    const double gb = f.g(b);
    G += 0.5 * h * (prev_g + gb);
    const double m = gb * (b - x) - base - G;
    if (b >= x && ((prev_m < 0 && m >= 0) || (prev_m > 0 && m <= 0)))
      roots.push_back(b - h * m / (m - prev_m));
    prev_m = m;
    prev_g = gb;
  }
  return roots;
}

// Brute force M~F(x): a runs over a uniform grid plus a few points in every
// piece (pieces can be far narrower than the grid step), b over scanned roots.
double brute_conditional(const LineField& f, double x, int a_points, int b_points) {
  const double lo = std::min(f.left(), x);
  const double hi = std::max(f.right(), x) + 1e-9;
  std::vector<double> as;
  for (int i = 0; i < a_points; ++i) as.push_back(lo + (x - lo) * i / a_points);
  const auto& k = f.knots();
  for (std::size_t j = 0; j + 1 < k.size(); ++j)
    for (int i = 0; i < 16; ++i) as.push_back(k[j] + (k[j + 1] - k[j]) * i / 16.0);
  double best = 0.0;
  for (double a : as) {
    if (a < lo || a >= x) continue;
    for (double b : scanned_roots(f, x, a, hi, b_points))
      best = std::max(best, std::abs((f.g(b) - f.g(a)) / (b - a)));
  }
  return best;
}

LineField dipole() { return LineField({-1.0, 0.0, 1.0}, {0.0, 1.0, 0.0}); }

}  // namespace

TEST_CASE("line field basics") {
  const LineField f = dipole();
  CHECK(f.F(-0.5) == 1.0);
  CHECK(f.F(0.5) == -1.0);
  CHECK(f.F(2.0) == 0.0);
  CHECK(f.g(0.25) == doctest::Approx(0.75));
  CHECK(f.norm_l1() == doctest::Approx(2.0));
  CHECK_THROWS_AS(LineField({0.0, 1.0}, {0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(LineField({0.0, 0.0, 1.0}, {0.0, 1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("moment roots against a dense scan") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const LineField f = random_line_field(seed, 7);
    for (double x : {-0.6, -0.1, 0.3, 0.8}) {
      for (double a : {-1.0, -0.7, x - 0.2}) {
        if (a > x) continue;
        const auto exact = moment_roots(f, x, a);
        const auto scan = scanned_roots(f, x, a, 1.0 + 1e-9, 1000000);
        for (double b : exact) {
          CHECK(b >= x);
          CHECK(std::abs(moment(f, x, a, b)) <= 1e-10 * abs_moment(f, x, a, b) + 1e-300);
        }
        // Every transversal sign change is an exact root.
        for (double b : scan) {
          const bool hit = std::any_of(exact.begin(), exact.end(),
                                       [b](double r) { return std::abs(r - b) < 1e-5; });
          CHECK(hit);
        }
      }
    }
  }
}

TEST_CASE("moment roots: hand computed dipole") {
  // x = 0, a = -1: m(b) = -1/2 + ... for b in [0, 1]: -1/2 - b^2/2 < 0, then
  // constant -1 beyond the support, so no root.
  CHECK(moment_roots(dipole(), 0.0, -1.0).empty());
  // x = 0.5, a = 0: m(b) = -((b - 0.5)^2 - 0.25) / 2 vanishes at b = 1.
  const auto r = moment_roots(dipole(), 0.5, 0.0);
  REQUIRE(r.size() == 1);
  CHECK(r[0] == doctest::Approx(1.0));
  CHECK_THROWS_AS(moment_roots(dipole(), 0.0, 0.5), std::invalid_argument);
}

TEST_CASE("zero stretch contributes its left end") {
  // F vanishes on [-0.5, 0.5]; at x = 0 with a = -0.5 the moment is 0 on the
  // whole stretch.
  const LineField f({-1.0, -0.5, 0.5, 1.0}, {0.0, 1.0, 1.0, 0.0});
  const auto r = moment_roots(f, 0.0, -0.5);
  REQUIRE_FALSE(r.empty());
  CHECK(r.front() == 0.0);
}

TEST_CASE("conditional maximal function against brute force") {
  for (std::uint64_t seed = 11; seed <= 14; ++seed) {
    const LineField f = random_line_field(seed, 6);
    for (double x : {-0.75, -0.2, 0.15, 0.6}) {
      const auto v = conditional_maximal_1d(f, x);
      const double brute = brute_conditional(f, x, 300, 20000);
      CHECK(v.value >= brute - 1e-6);
      CHECK(v.value <= brute + 2e-2 * std::max(1.0, brute));
      CHECK(v.value <= line_maximal_abs(f, x) + 1e-8);
      for (const auto& w : v.witnesses) {
        CHECK(w.a <= x);
        CHECK(w.b >= x);
        CHECK(std::abs(w.moment) <= 1e-10 * abs_moment(f, x, w.a, w.b) + 1e-300);
      }
    }
  }
}

TEST_CASE("line maximal function of |F| is exact on a step") {
  // |F| = 1 on [-1, 1]: M|F| = 1 inside, 2 / (1 + |x|) outside.
  const LineField f = dipole();
  CHECK(line_maximal_abs(f, 0.3) == doctest::Approx(1.0));
  CHECK(line_maximal_abs(f, 3.0) == doctest::Approx(0.5));
  CHECK(line_maximal_abs(f, -1.5) == doctest::Approx(0.8));
}

TEST_CASE("dilation covariance") {
  const LineField f = random_line_field(21, 8);
  for (double lambda : {0.5, 3.0}) {
    const LineField g = f.dilated(lambda);
    for (double x : {-0.9, -0.3, 0.4, 1.5}) {
      const double a = conditional_maximal_1d(f, x).value;
      const double b = conditional_maximal_1d(g, lambda * x).value;
      CHECK(std::abs(a - b) <= 1e-6 * std::max(1.0, a));
    }
  }
}

TEST_CASE("family members and ratio trends") {
  for (auto fam : {LineFamily::scaled_bump, LineFamily::dyadic_comb,
                   LineFamily::modulated_packet}) {
    for (int l = 0; l < 3; ++l) CHECK(line_family_member(fam, l).norm_l1() > 0.0);
  }
  CHECK(line_family_member(LineFamily::dyadic_comb, 2).pieces() == 8);
  ExplorerOptions opts;
  opts.curve_samples = 8;
  const auto trends = ratio_scan({LineFamily::scaled_bump}, 3, 61, opts);
  REQUIRE(trends.size() == 1);
  const auto& pts = trends[0].points;
  REQUIRE(pts.size() == 3);
  // Dilation leaves the ratio unchanged.
  CHECK(pts[1].ratio == doctest::Approx(pts[0].ratio).epsilon(1e-6));
  CHECK(pts[2].ratio == doctest::Approx(pts[0].ratio).epsilon(1e-6));
  CHECK_FALSE(trends[0].growing);
  const std::string csv = ratio_trends_to_csv(trends);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}

TEST_CASE("symmetric roots") {
  // F = 2, -2, 2 is even about 0, so F(y) y is odd and every symmetric
  // interval has zero moment.
  const LineField even({-1.0, -0.5, 0.5, 1.0}, {0.0, 1.0, -1.0, 0.0});
  for (double a : {-0.8, -0.3}) {
    const auto roots = moment_roots(even, 0.0, a);
    CHECK(std::any_of(roots.begin(), roots.end(),
                      [&](double b) { return std::abs(b + a) <= 1e-12; }));
  }
  // Constant piece around x: m(b) = c((b - x)^2 - (a - x)^2) / 2.
  const auto roots = moment_roots(even, 0.1, -0.2);
  CHECK(std::any_of(roots.begin(), roots.end(),
                    [](double b) { return std::abs(b - 0.4) <= 1e-12; }));
}

TEST_CASE("zero field and symmetric tent") {
  const LineField zero({-1.0, 1.0}, {0.0, 0.0});
  for (double x : {-0.5, 0.0, 0.7}) CHECK(conditional_maximal_1d(zero, x).value == 0.0);

  const LineField tent({-1.0, 0.0, 1.0}, {0.0, 1.0, 0.0});
  const auto v = conditional_maximal_1d(tent, 0.0);
  CHECK(v.value <= line_maximal_abs(tent, 0.0) + 1e-8);
  for (const auto& w : v.witnesses) CHECK(w.a <= 0.0);
}

TEST_CASE("no families, no trends") {
  CHECK(ratio_scan({}, 4, 51).empty());
  CHECK(ratio_trends_to_csv({}).find('\n') != std::string::npos);
}
