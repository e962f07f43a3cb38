#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "radmax/maximal.hpp"
#include "test_support.hpp"

using namespace radmax;
using radmax::testing::random_profile;

namespace {

RadialProfile tent(int n) { return RadialProfile(n, {0.0, 1.0}, {1.0, 0.0}); }

RadialProfile annular(int n) {
  return RadialProfile(n, {0.0, 1.0, 1.5, 2.0}, {0.0, 0.0, 1.0, 0.0});
}

RadialProfile two_bumps(int n) {
  return RadialProfile(n, {0.0, 0.3, 0.5, 0.7, 1.2, 1.4, 1.6},
                       {0.0, 0.0, 1.0, 0.0, 0.0, 0.6, 0.0});
}

// Largest average over a dense (d, r) grid of admissible balls.
double dense_grid_oracle(const MaximalEngine& e, double s, int steps) {
  const double tn = e.abs().support_end();
  const double L = std::max(s, tn);
  double best = evaluate(e.abs(), s);
  for (int i = 0; i <= steps; ++i) {
    const double d = 2.2 * L * i / steps;
    for (int j = 0; j <= steps; ++j) {
      const double extra = L * std::pow(10.0, -4.0 + 4.5 * j / steps);
      const double r = std::abs(s - d) + extra;
      best = std::max(best, e.average(d, r));
    }
  }
  return best;
}

// Mass of the line tent 1 - |y| on [a, 1].
double tent_mass_from(double a) {
  auto prim = [](double y) { return y >= 0 ? y - 0.5 * y * y : y + 0.5 * y * y; };
  return prim(1.0) - prim(std::max(a, -1.0));
}

double discrete_variation(const std::vector<double>& v) {
  double tv = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) tv += std::abs(v[i] - v[i - 1]);
  return tv;
}

}  // namespace

TEST_CASE("operator codes round trip") {
  for (Operator op : {Operator::noncentered, Operator::centered, Operator::inner,
                      Operator::endpoint})
    CHECK(parse_operator(operator_code(op)) == op);
  CHECK(operator_code(Operator::endpoint) == "f4");
  CHECK_THROWS_AS(parse_operator("x"), std::invalid_argument);
}

TEST_CASE("decreasing tent attains its value at the origin") {
  for (int n : {1, 2, 3}) {
    CHECK(maximal_value(tent(n), 0.0, Operator::noncentered).value == doctest::Approx(1.0));
    CHECK(value_at_origin(tent(n), Operator::noncentered) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(value_at_origin(tent(n), Operator::centered) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("plateau gives its constant") {
  const RadialProfile p(2, {0.0, 10.0, 11.0}, {1.5, 1.5, 0.0});
  const auto m = maximal_value(p, 2.0, Operator::noncentered);
  CHECK(m.value == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(maximal_value(p, 2.0, Operator::centered).value == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("zero profile") {
  const auto z = RadialProfile::zero(3);
  CHECK(value_at_origin(z, Operator::noncentered) == 0.0);
  CHECK(maximal_value(z, 0.7, Operator::inner).value == 0.0);
  CHECK_THROWS_AS(value_at_origin(z, Operator::inner), std::invalid_argument);
  CHECK_THROWS_AS(maximal_value(z, 0.0, Operator::endpoint), std::invalid_argument);
}

TEST_CASE("n=1 tent at s=2 matches a dense left-endpoint scan") {
  // Intervals [a, 2]; anything extending past 2 only adds zero mass.
  double best = 0.0;
  const int N = 100000;
  for (int i = 0; i < N; ++i) {
    const double a = -1.0 + 2.0 * i / N;
    best = std::max(best, tent_mass_from(a) / (2.0 - a));
  }
  const double v = maximal_value(tent(1), 2.0, Operator::noncentered).value;
  CHECK(v == doctest::Approx(best).epsilon(1e-8));
  CHECK(interval_maximal_1d(tent(1), 2.0) == doctest::Approx(best).epsilon(1e-8));
}

TEST_CASE("annular bump at the origin against a dense grid") {
  const MaximalEngine e(annular(2));
  const double v = value_at_origin(annular(2), Operator::noncentered);
  const double grid = dense_grid_oracle(e, 0.0, 400);
  CHECK(v > 0.0);
  CHECK(v >= grid - 1e-12);
  CHECK(v - grid < 1e-3);
}

TEST_CASE("engine is never beaten by a dense grid on random profiles") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 12; ++trial) {
    const int n = 2 + trial % 2;
    const RadialProfile p = random_profile(rng, n, 4 + trial % 5, true, 1.5);
    const MaximalEngine e(p);
    for (double frac : {0.1, 0.5, 0.9, 1.3}) {
      const double s = frac * p.support_end();
      const auto m = e.evaluate(s, Operator::noncentered);
      CHECK(m.value >= dense_grid_oracle(e, s, 14) - 1e-10);
    }
  }
}

TEST_CASE("small outward balls just left of a kinked peak") {
  // The optimal ball has radius ~1e-4 and the family slope there is far
  // below the largest slope along the family.
  const RadialProfile p(2, {0.0, 0.3, 0.4, 1.0}, {0.0, 0.0, 0.5, 0.0});
  for (double eps : {1e-6, 1e-5, 4e-5, 2e-4}) {
    const double s = 0.4 - eps;
    double best = 0.0;
    for (int i = 40; i <= 4000; ++i) {
      const double r = 2.5 * eps * i / 4000.0;
      best = std::max(best, ball_average(p, AxisBall(s + r, r, 2)));
    }
    const MaximalEngine e(p);
    const MaximalSample m = e.evaluate(s, Operator::noncentered);
    // Quadrature is accurate to a relative 1e-9; the floor sits 5 eps lower.
    CHECK(m.value >= best * (1.0 - 1e-9));
    CHECK(m.value > evaluate(p, s) + eps);
  }
}

TEST_CASE("sample invariants: floor, admissibility, value at argmax") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 1 + trial % 3;
    const RadialProfile p = random_profile(rng, n, 6, true, 2.0);
    const MaximalEngine e(p);
    for (Operator op : {Operator::noncentered, Operator::centered, Operator::inner,
                        Operator::endpoint}) {
      const auto field = e.field(uniform_grid(2.5, 24), op);
      for (const auto& smp : field.samples) {
        const double f = evaluate(e.abs(), smp.s);
        if (op != Operator::endpoint) CHECK(smp.value >= f - 1e-12);
        if (smp.is_floor()) {
          CHECK(smp.value == doctest::Approx(f));
          continue;
        }
        const double d = smp.center(), r = smp.radius();
        CHECK(std::abs(smp.s - d) <= r * (1 + 1e-9));
        if (op == Operator::centered) CHECK(d == doctest::Approx(smp.s));
        if (op == Operator::inner) CHECK(r <= 0.25 * smp.s * (1 + 1e-12));
        if (op == Operator::endpoint) CHECK(r == doctest::Approx(0.25 * smp.s));
        CHECK(e.average(d, r) == doctest::Approx(smp.value).epsilon(1e-12));
        REQUIRE(smp.c.has_value());
        CHECK(*smp.c * smp.s == doctest::Approx(d));
      }
    }
  }
}

TEST_CASE("orderings between the operators") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 2 + trial % 2;
    const RadialProfile p = random_profile(rng, n, 7, true, 1.0);
    const MaximalEngine e(p);
    const auto g = uniform_grid(1.4, 40);
    const auto m = e.field(g, Operator::noncentered).values();
    const auto mc = e.field(g, Operator::centered).values();
    const auto mi = e.field(g, Operator::inner).values();
    const auto f4 = e.field(g, Operator::endpoint).values();
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(f4[i] <= mi[i] + 1e-8);
      CHECK(mi[i] <= m[i] + 1e-8);
      CHECK(mc[i] <= m[i] + 1e-8);
    }
  }
}

TEST_CASE("radially decreasing input gives a non-increasing field") {
  const RadialProfile p(2, {0.0, 0.4, 1.0, 1.3}, {1.0, 0.8, 0.2, 0.0});
  const auto v = maximal_field(p, uniform_grid(2.0, 64), Operator::noncentered).values();
  for (std::size_t i = 1; i < v.size(); ++i) CHECK(v[i] <= v[i - 1] + 1e-10);
}

TEST_CASE("warm start agrees with cold start on the audited samples") {
  EngineOptions opts;
  opts.audit_stride = 3;
  const auto f = maximal_field(two_bumps(2), uniform_grid(2.0, 96), Operator::noncentered, opts);
  CHECK(f.audits.size() >= 25);
  CHECK(f.max_audit_gap() <= 1e-9);
}

TEST_CASE("off-axis balls never beat the axis optimum") {
  const RadialProfile p = two_bumps(2);
  const MaximalEngine e(p);
  for (double s : {0.2, 0.6, 1.0, 1.8}) {
    const double v = e.evaluate(s, Operator::noncentered).value;
    CHECK(brute_force_offaxis(p, s, 3000, 17) <= v + 1e-6);
  }
  // On a plateau nothing exceeds the constant.
  const RadialProfile plateau(2, {0.0, 5.0, 6.0}, {1.0, 1.0, 0.0});
  CHECK(brute_force_offaxis(plateau, 1.0, 2000, 3) <= 1.0 + 1e-12);
}

TEST_CASE("n=1 engine matches the interval search and the variation bound") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    const RadialProfile p = random_profile(rng, 1, 5 + trial, true, 1.0);
    const MaximalEngine e(p);
    const auto g = uniform_grid(1.5, 60);
    const auto field = e.field(g, Operator::noncentered);
    for (const auto& smp : field.samples)
      CHECK(smp.value == doctest::Approx(interval_maximal_1d(p, smp.s, 600)).epsilon(1e-9));

    // The even extension has twice the radial variation; sigma_1 = 2 already
    // accounts for that in grad_norm_l1. Past the last sample Mf decays
    // monotonically to 0.
    std::vector<double> mv{e.evaluate(0.0, Operator::noncentered).value};
    for (const auto& smp : field.samples) mv.push_back(smp.value);
    mv.push_back(0.0);
    CHECK(2.0 * discrete_variation(mv) <= grad_norm_l1(p) * (1 + 1e-3));
  }
}

TEST_CASE("dilation covariance") {
  const RadialProfile p = two_bumps(3);
  const double lambda = 2.5;
  std::vector<double> g(p.grid().begin(), p.grid().end());
  for (double& t : g) t *= lambda;
  const RadialProfile q(3, g, std::vector<double>(p.values().begin(), p.values().end()));
  const MaximalEngine ep(p), eq(q);
  for (double s : {0.1, 0.45, 0.9, 1.5, 2.2}) {
    for (Operator op : {Operator::noncentered, Operator::inner}) {
      CHECK(eq.evaluate(lambda * s, op).value ==
            doctest::Approx(ep.evaluate(s, op).value).epsilon(1e-9));
    }
  }
}

TEST_CASE("results do not depend on the worker count") {
  EngineOptions one, many;
  one.workers = 1;
  many.workers = 3;
  const auto g = uniform_grid(2.0, 100);
  const auto a = maximal_field(annular(2), g, Operator::noncentered, one);
  const auto b = maximal_field(annular(2), g, Operator::noncentered, many);
  CHECK(field_to_csv(a) == field_to_csv(b));
  CHECK(field_to_json(a, "h") == field_to_json(b, "h"));
}

TEST_CASE("field CSV layout") {
  const auto f = maximal_field(tent(2), uniform_grid(1.0, 4), Operator::noncentered);
  std::istringstream in(field_to_csv(f));
  std::string line;
  std::getline(in, line);
  CHECK(line == "s,value,d,r,c,multi_modal");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 5);
  }
  CHECK(rows == 4);
}

TEST_CASE("grids") {
  const auto g = uniform_grid(2.0, 4);
  CHECK(g == std::vector<double>{0.5, 1.0, 1.5, 2.0});
  const auto d = default_sample_grid(tent(2), 256);
  CHECK(std::is_sorted(d.begin(), d.end()));
  CHECK(std::adjacent_find(d.begin(), d.end()) == d.end());
  CHECK(d.front() > 0.0);
  CHECK_THROWS_AS(uniform_grid(0.0, 3), std::invalid_argument);
}

TEST_CASE("bad fields are rejected") {
  const std::vector<double> bad{0.5, 0.5};
  CHECK_THROWS_AS(maximal_field(tent(2), bad, Operator::noncentered), std::invalid_argument);
  const std::vector<double> with_zero{0.0, 0.5};
  CHECK_THROWS_AS(maximal_field(tent(2), with_zero, Operator::inner), std::invalid_argument);
}
