#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "radmax/derivative.hpp"
#include "test_support.hpp"

using namespace radmax;

namespace {

RadialProfile two_bumps(int n) {
  return RadialProfile(n, {0.0, 0.3, 0.5, 0.7, 1.2, 1.4, 1.6},
                       {0.0, 0.0, 1.0, 0.0, 0.0, 0.6, 0.0});
}

RadialProfile plateau(int n) { return RadialProfile(n, {0.0, 4.0, 5.0}, {2.0, 2.0, 0.0}); }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST_CASE("constant profile has vanishing derivatives") {
  const RadialProfile p = plateau(2);
  const AxisBall b(1.0, 0.5, 2);
  CHECK(radial_derivative_formula(p, 1.2, b) == 0.0);
  CHECK(optimality_residual(p, 1.2, b).value == 0.0);
  CHECK(boundary_derivative_magnitude(p, 1.5, b) == 0.0);
  for (auto fam : {AffineFamily::translate, AffineFamily::dilate_about,
                   AffineFamily::rescale_center}) {
    const auto pd = affine_perturbation_derivative(p, b, {fam, {0.6, 0.8}, 1.2});
    CHECK(pd.kernel == 0.0);
    CHECK(std::abs(pd.finite_difference) < 1e-9);
  }
}

TEST_CASE("optimality residual vanishes at argmax balls and detects perturbations") {
  for (int n : {2, 3}) {
    const RadialProfile p = two_bumps(n);
    const MaximalEngine e(p);
    for (double s : {0.25, 0.8, 1.3}) {
      const auto m = e.evaluate(s, Operator::noncentered);
      REQUIRE_FALSE(m.is_floor());
      const auto r = optimality_residual(p, s, *m.argmax);
      CHECK(std::abs(r.value) <= 1e-6 * r.normalizer);
      const AxisBall wide(m.center(), 1.1 * m.radius(), n);
      const auto rp = optimality_residual(p, s, wide);
      CHECK(std::abs(rp.value) > 1e-3 * rp.normalizer);
    }
  }
}

TEST_CASE("boundary magnitude agrees with the radial formula at argmax balls") {
  const RadialProfile p = two_bumps(2);
  const MaximalEngine e(p);
  for (double s : {0.25, 0.8, 1.3}) {
    const auto m = e.evaluate(s, Operator::noncentered);
    const AxisBall& b = *m.argmax;
    const auto res = optimality_residual(p, s, b);
    const double slack = std::abs(res.value) / (s * b.volume());
    const double radial = radial_derivative_formula(p, s, b);
    CHECK(std::abs(boundary_derivative_magnitude(p, s, b) - std::abs(radial)) <= 1e-6 + slack);

    // A ball that still has s on its boundary but is not optimal.
    const double r2 = 1.2 * b.radius();
    const double d2 = b.center() > s ? s + r2 : s - r2;
    const AxisBall off(d2, r2, 2);
    CHECK(std::abs(boundary_derivative_magnitude(p, s, off) -
                   std::abs(radial_derivative_formula(p, s, off))) > 1e-3);
  }
  CHECK_THROWS_AS(boundary_derivative_magnitude(p, 0.5, AxisBall(0.5, 0.2, 2)),
                  std::invalid_argument);
}

TEST_CASE("affine families: kernel against Richardson differences") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int n : {2, 3}) {
    const RadialProfile p = two_bumps(n);
    for (int k = 0; k < 4; ++k) {
      const double s = 0.2 + 1.3 * u(rng);
      const double r = 0.05 + 0.5 * u(rng);
      const double d = std::max(0.0, s + (2.0 * u(rng) - 1.0) * r);
      const AxisBall b(d, r, n);
      for (auto fam : {AffineFamily::translate, AffineFamily::dilate_about,
                       AffineFamily::rescale_center}) {
        const auto pd = affine_perturbation_derivative(p, b, {fam, {0.6, 0.8}, s});
        CHECK(std::abs(pd.kernel) <= pd.scale * (1 + 1e-9));
        CHECK(std::abs(pd.kernel - pd.finite_difference) <=
              1e-5 * std::max(std::abs(pd.kernel), 1e-6 * pd.scale));
      }
    }
  }
}

TEST_CASE("dilation about x is the residual family") {
  const RadialProfile p = two_bumps(3);
  const AxisBall b(0.9, 0.4, 3);
  const double s = 1.1;
  const auto pd = affine_perturbation_derivative(p, b, {AffineFamily::dilate_about, {}, s});
  CHECK(pd.kernel == doctest::Approx(optimality_residual(p, s, b).value / b.volume()));
}

TEST_CASE("one-sided dilation quotients change sign and vanish at argmax balls") {
  const RadialProfile p = two_bumps(2);
  const MaximalEngine e(p);
  for (double s : {0.25, 0.8, 1.3}) {
    const auto m = e.evaluate(s, Operator::noncentered);
    double prev = 1e300;
    for (double h : {1e-2, 1e-3, 1e-4}) {
      const auto q = dilation_quotients(p, *m.argmax, s, h);
      CHECK(q.plus <= 0.0);
      CHECK(q.minus >= 0.0);
      const double size = std::max(std::abs(q.plus), std::abs(q.minus));
      CHECK(size < 0.5 * prev);
      prev = size;
    }
  }
}

TEST_CASE("finite differences are exact on quadratics") {
  const std::vector<double> x{0.0, 0.1, 0.25, 0.7, 1.0};
  std::vector<double> y;
  for (double t : x) y.push_back(3 * t * t - t + 2);
  const auto d = finite_differences(x, y);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(d[i] == doctest::Approx(6 * x[i] - 1));
  CHECK_THROWS_AS(finite_differences(std::vector<double>{0, 1}, std::vector<double>{0, 1}),
                  std::invalid_argument);
}

TEST_CASE("field of a plateau has zero derivative") {
  const RadialProfile p = plateau(2);
  const auto field = maximal_field(p, uniform_grid(3.0, 64), Operator::noncentered);
  for (const auto& row : finite_difference_field(p, field)) {
    CHECK(std::abs(row.fd_derivative) < 1e-9);
    CHECK(row.classification == BallClass::skipped);
  }
}

TEST_CASE("tent: formula matches finite differences on a fine field") {
  const RadialProfile p(2, {0.0, 1.0}, {1.0, 0.0});
  const auto field = maximal_field(p, uniform_grid(2.0, 1024), Operator::noncentered);
  std::vector<double> gaps;
  for (const auto& row : finite_difference_field(p, field)) {
    if (row.classification != BallClass::boundary_ball) continue;
    gaps.push_back(std::abs(row.fd_derivative - row.formula_derivative) /
                   std::abs(row.formula_derivative));
    CHECK(std::abs(row.residual_moment) <= 1e-6 * row.normalizer);
  }
  REQUIRE(gaps.size() > 500);
  CHECK(median(gaps) <= 1e-3);
}

TEST_CASE("fd gap shrinks under grid doubling") {
  const RadialProfile p = two_bumps(2);
  const MaximalEngine e(p);
  double prev = 1e300;
  for (int m : {128, 256, 512}) {
    const auto field = e.field(uniform_grid(2.0, m), Operator::noncentered);
    std::vector<double> gaps;
    for (const auto& row : finite_difference_field(p, field)) {
      if (row.classification == BallClass::skipped) continue;
      gaps.push_back(std::abs(row.fd_derivative - row.formula_derivative) /
                     std::max(std::abs(row.formula_derivative), 1e-12));
      if (row.classification == BallClass::interior_ball)
        CHECK(std::abs(row.fd_derivative) <= row.grid_tolerance);
    }
    const double g = median(gaps);
    CHECK(g < prev);
    prev = g;
  }
  CHECK(prev <= 1e-3);
}

TEST_CASE("derivative CSV has one row per sample") {
  const RadialProfile p = two_bumps(2);
  const auto field = maximal_field(p, uniform_grid(2.0, 8), Operator::noncentered);
  const std::string csv = derivative_samples_to_csv(finite_difference_field(p, field));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 9);
  CHECK(csv.rfind("s,value,fd_derivative,", 0) == 0);
}
