#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "radmax/profile.hpp"
#include "test_support.hpp"

using namespace radmax;
using radmax::testing::midpoint;
using radmax::testing::random_profile;

namespace {
const RadialProfile kTent(2, {0.0, 1.0}, {1.0, 0.0});
}

TEST_CASE("profile validation") {
  CHECK_THROWS_AS(RadialProfile(2, {0.0}, {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(RadialProfile(2, {0.0, 0.0}, {1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(RadialProfile(2, {0.0, 1.0}, {1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(RadialProfile(0, {0.0, 1.0}, {1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(RadialProfile(2, {-1.0, 1.0}, {1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(AnnulusRange(2.0, 1.0), std::invalid_argument);
}

TEST_CASE("evaluate and derivative") {
  CHECK(evaluate(kTent, 0.5) == doctest::Approx(0.5));
  CHECK(evaluate(kTent, 2.0) == 0.0);
  CHECK(evaluate(kTent, 0.0) == 1.0);
  CHECK(derivative_at(kTent, 0.5) == -1.0);
  CHECK(derivative_at(kTent, 2.0) == 0.0);
  const RadialProfile bump(2, {0.0, 1.0, 2.0}, {0.0, 1.0, 0.0});
  CHECK(derivative_at(bump, 1.5) == -1.0);
  // right-hand slope at a knot
  CHECK(derivative_at(bump, 1.0) == -1.0);

  const RadialProfile offset(3, {0.5, 1.0}, {2.0, 0.0});
  CHECK(evaluate(offset, 0.1) == 2.0);
  CHECK(derivative_at(offset, 0.1) == 0.0);
}

TEST_CASE("weighted norms") {
  const RadialProfile tent1(1, {0.0, 1.0}, {1.0, 0.0});
  CHECK(grad_norm_l1(tent1) == doctest::Approx(2.0));
  CHECK(grad_norm_l1(kTent) == doctest::Approx(std::numbers::pi));
  CHECK(grad_norm_l1(kTent, AnnulusRange(0.3, 0.3)) == 0.0);
  // ||f||_1 for the n=2 tent: 2 pi int_0^1 (1-t) t dt = pi/3
  CHECK(norm_l1(kTent) == doctest::Approx(std::numbers::pi / 3.0));
  // constant extension below t_0 contributes |f(t_0)| t_0^n / n
  const RadialProfile offset(3, {0.5, 1.0}, {2.0, 0.0});
  const double expect = 4.0 * std::numbers::pi *
                        (2.0 * std::pow(0.5, 3) / 3.0 +
                         midpoint([](double t) { return (2.0 - 4.0 * (t - 0.5)) * t * t; }, 0.5,
                                  1.0, 20000));
  CHECK(norm_l1(offset) == doctest::Approx(expect).epsilon(1e-8));
}

TEST_CASE("norms agree with a dense midpoint rule") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 1 + trial % 4;
    const RadialProfile p = random_profile(rng, n, 7, true, 2.0);
    const double sigma = sphere_surface(n);
    const double l1 = sigma * midpoint([&](double t) {
      return std::abs(evaluate(p, t)) * std::pow(t, n - 1);
    }, 0.0, 2.0, 400000);
    const double g1 = sigma * midpoint([&](double t) {
      return std::abs(derivative_at(p, t)) * std::pow(t, n - 1);
    }, 0.0, 2.0, 400000);
    CHECK(norm_l1(p) == doctest::Approx(l1).epsilon(1e-6));
    // the midpoint rule is only O(h) accurate across slope jumps
    CHECK(grad_norm_l1(p) == doctest::Approx(g1).epsilon(2e-5));
  }
}

TEST_CASE("abs_profile") {
  const RadialProfile p(2, {0.0, 1.0, 2.0}, {-1.0, 1.0, 0.0});
  const RadialProfile a = abs_profile(p);
  CHECK(a == RadialProfile(2, {0.0, 0.5, 1.0, 2.0}, {1.0, 0.0, 1.0, 0.0}));
  const RadialProfile pos(2, {0.0, 1.0, 2.0}, {0.5, 1.0, 0.0});
  CHECK(abs_profile(pos) == pos);
  const RadialProfile cross(2, {0.0, 2.0, 3.0}, {1.0, -1.0, 0.0});
  const RadialProfile ac = abs_profile(cross);
  REQUIRE(ac.size() == 4);
  CHECK(ac.grid()[1] == doctest::Approx(1.0));
  CHECK(ac.values()[1] == 0.0);
}

TEST_CASE("abs_profile preserves gradient and L1 norms (property)") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const RadialProfile p = random_profile(rng, 1 + trial % 5, 3 + trial % 9, true);
    const RadialProfile a = abs_profile(p);
    CHECK(grad_norm_l1(a) == doctest::Approx(grad_norm_l1(p)).epsilon(1e-12));
    CHECK(norm_l1(a) == doctest::Approx(norm_l1(p)).epsilon(1e-12));
    for (double v : a.values()) CHECK(v >= 0.0);
  }
}

TEST_CASE("combine_max") {
  SUBCASE("idempotent") {
    const auto c = combine_max(kTent, kTent);
    CHECK(c.profile == kTent);
  }
  SUBCASE("max with zero") {
    const auto c = combine_max(kTent, RadialProfile::zero(2, 1.0));
    CHECK(c.profile == kTent);
  }
  SUBCASE("symmetric crossing") {
    const RadialProfile p(2, {0.0, 2.0}, {1.0, 0.0});
    const RadialProfile q(2, {0.0, 2.0, 3.0}, {0.0, 1.0, 0.0});
    const auto c = combine_max(p, q);
    REQUIRE(c.profile.size() == 4);
    CHECK(c.profile.grid()[1] == doctest::Approx(1.0));
    CHECK(c.slope[0] == doctest::Approx(-0.5));
    CHECK(c.slope[1] == doctest::Approx(0.5));
    CHECK(c.source[0] == MaxSource::first);
    CHECK(c.source[1] == MaxSource::second);
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(combine_max(kTent, kTent.with_dimension(3)), std::invalid_argument);
  }
}

TEST_CASE("combine_max gradient bound and slope assembly (property)") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 4;
    const RadialProfile p = random_profile(rng, n, 2 + trial % 7, true, 1.0 + 0.1 * (trial % 5));
    const RadialProfile q = random_profile(rng, n, 2 + trial % 5, true, 1.3);
    const auto c = combine_max(p, q);
    CHECK(grad_norm_l1(c.profile) <= grad_norm_l1(p) + grad_norm_l1(q) + 1e-12);
    const auto g = c.profile.grid();
    const auto v = c.profile.values();
    for (std::size_t k = 0; k + 1 < g.size(); ++k) {
      const double mid = 0.5 * (g[k] + g[k + 1]);
      CHECK(v[k] == doctest::Approx(std::max(evaluate(p, g[k]), evaluate(q, g[k]))));
      CHECK(evaluate(c.profile, mid) ==
            doctest::Approx(std::max(evaluate(p, mid), evaluate(q, mid))).epsilon(1e-9));
      CHECK(c.slope[k] == doctest::Approx((v[k + 1] - v[k]) / (g[k + 1] - g[k])).epsilon(1e-7));
    }
  }
}

TEST_CASE("annulus sandwich (property)") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 4;
    const RadialProfile p = random_profile(rng, n, 8, true, 2.0);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    const RadialProfile one_d = p.with_dimension(1);
    // sigma_1 int_a^b |f'| = 2 int_a^b |f'|
    const double plain = grad_norm_l1(one_d, AnnulusRange(a, b)) / 2.0;
    const double sigma = sphere_surface(n);
    const double mid = grad_norm_l1(p, AnnulusRange(a, b));
    CHECK(sigma * std::pow(a, n - 1) * plain <= mid * (1 + 1e-12) + 1e-15);
    CHECK(mid <= sigma * std::pow(b, n - 1) * plain * (1 + 1e-12) + 1e-15);
  }
}

TEST_CASE("file formats round-trip bit-exactly") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const RadialProfile p = random_profile(rng, 1 + trial % 4, 2 + trial % 11, true, 3.7);
    CHECK(profile_from_json(to_json(p)) == p);
    CHECK(profile_from_csv(to_csv(p)) == p);
  }
  CHECK_THROWS(profile_from_json(R"({"dimension":2,"grid":[0,1],"values":[1,0],"x":1})"));
  CHECK_THROWS(profile_from_csv("0,1\n1,0\n"));
  CHECK_THROWS_AS(load_profile("/nonexistent/profile.json"), std::runtime_error);
}
