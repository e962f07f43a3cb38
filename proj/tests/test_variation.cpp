#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "radmax/corpus.hpp"
#include "radmax/variation.hpp"

using namespace radmax;

namespace {

RadialProfile tent(int n) { return RadialProfile(n, {0.0, 1.0}, {1.0, 0.0}); }

RadialProfile two_bumps(int n) {
  return RadialProfile(n, {0.0, 0.3, 0.5, 0.7, 1.2, 1.4, 1.6},
                       {0.0, 0.0, 1.0, 0.0, 0.0, 0.6, 0.0});
}

struct Fields {
  MaximalField m, mi, f4;
  std::vector<DerivativeSample> rows;
};

Fields fields(const RadialProfile& p, int samples) {
  const MaximalEngine e(p);
  const auto grid = uniform_grid(2.0 * p.support_end(), samples);
  Fields f{e.field(grid, Operator::noncentered), e.field(grid, Operator::inner),
           e.field(grid, Operator::endpoint), {}};
  f.rows = finite_difference_field(p, f.m);
  return f;
}

}  // namespace

TEST_CASE("surface over volume is the dimension") {
  CHECK(sphere_surface(2) / unit_ball_volume(2) == doctest::Approx(2.0));
  CHECK(sphere_surface(3) / unit_ball_volume(3) == doctest::Approx(3.0));
}

TEST_CASE("weighted variation of a step") {
  const std::vector<double> s{0.0, 1.0, 2.0, 3.0};
  const std::vector<double> v{1.0, 1.0, 0.0, 0.0};
  // One jump of size 1 at midpoint 1.5.
  CHECK(weighted_variation(s, v, 1) == doctest::Approx(2.0));
  CHECK(weighted_variation(s, v, 2) == doctest::Approx(2 * std::numbers::pi * 1.5));
  CHECK(weighted_variation(s, v, 2, 0.0, 1.5) == 0.0);
}

TEST_CASE("Fubini identity on the corpus") {
  for (int n : {2, 3}) {
    CorpusSpec spec;
    spec.dimension = n;
    spec.families = default_families();
    for (const auto& item : corpus_generate(spec)) {
      const auto fb = fubini_identity_check(item.profile);
      CHECK(fb.rhs == doctest::Approx(n * grad_norm_l1(item.profile)));
      CHECK(fb.relative_gap() <= 1e-4);
    }
  }
  const auto zero = fubini_identity_check(RadialProfile::zero(2));
  CHECK(zero.lhs == 0.0);
  CHECK(zero.rhs == 0.0);
}

TEST_CASE("variation ratios: tent in two dimensions and on the line") {
  const Operator ops[] = {Operator::noncentered};
  const auto r2 = variation_report(tent(2), ops, 1024);
  REQUIRE(r2.size() == 1);
  CHECK(r2[0].ratio <= 8.0);
  CHECK(r2[0].ratio >= 1.0);
  CHECK(r2[0].relative_change <= 1e-2);
  const auto r1 = variation_report(tent(1), ops, 1024);
  CHECK(r1[0].ratio <= 1.0 + 1e-3);

  const auto z = variation_report(RadialProfile::zero(2), ops, 64);
  CHECK(z[0].norm_dmf == 0.0);
  CHECK(z[0].norm_df == 0.0);
  CHECK(z[0].ratio == 0.0);
}

TEST_CASE("decreasing profiles: pointwise bound and ball membership") {
  CorpusSpec spec;
  spec.families = {DecreasingTent{1.0, 1.0}, DecreasingExponential{0.4, 2.0}};
  for (int n : {2, 3}) {
    spec.dimension = n;
    for (const auto& item : corpus_generate(spec)) {
      const Fields f = fields(item.profile, 256);
      const auto rows = decreasing_bound_rows(item.profile, f.m, f.rows);
      CHECK(rows.size() > 100);
      for (const auto& r : rows) CHECK_MESSAGE(r.pass(), r.check << " at s=" << r.s);

      const auto cls = classify_argmax(item.profile, f.m, f.mi, f.rows);
      CHECK(cls.e_plus == 0);
      CHECK(cls.middle == 0);
      CHECK(cls.e_minus > 0);
      for (const auto& r : cls.rows) CHECK_MESSAGE(r.pass(), r.check << " at s=" << r.s);

      // Mf > |f| up to both ends of the grid: no interior component.
      CHECK(strict_local_max_check(f.m, item.profile).empty());
    }
  }
  CHECK(decreasing_bound_rows(RadialProfile::zero(2), fields(RadialProfile::zero(2), 32).m,
                              fields(RadialProfile::zero(2), 32).rows)
            .empty());
}

TEST_CASE("far thin bump has argmax balls reaching outward") {
  CorpusSpec spec;
  spec.families = {FarThinBump{1.6, 0.05, 1.0}};
  spec.dimension = 2;
  const auto p = corpus_generate(spec)[0].profile;
  const Fields f = fields(p, 512);
  const auto cls = classify_argmax(p, f.m, f.mi, f.rows);
  CHECK(cls.e_plus > 0);
  CHECK(cls.middle == 0);
  for (const auto& r : cls.rows) CHECK_MESSAGE(r.pass(), r.check << " at s=" << r.s);
}

TEST_CASE("two bumps: components, endpoint bound and the chain") {
  for (int n : {2, 3}) {
    const RadialProfile p = two_bumps(n);
    const Fields f = fields(p, 512);
    const auto comps = strict_local_max_check(f.m, p);
    REQUIRE_FALSE(comps.empty());
    for (const auto& c : comps) CHECK(c.pass);

    for (const auto& r : endpoint_bound_rows(p, f.f4)) CHECK_MESSAGE(r.pass(), "s=" << r.s);

    const ChainCheck ch = truncated_chain_check(p, f.mi, f.f4);
    CHECK(ch.norm_dmi > 0.0);
    CHECK(ch.pass);
    CHECK(ch.annuli_pass);
    CHECK_FALSE(ch.annuli.empty());
  }
}

TEST_CASE("an injected spike is caught") {
  const RadialProfile p = two_bumps(2);
  const Fields f = fields(p, 512);
  const auto comps = strict_local_max_check(f.m, p);
  const auto it = std::find_if(comps.begin(), comps.end(),
                               [](const ComponentOutcome& c) { return c.last - c.first >= 4; });
  REQUIRE(it != comps.end());
  const auto s = f.m.grid();
  auto v = f.m.values();
  v[it->valley] += 0.5 * (v[it->first] - v[it->valley]) + 1e-3;
  const auto bad = strict_local_max_check(s, v, p);
  CHECK(std::any_of(bad.begin(), bad.end(), [](const ComponentOutcome& c) { return !c.pass; }));
}

TEST_CASE("truncated fields must cover twice the support") {
  const RadialProfile p = two_bumps(2);
  const MaximalEngine e(p);
  const auto grid = uniform_grid(p.support_end(), 64);
  const auto mi = e.field(grid, Operator::inner);
  const auto f4 = e.field(grid, Operator::endpoint);
  CHECK_THROWS_AS(truncated_chain_check(p, mi, f4), std::invalid_argument);
  CHECK_THROWS_AS(endpoint_profile(p, f4), std::invalid_argument);
}

TEST_CASE("check rows to CSV") {
  std::vector<CheckRow> rows{{0.5, "endpoint_bound", 1.0, 2.0, 0.0}, {0.6, "c_gap", 0.25, 0.1, 1e-6}};
  CHECK(rows[0].pass());
  CHECK_FALSE(rows[1].pass());
  const std::string csv = check_rows_to_csv(rows);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}
