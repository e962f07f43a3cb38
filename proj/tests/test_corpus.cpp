#include <doctest.h>

#include <algorithm>
#include <stdexcept>

#include "radmax/corpus.hpp"

using namespace radmax;

namespace {

int count_local_maxima(const RadialProfile& p) {
  const auto v = p.values();
  int peaks = 0;
  for (std::size_t i = 1; i + 1 < v.size(); ++i)
    if (v[i] > v[i - 1] && v[i] >= v[i + 1]) ++peaks;
  return peaks;
}

}  // namespace

TEST_CASE("same seed regenerates the same corpus") {
  CorpusSpec spec;
  spec.dimension = 3;
  spec.families = default_families();
  const auto a = corpus_generate(spec);
  const auto b = corpus_generate(spec);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == b[i].id);
    CHECK(std::equal(a[i].profile.grid().begin(), a[i].profile.grid().end(),
                     b[i].profile.grid().begin()));
    CHECK(std::equal(a[i].profile.values().begin(), a[i].profile.values().end(),
                     b[i].profile.values().begin()));
  }
}

TEST_CASE("multi bump with three bumps") {
  CorpusSpec spec;
  spec.families = {MultiBump{3, 7}};
  const auto c = corpus_generate(spec);
  REQUIRE(c.size() == 1);
  const RadialProfile& p = c[0].profile;
  CHECK(count_local_maxima(p) == 3);
  CHECK(p.support_end() <= 2.0);
  CHECK(p.values().back() == 0.0);
  CHECK_FALSE(c[0].radially_decreasing);

  // A different corpus seed moves the bumps.
  spec.seed = 2;
  const auto d = corpus_generate(spec);
  CHECK_FALSE(std::equal(p.values().begin(), p.values().end(), d[0].profile.values().begin()));
}

TEST_CASE("empty family list gives an empty corpus") {
  CorpusSpec spec;
  CHECK(corpus_generate(spec).empty());
}

TEST_CASE("every default family yields a valid profile") {
  for (int n : {1, 2, 3}) {
    CorpusSpec spec;
    spec.dimension = n;
    spec.families = default_families();
    const auto c = corpus_generate(spec);
    CHECK(c.size() == 10);
    for (const auto& item : c) {
      CHECK(item.profile.dimension() == n);
      CHECK(item.profile.values().back() == 0.0);
      CHECK(item.profile.sup_norm() > 0.0);
      if (item.radially_decreasing) {
        const auto v = item.profile.values();
        for (std::size_t i = 1; i < v.size(); ++i) CHECK(v[i] <= v[i - 1]);
      }
    }
  }
}

TEST_CASE("far thin bump sits away from the origin") {
  CorpusSpec spec;
  spec.families = {FarThinBump{1.6, 0.05, 1.0}};
  const auto p = corpus_generate(spec)[0].profile;
  CHECK(evaluate(p, 1.0) == 0.0);
  CHECK(evaluate(p, 1.6) == doctest::Approx(1.0));
  CHECK(p.support_end() == doctest::Approx(1.65));
}

TEST_CASE("invalid family parameters are rejected") {
  CorpusSpec spec;
  spec.families = {AnnularBump{0.2, 0.3, 1.0}};
  CHECK_THROWS_AS(corpus_generate(spec), std::invalid_argument);
  spec.families = {MultiBump{0, 1}};
  CHECK_THROWS_AS(corpus_generate(spec), std::invalid_argument);
  spec.families = {DecreasingTent{-1.0, 1.0}};
  CHECK_THROWS_AS(corpus_generate(spec), std::invalid_argument);
  spec.families = {Oscillating{6.0, 1.0, 2.0}};
  spec.resolution = 2;
  CHECK_THROWS_AS(corpus_generate(spec), std::invalid_argument);
}
