#include "radmax/corpus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <stdexcept>

namespace radmax {

namespace {

// Uniform in [0, 1) from the top 53 bits; independent of the standard
// library's distribution implementations.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double raised_cosine(double t, double center, double width) {
  const double u = (t - center) / width;
  if (std::abs(u) >= 1.0) return 0.0;
  const double c = std::cos(0.5 * std::numbers::pi * u);
  return c * c;
}

RadialProfile sample(int n, double lo, double hi, int knots,
                     const std::function<double(double)>& f, bool leading_zero) {
  std::vector<double> t, v;
  if (leading_zero && lo > 0.0) {
    t.push_back(0.0);
    v.push_back(0.0);
  }
  for (int i = 0; i < knots; ++i) {
    const double x = lo + (hi - lo) * i / (knots - 1);
    t.push_back(x);
    v.push_back(f(x));
  }
  v.back() = 0.0;
  return RadialProfile(n, std::move(t), std::move(v));
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("corpus: ") + what);
}

}  // namespace

std::string family_name(const FamilySpec& f) {
  struct V {
    std::string operator()(const DecreasingTent&) const { return "decreasing_tent"; }
    std::string operator()(const DecreasingExponential&) const { return "decreasing_exp"; }
    std::string operator()(const AnnularBump&) const { return "annular_bump"; }
    std::string operator()(const MultiBump&) const { return "multi_bump"; }
    std::string operator()(const Oscillating&) const { return "oscillating"; }
    std::string operator()(const FarThinBump&) const { return "far_thin_bump"; }
  };
  return std::visit(V{}, f);
}

std::vector<CorpusItem> corpus_generate(const CorpusSpec& spec) {
  require(spec.dimension >= 1, "dimension must be >= 1");
  require(spec.resolution >= 4, "resolution must be >= 4");
  const int n = spec.dimension;
  const int K = spec.resolution;
  std::vector<CorpusItem> out;
  for (std::size_t idx = 0; idx < spec.families.size(); ++idx) {
    const FamilySpec& fam = spec.families[idx];
    CorpusItem item{"", family_name(fam), false, RadialProfile::zero(n)};
    if (auto* p = std::get_if<DecreasingTent>(&fam)) {
      require(p->height > 0.0 && p->radius > 0.0, "tent needs positive height and radius");
      item.profile = RadialProfile(n, {0.0, p->radius}, {p->height, 0.0});
      item.radially_decreasing = true;
      item.id = "tent_h" + num(p->height) + "_R" + num(p->radius);
    } else if (auto* p = std::get_if<DecreasingExponential>(&fam)) {
      require(p->scale > 0.0 && p->radius > 0.0, "exponential needs positive scale and radius");
      const double tail = std::exp(-p->radius / p->scale);
      item.profile = sample(n, 0.0, p->radius, K,
                            [&](double t) { return std::exp(-t / p->scale) - tail; }, false);
      item.radially_decreasing = true;
      item.id = "exp_l" + num(p->scale) + "_R" + num(p->radius);
    } else if (auto* p = std::get_if<AnnularBump>(&fam)) {
      require(p->width > 0.0 && p->center - p->width > 0.0 && p->height > 0.0,
              "annular bump needs 0 < center - width and positive height");
      item.profile = sample(n, p->center - p->width, p->center + p->width, K,
                            [&](double t) { return p->height * raised_cosine(t, p->center, p->width); },
                            true);
      item.id = "annulus_c" + num(p->center) + "_w" + num(p->width);
    } else if (auto* p = std::get_if<MultiBump>(&fam)) {
      require(p->count >= 1, "multi bump needs count >= 1");
      std::mt19937_64 rng(p->seed ^ (spec.seed * 0x9E3779B97F4A7C15ull));
      // One bump per slot of [0.2, 1.9] so the bumps stay separated.
      const double lo = 0.2, hi = 1.9, slot = (hi - lo) / p->count;
      std::vector<std::array<double, 3>> bumps;
      for (int k = 0; k < p->count; ++k) {
        const double w = slot * (0.15 + 0.3 * unit(rng));
        const double c = lo + slot * k + w + (slot - 2 * w) * unit(rng);
        const double h = 0.3 + 0.7 * unit(rng);
        bumps.push_back({c, w, h});
      }
      auto f = [&](double t) {
        double v = 0.0;
        for (const auto& b : bumps) v += b[2] * raised_cosine(t, b[0], b[1]);
        return v;
      };
      item.profile = sample(n, 0.0, 2.0, 2 * K, f, false);
      item.id = "multi_K" + std::to_string(p->count) + "_seed" + std::to_string(p->seed);
    } else if (auto* p = std::get_if<Oscillating>(&fam)) {
      require(p->frequency > 0.0 && p->damping >= 0.0 && p->radius > 0.0,
              "oscillating needs positive frequency and radius");
      auto f = [&](double t) {
        return std::exp(-p->damping * t) * std::cos(p->frequency * t) * (1.0 - t / p->radius);
      };
      item.profile = sample(n, 0.0, p->radius, 2 * K, f, false);
      item.id = "osc_w" + num(p->frequency) + "_g" + num(p->damping);
    } else if (auto* p = std::get_if<FarThinBump>(&fam)) {
      require(p->width > 0.0 && p->distance - p->width > 0.0 && p->height > 0.0,
              "far thin bump needs 0 < distance - width and positive height");
      // Odd knot count so the peak is a knot.
      const int knots = std::max(9, (K / 4) | 1);
      item.profile = sample(n, p->distance - p->width, p->distance + p->width, knots,
                            [&](double t) { return p->height * raised_cosine(t, p->distance, p->width); },
                            true);
      item.id = "far_D" + num(p->distance) + "_w" + num(p->width);
    }
    item.id += "_n" + std::to_string(n);
    out.push_back(std::move(item));
  }
  return out;
}

std::vector<FamilySpec> default_families() {
  return {DecreasingTent{1.0, 1.0},
          DecreasingExponential{0.4, 2.0},
          AnnularBump{1.0, 0.3, 1.0},
          AnnularBump{0.5, 0.25, 0.8},
          MultiBump{3, 7},
          MultiBump{2, 11},
          Oscillating{6.0, 1.0, 2.0},
          Oscillating{3.0, 0.5, 1.5},
          FarThinBump{1.6, 0.05, 1.0},
          FarThinBump{1.0, 0.1, 1.0}};
}

}  // namespace radmax
