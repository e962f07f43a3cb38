#include "radmax/explorer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace radmax {

namespace {

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Index of the piece containing y (right-continuous), or npos off the support.
std::size_t piece_of(const std::vector<double>& knots, double y) {
  if (y < knots.front() || y >= knots.back()) return static_cast<std::size_t>(-1);
  const auto it = std::upper_bound(knots.begin(), knots.end(), y);
  return static_cast<std::size_t>(it - knots.begin()) - 1;
}

}  // namespace

LineField::LineField(std::vector<double> knots, std::vector<double> potential)
    : knots_(std::move(knots)), g_(std::move(potential)) {
  if (knots_.size() < 2 || knots_.size() != g_.size())
    throw std::invalid_argument("line field needs matching knots and values, at least two");
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    if (!std::isfinite(knots_[i]) || !std::isfinite(g_[i]))
      throw std::invalid_argument("line field entries must be finite");
    if (i > 0 && !(knots_[i] > knots_[i - 1]))
      throw std::invalid_argument("line field knots must increase strictly");
  }
  if (g_.front() != 0.0 || g_.back() != 0.0)
    throw std::invalid_argument("potential must vanish at both ends of its support");
  slope_.resize(knots_.size() - 1);
  for (std::size_t k = 0; k + 1 < knots_.size(); ++k)
    slope_[k] = (g_[k + 1] - g_[k]) / (knots_[k + 1] - knots_[k]);
}

double LineField::g(double y) const {
  const std::size_t k = piece_of(knots_, y);
  if (k == static_cast<std::size_t>(-1)) return 0.0;
  return g_[k] + slope_[k] * (y - knots_[k]);
}

double LineField::F(double y) const {
  const std::size_t k = piece_of(knots_, y);
  return k == static_cast<std::size_t>(-1) ? 0.0 : slope_[k];
}

double LineField::norm_l1() const {
  double acc = 0.0;
  for (std::size_t k = 0; k < slope_.size(); ++k)
    acc += std::abs(slope_[k]) * (knots_[k + 1] - knots_[k]);
  return acc;
}

LineField LineField::dilated(double lambda) const {
  if (!(lambda > 0.0)) throw std::invalid_argument("dilation factor must be positive");
  std::vector<double> k = knots_, g = g_;
  for (auto& v : k) v *= lambda;
  for (auto& v : g) v *= lambda;
  return LineField(std::move(k), std::move(g));
}

double moment(const LineField& f, double x, double a, double b) {
  if (b < a) return -moment(f, x, b, a);
  const auto& kn = f.knots();
  double acc = 0.0;
  for (std::size_t k = 0; k < f.pieces(); ++k) {
    const double lo = std::max(a, kn[k]), hi = std::min(b, kn[k + 1]);
    if (hi <= lo) continue;
    acc += 0.5 * f.slope(k) * ((hi - x) * (hi - x) - (lo - x) * (lo - x));
  }
  return acc;
}

double abs_moment(const LineField& f, double x, double a, double b) {
  if (b < a) std::swap(a, b);
  auto phi = [x](double y) { return 0.5 * (y - x) * std::abs(y - x); };
  const auto& kn = f.knots();
  double acc = 0.0;
  for (std::size_t k = 0; k < f.pieces(); ++k) {
    const double lo = std::max(a, kn[k]), hi = std::min(b, kn[k + 1]);
    if (hi <= lo) continue;
    acc += std::abs(f.slope(k)) * (phi(hi) - phi(lo));
  }
  return acc;
}

std::vector<double> moment_roots(const LineField& f, double x, double a) {
  if (a > x) throw std::invalid_argument("moment roots need a <= x");
  const auto& kn = f.knots();

  // Segment ends beyond a: the knots and x.
  std::vector<double> ends;
  for (double k : kn)
    if (k > a) ends.push_back(k);
  if (x > a) ends.push_back(x);
  std::sort(ends.begin(), ends.end());
  ends.erase(std::unique(ends.begin(), ends.end()), ends.end());

  std::vector<double> roots;
  auto add = [&](double b) {
    if (b < x || b <= a) return;
    if (!roots.empty() && std::abs(b - roots.back()) <= 1e-13 * (1.0 + std::abs(b))) return;
    roots.push_back(b);
  };

  double m = 0.0, scale = 0.0;
  double p = a;
  bool in_stretch = false;
  auto flat_segment = [&](double q) {
    // m is constant on [p, q]; a zero stretch contributes its left end.
    const bool zero = std::abs(m) <= 1e-13 * scale;
    if (zero && !in_stretch && q >= x) add(std::max(p, x));
    in_stretch = zero && q >= x;
  };
  for (double q : ends) {
    const double c = f.F(0.5 * (p + q));
    if (c == 0.0) {
      flat_segment(q);
    } else {
      in_stretch = false;
      const double Q = (p - x) * (p - x) - 2.0 * m / c;
      if (Q >= 0.0) {
        const double b = x + std::sqrt(Q);
        if (b >= std::max(p, x) && b <= q) add(b);
      }
      m += 0.5 * c * ((q - x) * (q - x) - (p - x) * (p - x));
      scale += std::abs(c) * 0.5 * ((q - x) * std::abs(q - x) - (p - x) * std::abs(p - x));
    }
    p = q;
  }
  // Beyond the support m stays constant for ever.
  flat_segment(std::numeric_limits<double>::infinity());
  return roots;
}

ConditionalValue conditional_maximal_1d(const LineField& f, double x,
                                        const ExplorerOptions& opts) {
  const double lo = std::min(f.left(), x);

  // Cuts: knots, x and lo. P(y) = int_lo^y F(t)(t - x) dt is quadratic between
  // cuts, and a zero-moment interval is a pair a <= x <= b with P(a) = P(b).
  std::vector<double> cut{lo, x};
  for (double k : f.knots())
    if (k >= lo) cut.push_back(k);
  std::sort(cut.begin(), cut.end());
  cut.erase(std::unique(cut.begin(), cut.end()), cut.end());
  const std::size_t npiece = cut.size() - 1;
  std::vector<double> c(npiece), Pc(cut.size(), 0.0);
  for (std::size_t k = 0; k < npiece; ++k) {
    c[k] = f.F(0.5 * (cut[k] + cut[k + 1]));
    Pc[k + 1] = Pc[k] + 0.5 * c[k] * ((cut[k + 1] - x) * (cut[k + 1] - x) - (cut[k] - x) * (cut[k] - x));
  }
  const std::size_t ix = static_cast<std::size_t>(
      std::lower_bound(cut.begin(), cut.end(), x) - cut.begin());
  auto P = [&](std::size_t k, double y) {
    return Pc[k] + 0.5 * c[k] * ((y - x) * (y - x) - (cut[k] - x) * (cut[k] - x));
  };
  // Point of piece k on the side of x given by `sign` where P equals target.
  auto solve = [&](std::size_t k, double target, double sign) -> double {
    const double q = (cut[k] - x) * (cut[k] - x) + 2.0 * (target - Pc[k]) / c[k];
    if (q < 0.0) return NAN;
    const double y = x + sign * std::sqrt(q);
    const double slack = 1e-12 * (1.0 + std::abs(y));
    if (y < cut[k] - slack || y > cut[k + 1] + slack) return NAN;
    return std::clamp(y, cut[k], cut[k + 1]);
  };

  std::vector<WitnessInterval> best;
  auto consider = [&](double a, double b) {
    if (!(b > a) || a > x || b < x) return;
    const double avg = (f.g(b) - f.g(a)) / (b - a);
    if (static_cast<int>(best.size()) >= std::max(1, opts.max_witnesses) &&
        std::abs(avg) <= std::abs(best.back().average))
      return;
    // Rounding near a = b = x can fake a zero moment; keep certified ones only.
    const double m = moment(f, x, a, b);
    if (std::abs(m) > 1e-10 * abs_moment(f, x, a, b)) return;
    for (const auto& w : best)
      if (std::abs(w.a - a) <= 1e-12 * (1 + std::abs(a)) &&
          std::abs(w.b - b) <= 1e-12 * (1 + std::abs(b)))
        return;
    best.push_back({a, b, m, avg});
    std::sort(best.begin(), best.end(), [](const WitnessInterval& u, const WitnessInterval& v) {
      if (std::abs(u.average) != std::abs(v.average))
        return std::abs(u.average) > std::abs(v.average);
      return u.a != v.a ? u.a < v.a : u.b < v.b;
    });
    if (static_cast<int>(best.size()) > std::max(1, opts.max_witnesses)) best.pop_back();
  };
  auto best_value = [&] { return best.empty() ? 0.0 : std::abs(best.front().average); };

  // a at a cut.
  for (std::size_t k = 0; k <= ix; ++k)
    for (double b : moment_roots(f, x, cut[k])) consider(cut[k], b);
  // b at a cut.
  for (std::size_t j = ix; j < cut.size(); ++j) {
    for (std::size_t i = 0; i < ix; ++i) {
      if (c[i] == 0.0) {
        if (std::abs(Pc[i] - Pc[j]) <= 1e-13 * (1.0 + std::abs(Pc[j]))) consider(cut[i + 1], cut[j]);
        continue;
      }
      const double a = solve(i, Pc[j], -1.0);
      if (!std::isnan(a)) consider(a, cut[j]);
    }
  }
  // Both ends inside pieces: maximize along the zero-moment curve.
  const int samples = std::max(4, opts.curve_samples);
  for (std::size_t i = 0; i < ix; ++i) {
    if (c[i] == 0.0) continue;
    double fmax = 0.0;
    for (std::size_t k = i; k < ix; ++k) fmax = std::max(fmax, std::abs(c[k]));
    for (std::size_t j = ix; j < npiece; ++j) {
      fmax = std::max(fmax, std::abs(c[j]));
      if (c[j] == 0.0 || fmax <= best_value()) continue;
      auto h = [&](double a) {
        const double b = solve(j, P(i, a), 1.0);
        if (std::isnan(b) || !(b > a)) return -1.0;
        return std::abs((f.g(b) - f.g(a)) / (b - a));
      };
      int arg = -1;
      double top = -1.0;
      const double w = cut[i + 1] - cut[i];
      for (int m = 0; m <= samples; ++m) {
        const double v = h(cut[i] + w * m / samples);
        if (v > top) top = v, arg = m;
      }
      if (top < 0.0) continue;
      // Golden section on the bracket around the best sample.
      double l = cut[i] + w * std::max(0, arg - 1) / samples;
      double r = cut[i] + w * std::min(samples, arg + 1) / samples;
      const double g = 0.5 * (std::sqrt(5.0) - 1.0);
      double u = r - g * (r - l), v = l + g * (r - l);
      double hu = h(u), hv = h(v);
      for (int it = 0; it < 80 && r - l > 1e-15 * (1.0 + std::abs(l)); ++it) {
        if (hu >= hv) {
          r = v, v = u, hv = hu, u = r - g * (r - l), hu = h(u);
        } else {
          l = u, u = v, hu = hv, v = l + g * (r - l), hv = h(v);
        }
      }
      for (double a : {cut[i] + w * arg / samples, u, v}) {
        const double b = solve(j, P(i, a), 1.0);
        if (!std::isnan(b)) consider(a, b);
      }
    }
  }

  ConditionalValue out;
  out.value = best_value();
  out.witnesses = std::move(best);
  return out;
}

double line_maximal_abs(const LineField& f, double x) {
  const auto& kn = f.knots();
  // Running integral of |F| at the knots.
  std::vector<double> H(kn.size(), 0.0);
  for (std::size_t k = 0; k < f.pieces(); ++k)
    H[k + 1] = H[k] + std::abs(f.slope(k)) * (kn[k + 1] - kn[k]);
  auto Hat = [&](double y) {
    if (y <= kn.front()) return 0.0;
    if (y >= kn.back()) return H.back();
    const std::size_t k = piece_of(kn, y);
    return H[k] + std::abs(f.slope(k)) * (y - kn[k]);
  };

  std::vector<double> A{x}, B{x};
  for (double k : kn) {
    if (k < x) A.push_back(k);
    if (k > x) B.push_back(k);
  }
  double best = std::max(std::abs(f.F(x)), std::abs(f.F(std::nextafter(x, -INFINITY))));
  for (double a : A)
    for (double b : B)
      if (b > a) best = std::max(best, (Hat(b) - Hat(a)) / (b - a));
  return best;
}

std::string line_family_name(LineFamily f) {
  switch (f) {
    case LineFamily::scaled_bump: return "scaled_bump";
    case LineFamily::dyadic_comb: return "dyadic_comb";
    case LineFamily::modulated_packet: return "modulated_packet";
  }
  return "unknown";
}

LineField line_family_member(LineFamily f, int level) {
  if (level < 0 || level > 12) throw std::invalid_argument("family level out of range");
  const double two_l = std::ldexp(1.0, level);
  std::vector<double> k, g;
  switch (f) {
    case LineFamily::scaled_bump: {
      // g(y) = (1 - y^2)^2 sampled on 33 knots, then dilated.
      for (int i = 0; i <= 32; ++i) {
        const double y = -1.0 + i / 16.0;
        k.push_back(y);
        g.push_back(i == 0 || i == 32 ? 0.0 : (1 - y * y) * (1 - y * y));
      }
      return LineField(std::move(k), std::move(g)).dilated(two_l);
    }
    case LineFamily::dyadic_comb: {
      const int teeth = 1 << level;
      const double w = 2.0 / teeth;
      k.push_back(-1.0);
      g.push_back(0.0);
      for (int t = 0; t < teeth; ++t) {
        k.push_back(-1.0 + (t + 0.5) * w);
        g.push_back(1.0);
        k.push_back(-1.0 + (t + 1) * w);
        g.push_back(0.0);
      }
      k.back() = 1.0;
      return LineField(std::move(k), std::move(g));
    }
    case LineFamily::modulated_packet: {
      const int n = 16 * (1 << level);
      for (int i = 0; i <= n; ++i) {
        const double y = -1.0 + 2.0 * i / n;
        k.push_back(y);
        g.push_back(i == 0 || i == n ? 0.0
                                     : (1 - y * y) * std::sin(2.0 * std::numbers::pi * two_l * y));
      }
      return LineField(std::move(k), std::move(g));
    }
  }
  throw std::invalid_argument("unknown line family");
}

LineField random_line_field(std::uint64_t seed, int knots) {
  if (knots < 3) throw std::invalid_argument("random line field needs at least 3 knots");
  std::mt19937_64 rng(seed);
  std::vector<double> k{-1.0, 1.0};
  while (static_cast<int>(k.size()) < knots) k.push_back(-1.0 + 2.0 * unit(rng));
  std::sort(k.begin(), k.end());
  k.erase(std::unique(k.begin(), k.end()), k.end());
  std::vector<double> g(k.size(), 0.0);
  for (std::size_t i = 1; i + 1 < g.size(); ++i) g[i] = 2.0 * unit(rng) - 1.0;
  return LineField(std::move(k), std::move(g));
}

double conditional_l1_norm(const LineField& f, int samples, const ExplorerOptions& opts) {
  if (samples < 3) throw std::invalid_argument("need at least 3 samples");
  const double L = f.right() - f.left();
  const double lo = f.left() - L, hi = f.right() + L;
  const double h = (hi - lo) / (samples - 1);
  double acc = 0.0, first = 0.0, last = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double v = conditional_maximal_1d(f, lo + i * h, opts).value;
    acc += (i == 0 || i == samples - 1 ? 0.5 : 1.0) * v * h;
    if (i == 0) first = v;
    if (i == samples - 1) last = v;
  }
  const double c = 0.5 * (f.left() + f.right());
  return acc + first * (c - lo) + last * (hi - c);
}

std::vector<RatioTrend> ratio_scan(const std::vector<LineFamily>& families, int levels,
                                   int samples, const ExplorerOptions& opts) {
  std::vector<RatioTrend> out;
  for (LineFamily fam : families) {
    RatioTrend t;
    t.family = line_family_name(fam);
    for (int l = 0; l < levels; ++l) {
      const LineField f = line_family_member(fam, l);
      RatioPoint pt;
      pt.level = l;
      pt.norm_mtilde = conditional_l1_norm(f, samples, opts);
      pt.norm_f = f.norm_l1();
      pt.ratio = pt.norm_mtilde / pt.norm_f;
      t.points.push_back(pt);
    }
    // Growth over three doublings, ignoring relative changes below 1e-3.
    int run = 0;
    for (std::size_t i = 1; i < t.points.size(); ++i) {
      run = t.points[i].ratio > t.points[i - 1].ratio * (1 + 1e-3) ? run + 1 : 0;
      if (run >= 3) t.growing = true;
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::string ratio_trends_to_csv(const std::vector<RatioTrend>& trends) {
  std::ostringstream os;
  os.precision(17);
  os << "family,level,norm_mtilde,norm_f,ratio,growing\n";
  for (const auto& t : trends)
    for (const auto& p : t.points)
      os << t.family << ',' << p.level << ',' << p.norm_mtilde << ',' << p.norm_f << ','
         << p.ratio << ',' << (t.growing ? 1 : 0) << '\n';
  return os.str();
}

}  // namespace radmax
