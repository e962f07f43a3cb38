#include "radmax/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <boost/math/tools/toms748_solve.hpp>
#include <json.hpp>

#include "radmax/parallel.hpp"
#include "radmax/quadrature.hpp"

namespace radmax {

namespace {

constexpr double kGolden = 0.381966011250105151795413165634;

struct Counter {
  std::int64_t n = 0;
};

enum class Family { outward, inward, axis, centered, endpoint };

struct Candidate {
  double d;
  double r;
  double value;
  double gap;
};

void sort_unique(std::vector<double>& v, double tol) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end(), [tol](double a, double b) { return b - a <= tol; }),
          v.end());
}

std::vector<double> log_points(double lo, double hi, int count) {
  std::vector<double> out;
  if (!(hi > lo) || !(lo > 0.0)) return out;
  const double q = std::log(hi / lo);
  for (int i = 0; i < count; ++i) out.push_back(lo * std::exp(q * i / (count - 1)));
  return out;
}

std::vector<double> linear_points(double lo, double hi, int count) {
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(lo + (hi - lo) * i / (count - 1));
  return out;
}

// Golden-section maximization on [a, b].
template <class F>
std::pair<double, double> golden_max(F&& f, double a, double b, double xtol) {
  double x1 = a + kGolden * (b - a), x2 = b - kGolden * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > xtol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = b - kGolden * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = a + kGolden * (b - a);
      f1 = f(x1);
    }
  }
  return f1 >= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string_view operator_code(Operator op) {
  switch (op) {
    case Operator::noncentered: return "m";
    case Operator::centered: return "mc";
    case Operator::inner: return "mi";
    case Operator::endpoint: return "f4";
  }
  return "?";
}

std::string_view operator_name(Operator op) {
  switch (op) {
    case Operator::noncentered: return "noncentered";
    case Operator::centered: return "centered";
    case Operator::inner: return "inner";
    case Operator::endpoint: return "endpoint";
  }
  return "?";
}

Operator parse_operator(std::string_view code) {
  for (Operator op : {Operator::noncentered, Operator::centered, Operator::inner,
                      Operator::endpoint}) {
    if (code == operator_code(op) || code == operator_name(op)) return op;
  }
  throw std::invalid_argument("unknown operator '" + std::string(code) + "'");
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("RADMAX_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<double> MaximalField::grid() const {
  std::vector<double> g;
  for (const auto& x : samples) g.push_back(x.s);
  return g;
}

std::vector<double> MaximalField::values() const {
  std::vector<double> v;
  for (const auto& x : samples) v.push_back(x.value);
  return v;
}

double MaximalField::max_audit_gap() const {
  double m = 0.0;
  for (const auto& a : audits) m = std::max(m, std::abs(a.warm_value - a.cold_value));
  return m;
}

// ---------------------------------------------------------------------------

struct MaximalEngine::Impl {
  RadialProfile p;
  RadialProfile a;
  EngineOptions opts;
  RadialIntegrand vals;
  RadialIntegrand slopes;
  int n;
  double l1;
  double sup;
  double tn;
  double omega;
  std::vector<double> knots;

  mutable std::once_flag free_once;
  mutable std::vector<FreeMax> free;

  explicit Impl(const RadialProfile& prof, EngineOptions o)
      : p(prof),
        a(abs_profile(prof)),
        opts(o),
        vals(RadialIntegrand::values_of(a)),
        slopes(RadialIntegrand::slopes_of(a)),
        n(prof.dimension()),
        l1(norm_l1(a)),
        sup(a.sup_norm()),
        tn(a.support_end()),
        omega(unit_ball_volume(prof.dimension())),
        knots(a.grid().begin(), a.grid().end()) {}

  double volume(double r) const { return omega * std::pow(r, n); }

  double avg(double d, double r, Counter& c) const {
    QuadratureOptions q = opts.quadrature;
    q.want_plain = true;
    q.want_radius_weight = false;
    q.want_cos_moment = false;
    ++c.n;
    return ball_moments(vals, AxisBall(std::max(d, 0.0), r, n), q).plain / volume(r);
  }

  BallMoments slope_moments(double d, double r, Counter& c) const {
    QuadratureOptions q = opts.quadrature;
    q.want_plain = false;
    q.want_radius_weight = true;
    q.want_cos_moment = true;
    ++c.n;
    return ball_moments(slopes, AxisBall(std::max(d, 0.0), r, n), q);
  }

  std::array<double, 2> grad(double d, double r, Counter& c) const {
    const BallMoments m = slope_moments(d, r, c);
    const double vol = volume(r);
    return {m.cos_moment / vol, (m.radius_weight - d * m.cos_moment) / (r * vol)};
  }

  static std::pair<double, double> ball_of(Family f, double s, double x) {
    switch (f) {
      case Family::outward: return {s + x, x};
      case Family::inward: return {std::max(0.0, s - x), x};
      case Family::axis: return {0.0, x};
      case Family::centered: return {s, x};
      case Family::endpoint: return {x, 0.25 * s};
    }
    return {0.0, 0.0};
  }

  // Positive multiple of the derivative of the average along the family.
  double family_slope(Family f, double s, double x, Counter& c) const {
    const auto [d, r] = ball_of(f, s, x);
    const BallMoments m = slope_moments(d, r, c);
    if (f == Family::endpoint) return m.cos_moment;
    return m.radius_weight - s * m.cos_moment;
  }

  double family_value(Family f, double s, double x, Counter& c) const {
    const auto [d, r] = ball_of(f, s, x);
    return avg(d, r, c);
  }

  // Parameter values at which a cap boundary crosses a knot.
  std::vector<double> family_events(Family f, double s) const {
    std::vector<double> ev;
    for (double t : knots) {
      switch (f) {
        case Family::outward: ev.push_back(0.5 * (t - s)); break;
        case Family::inward:
          ev.push_back(0.5 * (s - t));
          ev.push_back(0.5 * (s + t));
          break;
        case Family::axis: ev.push_back(t); break;
        case Family::centered:
          ev.push_back(std::abs(s - t));
          ev.push_back(s + t);
          break;
        case Family::endpoint:
          ev.push_back(t - 0.25 * s);
          ev.push_back(t + 0.25 * s);
          break;
      }
    }
    return ev;
  }

  Candidate root_candidate(Family f, double s, double lo, double hi, double dlo, double dhi,
                           Counter& c) const {
    auto fn = [&](double x) { return family_slope(f, s, x, c); };
    boost::math::tools::eps_tolerance<double> tol(48);
    std::uintmax_t iters = 80;
    const auto [x0, x1] = boost::math::tools::toms748_solve(fn, lo, hi, dlo, dhi, tol, iters);
    const double x = 0.5 * (x0 + x1);
    const auto [d, r] = ball_of(f, s, x);
    const double v = avg(d, r, c);
    double gap = 0.0;
    if (x1 > x0) gap = std::abs(family_value(f, s, x1, c) - family_value(f, s, x0, c));
    return {d, r, v, gap};
  }

  // Local maxima of the average along a family over x in [lo, hi].
  void search_family(Family f, double s, double lo, double hi, bool lo_candidate,
                     bool hi_candidate, bool log_spacing, std::vector<Candidate>& out,
                     Counter& c) const {
    if (!(hi > lo)) {
      if (hi == lo && (lo_candidate || hi_candidate) && lo > 0.0) {
        const auto [d, r] = ball_of(f, s, lo);
        out.push_back({d, r, avg(d, r, c), 0.0});
      }
      return;
    }
    std::vector<double> xs = log_spacing && lo > 0.0 ? log_points(lo, hi, 24)
                                                     : linear_points(lo, hi, 17);
    // Knot crossings are where the slope loses smoothness; without them
    // narrow maxima between grid points go unnoticed.
    for (double e : family_events(f, s))
      if (e > lo && e < hi) xs.push_back(e);
    xs.push_back(lo);
    xs.push_back(hi);
    sort_unique(xs, 1e-13 * std::max(1.0, hi));

    std::vector<double> ds(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) ds[i] = family_slope(f, s, xs[i], c);

    // Signs are read off the slope per unit volume and radius, so that small
    // balls are not drowned by large ones. Tiny values count as zero
    // (plateaus, balls off the support).
    std::vector<double> ns(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = std::max(ball_of(f, s, xs[i]).second, 1e-300);
      ns[i] = ds[i] / (volume(r) * (r + s));
    }
    double scale = 0.0;
    for (double v : ns) scale = std::max(scale, std::abs(v));
    const double zero = 1e-13 * scale;
    auto sgn = [&](double v) { return v > zero ? 1 : (v < -zero ? -1 : 0); };

    int last_sign = 0;
    std::size_t last_index = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const int sg = sgn(ns[i]);
      if (sg == 0) continue;
      if (last_sign > 0 && sg < 0) {
        if (last_index + 1 == i) {
          out.push_back(root_candidate(f, s, xs[last_index], xs[i], ds[last_index], ds[i], c));
        } else {
          // Slopes below the zero threshold between the rise and the fall.
          // They may still fall through zero (small balls near a peak have
          // tiny slopes), so follow the raw sign; a genuinely flat stretch
          // ends up at its left end.
          std::size_t j = last_index + 1;
          while (j < i && ds[j] > 0.0) ++j;
          if (ds[j] < 0.0) {
            out.push_back(root_candidate(f, s, xs[j - 1], xs[j], ds[j - 1], ds[j], c));
          } else {
            const auto [d, r] = ball_of(f, s, xs[j]);
            out.push_back({d, r, avg(d, r, c), 0.0});
          }
        }
      }
      last_sign = sg;
      last_index = i;
    }
    if (lo_candidate && sgn(ns.front()) <= 0) {
      const auto [d, r] = ball_of(f, s, xs.front());
      out.push_back({d, r, avg(d, r, c), 0.0});
    }
    if (hi_candidate && sgn(ns.back()) >= 0) {
      const auto [d, r] = ball_of(f, s, xs.back());
      out.push_back({d, r, avg(d, r, c), 0.0});
    }
  }

  // Follows the sign of the family slope from x0 until it flips.
  void local_family_search(Family f, double s, double x0, double lo, double hi,
                           bool lo_candidate, bool hi_candidate, std::vector<Candidate>& out,
                           Counter& c) const {
    if (!(hi > lo)) return;
    x0 = std::clamp(x0, lo, hi);
    double d0 = family_slope(f, s, x0, c);
    if (d0 == 0.0) {
      const auto [d, r] = ball_of(f, s, x0);
      out.push_back({d, r, avg(d, r, c), 0.0});
      return;
    }
    const int dir = d0 > 0.0 ? 1 : -1;
    double step = 0.01 * std::max(hi - lo, 1e-12);
    double xa = x0, da = d0;
    for (int k = 0; k < 40; ++k) {
      double xb = xa + dir * step;
      bool at_end = false;
      if (xb >= hi) xb = hi, at_end = true;
      if (xb <= lo) xb = lo, at_end = true;
      const double db = family_slope(f, s, xb, c);
      if ((da > 0.0) != (db > 0.0) || db == 0.0) {
        if (db == 0.0) {
          const auto [d, r] = ball_of(f, s, xb);
          out.push_back({d, r, avg(d, r, c), 0.0});
        } else if (dir > 0) {
          out.push_back(root_candidate(f, s, xa, xb, da, db, c));
        } else {
          out.push_back(root_candidate(f, s, xb, xa, db, da, c));
        }
        return;
      }
      if (at_end) {
        if ((dir > 0 && hi_candidate) || (dir < 0 && lo_candidate)) {
          const auto [d, r] = ball_of(f, s, xb);
          out.push_back({d, r, avg(d, r, c), 0.0});
        }
        return;
      }
      xa = xb;
      da = db;
      step *= 2.0;
    }
  }

  // Newton iteration on the gradient with a finite-difference Hessian.
  FreeMax polish(double d, double r, double v, Counter& c) const {
    for (int it = 0; it < 12; ++it) {
      const auto g = grad(d, r, c);
      const double h = 1e-6 * r;
      std::array<double, 2> step{0.0, 0.0};
      if (d <= 0.0) {
        const auto gp = grad(0.0, r + h, c), gm = grad(0.0, r - h, c);
        const double hrr = (gp[1] - gm[1]) / (2 * h);
        if (!(hrr < 0.0)) break;
        step = {0.0, -g[1] / hrr};
      } else {
        const double hd = std::min(h, d);
        const auto gdp = grad(d + hd, r, c), gdm = grad(d - hd, r, c);
        const auto grp = grad(d, r + h, c), grm = grad(d, r - h, c);
        const double hdd = (gdp[0] - gdm[0]) / (2 * hd);
        const double hrr = (grp[1] - grm[1]) / (2 * h);
        const double hdr = 0.5 * ((gdp[1] - gdm[1]) / (2 * hd) + (grp[0] - grm[0]) / (2 * h));
        const double det = hdd * hrr - hdr * hdr;
        if (!(hdd < 0.0 && det > 0.0)) break;
        step = {-(hrr * g[0] - hdr * g[1]) / det, -(-hdr * g[0] + hdd * g[1]) / det};
      }
      const double len = std::hypot(step[0], step[1]);
      if (len > 0.25 * r) {
        step[0] *= 0.25 * r / len;
        step[1] *= 0.25 * r / len;
      }
      const double nd = std::max(0.0, d + step[0]);
      const double nr = r + step[1];
      if (!(nr > 0.0)) break;
      const double nv = avg(nd, nr, c);
      if (nv < v - 1e-14 * std::max(v, 1e-300)) break;
      const double moved = std::hypot(nd - d, nr - r);
      d = nd;
      r = nr;
      v = std::max(v, nv);
      if (moved < 1e-13 * (r + d)) break;
    }
    return {d, r, v};
  }

  void compute_free_maxima() const {
    Counter c;
    if (sup == 0.0) return;
    std::vector<double> dg{0.0};
    for (std::size_t i = 0; i < knots.size(); ++i) {
      dg.push_back(knots[i]);
      if (i + 1 < knots.size()) dg.push_back(0.5 * (knots[i] + knots[i + 1]));
    }
    for (double x : linear_points(0.0, 1.5 * tn, 25)) dg.push_back(x);
    sort_unique(dg, 1e-12 * tn);
    const double rmin = 0.25 * std::min(a.min_spacing(), tn);
    const std::vector<double> rg = log_points(rmin, 2.0 * tn, 36);
    const std::size_t nd = dg.size(), nr = rg.size();
    std::vector<double> F(nd * nr);
    for (std::size_t i = 0; i < nd; ++i)
      for (std::size_t j = 0; j < nr; ++j) F[i * nr + j] = avg(dg[i], rg[j], c);

    struct Seed {
      std::size_t i, j;
      double v;
    };
    std::vector<Seed> seeds;
    for (std::size_t i = 0; i < nd; ++i) {
      for (std::size_t j = 1; j + 1 < nr; ++j) {
        const double v = F[i * nr + j];
        if (!(v > 0.0)) continue;
        bool is_max = true;
        for (int di = -1; di <= 1 && is_max; ++di) {
          for (int dj = -1; dj <= 1; ++dj) {
            if (di == 0 && dj == 0) continue;
            long ii = static_cast<long>(i) + di;
            if (ii < 0) ii = 1;  // mirror through d = 0
            if (ii >= static_cast<long>(nd)) continue;
            if (F[ii * nr + j + dj] > v) {
              is_max = false;
              break;
            }
          }
        }
        if (is_max) seeds.push_back({i, j, v});
      }
    }
    std::sort(seeds.begin(), seeds.end(), [](const Seed& x, const Seed& y) { return x.v > y.v; });
    if (seeds.size() > 24) seeds.resize(24);

    for (const auto& sd : seeds) {
      double d = dg[sd.i], r = rg[sd.j], v = sd.v;
      const double dlo = sd.i > 0 ? dg[sd.i - 1] : 0.0;
      const double dhi = sd.i + 1 < nd ? dg[sd.i + 1] : dg[sd.i];
      const double rlo = rg[sd.j - 1], rhi = rg[sd.j + 1];
      for (int sweep = 0; sweep < 30; ++sweep) {
        const double before = v;
        if (dhi > dlo) {
          auto [xd, vd] = golden_max([&](double x) { return avg(x, r, c); }, dlo, dhi,
                                     1e-9 * (dhi - dlo + r));
          if (vd > v) d = xd, v = vd;
          if (dlo == 0.0) {
            const double v0 = avg(0.0, r, c);
            if (v0 >= v) d = 0.0, v = v0;
          }
        }
        auto [xr, vr] = golden_max([&](double x) { return avg(d, x, c); }, rlo, rhi,
                                   1e-9 * (rhi - rlo));
        if (vr > v) r = xr, v = vr;
        if (std::abs(v - before) <= 1e-8 * v) break;
      }
      free.push_back(polish(d, r, v, c));
    }
    // Drop duplicates that converged to the same ball.
    std::sort(free.begin(), free.end(),
              [](const FreeMax& x, const FreeMax& y) { return x.value > y.value; });
    std::vector<FreeMax> kept;
    for (const auto& fm : free) {
      bool dup = false;
      for (const auto& k : kept)
        if (std::abs(k.d - fm.d) + std::abs(k.r - fm.r) <= 1e-7 * (tn + k.r)) dup = true;
      if (!dup) kept.push_back(fm);
    }
    free = std::move(kept);
  }

  MaximalSample evaluate(double s, Operator op, const std::optional<MaximalSample>& warm) const {
    if (!(s >= 0.0) || !std::isfinite(s))
      throw std::invalid_argument("maximal value: s must be >= 0");
    if ((op == Operator::inner || op == Operator::endpoint) && !(s > 0.0))
      throw std::invalid_argument("maximal value: inner and endpoint operators need s > 0");

    Counter c;
    MaximalSample out;
    out.s = s;
    const bool has_floor = op != Operator::endpoint;
    const double floor = has_floor ? evaluate_profile(s) : 0.0;
    std::vector<Candidate> cands;

    if (sup == 0.0) {
      out.value = 0.0;
      if (op == Operator::endpoint) out.argmax = AxisBall(s, 0.25 * s, n);
      finish(out, s);
      return out;
    }

    const double L = std::max(s, tn);
    const double rlo = 1e-7 * L;
    auto contains = [&](double d, double r) { return std::abs(s - d) <= r * (1 + 1e-12); };

    double best = floor;
    auto rmax_from = [&](double cap) {
      if (!(best > 0.0)) return cap;
      return std::min(cap, std::pow(l1 / (omega * best), 1.0 / n));
    };

    switch (op) {
      case Operator::noncentered: {
        for (const auto& fm : free_maxima())
          if (contains(fm.d, fm.r)) cands.push_back({fm.d, fm.r, fm.value, 0.0});
        cands.push_back({0.0, L, l1 / volume(L), 0.0});
        for (const auto& cd : cands) best = std::max(best, cd.value);
        const double rmax = rmax_from(L);
        if (s < tn) search_family(Family::outward, s, rlo, rmax, false, false, true, cands, c);
        if (s > 0.0) {
          search_family(Family::inward, s, rlo, std::min(s, rmax), false, s <= rmax, true,
                        cands, c);
          if (s < rmax) search_family(Family::axis, s, s, rmax, true, false, true, cands, c);
        } else {
          search_family(Family::axis, s, rlo, rmax, false, false, true, cands, c);
        }
        break;
      }
      case Operator::centered: {
        const double R = s + tn;
        cands.push_back({s, R, l1 / volume(R), 0.0});
        best = std::max(best, cands.back().value);
        search_family(Family::centered, s, rlo, rmax_from(R), false, false, true, cands, c);
        break;
      }
      case Operator::endpoint: {
        search_family(Family::endpoint, s, 0.75 * s, 1.25 * s, true, true, false, cands, c);
        break;
      }
      case Operator::inner: {
        const double cap = 0.25 * s;
        for (const auto& fm : free_maxima())
          if (fm.r <= cap && contains(fm.d, fm.r)) cands.push_back({fm.d, fm.r, fm.value, 0.0});
        search_family(Family::endpoint, s, 0.75 * s, 1.25 * s, true, true, false, cands, c);
        for (const auto& cd : cands) best = std::max(best, cd.value);
        const double rmax = rmax_from(cap);
        if (s < tn) search_family(Family::outward, s, rlo, rmax, false, false, true, cands, c);
        search_family(Family::inward, s, rlo, rmax, false, false, true, cands, c);
        break;
      }
    }

    if (warm && warm->argmax && warm->s > 0.0) warm_candidates(*warm, s, op, cands, c);

    // Pick the best candidate; ties go to the smaller radius.
    const Candidate* win = nullptr;
    for (const auto& cd : cands) {
      if (!win) {
        win = &cd;
        continue;
      }
      const double tie = 1e-14 * std::max(std::abs(win->value), 1e-300);
      if (cd.value > win->value + tie ||
          (std::abs(cd.value - win->value) <= tie && cd.r < win->r))
        win = &cd;
    }
    if (has_floor && (!win || floor >= win->value - 1e-14 * std::max(floor, 1e-300))) {
      out.value = floor;
    } else {
      out.value = win->value;
      out.argmax = AxisBall(win->d, win->r, n);
      out.diagnostics.refinement_gap = win->gap;
    }

    const double mm = opts.multi_modal_tol * sup;
    for (const auto& cd : cands) {
      if (win && &cd == win) continue;
      if (cd.value < out.value - mm) continue;
      const double dd = out.argmax ? std::abs(cd.d - out.argmax->center()) +
                                         std::abs(cd.r - out.argmax->radius())
                                   : cd.r;
      if (dd > 1e-6 * (L + cd.r)) out.diagnostics.multi_modal = true;
    }
    out.diagnostics.evaluations = c.n;
    finish(out, s);
    return out;
  }

  void warm_candidates(const MaximalSample& w, double s, Operator op,
                       std::vector<Candidate>& cands, Counter& c) const {
    const double d = w.argmax->center(), r = w.argmax->radius(), sp = w.s;
    const double L = std::max(s, tn);
    const double rlo = 1e-7 * L;
    const double tol = 1e-9 * (sp + r);
    double best = 0.0;
    for (const auto& cd : cands) best = std::max(best, cd.value);
    const double rcap = best > 0.0 ? std::pow(l1 / (omega * best), 1.0 / n) : L;
    switch (op) {
      case Operator::endpoint:
        local_family_search(Family::endpoint, s, d * s / sp, 0.75 * s, 1.25 * s, true, true,
                            cands, c);
        break;
      case Operator::centered:
        local_family_search(Family::centered, s, r, rlo, std::min(rcap, s + tn), false, false,
                            cands, c);
        break;
      case Operator::noncentered:
      case Operator::inner: {
        const double hi = op == Operator::inner ? std::min(rcap, 0.25 * s) : std::min(rcap, L);
        if (std::abs(d - (sp + r)) <= tol && s < tn) {
          local_family_search(Family::outward, s, r, rlo, hi, false, false, cands, c);
        } else if (std::abs(d - (sp - r)) <= tol) {
          local_family_search(Family::inward, s, r, rlo, std::min(hi, s), false,
                              op == Operator::noncentered && s <= hi, cands, c);
        } else if (d == 0.0 && op == Operator::noncentered && s < hi) {
          local_family_search(Family::axis, s, r, s, hi, true, false, cands, c);
        } else if (op == Operator::inner && std::abs(r - 0.25 * sp) <= tol) {
          local_family_search(Family::endpoint, s, d * s / sp, 0.75 * s, 1.25 * s, true, true,
                              cands, c);
        }
        break;
      }
    }
  }

  double evaluate_profile(double s) const { return radmax::evaluate(a, s); }

  static void finish(MaximalSample& out, double s) {
    if (s > 0.0) out.c = out.argmax ? out.argmax->center() / s : 1.0;
  }

  std::span<const FreeMax> free_maxima() const {
    std::call_once(free_once, [this] { compute_free_maxima(); });
    return free;
  }
};

MaximalEngine::MaximalEngine(const RadialProfile& p, EngineOptions opts)
    : impl_(std::make_unique<Impl>(p, opts)) {}
MaximalEngine::~MaximalEngine() = default;
MaximalEngine::MaximalEngine(MaximalEngine&&) noexcept = default;

const RadialProfile& MaximalEngine::profile() const { return impl_->p; }
const RadialProfile& MaximalEngine::abs() const { return impl_->a; }
const EngineOptions& MaximalEngine::options() const { return impl_->opts; }

double MaximalEngine::average(double d, double r) const {
  Counter c;
  return impl_->avg(d, r, c);
}

std::array<double, 2> MaximalEngine::gradient(double d, double r) const {
  Counter c;
  return impl_->grad(d, r, c);
}

std::span<const MaximalEngine::FreeMax> MaximalEngine::free_maxima() const {
  return impl_->free_maxima();
}

MaximalSample MaximalEngine::evaluate(double s, Operator op,
                                      const std::optional<MaximalSample>& warm) const {
  return impl_->evaluate(s, op, warm);
}

MaximalField MaximalEngine::field(std::span<const double> grid, Operator op,
                                  std::string profile_ref) const {
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    if (!(grid[i + 1] > grid[i]))
      throw std::invalid_argument("maximal field: sample grid must be strictly increasing");
  if ((op == Operator::inner || op == Operator::endpoint) && !grid.empty() && !(grid[0] > 0.0))
    throw std::invalid_argument("maximal field: inner and endpoint operators need s > 0");
  if (op == Operator::noncentered || op == Operator::inner) free_maxima();

  MaximalField out;
  out.op = op;
  out.profile_ref = std::move(profile_ref);
  out.dimension = impl_->n;
  out.samples.resize(grid.size());

  const std::size_t block = static_cast<std::size_t>(std::max(1, impl_->opts.block_size));
  const std::size_t nblocks = (grid.size() + block - 1) / block;
  const std::size_t stride = static_cast<std::size_t>(std::max(1, impl_->opts.audit_stride));
  std::vector<std::vector<AuditRecord>> audits(nblocks);

  parallel_for(nblocks, resolve_workers(impl_->opts.workers), [&](std::size_t b) {
    const std::size_t lo = b * block, hi = std::min(grid.size(), lo + block);
    std::optional<MaximalSample> prev;
    for (std::size_t i = lo; i < hi; ++i) {
      out.samples[i] = impl_->evaluate(grid[i], op, prev);
      if (prev && i % stride == stride / 2) {
        const MaximalSample cold = impl_->evaluate(grid[i], op, std::nullopt);
        audits[b].push_back({i, out.samples[i].value, cold.value});
      }
      prev = out.samples[i];
    }
  });
  for (auto& a : audits) out.audits.insert(out.audits.end(), a.begin(), a.end());
  return out;
}

MaximalSample maximal_value(const RadialProfile& p, double s, Operator op,
                            const EngineOptions& opts) {
  return MaximalEngine(p, opts).evaluate(s, op);
}

MaximalField maximal_field(const RadialProfile& p, std::span<const double> grid, Operator op,
                           const EngineOptions& opts, std::string profile_ref) {
  return MaximalEngine(p, opts).field(grid, op, std::move(profile_ref));
}

double value_at_origin(const RadialProfile& p, Operator op, const EngineOptions& opts) {
  if (op == Operator::inner || op == Operator::endpoint)
    throw std::invalid_argument("value_at_origin: only the noncentered and centered operators");
  return maximal_value(p, 0.0, op, opts).value;
}

double brute_force_offaxis(const RadialProfile& p, double s, int n_samples, std::uint64_t seed,
                           const QuadratureOptions& quad) {
  if (!(s > 0.0)) throw std::invalid_argument("brute_force_offaxis: s must be positive");
  const RadialProfile a = abs_profile(p);
  const RadialIntegrand g = RadialIntegrand::values_of(a);
  const int n = p.dimension();
  const double L = std::max(s, a.support_end());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  double best = 0.0;
  for (int k = 0; k < n_samples; ++k) {
    double z1, z2;
    if (k % 2 == 0) {
      // Anywhere in the plane region that can matter.
      z1 = (unit(rng) * 3.0 - 1.0) * L;
      z2 = unit(rng) * 2.0 * L;
    } else {
      // Near the evaluation point.
      const double sc = L * std::pow(10.0, -3.0 * unit(rng));
      z1 = s + sc * normal(rng);
      z2 = std::abs(sc * normal(rng));
    }
    const double dist = std::hypot(z1 - s, z2);
    const double extra = L * std::pow(10.0, -4.0 + 4.5 * unit(rng)) * unit(rng);
    const double r = dist + extra;
    if (!(r > 0.0)) continue;
    const double d = std::hypot(z1, z2);
    const double v = ball_integral(g, AxisBall(d, r, n), KernelMode::plain, quad) /
                     ball_volume(r, n);
    best = std::max(best, v);
  }
  return best;
}

// ---- n = 1 interval search --------------------------------------------------

namespace {

// |f|(|y|) on the line as pieces [lo, hi] with value alpha + beta y, plus the
// primitive G(y) = int_0^y.
struct LineProfile {
  struct Piece {
    double lo, hi, alpha, beta;
  };
  std::vector<Piece> pieces;
  std::vector<double> g_lo;  // G at each piece's lo

  explicit LineProfile(const RadialProfile& a) {
    const auto t = a.grid();
    const auto v = a.values();
    std::vector<Piece> right;
    if (t.front() > 0.0) right.push_back({0.0, t.front(), v.front(), 0.0});
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
      const double beta = (v[i + 1] - v[i]) / (t[i + 1] - t[i]);
      right.push_back({t[i], t[i + 1], v[i] - beta * t[i], beta});
    }
    for (auto it = right.rbegin(); it != right.rend(); ++it)
      pieces.push_back({-it->hi, -it->lo, it->alpha, -it->beta});
    pieces.insert(pieces.end(), right.begin(), right.end());
    // G is anchored at the left end of the support; only differences matter.
    double acc = 0.0;
    g_lo.resize(pieces.size());
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      g_lo[i] = acc;
      acc += piece_integral(pieces[i], pieces[i].lo, pieces[i].hi);
    }
  }

  static double piece_integral(const Piece& p, double l, double u) {
    return p.alpha * (u - l) + 0.5 * p.beta * (u * u - l * l);
  }

  double h(double y) const {
    for (const auto& p : pieces)
      if (y >= p.lo && y <= p.hi) return p.alpha + p.beta * y;
    return 0.0;
  }

  double G(double y) const {
    if (y <= pieces.front().lo) return 0.0;
    auto it = std::upper_bound(pieces.begin(), pieces.end(), y,
                               [](double x, const Piece& p) { return x < p.lo; });
    const std::size_t k = static_cast<std::size_t>(it - pieces.begin()) - 1;
    const Piece& p = pieces[k];
    if (y >= p.hi) return g_lo[k] + piece_integral(p, p.lo, p.hi);
    return g_lo[k] + piece_integral(p, p.lo, y);
  }

  double mean(double a, double b) const {
    // Short intervals: the difference quotient is all rounding.
    if (b - a <= 1e-9 * (std::abs(a) + std::abs(b) + 1.0)) return h(0.5 * (a + b));
    return (G(b) - G(a)) / (b - a);
  }

  // max over b >= x of mean(a, b), a <= x.
  double best_right(double a, double x) const {
    double best = x > a ? mean(a, x) : h(x);
    const double Ga = G(a);
    for (std::size_t k = 0; k < pieces.size(); ++k) {
      const Piece& p = pieces[k];
      if (p.hi < x) continue;
      if (p.hi > a) best = std::max(best, mean(a, p.hi));
      // Stationary points: h(b)(b - a) = G(b) - G(a) on this piece.
      const double A = 0.5 * p.beta;
      const double B = -p.beta * a;
      const double C = -p.alpha * a + p.alpha * p.lo + 0.5 * p.beta * p.lo * p.lo - g_lo[k] + Ga;
      double roots[2];
      int nr = 0;
      if (A != 0.0) {
        const double disc = B * B - 4 * A * C;
        if (disc >= 0.0) {
          const double sq = std::sqrt(disc);
          roots[nr++] = (-B - sq) / (2 * A);
          roots[nr++] = (-B + sq) / (2 * A);
        }
      }
      // b = a always solves the equation when a lies in this piece; skip it.
      const double near = 1e-9 * (std::abs(a) + std::abs(p.hi) + 1.0);
      for (int i = 0; i < nr; ++i) {
        const double b = roots[i];
        if (b >= std::max(x, p.lo) && b <= p.hi && b > a + near) best = std::max(best, mean(a, b));
      }
    }
    return best;
  }
};

}  // namespace

double interval_maximal_1d(const RadialProfile& p, double x, int scan_points) {
  if (p.dimension() != 1) throw std::invalid_argument("interval_maximal_1d: needs n = 1");
  const RadialProfile a = abs_profile(p);
  const LineProfile line(a);
  const double lo = std::min(line.pieces.front().lo, x);
  std::vector<double> as = linear_points(lo, x, std::max(scan_points, 3));
  for (const auto& pc : line.pieces) {
    if (pc.lo <= x) as.push_back(pc.lo);
    if (pc.hi <= x) as.push_back(pc.hi);
  }
  as.push_back(x);
  sort_unique(as, 0.0);
  std::vector<double> vals(as.size());
  std::size_t arg = 0;
  for (std::size_t i = 0; i < as.size(); ++i) {
    vals[i] = line.best_right(as[i], x);
    if (vals[i] > vals[arg]) arg = i;
  }
  double best = std::max(vals[arg], line.h(x));
  // Refine around the best scanned left endpoint on each side.
  const double l = arg > 0 ? as[arg - 1] : as[arg];
  const double u = arg + 1 < as.size() ? as[arg + 1] : as[arg];
  if (u > l) {
    for (auto [il, iu] : {std::pair{l, as[arg]}, std::pair{as[arg], u}}) {
      if (iu > il) {
        const auto refined = golden_max([&](double t) { return line.best_right(t, x); }, il, iu,
                                        1e-13 * (1 + std::abs(x)));
        best = std::max(best, refined.second);
      }
    }
  }
  return best;
}

std::vector<double> uniform_grid(double extent, int count) {
  if (!(extent > 0.0) || count < 1) throw std::invalid_argument("uniform_grid: bad arguments");
  std::vector<double> g(count);
  for (int i = 0; i < count; ++i) g[i] = extent * (i + 1) / count;
  return g;
}

std::vector<double> default_sample_grid(const RadialProfile& p, int count) {
  if (count < 8) throw std::invalid_argument("default_sample_grid: need at least 8 samples");
  const double tn = p.support_end();
  const int geo = count / 8;
  std::vector<double> g = uniform_grid(2.0 * tn, count - 3 * geo);
  for (int k = 1; k <= geo; ++k) {
    const double q = std::pow(2.0, -12.0 * k / geo);
    g.push_back(tn * q / 16.0);
    g.push_back(tn * (1.0 - q / 16.0));
    g.push_back(tn * (1.0 + q / 16.0));
  }
  sort_unique(g, 1e-12 * tn);
  return g;
}

std::string field_to_csv(const MaximalField& f) {
  std::ostringstream os;
  os << "s,value,d,r,c,multi_modal\n";
  for (const auto& x : f.samples) {
    os << fmt(x.s) << ',' << fmt(x.value) << ',' << fmt(x.center()) << ',' << fmt(x.radius())
       << ',' << (x.c ? fmt(*x.c) : std::string()) << ',' << (x.diagnostics.multi_modal ? 1 : 0)
       << '\n';
  }
  return os.str();
}

std::string field_to_json(const MaximalField& f, const std::string& config_hash) {
  nlohmann::ordered_json j;
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  j["constraint"] = {{"kind", operator_name(f.op)}};
  j["profile_ref"] = f.profile_ref;
  j["dimension"] = f.dimension;
  auto& arr = j["samples"] = nlohmann::ordered_json::array();
  for (const auto& x : f.samples) {
    nlohmann::ordered_json row;
    row["s"] = x.s;
    row["value"] = x.value;
    if (x.argmax)
      row["argmax"] = {{"center", x.argmax->center()}, {"radius", x.argmax->radius()}};
    else
      row["argmax"] = nullptr;
    row["c"] = x.c ? nlohmann::ordered_json(*x.c) : nlohmann::ordered_json(nullptr);
    row["diagnostics"] = {{"evaluations", x.diagnostics.evaluations},
                          {"refinement_gap", x.diagnostics.refinement_gap},
                          {"multi_modal", x.diagnostics.multi_modal}};
    arr.push_back(std::move(row));
  }
  auto& au = j["audits"] = nlohmann::ordered_json::array();
  for (const auto& a : f.audits)
    au.push_back({{"index", a.index}, {"warm", a.warm_value}, {"cold", a.cold_value}});
  return j.dump(2) + "\n";
}

}  // namespace radmax
