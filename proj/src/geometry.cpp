#include "radmax/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <string>
#include <numbers>
#include <stdexcept>

#include "radmax/quadrature.hpp"

namespace radmax {

namespace {

constexpr int kMaxCachedDimension = 32;

const std::array<double, kMaxCachedDimension>& sphere_table() {
  static const std::array<double, kMaxCachedDimension> table = [] {
    std::array<double, kMaxCachedDimension> t{};
    for (int k = 0; k < kMaxCachedDimension; ++k) t[k] = unit_sphere_measure(k);
    return t;
  }();
  return table;
}

double sphere_measure_cached(int k) {
  return k < kMaxCachedDimension ? sphere_table()[k] : unit_sphere_measure(k);
}

double ipow(double x, int m) {
  double r = 1.0;
  for (int i = 0; i < m; ++i) r *= x;
  return r;
}

// I_m(pi) = sqrt(pi) Gamma((m+1)/2) / Gamma(m/2 + 1).
double half_turn_integral(int m) {
  static const std::array<double, kMaxCachedDimension> table = [] {
    std::array<double, kMaxCachedDimension> t{};
    for (int k = 0; k < kMaxCachedDimension; ++k)
      t[k] = std::sqrt(std::numbers::pi) * std::tgamma(0.5 * (k + 1)) / std::tgamma(0.5 * k + 1);
    return t;
  }();
  if (m < kMaxCachedDimension) return table[m];
  return std::sqrt(std::numbers::pi) * std::tgamma(0.5 * (m + 1)) / std::tgamma(0.5 * m + 1);
}

// int_0^asin(x) sin^m = sum_k binom(2k,k)/4^k x^{m+2k+1}/(m+2k+1), for small x.
double small_angle_integral(int m, double x) {
  const double x2 = x * x;
  double term = ipow(x, m + 1);
  double sum = term / (m + 1);
  for (int k = 1; k < 60; ++k) {
    term *= x2 * (2.0 * k - 1.0) / (2.0 * k);
    const double add = term / (m + 2 * k + 1);
    sum += add;
    if (add <= 1e-17 * sum) break;
  }
  return sum;
}

// I_m(theta) given cos, sin and 1 - cos of theta. The upward recurrence
// cancels badly for small angles, so both ends use the series instead. Only
// even m needs the angle itself.
double sin_power_integral_cs(int m, double c, double s, double omc) {
  if (m == 1) return omc;
  if (m == 0) return std::atan2(s, c);
  static const double kSmallCos = std::cos(0.35);
  if (c > kSmallCos) return small_angle_integral(m, s);
  if (c < -kSmallCos) return half_turn_integral(m) - small_angle_integral(m, s);
  double prev2 = (m % 2 == 0) ? std::atan2(s, c) : omc;  // I_0 or I_1
  double sp = (m % 2 == 0) ? s : s * s;                  // sin^{k-1} for k = 2 or 3
  for (int k = (m % 2 == 0) ? 2 : 3; k <= m; k += 2) {
    const double cur = (-c * sp + (k - 1) * prev2) / k;
    prev2 = cur;
    sp *= s * s;
  }
  return prev2;
}

// Kernel values (A, C) at t inside the cap zone, n >= 2, d > 0. tmr = t - r is
// passed separately so that the cap angle stays accurate for tiny caps:
//   1 - cos = (d - tmr)(t + r - d) / (2td),   1 + cos = (tmr + d)(t + r + d) / (2td).
inline std::array<double, 2> cap_values(double t, double tmr, double d, double r, int n,
                                        double s_nm2) {
  const double den = 2.0 * t * d;
  const double omc = std::clamp((d - tmr) * ((t + r) - d) / den, 0.0, 2.0);
  const double opc = std::clamp((tmr + d) * ((t + r) + d) / den, 0.0, 2.0);
  const double s = std::sqrt(omc * opc);
  const double c = 0.5 * (opc - omc);
  const double tn1 = ipow(t, n - 1);
  const double area = s_nm2 * tn1 * sin_power_integral_cs(n - 2, c, s, omc);
  const double cosm = s_nm2 * tn1 * ipow(s, n - 1) / (n - 1);
  return {area, cosm};
}

// int_l^u (alpha + beta t) t^m dt
double linear_moment(double alpha, double beta, int m, double l, double u) {
  const double m1 = m + 1.0;
  const double m2 = m + 2.0;
  return alpha * (ipow(u, m + 1) - ipow(l, m + 1)) / m1 +
         beta * (ipow(u, m + 2) - ipow(l, m + 2)) / m2;
}

}  // namespace

AxisBall::AxisBall(double center, double radius, int dimension)
    : d_(center), r_(radius), n_(dimension) {
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw std::invalid_argument("AxisBall: radius must be positive");
  if (!(center >= 0.0) || !std::isfinite(center))
    throw std::invalid_argument("AxisBall: center distance must be >= 0");
  if (dimension < 1) throw std::invalid_argument("AxisBall: dimension must be >= 1");
}

double AxisBall::volume() const { return ball_volume(r_, n_); }

bool AxisBall::contains_axis_point(double s, double tol) const {
  return std::abs(s - d_) <= r_ + tol;
}

double sin_power_integral(int m, double theta) {
  if (m < 0) throw std::domain_error("sin_power_integral: m must be >= 0");
  if (!(theta >= 0.0 && theta <= std::numbers::pi))
    throw std::domain_error("sin_power_integral: theta must lie in [0, pi]");
  const double h = std::sin(0.5 * theta);
  return sin_power_integral_cs(m, std::cos(theta), std::sin(theta), 2.0 * h * h);
}

CapEvaluation cap_kernels(double t, const AxisBall& ball) {
  if (!(t > 0.0)) throw std::domain_error("cap_kernels: t must be positive");
  const double d = ball.center(), r = ball.radius();
  const int n = ball.dimension();
  if (n == 1) {
    const bool plus = std::abs(t - d) <= r;
    const bool minus = std::abs(-t - d) <= r;
    const double cs = (t * t + d * d - r * r) / (2.0 * t * std::max(d, 1e-300));
    return {t, std::clamp(cs, -1.0, 1.0), double(plus) + double(minus),
            double(plus) - double(minus)};
  }
  if (d == 0.0) {
    const bool inside = t <= r;
    return {t, inside ? -1.0 : 1.0, inside ? sphere_surface(n) * ipow(t, n - 1) : 0.0, 0.0};
  }
  double c = std::clamp((t * t + d * d - r * r) / (2.0 * t * d), -1.0, 1.0);
  const auto [area, cosm] = cap_values(t, t - r, d, r, n, sphere_measure_cached(n - 2));
  return {t, c, area, cosm};
}

double ball_volume(double r, int n) { return unit_ball_volume(n) * std::pow(r, n); }

RadialIntegrand::RadialIntegrand(std::vector<Segment> segments) : segments_(std::move(segments)) {
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (!(segments_[i].hi > segments_[i].lo))
      throw std::invalid_argument("RadialIntegrand: empty segment");
    if (i > 0 && segments_[i].lo < segments_[i - 1].hi)
      throw std::invalid_argument("RadialIntegrand: overlapping segments");
  }
}

RadialIntegrand RadialIntegrand::values_of(const RadialProfile& p) {
  std::vector<Segment> segs;
  const auto g = p.grid();
  const auto v = p.values();
  if (g.front() > 0.0) segs.push_back({0.0, g.front(), v.front(), 0.0});
  for (std::size_t i = 0; i + 1 < g.size(); ++i)
    segs.push_back({g[i], g[i + 1], v[i], (v[i + 1] - v[i]) / (g[i + 1] - g[i])});
  return RadialIntegrand(std::move(segs));
}

RadialIntegrand RadialIntegrand::slopes_of(const RadialProfile& p, bool absolute) {
  std::vector<Segment> segs;
  const auto g = p.grid();
  const auto v = p.values();
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    double s = (v[i + 1] - v[i]) / (g[i + 1] - g[i]);
    if (absolute) s = std::abs(s);
    segs.push_back({g[i], g[i + 1], s, 0.0});
  }
  return RadialIntegrand(std::move(segs));
}

double RadialIntegrand::operator()(double t) const {
  auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                             [](double x, const Segment& s) { return x < s.lo; });
  if (it == segments_.begin()) return 0.0;
  --it;
  if (t >= it->hi) return 0.0;
  return it->value + it->slope * (t - it->lo);
}

BallMoments ball_moments(const RadialIntegrand& g, const AxisBall& ball,
                         const QuadratureOptions& opts) {
  const double d = ball.center(), r = ball.radius();
  const int n = ball.dimension();
  const double sigma = sphere_measure_cached(n - 1);
  const double engulf_hi = r > d ? r - d : 0.0;
  const double cap_lo = std::abs(d - r);
  const double cap_hi = d + r;

  BallMoments out;
  struct CapPiece {
    double lo, hi, alpha, beta, lo_minus_r;
  };
  std::vector<CapPiece> cap;
  // Magnitude of the closed-form part, so that the tolerance refers to the
  // whole integral rather than to the cap zone alone.
  std::array<double, 3> exact_scale{};

  for (const auto& seg : g.segments()) {
    if (seg.lo >= cap_hi) break;
    if (seg.hi <= 0.0) continue;
    const double alpha = seg.value - seg.slope * seg.lo;
    const double beta = seg.slope;
    // Sphere fully inside the ball.
    {
      const double l = std::max(seg.lo, 0.0), u = std::min(seg.hi, engulf_hi);
      if (u > l) {
        const double m0 = sigma * linear_moment(alpha, beta, n - 1, l, u);
        const double m1 = sigma * linear_moment(alpha, beta, n, l, u);
        out.plain += m0;
        out.radius_weight += m1;
        exact_scale[0] += std::abs(m0);
        exact_scale[1] += std::abs(m1);
      }
    }
    // Partial caps.
    if (d > 0.0) {
      const double l = std::max(seg.lo, cap_lo), u = std::min(seg.hi, cap_hi);
      // Slivers a few ulps wide carry nothing but rounding noise.
      if (u - l > 1e-14 * u) {
        if (n == 1) {
          const double m0 = linear_moment(alpha, beta, 0, l, u);
          out.plain += m0;
          out.radius_weight += linear_moment(alpha, beta, 1, l, u);
          out.cos_moment += m0;
        } else {
          // lo - r without cancellation when the piece starts at the cap edge.
          double lmr = l - r;
          if (l == cap_lo) lmr = r > d ? -d : d - 2.0 * r;
          cap.push_back({l, u, alpha, beta, lmr});
        }
      }
    }
  }
  if (cap.empty()) return out;

  const double s_nm2 = sphere_measure_cached(n - 2);
  // |C| <= A pointwise, so the cos moment is judged against the plain one.
  constexpr std::array<int, 3> kScaleSource{0, 1, 0};
  const std::array<bool, 3> active{opts.want_plain, opts.want_radius_weight,
                                   opts.want_cos_moment};
  std::vector<std::array<double, 2>> intervals;
  intervals.reserve(cap.size());
  AdaptiveResult3 res;
  // Piece k is integrated in the offset delta = t - lo, with u in [k, k+1].
  // The kernels have square-root behaviour in t at the cap ends |d - r| and
  // d + r (even n only; for odd n they are polynomial), so pieces touching an
  // end use delta ~ u^2 there, which makes the integrand smooth again.
  const bool even = n % 2 == 0;
  auto eval = [&](double u) -> std::array<double, 3> {
    std::size_t k = static_cast<std::size_t>(u);
    if (k >= cap.size()) k = cap.size() - 1;
    const CapPiece& p = cap[k];
    const double w = p.hi - p.lo;
    const double x = u - static_cast<double>(k);
    const bool at_lo = even && k == 0 && p.lo == cap_lo;
    const bool at_hi = even && k + 1 == cap.size() && p.hi == cap_hi;
    double delta, jac;
    if (at_lo && at_hi) {
      delta = w * x * x * (3.0 - 2.0 * x);
      jac = 6.0 * w * x * (1.0 - x);
    } else if (at_lo) {
      delta = w * x * x;
      jac = 2.0 * w * x;
    } else if (at_hi) {
      const double y = 1.0 - x;
      delta = w * (1.0 - y * y);
      jac = 2.0 * w * y;
    } else {
      delta = w * x;
      jac = w;
    }
    const double t = p.lo + delta;
    if (!(t > 0.0)) return {0.0, 0.0, 0.0};
    const double gv = (p.alpha + p.beta * t) * jac;
    const auto [area, cosm] = cap_values(t, p.lo_minus_r + delta, d, r, n, s_nm2);
    return {gv * area, gv * t * area, gv * cosm};
  };
  try {
    for (std::size_t k = 0; k < cap.size(); ++k) intervals.push_back({double(k), double(k + 1)});
    res = integrate_gk15(eval, intervals, opts.rel_tol, opts.abs_tol, active,
                         opts.max_evaluations, exact_scale, kScaleSource);
  } catch (const QuadratureError& e) {
    char ctx[160];
    std::snprintf(ctx, sizeof ctx, " [ball d=%.17g r=%.17g n=%d]", d, r, n);
    throw QuadratureError(e.what() + std::string(ctx));
  }
  out.plain += res.value[0];
  out.radius_weight += res.value[1];
  out.cos_moment += res.value[2];
  return out;
}

double ball_integral(const RadialIntegrand& g, const AxisBall& ball, KernelMode mode,
                     QuadratureOptions opts) {
  opts.want_plain = mode == KernelMode::plain;
  opts.want_radius_weight = mode == KernelMode::radius_weight;
  opts.want_cos_moment = mode == KernelMode::cos_moment;
  const BallMoments m = ball_moments(g, ball, opts);
  switch (mode) {
    case KernelMode::plain: return m.plain;
    case KernelMode::radius_weight: return m.radius_weight;
    case KernelMode::cos_moment: return m.cos_moment;
  }
  return 0.0;
}

double ball_integral(const RadialProfile& p, const AxisBall& ball, KernelMode mode,
                     QuadratureOptions opts) {
  return ball_integral(RadialIntegrand::values_of(p), ball, mode, opts);
}

double ball_average(const RadialIntegrand& g, const AxisBall& ball, QuadratureOptions opts) {
  return ball_integral(g, ball, KernelMode::plain, opts) / ball.volume();
}

double ball_average(const RadialProfile& p, const AxisBall& ball, QuadratureOptions opts) {
  return ball_average(RadialIntegrand::values_of(p), ball, opts);
}

}  // namespace radmax
