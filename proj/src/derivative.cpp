#include "radmax/derivative.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace radmax {

namespace {

BallMoments slope_moments(const RadialProfile& p, const AxisBall& ball, bool absolute,
                          const QuadratureOptions& quad) {
  return ball_moments(RadialIntegrand::slopes_of(abs_profile(p), absolute), ball, quad);
}

// Ball average of |f| over B(center, r) with a center given in the plane.
double planar_average(const RadialIntegrand& g, std::array<double, 2> center, double r, int n,
                      const QuadratureOptions& quad) {
  const double d = std::hypot(center[0], center[1]);
  return ball_integral(g, AxisBall(d, r, n), KernelMode::plain, quad) / ball_volume(r, n);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double radial_derivative_formula(const RadialProfile& p, double s, const AxisBall& ball,
                                 const QuadratureOptions& quad) {
  if (!(s > 0.0)) throw std::invalid_argument("radial_derivative_formula: s must be positive");
  const BallMoments m = slope_moments(p, ball, false, quad);
  return m.radius_weight / (s * ball.volume());
}

Residual optimality_residual(const RadialProfile& p, double s, const AxisBall& ball,
                             const QuadratureOptions& quad) {
  const BallMoments m = slope_moments(p, ball, false, quad);
  const BallMoments ma = slope_moments(p, ball, true, quad);
  return {m.radius_weight - s * m.cos_moment, ma.radius_weight + s * ma.plain};
}

double boundary_derivative_magnitude(const RadialProfile& p, double s, const AxisBall& ball,
                                     double tol, const QuadratureOptions& quad) {
  const double d = ball.center(), r = ball.radius();
  if (std::abs(std::abs(s - d) - r) > tol * (s + r))
    throw std::invalid_argument("boundary_derivative_magnitude: point is not on the sphere");
  const BallMoments m = slope_moments(p, ball, false, quad);
  return (d * m.cos_moment - m.radius_weight) / (r * ball.volume());
}

PerturbationDerivative affine_perturbation_derivative(const RadialProfile& p,
                                                      const AxisBall& ball,
                                                      const AffineSpec& spec,
                                                      const QuadratureOptions& quad) {
  const int n = ball.dimension();
  const double d = ball.center(), r = ball.radius(), s = spec.s;
  const double vol = ball.volume();
  const BallMoments m = slope_moments(p, ball, false, quad);
  const BallMoments ma = slope_moments(p, ball, true, quad);
  const double vnorm = std::hypot(spec.v[0], spec.v[1]);

  // Velocity field y -> a + k (y - x); the ball moves to center z + h(a + k(z - x)),
  // radius (1 + h k) r.
  std::array<double, 2> a{0.0, 0.0};
  double k = 0.0;
  PerturbationDerivative out{};
  switch (spec.family) {
    case AffineFamily::translate:
      a = spec.v;
      out.kernel = spec.v[0] * m.cos_moment / vol;
      out.scale = vnorm * ma.plain / vol;
      break;
    case AffineFamily::dilate_about:
      k = 1.0;
      out.kernel = (m.radius_weight - s * m.cos_moment) / vol;
      out.scale = (ma.radius_weight + s * ma.plain) / vol;
      break;
    case AffineFamily::rescale_center: {
      if (!(s > 0.0)) throw std::invalid_argument("rescale_center: x must be nonzero");
      a = spec.v;
      k = spec.v[0] / s;  // v . x / |x|^2
      out.kernel = (spec.v[0] * m.cos_moment + k * (m.radius_weight - s * m.cos_moment)) / vol;
      out.scale = (vnorm * ma.plain + std::abs(k) * (ma.radius_weight + s * ma.plain)) / vol;
      break;
    }
  }

  QuadratureOptions tight = quad;
  tight.rel_tol = std::min(quad.rel_tol, 1e-13);
  tight.max_evaluations = std::max<std::int64_t>(quad.max_evaluations, 2000000);
  const RadialIntegrand g = RadialIntegrand::values_of(abs_profile(p));
  auto F = [&](double h) {
    const std::array<double, 2> c{d + h * (a[0] + k * (d - s)), h * a[1]};
    return planar_average(g, c, (1.0 + h * k) * r, n, tight);
  };
  auto D = [&](double h) { return (F(h) - F(-h)) / (2.0 * h); };
  const double h = 1e-4;
  out.finite_difference = (4.0 * D(0.5 * h) - D(h)) / 3.0;
  return out;
}

DilationQuotients dilation_quotients(const RadialProfile& p, const AxisBall& ball, double s,
                                     double h, const QuadratureOptions& quad) {
  const int n = ball.dimension();
  const RadialIntegrand g = RadialIntegrand::values_of(abs_profile(p));
  auto F = [&](double eta) {
    const double c = s + (1.0 + eta) * (ball.center() - s);
    return planar_average(g, {c, 0.0}, (1.0 + eta) * ball.radius(), n, quad);
  };
  const double f0 = F(0.0);
  return {(F(h) - f0) / h, (F(-h) - f0) / (-h)};
}

std::string_view ball_class_name(BallClass c) {
  switch (c) {
    case BallClass::interior_ball: return "interior_ball";
    case BallClass::boundary_ball: return "boundary_ball";
    case BallClass::skipped: return "skipped";
  }
  return "?";
}

std::vector<double> finite_differences(std::span<const double> x, std::span<const double> y) {
  const std::size_t m = x.size();
  if (m < 3) throw std::invalid_argument("finite_differences: need at least 3 points");
  std::vector<double> out(m);
  auto three_point = [&](std::size_t i0, std::size_t at) {
    // Derivative at x[at] of the quadratic through points i0, i0+1, i0+2.
    const double x0 = x[i0], x1 = x[i0 + 1], x2 = x[i0 + 2], z = x[at];
    const double w0 = ((z - x1) + (z - x2)) / ((x0 - x1) * (x0 - x2));
    const double w1 = ((z - x0) + (z - x2)) / ((x1 - x0) * (x1 - x2));
    const double w2 = ((z - x0) + (z - x1)) / ((x2 - x0) * (x2 - x1));
    return w0 * y[i0] + w1 * y[i0 + 1] + w2 * y[i0 + 2];
  };
  out[0] = three_point(0, 0);
  for (std::size_t i = 1; i + 1 < m; ++i) out[i] = three_point(i - 1, i);
  out[m - 1] = three_point(m - 3, m - 1);
  return out;
}

std::vector<DerivativeSample> finite_difference_field(const RadialProfile& p,
                                                      const MaximalField& field,
                                                      const DerivativeOptions& opts) {
  const auto grid = field.grid();
  const auto vals = field.values();
  const std::vector<double> fd = finite_differences(grid, vals);
  const RadialProfile a = abs_profile(p);
  const double delta = opts.contact_delta * a.sup_norm();
  const std::size_t m = grid.size();

  // Second differences give the grid-scaled tolerance for flat stretches.
  std::vector<double> curv(m, 0.0);
  for (std::size_t i = 1; i + 1 < m; ++i) {
    const double h0 = grid[i] - grid[i - 1], h1 = grid[i + 1] - grid[i];
    curv[i] = std::abs(2.0 * ((vals[i + 1] - vals[i]) / h1 - (vals[i] - vals[i - 1]) / h0) /
                       (h0 + h1));
  }

  std::vector<DerivativeSample> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    const MaximalSample& smp = field.samples[i];
    DerivativeSample& row = out[i];
    row.s = smp.s;
    row.value = smp.value;
    row.fd_derivative = fd[i];
    row.multi_modal = smp.diagnostics.multi_modal;
    const double h = i + 1 < m ? grid[i + 1] - grid[i] : grid[i] - grid[i - 1];
    double c = curv[i];
    if (i > 0) c = std::max(c, curv[i - 1]);
    if (i + 1 < m) c = std::max(c, curv[i + 1]);
    row.grid_tolerance = h * c + 1e-9 * a.sup_norm() / std::max(a.support_end(), 1e-300);

    const bool contact = smp.value <= evaluate(a, smp.s) + delta;
    if (smp.is_floor() || contact || row.multi_modal || !(smp.s > 0.0)) continue;
    const AxisBall& ball = *smp.argmax;
    const Residual res = optimality_residual(p, smp.s, ball, opts.quadrature);
    row.residual_moment = res.value;
    row.normalizer = res.normalizer;
    row.formula_derivative = radial_derivative_formula(p, smp.s, ball, opts.quadrature);
    const double gap = std::abs(std::abs(smp.s - ball.center()) - ball.radius());
    if (gap <= opts.boundary_tol * (smp.s + ball.radius())) {
      row.classification = BallClass::boundary_ball;
      row.boundary_magnitude =
          boundary_derivative_magnitude(p, smp.s, ball, opts.boundary_tol, opts.quadrature);
    } else {
      row.classification = BallClass::interior_ball;
    }
  }
  return out;
}

std::string derivative_samples_to_csv(const std::vector<DerivativeSample>& rows) {
  std::ostringstream os;
  os << "s,value,fd_derivative,formula_derivative,residual_moment,normalizer,"
        "boundary_magnitude,grid_tolerance,classification,multi_modal\n";
  for (const auto& r : rows) {
    os << fmt(r.s) << ',' << fmt(r.value) << ',' << fmt(r.fd_derivative) << ','
       << fmt(r.formula_derivative) << ',' << fmt(r.residual_moment) << ',' << fmt(r.normalizer)
       << ',' << fmt(r.boundary_magnitude) << ',' << fmt(r.grid_tolerance) << ','
       << ball_class_name(r.classification) << ',' << (r.multi_modal ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace radmax
