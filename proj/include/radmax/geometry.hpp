#pragma once

// Spherical-cap kernels: integrals of radial functions over balls reduce to
// one-dimensional weighted integrals in the radius t.
//
// For a ball B(d e, r) and the sphere |y| = t, the cap angle theta* satisfies
// cos theta* = (t^2 + d^2 - r^2) / (2 t d), so that
//
//   A(t) = H^{n-1}(dB(0,t) n B)  = s_{n-2} t^{n-1} I_{n-2}(theta*)
//   C(t) = int_cap cos(phi)      = s_{n-2} t^{n-1} sin^{n-1}(theta*) / (n-1)
//
// with I_m(theta) = int_0^theta sin^m. Three moments are assembled from these:
//   plain          int g(t) A(t) dt       = int_B g(|y|) dy
//   radius_weight  int g(t) t A(t) dt     = int_B g(|y|) |y| dy
//   cos_moment     int g(t) C(t) dt       = int_B g(|y|) (y/|y|) . e dy

#include <cstdint>
#include <span>
#include <vector>

#include "radmax/profile.hpp"

namespace radmax {

/// Ball with center d*e on a fixed axis, radius r, in R^n.
class AxisBall {
 public:
  AxisBall(double center, double radius, int dimension);

  double center() const { return d_; }
  double radius() const { return r_; }
  int dimension() const { return n_; }
  double volume() const;

  /// Closed-ball containment of the axis point at radius s: |s - d| <= r + tol.
  bool contains_axis_point(double s, double tol = 0.0) const;

 private:
  double d_;
  double r_;
  int n_;
};

struct CapEvaluation {
  double t;
  double cos_theta_star;
  double area;
  double cos_moment;
};

/// I_m(theta) = int_0^theta sin^m(phi) dphi.
double sin_power_integral(int m, double theta);

/// Cap kernels at sphere radius t > 0. For n = 1 the sphere is {-t, t}.
CapEvaluation cap_kernels(double t, const AxisBall& ball);

/// omega_n r^n.
double ball_volume(double r, int n);

/// Piecewise-linear (possibly discontinuous) function of the radius, zero
/// outside its segments. Used both for |f| (continuous) and for |f|' or |f'|
/// (piecewise constant).
class RadialIntegrand {
 public:
  struct Segment {
    double lo;
    double hi;
    double value;  // value at lo
    double slope;
  };

  RadialIntegrand() = default;
  explicit RadialIntegrand(std::vector<Segment> segments);

  /// t -> f(t), including the constant extension below the first knot.
  static RadialIntegrand values_of(const RadialProfile& p);
  /// t -> f'(t), or |f'(t)| with `absolute`.
  static RadialIntegrand slopes_of(const RadialProfile& p, bool absolute = false);

  std::span<const Segment> segments() const { return segments_; }
  double support_end() const { return segments_.empty() ? 0.0 : segments_.back().hi; }
  double operator()(double t) const;

 private:
  std::vector<Segment> segments_;
};

enum class KernelMode { plain, radius_weight, cos_moment };

struct BallMoments {
  double plain = 0.0;
  double radius_weight = 0.0;
  double cos_moment = 0.0;
};

struct QuadratureOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-300;
  std::int64_t max_evaluations = 400000;
  bool want_plain = true;
  bool want_radius_weight = true;
  bool want_cos_moment = true;
};

/// All three kernel moments of g over the ball. Error control applies only
/// to the requested components; throws QuadratureError when the evaluation
/// budget is exhausted.
BallMoments ball_moments(const RadialIntegrand& g, const AxisBall& ball,
                         const QuadratureOptions& opts = {});

double ball_integral(const RadialIntegrand& g, const AxisBall& ball, KernelMode mode,
                     QuadratureOptions opts = {});
double ball_integral(const RadialProfile& p, const AxisBall& ball, KernelMode mode,
                     QuadratureOptions opts = {});

/// Average of p (signed) over the ball; pass abs_profile(p) for |f|.
double ball_average(const RadialProfile& p, const AxisBall& ball, QuadratureOptions opts = {});
double ball_average(const RadialIntegrand& g, const AxisBall& ball, QuadratureOptions opts = {});

}  // namespace radmax
