#pragma once

// First-order calculus of maximal averages at an argmax ball B = B(d e, r)
// for the point x = s e. With g = |f| and t = |y| every quantity reduces to
// kernel moments of g'(t):
//
//   radial derivative     (1/(s|B|)) int g' t A
//   optimality residual   R = int g' [t A - s C]        (zero at an argmax)
//   boundary magnitude    (1/(r|B|)) int g' [d C - t A]

#include <array>
#include <string>
#include <vector>

#include "radmax/geometry.hpp"
#include "radmax/maximal.hpp"
#include "radmax/profile.hpp"

namespace radmax {

double radial_derivative_formula(const RadialProfile& p, double s, const AxisBall& ball,
                                 const QuadratureOptions& quad = {});

struct Residual {
  double value;       // R
  double normalizer;  // N = int |g'| (t + s) A
};

Residual optimality_residual(const RadialProfile& p, double s, const AxisBall& ball,
                             const QuadratureOptions& quad = {});

/// Requires | |s - d| - r | <= tol; throws std::invalid_argument otherwise.
double boundary_derivative_magnitude(const RadialProfile& p, double s, const AxisBall& ball,
                                     double tol = 1e-9, const QuadratureOptions& quad = {});

enum class AffineFamily { translate, dilate_about, rescale_center };

/// Vectors live in the plane spanned by the axis e and one transverse
/// direction: {axial, transverse}. The point x is s e.
struct AffineSpec {
  AffineFamily family;
  std::array<double, 2> v{1.0, 0.0};
  double s = 0.0;
};

struct PerturbationDerivative {
  double kernel;
  double finite_difference;
  double scale;  // average of |D|f|| |velocity| over the ball (upper bound)
};

PerturbationDerivative affine_perturbation_derivative(const RadialProfile& p,
                                                      const AxisBall& ball,
                                                      const AffineSpec& spec,
                                                      const QuadratureOptions& quad = {});

/// One-sided difference quotients of the ball average along the family
/// h -> dilation of B about x by (1 + h).
struct DilationQuotients {
  double plus;
  double minus;
};
DilationQuotients dilation_quotients(const RadialProfile& p, const AxisBall& ball, double s,
                                     double h, const QuadratureOptions& quad = {});

enum class BallClass { interior_ball, boundary_ball, skipped };
std::string_view ball_class_name(BallClass c);

struct DerivativeSample {
  double s = 0.0;
  double value = 0.0;
  double fd_derivative = 0.0;
  double formula_derivative = 0.0;
  double residual_moment = 0.0;
  double normalizer = 0.0;
  double boundary_magnitude = 0.0;
  double grid_tolerance = 0.0;
  BallClass classification = BallClass::skipped;
  bool multi_modal = false;
};

struct DerivativeOptions {
  QuadratureOptions quadrature{};
  double contact_delta = 1e-9;  // relative to sup |f|
  double boundary_tol = 1e-9;   // relative to s + r
};

/// Centered differences on a nonuniform grid (one-sided at the ends).
std::vector<double> finite_differences(std::span<const double> x, std::span<const double> y);

std::vector<DerivativeSample> finite_difference_field(const RadialProfile& p,
                                                      const MaximalField& field,
                                                      const DerivativeOptions& opts = {});

std::string derivative_samples_to_csv(const std::vector<DerivativeSample>& rows);

}  // namespace radmax
