#pragma once

// Piecewise-linear radial profiles and their exact weighted calculus.
//
// A radial function on R^n is stored as its profile f(t), t = |x|, sampled at
// strictly increasing knots t_0 < ... < t_N. Between knots the profile is
// linear, below t_0 it is extended by the constant f(t_0) and beyond t_N it
// is identically zero (so f(t_N) must be zero). All weighted integrals
// sigma_n * int |f| t^{n-1} dt are evaluated in closed form per segment.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace radmax {

/// H^k measure of the unit sphere S^k in R^{k+1}: 2 pi^{(k+1)/2} / Gamma((k+1)/2).
double unit_sphere_measure(int k);

/// sigma_n = H^{n-1}(S^{n-1}).
inline double sphere_surface(int n) { return unit_sphere_measure(n - 1); }

/// omega_n = |B(0,1)| in R^n = sigma_n / n.
inline double unit_ball_volume(int n) { return sphere_surface(n) / n; }

/// Closed interval of radii [a, b] used to restrict norms to annuli.
struct AnnulusRange {
  AnnulusRange(double inner, double outer);
  double a;
  double b;
};

class RadialProfile {
 public:
  RadialProfile(int dimension, std::vector<double> grid, std::vector<double> values);

  /// Identically zero profile on [0, extent].
  static RadialProfile zero(int dimension, double extent = 1.0);

  int dimension() const { return dimension_; }
  std::size_t size() const { return grid_.size(); }
  std::span<const double> grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double first_knot() const { return grid_.front(); }
  double support_end() const { return grid_.back(); }

  /// max_t |f(t)|.
  double sup_norm() const;
  /// max |f'| over all segments.
  double max_slope() const;
  /// Smallest distance between consecutive knots.
  double min_spacing() const;

  /// Same profile viewed in another ambient dimension.
  RadialProfile with_dimension(int n) const;
  /// t -> f(t / lambda).
  RadialProfile dilated(double lambda) const;
  /// t -> c f(t).
  RadialProfile scaled(double c) const;

  bool operator==(const RadialProfile&) const = default;

 private:
  int dimension_;
  std::vector<double> grid_;
  std::vector<double> values_;
};

/// Piecewise-linear interpolation; constant below t_0, zero beyond t_N.
double evaluate(const RadialProfile& p, double t);

/// Slope of the active linear piece. At a knot the right-hand slope is
/// returned; below t_0 and beyond t_N the slope is zero.
double derivative_at(const RadialProfile& p, double t);

/// ||f||_{L^1(R^n)} = sigma_n int_0^inf |f(t)| t^{n-1} dt (exact).
double norm_l1(const RadialProfile& p);

/// ||Df||_{L^1} = sigma_n int |f'(t)| t^{n-1} dt, optionally over A[a, b] only.
double grad_norm_l1(const RadialProfile& p, std::optional<AnnulusRange> range = std::nullopt);

/// |f| with zero crossings inserted as knots.
RadialProfile abs_profile(const RadialProfile& p);

enum class MaxSource { first, second };

/// Pointwise maximum of two profiles plus the per-cell derivative source:
/// cell k (between knots k and k+1) takes the slope of `second` when
/// second > first at the cell midpoint, otherwise the slope of `first`.
struct CombinedProfile {
  RadialProfile profile;
  std::vector<MaxSource> source;
  std::vector<double> slope;
};

CombinedProfile combine_max(const RadialProfile& p, const RadialProfile& q);

/// Profile sampled on an arbitrary increasing grid whose last value is forced
/// to zero when `close_support` is set (used to materialize sampled fields).
RadialProfile profile_from_samples(int dimension, std::vector<double> grid,
                                   std::vector<double> values, bool close_support);

// ---- file formats ----------------------------------------------------------

std::string to_json(const RadialProfile& p);
RadialProfile profile_from_json(const std::string& text);
std::string to_csv(const RadialProfile& p);
RadialProfile profile_from_csv(const std::string& text);

/// Reads a .json or .csv profile; throws std::runtime_error naming the path.
RadialProfile load_profile(const std::string& path);
void save_profile(const RadialProfile& p, const std::string& path);

}  // namespace radmax
