#pragma once

// Conditional maximal function on one-dimensional gradient fields.
//
// F = g' for a compactly supported piecewise-linear potential g, so F is
// piecewise constant. For x on the line,
//
//   M~F(x) = sup |avg_[a,b] F|  over intervals [a, b] containing x with
//            int_a^b F(y)(y - x) dy = 0,
//
// and avg_[a,b] F = (g(b) - g(a)) / (b - a). The moment is P(b) - P(a) with P
// piecewise quadratic, so intervals with an end at a knot (or at x) are solved
// exactly; intervals with both ends inside pieces lie on conics, searched by
// sampling plus golden section. No limiting floor is added: points that admit
// no zero-moment interval get the value 0.

#include <cstdint>
#include <string>
#include <vector>

namespace radmax {

class LineField {
 public:
  /// Potential g with g(knots.front()) = g(knots.back()) = 0.
  LineField(std::vector<double> knots, std::vector<double> potential);

  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& potential() const { return g_; }
  std::size_t pieces() const { return knots_.size() - 1; }
  /// F on piece k.
  double slope(std::size_t k) const { return slope_[k]; }

  double g(double y) const;
  /// F(y) with the right-continuous convention; 0 off the support.
  double F(double y) const;
  double left() const { return knots_.front(); }
  double right() const { return knots_.back(); }
  double norm_l1() const;

  /// y -> F(y / lambda), i.e. potential lambda g(y / lambda).
  LineField dilated(double lambda) const;

 private:
  std::vector<double> knots_;
  std::vector<double> g_;
  std::vector<double> slope_;
};

/// m(b) = int_a^b F(y)(y - x) dy.
double moment(const LineField& f, double x, double a, double b);
/// int_a^b |F(y)| |y - x| dy, the scale for the zero-moment tolerance.
double abs_moment(const LineField& f, double x, double a, double b);

/// All b >= x, b > a, with m(b) = 0. Where m vanishes on a whole stretch only
/// the left end of the stretch is returned.
std::vector<double> moment_roots(const LineField& f, double x, double a);

struct WitnessInterval {
  double a = 0.0;
  double b = 0.0;
  double moment = 0.0;
  double average = 0.0;
};

struct ConditionalValue {
  double value = 0.0;
  std::vector<WitnessInterval> witnesses;  // best first
};

struct ExplorerOptions {
  /// Samples per zero-moment curve piece before golden-section refinement.
  int curve_samples = 16;
  int max_witnesses = 4;
};

ConditionalValue conditional_maximal_1d(const LineField& f, double x,
                                        const ExplorerOptions& opts = {});

/// Non-centered maximal function of |F| on the line (exact: optimal endpoints
/// are breakpoints or x itself).
double line_maximal_abs(const LineField& f, double x);

/// Parametric families for the L^1 ratio sweep.
enum class LineFamily { scaled_bump, dyadic_comb, modulated_packet };
std::string line_family_name(LineFamily f);
/// Member `level` (0, 1, 2, ...) of a family: scale 2^level for bumps, 2^level
/// teeth for combs, frequency 2^level for packets.
LineField line_family_member(LineFamily f, int level);

/// Seeded random potential with the given number of knots on [-1, 1].
LineField random_line_field(std::uint64_t seed, int knots);

struct RatioPoint {
  int level = 0;
  double norm_mtilde = 0.0;
  double norm_f = 0.0;
  double ratio = 0.0;
};

struct RatioTrend {
  std::string family;
  std::vector<RatioPoint> points;
  /// Ratio grows strictly over three consecutive doublings.
  bool growing = false;
};

/// ||M~F||_1 by trapezoid on a grid over the support widened by its length on
/// each side, plus a tail assuming M~F ~ C / x^2.
double conditional_l1_norm(const LineField& f, int samples, const ExplorerOptions& opts = {});

std::vector<RatioTrend> ratio_scan(const std::vector<LineFamily>& families, int levels,
                                   int samples, const ExplorerOptions& opts = {});

std::string ratio_trends_to_csv(const std::vector<RatioTrend>& trends);

}  // namespace radmax
