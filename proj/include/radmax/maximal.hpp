#pragma once

// Maximal averages of radial profiles over axis balls.
//
// For a radial f the average over B(z, r) only depends on (|z|, r), so every
// supremum reduces to a search over axis balls (d, r) with d >= 0. The
// admissible set for the point at radius s is |s - d| <= r. The engine splits
// it into pieces whose optima can be located reliably:
//
//   floor     the r -> 0 limit |f(s)|
//   faces     d = s + r and d = s - r (s on the boundary of the ball)
//   axis      d = 0, r >= s
//   free      local maxima of F(d, r) found once per profile, kept when
//             they contain s
//
// Along each one-parameter family the derivative of the average is a fixed
// positive multiple of a kernel moment of |f|', so critical points are
// located by bracketing sign changes and root finding.

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "radmax/geometry.hpp"
#include "radmax/profile.hpp"

namespace radmax {

enum class Operator { noncentered, centered, inner, endpoint };

/// Short names used on the command line: m, mc, mi, f4.
std::string_view operator_code(Operator op);
std::string_view operator_name(Operator op);
Operator parse_operator(std::string_view code);

struct OptimizerDiagnostics {
  std::int64_t evaluations = 0;
  double refinement_gap = 0.0;
  bool multi_modal = false;
};

struct MaximalSample {
  double s = 0.0;
  double value = 0.0;
  /// Empty when the floor |f(s)| (a degenerate ball at s) wins.
  std::optional<AxisBall> argmax;
  /// Argmax center = c * s; 1 for the floor, empty at s = 0.
  std::optional<double> c;
  OptimizerDiagnostics diagnostics;

  bool is_floor() const { return !argmax.has_value(); }
  double center() const { return argmax ? argmax->center() : s; }
  double radius() const { return argmax ? argmax->radius() : 0.0; }
};

struct AuditRecord {
  std::size_t index;
  double warm_value;
  double cold_value;
};

struct MaximalField {
  Operator op = Operator::noncentered;
  std::string profile_ref;
  int dimension = 0;
  std::vector<MaximalSample> samples;
  std::vector<AuditRecord> audits;

  std::vector<double> grid() const;
  std::vector<double> values() const;
  double max_audit_gap() const;
};

struct EngineOptions {
  QuadratureOptions quadrature{};
  /// 0 means: RADMAX_WORKERS if set, otherwise hardware concurrency.
  int workers = 0;
  /// Every audit_stride-th sample is recomputed without warm start.
  int audit_stride = 20;
  /// Size of the contiguous warm-start chains (fixed so results do not
  /// depend on the worker count).
  int block_size = 32;
  double multi_modal_tol = 1e-7;  // relative to sup |f|
};

int resolve_workers(int requested);

class MaximalEngine {
 public:
  explicit MaximalEngine(const RadialProfile& p, EngineOptions opts = {});
  ~MaximalEngine();
  MaximalEngine(MaximalEngine&&) noexcept;
  MaximalEngine(const MaximalEngine&) = delete;
  MaximalEngine& operator=(const MaximalEngine&) = delete;

  const RadialProfile& profile() const;
  const RadialProfile& abs() const;
  const EngineOptions& options() const;

  /// Average of |f| over the axis ball (d, r).
  double average(double d, double r) const;

  /// Gradient of the average in (d, r).
  std::array<double, 2> gradient(double d, double r) const;

  MaximalSample evaluate(double s, Operator op,
                         const std::optional<MaximalSample>& warm = std::nullopt) const;

  MaximalField field(std::span<const double> grid, Operator op,
                     std::string profile_ref = {}) const;

  struct FreeMax {
    double d;
    double r;
    double value;
  };
  /// Local maxima of the unconstrained average (computed once, cached).
  std::span<const FreeMax> free_maxima() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

MaximalSample maximal_value(const RadialProfile& p, double s, Operator op,
                            const EngineOptions& opts = {});

MaximalField maximal_field(const RadialProfile& p, std::span<const double> grid, Operator op,
                           const EngineOptions& opts = {}, std::string profile_ref = {});

/// Largest average over random balls (centers in a plane through the axis)
/// containing the point at radius s.
double brute_force_offaxis(const RadialProfile& p, double s, int n_samples,
                           std::uint64_t seed, const QuadratureOptions& quad = {});

/// Mf(0) or M_c f(0); inner and endpoint operators are rejected.
double value_at_origin(const RadialProfile& p, Operator op, const EngineOptions& opts = {});

/// Direct interval search for n = 1: sup over [a, b] containing x of the mean
/// of |f|(|y|). Uses exact primitives and a dense endpoint scan.
double interval_maximal_1d(const RadialProfile& p, double x, int scan_points = 4000);

/// count points uniform on (0, extent].
std::vector<double> uniform_grid(double extent, int count);
/// Grid with geometric refinement near 0 and near the support end.
std::vector<double> default_sample_grid(const RadialProfile& p, int count);

std::string field_to_csv(const MaximalField& f);
std::string field_to_json(const MaximalField& f, const std::string& config_hash = {});

}  // namespace radmax
