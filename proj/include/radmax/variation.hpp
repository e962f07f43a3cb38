#pragma once

// Norm inequalities and structural checks on computed maximal fields.
//
// Total variations are discrete: sigma_n sum_j |v_{j+1} - v_j| t_mid^{n-1} over
// the sample grid, which is the weighted variation of the piecewise-linear
// interpolant and never exceeds the true ||D(.)||_1 of that interpolant.

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "radmax/derivative.hpp"
#include "radmax/maximal.hpp"
#include "radmax/profile.hpp"

namespace radmax {

/// Weighted variation over the pairs whose midpoint lies in [a, b).
double weighted_variation(std::span<const double> s, std::span<const double> v, int n,
                          double a = 0.0, double b = std::numeric_limits<double>::infinity());

struct WeightedVariation {
  double body = 0.0;
  /// Beyond the last sample, assuming v ~ C s^{-n}: sigma_n n v_last s_last^{n-1}.
  double tail = 0.0;
  double total() const { return body + tail; }
};

/// Variation of a field including the step from the value at s = 0.
WeightedVariation field_variation(const MaximalField& f, double origin, bool decaying_tail);

/// Value used at s = 0: Mf(0) and M_c f(0) from the engine, |f(0)| for the
/// truncated operators (their balls shrink to the origin).
double origin_value(const MaximalEngine& e, Operator op);

struct VariationRow {
  std::string profile_ref;
  Operator op = Operator::noncentered;
  int dimension = 0;
  std::size_t samples = 0;
  double norm_dmf = 0.0;         // finest grid, tail included
  double tail = 0.0;
  double norm_dmf_coarse = 0.0;  // half resolution, 0 when absent
  double relative_change = 0.0;  // |fine - coarse| / fine
  double refined = 0.0;          // second-order extrapolation from the two grids
  double norm_df = 0.0;
  double ratio = 0.0;
};

VariationRow variation_row(const RadialProfile& p, const MaximalField& fine,
                           const MaximalField* coarse, double origin);

/// Rows for the given operators on uniform grids of `samples` and `samples/2`
/// points over (0, 2 t_N].
std::vector<VariationRow> variation_report(const RadialProfile& p,
                                           std::span<const Operator> operators, int samples,
                                           const EngineOptions& opts = {});

/// The Fubini identity int (1/|x|) avg_{B(0,|x|)} |Df(y)||y| dy dx = n ||Df||_1.
struct FubiniCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double relative_gap() const;
};
FubiniCheck fubini_identity_check(const RadialProfile& p, const QuadratureOptions& quad = {});

/// One pointwise inequality lhs <= rhs + tol at a sample.
struct CheckRow {
  double s = 0.0;
  std::string check;
  double lhs = 0.0;
  double rhs = 0.0;
  double tol = 0.0;
  bool pass() const { return lhs <= rhs + tol; }
  double margin() const { return rhs + tol - lhs; }
};

/// Radially decreasing profiles: |DMf(s)| <= (2^n / s) avg_{B(0,s)} |Df||y|,
/// plus 0 in the closed argmax ball and the ball inside the closed B(0, s).
/// Centered differences are averages of the derivative over their stencil,
/// so the right-hand side is the largest bound on the stencil.
std::vector<CheckRow> decreasing_bound_rows(const RadialProfile& p, const MaximalField& m,
                                            const std::vector<DerivativeSample>& rows,
                                            const QuadratureOptions& quad = {});

/// |D f_{/4}(s)| <= (5/4) 2^n avg_{B(s e, s/2)} |D|f|| for s inside the support.
std::vector<CheckRow> endpoint_bound_rows(const RadialProfile& p, const MaximalField& f4,
                                          const QuadratureOptions& quad = {});

/// Components of {Mf > |f| + delta} as index runs; those touching the ends of
/// the grid are left out. Each must fall and then rise (no strict local
/// maximum) up to eta.
struct ComponentOutcome {
  std::size_t first = 0;
  std::size_t last = 0;
  std::size_t valley = 0;
  double violation = 0.0;
  bool pass = true;
};
std::vector<ComponentOutcome> strict_local_max_check(std::span<const double> s,
                                                     std::span<const double> values,
                                                     const RadialProfile& p,
                                                     double delta_rel = 1e-9,
                                                     double eta_rel = 1e-6);
std::vector<ComponentOutcome> strict_local_max_check(const MaximalField& f, const RadialProfile& p,
                                                     double delta_rel = 1e-9,
                                                     double eta_rel = 1e-6);

/// Argmax classes at samples with nonzero derivative and Mf > M^I f:
/// E+ (c > 5/4), E- (c < 3/4). Samples with Mf <= M^I f count as inner.
/// Rows assert c >= -1, |c - 1| > 1/4 and the two pointwise estimates
///   E+: |DMf| <= avg_B |D|f||,   E-: |DMf| <= (1/s) avg_B |D|f||(y)|y|.
struct ArgmaxClasses {
  std::size_t e_plus = 0;
  std::size_t e_minus = 0;
  std::size_t inner = 0;
  std::size_t middle = 0;  // 3/4 <= c <= 5/4: should not happen
  std::size_t unclassified = 0;
  std::vector<CheckRow> rows;
};
ArgmaxClasses classify_argmax(const RadialProfile& p, const MaximalField& m,
                              const MaximalField& mi, const std::vector<DerivativeSample>& rows,
                              const QuadratureOptions& quad = {});

/// f_{/4} field as a profile: |f(0)| at the origin, the samples, zero at the end.
RadialProfile endpoint_profile(const RadialProfile& p, const MaximalField& f4);

struct AnnulusBound {
  int k = 0;
  double a = 0.0;
  double b = 0.0;
  double lhs = 0.0;  // variation of M^I f over A(2^-k, 2^-k+1)
  double rhs = 0.0;  // 2^{3n} ||Dg|| over A(2^-k-1, 2^-k+2)
  bool pass() const { return lhs <= rhs * (1 + 1e-9) + 1e-14; }
};

/// ||DM^I f||_1 <= 3 2^{3n} ||Dg||_1 with g = max{f_{/4}, |f|}, overall and per
/// dyadic annulus with constant 2^{3n}.
struct ChainCheck {
  double norm_dmi = 0.0;
  double norm_dg = 0.0;
  double bound = 0.0;
  bool pass = false;
  std::vector<AnnulusBound> annuli;
  bool annuli_pass = false;
};
ChainCheck truncated_chain_check(const RadialProfile& p, const MaximalField& mi,
                                 const MaximalField& f4);

std::string check_rows_to_csv(const std::vector<CheckRow>& rows);

}  // namespace radmax
