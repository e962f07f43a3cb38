#pragma once

// The acceptance suite: twelve properties checked on the seeded corpus, each
// reduced to rows "value <= limit" that end up in the verification report.

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "radmax/config.hpp"
#include "radmax/explorer.hpp"
#include "radmax/variation.hpp"

namespace radmax {

struct VerificationRow {
  int criterion = 0;
  std::string item;
  int dimension = 0;
  std::string metric;
  double value = 0.0;
  /// +infinity marks a measurement that is recorded but not asserted.
  double limit = std::numeric_limits<double>::infinity();
  bool pass() const { return value <= limit; }
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::size_t rows = 0;
  std::size_t failures = 0;
  /// Asserted row with the smallest margin (value / limit closest to or above 1).
  std::string worst;
};

struct ClassCounts {
  std::string item;
  int dimension = 0;
  std::size_t e_plus = 0;
  std::size_t e_minus = 0;
  std::size_t inner = 0;
  std::size_t middle = 0;
  std::size_t unclassified = 0;
};

struct VerificationReport {
  std::string config_hash;
  std::string config_json;  // without execution-only fields
  std::vector<CriterionResult> criteria;
  std::vector<VerificationRow> rows;
  std::vector<VariationRow> variation;
  std::vector<ClassCounts> classes;
  std::vector<RatioTrend> explorer_trends;
  /// Largest lhs / rhs seen per inequality.
  std::vector<std::pair<std::string, double>> constants;

  bool all_pass() const;
};

using ProgressFn = std::function<void(const std::string&)>;

std::string criterion_name(int id);

/// Runs every criterion. Criterion 12 repeats a reduced copy of the suite
/// with two worker counts and compares the serialized reports.
VerificationReport run_verification(const RunConfig& config, const ProgressFn& progress = {});

std::string report_to_json(const VerificationReport& r);
std::string report_to_csv(const VerificationReport& r);
/// One line per criterion: "criterion  4 PASS  name  (worst ...)".
std::string report_summary(const VerificationReport& r);

/// The configuration used for the determinism re-runs.
RunConfig reduced_config(const RunConfig& c);

}  // namespace radmax
