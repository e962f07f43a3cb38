#pragma once

// Run configuration shared by every subcommand. Stored as JSON; unknown keys
// are rejected so that a typo cannot silently fall back to a default.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "radmax/corpus.hpp"

namespace radmax {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Tolerances {
  double volume_rel = 1e-8;
  double offaxis_abs = 1e-6;
  double line_sup = 1e-6;
  double line_variation_rel = 1e-3;
  double residual_rel = 1e-6;
  double fd_median_rel = 1e-3;
  double boundary_abs = 1e-6;
  double perturbation_rel = 1e-5;
  double fubini_rel = 1e-4;
  double origin_abs = 1e-8;
  double refinement_rel = 1e-2;
  double ratio_ceiling = 1e4;
  double contact_delta_rel = 1e-9;
  double component_eta_rel = 1e-6;
  double class_margin = 1e-6;
  double domination_abs = 1e-8;
  double witness_moment_rel = 1e-10;
  double dilation_rel = 1e-6;
};

struct OracleOptions {
  int volume_trials = 200;
  int offaxis_profiles = 20;
  int offaxis_points = 10;
  int offaxis_samples = 10000;
  int line_grid = 256;
  int line_scan_points = 4000;
};

struct PerturbationOptions {
  int profiles = 10;
  int balls = 5;
};

struct ExplorerConfig {
  int fields = 20;
  int knots = 8;
  int samples = 64;
  int ratio_levels = 4;
  int ratio_samples = 201;
  std::vector<double> dilations{0.5, 2.0};
};

struct RunConfig {
  std::vector<int> dimensions{2, 3};
  /// Field resolutions for the derivative suite; the last one is used for
  /// every other field-based check.
  std::vector<int> grid_sizes{256, 512, 1024};
  std::uint64_t seed = 1;
  /// Execution only: neither enters the hash nor changes any result.
  int workers = 0;
  std::string output_dir = "out";
  // eval
  std::string operator_code = "m";
  std::string profile;
  int eval_grid = 256;
  // corpus
  int corpus_resolution = 48;
  std::vector<FamilySpec> families = default_families();
  Tolerances tol;
  OracleOptions oracle;
  PerturbationOptions perturbation;
  ExplorerConfig explorer;
  /// Re-run a reduced suite with two worker counts and compare the bytes.
  bool determinism_check = true;

  int finest_grid() const { return grid_sizes.back(); }
};

/// Throws ConfigError on malformed JSON, unknown keys or invalid values.
RunConfig config_from_json(const std::string& text);
RunConfig load_config(const std::string& path);
/// Canonical JSON with every field spelled out.
std::string config_to_json(const RunConfig& c);
/// Same without workers and output_dir: what reports embed and what is hashed.
std::string config_result_json(const RunConfig& c);
/// FNV-1a 64 of the canonical JSON without the execution-only fields, as 16
/// hex digits.
std::string config_hash(const RunConfig& c);
void validate(const RunConfig& c);

}  // namespace radmax
