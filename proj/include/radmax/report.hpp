#pragma once

// Artifacts written by the command-line subcommands: field tables, corpus
// sweeps with SVG line plots, explorer trends and oracle audits. Everything
// is returned as (file name, contents) so that callers decide where it goes.
// Every artifact carries the config hash and nothing else that varies
// between runs.

#include <string>
#include <vector>

#include "radmax/acceptance.hpp"
#include "radmax/config.hpp"
#include "radmax/profile.hpp"

namespace radmax {

struct Artifact {
  std::string name;
  std::string content;
};

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;  // non-finite values break the line
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::string config_hash;
  std::vector<Series> series;
};

std::string svg_line_plot(const PlotSpec& spec);

/// Field of the configured operator on eval_grid points over (0, 2 t_N], as
/// CSV (with the value at s = 0 for m and mc) and JSON.
std::vector<Artifact> eval_artifacts(const RunConfig& c, const RadialProfile& p,
                                     const std::string& profile_ref);

/// Corpus sweep at eval_grid resolution: per item a CSV table and two plots
/// (fields, derivative overlay), plus summary.json and summary.csv.
std::vector<Artifact> corpus_report(const RunConfig& c, const ProgressFn& progress = {});

/// Ratio trends of the conditional operator over the parametric line families.
std::vector<Artifact> explorer_report(const RunConfig& c);

/// Off-axis and one-dimensional brute-force audits. `pass` reports whether
/// every asserted row holds.
std::vector<Artifact> oracle_report(const RunConfig& c, bool& pass,
                                    const ProgressFn& progress = {});

/// Creates the directory if needed and writes every artifact into it.
void write_artifacts(const std::string& dir, const std::vector<Artifact>& artifacts);

}  // namespace radmax
