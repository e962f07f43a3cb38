// radmax: command-line driver.
//
//   radmax eval           profile -> field CSV/JSON for one operator
//   radmax verify         the twelve acceptance criteria -> report.json/.csv
//   radmax report         corpus sweep -> tables and SVG plots
//   radmax explore-mtilde conditional operator ratio trends
//   radmax oracle         off-axis and n = 1 brute-force audits
//
// Exit codes: 0 success, 1 verification failed, 2 bad config or input file,
// 3 computation failure.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "radmax/acceptance.hpp"
#include "radmax/config.hpp"
#include "radmax/report.hpp"

using namespace radmax;

namespace {

struct Flags {
  std::string config;
  std::string profile;
  std::optional<int> dimension;
  std::optional<int> grid;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> workers;
  std::optional<std::string> op;
  bool quiet = false;
};

RunConfig build_config(const Flags& f) {
  RunConfig c = f.config.empty() ? RunConfig{} : load_config(f.config);
  if (f.dimension) c.dimensions = {*f.dimension};
  if (f.grid) {
    c.grid_sizes = {*f.grid / 4, *f.grid / 2, *f.grid};
    c.eval_grid = *f.grid;
  }
  if (f.seed) c.seed = *f.seed;
  if (f.out) c.output_dir = *f.out;
  if (f.op) c.operator_code = *f.op;
  if (!f.profile.empty()) c.profile = f.profile;
  if (f.workers) {
    c.workers = *f.workers;
  } else if (const char* env = std::getenv("RADMAX_WORKERS")) {
    try {
      c.workers = std::stoi(env);
    } catch (const std::exception&) {
      throw ConfigError(std::string("RADMAX_WORKERS is not an integer: ") + env);
    }
  }
  validate(c);
  return c;
}

ProgressFn progress_printer(bool quiet) {
  if (quiet) return {};
  const auto start = std::chrono::steady_clock::now();
  return [start](const std::string& msg) {
    const double t =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::fprintf(stderr, "[%8.1fs] %s\n", t, msg.c_str());
  };
}

void announce(const RunConfig& c, const std::vector<Artifact>& files) {
  for (const auto& a : files) std::cout << c.output_dir << '/' << a.name << '\n';
}

int run_eval(const RunConfig& c) {
  if (c.profile.empty()) throw ConfigError("eval needs a profile: --profile PATH or \"profile\" in the config");
  RadialProfile p = [&] {
    try {
      return load_profile(c.profile);
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  }();
  // An explicit dimension reinterprets the same profile in that dimension.
  if (c.dimensions.size() == 1 && c.dimensions[0] != p.dimension()) {
    p = RadialProfile(c.dimensions[0], std::vector<double>(p.grid().begin(), p.grid().end()),
                      std::vector<double>(p.values().begin(), p.values().end()));
  }
  const auto files = eval_artifacts(c, p, c.profile);
  write_artifacts(c.output_dir, files);
  announce(c, files);
  return 0;
}

int run_verify(const RunConfig& c, bool quiet) {
  const VerificationReport r = run_verification(c, progress_printer(quiet));
  const std::vector<Artifact> files{{"report.json", report_to_json(r)},
                                    {"report.csv", report_to_csv(r)}};
  write_artifacts(c.output_dir, files);
  std::cout << report_summary(r);
  announce(c, files);
  return r.all_pass() ? 0 : 1;
}

int run_report(const RunConfig& c, bool quiet) {
  const auto files = corpus_report(c, progress_printer(quiet));
  write_artifacts(c.output_dir, files);
  std::cout << files.size() << " files written to " << c.output_dir << '\n';
  return 0;
}

int run_explore(const RunConfig& c) {
  const auto files = explorer_report(c);
  write_artifacts(c.output_dir, files);
  std::cout << files[1].content;
  announce(c, files);
  return 0;
}

int run_oracle(const RunConfig& c, bool quiet) {
  bool pass = false;
  const auto files = oracle_report(c, pass, progress_printer(quiet));
  write_artifacts(c.output_dir, files);
  std::cout << (pass ? "oracle audits PASS\n" : "oracle audits FAIL\n");
  announce(c, files);
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical lab for maximal functions of radial profiles"};
  app.fallthrough();
  app.require_subcommand(1);
  Flags f;
  app.add_option("--config", f.config, "JSON run configuration");
  app.add_option("--dimension", f.dimension, "single dimension n (overrides the config)");
  app.add_option("--grid", f.grid, "finest grid N: derivative grids N/4, N/2, N and eval grid N");
  app.add_option("--seed", f.seed, "seed for every random choice");
  app.add_option("--out", f.out, "output directory");
  app.add_option("--workers", f.workers, "worker threads (default RADMAX_WORKERS, then all cores)");
  app.add_option("--operator", f.op, "operator for eval")
      ->check(CLI::IsMember({"m", "mc", "mi", "f4"}));
  app.add_flag("--quiet", f.quiet, "no progress on stderr");

  auto* eval = app.add_subcommand("eval", "field of one operator for a profile file");
  eval->add_option("--profile", f.profile, "profile file (.json or .csv)");
  auto* verify = app.add_subcommand("verify", "run the acceptance suite");
  auto* report = app.add_subcommand("report", "corpus sweep with plots");
  auto* explore = app.add_subcommand("explore-mtilde", "conditional operator trends");
  auto* oracle = app.add_subcommand("oracle", "brute-force audits");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  RunConfig c;
  try {
    c = build_config(f);
  } catch (const ConfigError& e) {
    std::cerr << "radmax: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*eval) return run_eval(c);
    if (*verify) return run_verify(c, f.quiet);
    if (*report) return run_report(c, f.quiet);
    if (*explore) return run_explore(c);
    if (*oracle) return run_oracle(c, f.quiet);
  } catch (const ConfigError& e) {
    std::cerr << "radmax: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "radmax: computation failed: " << e.what() << '\n';
    return 3;
  }
  return 3;
}
