#include "radmax/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace radmax {

using Json = nlohmann::ordered_json;

namespace {

// Reads the members of one JSON object and complains about any left over.
class Reader {
 public:
  Reader(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
  }

  const Json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError(where_ + ": unknown key '" + k + "'");
  }

 private:
  const Json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

Json family_to_json(const FamilySpec& f) {
  Json j;
  j["family"] = family_name(f);
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, DecreasingTent>) {
          j["height"] = v.height;
          j["radius"] = v.radius;
        } else if constexpr (std::is_same_v<T, DecreasingExponential>) {
          j["scale"] = v.scale;
          j["radius"] = v.radius;
        } else if constexpr (std::is_same_v<T, AnnularBump>) {
          j["center"] = v.center;
          j["width"] = v.width;
          j["height"] = v.height;
        } else if constexpr (std::is_same_v<T, MultiBump>) {
          j["count"] = v.count;
          j["seed"] = v.seed;
        } else if constexpr (std::is_same_v<T, Oscillating>) {
          j["frequency"] = v.frequency;
          j["damping"] = v.damping;
          j["radius"] = v.radius;
        } else {
          j["distance"] = v.distance;
          j["width"] = v.width;
          j["height"] = v.height;
        }
      },
      f);
  return j;
}

FamilySpec family_from_json(const Json& j, const std::string& where) {
  Reader r(j, where);
  std::string name;
  r.get("family", name);
  FamilySpec out;
  if (name == "decreasing_tent") {
    DecreasingTent v;
    r.get("height", v.height);
    r.get("radius", v.radius);
    out = v;
  } else if (name == "decreasing_exp") {
    DecreasingExponential v;
    r.get("scale", v.scale);
    r.get("radius", v.radius);
    out = v;
  } else if (name == "annular_bump") {
    AnnularBump v;
    r.get("center", v.center);
    r.get("width", v.width);
    r.get("height", v.height);
    out = v;
  } else if (name == "multi_bump") {
    MultiBump v;
    r.get("count", v.count);
    r.get("seed", v.seed);
    out = v;
  } else if (name == "oscillating") {
    Oscillating v;
    r.get("frequency", v.frequency);
    r.get("damping", v.damping);
    r.get("radius", v.radius);
    out = v;
  } else if (name == "far_thin_bump") {
    FarThinBump v;
    r.get("distance", v.distance);
    r.get("width", v.width);
    r.get("height", v.height);
    out = v;
  } else {
    throw ConfigError(where + ": unknown family '" + name + "'");
  }
  r.finish();
  return out;
}

Json tolerances_to_json(const Tolerances& t) {
  return Json{{"volume_rel", t.volume_rel},
              {"offaxis_abs", t.offaxis_abs},
              {"line_sup", t.line_sup},
              {"line_variation_rel", t.line_variation_rel},
              {"residual_rel", t.residual_rel},
              {"fd_median_rel", t.fd_median_rel},
              {"boundary_abs", t.boundary_abs},
              {"perturbation_rel", t.perturbation_rel},
              {"fubini_rel", t.fubini_rel},
              {"origin_abs", t.origin_abs},
              {"refinement_rel", t.refinement_rel},
              {"ratio_ceiling", t.ratio_ceiling},
              {"contact_delta_rel", t.contact_delta_rel},
              {"component_eta_rel", t.component_eta_rel},
              {"class_margin", t.class_margin},
              {"domination_abs", t.domination_abs},
              {"witness_moment_rel", t.witness_moment_rel},
              {"dilation_rel", t.dilation_rel}};
}

Json to_json_object(const RunConfig& c, bool with_execution) {
  Json j;
  j["dimensions"] = c.dimensions;
  j["grid_sizes"] = c.grid_sizes;
  j["seed"] = c.seed;
  if (with_execution) {
    j["workers"] = c.workers;
    j["output_dir"] = c.output_dir;
  }
  j["operator"] = c.operator_code;
  j["profile"] = c.profile;
  j["eval_grid"] = c.eval_grid;
  Json fams = Json::array();
  for (const auto& f : c.families) fams.push_back(family_to_json(f));
  j["corpus"] = Json{{"resolution", c.corpus_resolution}, {"families", fams}};
  j["tolerances"] = tolerances_to_json(c.tol);
  j["oracle"] = Json{{"volume_trials", c.oracle.volume_trials},
                     {"offaxis_profiles", c.oracle.offaxis_profiles},
                     {"offaxis_points", c.oracle.offaxis_points},
                     {"offaxis_samples", c.oracle.offaxis_samples},
                     {"line_grid", c.oracle.line_grid},
                     {"line_scan_points", c.oracle.line_scan_points}};
  j["perturbation"] = Json{{"profiles", c.perturbation.profiles}, {"balls", c.perturbation.balls}};
  j["explorer"] = Json{{"fields", c.explorer.fields},
                       {"knots", c.explorer.knots},
                       {"samples", c.explorer.samples},
                       {"ratio_levels", c.explorer.ratio_levels},
                       {"ratio_samples", c.explorer.ratio_samples},
                       {"dilations", c.explorer.dilations}};
  j["determinism_check"] = c.determinism_check;
  return j;
}

}  // namespace

void validate(const RunConfig& c) {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("invalid config: " + what);
  };
  need(!c.dimensions.empty(), "dimensions must not be empty");
  for (int n : c.dimensions) need(n >= 1 && n <= 8, "dimension out of range [1, 8]");
  need(!c.grid_sizes.empty(), "grid_sizes must not be empty");
  for (std::size_t i = 0; i < c.grid_sizes.size(); ++i) {
    need(c.grid_sizes[i] >= 8, "grid sizes must be at least 8");
    need(i == 0 || c.grid_sizes[i] > c.grid_sizes[i - 1], "grid sizes must increase");
  }
  need(c.workers >= 0, "workers must be >= 0");
  need(c.eval_grid >= 2, "eval_grid must be at least 2");
  need(c.corpus_resolution >= 8, "corpus resolution must be at least 8");
  need(c.operator_code == "m" || c.operator_code == "mc" || c.operator_code == "mi" ||
           c.operator_code == "f4",
       "operator must be one of m, mc, mi, f4");
  need(c.oracle.volume_trials >= 0 && c.oracle.offaxis_profiles >= 0 &&
           c.oracle.offaxis_points >= 1 && c.oracle.offaxis_samples >= 1,
       "oracle counts must be positive");
  need(c.oracle.line_grid >= 8 && c.oracle.line_scan_points >= 100, "oracle line sizes too small");
  need(c.perturbation.profiles >= 0 && c.perturbation.balls >= 1, "perturbation counts");
  need(c.explorer.fields >= 0 && c.explorer.knots >= 3 && c.explorer.samples >= 3 &&
           c.explorer.ratio_levels >= 1 && c.explorer.ratio_samples >= 3,
       "explorer sizes");
  for (double l : c.explorer.dilations) need(l > 0.0, "dilations must be positive");
}

RunConfig config_from_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config JSON: ") + e.what());
  }
  RunConfig c;
  Reader r(j, "config");
  r.get("dimensions", c.dimensions);
  r.get("grid_sizes", c.grid_sizes);
  r.get("seed", c.seed);
  r.get("workers", c.workers);
  r.get("output_dir", c.output_dir);
  r.get("operator", c.operator_code);
  r.get("profile", c.profile);
  r.get("eval_grid", c.eval_grid);
  if (const Json* corpus = r.child("corpus")) {
    Reader cr(*corpus, "config.corpus");
    cr.get("resolution", c.corpus_resolution);
    if (const Json* fams = cr.child("families")) {
      if (!fams->is_array()) throw ConfigError("config.corpus.families: expected an array");
      c.families.clear();
      for (std::size_t i = 0; i < fams->size(); ++i)
        c.families.push_back(
            family_from_json((*fams)[i], "config.corpus.families[" + std::to_string(i) + "]"));
    }
    cr.finish();
  }
  if (const Json* t = r.child("tolerances")) {
    Reader tr(*t, "config.tolerances");
    tr.get("volume_rel", c.tol.volume_rel);
    tr.get("offaxis_abs", c.tol.offaxis_abs);
    tr.get("line_sup", c.tol.line_sup);
    tr.get("line_variation_rel", c.tol.line_variation_rel);
    tr.get("residual_rel", c.tol.residual_rel);
    tr.get("fd_median_rel", c.tol.fd_median_rel);
    tr.get("boundary_abs", c.tol.boundary_abs);
    tr.get("perturbation_rel", c.tol.perturbation_rel);
    tr.get("fubini_rel", c.tol.fubini_rel);
    tr.get("origin_abs", c.tol.origin_abs);
    tr.get("refinement_rel", c.tol.refinement_rel);
    tr.get("ratio_ceiling", c.tol.ratio_ceiling);
    tr.get("contact_delta_rel", c.tol.contact_delta_rel);
    tr.get("component_eta_rel", c.tol.component_eta_rel);
    tr.get("class_margin", c.tol.class_margin);
    tr.get("domination_abs", c.tol.domination_abs);
    tr.get("witness_moment_rel", c.tol.witness_moment_rel);
    tr.get("dilation_rel", c.tol.dilation_rel);
    tr.finish();
  }
  if (const Json* o = r.child("oracle")) {
    Reader orr(*o, "config.oracle");
    orr.get("volume_trials", c.oracle.volume_trials);
    orr.get("offaxis_profiles", c.oracle.offaxis_profiles);
    orr.get("offaxis_points", c.oracle.offaxis_points);
    orr.get("offaxis_samples", c.oracle.offaxis_samples);
    orr.get("line_grid", c.oracle.line_grid);
    orr.get("line_scan_points", c.oracle.line_scan_points);
    orr.finish();
  }
  if (const Json* p = r.child("perturbation")) {
    Reader pr(*p, "config.perturbation");
    pr.get("profiles", c.perturbation.profiles);
    pr.get("balls", c.perturbation.balls);
    pr.finish();
  }
  if (const Json* e = r.child("explorer")) {
    Reader er(*e, "config.explorer");
    er.get("fields", c.explorer.fields);
    er.get("knots", c.explorer.knots);
    er.get("samples", c.explorer.samples);
    er.get("ratio_levels", c.explorer.ratio_levels);
    er.get("ratio_samples", c.explorer.ratio_samples);
    er.get("dilations", c.explorer.dilations);
    er.finish();
  }
  r.get("determinism_check", c.determinism_check);
  r.finish();
  validate(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return config_from_json(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string config_to_json(const RunConfig& c) { return to_json_object(c, true).dump(2) + "\n"; }

std::string config_result_json(const RunConfig& c) { return to_json_object(c, false).dump(); }

std::string config_hash(const RunConfig& c) {
  const std::string text = config_result_json(c);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace radmax
