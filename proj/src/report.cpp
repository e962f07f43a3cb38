#include "radmax/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "radmax/corpus.hpp"
#include "radmax/derivative.hpp"
#include "radmax/explorer.hpp"
#include "radmax/maximal.hpp"
#include "radmax/parallel.hpp"
#include "radmax/variation.hpp"

namespace radmax {

using Json = nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
  if (!std::isfinite(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string hash_line(const std::string& hash) { return "# config_hash=" + hash + "\n"; }

std::vector<CorpusItem> corpus_items(const RunConfig& c) {
  std::vector<CorpusItem> items;
  for (int n : c.dimensions) {
    CorpusSpec spec;
    spec.dimension = n;
    spec.families = c.families;
    spec.resolution = c.corpus_resolution;
    spec.seed = c.seed;
    for (auto& it : corpus_generate(spec)) items.push_back(std::move(it));
  }
  return items;
}

EngineOptions single_worker() {
  EngineOptions eo;
  eo.workers = 1;
  return eo;
}

struct ItemSweep {
  std::vector<Artifact> files;
  Json summary;
  std::string csv_row;
};

ItemSweep sweep_item(const RunConfig& c, const CorpusItem& item, const std::string& hash) {
  const RadialProfile& p = item.profile;
  const int n = p.dimension();
  const MaximalEngine e(p, single_worker());
  const auto grid = uniform_grid(2.0 * p.support_end(), c.eval_grid);
  const MaximalField m = e.field(grid, Operator::noncentered, item.id);
  const MaximalField mi = e.field(grid, Operator::inner, item.id);
  const MaximalField f4 = e.field(grid, Operator::endpoint, item.id);
  const auto rows = finite_difference_field(p, m);

  std::ostringstream csv;
  csv << hash_line(hash) << "s,f,Mf,MIf,f4,dMf_fd,dMf_formula,ball\n";
  std::vector<double> fv(grid.size()), formula(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    fv[i] = evaluate(p, grid[i]);
    const bool has = rows[i].classification != BallClass::skipped;
    formula[i] = has ? rows[i].formula_derivative : kNaN;
    csv << num(grid[i]) << ',' << num(fv[i]) << ',' << num(m.samples[i].value) << ','
        << num(mi.samples[i].value) << ',' << num(f4.samples[i].value) << ','
        << num(rows[i].fd_derivative) << ',' << num(formula[i]) << ','
        << ball_class_name(rows[i].classification) << '\n';
  }

  ItemSweep out;
  out.files.push_back({item.id + ".csv", csv.str()});
  PlotSpec fields{item.id + ": f and its maximal fields", "s", "value", hash,
                  {{"f", grid, fv},
                   {"Mf", grid, m.values()},
                   {"M^I f", grid, mi.values()},
                   {"f_/4", grid, f4.values()}}};
  out.files.push_back({item.id + "_fields.svg", svg_line_plot(fields)});
  std::vector<double> fd(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) fd[i] = rows[i].fd_derivative;
  PlotSpec deriv{item.id + ": derivative of Mf", "s", "DMf", hash,
                 {{"finite difference", grid, fd}, {"argmax-ball formula", grid, formula}}};
  out.files.push_back({item.id + "_derivative.svg", svg_line_plot(deriv)});

  const VariationRow vm = variation_row(p, m, nullptr, origin_value(e, Operator::noncentered));
  const VariationRow vi = variation_row(p, mi, nullptr, origin_value(e, Operator::inner));
  out.summary = {{"id", item.id},
                 {"family", item.family},
                 {"dimension", n},
                 {"radially_decreasing", item.radially_decreasing},
                 {"samples", grid.size()},
                 {"norm_df", vm.norm_df},
                 {"norm_dmf", vm.norm_dmf},
                 {"ratio_m", vm.ratio},
                 {"norm_dmif", vi.norm_dmf},
                 {"ratio_mi", vi.ratio}};
  out.csv_row = item.id + ',' + item.family + ',' + std::to_string(n) + ',' + num(vm.norm_df) +
                ',' + num(vm.norm_dmf) + ',' + num(vm.ratio) + ',' + num(vi.norm_dmf) + ',' +
                num(vi.ratio) + '\n';
  return out;
}

}  // namespace

std::string svg_line_plot(const PlotSpec& spec) {
  constexpr double W = 720, H = 440, left = 70, right = 170, top = 40, bottom = 50;
  const double pw = W - left - right, ph = H - top - bottom;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : spec.series)
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  if (!(x1 >= x0)) x0 = 0.0, x1 = 1.0;
  if (!(y1 >= y0)) y0 = 0.0, y1 = 1.0;
  if (x1 == x0) x1 = x0 + 1.0;
  if (y1 == y0) {
    const double pad = std::max(std::abs(y0), 1.0) * 0.5;
    y0 -= pad;
    y1 += pad;
  }
  const double ypad = 0.05 * (y1 - y0);
  y0 -= ypad;
  y1 += ypad;
  auto px = [&](double x) { return left + pw * (x - x0) / (x1 - x0); };
  auto py = [&](double y) { return top + ph * (1.0 - (y - y0) / (y1 - y0)); };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" viewBox=\"0 0 " << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<!-- config_hash=" << spec.config_hash << " -->\n";
  os << "<metadata>config_hash=" << spec.config_hash << "</metadata>\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << fixed(W / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
     << escape(spec.title) << "</text>\n";
  os << "<rect x=\"" << fixed(left) << "\" y=\"" << fixed(top) << "\" width=\"" << fixed(pw)
     << "\" height=\"" << fixed(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double xv = x0 + (x1 - x0) * k / 5.0, yv = y0 + (y1 - y0) * k / 5.0;
    os << "<line x1=\"" << fixed(px(xv)) << "\" y1=\"" << fixed(top + ph) << "\" x2=\""
       << fixed(px(xv)) << "\" y2=\"" << fixed(top + ph + 5) << "\" stroke=\"black\"/>"
       << "<text x=\"" << fixed(px(xv)) << "\" y=\"" << fixed(top + ph + 18)
       << "\" text-anchor=\"middle\">" << tick(xv) << "</text>\n";
    os << "<line x1=\"" << fixed(left - 5) << "\" y1=\"" << fixed(py(yv)) << "\" x2=\""
       << fixed(left) << "\" y2=\"" << fixed(py(yv)) << "\" stroke=\"black\"/>"
       << "<text x=\"" << fixed(left - 8) << "\" y=\"" << fixed(py(yv) + 4)
       << "\" text-anchor=\"end\">" << tick(yv) << "</text>\n";
  }
  if (y0 < 0.0 && y1 > 0.0)
    os << "<line x1=\"" << fixed(left) << "\" y1=\"" << fixed(py(0.0)) << "\" x2=\""
       << fixed(left + pw) << "\" y2=\"" << fixed(py(0.0))
       << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 3\"/>\n";
  os << "<text x=\"" << fixed(left + pw / 2) << "\" y=\"" << fixed(H - 10)
     << "\" text-anchor=\"middle\">" << escape(spec.x_label) << "</text>\n";
  os << "<text x=\"16\" y=\"" << fixed(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << fixed(top + ph / 2) << ")\">" << escape(spec.y_label) << "</text>\n";

  for (std::size_t k = 0; k < spec.series.size(); ++k) {
    const Series& s = spec.series[k];
    const char* color = palette[k % std::size(palette)];
    std::string pts;
    auto flush = [&] {
      if (!pts.empty())
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\""
           << pts << "\"/>\n";
      pts.clear();
    };
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
        flush();
        continue;
      }
      if (!pts.empty()) pts += ' ';
      pts += fixed(px(s.x[i])) + ',' + fixed(py(s.y[i]));
    }
    flush();
    const double ly = top + 14 + 18 * static_cast<double>(k);
    os << "<line x1=\"" << fixed(left + pw + 12) << "\" y1=\"" << fixed(ly - 4) << "\" x2=\""
       << fixed(left + pw + 32) << "\" y2=\"" << fixed(ly - 4) << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/><text x=\"" << fixed(left + pw + 38) << "\" y=\"" << fixed(ly)
       << "\">" << escape(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::vector<Artifact> eval_artifacts(const RunConfig& c, const RadialProfile& p,
                                     const std::string& profile_ref) {
  const std::string hash = config_hash(c);
  const Operator op = parse_operator(c.operator_code);
  EngineOptions eo;
  eo.workers = c.workers;
  const MaximalEngine e(p, eo);
  const auto grid = uniform_grid(2.0 * p.support_end(), c.eval_grid);
  const MaximalField f = e.field(grid, op, profile_ref);

  std::string table = field_to_csv(f);
  const std::size_t header_end = table.find('\n') + 1;
  std::string csv = hash_line(hash) + table.substr(0, header_end);
  // The truncated operators shrink to the point at s = 0, so only m and mc
  // have a value there.
  if (op == Operator::noncentered || op == Operator::centered)
    csv += "0," + num(value_at_origin(p, op, eo)) + ",0,,,0\n";
  csv += table.substr(header_end);

  const std::string stem = "eval_" + std::string(operator_code(op));
  return {{stem + ".csv", csv}, {stem + ".json", field_to_json(f, hash)}};
}

std::vector<Artifact> corpus_report(const RunConfig& c, const ProgressFn& progress) {
  const std::string hash = config_hash(c);
  const auto items = corpus_items(c);
  std::vector<ItemSweep> sweeps(items.size());
  parallel_for(items.size(), resolve_workers(c.workers), [&](std::size_t i) {
    sweeps[i] = sweep_item(c, items[i], hash);
    if (progress) progress("report item " + items[i].id + " done");
  });

  std::vector<Artifact> out;
  Json summary;
  summary["config_hash"] = hash;
  summary["config"] = Json::parse(config_result_json(c));
  Json arr = Json::array();
  std::string csv = hash_line(hash) + "id,family,dimension,norm_df,norm_dmf,ratio_m,norm_dmif,ratio_mi\n";
  for (auto& sw : sweeps) {
    for (auto& f : sw.files) out.push_back(std::move(f));
    arr.push_back(std::move(sw.summary));
    csv += sw.csv_row;
  }
  summary["items"] = std::move(arr);
  out.push_back({"summary.json", summary.dump(2) + "\n"});
  out.push_back({"summary.csv", csv});
  return out;
}

std::vector<Artifact> explorer_report(const RunConfig& c) {
  const std::string hash = config_hash(c);
  const std::vector<LineFamily> families{LineFamily::scaled_bump, LineFamily::dyadic_comb,
                                         LineFamily::modulated_packet};
  const auto trends = ratio_scan(families, c.explorer.ratio_levels, c.explorer.ratio_samples);

  Json j;
  j["config_hash"] = hash;
  j["config"] = Json::parse(config_result_json(c));
  j["convention"] = "points admitting no zero-moment interval get the value 0";
  Json arr = Json::array();
  PlotSpec plot{"ratio ||M~F||_1 / ||F||_1 by level", "level", "ratio", hash, {}};
  for (const auto& t : trends) {
    Json pts = Json::array();
    Series s{t.family, {}, {}};
    for (const auto& p : t.points) {
      pts.push_back({{"level", p.level},
                     {"norm_mtilde", p.norm_mtilde},
                     {"norm_f", p.norm_f},
                     {"ratio", p.ratio}});
      s.x.push_back(p.level);
      s.y.push_back(p.ratio);
    }
    arr.push_back({{"family", t.family}, {"growing", t.growing}, {"points", pts}});
    plot.series.push_back(std::move(s));
  }
  j["trends"] = std::move(arr);
  return {{"mtilde_trends.json", j.dump(2) + "\n"},
          {"mtilde_trends.csv", hash_line(hash) + ratio_trends_to_csv(trends)},
          {"mtilde_trends.svg", svg_line_plot(plot)}};
}

std::vector<Artifact> oracle_report(const RunConfig& c, bool& pass, const ProgressFn& progress) {
  const std::string hash = config_hash(c);
  struct Row {
    std::string item;
    int dimension;
    std::string metric;
    double value;
    double limit;
  };

  // Off-axis: random balls never beat the axis optimum.
  const auto items = corpus_items(c);
  const std::size_t offaxis_count =
      std::min<std::size_t>(items.size(), static_cast<std::size_t>(c.oracle.offaxis_profiles));
  std::vector<Row> off(offaxis_count);
  parallel_for(offaxis_count, resolve_workers(c.workers), [&](std::size_t i) {
    const RadialProfile& p = items[i].profile;
    const MaximalEngine e(p, single_worker());
    const double tn = p.support_end();
    const int P = c.oracle.offaxis_points;
    double worst = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < P; ++j) {
      const double s = 1.5 * tn * (j + 0.5) / P;
      const double axis = e.evaluate(s, Operator::noncentered).value;
      const std::uint64_t seed = c.seed * 1000003ull + i * 1000 + static_cast<std::uint64_t>(j);
      worst = std::max(worst, brute_force_offaxis(p, s, c.oracle.offaxis_samples, seed) - axis);
    }
    off[i] = {items[i].id, p.dimension(), "offaxis_excess", worst, c.tol.offaxis_abs};
    if (progress) progress("oracle off-axis " + items[i].id + " done");
  });

  // n = 1: the engine against the direct interval search.
  CorpusSpec line;
  line.dimension = 1;
  line.families = c.families;
  line.resolution = c.corpus_resolution;
  line.seed = c.seed;
  const auto lines = corpus_generate(line);
  std::vector<Row> gaps(lines.size());
  parallel_for(lines.size(), resolve_workers(c.workers), [&](std::size_t i) {
    const RadialProfile& p = lines[i].profile;
    const MaximalEngine e(p, single_worker());
    const auto f = e.field(uniform_grid(2.0 * p.support_end(), c.oracle.line_grid),
                           Operator::noncentered, lines[i].id);
    double gap = 0.0;
    for (const auto& smp : f.samples)
      gap = std::max(gap, std::abs(smp.value -
                                   interval_maximal_1d(p, smp.s, c.oracle.line_scan_points)));
    gaps[i] = {lines[i].id, 1, "sup_gap", gap, c.tol.line_sup};
    if (progress) progress("oracle line " + lines[i].id + " done");
  });

  pass = true;
  std::string csv = hash_line(hash) + "audit,item,dimension,metric,value,limit,pass\n";
  Json arr = Json::array();
  auto emit = [&](const char* audit, const std::vector<Row>& rows) {
    for (const auto& r : rows) {
      const bool ok = r.value <= r.limit;
      pass = pass && ok;
      csv += std::string(audit) + ',' + r.item + ',' + std::to_string(r.dimension) + ',' +
             r.metric + ',' + num(r.value) + ',' + num(r.limit) + ',' + (ok ? "true" : "false") +
             '\n';
      arr.push_back({{"audit", audit},
                     {"item", r.item},
                     {"dimension", r.dimension},
                     {"metric", r.metric},
                     {"value", r.value},
                     {"limit", r.limit},
                     {"pass", ok}});
    }
  };
  emit("offaxis", off);
  emit("line", gaps);
  Json j;
  j["config_hash"] = hash;
  j["config"] = Json::parse(config_result_json(c));
  j["pass"] = pass;
  j["rows"] = std::move(arr);
  return {{"oracle.json", j.dump(2) + "\n"}, {"oracle.csv", csv}};
}

void write_artifacts(const std::string& dir, const std::vector<Artifact>& artifacts) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  for (const auto& a : artifacts) {
    const fs::path path = fs::path(dir) / a.name;
    std::ofstream out(path, std::ios::binary);
    out << a.content;
    if (!out) throw std::runtime_error("cannot write " + path.string());
  }
}

}  // namespace radmax
