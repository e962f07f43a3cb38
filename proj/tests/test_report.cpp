#include <doctest.h>

#include <cmath>
#include <limits>

#include "radmax/report.hpp"

using namespace radmax;

namespace {

std::size_t count(const std::string& s, const std::string& what) {
  std::size_t n = 0;
  for (auto p = s.find(what); p != std::string::npos; p = s.find(what, p + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("svg plot: hash, series, gaps") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  PlotSpec spec{"a <title>", "s", "y", "00ff", {{"one", {0, 1, 2, 3}, {0, 1, nan, 2}}, {"two", {0, 3}, {1, 1}}}};
  const std::string svg = svg_line_plot(spec);
  CHECK(svg.find("config_hash=00ff") != std::string::npos);
  CHECK(svg.find("a &lt;title&gt;") != std::string::npos);
  CHECK(count(svg, "<polyline") == 3);  // "one" is split at the NaN
  CHECK(svg == svg_line_plot(spec));
  CHECK(svg.find("nan") == std::string::npos);

  PlotSpec empty{"empty", "x", "y", "h", {}};
  CHECK(svg_line_plot(empty).find("</svg>") != std::string::npos);
}

TEST_CASE("eval artifacts carry the hash and the value at the origin") {
  RunConfig c;
  c.eval_grid = 16;
  c.workers = 1;
  const RadialProfile tent(2, {0.0, 1.0}, {1.0, 0.0});
  const auto files = eval_artifacts(c, tent, "tent");
  REQUIRE(files.size() == 2);
  const std::string& csv = files[0].content;
  CHECK(csv.rfind("# config_hash=" + config_hash(c) + "\n", 0) == 0);
  CHECK(csv.find("\n0,1,") != std::string::npos);
  CHECK(files[1].content.find(config_hash(c)) != std::string::npos);

  c.operator_code = "mi";
  const auto inner = eval_artifacts(c, tent, "tent");
  CHECK(inner[0].content.find("\n0,") == std::string::npos);
}

TEST_CASE("explorer report is deterministic") {
  RunConfig c;
  c.explorer.ratio_levels = 2;
  c.explorer.ratio_samples = 11;
  const auto a = explorer_report(c), b = explorer_report(c);
  REQUIRE(a.size() == 3);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].content == b[i].content);
  CHECK(a[1].content.rfind("# config_hash=", 0) == 0);
}
