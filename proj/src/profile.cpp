#include "radmax/profile.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace radmax {

namespace {

// int_l^u (alpha + beta t) t^m dt
double linear_moment(double alpha, double beta, int m, double l, double u) {
  const double m1 = m + 1.0;
  const double m2 = m + 2.0;
  return alpha * (std::pow(u, m1) - std::pow(l, m1)) / m1 +
         beta * (std::pow(u, m2) - std::pow(l, m2)) / m2;
}

// int_l^u |alpha + beta t| t^m dt, split at the sign change.
double abs_linear_moment(double alpha, double beta, int m, double l, double u) {
  if (u <= l) return 0.0;
  if (beta != 0.0) {
    const double root = -alpha / beta;
    if (root > l && root < u) {
      return std::abs(linear_moment(alpha, beta, m, l, root)) +
             std::abs(linear_moment(alpha, beta, m, root, u));
    }
  }
  return std::abs(linear_moment(alpha, beta, m, l, u));
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double unit_sphere_measure(int k) {
  if (k < 0) throw std::invalid_argument("unit_sphere_measure: negative dimension");
  const double h = 0.5 * (k + 1);
  return 2.0 * std::pow(std::numbers::pi, h) / std::tgamma(h);
}

AnnulusRange::AnnulusRange(double inner, double outer) : a(inner), b(outer) {
  if (!(inner >= 0.0) || !(outer >= inner))
    throw std::invalid_argument("AnnulusRange: need 0 <= a <= b");
}

RadialProfile::RadialProfile(int dimension, std::vector<double> grid, std::vector<double> values)
    : dimension_(dimension), grid_(std::move(grid)), values_(std::move(values)) {
  if (dimension_ < 1) throw std::invalid_argument("RadialProfile: dimension must be >= 1");
  if (grid_.size() < 2) throw std::invalid_argument("RadialProfile: need at least 2 knots");
  if (grid_.size() != values_.size())
    throw std::invalid_argument("RadialProfile: grid and values differ in length");
  if (!(grid_.front() >= 0.0)) throw std::invalid_argument("RadialProfile: negative radius");
  for (std::size_t i = 0; i + 1 < grid_.size(); ++i) {
    if (!(grid_[i + 1] > grid_[i]))
      throw std::invalid_argument("RadialProfile: grid must be strictly increasing");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("RadialProfile: non-finite value");
  }
  if (values_.back() != 0.0)
    throw std::invalid_argument("RadialProfile: value at the last knot must be 0");
}

RadialProfile RadialProfile::zero(int dimension, double extent) {
  return RadialProfile(dimension, {0.0, extent}, {0.0, 0.0});
}

double RadialProfile::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double RadialProfile::max_slope() const {
  double m = 0.0;
  for (std::size_t i = 0; i + 1 < grid_.size(); ++i)
    m = std::max(m, std::abs((values_[i + 1] - values_[i]) / (grid_[i + 1] - grid_[i])));
  return m;
}

double RadialProfile::min_spacing() const {
  double m = grid_[1] - grid_[0];
  for (std::size_t i = 1; i + 1 < grid_.size(); ++i) m = std::min(m, grid_[i + 1] - grid_[i]);
  return m;
}

RadialProfile RadialProfile::with_dimension(int n) const {
  return RadialProfile(n, grid_, values_);
}

RadialProfile RadialProfile::dilated(double lambda) const {
  if (!(lambda > 0.0)) throw std::invalid_argument("dilated: lambda must be positive");
  std::vector<double> g(grid_);
  for (double& t : g) t *= lambda;
  return RadialProfile(dimension_, std::move(g), values_);
}

RadialProfile RadialProfile::scaled(double c) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= c;
  return RadialProfile(dimension_, grid_, std::move(v));
}

double evaluate(const RadialProfile& p, double t) {
  const auto g = p.grid();
  const auto v = p.values();
  if (t <= g.front()) return v.front();
  if (t >= g.back()) return 0.0;
  const auto it = std::upper_bound(g.begin(), g.end(), t);
  const std::size_t j = static_cast<std::size_t>(it - g.begin()) - 1;
  const double w = (t - g[j]) / (g[j + 1] - g[j]);
  return v[j] + w * (v[j + 1] - v[j]);
}

double derivative_at(const RadialProfile& p, double t) {
  const auto g = p.grid();
  const auto v = p.values();
  if (t < g.front() || t >= g.back()) return 0.0;
  const auto it = std::upper_bound(g.begin(), g.end(), t);
  const std::size_t j = static_cast<std::size_t>(it - g.begin()) - 1;
  return (v[j + 1] - v[j]) / (g[j + 1] - g[j]);
}

double norm_l1(const RadialProfile& p) {
  const int n = p.dimension();
  const auto g = p.grid();
  const auto v = p.values();
  double acc = std::abs(v.front()) * std::pow(g.front(), n) / n;
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    const double beta = (v[i + 1] - v[i]) / (g[i + 1] - g[i]);
    const double alpha = v[i] - beta * g[i];
    acc += abs_linear_moment(alpha, beta, n - 1, g[i], g[i + 1]);
  }
  return sphere_surface(n) * acc;
}

double grad_norm_l1(const RadialProfile& p, std::optional<AnnulusRange> range) {
  const int n = p.dimension();
  const auto g = p.grid();
  const auto v = p.values();
  const double lo = range ? range->a : 0.0;
  const double hi = range ? range->b : g.back();
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    const double l = std::max(g[i], lo);
    const double u = std::min(g[i + 1], hi);
    if (u <= l) continue;
    const double slope = std::abs((v[i + 1] - v[i]) / (g[i + 1] - g[i]));
    acc += slope * (std::pow(u, n) - std::pow(l, n)) / n;
  }
  return sphere_surface(n) * acc;
}

RadialProfile abs_profile(const RadialProfile& p) {
  const auto g = p.grid();
  const auto v = p.values();
  std::vector<double> tg, tv;
  tg.reserve(g.size() + 4);
  tv.reserve(g.size() + 4);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i > 0 && ((v[i - 1] < 0.0 && v[i] > 0.0) || (v[i - 1] > 0.0 && v[i] < 0.0))) {
      const double w = v[i - 1] / (v[i - 1] - v[i]);
      const double tc = g[i - 1] + w * (g[i] - g[i - 1]);
      if (tc > tg.back() && tc < g[i]) {
        tg.push_back(tc);
        tv.push_back(0.0);
      }
    }
    tg.push_back(g[i]);
    tv.push_back(std::abs(v[i]));
  }
  return RadialProfile(p.dimension(), std::move(tg), std::move(tv));
}

CombinedProfile combine_max(const RadialProfile& p, const RadialProfile& q) {
  if (p.dimension() != q.dimension())
    throw std::invalid_argument("combine_max: dimension mismatch");
  std::vector<double> knots;
  knots.insert(knots.end(), p.grid().begin(), p.grid().end());
  knots.insert(knots.end(), q.grid().begin(), q.grid().end());
  std::sort(knots.begin(), knots.end());
  const double merge_tol = 1e-12 * std::max(1.0, knots.back());
  knots.erase(std::unique(knots.begin(), knots.end(),
                          [&](double a, double b) { return b - a <= merge_tol; }),
              knots.end());

  std::vector<double> tg{knots.front()};
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double l = knots[i], u = knots[i + 1];
    const double dl = evaluate(p, l) - evaluate(q, l);
    const double du = evaluate(p, u) - evaluate(q, u);
    if ((dl < 0.0 && du > 0.0) || (dl > 0.0 && du < 0.0)) {
      const double tc = l + dl / (dl - du) * (u - l);
      if (tc - l > merge_tol && u - tc > merge_tol) tg.push_back(tc);
    }
    tg.push_back(u);
  }

  std::vector<double> tv(tg.size());
  for (std::size_t i = 0; i < tg.size(); ++i)
    tv[i] = std::max(evaluate(p, tg[i]), evaluate(q, tg[i]));
  tv.back() = 0.0;

  std::vector<MaxSource> source(tg.size() - 1);
  std::vector<double> slope(tg.size() - 1);
  for (std::size_t k = 0; k + 1 < tg.size(); ++k) {
    const double mid = 0.5 * (tg[k] + tg[k + 1]);
    const bool second = evaluate(q, mid) > evaluate(p, mid);
    source[k] = second ? MaxSource::second : MaxSource::first;
    slope[k] = second ? derivative_at(q, mid) : derivative_at(p, mid);
  }
  return {RadialProfile(p.dimension(), std::move(tg), std::move(tv)), std::move(source),
          std::move(slope)};
}

RadialProfile profile_from_samples(int dimension, std::vector<double> grid,
                                   std::vector<double> values, bool close_support) {
  if (close_support && !values.empty()) values.back() = 0.0;
  return RadialProfile(dimension, std::move(grid), std::move(values));
}

std::string to_json(const RadialProfile& p) {
  nlohmann::json j;
  j["dimension"] = p.dimension();
  j["grid"] = std::vector<double>(p.grid().begin(), p.grid().end());
  j["values"] = std::vector<double>(p.values().begin(), p.values().end());
  return j.dump();
}

RadialProfile profile_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  for (const auto& [key, _] : j.items()) {
    if (key != "dimension" && key != "grid" && key != "values")
      throw std::invalid_argument("profile JSON: unknown key '" + key + "'");
  }
  return RadialProfile(j.at("dimension").get<int>(), j.at("grid").get<std::vector<double>>(),
                       j.at("values").get<std::vector<double>>());
}

std::string to_csv(const RadialProfile& p) {
  std::string out = "# dimension=" + std::to_string(p.dimension()) + "\nt,f\n";
  for (std::size_t i = 0; i < p.size(); ++i)
    out += format_double(p.grid()[i]) + "," + format_double(p.values()[i]) + "\n";
  return out;
}

RadialProfile profile_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int dimension = 0;
  std::vector<double> g, v;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("dimension=");
      if (pos != std::string::npos) dimension = std::stoi(line.substr(pos + 10));
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("profile CSV: malformed row");
    const std::string a = line.substr(0, comma);
    if (a == "t") continue;
    g.push_back(std::stod(a));
    v.push_back(std::stod(line.substr(comma + 1)));
  }
  if (dimension == 0) throw std::invalid_argument("profile CSV: missing '# dimension=n' header");
  return RadialProfile(dimension, std::move(g), std::move(v));
}

RadialProfile load_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open profile file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const bool csv = path.size() >= 4 && path.substr(path.size() - 4) == ".csv";
  try {
    return csv ? profile_from_csv(text) : profile_from_json(text);
  } catch (const std::exception& e) {
    throw std::runtime_error("invalid profile file " + path + ": " + e.what());
  }
}

void save_profile(const RadialProfile& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write profile file: " + path);
  const bool csv = path.size() >= 4 && path.substr(path.size() - 4) == ".csv";
  out << (csv ? to_csv(p) : to_json(p) + "\n");
}

}  // namespace radmax
