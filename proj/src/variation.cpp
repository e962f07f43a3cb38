#include "radmax/variation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "radmax/quadrature.hpp"

namespace radmax {

namespace {

RadialIntegrand abs_slopes(const RadialProfile& p) {
  return RadialIntegrand::slopes_of(abs_profile(p), true);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Index range of the 3-point stencil used by finite_differences at i.
std::pair<std::size_t, std::size_t> stencil(std::size_t i, std::size_t m) {
  if (i == 0) return {0, 2};
  if (i + 1 == m) return {m - 3, m - 1};
  return {i - 1, i + 1};
}

void require_full_support(const RadialProfile& p, const MaximalField& f, const char* what) {
  const double tn = abs_profile(p).support_end();
  if (f.samples.empty() || f.samples.back().s < 2.0 * tn * (1 - 1e-12))
    throw std::invalid_argument(std::string(what) + ": field must extend to 2 t_N");
}

}  // namespace

double weighted_variation(std::span<const double> s, std::span<const double> v, int n, double a,
                          double b) {
  if (s.size() != v.size()) throw std::invalid_argument("weighted_variation: size mismatch");
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < s.size(); ++j) {
    const double mid = 0.5 * (s[j] + s[j + 1]);
    if (mid < a || mid >= b) continue;
    acc += std::abs(v[j + 1] - v[j]) * std::pow(mid, n - 1);
  }
  return sphere_surface(n) * acc;
}

WeightedVariation field_variation(const MaximalField& f, double origin, bool decaying_tail) {
  WeightedVariation out;
  if (f.samples.empty()) return out;
  std::vector<double> s{0.0}, v{origin};
  for (const auto& x : f.samples) {
    if (x.s == 0.0) {
      v[0] = x.value;
      continue;
    }
    s.push_back(x.s);
    v.push_back(x.value);
  }
  const int n = f.dimension;
  out.body = weighted_variation(s, v, n);
  if (decaying_tail) out.tail = sphere_surface(n) * n * v.back() * std::pow(s.back(), n - 1);
  return out;
}

double origin_value(const MaximalEngine& e, Operator op) {
  if (op == Operator::noncentered || op == Operator::centered) return e.evaluate(0.0, op).value;
  return evaluate(e.abs(), 0.0);
}

VariationRow variation_row(const RadialProfile& p, const MaximalField& fine,
                           const MaximalField* coarse, double origin) {
  VariationRow row;
  row.profile_ref = fine.profile_ref;
  row.op = fine.op;
  row.dimension = fine.dimension;
  row.samples = fine.samples.size();
  const bool tail = fine.op == Operator::noncentered || fine.op == Operator::centered;
  const WeightedVariation w = field_variation(fine, origin, tail);
  row.norm_dmf = w.total();
  row.tail = w.tail;
  row.refined = row.norm_dmf;
  if (coarse) {
    row.norm_dmf_coarse = field_variation(*coarse, origin, tail).total();
    row.relative_change =
        row.norm_dmf > 0.0 ? std::abs(row.norm_dmf - row.norm_dmf_coarse) / row.norm_dmf : 0.0;
    row.refined = row.norm_dmf + (row.norm_dmf - row.norm_dmf_coarse) / 3.0;
  }
  row.norm_df = grad_norm_l1(p);
  row.ratio = row.norm_df > 0.0 ? row.norm_dmf / row.norm_df : 0.0;
  return row;
}

std::vector<VariationRow> variation_report(const RadialProfile& p,
                                           std::span<const Operator> operators, int samples,
                                           const EngineOptions& opts) {
  const MaximalEngine e(p, opts);
  const double extent = 2.0 * e.abs().support_end();
  const auto fine_grid = uniform_grid(extent, samples);
  const auto coarse_grid = uniform_grid(extent, std::max(1, samples / 2));
  std::vector<VariationRow> out;
  for (Operator op : operators) {
    const MaximalField fine = e.field(fine_grid, op);
    const MaximalField coarse = e.field(coarse_grid, op);
    out.push_back(variation_row(p, fine, &coarse, origin_value(e, op)));
  }
  return out;
}

double FubiniCheck::relative_gap() const {
  if (rhs == 0.0) return std::abs(lhs);
  return std::abs(lhs - rhs) / std::abs(rhs);
}

FubiniCheck fubini_identity_check(const RadialProfile& p, const QuadratureOptions& quad) {
  const RadialProfile a = abs_profile(p);
  const int n = p.dimension();
  const RadialIntegrand g = abs_slopes(p);
  const double tn = a.support_end();
  // K(s) = int_{B(0,s)} |Df(y)| |y| dy; the integrand in s is
  // sigma_n s^{n-1} (1/s) K(s) / (omega_n s^n) = n K(s) / s^2.
  auto K = [&](double s) { return ball_integral(g, AxisBall(0.0, s, n), KernelMode::radius_weight, quad); };
  std::vector<std::array<double, 2>> intervals;
  double lo = 0.0;
  for (double t : a.grid()) {
    if (t > lo) intervals.push_back({lo, t});
    lo = std::max(lo, t);
  }
  FubiniCheck out;
  out.rhs = n * grad_norm_l1(p);
  if (intervals.empty()) return out;
  auto f = [&](double s) -> std::array<double, 3> { return {n * K(s) / (s * s), 0.0, 0.0}; };
  const auto res = integrate_gk15(f, intervals, 1e-12, 1e-300, {true, false, false}, 2000000);
  // Past t_N, K is constant: int_{t_N}^inf n K / s^2 = n K(t_N) / t_N.
  out.lhs = res.value[0] + n * K(tn) / tn;
  return out;
}

std::vector<CheckRow> decreasing_bound_rows(const RadialProfile& p, const MaximalField& m,
                                            const std::vector<DerivativeSample>& rows,
                                            const QuadratureOptions& quad) {
  const RadialProfile a = abs_profile(p);
  const int n = p.dimension();
  const RadialIntegrand g = abs_slopes(p);
  const double sup = a.sup_norm();
  const double slope_tol = 1e-9 * sup / a.support_end();
  auto bound = [&](double s) {
    const double k = ball_integral(g, AxisBall(0.0, s, n), KernelMode::radius_weight, quad);
    return std::pow(2.0, n) / s * k / ball_volume(s, n);
  };
  const std::size_t M = m.samples.size();
  std::vector<CheckRow> out;
  for (std::size_t i = 0; i < M; ++i) {
    const MaximalSample& smp = m.samples[i];
    if (!(smp.s > 0.0) || smp.is_floor() || smp.diagnostics.multi_modal) continue;
    if (smp.value <= evaluate(a, smp.s) + 1e-9 * sup) continue;
    const auto [i0, i1] = stencil(i, M);
    double rhs = 0.0;
    bool ok = true;
    for (std::size_t j = i0; j <= i1; ++j) {
      if (!(m.samples[j].s > 0.0)) ok = false;
      else rhs = std::max(rhs, bound(m.samples[j].s));
    }
    if (ok) out.push_back({smp.s, "decreasing_bound", std::abs(rows[i].fd_derivative), rhs, slope_tol});
    const double d = smp.center(), r = smp.radius();
    const double tol = 1e-9 * (smp.s + r);
    out.push_back({smp.s, "origin_in_ball", d - r, 0.0, tol});
    out.push_back({smp.s, "ball_in_origin_ball", d + r, smp.s, tol});
  }
  return out;
}

std::vector<CheckRow> endpoint_bound_rows(const RadialProfile& p, const MaximalField& f4,
                                          const QuadratureOptions& quad) {
  const RadialProfile a = abs_profile(p);
  const int n = p.dimension();
  const RadialIntegrand g = abs_slopes(p);
  const double tol = 1e-9 * a.sup_norm() / a.support_end();
  const auto grid = f4.grid();
  const auto vals = f4.values();
  const std::vector<double> fd = finite_differences(grid, vals);
  const std::size_t M = grid.size();
  std::vector<double> bound(M);
  for (std::size_t i = 0; i < M; ++i) {
    const AxisBall b(grid[i], 0.5 * grid[i], n);
    bound[i] = 1.25 * std::pow(2.0, n) * ball_integral(g, b, KernelMode::plain, quad) / b.volume();
  }
  std::vector<CheckRow> out;
  for (std::size_t i = 0; i < M; ++i) {
    if (!(grid[i] > a.first_knot() && grid[i] < a.support_end())) continue;
    const auto [i0, i1] = stencil(i, M);
    double rhs = 0.0;
    for (std::size_t j = i0; j <= i1; ++j) rhs = std::max(rhs, bound[j]);
    out.push_back({grid[i], "endpoint_bound", std::abs(fd[i]), rhs, tol});
  }
  return out;
}

std::vector<ComponentOutcome> strict_local_max_check(std::span<const double> s,
                                                     std::span<const double> values,
                                                     const RadialProfile& p, double delta_rel,
                                                     double eta_rel) {
  if (s.size() != values.size()) throw std::invalid_argument("strict_local_max_check: sizes");
  const RadialProfile a = abs_profile(p);
  const double delta = delta_rel * a.sup_norm();
  const double eta = eta_rel * a.sup_norm();
  const std::size_t M = s.size();
  std::vector<ComponentOutcome> out;
  std::size_t i = 0;
  while (i < M) {
    if (!(values[i] > evaluate(a, s[i]) + delta)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < M && values[j + 1] > evaluate(a, s[j + 1]) + delta) ++j;
    if (i > 0 && j + 1 < M) {
      // Best split c: rises before c and drops after c are violations.
      const std::size_t len = j - i + 1;
      std::vector<double> rise_before(len, 0.0), drop_after(len, 0.0);
      for (std::size_t c = 1; c < len; ++c)
        rise_before[c] = std::max(rise_before[c - 1], values[i + c] - values[i + c - 1]);
      for (std::size_t c = len - 1; c-- > 0;)
        drop_after[c] = std::max(drop_after[c + 1], values[i + c] - values[i + c + 1]);
      ComponentOutcome oc{i, j, i, 1e300, false};
      for (std::size_t c = 0; c < len; ++c) {
        const double v = std::max(rise_before[c], drop_after[c]);
        if (v < oc.violation) {
          oc.violation = v;
          oc.valley = i + c;
        }
      }
      oc.violation = std::max(oc.violation, 0.0);
      oc.pass = oc.violation <= eta;
      out.push_back(oc);
    }
    i = j + 1;
  }
  return out;
}

std::vector<ComponentOutcome> strict_local_max_check(const MaximalField& f, const RadialProfile& p,
                                                     double delta_rel, double eta_rel) {
  const auto g = f.grid();
  const auto v = f.values();
  return strict_local_max_check(g, v, p, delta_rel, eta_rel);
}

ArgmaxClasses classify_argmax(const RadialProfile& p, const MaximalField& m,
                              const MaximalField& mi, const std::vector<DerivativeSample>& rows,
                              const QuadratureOptions& quad) {
  if (m.samples.size() != mi.samples.size() || m.samples.size() != rows.size())
    throw std::invalid_argument("classify_argmax: fields must share the sample grid");
  const RadialProfile a = abs_profile(p);
  const RadialIntegrand g = abs_slopes(p);
  const double sup = a.sup_norm();
  const double slope_tol = 1e-9 * sup / a.support_end();
  ArgmaxClasses out;
  for (std::size_t i = 0; i < m.samples.size(); ++i) {
    const MaximalSample& smp = m.samples[i];
    const DerivativeSample& row = rows[i];
    if (!(smp.s > 0.0)) {
      ++out.unclassified;
      continue;
    }
    if (smp.value <= mi.samples[i].value + 1e-9 * sup) {
      ++out.inner;
      continue;
    }
    if (row.classification == BallClass::skipped ||
        !(std::abs(row.fd_derivative) > row.grid_tolerance)) {
      ++out.unclassified;
      continue;
    }
    const double c = *smp.c;
    out.rows.push_back({smp.s, "c_lower", -c, 1.0, 1e-6});
    out.rows.push_back({smp.s, "c_gap", 0.25, std::abs(c - 1.0), 1e-6});
    const AxisBall& b = *smp.argmax;
    const BallMoments mom = ball_moments(g, b, quad);
    const double tol = row.grid_tolerance + slope_tol;
    if (c > 1.25) {
      ++out.e_plus;
      out.rows.push_back({smp.s, "e_plus_estimate", std::abs(row.fd_derivative),
                          mom.plain / b.volume(), tol});
    } else if (c < 0.75) {
      ++out.e_minus;
      out.rows.push_back({smp.s, "e_minus_estimate", std::abs(row.fd_derivative),
                          mom.radius_weight / (smp.s * b.volume()), tol});
    } else {
      ++out.middle;
    }
  }
  return out;
}

RadialProfile endpoint_profile(const RadialProfile& p, const MaximalField& f4) {
  require_full_support(p, f4, "endpoint_profile");
  std::vector<double> s{0.0}, v{evaluate(abs_profile(p), 0.0)};
  for (const auto& x : f4.samples) {
    s.push_back(x.s);
    v.push_back(x.value);
  }
  return profile_from_samples(p.dimension(), std::move(s), std::move(v), true);
}

ChainCheck truncated_chain_check(const RadialProfile& p, const MaximalField& mi,
                                 const MaximalField& f4) {
  require_full_support(p, mi, "truncated_chain_check");
  const int n = p.dimension();
  const RadialProfile a = abs_profile(p);
  const RadialProfile g = combine_max(endpoint_profile(p, f4), a).profile;
  ChainCheck out;
  out.norm_dg = grad_norm_l1(g);
  out.norm_dmi = field_variation(mi, evaluate(a, 0.0), false).total();
  const double c3n = std::pow(2.0, 3 * n);
  out.bound = 3.0 * c3n * out.norm_dg;
  out.pass = out.norm_dmi <= out.bound * (1 + 1e-9);

  std::vector<double> s{0.0}, v{evaluate(a, 0.0)};
  for (const auto& x : mi.samples) {
    s.push_back(x.s);
    v.push_back(x.value);
  }
  const double first_mid = 0.5 * s[1];
  int k = static_cast<int>(std::floor(-std::log2(s.back()))) + 1;
  out.annuli_pass = true;
  for (; std::ldexp(1.0, 1 - k) > first_mid; ++k) {
    AnnulusBound ab;
    ab.k = k;
    ab.a = std::ldexp(1.0, -k);
    ab.b = std::ldexp(1.0, 1 - k);
    ab.lhs = weighted_variation(s, v, n, ab.a, ab.b);
    ab.rhs = c3n * grad_norm_l1(g, AnnulusRange(std::ldexp(1.0, -k - 1), std::ldexp(1.0, 2 - k)));
    out.annuli_pass = out.annuli_pass && ab.pass();
    out.annuli.push_back(ab);
  }
  return out;
}

std::string check_rows_to_csv(const std::vector<CheckRow>& rows) {
  std::ostringstream os;
  os << "s,check,lhs,rhs,tol,pass\n";
  for (const auto& r : rows)
    os << fmt(r.s) << ',' << r.check << ',' << fmt(r.lhs) << ',' << fmt(r.rhs) << ','
       << fmt(r.tol) << ',' << (r.pass() ? 1 : 0) << '\n';
  return os.str();
}

}  // namespace radmax
