#pragma once

// Globally adaptive Gauss-Kronrod (7/15) quadrature for small vector-valued
// integrands. Components share every function evaluation, which is the point:
// the cap kernels are the expensive part and all moments reuse them.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace radmax {

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace quad_detail {

inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd Kronrod nodes kXgk[1], kXgk[3], kXgk[5], kXgk[7].
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <std::size_t K>
struct Piece {
  double a;
  double b;
  std::array<double, K> value;
  std::array<double, K> error;
  std::array<double, K> abs_value;
  double priority;
};

template <std::size_t K, class F>
Piece<K> gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  std::array<double, K> kron{}, gauss{}, absk{};
  auto accumulate = [&](const std::array<double, K>& v, double wk, double wg) {
    for (std::size_t k = 0; k < K; ++k) {
      kron[k] += wk * v[k];
      gauss[k] += wg * v[k];
      absk[k] += wk * std::abs(v[k]);
    }
  };
  accumulate(f(c), kWgk[7], kWg[3]);
  for (int j = 0; j < 7; ++j) {
    const double x = h * kXgk[j];
    const double wg = (j % 2 == 1) ? kWg[j / 2] : 0.0;
    accumulate(f(c - x), kWgk[j], wg);
    accumulate(f(c + x), kWgk[j], wg);
  }
  Piece<K> p{a, b, {}, {}, {}, 0.0};
  for (std::size_t k = 0; k < K; ++k) {
    p.value[k] = kron[k] * h;
    p.error[k] = std::abs((kron[k] - gauss[k]) * h);
    p.abs_value[k] = absk[k] * std::abs(h);
  }
  return p;
}

}  // namespace quad_detail

struct AdaptiveResult3 {
  std::array<double, 3> value{};
  std::array<double, 3> error{};
  std::int64_t evaluations = 0;
};

/// Integrates f : double -> std::array<double,3> over the union of the given
/// breakpoint-separated intervals. `active` selects the components that take
/// part in the stopping rule: sum(err_k) <= max(rel_tol * (int|f_k| + extra_k), abs_tol),
/// where extra_k is the magnitude of any part of the integral computed elsewhere.
/// scale_source[k] names the component whose magnitude sets the tolerance of
/// component k (the identity by default).
template <class F>
AdaptiveResult3 integrate_gk15(F&& f, std::span<const std::array<double, 2>> intervals,
                               double rel_tol, double abs_tol, std::array<bool, 3> active,
                               std::int64_t max_evaluations,
                               std::array<double, 3> extra_scale = {},
                               std::array<int, 3> scale_source = {0, 1, 2}) {
  using Piece = quad_detail::Piece<3>;
  AdaptiveResult3 out;
  std::vector<Piece> pieces;
  pieces.reserve(intervals.size() * 2);
  for (const auto& iv : intervals) {
    if (!(iv[1] > iv[0])) continue;
    pieces.push_back(quad_detail::gk15<3>(f, iv[0], iv[1]));
    out.evaluations += 15;
  }
  if (pieces.empty()) return out;

  std::array<double, 3> total{}, err{}, scale{};
  for (const auto& p : pieces) {
    for (int k = 0; k < 3; ++k) {
      total[k] += p.value[k];
      err[k] += p.error[k];
      scale[k] += p.abs_value[k];
    }
  }
  auto tolerance = [&](int k) {
    const int j = scale_source[k];
    return std::max(rel_tol * (scale[j] + extra_scale[j]), abs_tol);
  };
  auto converged = [&] {
    for (int k = 0; k < 3; ++k)
      if (active[k] && err[k] > tolerance(k)) return false;
    return true;
  };
  auto priority = [&](const Piece& p) {
    double m = 0.0;
    for (int k = 0; k < 3; ++k)
      if (active[k]) m = std::max(m, p.error[k] / tolerance(k));
    return m;
  };

  if (!converged()) {
    auto cmp = [](const Piece& x, const Piece& y) { return x.priority < y.priority; };
    std::priority_queue<Piece, std::vector<Piece>, decltype(cmp)> heap(cmp);
    for (auto& p : pieces) {
      p.priority = priority(p);
      heap.push(p);
    }
    while (!converged()) {
      if (out.evaluations >= max_evaluations)
        throw QuadratureError("adaptive quadrature exceeded its evaluation budget (" +
                              std::to_string(max_evaluations) + ")");
      Piece worst = heap.top();
      heap.pop();
      const double mid = 0.5 * (worst.a + worst.b);
      if (!(mid > worst.a && mid < worst.b)) {
        throw QuadratureError("adaptive quadrature: interval collapsed before convergence");
      }
      Piece left = quad_detail::gk15<3>(f, worst.a, mid);
      Piece right = quad_detail::gk15<3>(f, mid, worst.b);
      out.evaluations += 30;
      for (int k = 0; k < 3; ++k) {
        total[k] += left.value[k] + right.value[k] - worst.value[k];
        err[k] += left.error[k] + right.error[k] - worst.error[k];
        scale[k] += left.abs_value[k] + right.abs_value[k] - worst.abs_value[k];
      }
      left.priority = priority(left);
      right.priority = priority(right);
      heap.push(left);
      heap.push(right);
    }
    // Re-sum from the leaves to shed accumulated rounding in `total`.
    total = {};
    err = {};
    while (!heap.empty()) {
      const Piece& p = heap.top();
      for (int k = 0; k < 3; ++k) {
        total[k] += p.value[k];
        err[k] += p.error[k];
      }
      heap.pop();
    }
  }
  out.value = total;
  out.error = err;
  return out;
}

}  // namespace radmax
