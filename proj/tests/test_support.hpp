#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "radmax/profile.hpp"

namespace radmax::testing {

/// Random piecewise-linear profile with `knots` knots on [0, extent].
inline RadialProfile random_profile(std::mt19937_64& rng, int n, int knots, bool signed_values,
                                    double extent = 1.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> g{0.0};
  for (int i = 1; i < knots; ++i) g.push_back(g.back() + 0.2 + u(rng));
  const double scale = extent / g.back();
  for (double& t : g) t *= scale;
  std::vector<double> v(g.size());
  for (auto& x : v) x = signed_values ? 2.0 * u(rng) - 1.0 : u(rng);
  v.back() = 0.0;
  return RadialProfile(n, std::move(g), std::move(v));
}

/// Midpoint rule for int_a^b f.
template <class F>
double midpoint(F&& f, double a, double b, int points) {
  const double h = (b - a) / points;
  double acc = 0.0;
  for (int i = 0; i < points; ++i) acc += f(a + (i + 0.5) * h);
  return acc * h;
}

}  // namespace radmax::testing
