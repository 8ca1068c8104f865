#pragma once

// Test-only oracles, kept independent of the implementation paths they check.

#include <algorithm>
#include <cmath>
#include <vector>

#include "perifront/reaction.hpp"

namespace perifront::oracles {

// O(n^2) exhaustive rectangle scan over the same s-grid as compute_R_grid.
inline RectResult brute_force_rectangle(const Reaction& f, double s_step) {
  const int n = static_cast<int>(std::lround(1.0 / s_step));
  std::vector<double> s(n + 1), g(n + 1);
  for (int i = 0; i <= n; ++i) {
    s[static_cast<std::size_t>(i)] = i * s_step;
    g[static_cast<std::size_t>(i)] = f.min_over_x(std::min(i * s_step, 1.0));
  }
  RectResult best;
  for (int a = 0; a <= n; ++a) {
    double running_min = g[static_cast<std::size_t>(a)];
    for (int b = a + 1; b <= n; ++b) {
      running_min = std::min(running_min, g[static_cast<std::size_t>(b)]);
      if (running_min <= 0.0) break;  // wider rectangles through this dip stay nonpositive
      const double area = (s[static_cast<std::size_t>(b)] - s[static_cast<std::size_t>(a)]) * running_min;
      if (area > best.value) {
        best.value = area;
        best.K = s[static_cast<std::size_t>(a)];
        best.H = s[static_cast<std::size_t>(b)];
      }
    }
  }
  return best;
}

// largest zero of min_x f in [0,1) by brute scan at the given resolution
inline double brute_force_theta(const Reaction& f, int n = 200000) {
  double theta = 0.0;
  for (int i = 1; i < n; ++i) {
    const double s = static_cast<double>(i) / n;
    if (f.min_over_x(s) <= 0.0) theta = s;
  }
  return theta;
}

// midpoint quadrature of int_0^1 f(s) ds at 1e-6 step
inline double fine_quadrature_01(const Reaction& f, const Vec2& x = {}) {
  const int n = 1000000;
  double acc = 0.0;
  for (int k = 0; k < n; ++k) acc += f(x, (k + 0.5) / n);
  return acc / n;
}

}  // namespace perifront::oracles
