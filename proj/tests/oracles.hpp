#pragma once

// Test-only oracles, deliberately independent of the library's solvers.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>

namespace oracle {

struct GridMin {
  double location;
  double value;
};

/// Brute-force global minimization: dense uniform grid, leftmost grid winner,
/// then golden-section polishing on the two neighbouring grid intervals.
inline GridMin grid_minimize(const std::function<double(double)>& f, double lo, double hi,
                             std::size_t points = 1'000'000) {
  const double h = (hi - lo) / static_cast<double>(points - 1);
  std::size_t best = 0;
  double best_v = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points; ++i) {
    const double v = f(lo + h * static_cast<double>(i));
    if (v < best_v) {
      best_v = v;
      best = i;
    }
  }
  double a = lo + h * (best == 0 ? 0.0 : static_cast<double>(best) - 1.0);
  double b = lo + h * (best + 1 >= points ? static_cast<double>(points - 1) : static_cast<double>(best) + 1.0);
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < 200 && b - a > 1e-13; ++i) {
    if (f1 <= f2) {
      b = x2; x2 = x1; f2 = f1; x1 = b - r * (b - a); f1 = f(x1);
    } else {
      a = x1; x1 = x2; f1 = f2; x2 = a + r * (b - a); f2 = f(x2);
    }
  }
  GridMin out{0.5 * (a + b), f(0.5 * (a + b))};
  if (best_v < out.value) out = {lo + h * static_cast<double>(best), best_v};
  return out;
}

}  // namespace oracle
