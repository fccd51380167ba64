#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "wiggly/potentials.hpp"
#include "wiggly/proximal.hpp"

namespace wiggly {

/// Minimizing-movement run at the critical scale tau = eps / gamma. Each step
/// minimizes E_eps(x) + (x - x_i)^2 / (2 tau).
struct MMConfig {
  OscillatingEnergy energy;
  double tau;
  double gamma;
  double x0;
  std::int64_t steps;

  /// Derives tau = epsilon / gamma.
  static MMConfig critical(OscillatingEnergy energy, double gamma, double x0, std::int64_t steps);
  /// Throws invalid_input unless |gamma tau - eps| <= 1e-12 eps and steps >= 1.
  void validate() const;
};

enum class Direction { nonincreasing, nondecreasing, constant };

const char* to_string(Direction d) noexcept;

struct Trajectory {
  double tau = 0.0;
  std::vector<double> times;   ///< k tau for every recorded state
  std::vector<double> states;  ///< x_k; states[0] = x0
  Direction monotone_direction = Direction::constant;
  /// Step index at which the in-run pinning test fired; later states repeat it.
  std::optional<std::int64_t> pinned_step;
  /// Recording stride (1 unless the state cap forced thinning).
  std::int64_t stride = 1;

  /// Piecewise-constant reading x(t) = x_floor(t / tau).
  double state_at(double t) const;
};

struct RunOptions {
  std::int64_t max_states = 10'000'000;
  /// Stop iterating once pinned and pad with the fixed point.
  bool stop_when_pinned = true;
};

/// Throws monotonicity_violation if a step reverses the direction set by the
/// first step by more than 1e-10.
Trajectory run_mm(const MMConfig& config, const RunOptions& options = {});

/// Consecutive steps with |x_{i+1} - x_i| <= 1e-12 max(1, |x_i|) needed to call a run pinned.
inline constexpr int kPinnedSteps = 10;
inline constexpr double kPinnedTolerance = 1e-12;

struct LinearizedOrbit {
  double T;
  double gamma;
  std::vector<double> y;  ///< y_0 .. y_n
};

/// n steps of y -> argmin T y + W(y) + (gamma/2)(y - y_i)^2.
LinearizedOrbit run_linearized(double T, double gamma, double y0, std::int64_t n, PotentialPtr potential);

/// One step of the linearized map, reused across long orbits.
class LinearizedMap {
 public:
  LinearizedMap(double T, double gamma, PotentialPtr potential);
  double operator()(double y) const;
  double slope() const { return problem_.objective.slope; }

 private:
  mutable ProxProblem problem_;
};

/// Compares the full run with linearized runs at slopes h'(x0 + delta) and
/// h'(x0 - delta), all from x0 and with the same tau:
///   x^{T+}_i <= x_i <= x^{T-}_i   (tolerance 1e-9) for i <= n.
/// Each bound is an induction whose step needs the compared minimizers to lie
/// on the correct side of x0 +- delta (below x0 + delta for the T+ bound, above
/// x0 - delta for the T- bound); a bound is checked at step i only while every
/// state up to step i does.
bool sandwich_check(const MMConfig& config, double delta, std::int64_t n);

/// CSV `t,x`, one row per step k = 1..steps, 17 significant digits.
void write_trajectory_csv(const Trajectory& trajectory, std::ostream& out);

}  // namespace wiggly
