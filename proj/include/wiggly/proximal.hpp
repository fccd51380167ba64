#pragma once

#include <optional>
#include <vector>

#include "wiggly/potentials.hpp"

namespace wiggly {

/// phi(x) = drive(x) + scale * W(x / scale), where the drive is either the linear
/// map x -> slope * x or a convex drive h.
struct Objective {
  enum class Drive { linear, convex };

  Drive drive_kind = Drive::linear;
  double slope = 0.0;
  std::optional<ConvexDrive> drive;
  PotentialPtr potential;
  double scale = 1.0;

  /// T y + W(y) on the unit cell scale (or T x + s W(x/s) for another scale).
  static Objective linear(double slope, PotentialPtr potential, double scale = 1.0);
  /// h(x) + eps W(x / eps).
  static Objective energy(const OscillatingEnergy& energy);

  double value(double x) const;
  double derivative(double x) const;
  double second_derivative(double x) const;
  double drive_value(double x) const;
  double drive_derivative(double x) const;

  bool same_as(const Objective& other) const;
};

/// Minimize phi(x) + beta (x - center)^2 over the real line.
struct ProxProblem {
  Objective objective;
  double slope_bound = 0.0;  ///< bounds |phi'| near the minimizers; sizes the search window
  double beta = 0.0;
  double center = 0.0;
};

/// Linearized step: T y + W(y) + (gamma/2)(y - center)^2.
ProxProblem linear_prox_problem(double slope, double gamma, PotentialPtr potential, double center);
/// Full step: h(x) + eps W(x/eps) + (x - center)^2 / (2 tau).
ProxProblem energy_prox_problem(const OscillatingEnergy& energy, double tau, double center);

struct ProxCandidate {
  double location;
  double value;
};

struct ProxResult {
  double minimizer = 0.0;
  double value = 0.0;
  /// Every local minimizer whose value is within 1e-12 * max(1, |value|) of the
  /// best, sorted by location.
  std::vector<ProxCandidate> candidates;
  bool tie_detected = false;
};

struct ProxOptions {
  /// Closed-form per-cell minimizers for the piecewise-quadratic potential. When
  /// false every cell goes through the sampled-derivative path.
  bool use_closed_forms = true;
};

/// Values closer than this (relative to max(1, |best|)) are reported as ties.
inline constexpr double kTieReportTolerance = 1e-12;

/// Global minimizer of the proximal problem. Among candidates equal to the best value
/// up to rounding (a few ulps) the leftmost one is selected. Throws invalid_input for
/// beta <= 0 and non_coercive when the search window stops growing without enclosing
/// the minimizer.
ProxResult prox_step(const ProxProblem& problem, const ProxOptions& options = {});

/// Order preservation of the selection: minimizer(a) <= minimizer(b) + 1e-10 when
/// both problems share objective and beta and center(a) <= center(b).
bool prox_selection_monotone_check(const ProxProblem& a, const ProxProblem& b);

}  // namespace wiggly
