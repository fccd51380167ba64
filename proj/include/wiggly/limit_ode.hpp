#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "wiggly/homogenization.hpp"
#include "wiggly/potentials.hpp"

namespace wiggly {

/// Solution of x' = -gamma f_gamma(h'(x)) with f_gamma extended oddly to negative slopes.
struct OdeRun {
  double gamma = 0.0;
  double x0 = 0.0;
  double t_end = 0.0;
  std::vector<double> times;
  std::vector<double> states;
  std::vector<double> derivs;  ///< x' at each recorded state
  std::optional<double> pinned_at;

  /// Cubic Hermite interpolation between recorded states; constant past the ends.
  double state_at(double t) const;
};

/// Slopes within this distance above the threshold are treated as pinned.
inline constexpr double kPinnedSlopeMargin = 1e-6;

struct LimitOptions {
  double tol = 1e-3;  ///< local error per unit time
  /// Shared memo; a private one is used when null.
  VelocityCache* cache = nullptr;
};

/// Adaptive RK4 with step doubling. Velocity queries run at tolerance tol / gamma
/// from y0 = 0. Stops at the first state with |h'(x)| <= T_gamma + 1e-6, moved
/// onto that level set, and holds it constant from then on.
OdeRun integrate_limit(double gamma, double x0, double t_end, const ConvexDrive& drive,
                       const PotentialPtr& potential, const LimitOptions& options = {});

struct ConvergenceRow {
  double epsilon;
  double sup_distance;
};

struct ConvergenceOptions {
  LimitOptions limit;
  int threads = 0;  ///< 0: hardware concurrency
  int samples = 1000;
};

/// For each epsilon (strictly decreasing, at least 3) runs the minimizing
/// movement with tau = epsilon / gamma up to t_end and reports the largest
/// |x_eps(t) - x(t)| over `samples` uniform times in [0, t_end]. Rows follow the
/// input order whatever the thread scheduling.
std::vector<ConvergenceRow> convergence_study(double gamma, double x0, double t_end,
                                              const std::vector<double>& epsilons, const ConvexDrive& drive,
                                              const PotentialPtr& potential, const ConvergenceOptions& options = {});

/// Same study against a precomputed limit run.
std::vector<ConvergenceRow> convergence_study(const OdeRun& limit, const std::vector<double>& epsilons,
                                              const ConvexDrive& drive, const PotentialPtr& potential,
                                              const ConvergenceOptions& options = {});

void write_ode_csv(const OdeRun& run, std::ostream& out);
void write_convergence_csv(const std::vector<ConvergenceRow>& rows, std::ostream& out);

}  // namespace wiggly
