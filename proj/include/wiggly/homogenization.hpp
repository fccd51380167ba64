#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <shared_mutex>
#include <tuple>
#include <vector>

#include "wiggly/potentials.hpp"

namespace wiggly {

struct VelocityEstimate {
  double T = 0.0;
  double gamma = 0.0;
  double value = 0.0;        ///< f_gamma(T)
  double error_bound = 0.0;  ///< 2/n + |v_2n - v_n|; zero when pinned
  std::int64_t iterations = 0;
  double y0_used = 0.0;
  bool pinned = false;
};

/// Largest orbit length tried before giving up.
inline constexpr std::int64_t kVelocityMaxIterations = std::int64_t{1} << 24;

/// Average displacement per step (y0 - y_n) / n of the linearized orbit with
/// slope T >= 0. Doubles n from 64 until 2/n + |v_2n - v_n| <= tol; exits with an
/// exact zero once the orbit is Cauchy (1e-12 relative) inside one well for 10
/// consecutive steps. Throws BudgetExceeded (with the best estimate) past 2^24
/// steps. Requires tol >= 1e-8.
VelocityEstimate homogenized_velocity(double T, double gamma, double tol, double y0,
                                      const PotentialPtr& potential);

/// Memo of velocity estimates keyed by potential identity and (gamma, T, tol, y0)
/// quantized at 1e-12. Safe for concurrent readers and racing inserts: the first
/// insert for a key wins and later ones return it.
class VelocityCache {
 public:
  VelocityEstimate get(double T, double gamma, double tol, double y0, const PotentialPtr& potential);
  std::size_t size() const;

 private:
  using Key = std::tuple<const void*, std::int64_t, std::int64_t, std::int64_t, std::int64_t>;
  mutable std::shared_mutex mutex_;
  std::map<Key, VelocityEstimate> entries_;
};

enum class PinningMethod { criterion, velocity_bisection };

const char* to_string(PinningMethod method) noexcept;

struct PinningReport {
  double gamma = 0.0;
  double threshold = 0.0;
  double low = 0.0;
  double high = 0.0;
  PinningMethod method = PinningMethod::criterion;
};

/// Bisection on T in [0, 1] classifying T as pinned when y_T (the local
/// minimizer of T y + W(y) in [-1/2, 0]) is the selected global minimizer of
/// T y + W(y) + (gamma/2)(y - y_T)^2. Throws hypothesis_violated unless W' has a
/// single local maximum on (0, 1/2) with positive value. Requires tol >= 1e-8.
PinningReport pinning_threshold_criterion(double gamma, double tol, const PotentialPtr& potential);

/// Bisection on T in [0, 1] classifying T as moving when the velocity estimate
/// (tolerance 1e-3, y0 = 0) exceeds its error bound and the orbit never pinned.
/// Requires tol >= 1e-6.
PinningReport pinning_threshold_velocity(double gamma, double tol, const PotentialPtr& potential);

/// Criterion when W satisfies its hypothesis, velocity bisection otherwise.
PinningReport pinning_threshold(double gamma, double tol, const PotentialPtr& potential);

struct PeriodicOrbitReport {
  double T = 0.0;
  double gamma = 0.0;
  std::int64_t q = 0;
  /// Signed displacement per q steps; negative for forward (T > 0) motion, so
  /// f_gamma(T) = |p| / q.
  std::int64_t p = 0;
  double witness_y0 = 0.0;
  double residual = 0.0;
};

/// Runs the orbit from y0 past a burn-in, then looks for the smallest q <= q_max
/// with |y_{i+q} - y_i - p| <= 1e-8 for integer p, confirmed over two further
/// periods. nullopt when none is found (as for irrational f_gamma(T)).
std::optional<PeriodicOrbitReport> detect_periodic_orbit(double T, double gamma, std::int64_t q_max,
                                                         const PotentialPtr& potential, double y0 = 0.0);

/// (int_0^1 ds / (z + W(s)))^{-1} when the integrand is integrable, else 0.
double g_infinity_printed(double z, const PeriodicPotential& potential);
/// Same with W'(s) in the denominator.
double g_infinity_slope(double z, const PeriodicPotential& potential);
/// Mean speed of the flow y' = -(z + W'(y)) over many periods, by RK4 with
/// steps that move at most 1e-4 of a period. Zero if the flow has a rest point.
double g_infinity_flow(double z, const PeriodicPotential& potential);

struct ExtremeLimits {
  double z = 0.0;
  double small_gamma_velocity = 0.0;  ///< gamma f_gamma(z) at gamma_small
  double large_gamma_velocity = 0.0;  ///< gamma f_gamma(z) at gamma_large
  double g_infinity_printed = 0.0;  ///< with W in the denominator
  double g_infinity_slope = 0.0;
  double g_infinity_oracle = 0.0;
};

/// Requires z > 0, gamma_small <= 0.05 and gamma_large >= 50.
ExtremeLimits extreme_limits(double z, double gamma_small, double gamma_large, const PotentialPtr& potential);

struct PhaseCell {
  double gamma = 0.0;
  double T = 0.0;
  VelocityEstimate estimate;
  /// The estimate is the best one available when the step cap was hit.
  bool budget_exceeded = false;
};

/// n equally spaced points from lo to hi inclusive (lo alone when n = 1).
std::vector<double> linspace(double lo, double hi, std::size_t n);

/// Velocity on the gamma x T grid from y0 = 0, gamma-major. Cells are spread over
/// `threads` workers (0: hardware concurrency); the order never depends on scheduling.
std::vector<PhaseCell> phase_sweep(const std::vector<double>& gammas, const std::vector<double>& slopes, double tol,
                                   const PotentialPtr& potential, int threads = 0);

}  // namespace wiggly
