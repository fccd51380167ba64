#include "wiggly/homogenization.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "wiggly/dynamics.hpp"
#include "wiggly/error.hpp"
#include "wiggly/proximal.hpp"

namespace wiggly {

const char* to_string(PinningMethod method) noexcept {
  return method == PinningMethod::criterion ? "criterion" : "velocity_bisection";
}

VelocityEstimate homogenized_velocity(double T, double gamma, double tol, double y0,
                                      const PotentialPtr& potential) {
  require(potential != nullptr, "velocity needs a potential");
  require(std::isfinite(T) && T >= 0.0, "velocity needs a finite slope T >= 0");
  require(std::isfinite(gamma) && gamma > 0.0, "gamma must be positive");
  require(std::isfinite(tol) && tol >= 1e-8, "velocity tolerance must be >= 1e-8");
  require(std::isfinite(y0), "y0 must be finite");

  VelocityEstimate est;
  est.T = T;
  est.gamma = gamma;
  est.y0_used = y0;

  LinearizedMap step(T, gamma, potential);
  double y = y0;
  std::int64_t i = 0;
  int quiet = 0;

  // Advances the orbit to index `target`; false when the pinning test fires.
  auto advance_to = [&](std::int64_t target) {
    while (i < target) {
      const double next = step(y);
      const bool same_well = std::round(next) == std::round(y);
      quiet = same_well && std::abs(next - y) <= kPinnedTolerance * std::max(1.0, std::abs(y)) ? quiet + 1 : 0;
      // An exact repeat is a fixed point of the (deterministic) map: pinned for good.
      const bool fixed = next == y;
      y = next;
      ++i;
      if (quiet >= kPinnedSteps || fixed) return false;
    }
    return true;
  };

  auto pinned = [&] {
    est.value = 0.0;
    est.error_bound = 0.0;
    est.iterations = i;
    est.pinned = true;
    return est;
  };

  std::int64_t n = 64;
  if (!advance_to(n)) return pinned();
  double v_n = (y0 - y) / static_cast<double>(n);
  for (;;) {
    if (!advance_to(2 * n)) return pinned();
    const double v_2n = (y0 - y) / static_cast<double>(2 * n);
    est.value = v_2n;
    est.error_bound = 2.0 / static_cast<double>(n) + std::abs(v_2n - v_n);
    est.iterations = 2 * n;
    if (est.error_bound <= tol) return est;
    if (2 * n >= kVelocityMaxIterations)
      throw BudgetExceeded("velocity did not reach tolerance within 2^24 steps", est.value, est.error_bound,
                           est.iterations);
    n *= 2;
    v_n = v_2n;
  }
}

VelocityEstimate VelocityCache::get(double T, double gamma, double tol, double y0, const PotentialPtr& potential) {
  auto quantize = [](double v) { return static_cast<std::int64_t>(std::llround(v * 1e12)); };
  const Key key{potential.get(), quantize(gamma), quantize(T), quantize(tol), quantize(y0)};
  {
    std::shared_lock lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  }
  const auto est = homogenized_velocity(T, gamma, tol, y0, potential);
  std::unique_lock lock(mutex_);
  return entries_.emplace(key, est).first->second;
}

std::size_t VelocityCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

// ---------------------------------------------------------------------------

namespace {

constexpr int kMaxBisections = 60;

struct SlopePeak {
  double location;  // y_M in (0, 1/2)
  double height;    // W'(y_M)
};

// Locates the single local maximum of W' on (0, 1/2); a monotone W' peaks at
// the right end of the interval.
SlopePeak find_slope_peak(const PeriodicPotential& w) {
  constexpr int n = 4096;
  constexpr double right = 0.5 * (1.0 - 1e-12);
  std::vector<double> d(n + 1);
  for (int j = 0; j <= n; ++j) d[j] = w.derivative(j == n ? right : 0.5 * j / n);
  int peaks = 0, arg = 0;
  for (int j = 1; j < n; ++j) {
    if (d[j] > d[j - 1] && d[j] >= d[j + 1]) ++peaks;
    if (d[j] > d[arg]) arg = j;
  }
  if (d[n] > d[arg]) arg = n;
  if (peaks > 1) fail(ErrorCode::hypothesis_violated, "W' has more than one local maximum in (0, 1/2)");
  if (d[arg] <= 0.0) fail(ErrorCode::hypothesis_violated, "W' has no positive maximum in (0, 1/2)");

  double lo = 0.5 * std::max(0, arg - 1) / n, hi = std::min(right, 0.5 * (arg + 1) / n);
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 100; ++it) {
    const double a = hi - r * (hi - lo), b = lo + r * (hi - lo);
    if (w.derivative(a) >= w.derivative(b))
      hi = b;
    else
      lo = a;
  }
  const double loc = 0.5 * (lo + hi);
  const double h = w.derivative(loc);
  return h >= d[arg] ? SlopePeak{loc, h} : SlopePeak{arg == n ? right : 0.5 * arg / n, d[arg]};
}

template <class Pinned>
PinningReport bisect_threshold(double gamma, double tol, PinningMethod method, Pinned&& is_pinned) {
  PinningReport report;
  report.gamma = gamma;
  report.method = method;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < kMaxBisections && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    (is_pinned(mid) ? lo : hi) = mid;
  }
  report.low = lo;
  report.high = hi;
  report.threshold = 0.5 * (lo + hi);
  return report;
}

}  // namespace

PinningReport pinning_threshold_criterion(double gamma, double tol, const PotentialPtr& potential) {
  require(potential != nullptr, "threshold needs a potential");
  require(std::isfinite(gamma) && gamma > 0.0, "gamma must be positive");
  require(std::isfinite(tol) && tol >= 1e-8, "criterion tolerance must be >= 1e-8");
  const auto& w = *potential;
  const SlopePeak peak = find_slope_peak(w);

  auto is_pinned = [&](double T) {
    if (T >= peak.height) return false;  // T y + W(y) has no local minimizer
    double lo = -peak.location, hi = 0.0;  // T + W' changes sign on this branch
    for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
      const double mid = 0.5 * (lo + hi);
      (T + w.derivative(mid) < 0.0 ? lo : hi) = mid;
    }
    const double y_t = 0.5 * (lo + hi);
    const auto result = prox_step(linear_prox_problem(T, gamma, potential, y_t));
    return std::abs(result.minimizer - y_t) <= 1e-9;
  };
  return bisect_threshold(gamma, tol, PinningMethod::criterion, is_pinned);
}

PinningReport pinning_threshold_velocity(double gamma, double tol, const PotentialPtr& potential) {
  require(potential != nullptr, "threshold needs a potential");
  require(std::isfinite(gamma) && gamma > 0.0, "gamma must be positive");
  require(std::isfinite(tol) && tol >= 1e-6, "velocity-bisection tolerance must be >= 1e-6");
  // A pinned orbit either trips the in-run test or still has a transient mean
  // displacement below its error bound.
  auto is_pinned = [&](double T) {
    const auto est = homogenized_velocity(T, gamma, 1e-3, 0.0, potential);
    return est.pinned || est.value <= est.error_bound;
  };
  return bisect_threshold(gamma, tol, PinningMethod::velocity_bisection, is_pinned);
}

PinningReport pinning_threshold(double gamma, double tol, const PotentialPtr& potential) {
  try {
    return pinning_threshold_criterion(gamma, std::max(tol, 1e-8), potential);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::hypothesis_violated) throw;
  }
  return pinning_threshold_velocity(gamma, std::max(tol, 1e-6), potential);
}

// ---------------------------------------------------------------------------

std::optional<PeriodicOrbitReport> detect_periodic_orbit(double T, double gamma, std::int64_t q_max,
                                                         const PotentialPtr& potential, double y0) {
  require(potential != nullptr, "periodic orbit search needs a potential");
  require(q_max >= 1 && q_max <= 10000, "q_max must be in [1, 10^4]");
  require(std::isfinite(T) && std::isfinite(y0), "T and y0 must be finite");
  constexpr double tol = 1e-8;

  LinearizedMap step(T, gamma, potential);
  double y = y0;
  const std::int64_t burn_in = std::max<std::int64_t>(4000, 10 * q_max);
  for (std::int64_t i = 0; i < burn_in; ++i) y = step(y);

  std::vector<double> orbit(static_cast<std::size_t>(3 * q_max + 1));
  orbit[0] = y;
  for (std::size_t i = 1; i < orbit.size(); ++i) orbit[i] = step(orbit[i - 1]);

  for (std::int64_t q = 1; q <= q_max; ++q) {
    const double shift = orbit[q] - orbit[0];
    const double p = std::round(shift);
    double residual = std::abs(shift - p);
    if (residual > tol) continue;
    residual = std::max({residual, std::abs(orbit[2 * q] - orbit[q] - p), std::abs(orbit[3 * q] - orbit[2 * q] - p)});
    if (residual > tol) continue;
    return PeriodicOrbitReport{T, gamma, q, static_cast<std::int64_t>(p), orbit[0], residual};
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

namespace {

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                        double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// (int over one period of 1/den)^{-1}, or 0 when 1/den is not integrable.
double harmonic_mean_rate(const std::function<double(double)>& den) {
  constexpr double edge = 0.5 - 1e-14;  // stay inside the well around s = 0
  constexpr int n = 100000;
  constexpr double vanish = 1e-9;
  double lowest = std::min(den(-edge), den(edge));
  int run = 0, longest = 0;
  for (int i = 0; i < n; ++i) {
    const double d = den(-0.5 + (i + 0.5) / n);
    lowest = std::min(lowest, d);
    run = std::abs(d) <= vanish ? run + 1 : 0;
    longest = std::max(longest, run);
  }
  if (longest >= 2)
    fail(ErrorCode::quadrature_singularity, "denominator vanishes on a set of positive measure");
  if (lowest <= vanish) return 0.0;
  auto inv = [&](double s) { return 1.0 / den(s); };
  const double fa = inv(-edge), fm = inv(0.0), fb = inv(edge);
  const double whole = (2 * edge) / 6.0 * (fa + 4 * fm + fb);
  return 1.0 / adaptive_simpson(inv, -edge, edge, fa, fm, fb, whole, 1e-13, 50);
}

}  // namespace

double g_infinity_printed(double z, const PeriodicPotential& w) {
  return harmonic_mean_rate([&](double s) { return z + w.value(s); });
}

double g_infinity_slope(double z, const PeriodicPotential& w) {
  return harmonic_mean_rate([&](double s) { return z + w.derivative(s); });
}

double g_infinity_flow(double z, const PeriodicPotential& w) {
  require(std::isfinite(z), "z must be finite");
  constexpr int n = 100000;
  double lowest = z + w.derivative(0.5 * (1.0 - 1e-12));
  for (int i = 0; i < n; ++i) lowest = std::min(lowest, z + w.derivative(static_cast<double>(i) / n));
  if (lowest <= 1e-9) return 0.0;

  constexpr double periods = 20.0;
  const double dt = 1e-4 / (z + w.lipschitz_bound());
  auto rhs = [&](double y) { return -(z + w.derivative(y)); };
  double y = 0.0, t = 0.0;
  for (;;) {
    const double k1 = rhs(y);
    const double k2 = rhs(y + 0.5 * dt * k1);
    const double k3 = rhs(y + 0.5 * dt * k2);
    const double k4 = rhs(y + dt * k3);
    const double next = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    if (next <= -periods) {
      const double crossing = t + dt * (y + periods) / (y - next);
      return periods / crossing;
    }
    y = next;
    t += dt;
  }
}

ExtremeLimits extreme_limits(double z, double gamma_small, double gamma_large, const PotentialPtr& potential) {
  require(potential != nullptr, "extreme limits need a potential");
  require(std::isfinite(z) && z > 0.0, "z must be positive");
  require(gamma_small > 0.0 && gamma_small <= 0.05, "gamma_small must be in (0, 0.05]");
  require(std::isfinite(gamma_large) && gamma_large >= 50.0, "gamma_large must be >= 50");

  ExtremeLimits out;
  out.z = z;
  out.g_infinity_printed = g_infinity_printed(z, *potential);
  out.g_infinity_slope = g_infinity_slope(z, *potential);
  out.g_infinity_oracle = g_infinity_flow(z, *potential);

  // Relative accuracy 1e-3 on gamma f_gamma, well inside the 5% comparisons.
  const double small_tol = std::max(1e-8, 1e-3 * z / gamma_small);
  out.small_gamma_velocity = gamma_small * homogenized_velocity(z, gamma_small, small_tol, 0.0, potential).value;
  const double large_scale = std::max(out.g_infinity_oracle, 1e-3 * z);
  const double large_tol = std::max(1e-8, 1e-3 * large_scale / gamma_large);
  out.large_gamma_velocity = gamma_large * homogenized_velocity(z, gamma_large, large_tol, 0.0, potential).value;
  return out;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  require(n >= 1, "grid needs at least one point");
  require(std::isfinite(lo) && std::isfinite(hi), "grid bounds must be finite");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = n == 1 ? lo : (i + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
  return out;
}

std::vector<PhaseCell> phase_sweep(const std::vector<double>& gammas, const std::vector<double>& slopes, double tol,
                                   const PotentialPtr& potential, int threads) {
  require(potential != nullptr, "phase sweep needs a potential");
  require(!gammas.empty() && !slopes.empty(), "phase sweep needs non-empty grids");
  std::vector<PhaseCell> cells(gammas.size() * slopes.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    cells[i].gamma = gammas[i / slopes.size()];
    cells[i].T = slopes[i % slopes.size()];
  }

  std::vector<std::exception_ptr> errors(cells.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next++) < cells.size();) {
      auto& cell = cells[i];
      try {
        cell.estimate = homogenized_velocity(cell.T, cell.gamma, tol, 0.0, potential);
      } catch (const BudgetExceeded& e) {
        cell.budget_exceeded = true;
        cell.estimate = {cell.T, cell.gamma, e.best_estimate, e.error_bound, e.iterations, 0.0, false};
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const auto count = std::min<std::size_t>(cells.size(), threads > 0 ? static_cast<unsigned>(threads) : hw);
  std::vector<std::thread> pool;
  for (std::size_t k = 1; k < count; ++k) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return cells;
}

}  // namespace wiggly
