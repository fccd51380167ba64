#include "wiggly/limit_ode.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <ostream>
#include <thread>

#include "wiggly/dynamics.hpp"
#include "wiggly/error.hpp"
#include "wiggly/io.hpp"

namespace wiggly {

double OdeRun::state_at(double t) const {
  require(!times.empty(), "empty ODE run");
  if (t <= times.front()) return states.front();
  if (t >= times.back()) return states.back();
  const auto hi = static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin());
  const std::size_t lo = hi - 1;
  const double h = times[hi] - times[lo];
  if (h <= 0.0) return states[hi];
  const double s = (t - times[lo]) / h;
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * states[lo] + (s3 - 2 * s2 + s) * h * derivs[lo] + (-2 * s3 + 3 * s2) * states[hi] +
         (s3 - s2) * h * derivs[hi];
}

OdeRun integrate_limit(double gamma, double x0, double t_end, const ConvexDrive& drive,
                       const PotentialPtr& potential, const LimitOptions& options) {
  require(potential != nullptr, "limit ODE needs a potential");
  require(std::isfinite(gamma) && gamma > 0.0, "gamma must be positive");
  require(std::isfinite(x0), "x0 must be finite");
  require(std::isfinite(t_end) && t_end > 0.0, "t_end must be positive");
  require(std::isfinite(options.tol) && options.tol > 0.0, "ODE tolerance must be positive");

  VelocityCache local;
  VelocityCache& cache = options.cache ? *options.cache : local;
  const double vel_tol = std::max(1e-8, options.tol / gamma);
  const double stop = pinning_threshold(gamma, 1e-8, potential).threshold + kPinnedSlopeMargin;

  auto pinned = [&](double x) { return std::abs(drive.derivative(x)) <= stop; };
  auto rhs = [&](double x) {
    const double T = drive.derivative(x);
    if (std::abs(T) <= stop) return 0.0;
    const double v = gamma * cache.get(std::abs(T), gamma, vel_tol, 0.0, potential).value;
    return T > 0.0 ? -v : v;
  };
  auto rk4 = [&](double x, double h, double k1) {
    const double k2 = rhs(x + 0.5 * h * k1);
    const double k3 = rhs(x + 0.5 * h * k2);
    const double k4 = rhs(x + h * k3);
    return x + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  };

  OdeRun run;
  run.gamma = gamma;
  run.x0 = x0;
  run.t_end = t_end;
  auto record = [&](double t, double x, double dx) {
    run.times.push_back(t);
    run.states.push_back(x);
    run.derivs.push_back(dx);
  };

  if (pinned(x0)) {
    run.pinned_at = 0.0;
    record(0.0, x0, 0.0);
    record(t_end, x0, 0.0);
    return run;
  }

  const double h_min = 1e-9 * t_end;
  double t = 0.0, x = x0, fx = rhs(x0);
  double h = t_end / 32.0;
  record(t, x, fx);
  while (t < t_end) {
    h = std::min(h, t_end - t);
    const double whole = rk4(x, h, fx);
    const double mid = rk4(x, 0.5 * h, fx);
    const double halves = rk4(mid, 0.5 * h, rhs(mid));
    const double err = std::abs(halves - whole) / 15.0;
    const double scale = err > 0.0 ? 0.9 * std::pow(options.tol * h / err, 0.25) : 4.0;
    if (err > options.tol * h && h > h_min) {
      h = std::max(h_min, h * std::max(0.1, scale));
      continue;
    }

    if (pinned(halves)) {
      // Move onto the level set |h'| = stop between x and the trial state.
      double out = x, in = halves;
      for (int it = 0; it < 200 && out != in; ++it) {
        const double m = 0.5 * (out + in);
        if (m == out || m == in) break;
        (pinned(m) ? in : out) = m;
      }
      const double t_pin = t + h * std::clamp((x - in) / (x - halves), 0.0, 1.0);
      run.pinned_at = t_pin;
      record(t_pin, in, 0.0);
      if (t_pin < t_end) record(t_end, in, 0.0);
      return run;
    }

    t = (t_end - (t + h) <= 1e-12 * t_end) ? t_end : t + h;
    x = halves;
    fx = rhs(x);
    record(t, x, fx);
    h *= std::min(4.0, scale);
  }
  return run;
}

// ---------------------------------------------------------------------------

namespace {

void check_epsilons(const std::vector<double>& epsilons) {
  require(epsilons.size() >= 3, "convergence study needs at least 3 epsilons");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    require(std::isfinite(epsilons[i]) && epsilons[i] > 0.0, "epsilons must be positive");
    require(i == 0 || epsilons[i] < epsilons[i - 1], "epsilons must be strictly decreasing");
  }
}

}  // namespace

std::vector<ConvergenceRow> convergence_study(const OdeRun& limit, const std::vector<double>& epsilons,
                                              const ConvexDrive& drive, const PotentialPtr& potential,
                                              const ConvergenceOptions& options) {
  check_epsilons(epsilons);
  require(options.samples >= 2, "need at least 2 sample times");
  require(!limit.times.empty(), "empty limit run");

  std::vector<ConvergenceRow> rows(epsilons.size());
  std::vector<std::exception_ptr> errors(epsilons.size());
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    for (std::size_t i; (i = next++) < epsilons.size();) {
      try {
        const double eps = epsilons[i];
        const double tau = eps / limit.gamma;
        const auto steps = static_cast<std::int64_t>(std::ceil(limit.t_end / tau)) + 1;
        const auto traj = run_mm(MMConfig::critical(OscillatingEnergy(drive, potential, eps), limit.gamma, limit.x0, steps));
        double sup = 0.0;
        for (int j = 0; j < options.samples; ++j) {
          const double t = limit.t_end * j / (options.samples - 1);
          sup = std::max(sup, std::abs(traj.state_at(t) - limit.state_at(t)));
        }
        rows[i] = {eps, sup};
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const auto count = std::min<std::size_t>(epsilons.size(), options.threads > 0 ? options.threads : hw);
  std::vector<std::thread> pool;
  for (std::size_t k = 1; k < count; ++k) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

std::vector<ConvergenceRow> convergence_study(double gamma, double x0, double t_end,
                                              const std::vector<double>& epsilons, const ConvexDrive& drive,
                                              const PotentialPtr& potential, const ConvergenceOptions& options) {
  check_epsilons(epsilons);
  const auto limit = integrate_limit(gamma, x0, t_end, drive, potential, options.limit);
  return convergence_study(limit, epsilons, drive, potential, options);
}

void write_ode_csv(const OdeRun& run, std::ostream& out) {
  out << "t,x\n";
  for (std::size_t k = 0; k < run.times.size(); ++k)
    out << format_real(run.times[k]) << ',' << format_real(run.states[k]) << '\n';
}

void write_convergence_csv(const std::vector<ConvergenceRow>& rows, std::ostream& out) {
  out << "epsilon,sup_distance\n";
  for (const auto& r : rows) out << format_real(r.epsilon) << ',' << format_real(r.sup_distance) << '\n';
}

}  // namespace wiggly
