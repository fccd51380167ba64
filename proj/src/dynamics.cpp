#include "wiggly/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "wiggly/error.hpp"
#include "wiggly/io.hpp"

namespace wiggly {

const char* to_string(Direction d) noexcept {
  switch (d) {
    case Direction::nonincreasing: return "nonincreasing";
    case Direction::nondecreasing: return "nondecreasing";
    case Direction::constant: return "constant";
  }
  return "unknown";
}

MMConfig MMConfig::critical(OscillatingEnergy energy, double gamma, double x0, std::int64_t steps) {
  require(std::isfinite(gamma) && gamma > 0.0, "gamma must be positive");
  const double tau = energy.epsilon / gamma;
  MMConfig config{std::move(energy), tau, gamma, x0, steps};
  config.validate();
  return config;
}

void MMConfig::validate() const {
  require(std::isfinite(gamma) && gamma > 0.0, "gamma must be positive");
  require(std::isfinite(tau) && tau > 0.0, "tau must be positive");
  require(std::abs(gamma * tau - energy.epsilon) <= 1e-12 * energy.epsilon,
          "gamma * tau must equal epsilon");
  require(std::isfinite(x0), "x0 must be finite");
  require(steps >= 1, "steps must be >= 1");
}

double Trajectory::state_at(double t) const {
  require(!states.empty(), "empty trajectory");
  if (t <= 0.0) return states.front();
  const auto k = static_cast<std::int64_t>(std::floor(t / tau));
  const auto index = static_cast<std::size_t>(std::min<std::int64_t>(k / stride, states.size() - 1));
  return states[index];
}

Trajectory run_mm(const MMConfig& config, const RunOptions& options) {
  config.validate();
  require(options.max_states >= 2, "max_states must be >= 2");

  Trajectory traj;
  traj.tau = config.tau;
  const std::int64_t total = config.steps + 1;
  traj.stride = (total + options.max_states - 1) / options.max_states;
  traj.times.reserve(static_cast<std::size_t>(std::min(total, options.max_states) + 1));
  traj.states.reserve(traj.times.capacity());

  auto record = [&](std::int64_t k, double x) {
    if (k % traj.stride == 0 || k == config.steps) {
      traj.times.push_back(static_cast<double>(k) * config.tau);
      traj.states.push_back(x);
    }
  };

  ProxProblem problem = energy_prox_problem(config.energy, config.tau, config.x0);
  const double lip = config.energy.oscillation->lipschitz_bound();
  double x = config.x0;
  record(0, x);
  int quiet = 0;
  for (std::int64_t k = 1; k <= config.steps; ++k) {
    problem.center = x;
    problem.slope_bound = std::abs(config.energy.drive.derivative(x)) + lip;
    const double next = prox_step(problem).minimizer;
    const double delta = next - x;

    if (k == 1) {
      traj.monotone_direction = delta < 0.0   ? Direction::nonincreasing
                                : delta > 0.0 ? Direction::nondecreasing
                                              : Direction::constant;
    } else {
      const bool reversed = (traj.monotone_direction == Direction::nonincreasing && delta > 1e-10) ||
                            (traj.monotone_direction == Direction::nondecreasing && delta < -1e-10) ||
                            (traj.monotone_direction == Direction::constant && std::abs(delta) > 1e-10);
      if (reversed)
        fail(ErrorCode::monotonicity_violation,
             "minimizing movement reversed direction at step " + std::to_string(k));
    }

    quiet = std::abs(delta) <= kPinnedTolerance * std::max(1.0, std::abs(x)) ? quiet + 1 : 0;
    x = next;
    record(k, x);
    if (quiet >= kPinnedSteps && !traj.pinned_step) {
      traj.pinned_step = k;
      if (options.stop_when_pinned) {
        for (std::int64_t j = k + 1; j <= config.steps; ++j) record(j, x);
        break;
      }
    }
  }
  return traj;
}

LinearizedMap::LinearizedMap(double T, double gamma, PotentialPtr potential)
    : problem_(linear_prox_problem(T, gamma, std::move(potential), 0.0)) {}

double LinearizedMap::operator()(double y) const {
  problem_.center = y;
  return prox_step(problem_).minimizer;
}

LinearizedOrbit run_linearized(double T, double gamma, double y0, std::int64_t n, PotentialPtr potential) {
  require(n >= 1, "run_linearized needs n >= 1");
  require(std::isfinite(y0), "y0 must be finite");
  LinearizedMap step(T, gamma, std::move(potential));
  LinearizedOrbit orbit{T, gamma, {}};
  orbit.y.reserve(static_cast<std::size_t>(n) + 1);
  orbit.y.push_back(y0);
  for (std::int64_t i = 0; i < n; ++i) orbit.y.push_back(step(orbit.y.back()));
  return orbit;
}

bool sandwich_check(const MMConfig& config, double delta, std::int64_t n) {
  config.validate();
  require(std::isfinite(delta) && delta >= 0.0, "delta must be >= 0");
  require(n >= 1, "n must be >= 1");
  const auto& e = config.energy;
  const double x0 = config.x0;
  const double t_plus = e.drive.derivative(x0 + delta);
  const double t_minus = e.drive.derivative(x0 - delta);
  const double lip = e.oscillation->lipschitz_bound();
  const double beta = 0.5 / config.tau;

  ProxProblem full = energy_prox_problem(e, config.tau, x0);
  ProxProblem lower{Objective::linear(t_plus, e.oscillation, e.epsilon), std::abs(t_plus) + lip, beta, x0};
  ProxProblem upper{Objective::linear(t_minus, e.oscillation, e.epsilon), std::abs(t_minus) + lip, beta, x0};

  constexpr double tol = 1e-9;
  double x = x0, xl = x0, xu = x0;
  bool check_lower = true, check_upper = true;
  for (std::int64_t i = 1; i <= n && (check_lower || check_upper); ++i) {
    full.center = x;
    full.slope_bound = std::abs(e.drive.derivative(x)) + lip;
    lower.center = xl;
    upper.center = xu;
    x = prox_step(full).minimizer;
    xl = prox_step(lower).minimizer;
    xu = prox_step(upper).minimizer;
    check_lower = check_lower && x < x0 + delta + tol && xl < x0 + delta + tol;
    check_upper = check_upper && x > x0 - delta - tol && xu > x0 - delta - tol;
    if (check_lower && xl > x + tol) return false;
    if (check_upper && x > xu + tol) return false;
  }
  return true;
}

void write_trajectory_csv(const Trajectory& trajectory, std::ostream& out) {
  out << "t,x\n";
  for (std::size_t k = 1; k < trajectory.states.size(); ++k)
    out << format_real(trajectory.times[k]) << ',' << format_real(trajectory.states[k]) << '\n';
}

}  // namespace wiggly
