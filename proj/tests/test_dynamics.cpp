#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "wiggly/dynamics.hpp"
#include "wiggly/error.hpp"
#include "wiggly/pwq_oracle.hpp"

using namespace wiggly;

namespace {

OscillatingEnergy quadratic_energy(PotentialPtr w, double eps) {
  return OscillatingEnergy(ConvexDrive::quadratic(), std::move(w), eps);
}

}  // namespace

TEST_CASE("critical config derives tau and validates") {
  auto c = MMConfig::critical(quadratic_energy(make_pwq_potential(), 0.1), 2.0, 1.0, 10);
  CHECK(c.tau == doctest::Approx(0.05));
  c.tau = 0.06;
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK_THROWS_AS(MMConfig::critical(quadratic_energy(make_pwq_potential(), 0.1), 2.0, 1.0, 0), Error);
  CHECK_THROWS_AS(MMConfig::critical(quadratic_energy(make_pwq_potential(), 0.1), -1.0, 1.0, 5), Error);
}

TEST_CASE("without oscillation the scheme is implicit Euler") {
  const auto c = MMConfig::critical(quadratic_energy(make_zero_potential(), 0.1), 1.0, 1.0, 20);
  const auto traj = run_mm(c);
  REQUIRE(traj.states.size() == 21);
  for (std::size_t k = 0; k < traj.states.size(); ++k)
    CHECK(traj.states[k] == doctest::Approx(std::pow(1.0 / (1.0 + c.tau), double(k))).epsilon(1e-12));
  CHECK(traj.monotone_direction == Direction::nonincreasing);
  CHECK_FALSE(traj.pinned_step.has_value());
}

TEST_CASE("pwq runs: moving above the threshold, pinned below") {
  const auto w = make_pwq_potential();
  // h'(x0) = 1 > T_2 = 1/2: moves; stops once h' drops below the threshold.
  const auto moving = run_mm(MMConfig::critical(quadratic_energy(w, 0.01), 2.0, 1.0, 2000));
  CHECK(moving.monotone_direction == Direction::nonincreasing);
  CHECK(moving.states.back() < 0.6);
  CHECK(moving.states.back() > 0.45);

  // h'(x0) = 0.4 < 1/2: fixed point within a few hundred steps.
  const auto pinned = run_mm(MMConfig::critical(quadratic_energy(w, 0.01), 2.0, 0.4, 2000));
  REQUIRE(pinned.pinned_step.has_value());
  CHECK(*pinned.pinned_step < 200);
  CHECK(pinned.states.size() == 2001);
  CHECK(pinned.states.back() == pinned.states[static_cast<std::size_t>(*pinned.pinned_step)]);

  // Mirror image moves upward.
  const auto up = run_mm(MMConfig::critical(quadratic_energy(w, 0.01), 2.0, -1.0, 100));
  CHECK(up.monotone_direction == Direction::nondecreasing);
}

TEST_CASE("state cap thins the record") {
  RunOptions opt;
  opt.max_states = 11;
  const auto traj = run_mm(MMConfig::critical(quadratic_energy(make_cosine_potential(), 0.01), 1.0, 1.0, 100), opt);
  CHECK(traj.stride == 10);
  CHECK(traj.states.size() == 11);
  CHECK(traj.state_at(55 * traj.tau) == traj.states[5]);
}

TEST_CASE("state_at is piecewise constant") {
  const auto traj = run_mm(MMConfig::critical(quadratic_energy(make_pwq_potential(), 0.1), 2.0, 1.0, 10));
  CHECK(traj.state_at(-1.0) == traj.states[0]);
  CHECK(traj.state_at(2.5 * traj.tau) == traj.states[2]);
  CHECK(traj.state_at(100.0) == traj.states.back());
}

TEST_CASE("linearized orbit follows the in-well closed form") {
  const double T = 0.3, gamma = 2.0;
  const auto orbit = run_linearized(T, gamma, 0.2, 30, make_pwq_potential());
  const auto closed = pwq::in_well_orbit(0.2, T, gamma, 30);
  for (std::size_t h = 0; h < closed.size(); ++h) CHECK(orbit.y[h] == doctest::Approx(closed[h]).epsilon(1e-12));
  LinearizedMap map(T, gamma, make_pwq_potential());
  CHECK(map(0.2) == orbit.y[1]);
}

TEST_CASE("sandwich bounds hold on random configurations") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> eps_d(0.005, 0.2), gamma_d(0.2, 10.0), x0_d(-2.0, 2.0), delta_d(0.0, 0.5);
  const PotentialPtr ws[] = {make_pwq_potential(), make_cosine_potential()};
  for (int i = 0; i < 100; ++i) {
    const auto c = MMConfig::critical(quadratic_energy(ws[i % 2], eps_d(rng)), gamma_d(rng), x0_d(rng), 1);
    CHECK(sandwich_check(c, delta_d(rng), 200));
  }
}

TEST_CASE("sandwich example from x0 = 1") {
  const auto c = MMConfig::critical(quadratic_energy(make_pwq_potential(), 0.01), 2.0, 1.0, 1);
  CHECK(sandwich_check(c, 0.1, 200));
  CHECK_THROWS_AS(sandwich_check(c, -0.1, 200), Error);
}

TEST_CASE("trajectory csv") {
  const auto traj = run_mm(MMConfig::critical(quadratic_energy(make_pwq_potential(), 0.1), 2.0, 1.0, 3));
  std::ostringstream out;
  write_trajectory_csv(traj, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,x");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 3);
}
