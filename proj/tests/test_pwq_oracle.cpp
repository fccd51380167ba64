#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "wiggly/dynamics.hpp"
#include "wiggly/error.hpp"
#include "wiggly/pwq_oracle.hpp"

using namespace wiggly;

namespace {

// First s with y_s < -1/2 along the generic orbit.
std::int64_t simulated_escape(double T, double gamma, double y0) {
  LinearizedMap step(T, gamma, make_pwq_potential());
  double y = y0;
  for (std::int64_t s = 1; s < 100000; ++s) {
    y = step(y);
    if (y < -0.5) return s;
  }
  return -1;
}

}  // namespace

TEST_CASE("threshold values") {
  CHECK(pwq::threshold(2.0) == 0.5);
  CHECK(pwq::threshold(10.0) == doctest::Approx(10.0 / 12.0));
  CHECK(pwq::t_infinity() == 1.0);
  CHECK_THROWS_AS(pwq::threshold(0.0), Error);
  const auto s = pwq::PwqState::make(0.6, 2.0);
  CHECK(s.T_gamma == 0.5);
  CHECK(s.delta_T == doctest::Approx(0.1));
}

TEST_CASE("candidates are stationary points of the well objective") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0), g(0.1, 10.0);
  for (int i = 0; i < 100; ++i) {
    const double T = u(rng), gamma = g(rng), y0 = 0.5 * u(rng);
    for (std::int64_t k : {-1, 0, 1}) {
      const double y = pwq::candidate(k, T, gamma, y0);
      CHECK(T + 2 * (y - double(k)) + gamma * (y - y0) == doctest::Approx(0.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("psi sign decides the jump") {
  // At T = 0.6, gamma = 2 the in-well fixed point -0.3 is not stable under selection.
  CHECK(pwq::psi(-0.3, 0.6, 2.0) < 0.0);
  CHECK(pwq::psi(0.4, 0.6, 2.0) > 0.0);
  // psi compared with a brute-force minimization of the step objective.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> y_d(-0.5, 0.5), t_d(0.0, 1.0), g_d(0.2, 8.0);
  for (int i = 0; i < 50; ++i) {
    const double y0 = y_d(rng), T = t_d(rng), gamma = g_d(rng);
    const double p = pwq::psi(y0, T, gamma);
    if (std::abs(p) < 1e-6) continue;
    auto f = [&](double y) {
      const double d = y - std::round(y);
      return T * y + d * d + 0.5 * gamma * (y - y0) * (y - y0);
    };
    const double best = oracle::grid_minimize(f, -2.0, 2.0, 200000).location;
    CHECK((best < -0.5) == (p < 0.0));
  }
}

TEST_CASE("in-well orbit throws once the orbit leaves") {
  CHECK_NOTHROW(pwq::in_well_orbit(0.0, 0.3, 2.0, 100));
  CHECK_THROWS_AS(pwq::in_well_orbit(0.0, 0.6, 2.0, 100), Error);
  try {
    pwq::in_well_orbit(0.0, 0.6, 2.0, 100);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::well_escape);
  }
}

TEST_CASE("escape steps count the in-well iterates before the jump") {
  // Integer log ratio: the worst-case orbit lands on the jump line and jumps at step h.
  CHECK(pwq::escape_steps(0.6, 2.0) == 4);
  CHECK(simulated_escape(0.6, 2.0, 0.5 - 1e-9) == 4);
  // Otherwise y_h is the first iterate below -T/2 + delta_T and the jump is y_{h+1}.
  for (double gamma : {0.5, 1.0, 2.0, 5.0, 10.0}) {
    const double tg = pwq::threshold(gamma);
    for (double dt : {0.01, 0.03, 0.1, 0.15}) {
      const double T = tg + dt * (1.0 - tg);
      const auto h = pwq::escape_steps(T, gamma);
      const auto s = pwq::PwqState::make(T, gamma);
      const auto orbit = pwq::in_well_orbit(0.5 - 1e-9, T, gamma, h);
      CHECK(orbit[static_cast<std::size_t>(h)] < -T / 2 + s.delta_T);
      CHECK(orbit[static_cast<std::size_t>(h - 1)] >= -T / 2 + s.delta_T);
      CHECK(simulated_escape(T, gamma, 0.5 - 1e-9) == h + 1);
    }
  }
  CHECK_THROWS_AS(pwq::escape_steps(0.5, 2.0), Error);
}

TEST_CASE("velocity estimate is defined above the threshold only") {
  CHECK(pwq::velocity_estimate(0.5 + 1e-3, 2.0) > 0.0);
  CHECK_THROWS_AS(pwq::velocity_estimate(0.4, 2.0), Error);
}
