#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>
#include <vector>

#include "wiggly/error.hpp"
#include "wiggly/homogenization.hpp"
#include "wiggly/pwq_oracle.hpp"

using namespace wiggly;

namespace {

// Exact pwq step: best of the affine candidates in nearby wells, leftmost on ties.
double pwq_affine_step(double y, double T, double gamma) {
  double best_y = 0.0, best_v = INFINITY;
  const auto k0 = static_cast<std::int64_t>(std::floor(y));
  for (std::int64_t k = k0 - 3; k <= k0 + 3; ++k) {
    double c = pwq::candidate(k, T, gamma, y);
    c = std::clamp(c, k - 0.5, k + 0.5);
    const double v = T * c + (c - k) * (c - k) + 0.5 * gamma * (c - y) * (c - y);
    if (v < best_v) {
      best_v = v;
      best_y = c;
    }
  }
  return best_y;
}

double pwq_affine_velocity(double T, double gamma, std::int64_t n) {
  double y = 0.0;
  for (std::int64_t i = 0; i < n; ++i) y = pwq_affine_step(y, T, gamma);
  return -y / static_cast<double>(n);
}

PotentialPtr two_bump_potential() {
  // W' = sin(2 pi y) + 0.5 sin(6 pi y) peaks twice on (0, 1/2).
  std::vector<double> v(2049);
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double y = static_cast<double>(j) / 2048.0;
    v[j] = -(std::cos(2 * M_PI * y) + std::cos(6 * M_PI * y) / 6.0) / (2 * M_PI);
  }
  return make_tabulated_potential(v);
}

}  // namespace

TEST_CASE("pwq velocity matches the affine-map oracle") {
  const auto w = make_pwq_potential();
  for (auto [T, gamma] : {std::pair{0.6, 2.0}, {0.9, 2.0}, {0.4, 0.5}, {0.95, 10.0}, {0.75, 1.0}}) {
    const auto est = homogenized_velocity(T, gamma, 1e-4, 0.0, w);
    CHECK_FALSE(est.pinned);
    CHECK(est.error_bound <= 1e-4);
    CHECK(std::abs(est.value - pwq_affine_velocity(T, gamma, 1 << 18)) <= est.error_bound + 1e-5);
  }
  // Period-4 orbit with one well per period.
  CHECK(homogenized_velocity(0.6, 2.0, 1e-5, 0.0, w).value == doctest::Approx(0.25).epsilon(1e-5));
}

TEST_CASE("velocity below and at the threshold is an exact zero") {
  const auto w = make_pwq_potential();
  for (double T : {0.0, 0.2, 0.5}) {
    const auto est = homogenized_velocity(T, 2.0, 1e-6, 0.3, w);
    CHECK(est.pinned);
    CHECK(est.value == 0.0);
    CHECK(est.error_bound == 0.0);
  }
}

TEST_CASE("velocity does not depend on y0") {
  const auto c = make_cosine_potential();
  const auto a = homogenized_velocity(0.8, 1.5, 1e-4, 0.0, c);
  const auto b = homogenized_velocity(0.8, 1.5, 1e-4, 0.37, c);
  const auto d = homogenized_velocity(0.8, 1.5, 1e-4, -12.9, c);
  CHECK(std::abs(a.value - b.value) <= a.error_bound + b.error_bound);
  CHECK(std::abs(a.value - d.value) <= a.error_bound + d.error_bound);
}

TEST_CASE("velocity input errors and budget") {
  const auto w = make_pwq_potential();
  CHECK_THROWS_AS(homogenized_velocity(-0.1, 1.0, 1e-4, 0.0, w), Error);
  CHECK_THROWS_AS(homogenized_velocity(0.5, 0.0, 1e-4, 0.0, w), Error);
  CHECK_THROWS_AS(homogenized_velocity(0.5, 1.0, 1e-9, 0.0, w), Error);
  CHECK_THROWS_AS(homogenized_velocity(0.5, 1.0, 1e-4, 0.0, nullptr), Error);
  try {
    homogenized_velocity(0.9, 2.0, 1e-8, 0.0, w);
    FAIL("expected BudgetExceeded");
  } catch (const BudgetExceeded& e) {
    CHECK(e.code() == ErrorCode::budget_exceeded);
    CHECK(e.iterations == kVelocityMaxIterations);
    CHECK(e.error_bound > 1e-8);
    CHECK(e.best_estimate == doctest::Approx(0.5).epsilon(1e-5));
  }
}

TEST_CASE("velocity cache returns stored estimates under concurrency") {
  VelocityCache cache;
  const auto w = make_pwq_potential();
  std::vector<std::thread> pool;
  std::vector<double> got(8);
  for (int i = 0; i < 8; ++i)
    pool.emplace_back([&, i] { got[i] = cache.get(0.7 + 0.05 * (i % 2), 2.0, 1e-3, 0.0, w).value; });
  for (auto& t : pool) t.join();
  CHECK(cache.size() == 2);
  for (int i = 0; i < 8; ++i) CHECK(got[i] == got[i % 2]);
  CHECK(cache.get(0.7, 2.0, 1e-3, 0.0, w).value == homogenized_velocity(0.7, 2.0, 1e-3, 0.0, w).value);
}

TEST_CASE("pwq thresholds from both methods") {
  const auto w = make_pwq_potential();
  for (double gamma : {0.5, 1.0, 2.0, 10.0, 50.0}) {
    const double exact = pwq::threshold(gamma);
    const auto a = pinning_threshold_criterion(gamma, 1e-8, w);
    const auto b = pinning_threshold_velocity(gamma, 1e-6, w);
    CHECK(a.low <= exact);
    CHECK(a.high >= exact);
    CHECK(std::abs(a.threshold - exact) <= 1e-8);
    CHECK(std::abs(b.threshold - exact) <= 1e-6);
    CHECK(a.method == PinningMethod::criterion);
    CHECK(b.method == PinningMethod::velocity_bisection);
  }
}

TEST_CASE("cosine thresholds agree across methods and grow with gamma") {
  const auto c = make_cosine_potential();
  double previous = 0.0;
  for (double gamma : {0.5, 1.0, 4.0}) {
    const auto a = pinning_threshold_criterion(gamma, 1e-8, c);
    const auto b = pinning_threshold_velocity(gamma, 1e-6, c);
    CHECK(std::abs(a.threshold - b.threshold) <= 2e-6);
    CHECK(a.threshold > previous);
    CHECK(a.threshold < 1.0);
    previous = a.threshold;
  }
}

TEST_CASE("criterion hypothesis") {
  CHECK_THROWS_AS(pinning_threshold_criterion(1.0, 1e-8, make_zero_potential()), Error);
  const auto bumps = two_bump_potential();
  try {
    pinning_threshold_criterion(1.0, 1e-8, bumps);
    FAIL("expected hypothesis_violated");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::hypothesis_violated);
  }
  const auto fallback = pinning_threshold(1.0, 1e-6, bumps);
  CHECK(fallback.method == PinningMethod::velocity_bisection);
  CHECK(pinning_threshold(1.0, 1e-6, make_pwq_potential()).method == PinningMethod::criterion);
}

TEST_CASE("periodic orbits") {
  const auto w = make_pwq_potential();
  const auto four = detect_periodic_orbit(0.6, 2.0, 50, w);
  REQUIRE(four.has_value());
  CHECK(four->q == 4);
  CHECK(four->p == -1);
  CHECK(four->residual <= 1e-8);

  const auto fixed = detect_periodic_orbit(0.3, 2.0, 50, w);
  REQUIRE(fixed.has_value());
  CHECK(fixed->q == 1);
  CHECK(fixed->p == 0);

  for (double T : {0.55, 0.7, 0.8, 0.9}) {
    const auto orbit = detect_periodic_orbit(T, 2.0, 200, w);
    if (!orbit) continue;
    const auto est = homogenized_velocity(T, 2.0, 1e-5, 0.0, w);
    CHECK(std::abs(std::abs(double(orbit->p)) / double(orbit->q) - est.value) <= est.error_bound);
  }
  CHECK_THROWS_AS(detect_periodic_orbit(0.6, 2.0, 0, w), Error);
}

TEST_CASE("g_infinity closed forms") {
  const auto w = make_pwq_potential();
  const auto c = make_cosine_potential();
  for (double z : {1.2, 1.5, 2.0, 3.0, 10.0}) {
    CHECK(g_infinity_slope(z, *w) == doctest::Approx(2.0 / std::log((z + 1) / (z - 1))).epsilon(1e-9));
    CHECK(g_infinity_slope(z, *c) == doctest::Approx(std::sqrt(z * z - 1)).epsilon(1e-9));
    const double printed = std::sqrt(z) / (2.0 * std::atan(1.0 / (2.0 * std::sqrt(z))));
    CHECK(g_infinity_printed(z, *w) == doctest::Approx(printed).epsilon(1e-9));
    CHECK(g_infinity_flow(z, *w) == doctest::Approx(2.0 / std::log((z + 1) / (z - 1))).epsilon(1e-5));
    CHECK(g_infinity_flow(z, *c) == doctest::Approx(std::sqrt(z * z - 1)).epsilon(1e-5));
  }
  CHECK(g_infinity_slope(1.0, *w) == 0.0);
  CHECK(g_infinity_slope(0.5, *c) == 0.0);
  CHECK(g_infinity_flow(0.9, *c) == 0.0);
  CHECK(g_infinity_printed(0.1, *c) == 0.0);
  CHECK(g_infinity_printed(0.5, *c) > 0.0);
}

TEST_CASE("g_infinity quadrature singularity") {
  // Flat stretch: W' = 0 on a set of positive measure, so z + W' vanishes there at z = 0.
  std::vector<double> v(33, 0.0);
  for (int j = 9; j <= 23; ++j) v[j] = 0.1 * std::sin(M_PI * (j - 8) / 16.0);
  const auto flat = make_tabulated_potential(v);
  try {
    g_infinity_slope(0.0, *flat);
    FAIL("expected quadrature_singularity");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::quadrature_singularity);
  }
}

TEST_CASE("extreme limits for pwq") {
  const auto w = make_pwq_potential();
  const auto e = extreme_limits(2.0, 0.01, 100.0, w);
  CHECK(std::abs(e.small_gamma_velocity - 2.0) <= 0.05 * 2.0);
  CHECK(std::abs(e.large_gamma_velocity - e.g_infinity_oracle) <= 0.05 * e.g_infinity_oracle);
  CHECK(e.g_infinity_slope == doctest::Approx(e.g_infinity_oracle).epsilon(1e-5));
  CHECK_THROWS_AS(extreme_limits(2.0, 0.1, 100.0, w), Error);
  CHECK_THROWS_AS(extreme_limits(2.0, 0.01, 10.0, w), Error);
}

TEST_CASE("linspace grids") {
  CHECK(linspace(0.0, 1.0, 101)[50] == 0.5);
  CHECK(linspace(0.0, 1.0, 101).back() == 1.0);
  CHECK(linspace(2.0, 5.0, 1) == std::vector<double>{2.0});
  CHECK_THROWS_AS(linspace(0.0, 1.0, 0), Error);
}

TEST_CASE("phase sweep marks pinned cells below the threshold") {
  const auto gammas = linspace(0.5, 10.0, 4);
  const auto slopes = linspace(0.0, 1.0, 101);
  const auto cells = phase_sweep(gammas, slopes, 1e-3, make_pwq_potential());
  REQUIRE(cells.size() == 404);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    CHECK(c.gamma == gammas[i / 101]);
    CHECK(c.T == slopes[i % 101]);
    const double tg = pwq::threshold(c.gamma);
    if (c.T < tg - 0.01) CHECK(c.estimate.pinned);
    if (c.T > tg + 0.01) CHECK_FALSE(c.estimate.pinned);
    // f(T + m gamma) = f(T) + m, so every plateau edge T_gamma + m gamma is a
    // threshold; a grid point rounded onto one sits in the logarithmic regime.
    if (c.budget_exceeded) {
      const double m = std::round((c.T - tg) / c.gamma);
      CHECK(std::abs(c.T - tg - m * c.gamma) <= 1e-12);
    }
  }
  const auto serial = phase_sweep(gammas, slopes, 1e-3, make_pwq_potential(), 1);
  for (std::size_t i = 0; i < cells.size(); ++i) CHECK(serial[i].estimate.value == cells[i].estimate.value);
}

TEST_CASE("phase sweep keeps budget-capped cells") {
  const auto cells = phase_sweep({2.0}, {0.9}, 1e-8, make_pwq_potential(), 1);
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].budget_exceeded);
  CHECK(cells[0].estimate.value == doctest::Approx(0.5).epsilon(1e-5));
}
