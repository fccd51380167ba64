#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "wiggly/wiggly.h"

namespace {

struct Potential {
  wg_potential* p = nullptr;
  explicit Potential(const char* name) { REQUIRE(wg_potential_builtin(name, &p) == WG_OK); }
  ~Potential() { wg_potential_free(p); }
};

struct Drive {
  wg_drive* h = nullptr;
  Drive() { REQUIRE(wg_drive_quadratic(1.0, &h) == WG_OK); }
  ~Drive() { wg_drive_free(h); }
};

}  // namespace

TEST_CASE("status names and last error") {
  CHECK(std::string(wg_status_name(WG_OK)) == "ok");
  CHECK(std::string(wg_status_name(WG_BUDGET_EXCEEDED)) == "budget_exceeded");
  CHECK(std::string(wg_status_name(WG_INTERNAL)) == "internal");
  CHECK(std::string(wg_status_name(static_cast<wg_status>(99))) == "unknown");

  wg_potential* p = nullptr;
  CHECK(wg_potential_builtin("sawtooth", &p) == WG_INVALID_INPUT);
  CHECK(p == nullptr);
  CHECK(std::string(wg_last_error()).size() > 0);
  CHECK(wg_potential_builtin(nullptr, &p) == WG_INVALID_INPUT);

  Potential ok("pwq");
  CHECK(std::string(wg_last_error()).empty());
}

TEST_CASE("potential handles") {
  Potential w("pwq");
  double v = 0.0, d = 0.0;
  REQUIRE(wg_potential_value(w.p, 0.25, &v) == WG_OK);
  REQUIRE(wg_potential_derivative(w.p, 0.25, &d) == WG_OK);
  CHECK(v == doctest::Approx(0.0625));
  CHECK(d == doctest::Approx(0.5));
  CHECK(std::string(wg_potential_name(w.p)) == "pwq");

  wg_potential* t = nullptr;
  REQUIRE(wg_potential_from_json_text(R"({"kind": "tabulated", "values": [0, 0.25, 1, 0.25, 0]})", &t) == WG_OK);
  REQUIRE(wg_potential_value(t, 0.5, &v) == WG_OK);
  CHECK(v == doctest::Approx(1.0));
  wg_potential_free(t);
  CHECK(wg_potential_from_json_text("{not json", &t) == WG_INVALID_INPUT);
  CHECK(wg_potential_from_json_file("/nonexistent/w.json", &t) == WG_IO);

  const double samples[] = {0.0, 1.0, 1.0, 0.0};
  CHECK(wg_potential_tabulated(samples, 3, &t) == WG_INVALID_INPUT);
  REQUIRE(wg_potential_tabulated(samples, 4, &t) == WG_OK);
  wg_potential_free(t);
}

TEST_CASE("validation through the callback") {
  Potential w("cosine");
  int seen = 0, all = 0;
  auto cb = [](const wg_check* c, void* user) {
    CHECK(c->name != nullptr);
    ++*static_cast<int*>(user);
  };
  REQUIRE(wg_validate_potential(w.p, 256, cb, &seen, &all) == WG_OK);
  CHECK(seen >= 4);
  CHECK(all == 1);
  CHECK(wg_validate_potential(w.p, 3, nullptr, nullptr, &all) == WG_INVALID_INPUT);
}

TEST_CASE("simulate") {
  Potential w("pwq");
  Drive h;
  wg_trajectory* t = nullptr;
  REQUIRE(wg_simulate(h.h, w.p, 0.01, 2.0, 1.0, 1000, &t) == WG_OK);
  REQUIRE(wg_trajectory_size(t) == 1001);
  const double* x = wg_trajectory_states(t);
  const double* times = wg_trajectory_times(t);
  CHECK(x[0] == 1.0);
  CHECK(times[1] == doctest::Approx(0.005));
  for (size_t k = 1; k < wg_trajectory_size(t); ++k) CHECK(x[k] <= x[k - 1]);
  CHECK(wg_trajectory_direction(t) == WG_NONINCREASING);
  CHECK(wg_trajectory_pinned_step(t) > 0);
  CHECK(wg_trajectory_write_csv(t, "/nonexistent/dir/t.csv") == WG_IO);
  wg_trajectory_free(t);

  CHECK(wg_simulate(h.h, w.p, 0.0, 2.0, 1.0, 10, &t) == WG_INVALID_INPUT);
  CHECK(wg_simulate(h.h, w.p, 0.01, 2.0, 1.0, 0, &t) == WG_INVALID_INPUT);

  wg_drive* bad = nullptr;
  const double coefficients[] = {0.0, 0.0, -1.0};
  CHECK(wg_drive_polynomial(coefficients, 3, &bad) == WG_INVALID_INPUT);
  REQUIRE(wg_drive_by_name("polynomial:0,0,0.5,0,0.1", &bad) == WG_OK);
  CHECK(wg_drive_derivative(bad, 1.0) == doctest::Approx(1.4));
  wg_drive_free(bad);
}

TEST_CASE("velocity and budget") {
  Potential w("pwq");
  wg_velocity v{};
  REQUIRE(wg_velocity_estimate(w.p, 0.6, 2.0, 1e-4, 0.0, &v) == WG_OK);
  CHECK(v.f == doctest::Approx(0.25).epsilon(1e-3));
  REQUIRE(wg_velocity_estimate(w.p, 0.5, 2.0, 1e-4, 0.0, &v) == WG_OK);
  CHECK(v.f == 0.0);
  CHECK(v.pinned == 1);

  wg_velocity capped{};
  CHECK(wg_velocity_estimate(w.p, 0.9, 2.0, 1e-8, 0.0, &capped) == WG_BUDGET_EXCEEDED);
  CHECK(capped.f == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(capped.iterations > 0);
  CHECK(wg_velocity_estimate(w.p, 0.9, -1.0, 1e-4, 0.0, &v) == WG_INVALID_INPUT);
}

TEST_CASE("threshold methods") {
  Potential w("pwq");
  wg_threshold t{};
  REQUIRE(wg_pinning_threshold(w.p, 2.0, 1e-8, WG_METHOD_CRITERION, &t) == WG_OK);
  CHECK(t.threshold == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(t.method == WG_METHOD_CRITERION);
  CHECK(t.low <= t.threshold);
  CHECK(t.threshold <= t.high);
  REQUIRE(wg_pinning_threshold(w.p, 2.0, 1e-6, WG_METHOD_VELOCITY, &t) == WG_OK);
  CHECK(t.threshold == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(t.method == WG_METHOD_VELOCITY);
  REQUIRE(wg_pinning_threshold(w.p, 1.0, 1e-8, WG_METHOD_AUTO, &t) == WG_OK);
  CHECK(t.method == WG_METHOD_CRITERION);
  CHECK(wg_pinning_threshold(w.p, 1.0, 1e-8, static_cast<wg_threshold_method>(7), &t) == WG_INVALID_INPUT);
}

TEST_CASE("phase sweep, orbits, extremes") {
  Potential w("pwq");
  const double gammas[] = {1.0, 2.0};
  const double slopes[] = {0.25, 0.6, 1.0};
  std::vector<wg_phase_cell> cells(6);
  size_t capped = 99;
  REQUIRE(wg_phase_sweep(w.p, gammas, 2, slopes, 3, 1e-4, 2, cells.data(), &capped) == WG_OK);
  CHECK(capped == 0);
  CHECK(cells[0].gamma == 1.0);
  CHECK(cells[0].pinned == 1);
  CHECK(cells[4].T == 0.6);
  CHECK(cells[4].f == doctest::Approx(0.25).epsilon(1e-3));

  wg_orbit o{};
  REQUIRE(wg_periodic_orbit(w.p, 0.6, 2.0, 100, 0.0, &o) == WG_OK);
  CHECK(o.q == 4);
  CHECK(o.p == -1);
  CHECK(wg_periodic_orbit(w.p, 0.6, 2.0, 3, 0.0, &o) == WG_NOT_FOUND);

  wg_extremes e{};
  REQUIRE(wg_extreme_limits(w.p, 2.0, 0.01, 100.0, &e) == WG_OK);
  CHECK(e.g_infinity_oracle == doctest::Approx(2.0 / std::log(3.0)).epsilon(1e-4));
  CHECK(wg_extreme_limits(w.p, 2.0, 1.0, 100.0, &e) == WG_INVALID_INPUT);
}

TEST_CASE("limit ODE and convergence") {
  Potential w("pwq");
  Drive h;
  wg_ode_run* run = nullptr;
  REQUIRE(wg_limit_ode(h.h, w.p, 2.0, 1.0, 2.0, 1e-3, &run) == WG_OK);
  double t_pin = -1.0;
  CHECK(wg_ode_pinned_at(run, &t_pin) == 1);
  CHECK(t_pin > 0.0);
  CHECK(wg_ode_state_at(run, 2.0) == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(wg_ode_times(run)[0] == 0.0);
  CHECK(wg_ode_states(run)[wg_ode_size(run) - 1] == wg_ode_state_at(run, 2.0));
  wg_ode_free(run);

  const double eps[] = {0.1, 0.05, 0.025};
  double sup[3] = {};
  REQUIRE(wg_convergence(h.h, w.p, 2.0, 1.0, 1.0, eps, 3, 1e-3, 2, 200, sup) == WG_OK);
  CHECK(sup[1] < sup[0]);
  CHECK(sup[2] < sup[1]);
  CHECK(wg_convergence(h.h, w.p, 2.0, 1.0, 1.0, eps, 2, 1e-3, 2, 200, sup) == WG_INVALID_INPUT);
}

TEST_CASE("selftest subset") {
  struct Seen {
    std::vector<int> ids;
  } seen;
  auto cb = [](const wg_criterion* c, void* user) {
    static_cast<Seen*>(user)->ids.push_back(c->id);
    CHECK(c->detail != nullptr);
  };
  const int only[] = {3, 1};
  int failures = -1;
  REQUIRE(wg_selftest(7, 1, only, 2, cb, &seen, &failures) == WG_OK);
  CHECK(seen.ids == std::vector<int>{1, 3});
  CHECK(failures == 0);
  const int bad[] = {11};
  CHECK(wg_selftest(7, 1, bad, 1, nullptr, nullptr, &failures) == WG_INVALID_INPUT);
}
