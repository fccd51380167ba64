#include "wiggly/wiggly.h"

#include <algorithm>
#include <fstream>
#include <limits>
#include <new>
#include <string>

#include "wiggly/acceptance.hpp"
#include "wiggly/dynamics.hpp"
#include "wiggly/error.hpp"
#include "wiggly/homogenization.hpp"
#include "wiggly/limit_ode.hpp"
#include "wiggly/potentials.hpp"

struct wg_potential {
  wiggly::PotentialPtr ptr;
  std::string name;
};

struct wg_drive {
  wiggly::ConvexDrive drive;
};

struct wg_trajectory {
  wiggly::Trajectory traj;
};

struct wg_ode_run {
  wiggly::OdeRun run;
};

namespace {

thread_local std::string last_error;

wg_status to_status(wiggly::ErrorCode code) {
  using wiggly::ErrorCode;
  switch (code) {
    case ErrorCode::invalid_input: return WG_INVALID_INPUT;
    case ErrorCode::non_coercive: return WG_NON_COERCIVE;
    case ErrorCode::monotonicity_violation: return WG_MONOTONICITY_VIOLATION;
    case ErrorCode::budget_exceeded: return WG_BUDGET_EXCEEDED;
    case ErrorCode::hypothesis_violated: return WG_HYPOTHESIS_VIOLATED;
    case ErrorCode::not_found: return WG_NOT_FOUND;
    case ErrorCode::quadrature_singularity: return WG_QUADRATURE_SINGULARITY;
    case ErrorCode::pinned: return WG_PINNED;
    case ErrorCode::well_escape: return WG_WELL_ESCAPE;
    case ErrorCode::io: return WG_IO;
  }
  return WG_INTERNAL;
}

wg_status fail(wg_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

// Runs `body` with every exception mapped onto a status code.
template <class F>
wg_status guarded(F&& body) {
  try {
    last_error.clear();
    return body();
  } catch (const wiggly::Error& e) {
    return fail(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(WG_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(WG_INTERNAL, e.what());
  } catch (...) {
    return fail(WG_INTERNAL, "unknown error");
  }
}

void need(bool ok, const char* what) {
  if (!ok) wiggly::fail(wiggly::ErrorCode::invalid_input, what);
}

wg_status wrap_potential(wiggly::PotentialPtr ptr, wg_potential** out) {
  auto* handle = new wg_potential{std::move(ptr), {}};
  handle->name = handle->ptr->name();
  *out = handle;
  return WG_OK;
}

void fill(wg_velocity* out, const wiggly::VelocityEstimate& e) {
  out->T = e.T;
  out->gamma = e.gamma;
  out->f = e.value;
  out->error_bound = e.error_bound;
  out->iterations = e.iterations;
  out->y0 = e.y0_used;
  out->pinned = e.pinned;
}

}  // namespace

extern "C" {

const char* wg_status_name(wg_status status) {
  static const char* const names[] = {
      "ok",        "invalid_input",          "non_coercive", "monotonicity_violation", "budget_exceeded", "hypothesis_violated",
      "not_found", "quadrature_singularity", "pinned",       "well_escape",            "io",              "internal"};
  return status >= WG_OK && status <= WG_INTERNAL ? names[status] : "unknown";
}

const char* wg_last_error(void) { return last_error.c_str(); }

const char* wg_version(void) { return "1.0.0"; }

wg_status wg_potential_builtin(const char* name, wg_potential** out) {
  return guarded([&] {
    need(name && out, "null argument");
    return wrap_potential(wiggly::potential_by_name(name), out);
  });
}

wg_status wg_potential_from_json_file(const char* path, wg_potential** out) {
  return guarded([&] {
    need(path && out, "null argument");
    return wrap_potential(wiggly::load_potential_json(path), out);
  });
}

wg_status wg_potential_from_json_text(const char* text, wg_potential** out) {
  return guarded([&] {
    need(text && out, "null argument");
    return wrap_potential(wiggly::parse_potential_json(text), out);
  });
}

wg_status wg_potential_tabulated(const double* values, size_t n, wg_potential** out) {
  return guarded([&] {
    need(values && out, "null argument");
    return wrap_potential(wiggly::make_tabulated_potential(std::vector<double>(values, values + n)), out);
  });
}

wg_status wg_potential_value(const wg_potential* w, double y, double* out) {
  return guarded([&] {
    need(w && out, "null argument");
    *out = w->ptr->value(y);
    return WG_OK;
  });
}

wg_status wg_potential_derivative(const wg_potential* w, double y, double* out) {
  return guarded([&] {
    need(w && out, "null argument");
    *out = w->ptr->derivative(y);
    return WG_OK;
  });
}

const char* wg_potential_name(const wg_potential* w) { return w ? w->name.c_str() : ""; }

void wg_potential_free(wg_potential* w) { delete w; }

wg_status wg_validate_potential(const wg_potential* w, int samples, wg_check_callback callback, void* user,
                                int* all_passed) {
  return guarded([&] {
    need(w != nullptr, "null potential");
    const auto report = wiggly::validate_potential(*w->ptr, samples);
    if (callback)
      for (const auto& c : report.checks) {
        const wg_check check{c.name.c_str(), c.passed, c.residual, c.tolerance, c.advisory};
        callback(&check, user);
      }
    if (all_passed) *all_passed = report.all_passed();
    return WG_OK;
  });
}

wg_status wg_drive_quadratic(double curvature, wg_drive** out) {
  return guarded([&] {
    need(out != nullptr, "null argument");
    *out = new wg_drive{wiggly::ConvexDrive::quadratic(curvature)};
    return WG_OK;
  });
}

wg_status wg_drive_polynomial(const double* coefficients, size_t n, wg_drive** out) {
  return guarded([&] {
    need(coefficients && out, "null argument");
    *out = new wg_drive{wiggly::ConvexDrive::polynomial(std::vector<double>(coefficients, coefficients + n))};
    return WG_OK;
  });
}

wg_status wg_drive_by_name(const char* name, wg_drive** out) {
  return guarded([&] {
    need(name && out, "null argument");
    *out = new wg_drive{wiggly::drive_by_name(name)};
    return WG_OK;
  });
}

double wg_drive_derivative(const wg_drive* h, double x) {
  return h ? h->drive.derivative(x) : std::numeric_limits<double>::quiet_NaN();
}

void wg_drive_free(wg_drive* h) { delete h; }

wg_status wg_simulate(const wg_drive* h, const wg_potential* w, double epsilon, double gamma, double x0,
                      int64_t steps, wg_trajectory** out) {
  return guarded([&] {
    need(h && w && out, "null argument");
    const auto config = wiggly::MMConfig::critical(wiggly::OscillatingEnergy(h->drive, w->ptr, epsilon), gamma, x0, steps);
    *out = new wg_trajectory{wiggly::run_mm(config)};
    return WG_OK;
  });
}

size_t wg_trajectory_size(const wg_trajectory* t) { return t ? t->traj.states.size() : 0; }

const double* wg_trajectory_times(const wg_trajectory* t) { return t ? t->traj.times.data() : nullptr; }

const double* wg_trajectory_states(const wg_trajectory* t) { return t ? t->traj.states.data() : nullptr; }

int64_t wg_trajectory_pinned_step(const wg_trajectory* t) {
  return t && t->traj.pinned_step ? *t->traj.pinned_step : -1;
}

wg_direction wg_trajectory_direction(const wg_trajectory* t) {
  if (!t) return WG_CONSTANT;
  switch (t->traj.monotone_direction) {
    case wiggly::Direction::nonincreasing: return WG_NONINCREASING;
    case wiggly::Direction::nondecreasing: return WG_NONDECREASING;
    case wiggly::Direction::constant: break;
  }
  return WG_CONSTANT;
}

wg_status wg_trajectory_write_csv(const wg_trajectory* t, const char* path) {
  return guarded([&] {
    need(t && path, "null argument");
    std::ofstream out(path, std::ios::binary);
    if (!out) return fail(WG_IO, std::string("cannot open ") + path);
    wiggly::write_trajectory_csv(t->traj, out);
    out.close();
    if (!out) return fail(WG_IO, std::string("cannot write ") + path);
    return WG_OK;
  });
}

void wg_trajectory_free(wg_trajectory* t) { delete t; }

wg_status wg_velocity_estimate(const wg_potential* w, double T, double gamma, double tol, double y0,
                               wg_velocity* out) {
  return guarded([&] {
    need(w && out, "null argument");
    try {
      fill(out, wiggly::homogenized_velocity(T, gamma, tol, y0, w->ptr));
    } catch (const wiggly::BudgetExceeded& e) {
      *out = wg_velocity{T, gamma, e.best_estimate, e.error_bound, e.iterations, y0, 0};
      throw;
    }
    return WG_OK;
  });
}

wg_status wg_pinning_threshold(const wg_potential* w, double gamma, double tol, wg_threshold_method method,
                               wg_threshold* out) {
  return guarded([&] {
    need(w && out, "null argument");
    wiggly::PinningReport r;
    switch (method) {
      case WG_METHOD_AUTO: r = wiggly::pinning_threshold(gamma, tol, w->ptr); break;
      case WG_METHOD_CRITERION: r = wiggly::pinning_threshold_criterion(gamma, tol, w->ptr); break;
      case WG_METHOD_VELOCITY: r = wiggly::pinning_threshold_velocity(gamma, tol, w->ptr); break;
      default: need(false, "unknown threshold method");
    }
    *out = {r.gamma, r.threshold, r.low, r.high,
            r.method == wiggly::PinningMethod::criterion ? WG_METHOD_CRITERION : WG_METHOD_VELOCITY};
    return WG_OK;
  });
}

wg_status wg_phase_sweep(const wg_potential* w, const double* gammas, size_t n_gamma, const double* slopes,
                         size_t n_T, double tol, int threads, wg_phase_cell* cells, size_t* capped) {
  return guarded([&] {
    need(w && gammas && slopes && cells, "null argument");
    const auto result = wiggly::phase_sweep(std::vector<double>(gammas, gammas + n_gamma),
                                            std::vector<double>(slopes, slopes + n_T), tol, w->ptr, threads);
    size_t count = 0;
    for (size_t i = 0; i < result.size(); ++i) {
      const auto& c = result[i];
      cells[i] = {c.gamma, c.T, c.estimate.value, c.estimate.error_bound, c.estimate.iterations, c.estimate.pinned,
                  c.budget_exceeded};
      count += c.budget_exceeded;
    }
    if (capped) *capped = count;
    return WG_OK;
  });
}

wg_status wg_periodic_orbit(const wg_potential* w, double T, double gamma, int64_t q_max, double y0, wg_orbit* out) {
  return guarded([&] {
    need(w && out, "null argument");
    const auto r = wiggly::detect_periodic_orbit(T, gamma, q_max, w->ptr, y0);
    if (!r) return fail(WG_NOT_FOUND, "no periodic orbit with q <= " + std::to_string(q_max));
    *out = {r->T, r->gamma, r->q, r->p, r->witness_y0, r->residual};
    return WG_OK;
  });
}

wg_status wg_extreme_limits(const wg_potential* w, double z, double gamma_small, double gamma_large,
                            wg_extremes* out) {
  return guarded([&] {
    need(w && out, "null argument");
    const auto e = wiggly::extreme_limits(z, gamma_small, gamma_large, w->ptr);
    *out = {e.z, e.small_gamma_velocity, e.large_gamma_velocity, e.g_infinity_printed, e.g_infinity_slope,
            e.g_infinity_oracle};
    return WG_OK;
  });
}

wg_status wg_limit_ode(const wg_drive* h, const wg_potential* w, double gamma, double x0, double t_end, double tol,
                       wg_ode_run** out) {
  return guarded([&] {
    need(h && w && out, "null argument");
    wiggly::LimitOptions opt;
    opt.tol = tol;
    *out = new wg_ode_run{wiggly::integrate_limit(gamma, x0, t_end, h->drive, w->ptr, opt)};
    return WG_OK;
  });
}

size_t wg_ode_size(const wg_ode_run* run) { return run ? run->run.times.size() : 0; }

const double* wg_ode_times(const wg_ode_run* run) { return run ? run->run.times.data() : nullptr; }

const double* wg_ode_states(const wg_ode_run* run) { return run ? run->run.states.data() : nullptr; }

double wg_ode_state_at(const wg_ode_run* run, double t) {
  return run ? run->run.state_at(t) : std::numeric_limits<double>::quiet_NaN();
}

int wg_ode_pinned_at(const wg_ode_run* run, double* t_pin) {
  if (!run || !run->run.pinned_at) return 0;
  if (t_pin) *t_pin = *run->run.pinned_at;
  return 1;
}

wg_status wg_ode_write_csv(const wg_ode_run* run, const char* path) {
  return guarded([&] {
    need(run && path, "null argument");
    std::ofstream out(path, std::ios::binary);
    if (!out) return fail(WG_IO, std::string("cannot open ") + path);
    wiggly::write_ode_csv(run->run, out);
    out.close();
    if (!out) return fail(WG_IO, std::string("cannot write ") + path);
    return WG_OK;
  });
}

void wg_ode_free(wg_ode_run* run) { delete run; }

wg_status wg_convergence(const wg_drive* h, const wg_potential* w, double gamma, double x0, double t_end,
                         const double* epsilons, size_t n, double tol, int threads, int samples,
                         double* sup_distance) {
  return guarded([&] {
    need(h && w && epsilons && sup_distance, "null argument");
    wiggly::ConvergenceOptions opt;
    opt.limit.tol = tol;
    opt.threads = threads;
    opt.samples = samples;
    const auto rows = wiggly::convergence_study(gamma, x0, t_end, std::vector<double>(epsilons, epsilons + n),
                                                h->drive, w->ptr, opt);
    for (size_t i = 0; i < rows.size(); ++i) sup_distance[i] = rows[i].sup_distance;
    return WG_OK;
  });
}

wg_status wg_selftest(uint64_t seed, int threads, const int* only, size_t n_only, wg_criterion_callback callback,
                      void* user, int* failures) {
  return guarded([&] {
    need(only || n_only == 0, "null criterion list");
    wiggly::AcceptanceOptions opt;
    opt.seed = seed;
    opt.threads = threads;
    opt.only.assign(only, only + n_only);
    const auto results = wiggly::run_acceptance(opt, [&](const wiggly::CriterionResult& r) {
      if (!callback) return;
      const wg_criterion c{r.id, r.name.c_str(), r.passed, r.detail.c_str(), r.seconds};
      callback(&c, user);
    });
    if (failures)
      *failures = static_cast<int>(std::count_if(results.begin(), results.end(), [](const auto& r) { return !r.passed; }));
    return WG_OK;
  });
}

}  // extern "C"
