#ifndef WIGGLY_WIGGLY_H
#define WIGGLY_WIGGLY_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(WIGGLY_BUILDING)
#define WG_API __declspec(dllexport)
#else
#define WG_API __declspec(dllimport)
#endif
#else
#define WG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum wg_status {
  WG_OK = 0,
  WG_INVALID_INPUT,
  WG_NON_COERCIVE,
  WG_MONOTONICITY_VIOLATION,
  WG_BUDGET_EXCEEDED,
  WG_HYPOTHESIS_VIOLATED,
  WG_NOT_FOUND,
  WG_QUADRATURE_SINGULARITY,
  WG_PINNED,
  WG_WELL_ESCAPE,
  WG_IO,
  WG_INTERNAL
} wg_status;

/* Stable lowercase name, e.g. "budget_exceeded". */
WG_API const char* wg_status_name(wg_status status);
/* Message of the last failing call on this thread; "" after a success. */
WG_API const char* wg_last_error(void);
WG_API const char* wg_version(void);

/* ---- periodic potential W ---- */

typedef struct wg_potential wg_potential;

/* "pwq", "cosine" or "zero". */
WG_API wg_status wg_potential_builtin(const char* name, wg_potential** out);
/* JSON of the form {"kind": "tabulated", "values": [...]}. */
WG_API wg_status wg_potential_from_json_file(const char* path, wg_potential** out);
WG_API wg_status wg_potential_from_json_text(const char* text, wg_potential** out);
/* n samples over one closed period [0, 1]. */
WG_API wg_status wg_potential_tabulated(const double* values, size_t n, wg_potential** out);
WG_API wg_status wg_potential_value(const wg_potential* w, double y, double* out);
WG_API wg_status wg_potential_derivative(const wg_potential* w, double y, double* out);
/* Valid while the handle lives. */
WG_API const char* wg_potential_name(const wg_potential* w);
WG_API void wg_potential_free(wg_potential* w);

typedef struct wg_check {
  const char* name;
  int passed;
  double residual;
  double tolerance;
  int advisory;
} wg_check;

typedef void (*wg_check_callback)(const wg_check* check, void* user);

/* Reports each check through `callback` (may be NULL); *all_passed ignores advisory checks. */
WG_API wg_status wg_validate_potential(const wg_potential* w, int samples, wg_check_callback callback, void* user,
                                       int* all_passed);

/* ---- convex drive h ---- */

typedef struct wg_drive wg_drive;

WG_API wg_status wg_drive_quadratic(double curvature, wg_drive** out);
/* h(x) = sum_k coefficients[k] x^k. */
WG_API wg_status wg_drive_polynomial(const double* coefficients, size_t n, wg_drive** out);
/* "quadratic" or "polynomial:c0,c1,...". */
WG_API wg_status wg_drive_by_name(const char* name, wg_drive** out);
WG_API double wg_drive_derivative(const wg_drive* h, double x);
WG_API void wg_drive_free(wg_drive* h);

/* ---- minimizing movement ---- */

typedef struct wg_trajectory wg_trajectory;

typedef enum wg_direction { WG_NONINCREASING = 0, WG_NONDECREASING = 1, WG_CONSTANT = 2 } wg_direction;

/* Runs `steps` steps with tau = epsilon / gamma. */
WG_API wg_status wg_simulate(const wg_drive* h, const wg_potential* w, double epsilon, double gamma, double x0,
                             int64_t steps, wg_trajectory** out);
/* Recorded states, x0 included. */
WG_API size_t wg_trajectory_size(const wg_trajectory* t);
WG_API const double* wg_trajectory_times(const wg_trajectory* t);
WG_API const double* wg_trajectory_states(const wg_trajectory* t);
/* -1 when the run never pinned. */
WG_API int64_t wg_trajectory_pinned_step(const wg_trajectory* t);
WG_API wg_direction wg_trajectory_direction(const wg_trajectory* t);
WG_API wg_status wg_trajectory_write_csv(const wg_trajectory* t, const char* path);
WG_API void wg_trajectory_free(wg_trajectory* t);

/* ---- homogenized velocity ---- */

typedef struct wg_velocity {
  double T;
  double gamma;
  double f;
  double error_bound;
  int64_t iterations;
  double y0;
  int pinned;
} wg_velocity;

/* On WG_BUDGET_EXCEEDED *out still holds the best estimate. */
WG_API wg_status wg_velocity_estimate(const wg_potential* w, double T, double gamma, double tol, double y0,
                                      wg_velocity* out);

typedef enum wg_threshold_method { WG_METHOD_AUTO = 0, WG_METHOD_CRITERION, WG_METHOD_VELOCITY } wg_threshold_method;

typedef struct wg_threshold {
  double gamma;
  double threshold;
  double low;
  double high;
  wg_threshold_method method; /* the method actually used */
} wg_threshold;

WG_API wg_status wg_pinning_threshold(const wg_potential* w, double gamma, double tol, wg_threshold_method method,
                                      wg_threshold* out);

typedef struct wg_phase_cell {
  double gamma;
  double T;
  double f;
  double error_bound;
  int64_t iterations;
  int pinned;
  int budget_exceeded;
} wg_phase_cell;

/* Fills n_gamma * n_T cells, gamma-major. Budget-capped cells keep their best
   estimate and are counted in *capped (may be NULL); they do not fail the call. */
WG_API wg_status wg_phase_sweep(const wg_potential* w, const double* gammas, size_t n_gamma, const double* slopes,
                                size_t n_T, double tol, int threads, wg_phase_cell* cells, size_t* capped);

typedef struct wg_orbit {
  double T;
  double gamma;
  int64_t q;
  int64_t p;
  double witness_y0;
  double residual;
} wg_orbit;

/* WG_NOT_FOUND when no period up to q_max exists. */
WG_API wg_status wg_periodic_orbit(const wg_potential* w, double T, double gamma, int64_t q_max, double y0,
                                   wg_orbit* out);

typedef struct wg_extremes {
  double z;
  double small_gamma_velocity;
  double large_gamma_velocity;
  double g_infinity_printed;
  double g_infinity_slope;
  double g_infinity_oracle;
} wg_extremes;

WG_API wg_status wg_extreme_limits(const wg_potential* w, double z, double gamma_small, double gamma_large,
                                   wg_extremes* out);

/* ---- limit ODE ---- */

typedef struct wg_ode_run wg_ode_run;

WG_API wg_status wg_limit_ode(const wg_drive* h, const wg_potential* w, double gamma, double x0, double t_end,
                              double tol, wg_ode_run** out);
WG_API size_t wg_ode_size(const wg_ode_run* run);
WG_API const double* wg_ode_times(const wg_ode_run* run);
WG_API const double* wg_ode_states(const wg_ode_run* run);
/* Interpolated state. */
WG_API double wg_ode_state_at(const wg_ode_run* run, double t);
/* 1 and *t_pin set when the run stopped at the threshold, else 0. */
WG_API int wg_ode_pinned_at(const wg_ode_run* run, double* t_pin);
WG_API wg_status wg_ode_write_csv(const wg_ode_run* run, const char* path);
WG_API void wg_ode_free(wg_ode_run* run);

/* sup_distance[i] for epsilons[i]; epsilons strictly decreasing, n >= 3. */
WG_API wg_status wg_convergence(const wg_drive* h, const wg_potential* w, double gamma, double x0, double t_end,
                                const double* epsilons, size_t n, double tol, int threads, int samples,
                                double* sup_distance);

/* ---- acceptance suite ---- */

typedef struct wg_criterion {
  int id;
  const char* name;
  int passed;
  const char* detail;
  double seconds;
} wg_criterion;

typedef void (*wg_criterion_callback)(const wg_criterion* result, void* user);

/* Runs the criteria listed in `only` (all when n_only = 0), reporting each through
   `callback`. *failures counts failed criteria; the status is WG_OK regardless. */
WG_API wg_status wg_selftest(uint64_t seed, int threads, const int* only, size_t n_only,
                             wg_criterion_callback callback, void* user, int* failures);

#ifdef __cplusplus
}
#endif

#endif
