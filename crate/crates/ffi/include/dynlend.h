#ifndef DYNLEND_H
#define DYNLEND_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Per-node series of a solved model.
 */
typedef enum DlSeries {
  DL_SERIES_GRID = 0,
  DL_SERIES_VALUE = 1,
  DL_SERIES_POLICY = 2,
} DlSeries;

typedef enum DlStatus {
  DL_STATUS_OK = 0,
  DL_STATUS_NULL_POINTER = 1,
  DL_STATUS_INVALID_UTF8 = 2,
  DL_STATUS_INVALID_PARAMETER = 3,
  DL_STATUS_DOMAIN = 4,
  DL_STATUS_NO_BRACKET = 5,
  DL_STATUS_NON_CONVERGENCE = 6,
  DL_STATUS_REGIME = 7,
  DL_STATUS_ASSUMPTION = 8,
  DL_STATUS_CONFIG = 9,
  DL_STATUS_IO = 10,
  DL_STATUS_BUFFER_TOO_SMALL = 11,
  DL_STATUS_PANIC = 12,
} DlStatus;

/**
 * Demand curve handle.
 */
typedef struct DlDemand DlDemand;

/**
 * Income distribution handle.
 */
typedef struct DlDistribution DlDistribution;

/**
 * Solved fixed-discount model handle.
 */
typedef struct DlExoModel DlExoModel;

/**
 * Closed-form solution for uniform income.
 */
typedef struct DlUniformClosedForm {
  double a;
  double b;
  double c;
  /**
   * Policy slope below the threshold.
   */
  double m;
  double n;
  double x_bar;
} DlUniformClosedForm;

/**
 * Grand Experiment: first offer `(y0, d0)`, then `(y_inf, d_inf)` forever.
 */
typedef struct DlGePolicy {
  double y0;
  double d0;
  double y_inf;
  double d_inf;
  double x_bar;
} DlGePolicy;

typedef struct DlSimSummary {
  uint64_t n_paths;
  double mean_npv;
  double std_error;
  uint64_t balked;
  uint64_t never_defaulted;
} DlSimSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *dl_version(void);

/**
 * Copies the calling thread's last error message into `buf`.
 *
 * Returns the buffer size needed including the terminating NUL; the copy is
 * truncated when `cap` is smaller. An empty message means the last call
 * succeeded.
 *
 * # Safety
 * `buf` must be null or valid for `cap` bytes.
 */
size_t dl_last_error(char *buf, size_t cap);

/**
 * Parses a distribution from JSON such as `{"kind":"beta","params":{"a":2,"b":2}}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum DlStatus dl_distribution_from_json(const char *json, struct DlDistribution **out);

/**
 * # Safety
 * `out` must be writable.
 */
enum DlStatus dl_distribution_uniform(struct DlDistribution **out);

/**
 * # Safety
 * `dist` must be null or a handle from this library not yet freed.
 */
void dl_distribution_free(struct DlDistribution *dist);

/**
 * Survival `P(income >= x)`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum DlStatus dl_distribution_survival(const struct DlDistribution *dist, double x, double *out);

/**
 * `G(x) = x f(x) / S(x)`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum DlStatus dl_distribution_g_value(const struct DlDistribution *dist, double x, double *out);

/**
 * Parses a demand curve from JSON such as `{"kind":"exponential","params":{"rate":3}}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum DlStatus dl_demand_from_json(const char *json, struct DlDemand **out);

/**
 * `s(d) = d^alpha`.
 *
 * # Safety
 * `out` must be writable.
 */
enum DlStatus dl_demand_constant_elasticity(double alpha, struct DlDemand **out);

/**
 * # Safety
 * `demand` must be null or a handle from this library not yet freed.
 */
void dl_demand_free(struct DlDemand *demand);

/**
 * Long-run discount factor `d*`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum DlStatus dl_solve_d_star(const struct DlDemand *demand, double rho, double *out);

/**
 * Experimentation threshold with a fixed discount `d`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum DlStatus dl_threshold_exo(const struct DlDistribution *dist,
                               double rho,
                               double d,
                               double *out);

/**
 * Experimentation threshold with an endogenous discount.
 *
 * # Safety
 * Pointers must be valid.
 */
enum DlStatus dl_threshold_endo(const struct DlDistribution *dist,
                                const struct DlDemand *demand,
                                double rho,
                                double *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum DlStatus dl_uniform_closed_form(double rho, double d, struct DlUniformClosedForm *out);

/**
 * Grand Experiment for a constant-elasticity demand and no income signal.
 *
 * # Safety
 * Pointers must be valid.
 */
enum DlStatus dl_ge_constant_elasticity(const struct DlDistribution *dist,
                                        const struct DlDemand *demand,
                                        double rho,
                                        struct DlGePolicy *out);

/**
 * Solves the fixed-discount model by value iteration. `grid_size` or `tol`
 * of 0 selects the default.
 *
 * # Safety
 * Pointers must be valid.
 */
enum DlStatus dl_exo_model_solve(const struct DlDistribution *dist,
                                 double rho,
                                 double d,
                                 size_t grid_size,
                                 double tol,
                                 struct DlExoModel **out);

/**
 * # Safety
 * `model` must be null or a handle from this library not yet freed.
 */
void dl_exo_model_free(struct DlExoModel *model);

/**
 * Number of grid nodes; 0 for a null handle.
 *
 * # Safety
 * `model` must be null or valid.
 */
size_t dl_exo_model_len(const struct DlExoModel *model);

/**
 * # Safety
 * Pointers must be valid.
 */
enum DlStatus dl_exo_model_x_bar(const struct DlExoModel *model, double *out);

/**
 * Expected NPV with no income information.
 *
 * # Safety
 * Pointers must be valid.
 */
enum DlStatus dl_exo_model_dynamic_npv(const struct DlExoModel *model, double *out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum DlStatus dl_exo_model_value_at(const struct DlExoModel *model, double x, double *out);

/**
 * Copies one per-node series into `buf`, which must hold
 * `dl_exo_model_len(model)` values.
 *
 * # Safety
 * `buf` must be valid for `cap` doubles.
 */
enum DlStatus dl_exo_model_copy(const struct DlExoModel *model,
                                enum DlSeries series,
                                double *buf,
                                size_t cap);

/**
 * Monte Carlo replay of the model's Lean Experimentation policy.
 *
 * # Safety
 * Pointers must be valid.
 */
enum DlStatus dl_exo_model_simulate(const struct DlExoModel *model,
                                    size_t n_paths,
                                    uint64_t seed,
                                    bool antithetic,
                                    struct DlSimSummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DYNLEND_H */
