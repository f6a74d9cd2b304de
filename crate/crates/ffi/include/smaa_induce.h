#ifndef SMAA_INDUCE_H
#define SMAA_INDUCE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SmaaKsVariant {
  SMAA_KS_VARIANT_EQUAL = 0,
  /**
   * The first sample sits on smaller values.
   */
  SMAA_KS_VARIANT_GREATER = 1,
} SmaaKsVariant;

typedef enum SmaaStatement {
  SMAA_STATEMENT_CERTAIN_STRICT = 0,
  SMAA_STATEMENT_CERTAIN_INDIFFERENT = 1,
  SMAA_STATEMENT_UNCERTAIN_STRICT = 2,
  SMAA_STATEMENT_UNCERTAIN_INDIFFERENT = 3,
} SmaaStatement;

typedef enum SmaaStatus {
  SMAA_STATUS_OK = 0,
  SMAA_STATUS_NULL_POINTER = 1,
  SMAA_STATUS_INVALID_ARGUMENT = 2,
  SMAA_STATUS_DIMENSION_MISMATCH = 3,
  SMAA_STATUS_INFEASIBLE = 4,
  SMAA_STATUS_NUMERICAL = 5,
  SMAA_STATUS_PARSE = 6,
  SMAA_STATUS_IO = 7,
  /**
   * The requested value does not exist for this result.
   */
  SMAA_STATUS_NOT_AVAILABLE = 8,
  SMAA_STATUS_BUFFER_TOO_SMALL = 9,
  SMAA_STATUS_PANIC = 10,
} SmaaStatus;

/**
 * Performance matrix plus the statements attached to it.
 */
typedef struct SmaaProblem SmaaProblem;

/**
 * Outcome of one inference call.
 */
typedef struct SmaaResult SmaaResult;

/**
 * A sample of weight vectors.
 */
typedef struct SmaaSample SmaaSample;

typedef struct SmaaKsResult {
  double statistic;
  double p_value;
  uint8_t h;
} SmaaKsResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *smaa_last_error_message(void);

void smaa_clear_error(void);

/**
 * Library version as a static string.
 */
const char *smaa_version(void);

/**
 * New problem over a row-major `m × n` matrix of gain-type evaluations.
 *
 * # Safety
 * `values` must point to `m * n` doubles and `out` to writable storage.
 */
enum SmaaStatus smaa_problem_new(const double *values,
                                 size_t m,
                                 size_t n,
                                 struct SmaaProblem **out);

/**
 * # Safety
 * `problem` must come from [`smaa_problem_new`] and not be used afterwards.
 */
void smaa_problem_free(struct SmaaProblem *problem);

/**
 * Records a pairwise statement about alternatives `a` and `b` (zero-based).
 *
 * # Safety
 * `problem` must be a live handle.
 */
enum SmaaStatus smaa_problem_add_statement(struct SmaaProblem *problem,
                                           enum SmaaStatement kind,
                                           size_t a,
                                           size_t b);

/**
 * Records `(a, b)` preferred to `(c, d)` in intensity, certain or uncertain.
 *
 * # Safety
 * `problem` must be a live handle.
 */
enum SmaaStatus smaa_problem_add_intensity(struct SmaaProblem *problem,
                                           bool certain,
                                           size_t a,
                                           size_t b,
                                           size_t c,
                                           size_t d);

/**
 * Draws `count` weight vectors uniformly from the weights compatible with
 * the problem's certain statements (the whole simplex when there are none).
 *
 * # Safety
 * `problem` must be a live handle and `out` writable.
 */
enum SmaaStatus smaa_sample_weights(const struct SmaaProblem *problem,
                                    size_t count,
                                    uint64_t seed,
                                    struct SmaaSample **out);

/**
 * Wraps caller-supplied weight vectors, row-major `count × n`.
 *
 * # Safety
 * `weights` must point to `count * n` doubles and `out` be writable.
 */
enum SmaaStatus smaa_sample_from_weights(const double *weights,
                                         size_t count,
                                         size_t n,
                                         struct SmaaSample **out);

/**
 * # Safety
 * `sample` must be a live handle or null.
 */
size_t smaa_sample_len(const struct SmaaSample *sample);

/**
 * # Safety
 * `sample` must be a live handle or null.
 */
size_t smaa_sample_dim(const struct SmaaSample *sample);

/**
 * Copies the weights row-major into `buf`, which holds `len` doubles.
 *
 * # Safety
 * `sample` must be a live handle and `buf` point to `len` doubles.
 */
enum SmaaStatus smaa_sample_copy_weights(const struct SmaaSample *sample, double *buf, size_t len);

/**
 * # Safety
 * `sample` must come from this library and not be used afterwards.
 */
void smaa_sample_free(struct SmaaSample *sample);

/**
 * Infers masses over `sample` with the method named by `method`, e.g.
 * `"ssor"`, `"acg_pl@arme"` or `"acg_nl@unkn"`. `dist_samples` is the
 * number of distributions averaged by the LP-based methods.
 *
 * # Safety
 * Handles must be live, `method` a nul-terminated string, `out` writable.
 */
enum SmaaStatus smaa_infer(const struct SmaaProblem *problem,
                           const struct SmaaSample *sample,
                           const char *method,
                           size_t dist_samples,
                           uint64_t seed,
                           struct SmaaResult **out);

/**
 * # Safety
 * `result` must be a live handle or null.
 */
size_t smaa_result_len(const struct SmaaResult *result);

/**
 * # Safety
 * `result` must be a live handle and `buf` point to `len` doubles.
 */
enum SmaaStatus smaa_result_masses(const struct SmaaResult *result, double *buf, size_t len);

/**
 * Whether the statements hold strictly under the returned masses' LP.
 *
 * # Safety
 * `result` must be a live handle or null.
 */
bool smaa_result_compatible(const struct SmaaResult *result);

/**
 * Optimal slack of the compatibility LP. `NotAvailable` for methods
 * without one or when the LP was infeasible.
 *
 * # Safety
 * `result` must be a live handle and `out` writable.
 */
enum SmaaStatus smaa_result_epsilon(const struct SmaaResult *result, double *out);

/**
 * Result as a JSON string owned by the caller; release it with
 * [`smaa_string_free`]. Null on failure.
 *
 * # Safety
 * `result` must be a live handle or null.
 */
char *smaa_result_to_json(const struct SmaaResult *result);

/**
 * # Safety
 * `result` must come from [`smaa_infer`] and not be used afterwards.
 */
void smaa_result_free(struct SmaaResult *result);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void smaa_string_free(char *s);

/**
 * Rank acceptability (`rai[r * m + a]`) and pairwise winning
 * (`pwi[a * m + b]`) indices of `masses` over `sample`. Either output may
 * be null to skip it; each needs `m * m` slots.
 *
 * # Safety
 * Handles must be live, `masses` point to `len` doubles, outputs to `m * m`.
 */
enum SmaaStatus smaa_indices(const struct SmaaProblem *problem,
                             const struct SmaaSample *sample,
                             const double *masses,
                             size_t len,
                             double *rai_out,
                             double *pwi_out);

/**
 * Two-sample Kolmogorov-Smirnov test at level `alpha`.
 *
 * # Safety
 * `x` and `y` must point to `nx` and `ny` doubles; `out` writable.
 */
enum SmaaStatus smaa_ks_test(const double *x,
                             size_t nx,
                             const double *y,
                             size_t ny,
                             double alpha,
                             enum SmaaKsVariant variant,
                             struct SmaaKsResult *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SMAA_INDUCE_H */
