#ifndef PSD_APPROX_H
#define PSD_APPROX_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum PsdStatus {
  PSD_STATUS_OK = 0,
  PSD_STATUS_NULL_POINTER = 1,
  PSD_STATUS_INVALID_ARGUMENT = 2,
  PSD_STATUS_DOMAIN = 3,
  PSD_STATUS_CONVERGENCE = 4,
  PSD_STATUS_DEGENERATE = 5,
  PSD_STATUS_TRUNCATION = 6,
  PSD_STATUS_EMPTY_SPEC = 7,
  PSD_STATUS_INFEASIBLE = 8,
  PSD_STATUS_UNSUPPORTED_CLOSED_FORM = 9,
  PSD_STATUS_SUPPORT_CAP = 10,
  PSD_STATUS_PARSE = 11,
  PSD_STATUS_IO = 12,
  PSD_STATUS_PANIC = 13,
} PsdStatus;

/**
 * Built-in distribution families. The parameter passed alongside is the
 * natural one: lambda, p, q, or theta respectively.
 */
typedef enum PsdFamily {
  PSD_FAMILY_POISSON = 0,
  PSD_FAMILY_BERNOULLI = 1,
  PSD_FAMILY_GEOMETRIC = 2,
  PSD_FAMILY_LOGARITHMIC_SHIFTED = 3,
} PsdFamily;

/**
 * Opaque list of independent summands.
 */
typedef struct PsdSpec PsdSpec;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates an empty spec. Free it with [`psd_spec_free`].
 */
struct PsdSpec *psd_spec_new(void);

/**
 * # Safety
 * `spec` must come from [`psd_spec_new`] and not be used afterwards. Null
 * is ignored.
 */
void psd_spec_free(struct PsdSpec *spec);

/**
 * Appends one summand. `family` is a [`PsdFamily`] value.
 *
 * # Safety
 * `spec` must be a live handle.
 */
enum PsdStatus psd_spec_push(struct PsdSpec *spec, uint32_t family, double param);

/**
 * Number of summands, or 0 for a null handle.
 *
 * # Safety
 * `spec` must be a live handle or null.
 */
size_t psd_spec_len(const struct PsdSpec *spec);

/**
 * Mean and variance of `S_n`.
 *
 * # Safety
 * `spec` must be a live handle; out pointers must be valid for writes.
 */
enum PsdStatus psd_spec_moments(const struct PsdSpec *spec, double *mean, double *variance);

/**
 * Total variation bound to Poisson(`lambda`). `barbour_hall` selects the
 * `(1 - e^-lambda)/lambda` step constant instead of `1/max(1, lambda)`.
 *
 * # Safety
 * `spec` must be a live handle; `out` must be valid for writes.
 */
enum PsdStatus psd_poisson_bound(const struct PsdSpec *spec,
                                 double lambda,
                                 double eps,
                                 bool barbour_hall,
                                 double *out);

/**
 * Poisson bound at `lambda = E S_n`.
 *
 * # Safety
 * `spec` must be a live handle; `out` must be valid for writes.
 */
enum PsdStatus psd_poisson_bound_matched(const struct PsdSpec *spec, double eps, double *out);

/**
 * Truncation-free Poisson bound built from `a_0` and `max_i (h'^2 + h'' h)`.
 *
 * # Safety
 * `spec` must be a live handle; `out` must be valid for writes.
 */
enum PsdStatus psd_poisson_bound_crude(const struct PsdSpec *spec, double lambda, double *out);

/**
 * Fits NB(r, p). With `two_moment` false the mean is matched for the given
 * `r`; otherwise `r` is ignored and mean and variance are both matched.
 *
 * # Safety
 * `spec` must be a live handle; out pointers must be valid for writes.
 */
enum PsdStatus psd_nb_fit(const struct PsdSpec *spec,
                          bool two_moment,
                          double r,
                          double *out_r,
                          double *out_p);

/**
 * NB bound with one moment matched at the given `r`.
 *
 * # Safety
 * `spec` must be a live handle; `out` must be valid for writes.
 */
enum PsdStatus psd_nb_bound_one(const struct PsdSpec *spec, double r, double eps, double *out);

/**
 * NB bound with mean and variance matched. Fails with `Infeasible` when
 * the variance does not exceed the mean.
 *
 * # Safety
 * `spec` must be a live handle; `out` must be valid for writes.
 */
enum PsdStatus psd_nb_bound_two(const struct PsdSpec *spec, double eps, double *out);

/**
 * Certified upper bound on the smoothing constant used by the two-moment
 * bound.
 *
 * # Safety
 * `spec` must be a live handle; `out` must be valid for writes.
 */
enum PsdStatus psd_tau_upper(const struct PsdSpec *spec, double eps, double *out);

/**
 * Exact total variation distance from `S_n` to Poisson(`lambda`); the true
 * value lies within `value ± error_bar`.
 *
 * # Safety
 * `spec` must be a live handle; out pointers must be valid for writes.
 */
enum PsdStatus psd_oracle_tv_poisson(const struct PsdSpec *spec,
                                     double lambda,
                                     double eps,
                                     double *value,
                                     double *error_bar);

/**
 * Exact total variation distance from `S_n` to NB(`r`, `p`).
 *
 * # Safety
 * `spec` must be a live handle; out pointers must be valid for writes.
 */
enum PsdStatus psd_oracle_tv_nb(const struct PsdSpec *spec,
                                double r,
                                double p,
                                double eps,
                                double *value,
                                double *error_bar);

/**
 * Runs scenario text and returns the rendered table in `out`, to be freed
 * with [`psd_string_free`]. `markdown` selects the output format.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum PsdStatus psd_run_scenario(const char *text,
                                bool markdown,
                                bool certify,
                                double eps,
                                char **out);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards. Null is
 * ignored.
 */
void psd_string_free(char *s);

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *psd_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PSD_APPROX_H */
