#ifndef CODEDLAT_H
#define CODEDLAT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Cap value meaning "no retransmission limit".
 */
#define CDL_UNLIMITED 0

typedef enum CdlStatus {
  CDL_STATUS_OK = 0,
  CDL_STATUS_NULL_POINTER = 1,
  /**
   * A parameter is out of range or malformed.
   */
  CDL_STATUS_INVALID_ARGUMENT = 2,
  CDL_STATUS_DIVISIBILITY = 3,
  CDL_STATUS_PRECONDITION = 4,
  /**
   * The requested quantile does not exist under the cap.
   */
  CDL_STATUS_INFEASIBLE = 5,
  CDL_STATUS_INTERNAL = 6,
  CDL_STATUS_PANIC = 7,
} CdlStatus;

/**
 * Opaque parameter handle.
 */
typedef struct CdlParams CdlParams;

typedef struct CdlBounds {
  double lower;
  double upper;
} CdlBounds;

typedef struct CdlEstimate {
  double mean;
  double std_error;
} CdlEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread, or null if none. Valid
 * until the next failing call on this thread.
 */
const char *cdl_last_error_message(void);

void cdl_clear_last_error(void);

/**
 * Library version as a static nul-terminated string.
 */
const char *cdl_version(void);

/**
 * Validates and allocates a parameter handle. Free it with
 * [`cdl_params_free`].
 *
 * # Safety
 * `out` must be valid for writing one pointer.
 */
enum CdlStatus cdl_params_new(size_t n,
                              size_t k,
                              size_t m,
                              double mu1,
                              double mu2,
                              double epsilon,
                              struct CdlParams **out);

/**
 * Parses a JSON parameter document (`n, k, m, mu1, mu2, epsilon`; optional
 * policy keys are accepted and ignored here).
 *
 * # Safety
 * `json` must be a valid nul-terminated string; `out` must be writable.
 */
enum CdlStatus cdl_params_from_json(const char *json, struct CdlParams **out);

/**
 * # Safety
 * `p` must come from this library and not have been freed; null is a no-op.
 */
void cdl_params_free(struct CdlParams *p);

/**
 * Exact expected run-time from the Markov chain; requires `k = m`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum CdlStatus cdl_expected_runtime_exact(const struct CdlParams *p, double *out);

/**
 * Lower and upper bounds on the expected run-time.
 *
 * # Safety
 * Pointers must be valid.
 */
enum CdlStatus cdl_bounds(const struct CdlParams *p, struct CdlBounds *out);

/**
 * Per-worker delivery probability `p` and system success probability
 * `P_s` under cap `gamma`.
 *
 * # Safety
 * Pointers must be valid; either out-pointer may be null to skip it.
 */
enum CdlStatus cdl_success_probability(const struct CdlParams *p,
                                       uint32_t gamma,
                                       double *out_worker,
                                       double *out_system);

/**
 * Monte Carlo estimate of the expected run-time.
 *
 * # Safety
 * Pointers must be valid.
 */
enum CdlStatus cdl_estimate_runtime(const struct CdlParams *p,
                                    uint64_t trials,
                                    uint64_t seed,
                                    struct CdlEstimate *out);

/**
 * Monte Carlo estimate of `Pr[T′ ≤ tau]` under cap `gamma`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum CdlStatus cdl_runtime_cdf(const struct CdlParams *p,
                               uint32_t gamma,
                               double tau,
                               uint64_t trials,
                               uint64_t seed,
                               struct CdlEstimate *out);

/**
 * Empirical latency quantile `T^(alpha)` under cap `gamma`. Returns
 * `CDL_STATUS_INFEASIBLE` when too few trials finish.
 *
 * # Safety
 * Pointers must be valid.
 */
enum CdlStatus cdl_latency_quantile(const struct CdlParams *p,
                                    uint32_t gamma,
                                    double alpha,
                                    uint64_t trials,
                                    uint64_t seed,
                                    double *out);

/**
 * Erasure probability of the shorter packets of the uncoded baseline.
 *
 * # Safety
 * `out` must be valid.
 */
enum CdlStatus cdl_uncoded_erasure(double epsilon, size_t k, size_t n, double *out);

/**
 * Harmonic number `H_n` (`H_0 = 0`).
 */
double cdl_harmonic(size_t n);

/**
 * Expected order statistics of `n` i.i.d. unit-rate Erlang(`shape`)
 * variables, smallest first, written to `buf[0..n]`.
 *
 * # Safety
 * `buf` must be valid for `len` writes.
 */
enum CdlStatus cdl_erlang_order_stat_means(size_t n, size_t shape, double *buf, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CODEDLAT_H */
