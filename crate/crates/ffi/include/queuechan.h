#ifndef QUEUECHAN_H
#define QUEUECHAN_H

/* Generated with cbindgen:0.29.4 */

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define QC_OK 0

#define QC_ERR_INVALID_DISTRIBUTION 1

#define QC_ERR_INVALID_PARAMETER 2

#define QC_ERR_STABILITY_VIOLATION 3

#define QC_ERR_NO_BRACKET 4

#define QC_ERR_ASSUMPTION_VIOLATION 5

#define QC_ERR_RECURSION_UNSTABLE 6

#define QC_ERR_CONVENTION 7

#define QC_ERR_INTEGRALITY 8

#define QC_ERR_MEAN_MISMATCH 9

#define QC_ERR_INCONSISTENT_TIMESTAMPS 10

#define QC_ERR_DEGENERATE_NOISE 11

#define QC_ERR_RUNAWAY_QUEUE 12

#define QC_ERR_INFEASIBLE 13

#define QC_ERR_CONFIG 14

#define QC_ERR_IO 15

/**
 * A required pointer argument was null or a string was not valid UTF-8.
 */
#define QC_ERR_NULL_OR_UTF8 100

/**
 * A Rust panic was caught at the boundary.
 */
#define QC_ERR_PANIC 101

/**
 * Opaque discrete distribution on the positive integers.
 */
typedef struct QcDist QcDist;

/**
 * Opaque noise model.
 */
typedef struct QcNoiseModel QcNoiseModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the next failing call on
 * the same thread; do not free.
 */
const char *qc_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qc_version(void);

/**
 * Frees a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void qc_string_free(char *s);

/**
 * Parses a noise model from its JSON form.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
int32_t qc_noise_from_json(const char *json, struct QcNoiseModel **out);

/**
 * Binary symmetric noise with flip probability `p_low` for queue lengths up to `b` and
 * `p_high` above.
 *
 * # Safety
 * `out` must be writable.
 */
int32_t qc_noise_binary_flip(size_t b, double p_low, double p_high, struct QcNoiseModel **out);

/**
 * # Safety
 * `nm` must be null or a handle from this library that has not been freed.
 */
void qc_noise_free(struct QcNoiseModel *nm);

/**
 * Parses a distribution from its JSON form, e.g. `{"kind":"geometric","rate":0.3}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
int32_t qc_dist_from_json(const char *json, struct QcDist **out);

/**
 * Geometric law on `{1, 2, ...}` with success probability `rate`.
 *
 * # Safety
 * `out` must be writable.
 */
int32_t qc_dist_geometric(double rate, struct QcDist **out);

/**
 * Point mass at `value`.
 *
 * # Safety
 * `out` must be writable.
 */
int32_t qc_dist_deterministic(uint64_t value, struct QcDist **out);

/**
 * # Safety
 * `d` must be a live handle; `out` must be writable.
 */
int32_t qc_dist_mean(const struct QcDist *d, double *out);

/**
 * # Safety
 * `d` must be null or a handle from this library that has not been freed.
 */
void qc_dist_free(struct QcDist *d);

/**
 * Fixed point of the arrival curve for inter-arrival law `arrival` and geometric service
 * rate `mu`.
 *
 * # Safety
 * `arrival` must be a live handle; `out` must be writable.
 */
int32_t qc_solve_sigma(const struct QcDist *arrival, double mu, double *out);

/**
 * Capacity in bits per slot of the queue with inter-arrival law `arrival` and geometric
 * service rate `mu`, truncating the queue-length law at `q_max`.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
int32_t qc_capacity_g_geo1(const struct QcDist *arrival,
                           double mu,
                           const struct QcNoiseModel *noise,
                           size_t q_max,
                           double *out);

/**
 * Capacity in bits per slot of the queue with Bernoulli(`lambda`) arrivals and general
 * service law `service`.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
int32_t qc_capacity_geo_g1(double lambda,
                           const struct QcDist *service,
                           const struct QcNoiseModel *noise,
                           size_t q_max,
                           double *out);

/**
 * Runs a named command (`capacity`, `sweep`, `sigma`, `stationary`, `simulate`,
 * `infodensity`, `codeexp`, `extremal`, `bounds`) on a JSON configuration, as the CLI does,
 * and writes the JSON result to `*out_json`. Stochastic commands need `sim.seed` in the
 * configuration. `*ok` is set to 0 when a per-point error or assertion failed, else 1.
 *
 * # Safety
 * Strings must be NUL-terminated; `out_json` and `ok` must be writable. Free `*out_json`
 * with [`qc_string_free`].
 */
int32_t qc_run_json(const char *command, const char *config_json, char **out_json, int32_t *ok);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QUEUECHAN_H */
