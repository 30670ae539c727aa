#ifndef ONEBIT_EMR_H
#define ONEBIT_EMR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum EmrStatus {
  EMR_STATUS_OK = 0,
  EMR_STATUS_NULL_POINTER = 1,
  EMR_STATUS_DOMAIN = 2,
  EMR_STATUS_DEGENERATE = 3,
  EMR_STATUS_DIMENSION_MISMATCH = 4,
  EMR_STATUS_INVALID_CONFIG = 5,
  EMR_STATUS_IO = 6,
  EMR_STATUS_OVERFLOW = 7,
  EMR_STATUS_PANIC = 8,
} EmrStatus;

typedef enum EmrThresholdScheme {
  EMR_THRESHOLD_SCHEME_FULL_RES = 0,
  EMR_THRESHOLD_SCHEME_ONE_BIT_EXACT = 1,
  EMR_THRESHOLD_SCHEME_ONE_BIT_NORMAL = 2,
} EmrThresholdScheme;

typedef enum EmrCostScheme {
  EMR_COST_SCHEME_EIGHT_BIT = 0,
  EMR_COST_SCHEME_ONE_BIT = 1,
} EmrCostScheme;

typedef enum EmrStatistic {
  EMR_STATISTIC_FULL_RES = 0,
  EMR_STATISTIC_ONE_BIT = 1,
} EmrStatistic;

/**
 * Opaque `m x n` complex snapshot matrix.
 */
typedef struct EmrFrame EmrFrame;

/**
 * Opaque sensing scenario.
 */
typedef struct EmrScenario EmrScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failing call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *emr_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *emr_version(void);

/**
 * Standard normal quantile of `p` in (0, 1).
 *
 * # Safety
 * `out` must be valid for writing one `double`.
 */
enum EmrStatus emr_std_normal_quantile(double p, double *out);

/**
 * Quantile of the chi-square law with `q` degrees of freedom.
 *
 * # Safety
 * `out` must be valid for writing one `double`.
 */
enum EmrStatus emr_chi_square_quantile(double p, uint64_t q, double *out);

/**
 * Closed-form CFAR threshold for `m` antennas, `n` samples and false-alarm
 * target `epsilon`.
 *
 * # Safety
 * `out` must be valid for writing one `double`.
 */
enum EmrStatus emr_threshold(uintptr_t m,
                             uintptr_t n,
                             double epsilon,
                             enum EmrThresholdScheme scheme,
                             double *out);

/**
 * Flop and transistor counts. Fails with `Overflow` when a count does not
 * fit in 64 bits.
 *
 * # Safety
 * `flops` and `transistors` must each be valid for writing one `uint64_t`.
 */
enum EmrStatus emr_cost(enum EmrCostScheme scheme,
                        uint64_t m,
                        uint64_t n,
                        uint64_t *flops,
                        uint64_t *transistors);

/**
 * Noise-only scenario with unit noise power.
 *
 * # Safety
 * `out` must be valid for writing one pointer.
 */
enum EmrStatus emr_scenario_noise_only(uintptr_t m, uintptr_t n, struct EmrScenario **out);

/**
 * One primary user at `angle` radians and `snr_db`, unit noise power.
 *
 * # Safety
 * `out` must be valid for writing one pointer.
 */
enum EmrStatus emr_scenario_single_pu(uintptr_t m,
                                      uintptr_t n,
                                      double snr_db,
                                      double angle,
                                      struct EmrScenario **out);

/**
 * # Safety
 * `scenario` must be null or a handle from an `emr_scenario_*` constructor
 * that has not been freed.
 */
void emr_scenario_free(struct EmrScenario *scenario);

/**
 * Draws one frame of `scenario` from the random stream
 * `(master_seed, stream_id)`.
 *
 * # Safety
 * `scenario` must be a live handle; `out` must be valid for writing one
 * pointer.
 */
enum EmrStatus emr_frame_generate(const struct EmrScenario *scenario,
                                  uint64_t master_seed,
                                  uint64_t stream_id,
                                  struct EmrFrame **out);

/**
 * Frame from row-major real and imaginary planes of `m * n` doubles each.
 *
 * # Safety
 * `re` and `im` must each point to `m * n` readable doubles; `out` must be
 * valid for writing one pointer.
 */
enum EmrStatus emr_frame_from_planes(uintptr_t m,
                                     uintptr_t n,
                                     const double *re,
                                     const double *im,
                                     struct EmrFrame **out);

/**
 * # Safety
 * `frame` must be null or a live frame handle.
 */
void emr_frame_free(struct EmrFrame *frame);

/**
 * EMR statistic of a frame, one-bit or full resolution.
 *
 * # Safety
 * `frame` must be a live handle; `out` must be valid for writing one
 * `double`.
 */
enum EmrStatus emr_frame_statistic(const struct EmrFrame *frame,
                                   enum EmrStatistic statistic,
                                   double *out);

/**
 * Monte Carlo estimate of `P(statistic > threshold)` over `trials` frames
 * of `scenario`: a false-alarm rate for noise-only scenarios, a detection
 * rate otherwise. Deterministic in `master_seed` for any `workers`.
 *
 * # Safety
 * `scenario` must be a live handle; `rate` must be valid for writing one
 * `double`.
 */
enum EmrStatus emr_estimate_rate(const struct EmrScenario *scenario,
                                 enum EmrStatistic statistic,
                                 double threshold,
                                 uintptr_t trials,
                                 uint64_t master_seed,
                                 uintptr_t workers,
                                 double *rate);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ONEBIT_EMR_H */
