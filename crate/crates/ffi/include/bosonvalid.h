#ifndef BOSONVALID_H
#define BOSONVALID_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum BvAlgorithm {
  BV_ALGORITHM_BUBBLE = 0,
  BV_ALGORITHM_HIERARCHICAL = 1,
  BV_ALGORITHM_KMEANS = 2,
} BvAlgorithm;

typedef enum BvMetric {
  BV_METRIC_L1 = 1,
  BV_METRIC_L2 = 2,
} BvMetric;

typedef enum BvInit {
  BV_INIT_UNIFORM = 0,
  BV_INIT_KMEANS_PLUS_PLUS = 1,
  BV_INIT_HIERARCHICAL = 2,
} BvInit;

/**
 * Result code of every fallible call.
 */
typedef enum BvStatus {
  BV_STATUS_OK = 0,
  BV_STATUS_NULL_POINTER = 1,
  BV_STATUS_INVALID_DIMENSION = 2,
  BV_STATUS_UNSUPPORTED_STATE = 3,
  BV_STATUS_INVALID_PARAMETER = 4,
  BV_STATUS_CAPACITY = 5,
  BV_STATUS_INFEASIBLE_K = 6,
  BV_STATUS_HALTING_FAILURE = 7,
  BV_STATUS_DEGENERATE_STRUCTURE = 8,
  BV_STATUS_INSUFFICIENT_DATA = 9,
  BV_STATUS_COVERAGE = 10,
  BV_STATUS_PARSE = 11,
  BV_STATUS_IO = 12,
  BV_STATUS_PANIC = 99,
} BvStatus;

typedef enum BvModel {
  BV_MODEL_INDISTINGUISHABLE = 0,
  BV_MODEL_DISTINGUISHABLE = 1,
  BV_MODEL_MEAN_FIELD = 2,
  BV_MODEL_UNIFORM = 3,
} BvModel;

typedef enum BvMethod {
  BV_METHOD_EXACT = 0,
  BV_METHOD_MCMC = 1,
} BvMethod;

typedef enum BvVerdict {
  BV_VERDICT_COMPATIBLE = 0,
  BV_VERDICT_INCOMPATIBLE = 1,
} BvVerdict;

/**
 * Opaque event-sample handle.
 */
typedef struct BvSample BvSample;

/**
 * Opaque interferometer handle.
 */
typedef struct BvUnitary BvUnitary;

/**
 * Clustering settings; obtain defaults from `bv_clustering_config_default`.
 */
typedef struct BvClusteringConfig {
  enum BvAlgorithm algorithm;
  size_t k;
  double radius;
  double outlier_fraction;
  size_t min_cluster_size;
  size_t max_iter;
  enum BvMetric metric;
  enum BvInit init;
  size_t voting_trials;
} BvClusteringConfig;

/**
 * Outcome of a compatibility test. Statistic, dof and p-value are those
 * of the first voting trial.
 */
typedef struct BvTestResult {
  double statistic;
  size_t dof;
  double p_value;
  enum BvVerdict verdict;
  size_t compatible_votes;
  size_t trials;
} BvTestResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or NULL. The string
 * stays valid until the next failing call on the same thread.
 */
const char *bv_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *bv_version(void);

/**
 * K-means++ with 11-vote majority, k = 25, L2.
 */
struct BvClusteringConfig bv_clustering_config_default(void);

/**
 * Permanent of the `n × n` complex matrix given by row-major real and
 * imaginary parts.
 *
 * # Safety
 * `re` and `im` must point to `n * n` doubles; `out_re`, `out_im` must be
 * writable.
 */
enum BvStatus bv_permanent(size_t n,
                           const double *re,
                           const double *im,
                           double *out_re,
                           double *out_im);

/**
 * Haar-random `m × m` unitary.
 *
 * # Safety
 * `out` must be writable; release the handle with `bv_unitary_free`.
 */
enum BvStatus bv_unitary_haar(size_t m, uint64_t seed, struct BvUnitary **out);

/**
 * Unitary from row-major real and imaginary parts; rejected unless
 * unitary to 1e-10.
 *
 * # Safety
 * `re` and `im` must point to `m * m` doubles; `out` must be writable.
 */
enum BvStatus bv_unitary_from_parts(size_t m,
                                    const double *re,
                                    const double *im,
                                    struct BvUnitary **out);

/**
 * # Safety
 * `p` must be a NUL-terminated path; `out` must be writable.
 */
enum BvStatus bv_unitary_read(const char *p, struct BvUnitary **out);

/**
 * # Safety
 * `u` must be a live handle and `p` a NUL-terminated path.
 */
enum BvStatus bv_unitary_write(const struct BvUnitary *u, const char *p);

/**
 * Number of modes, or 0 for a NULL handle.
 *
 * # Safety
 * `u` must be NULL or a live handle.
 */
size_t bv_unitary_modes(const struct BvUnitary *u);

/**
 * # Safety
 * `u` must be NULL or a handle not yet freed.
 */
void bv_unitary_free(struct BvUnitary *u);

/**
 * Probability of `n` photons entering `input_modes` and leaving in
 * `output_modes` (collision-free, 0-based) under `model`
 * (indistinguishable or distinguishable).
 *
 * # Safety
 * `u` must be a live handle; both mode arrays must hold `n` entries.
 */
enum BvStatus bv_transition_probability(const struct BvUnitary *u,
                                        const size_t *input_modes,
                                        const size_t *output_modes,
                                        size_t n,
                                        enum BvModel model_,
                                        double *out);

/**
 * Draws `events` output events for photons in `input_modes` (0-based).
 *
 * # Safety
 * `u` must be a live handle, `input_modes` must hold `n` entries and `out`
 * must be writable; release the sample with `bv_sample_free`.
 */
enum BvStatus bv_sample_draw(const struct BvUnitary *u,
                             const size_t *input_modes,
                             size_t n,
                             enum BvModel model_,
                             enum BvMethod method,
                             size_t events,
                             uint64_t seed,
                             struct BvSample **out);

/**
 * # Safety
 * `p` must be a NUL-terminated path; `out` must be writable.
 */
enum BvStatus bv_sample_read(const char *p, struct BvSample **out);

/**
 * # Safety
 * `s` must be a live handle and `p` a NUL-terminated path.
 */
enum BvStatus bv_sample_write(const struct BvSample *s, const char *p);

/**
 * Number of events, or 0 for a NULL handle.
 *
 * # Safety
 * `s` must be NULL or a live handle.
 */
size_t bv_sample_len(const struct BvSample *s);

/**
 * Photons per event, or 0 for a NULL handle.
 *
 * # Safety
 * `s` must be NULL or a live handle.
 */
size_t bv_sample_photons(const struct BvSample *s);

/**
 * Modes of the interferometer, or 0 for a NULL handle.
 *
 * # Safety
 * `s` must be NULL or a live handle.
 */
size_t bv_sample_modes(const struct BvSample *s);

/**
 * Copies the occupied modes (0-based, ascending) of event `index` into
 * `out_modes`, which must have room for `bv_sample_photons(s)` entries.
 *
 * # Safety
 * `s` must be a live handle; `out_modes` must be writable as described.
 */
enum BvStatus bv_sample_event(const struct BvSample *s, size_t index, size_t *out_modes);

/**
 * # Safety
 * `s` must be NULL or a handle not yet freed.
 */
void bv_sample_free(struct BvSample *s);

/**
 * Learns a structure on `reference` and tests `candidate` against it.
 * K-means with more than one voting trial uses majority voting.
 *
 * # Safety
 * Handles must be live; `cfg` and `out` must be valid pointers.
 */
enum BvStatus bv_compatibility_test(const struct BvSample *reference,
                                    const struct BvSample *candidate,
                                    const struct BvClusteringConfig *cfg,
                                    double alpha,
                                    uint64_t seed,
                                    struct BvTestResult *out);

/**
 * Upper-tail probability of the χ² distribution.
 *
 * # Safety
 * `out` must be writable.
 */
enum BvStatus bv_chi_square_pvalue(double statistic, size_t dof, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BOSONVALID_H */
