#ifndef HQIDS_H
#define HQIDS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes shared by every fallible function.
 */
typedef enum HqidsStatus {
  HQIDS_STATUS_OK = 0,
  HQIDS_STATUS_NULL_POINTER = 1,
  HQIDS_STATUS_INVALID_ARGUMENT = 2,
  HQIDS_STATUS_IO = 3,
  HQIDS_STATUS_PARSE = 4,
  HQIDS_STATUS_QUANTUM = 5,
  HQIDS_STATUS_MODEL = 6,
  HQIDS_STATUS_METRICS = 7,
  HQIDS_STATUS_PANIC = 8,
} HqidsStatus;

/**
 * Opaque embedding circuit: fixed entangling weights plus angle scale.
 */
typedef struct HqidsCircuit HqidsCircuit;

/**
 * Opaque trained classifier (logistic regression or SVM).
 */
typedef struct HqidsModel HqidsModel;

/**
 * Per-class precision, recall, F1 and support.
 */
typedef struct HqidsClassMetrics {
  double precision;
  double recall;
  double f1;
  uint64_t support;
} HqidsClassMetrics;

/**
 * Binary classification summary. Index 0 is benign, 1 is attack.
 */
typedef struct HqidsMetrics {
  double accuracy;
  struct HqidsClassMetrics classes[2];
  struct HqidsClassMetrics macro_avg;
  struct HqidsClassMetrics weighted_avg;
  uint64_t tp;
  uint64_t fp;
  uint64_t tn;
  uint64_t fn_;
} HqidsMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *hqids_version(void);

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next call into the library from the same thread.
 */
const char *hqids_last_error(void);

/**
 * Circuit with weights drawn uniformly from `[0, 2pi)` by `seed`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum HqidsStatus hqids_circuit_new(size_t n_qubits,
                                   size_t depth,
                                   uint64_t seed,
                                   double angle_scale,
                                   struct HqidsCircuit **out);

/**
 * Circuit from explicit angles, layer-major then qubit then `(phi, theta, omega)`.
 *
 * # Safety
 * `angles` must point to `len` doubles and `out` must be valid for writes.
 */
enum HqidsStatus hqids_circuit_from_angles(size_t n_qubits,
                                           size_t depth,
                                           const double *angles,
                                           size_t len,
                                           double angle_scale,
                                           struct HqidsCircuit **out);

/**
 * Circuit from a `weights.txt` written by the pipeline.
 *
 * # Safety
 * The path must be a NUL-terminated string and `out` must be valid for writes.
 */
enum HqidsStatus hqids_circuit_load(const char *weights_path,
                                    double angle_scale,
                                    struct HqidsCircuit **out);

/**
 * Number of qubits, which is both the input and the output width. 0 for null.
 *
 * # Safety
 * `circuit` must be null or a live handle.
 */
size_t hqids_circuit_n_qubits(const struct HqidsCircuit *circuit);

/**
 * Embeds `n_rows` row-major samples of width `n_qubits` into `out`, which
 * must hold `n_rows * n_qubits` doubles.
 *
 * # Safety
 * Pointers must be valid for the stated lengths.
 */
enum HqidsStatus hqids_circuit_embed(const struct HqidsCircuit *circuit,
                                     const double *x,
                                     size_t n_rows,
                                     double *out,
                                     size_t out_len);

/**
 * # Safety
 * `circuit` must be null or a handle not yet freed.
 */
void hqids_circuit_free(struct HqidsCircuit *circuit);

/**
 * Loads a `.model` file written by the pipeline.
 *
 * # Safety
 * The path must be a NUL-terminated string and `out` must be valid for writes.
 */
enum HqidsStatus hqids_model_load(const char *model_path, struct HqidsModel **out);

/**
 * Input width the model expects, 0 for null or an SVM without support vectors.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t hqids_model_dim(const struct HqidsModel *model);

/**
 * Labels (0 benign, 1 attack) for `n_rows` row-major samples of width `dim`.
 *
 * # Safety
 * `x` must hold `n_rows * dim` doubles and `labels` `n_rows` bytes.
 */
enum HqidsStatus hqids_model_predict(const struct HqidsModel *model,
                                     const double *x,
                                     size_t n_rows,
                                     size_t dim,
                                     uint8_t *labels);

/**
 * Raw scores: the SVM decision value or the logistic logit. Non-negative
 * means attack.
 *
 * # Safety
 * `x` must hold `n_rows * dim` doubles and `scores` `n_rows` doubles.
 */
enum HqidsStatus hqids_model_decision(const struct HqidsModel *model,
                                      const double *x,
                                      size_t n_rows,
                                      size_t dim,
                                      double *scores);

/**
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void hqids_model_free(struct HqidsModel *model);

/**
 * Accuracy, per-class and averaged precision/recall/F1 and the confusion
 * counts for `n` label pairs in `{0, 1}`.
 *
 * # Safety
 * `y_true` and `y_pred` must hold `n` bytes and `out` must be valid for writes.
 */
enum HqidsStatus hqids_metrics_summarize(const uint8_t *y_true,
                                         const uint8_t *y_pred,
                                         size_t n,
                                         struct HqidsMetrics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HQIDS_H */
