#ifndef DTQUANT_H
#define DTQUANT_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Distance used by the transforms. Chamfer weights are read only for
// `DTQ_METRIC_KIND_CHAMFER`.
typedef enum DtqMetricKind {
  DTQ_METRIC_KIND_EUCLIDEAN = 0,
  DTQ_METRIC_KIND_MANHATTAN = 1,
  DTQ_METRIC_KIND_CHEBYSHEV = 2,
  DTQ_METRIC_KIND_CHAMFER = 3,
} DtqMetricKind;

// Result code of every call.
typedef enum DtqStatus {
  DTQ_STATUS_OK = 0,
  DTQ_STATUS_INVALID_ARGUMENT = 1,
  DTQ_STATUS_EMPTY_SET = 2,
  DTQ_STATUS_FORMAT = 3,
  DTQ_STATUS_IO = 4,
  DTQ_STATUS_INVALID_INPUT = 5,
  DTQ_STATUS_NUMERICAL_FAILURE = 6,
  DTQ_STATUS_EMPTY_BAND = 7,
  DTQ_STATUS_NULL_POINTER = 8,
  DTQ_STATUS_PANIC = 9,
} DtqStatus;

typedef enum DtqTarget {
  DTQ_TARGET_FOREGROUND = 0,
  DTQ_TARGET_BACKGROUND = 1,
} DtqTarget;

// Opaque boolean grid field.
typedef struct DtqBinaryField DtqBinaryField;

// Opaque float64 grid field.
typedef struct DtqScalarField DtqScalarField;

typedef struct DtqMetric {
  enum DtqMetricKind kind;
  double axial;
  double diagonal;
} DtqMetric;

typedef struct DtqReinitParams {
  size_t iterations;
  double cfl;
  double sign_epsilon;
  size_t log_every;
} DtqReinitParams;

// Error metrics of one field. `e_d` is NaN and `has_e_d` is 0 when no
// exact gradient was supplied.
typedef struct DtqErrorReport {
  size_t iteration;
  double e_r;
  double e_mg;
  double e_d;
  uint8_t has_e_d;
} DtqErrorReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *dtq_last_error(void);

// Library version as a static NUL-terminated string.
const char *dtq_version(void);

struct DtqMetric dtq_metric_euclidean(void);

struct DtqReinitParams dtq_reinit_params_default(void);

// Creates a scalar field from `prod(dims)` row-major values. `origin` may
// be null for the zero origin.
//
// # Safety
// `dims` (and `origin` if non-null) must point to `ndim` readable elements
// and `values` to `prod(dims)`.
enum DtqStatus dtq_scalar_new(size_t ndim,
                              const size_t *dims,
                              double spacing,
                              const double *origin,
                              const double *values,
                              struct DtqScalarField **out);

// # Safety
// `field` must be null or a handle not yet freed.
void dtq_scalar_free(struct DtqScalarField *field);

// # Safety
// `field` must be a live handle; `out` must be writable.
enum DtqStatus dtq_scalar_len(const struct DtqScalarField *field, size_t *out);

// Copies the field values into `buf`, which must hold `len` cells.
//
// # Safety
// `field` must be a live handle; `buf` must be writable for `len` doubles.
enum DtqStatus dtq_scalar_copy_values(const struct DtqScalarField *field, double *buf, size_t len);

// Writes the rank to `ndim` and, if `dims` is non-null, the extents to the
// first `ndim` entries of `dims` (at most 3).
//
// # Safety
// `field` must be a live handle; `ndim` writable; `dims` null or writable
// for the field's rank.
enum DtqStatus dtq_scalar_shape(const struct DtqScalarField *field,
                                size_t *ndim,
                                size_t *dims,
                                double *spacing);

// Creates a binary field; any nonzero byte marks a foreground cell.
//
// # Safety
// Same layout contract as [`dtq_scalar_new`] with one byte per cell.
enum DtqStatus dtq_binary_new(size_t ndim,
                              const size_t *dims,
                              double spacing,
                              const double *origin,
                              const uint8_t *values,
                              struct DtqBinaryField **out);

// # Safety
// `field` must be null or a handle not yet freed.
void dtq_binary_free(struct DtqBinaryField *field);

// Copies the cells as 0/1 bytes into `buf` of `len` entries.
//
// # Safety
// `field` must be a live handle; `buf` writable for `len` bytes.
enum DtqStatus dtq_binary_copy_values(const struct DtqBinaryField *field, uint8_t *buf, size_t len);

// Number of foreground cells.
//
// # Safety
// `field` must be a live handle; `out` writable.
enum DtqStatus dtq_binary_count(const struct DtqBinaryField *field, size_t *out);

// Foreground is every cell with a negative value.
//
// # Safety
// `phi` must be a live handle; `out` writable.
enum DtqStatus dtq_binarize(const struct DtqScalarField *phi, struct DtqBinaryField **out);

// Unsigned distance from every cell to the nearest `target` cell.
//
// # Safety
// `b` must be a live handle; `metric` readable; `out` writable.
enum DtqStatus dtq_distance_transform(const struct DtqBinaryField *b,
                                      const struct DtqMetric *metric,
                                      enum DtqTarget target,
                                      struct DtqScalarField **out);

// Signed transform, negative inside; `corrected` non-zero selects the
// half-cell shifted form.
//
// # Safety
// `b` must be a live handle; `metric` readable; `out` writable.
enum DtqStatus dtq_signed_distance_transform(const struct DtqBinaryField *b,
                                             const struct DtqMetric *metric,
                                             uint8_t corrected,
                                             struct DtqScalarField **out);

// Seeded sign-preserving random perturbation of amplitude `h / alpha`.
//
// # Safety
// `phi` must be a live handle; `out` writable.
enum DtqStatus dtq_dither(const struct DtqScalarField *phi,
                          double alpha,
                          uint64_t seed,
                          struct DtqScalarField **out);

// Error metrics of `phi` against `reference`. Pass `n_gradient = 0` (and
// any `exact_gradient`) to skip `e_d`; otherwise one component per axis.
//
// # Safety
// Handles must be live; `exact_gradient` readable for `n_gradient`
// handles; `out` writable.
enum DtqStatus dtq_error_metrics(const struct DtqScalarField *phi,
                                 const struct DtqBinaryField *reference,
                                 const struct DtqScalarField *const *exact_gradient,
                                 size_t n_gradient,
                                 struct DtqErrorReport *out);

// Runs the reinitialization. The final field goes to `out`; if
// `final_report` is non-null it receives the last logged metrics.
//
// # Safety
// Handles must be live; `params` readable; `exact_gradient` as in
// [`dtq_error_metrics`]; `out` writable.
enum DtqStatus dtq_reinitialize(const struct DtqScalarField *phi0,
                                const struct DtqBinaryField *reference,
                                const struct DtqScalarField *const *exact_gradient,
                                size_t n_gradient,
                                const struct DtqReinitParams *params,
                                struct DtqScalarField **out,
                                struct DtqErrorReport *final_report);

// # Safety
// `field` must be a live handle; `path` a NUL-terminated UTF-8 string.
enum DtqStatus dtq_scalar_save(const struct DtqScalarField *field, const char *path);

// # Safety
// `path` must be a NUL-terminated UTF-8 string; `out` writable.
enum DtqStatus dtq_scalar_load(const char *path, struct DtqScalarField **out);

// # Safety
// `field` must be a live handle; `path` a NUL-terminated UTF-8 string.
enum DtqStatus dtq_binary_save(const struct DtqBinaryField *field, const char *path);

// # Safety
// `path` must be a NUL-terminated UTF-8 string; `out` writable.
enum DtqStatus dtq_binary_load(const char *path, struct DtqBinaryField **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DTQUANT_H */
