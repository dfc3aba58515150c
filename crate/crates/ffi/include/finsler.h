#ifndef FINSLER_H
#define FINSLER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FinslerStatus {
  FINSLER_STATUS_OK = 0,
  FINSLER_STATUS_NULL_POINTER = 1,
  FINSLER_STATUS_INVALID_STRING = 2,
  FINSLER_STATUS_ARGUMENT = 3,
  FINSLER_STATUS_DOMAIN = 4,
  FINSLER_STATUS_DEGENERATE = 5,
  FINSLER_STATUS_DIMENSION = 6,
  FINSLER_STATUS_PARAMETER = 7,
  FINSLER_STATUS_PRECONDITION = 8,
  FINSLER_STATUS_SAMPLING = 9,
  FINSLER_STATUS_INTEGRITY = 10,
  FINSLER_STATUS_UNKNOWN_METRIC = 11,
  FINSLER_STATUS_INTERNAL = 12,
  FINSLER_STATUS_PANIC = 13,
} FinslerStatus;

typedef enum FinslerVerdictKind {
  FINSLER_VERDICT_KIND_CONSTANT = 0,
  FINSLER_VERDICT_KIND_SCALAR_NONCONSTANT = 1,
  FINSLER_VERDICT_KIND_NOT_SCALAR = 2,
} FinslerVerdictKind;

/**
 * Opaque metric handle.
 */
typedef struct FinslerMetricHandle FinslerMetricHandle;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into the library on this thread.
 */
const char *finsler_last_error(void);

/**
 * Build catalog metric `id` in dimension `dim`.
 *
 * # Safety
 * `id` must be a nul-terminated string and `out` a valid pointer.
 */
enum FinslerStatus finsler_metric_new(const char *id, size_t dim, struct FinslerMetricHandle **out);

/**
 * # Safety
 * `h` must come from [`finsler_metric_new`] and not be used afterwards.
 */
void finsler_metric_free(struct FinslerMetricHandle *h);

/**
 * Dimension of the metric, 0 for a null handle.
 *
 * # Safety
 * `h` must be null or a live handle.
 */
size_t finsler_metric_dim(const struct FinslerMetricHandle *h);

/**
 * `F(x, y)`.
 *
 * # Safety
 * `x` and `y` hold `n` doubles, `out` one.
 */
enum FinslerStatus finsler_value(const struct FinslerMetricHandle *h,
                                 const double *x,
                                 const double *y,
                                 double *out);

/**
 * Metric tensor `g_ij` into `out[n * n]`.
 *
 * # Safety
 * `x` and `y` hold `n` doubles, `out` `n * n`.
 */
enum FinslerStatus finsler_metric_tensor(const struct FinslerMetricHandle *h,
                                         const double *x,
                                         const double *y,
                                         double *out);

/**
 * Spray coefficients `Gⁱ` into `spray[n]`, connection `Nⁱⱼ` and Jacobi
 * endomorphism `Rⁱⱼ` into `n * n` buffers. Any output may be null.
 *
 * # Safety
 * `x` and `y` hold `n` doubles; non-null outputs are large enough.
 */
enum FinslerStatus finsler_spray_tensors(const struct FinslerMetricHandle *h,
                                         const double *x,
                                         const double *y,
                                         double *spray,
                                         double *connection,
                                         double *jacobi);

/**
 * Weyl-type tensor `W₀ⁱⱼ` into `w0[n * n]` and flag curvature `κ` into
 * `kappa`. Either output may be null. Needs `n >= 3`.
 *
 * # Safety
 * `x` and `y` hold `n` doubles; non-null outputs are large enough.
 */
enum FinslerStatus finsler_weyl(const struct FinslerMetricHandle *h,
                                const double *x,
                                const double *y,
                                double *w0,
                                double *kappa);

/**
 * Constant-curvature verdict over `samples` seeded points. `kappa` is set
 * only for a constant verdict and is NaN otherwise.
 *
 * # Safety
 * `kind` and `kappa` must be valid pointers.
 */
enum FinslerStatus finsler_verdict(const struct FinslerMetricHandle *h,
                                   uint64_t seed,
                                   size_t samples,
                                   double tol,
                                   enum FinslerVerdictKind *kind,
                                   double *kappa);

/**
 * Run every reproduction criterion and return the report as JSON in
 * `*json`, to be released with [`finsler_string_free`]. `*passed` is set
 * to 1 when every check passed and 0 otherwise.
 *
 * # Safety
 * `json` and `passed` must be valid pointers.
 */
enum FinslerStatus finsler_paper_suite_json(size_t dim,
                                            uint64_t seed,
                                            size_t samples,
                                            char **json,
                                            int32_t *passed);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void finsler_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FINSLER_H */
