#ifndef HOMOCALC_H
#define HOMOCALC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Input and numerical errors use the same numbers as the
 * command-line exit statuses.
 */
typedef enum HcStatus {
  HC_STATUS_OK = 0,
  /**
   * Null pointer, bad UTF-8 or a size mismatch at the boundary.
   */
  HC_STATUS_INVALID_ARGUMENT = 1,
  /**
   * Schema, dimension or other input error reported by the library.
   */
  HC_STATUS_INPUT_ERROR = 2,
  /**
   * NoConvergence, EmptyIntersection, SaddleGap and related failures.
   */
  HC_STATUS_NUMERICAL_ERROR = 3,
  /**
   * A panic was caught at the boundary.
   */
  HC_STATUS_PANIC = 4,
} HcStatus;

/**
 * A positively homogeneous function with its family representation.
 */
typedef struct HcFunction HcFunction;

/**
 * A finite saddle family.
 */
typedef struct HcSaddle HcSaddle;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *hc_last_error(void);

/**
 * Look up a built-in function by name.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
enum HcStatus hc_function_builtin(const char *name, struct HcFunction **out);

/**
 * Load a function from a family JSON document.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum HcStatus hc_function_from_json(const char *json, struct HcFunction **out);

/**
 * # Safety
 * `h` must come from this library and not have been freed. Null is ignored.
 */
void hc_function_free(struct HcFunction *h);

/**
 * Number of arguments of `h`, or 0 for a null handle.
 *
 * # Safety
 * `h` must be null or a live handle.
 */
size_t hc_function_dim(const struct HcFunction *h);

/**
 * Evaluate `h` at `x` (length `len`) through its family.
 *
 * # Safety
 * `x` must point to `len` doubles; `value` must be writable.
 */
enum HcStatus hc_eval(const struct HcFunction *h,
                      const double *x,
                      size_t len,
                      double tol,
                      double *value);

/**
 * `h(f1, ..., fn)` for `n` elements of R^m; writes `m` doubles to `out`.
 *
 * # Safety
 * `fs` must point to `n * m` doubles and `out` to `m` writable doubles.
 */
enum HcStatus hc_fc_rm(const struct HcFunction *h,
                       const double *fs,
                       size_t n,
                       size_t m,
                       double tol,
                       double *out);

/**
 * Build a saddle family from a continuous function whose two families are
 * finite lists.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum HcStatus hc_saddle_build(const struct HcFunction *h, double tol, struct HcSaddle **out);

/**
 * Load a saddle family from the JSON written by [`hc_saddle_to_json`].
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum HcStatus hc_saddle_from_json(const char *json, struct HcSaddle **out);

/**
 * Serialize a saddle family. Release the string with [`hc_string_free`].
 *
 * # Safety
 * `s` must be a live handle; `out` must be writable.
 */
enum HcStatus hc_saddle_to_json(const struct HcSaddle *s, char **out);

/**
 * Both orderings of the saddle at `x`.
 *
 * # Safety
 * `x` must point to `len` doubles; `infsup` and `supinf` must be writable.
 */
enum HcStatus hc_saddle_eval(const struct HcSaddle *s,
                             const double *x,
                             size_t len,
                             double *infsup,
                             double *supinf);

/**
 * The calculus through a saddle family on `n` elements of R^m. Fails with
 * a numerical error when the two orderings differ by more than `tol`.
 *
 * # Safety
 * `fs` must point to `n * m` doubles and `out` to `m` writable doubles.
 */
enum HcStatus hc_saddle_fc_rm(const struct HcSaddle *s,
                              const double *fs,
                              size_t n,
                              size_t m,
                              double tol,
                              double *out);

/**
 * # Safety
 * `s` must come from this library and not have been freed. Null is ignored.
 */
void hc_saddle_free(struct HcSaddle *s);

/**
 * # Safety
 * `s` must come from [`hc_saddle_to_json`] and not have been freed.
 */
void hc_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HOMOCALC_H */
