#ifndef QPFOURIER_H
#define QPFOURIER_H

/* Generated by cbindgen from qpfourier-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a C API call.
 */
typedef enum QpfStatus {
  /**
   * The call succeeded and out-parameters are set.
   */
  QPF_STATUS_OK = 0,
  /**
   * A pointer was null or a string was not valid UTF-8.
   */
  QPF_STATUS_INVALID_ARGUMENT = 1,
  /**
   * The library rejected the operation; see qpf_last_error().
   */
  QPF_STATUS_ERROR = 2,
  /**
   * An internal invariant failed; see qpf_last_error().
   */
  QPF_STATUS_PANIC = 3,
} QpfStatus;

/**
 * Opaque handle to a step function.
 */
typedef struct QpfStepFunction QpfStepFunction;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Version of the underlying library, as a static string; do not free.
 */
const char *qpf_version(void);

/**
 * Description of the last error on this thread, or null if the last
 * call succeeded. Valid until the next API call on the same thread; do
 * not free.
 */
const char *qpf_last_error(void);

/**
 * Releases a string returned by this library. Null is a no-op.
 *
 * # Safety
 * `ptr` must be null or a string obtained from this library that has
 * not been freed already.
 */
void qpf_string_free(char *ptr);

/**
 * Releases a step-function handle. Null is a no-op.
 *
 * # Safety
 * `f` must be null or a handle obtained from this library that has not
 * been freed already.
 */
void qpf_step_free(struct QpfStepFunction *f);

/**
 * Parses the JSON form of a step function into a new handle.
 *
 * # Safety
 * `json` must be null or a NUL-terminated string valid for the call;
 * `out` must be null or writable.
 */
enum QpfStatus qpf_step_from_json(const char *json, struct QpfStepFunction **out);

/**
 * Builds a function from the spec mini-language, e.g.
 * "indicator:center=1/2,level=-1" or "random:level=3,window=1,seed=7".
 * `seed` feeds random specs that carry none.
 *
 * # Safety
 * `spec` must be null or a NUL-terminated string valid for the call;
 * `out` must be null or writable.
 */
enum QpfStatus qpf_step_generate(const char *spec,
                                 uint32_t prime,
                                 uint64_t seed,
                                 struct QpfStepFunction **out);

/**
 * Serializes a step function to its JSON form.
 *
 * # Safety
 * `f` must be null or a live handle from this library; `out` must be
 * null or writable.
 */
enum QpfStatus qpf_step_to_json(const struct QpfStepFunction *f, char **out);

/**
 * Copies a handle.
 *
 * # Safety
 * `f` must be null or a live handle from this library; `out` must be
 * null or writable.
 */
enum QpfStatus qpf_step_clone(const struct QpfStepFunction *f, struct QpfStepFunction **out);

/**
 * The prime of the ambient field, or 0 if the handle is null.
 *
 * # Safety
 * `f` must be null or a live handle from this library.
 */
uint32_t qpf_step_prime(const struct QpfStepFunction *f);

/**
 * The representation level, or 0 if the handle is null.
 *
 * # Safety
 * `f` must be null or a live handle from this library.
 */
int32_t qpf_step_level(const struct QpfStepFunction *f);

/**
 * Number of stored pieces, or 0 if the handle is null.
 *
 * # Safety
 * `f` must be null or a live handle from this library.
 */
size_t qpf_step_piece_count(const struct QpfStepFunction *f);

/**
 * L2 norm under the normalized measure.
 *
 * # Safety
 * `f` must be null or a live handle from this library; `out` must be
 * null or writable.
 */
enum QpfStatus qpf_step_l2_norm(const struct QpfStepFunction *f, double *out);

/**
 * L2 distance between two functions over the same prime.
 *
 * # Safety
 * `f` and `g` must each be null or a live handle from this library;
 * `out` must be null or writable.
 */
enum QpfStatus qpf_l2_distance(const struct QpfStepFunction *f,
                               const struct QpfStepFunction *g,
                               double *out);

/**
 * Orthogonal projection onto characters of level <= k; the input must be
 * supported inside the unit ball.
 *
 * # Safety
 * `f` must be null or a live handle from this library; `out` must be
 * null or writable.
 */
enum QpfStatus qpf_fourier_truncate(const struct QpfStepFunction *f,
                                    int32_t k,
                                    struct QpfStepFunction **out);

/**
 * Glued approximation meeting the target N: per-coset error below 1/N,
 * total below t/N. `out_report_json` may be null; otherwise it receives
 * the run report as JSON.
 *
 * # Safety
 * `f` must be null or a live handle from this library; `out` and
 * `out_report_json` must each be null or writable.
 */
enum QpfStatus qpf_approximate(const struct QpfStepFunction *f,
                               uint64_t n_target,
                               struct QpfStepFunction **out,
                               char **out_report_json);

/**
 * Glued approximation at one fixed truncation level for every coset.
 * `out_report_json` may be null; otherwise it receives the run report
 * as JSON.
 *
 * # Safety
 * `f` must be null or a live handle from this library; `out` and
 * `out_report_json` must each be null or writable.
 */
enum QpfStatus qpf_approximate_at_level(const struct QpfStepFunction *f,
                                        int32_t k,
                                        struct QpfStepFunction **out,
                                        char **out_report_json);

/**
 * Whether the function lies in the span of shifted lifted character
 * sums (reconstruction identity within 1e-9 per coset).
 *
 * # Safety
 * `f` must be null or a live handle from this library; `out` must be
 * null or writable.
 */
enum QpfStatus qpf_membership_check(const struct QpfStepFunction *f, bool *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QPFOURIER_H */
