#ifndef GOALREC_H
#define GOALREC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GrStatus {
  GR_STATUS_OK = 0,
  GR_STATUS_NULL_ARGUMENT = 1,
  GR_STATUS_INVALID_UTF8 = 2,
  GR_STATUS_LOAD = 3,
  GR_STATUS_RECOGNIZE = 4,
  GR_STATUS_BUFFER_TOO_SMALL = 5,
  GR_STATUS_PANIC = 6,
} GrStatus;

/**
 * A loaded recognition problem.
 */
typedef struct GrBundle GrBundle;

/**
 * The outcome of one recogniser on one bundle.
 */
typedef struct GrResult GrResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next call into the library on the same thread.
 */
const char *gr_last_error(void);

/**
 * Loads the bundle in directory `dir`.
 *
 * # Safety
 * `dir` must be a NUL-terminated string; `out` must be writable.
 */
enum GrStatus gr_bundle_load(const char *dir, struct GrBundle **out);

/**
 * # Safety
 * `bundle` must come from `gr_bundle_load` and not be used afterwards.
 */
void gr_bundle_free(struct GrBundle *bundle);

/**
 * Number of candidate goals, or 0 for a null handle.
 *
 * # Safety
 * `bundle` must be null or a live handle.
 */
size_t gr_bundle_hypothesis_count(const struct GrBundle *bundle);

/**
 * Landmark recogniser, including landmark extraction.
 *
 * # Safety
 * `bundle` must be a live handle; `out` must be writable.
 */
enum GrStatus gr_recognize_lm(const struct GrBundle *bundle, struct GrResult **out);

/**
 * Baseline that returns every candidate goal.
 *
 * # Safety
 * `bundle` must be a live handle; `out` must be writable.
 */
enum GrStatus gr_recognize_uniform(const struct GrBundle *bundle, struct GrResult **out);

/**
 * The model prompt for `bundle`, to be released with `gr_string_free`.
 *
 * # Safety
 * `bundle` must be a live handle; `out` must be writable.
 */
enum GrStatus gr_build_prompt(const struct GrBundle *bundle, char **out);

/**
 * Scores a model reply obtained elsewhere. Unparseable text is not an
 * error: it yields a result with status "garbage" and no prediction.
 *
 * # Safety
 * `bundle` must be a live handle, `text` NUL-terminated, `out` writable.
 */
enum GrStatus gr_parse_response(const struct GrBundle *bundle,
                                const char *text,
                                struct GrResult **out);

/**
 * Size of the predicted goal set, or 0 for a null handle.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
size_t gr_result_spread(const struct GrResult *result);

/**
 * Copies the predicted hypothesis indices, ascending, into `buf`. `len`
 * receives the number of indices even when `cap` is too small, in which
 * case nothing is copied and `GR_STATUS_BUFFER_TOO_SMALL` is returned.
 *
 * # Safety
 * `result` must be a live handle, `buf` valid for `cap` writes (may be
 * null when `cap` is 0), `len` writable.
 */
enum GrStatus gr_result_predicted(const struct GrResult *result,
                                  size_t *buf,
                                  size_t cap,
                                  size_t *len);

/**
 * The whole result as JSON, to be released with `gr_string_free`.
 *
 * # Safety
 * `result` must be a live handle; `out` must be writable.
 */
enum GrStatus gr_result_to_json(const struct GrResult *result, char **out);

/**
 * # Safety
 * `result` must come from this library and not be used afterwards.
 */
void gr_result_free(struct GrResult *result);

/**
 * # Safety
 * `s` must be a string returned by this library, or null.
 */
void gr_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GOALREC_H */
