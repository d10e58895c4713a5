#ifndef JITTEREM_H
#define JITTEREM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Model identifiers, as used in [`JemModelParams::model`].
typedef enum JemModel {
  JEM_MODEL_EXPONENTIAL = 0,
  JEM_MODEL_GAMMA = 1,
} JemModel;

// Result code of every fallible call.
typedef enum JemStatus {
  JEM_STATUS_OK = 0,
  // A required pointer argument was null.
  JEM_STATUS_NULL_POINTER = 1,
  // A parameter or configuration value is out of its domain.
  JEM_STATUS_INVALID_ARGUMENT = 2,
  // Too few samples for the requested operation.
  JEM_STATUS_INSUFFICIENT_DATA = 3,
  // A sample was zero, negative or not finite.
  JEM_STATUS_NON_POSITIVE_SAMPLE = 4,
  JEM_STATUS_EMPTY_TRACE = 5,
  // Samples are all equal, or a fit diverged.
  JEM_STATUS_DEGENERATE_DATA = 6,
  JEM_STATUS_NON_CONVERGENCE = 7,
  // A density is unbounded at a zero sample.
  JEM_STATUS_SINGULAR_DENSITY = 8,
  // A candidate could not be fitted to the whole trace.
  JEM_STATUS_SETUP = 9,
  // Announcement bytes are malformed.
  JEM_STATUS_WIRE = 10,
  // The caller's buffer is too small; the required size was reported.
  JEM_STATUS_BUFFER_TOO_SMALL = 11,
  // An index is past the end.
  JEM_STATUS_OUT_OF_RANGE = 12,
  JEM_STATUS_PANIC = 13,
  JEM_STATUS_INTERNAL = 14,
} JemStatus;

// Opaque result of a whole-trace fit.
typedef struct JemAssignment JemAssignment;

// Opaque result of a sliding-window scan.
typedef struct JemTimeline JemTimeline;

// Opaque jitter trace.
typedef struct JemTrace JemTrace;

// A parameterized model. Exponential uses `p0` = rate and ignores `p1`.
// Gamma uses `p0` = shape and `p1` = scale.
typedef struct JemModelParams {
  uint8_t model;
  double p0;
  double p1;
} JemModelParams;

// One segment of a synthetic trace.
typedef struct JemSegment {
  struct JemModelParams params;
  size_t length;
} JemSegment;

// Summary of one scanned window.
typedef struct JemWindowReport {
  size_t start;
  size_t end;
  uint8_t dominant;
  double fraction_model0;
  bool converged;
  size_t iterations_used;
  struct JemModelParams exponential;
  struct JemModelParams gamma;
} JemWindowReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Length in bytes of the last error message on this thread, excluding the
// terminating NUL. Zero after a successful call.
size_t jem_last_error_length(void);

// Copies the last error message, NUL-terminated and truncated to fit, into
// `buf`. Returns the number of bytes written excluding the NUL.
//
// # Safety
// `buf` must be null or valid for `capacity` bytes.
size_t jem_last_error_message(char *buf, size_t capacity);

// Builds a trace from `len` samples. Every sample must be positive and finite.
//
// # Safety
// `samples` must be valid for `len` reads and `out` valid for one write.
enum JemStatus jem_trace_new(const double *samples, size_t len, struct JemTrace **out);

// Generates a seeded synthetic trace from `count` segments. When `labels` is
// non-null it receives one model id per sample and must hold the total length.
//
// # Safety
// `segments` must be valid for `count` reads, `labels` null or valid for the
// total segment length, and `out` valid for one write.
enum JemStatus jem_generate(const struct JemSegment *segments,
                            size_t count,
                            uint64_t seed,
                            uint8_t *labels,
                            struct JemTrace **out);

// Number of samples in `trace`, or 0 for null.
//
// # Safety
// `trace` must be null or a live handle.
size_t jem_trace_len(const struct JemTrace *trace);

// Releases a trace. Null is ignored.
//
// # Safety
// `trace` must be null or a handle not yet freed.
void jem_trace_free(struct JemTrace *trace);

// Log-density of `params` at `v`.
//
// # Safety
// `params` must be valid for one read and `out` for one write.
enum JemStatus jem_log_pdf(const struct JemModelParams *params, double v, double *out);

// Fits the exponential and gamma candidates to the whole trace with at most
// `max_iters` refits.
//
// # Safety
// `trace` must be a live handle and `out` valid for one write.
enum JemStatus jem_fit(const struct JemTrace *trace, size_t max_iters, struct JemAssignment **out);

// Number of labels (equal to the trace length), or 0 for null.
//
// # Safety
// `fit` must be null or a live handle.
size_t jem_assignment_len(const struct JemAssignment *fit);

// Copies the per-sample model ids into `out`. `needed` (optional) receives
// the label count.
//
// # Safety
// `fit` must be a live handle, `out` valid for `capacity` writes and `needed`
// null or valid for one write.
enum JemStatus jem_assignment_labels(const struct JemAssignment *fit,
                                     uint8_t *out,
                                     size_t capacity,
                                     size_t *needed);

// Final parameters of candidate `model` (0 = exponential, 1 = gamma).
//
// # Safety
// `fit` must be a live handle and `out` valid for one write.
enum JemStatus jem_assignment_params(const struct JemAssignment *fit,
                                     size_t model,
                                     struct JemModelParams *out);

// True when the labels stabilized before the iteration budget ran out.
//
// # Safety
// `fit` must be null or a live handle.
bool jem_assignment_converged(const struct JemAssignment *fit);

// Number of refits performed, or 0 for null.
//
// # Safety
// `fit` must be null or a live handle.
size_t jem_assignment_iterations(const struct JemAssignment *fit);

// Classification log-likelihood of the final labels, or NaN for null.
//
// # Safety
// `fit` must be null or a live handle.
double jem_assignment_loglik(const struct JemAssignment *fit);

// Releases a fit. Null is ignored.
//
// # Safety
// `fit` must be null or a handle not yet freed.
void jem_assignment_free(struct JemAssignment *fit);

// Fits every window of `window` samples whose starts are `stride` apart.
// A `stride` of 0 means non-overlapping windows.
//
// # Safety
// `trace` must be a live handle and `out` valid for one write.
enum JemStatus jem_scan(const struct JemTrace *trace,
                        size_t window,
                        size_t stride,
                        size_t max_iters,
                        struct JemTimeline **out);

// Number of successfully fitted windows, or 0 for null.
//
// # Safety
// `timeline` must be null or a live handle.
size_t jem_timeline_report_count(const struct JemTimeline *timeline);

// Number of windows whose fit failed, or 0 for null.
//
// # Safety
// `timeline` must be null or a live handle.
size_t jem_timeline_failure_count(const struct JemTimeline *timeline);

// The `index`-th successful window, in start order.
//
// # Safety
// `timeline` must be a live handle and `out` valid for one write.
enum JemStatus jem_timeline_report(const struct JemTimeline *timeline,
                                   size_t index,
                                   struct JemWindowReport *out);

// Copies the change-point sample indices into `out`. `needed` (optional)
// receives their count.
//
// # Safety
// `timeline` must be a live handle, `out` valid for `capacity` writes and
// `needed` null or valid for one write.
enum JemStatus jem_timeline_change_points(const struct JemTimeline *timeline,
                                          size_t *out,
                                          size_t capacity,
                                          size_t *needed);

// Releases a timeline. Null is ignored.
//
// # Safety
// `timeline` must be null or a handle not yet freed.
void jem_timeline_free(struct JemTimeline *timeline);

// Encodes an announcement into `buf`. `written` receives the encoded length
// (11 bytes plus 8 per parameter) even when the buffer is too small.
//
// # Safety
// `params` must be valid for one read, `buf` for `capacity` writes and
// `written` for one write.
enum JemStatus jem_announce_encode(const struct JemModelParams *params,
                                   uint32_t window_start,
                                   uint32_t window_len,
                                   uint8_t *buf,
                                   size_t capacity,
                                   size_t *written);

// Decodes announcement bytes.
//
// # Safety
// `bytes` must be valid for `len` reads and each out pointer for one write.
enum JemStatus jem_announce_decode(const uint8_t *bytes,
                                   size_t len,
                                   struct JemModelParams *params,
                                   uint32_t *window_start,
                                   uint32_t *window_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* JITTEREM_H */
