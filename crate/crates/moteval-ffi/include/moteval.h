/*
 * C interface of the moteval tracking-evaluation library.
 *
 * Generated by cbindgen from the moteval-ffi crate — do not edit by hand;
 * rebuild the crate to refresh this file.
 */

#ifndef MOTEVAL_H
#define MOTEVAL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
enum MotevalStatus
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  // The call succeeded.
  MotevalStatus_Ok = 0,
  // A required pointer argument was null.
  MotevalStatus_NullArgument = 1,
  // An argument was out of range or malformed.
  MotevalStatus_InvalidArgument = 2,
  // A file could not be opened or read.
  MotevalStatus_IoError = 3,
  // A file was read but its contents did not parse.
  MotevalStatus_ParseError = 4,
  // An internal error was caught at the boundary.
  MotevalStatus_Panic = 5,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum MotevalStatus MotevalStatus;
#else
typedef int32_t MotevalStatus;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

// Which temporally local metric to evaluate.
enum MotevalMetricKind
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  // Identity F1 over sliding windows (box-weighted).
  MotevalMetricKind_Lidf1 = 0,
  // Average local tracking accuracy (track-weighted).
  MotevalMetricKind_Alta = 1,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum MotevalMetricKind MotevalMetricKind;
#else
typedef int32_t MotevalMetricKind;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

// An evaluable pair of track sets with its precomputed overlap tables.
//
// Opaque: create with [`moteval_sequence_parse`], release with
// [`moteval_sequence_free`].
typedef struct MotevalSequence MotevalSequence;

// Ingest configuration for [`moteval_sequence_parse`].
//
// Obtain defaults from [`moteval_ingest_options_default`] and override
// individual fields.
typedef struct MotevalIngestOptions {
  // IOU at or above which a ground-truth/prediction pair overlaps.
  // Must be in (0, 1].
  double iou_threshold;
  // Ground-truth boxes with visibility below this are dropped.
  double min_visibility;
  // Predictions with confidence below this are dropped; NaN keeps all.
  double score_threshold;
  // Ground-truth classes kept for evaluation; null keeps class 1 only.
  const int64_t *classes;
  // Number of entries behind `classes`.
  size_t num_classes;
  // Frames per second recorded on the sequence; values <= 0 use 30.
  double fps;
  // Extends the sequence length beyond the last observed frame
  // (never truncates); 0 keeps the observed length.
  uint32_t num_frames;
} MotevalIngestOptions;

// Whole-sequence metric panel filled by [`moteval_strict_metrics`].
typedef struct MotevalStrictMetrics {
  // Detection F1: matched boxes over the mean box count per side.
  double det_f1;
  // Boxes matched by per-frame maximum-cardinality matching.
  uint64_t det_tp;
  // Ground-truth boxes left unmatched.
  uint64_t det_fn;
  // Predicted boxes left unmatched.
  uint64_t det_fp;
  // Identity F1 under the best whole-sequence track assignment.
  double idf1;
  // Identity recall.
  double idr;
  // Identity precision.
  double idp;
  // Weight of the best track assignment, in boxes.
  double idtp;
  // Average track accuracy: mean temporal IOU of the best assignment.
  double ata;
  // Track recall.
  double atr;
  // Track precision.
  double atp;
  // Weight of the best track assignment, in temporal IOU.
  double track_tp;
  // Reference MOTA (continuity-preferring matching); can be negative.
  double mota;
  // Identity switches counted by the MOTA correspondence.
  uint64_t mota_id_switches;
} MotevalStrictMetrics;

// One windowed (or strict) metric value with its accumulator, filled by
// [`moteval_local_metric`]. The accumulator parts let callers combine
// sequences without averaging ratios.
typedef struct MotevalMetricValue {
  // `numerator / denominator`, or 0 when the denominator is 0.
  double value;
  double numerator;
  double denominator;
} MotevalMetricValue;

// Overall error decomposition filled by [`moteval_decompose`]. The four
// masses plus the retained association sum to `denominator`.
typedef struct MotevalDecomposition {
  // Association score retained by the per-frame correspondence
  // (a lower bound on ATA).
  double approx_ata;
  double approx_atr;
  double approx_atp;
  // Error mass from ground-truth frames matched to nothing.
  double det_fn;
  // Error mass from predicted frames matched to nothing.
  double det_fp;
  // Error mass from objects divided across several predictions.
  double split;
  // Error mass from predictions covering several objects.
  double merge;
  // Track budget the masses are measured against (`K + K̂`).
  double denominator;
} MotevalDecomposition;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Explains the most recent failure on the calling thread, as a
// NUL-terminated UTF-8 string. Empty when nothing has failed yet. The
// pointer stays valid until the next failing call on the same thread.
const char *moteval_last_error_message(void);

// The default ingest configuration: IOU threshold 0.5, class 1, no
// visibility or score filtering, 30 fps, observed sequence length.
struct MotevalIngestOptions moteval_ingest_options_default(void);

// Parses a ground-truth file and a prediction file (MOT CSV: `frame, id,
// bb_left, bb_top, bb_width, bb_height[, conf[, class[, visibility]]]`)
// into an evaluable sequence. On success stores the new handle in `*out`;
// the caller owns it and must release it with [`moteval_sequence_free`].
//
// # Safety
// `gt_path` and `pred_path` must be NUL-terminated strings; `options`
// must be null (defaults) or point at a valid struct whose `classes`
// field is null or points at `num_classes` values; `out` must be a valid
// destination pointer.
MotevalStatus moteval_sequence_parse(const char *gt_path,
                                     const char *pred_path,
                                     const struct MotevalIngestOptions *options,
                                     struct MotevalSequence **out);

// Releases a handle returned by [`moteval_sequence_parse`]. Null is a
// no-op.
//
// # Safety
// `sequence` must be null or a pointer obtained from
// [`moteval_sequence_parse`] that has not been freed already.
void moteval_sequence_free(struct MotevalSequence *sequence);

// Number of frames in the sequence (the last populated frame, or the
// configured extension). Returns 0 for a null handle.
//
// # Safety
// `sequence` must be null or a live handle.
uint32_t moteval_sequence_num_frames(const struct MotevalSequence *sequence);

// Number of ground-truth tracks. Returns 0 for a null handle.
//
// # Safety
// `sequence` must be null or a live handle.
size_t moteval_sequence_num_gt_tracks(const struct MotevalSequence *sequence);

// Number of predicted tracks. Returns 0 for a null handle.
//
// # Safety
// `sequence` must be null or a live handle.
size_t moteval_sequence_num_pred_tracks(const struct MotevalSequence *sequence);

// Computes the whole-sequence metric panel: DetF1, IDF1, ATA and the
// reference MOTA with their components.
//
// # Safety
// `sequence` must be a live handle and `out` a valid destination pointer.
MotevalStatus moteval_strict_metrics(const struct MotevalSequence *sequence,
                                     struct MotevalStrictMetrics *out);

// Evaluates LIDF1 or ALTA at a temporal horizon. `horizon_frames` is the
// window radius in frames; a negative value evaluates the strict
// (whole-sequence) counterpart, IDF1 or ATA.
//
// # Safety
// `sequence` must be a live handle and `out` a valid destination pointer.
MotevalStatus moteval_local_metric(const struct MotevalSequence *sequence,
                                   MotevalMetricKind kind,
                                   int64_t horizon_frames,
                                   struct MotevalMetricValue *out);

// Attributes the association shortfall to missed detections, false
// positives, identity splits and identity merges over the whole sequence.
//
// # Safety
// `sequence` must be a live handle and `out` a valid destination pointer.
MotevalStatus moteval_decompose(const struct MotevalSequence *sequence,
                                struct MotevalDecomposition *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MOTEVAL_H */
