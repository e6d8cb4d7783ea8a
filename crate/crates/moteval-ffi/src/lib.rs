//! C ABI for the `moteval` tracking-evaluation library.
//!
//! The surface is a handful of functions around one opaque handle:
//! [`moteval_sequence_parse`] reads a ground-truth and a prediction file in
//! MOT CSV format and returns a [`MotevalSequence`]; the metric functions
//! take that handle and fill plain C structs; [`moteval_sequence_free`]
//! releases it. Every fallible call returns a [`MotevalStatus`], and
//! [`moteval_last_error_message`] retrieves a human-readable explanation of
//! the most recent failure on the calling thread.
//!
//! All functions are panic-safe: a panic inside the library is caught at
//! the boundary and reported as [`MotevalStatus::Panic`] instead of
//! unwinding into foreign stack frames.
//!
//! The matching C header lives at `include/moteval.h` and is regenerated
//! by the build script.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use moteval::decompose;
use moteval::ingest::{self, IngestConfig, IngestError, ScoreThreshold};
use moteval::local::{self, Horizon};
use moteval::metrics;
use moteval::overlap::{build_overlap_series, OverlapSeries};

/// Result code of every fallible call.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MotevalStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// An argument was out of range or malformed.
    InvalidArgument = 2,
    /// A file could not be opened or read.
    IoError = 3,
    /// A file was read but its contents did not parse.
    ParseError = 4,
    /// An internal error was caught at the boundary.
    Panic = 5,
}

/// Which temporally local metric to evaluate.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MotevalMetricKind {
    /// Identity F1 over sliding windows (box-weighted).
    Lidf1 = 0,
    /// Average local tracking accuracy (track-weighted).
    Alta = 1,
}

/// An evaluable pair of track sets with its precomputed overlap tables.
///
/// Opaque: create with [`moteval_sequence_parse`], release with
/// [`moteval_sequence_free`].
pub struct MotevalSequence {
    series: OverlapSeries,
}

/// Ingest configuration for [`moteval_sequence_parse`].
///
/// Obtain defaults from [`moteval_ingest_options_default`] and override
/// individual fields.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MotevalIngestOptions {
    /// IOU at or above which a ground-truth/prediction pair overlaps.
    /// Must be in (0, 1].
    pub iou_threshold: f64,
    /// Ground-truth boxes with visibility below this are dropped.
    pub min_visibility: f64,
    /// Predictions with confidence below this are dropped; NaN keeps all.
    pub score_threshold: f64,
    /// Ground-truth classes kept for evaluation; null keeps class 1 only.
    pub classes: *const i64,
    /// Number of entries behind `classes`.
    pub num_classes: usize,
    /// Frames per second recorded on the sequence; values <= 0 use 30.
    pub fps: f64,
    /// Extends the sequence length beyond the last observed frame
    /// (never truncates); 0 keeps the observed length.
    pub num_frames: u32,
}

/// Whole-sequence metric panel filled by [`moteval_strict_metrics`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MotevalStrictMetrics {
    /// Detection F1: matched boxes over the mean box count per side.
    pub det_f1: f64,
    /// Boxes matched by per-frame maximum-cardinality matching.
    pub det_tp: u64,
    /// Ground-truth boxes left unmatched.
    pub det_fn: u64,
    /// Predicted boxes left unmatched.
    pub det_fp: u64,
    /// Identity F1 under the best whole-sequence track assignment.
    pub idf1: f64,
    /// Identity recall.
    pub idr: f64,
    /// Identity precision.
    pub idp: f64,
    /// Weight of the best track assignment, in boxes.
    pub idtp: f64,
    /// Average track accuracy: mean temporal IOU of the best assignment.
    pub ata: f64,
    /// Track recall.
    pub atr: f64,
    /// Track precision.
    pub atp: f64,
    /// Weight of the best track assignment, in temporal IOU.
    pub track_tp: f64,
    /// Reference MOTA (continuity-preferring matching); can be negative.
    pub mota: f64,
    /// Identity switches counted by the MOTA correspondence.
    pub mota_id_switches: u64,
}

/// One windowed (or strict) metric value with its accumulator, filled by
/// [`moteval_local_metric`]. The accumulator parts let callers combine
/// sequences without averaging ratios.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MotevalMetricValue {
    /// `numerator / denominator`, or 0 when the denominator is 0.
    pub value: f64,
    pub numerator: f64,
    pub denominator: f64,
}

/// Overall error decomposition filled by [`moteval_decompose`]. The four
/// masses plus the retained association sum to `denominator`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MotevalDecomposition {
    /// Association score retained by the per-frame correspondence
    /// (a lower bound on ATA).
    pub approx_ata: f64,
    pub approx_atr: f64,
    pub approx_atp: f64,
    /// Error mass from ground-truth frames matched to nothing.
    pub det_fn: f64,
    /// Error mass from predicted frames matched to nothing.
    pub det_fp: f64,
    /// Error mass from objects divided across several predictions.
    pub split: f64,
    /// Error mass from predictions covering several objects.
    pub merge: f64,
    /// Track budget the masses are measured against (`K + K̂`).
    pub denominator: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(text).expect("interior NULs replaced");
    });
}

/// Explains the most recent failure on the calling thread, as a
/// NUL-terminated UTF-8 string. Empty when nothing has failed yet. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn moteval_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// The default ingest configuration: IOU threshold 0.5, class 1, no
/// visibility or score filtering, 30 fps, observed sequence length.
#[no_mangle]
pub extern "C" fn moteval_ingest_options_default() -> MotevalIngestOptions {
    MotevalIngestOptions {
        iou_threshold: 0.5,
        min_visibility: 0.0,
        score_threshold: f64::NAN,
        classes: std::ptr::null(),
        num_classes: 0,
        fps: 30.0,
        num_frames: 0,
    }
}

/// Runs `body` with panics converted to [`MotevalStatus::Panic`].
fn guarded(body: impl FnOnce() -> MotevalStatus) -> MotevalStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| (*s).to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown internal error".to_string());
            set_error(format!("internal error: {message}"));
            MotevalStatus::Panic
        }
    }
}

/// # Safety
/// `raw` must be null or a NUL-terminated string pointer.
unsafe fn utf8_path<'a>(raw: *const c_char, what: &str) -> Result<&'a str, MotevalStatus> {
    if raw.is_null() {
        set_error(format!("{what} is null"));
        return Err(MotevalStatus::NullArgument);
    }
    match CStr::from_ptr(raw).to_str() {
        Ok(text) => Ok(text),
        Err(_) => {
            set_error(format!("{what} is not valid UTF-8"));
            Err(MotevalStatus::InvalidArgument)
        }
    }
}

/// # Safety
/// `options.classes` must be null or point at `options.num_classes` values.
unsafe fn ingest_config(options: &MotevalIngestOptions) -> Result<(IngestConfig, f64), MotevalStatus> {
    if !(options.iou_threshold > 0.0 && options.iou_threshold <= 1.0) {
        set_error(format!("iou_threshold {} is outside (0, 1]", options.iou_threshold));
        return Err(MotevalStatus::InvalidArgument);
    }
    if options.classes.is_null() && options.num_classes != 0 {
        set_error("classes is null but num_classes is nonzero");
        return Err(MotevalStatus::NullArgument);
    }
    let gt_classes: BTreeSet<i64> = if options.classes.is_null() {
        BTreeSet::from([1])
    } else {
        std::slice::from_raw_parts(options.classes, options.num_classes).iter().copied().collect()
    };
    if gt_classes.is_empty() {
        set_error("num_classes is zero: at least one ground-truth class is required");
        return Err(MotevalStatus::InvalidArgument);
    }
    let score_threshold = if options.score_threshold.is_nan() {
        ScoreThreshold::KeepAll
    } else {
        ScoreThreshold::Fixed(options.score_threshold)
    };
    let cfg = IngestConfig {
        iou_threshold: options.iou_threshold,
        gt_classes,
        min_visibility: options.min_visibility,
        score_threshold,
        fps_override: None,
        seq_length_override: (options.num_frames > 0).then_some(options.num_frames),
    };
    let fps = if options.fps > 0.0 { options.fps } else { 30.0 };
    Ok((cfg, fps))
}

fn ingest_status(error: &IngestError, path: &str) -> MotevalStatus {
    set_error(format!("{path}: {error}"));
    match error {
        IngestError::Io(_) => MotevalStatus::IoError,
        _ => MotevalStatus::ParseError,
    }
}

/// Parses a ground-truth file and a prediction file (MOT CSV: `frame, id,
/// bb_left, bb_top, bb_width, bb_height[, conf[, class[, visibility]]]`)
/// into an evaluable sequence. On success stores the new handle in `*out`;
/// the caller owns it and must release it with [`moteval_sequence_free`].
///
/// # Safety
/// `gt_path` and `pred_path` must be NUL-terminated strings; `options`
/// must be null (defaults) or point at a valid struct whose `classes`
/// field is null or points at `num_classes` values; `out` must be a valid
/// destination pointer.
#[no_mangle]
pub unsafe extern "C" fn moteval_sequence_parse(
    gt_path: *const c_char,
    pred_path: *const c_char,
    options: *const MotevalIngestOptions,
    out: *mut *mut MotevalSequence,
) -> MotevalStatus {
    guarded(|| {
        if out.is_null() {
            set_error("out is null");
            return MotevalStatus::NullArgument;
        }
        let gt_path = match utf8_path(gt_path, "gt_path") {
            Ok(path) => path,
            Err(status) => return status,
        };
        let pred_path = match utf8_path(pred_path, "pred_path") {
            Ok(path) => path,
            Err(status) => return status,
        };
        let defaults = moteval_ingest_options_default();
        let options = if options.is_null() { &defaults } else { &*options };
        let (cfg, fps) = match ingest_config(options) {
            Ok(parts) => parts,
            Err(status) => return status,
        };
        let gt_entries = match ingest::parse_mot_path(gt_path) {
            Ok(entries) => entries,
            Err(error) => return ingest_status(&error, gt_path),
        };
        let pred_entries = match ingest::parse_mot_path(pred_path) {
            Ok(entries) => entries,
            Err(error) => return ingest_status(&error, pred_path),
        };
        let name = Path::new(gt_path)
            .file_stem()
            .map(|stem| stem.to_string_lossy().into_owned())
            .unwrap_or_else(|| gt_path.to_string());
        let sequence = ingest::build_sequence(name, &gt_entries, &pred_entries, &cfg, fps);
        let series = build_overlap_series(&sequence, cfg.iou_threshold);
        *out = Box::into_raw(Box::new(MotevalSequence { series }));
        MotevalStatus::Ok
    })
}

/// Releases a handle returned by [`moteval_sequence_parse`]. Null is a
/// no-op.
///
/// # Safety
/// `sequence` must be null or a pointer obtained from
/// [`moteval_sequence_parse`] that has not been freed already.
#[no_mangle]
pub unsafe extern "C" fn moteval_sequence_free(sequence: *mut MotevalSequence) {
    if !sequence.is_null() {
        drop(Box::from_raw(sequence));
    }
}

/// Number of frames in the sequence (the last populated frame, or the
/// configured extension). Returns 0 for a null handle.
///
/// # Safety
/// `sequence` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn moteval_sequence_num_frames(sequence: *const MotevalSequence) -> u32 {
    sequence.as_ref().map_or(0, |s| s.series.num_frames())
}

/// Number of ground-truth tracks. Returns 0 for a null handle.
///
/// # Safety
/// `sequence` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn moteval_sequence_num_gt_tracks(sequence: *const MotevalSequence) -> usize {
    sequence.as_ref().map_or(0, |s| s.series.num_gt())
}

/// Number of predicted tracks. Returns 0 for a null handle.
///
/// # Safety
/// `sequence` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn moteval_sequence_num_pred_tracks(
    sequence: *const MotevalSequence,
) -> usize {
    sequence.as_ref().map_or(0, |s| s.series.num_pred())
}

/// Computes the whole-sequence metric panel: DetF1, IDF1, ATA and the
/// reference MOTA with their components.
///
/// # Safety
/// `sequence` must be a live handle and `out` a valid destination pointer.
#[no_mangle]
pub unsafe extern "C" fn moteval_strict_metrics(
    sequence: *const MotevalSequence,
    out: *mut MotevalStrictMetrics,
) -> MotevalStatus {
    guarded(|| {
        let (Some(handle), false) = (sequence.as_ref(), out.is_null()) else {
            set_error("sequence and out must be non-null");
            return MotevalStatus::NullArgument;
        };
        let strict = metrics::strict_metrics(&handle.series);
        *out = MotevalStrictMetrics {
            det_f1: strict.det.det_f1,
            det_tp: strict.det.det_tp,
            det_fn: strict.det.det_fn,
            det_fp: strict.det.det_fp,
            idf1: strict.id.idf1,
            idr: strict.id.idr,
            idp: strict.id.idp,
            idtp: strict.id.idtp,
            ata: strict.track.ata,
            atr: strict.track.atr,
            atp: strict.track.atp,
            track_tp: strict.track.track_tp,
            mota: strict.mota.mota,
            mota_id_switches: strict.mota.id_switches,
        };
        MotevalStatus::Ok
    })
}

/// Evaluates LIDF1 or ALTA at a temporal horizon. `horizon_frames` is the
/// window radius in frames; a negative value evaluates the strict
/// (whole-sequence) counterpart, IDF1 or ATA.
///
/// # Safety
/// `sequence` must be a live handle and `out` a valid destination pointer.
#[no_mangle]
pub unsafe extern "C" fn moteval_local_metric(
    sequence: *const MotevalSequence,
    kind: MotevalMetricKind,
    horizon_frames: i64,
    out: *mut MotevalMetricValue,
) -> MotevalStatus {
    guarded(|| {
        let (Some(handle), false) = (sequence.as_ref(), out.is_null()) else {
            set_error("sequence and out must be non-null");
            return MotevalStatus::NullArgument;
        };
        let horizon = if horizon_frames < 0 {
            Horizon::Strict
        } else if horizon_frames <= u32::MAX as i64 {
            Horizon::Frames(horizon_frames as u32)
        } else {
            set_error(format!("horizon_frames {horizon_frames} exceeds the supported range"));
            return MotevalStatus::InvalidArgument;
        };
        let acc = match kind {
            MotevalMetricKind::Lidf1 => local::lidf1(&handle.series, horizon),
            MotevalMetricKind::Alta => local::alta(&handle.series, horizon),
        };
        *out = MotevalMetricValue {
            value: acc.value(),
            numerator: acc.numerator,
            denominator: acc.denominator,
        };
        MotevalStatus::Ok
    })
}

/// Attributes the association shortfall to missed detections, false
/// positives, identity splits and identity merges over the whole sequence.
///
/// # Safety
/// `sequence` must be a live handle and `out` a valid destination pointer.
#[no_mangle]
pub unsafe extern "C" fn moteval_decompose(
    sequence: *const MotevalSequence,
    out: *mut MotevalDecomposition,
) -> MotevalStatus {
    guarded(|| {
        let (Some(handle), false) = (sequence.as_ref(), out.is_null()) else {
            set_error("sequence and out must be non-null");
            return MotevalStatus::NullArgument;
        };
        let corr = decompose::frame_correspondence(&handle.series);
        let report = decompose::decompose(&handle.series, &corr);
        *out = MotevalDecomposition {
            approx_ata: report.approx_ata,
            approx_atr: report.approx_atr,
            approx_atp: report.approx_atp,
            det_fn: report.overall.det_fn,
            det_fp: report.overall.det_fp,
            split: report.overall.split,
            merge: report.overall.merge,
            denominator: report.overall.denominator,
        };
        MotevalStatus::Ok
    })
}
