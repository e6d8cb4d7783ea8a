//! Reading tracker data: MOTChallenge CSV parsing, class/visibility/score
//! filtering, automatic score-threshold selection and sequence assembly.
//!
//! A MOT file is one box per line:
//!
//! ```text
//! frame, id, bb_left, bb_top, bb_width, bb_height [, conf [, class [, visibility]]]
//! ```
//!
//! Missing trailing fields default to `conf = 1`, `class = 1`,
//! `visibility = 1`; anything beyond the ninth field is ignored. Parsing is
//! strict — malformed lines and duplicate `(frame, id)` pairs are reported
//! with their line number rather than silently repaired, because silent
//! data corruption costs far more than a re-run.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::io::{self, BufRead};
use std::path::Path;

use thiserror::Error;

use crate::metrics;
use crate::model::{BoundingBox, Sequence, Track, TrackRole, TrackSet};
use crate::overlap::build_overlap_series;

/// One parsed MOT line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawEntry {
    pub frame: u32,
    pub id: i64,
    pub bounds: BoundingBox,
    pub conf: f64,
    pub class_id: i64,
    /// Fraction of the object visible; meaningful for ground truth only.
    pub visibility: f64,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: {problem}")]
    Malformed { line: usize, problem: String },
    #[error("line {line}: duplicate box for frame {frame}, id {id}")]
    Duplicate { line: usize, frame: u32, id: i64 },
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn malformed(line: usize, problem: impl Into<String>) -> IngestError {
    IngestError::Malformed { line, problem: problem.into() }
}

/// How predicted boxes are admitted by confidence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScoreThreshold {
    /// No confidence filtering.
    KeepAll,
    /// Keep boxes with `conf ≥` the given value.
    Fixed(f64),
    /// Per class, pick the threshold among the distinct confidences present
    /// that maximises detection F1 against the filtered ground truth.
    Auto,
}

/// Filtering and matching configuration for sequence assembly.
#[derive(Debug, Clone)]
pub struct IngestConfig {
    /// IOU at or above which a gt/prediction pair counts as overlapping.
    pub iou_threshold: f64,
    /// Ground-truth classes kept for evaluation.
    pub gt_classes: BTreeSet<i64>,
    /// Ground-truth boxes below this visibility are discarded.
    pub min_visibility: f64,
    pub score_threshold: ScoreThreshold,
    /// Overrides the caller-provided frame rate (e.g. a CLI flag beating
    /// the seqinfo.ini value).
    pub fps_override: Option<f64>,
    /// Extends the sequence length beyond the last observed frame, e.g.
    /// from seqinfo.ini. Never truncates observed data.
    pub seq_length_override: Option<u32>,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            iou_threshold: 0.5,
            gt_classes: BTreeSet::from([1]),
            min_visibility: 0.0,
            score_threshold: ScoreThreshold::KeepAll,
            fps_override: None,
            seq_length_override: None,
        }
    }
}

/// Parses a MOT CSV stream. Blank lines are skipped; everything else must
/// parse or the whole read fails with its line number.
pub fn parse_mot_file(reader: impl BufRead) -> Result<Vec<RawEntry>, IngestError> {
    let mut entries = Vec::new();
    let mut seen: HashSet<(u32, i64)> = HashSet::new();
    for (index, line) in reader.lines().enumerate() {
        let line_no = index + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let fields: Vec<&str> = text.split(',').map(str::trim).collect();
        if fields.len() < 6 {
            return Err(malformed(line_no, format!("expected at least 6 fields, got {}", fields.len())));
        }
        let number = |slot: usize, name: &str| -> Result<f64, IngestError> {
            fields[slot]
                .parse::<f64>()
                .map_err(|_| malformed(line_no, format!("{name} {:?} is not a number", fields[slot])))
        };
        let integer = |slot: usize, name: &str| -> Result<i64, IngestError> {
            fields[slot]
                .parse::<i64>()
                .map_err(|_| malformed(line_no, format!("{name} {:?} is not an integer", fields[slot])))
        };
        let frame = integer(0, "frame")?;
        if frame < 1 {
            return Err(malformed(line_no, format!("frame {frame} is not ≥ 1")));
        }
        let frame = frame as u32;
        let id = integer(1, "id")?;
        let left = number(2, "bb_left")?;
        let top = number(3, "bb_top")?;
        let width = number(4, "bb_width")?;
        let height = number(5, "bb_height")?;
        if width <= 0.0 || width.is_nan() {
            return Err(malformed(line_no, format!("non-positive width {width}")));
        }
        if height <= 0.0 || height.is_nan() {
            return Err(malformed(line_no, format!("non-positive height {height}")));
        }
        let conf = if fields.len() > 6 { number(6, "conf")? } else { 1.0 };
        let class_id = if fields.len() > 7 { integer(7, "class")? } else { 1 };
        let visibility = if fields.len() > 8 { number(8, "visibility")? } else { 1.0 };
        if !(0.0..=1.0).contains(&visibility) {
            return Err(malformed(line_no, format!("visibility {visibility} outside [0, 1]")));
        }
        if !seen.insert((frame, id)) {
            return Err(IngestError::Duplicate { line: line_no, frame, id });
        }
        entries.push(RawEntry {
            frame,
            id,
            bounds: BoundingBox::new(left, top, width, height),
            conf,
            class_id,
            visibility,
        });
    }
    Ok(entries)
}

/// [`parse_mot_file`] over a filesystem path.
pub fn parse_mot_path(path: impl AsRef<Path>) -> Result<Vec<RawEntry>, IngestError> {
    let file = std::fs::File::open(path)?;
    parse_mot_file(io::BufReader::new(file))
}

/// Groups surviving entries into tracks, id order.
fn group_tracks(entries: &[RawEntry], keep: impl Fn(&RawEntry) -> bool) -> Vec<Track> {
    let mut by_id: BTreeMap<i64, BTreeMap<u32, BoundingBox>> = BTreeMap::new();
    for entry in entries.iter().filter(|e| keep(e)) {
        let previous = by_id.entry(entry.id).or_default().insert(entry.frame, entry.bounds);
        assert!(previous.is_none(), "duplicate (frame, id) pair survived parsing");
    }
    by_id.into_iter().map(|(id, boxes)| Track::new(id, boxes)).collect()
}

fn gt_filter(cfg: &IngestConfig) -> impl Fn(&RawEntry) -> bool + '_ {
    move |e| cfg.gt_classes.contains(&e.class_id) && e.visibility >= cfg.min_visibility
}

/// Assembles an evaluable [`Sequence`] from parsed entries.
///
/// Ground truth keeps the configured classes at or above the minimum
/// visibility; predictions are filtered by the score-threshold policy
/// (automatic selection runs per prediction class). Tracks whose every box
/// is filtered out disappear. The sequence length is the last surviving
/// frame, extended (never truncated) by any configured override. With no
/// surviving boxes at all the sequence is empty with `T = 0`.
pub fn build_sequence(
    name: impl Into<String>,
    gt_entries: &[RawEntry],
    pred_entries: &[RawEntry],
    cfg: &IngestConfig,
    fps: f64,
) -> Sequence {
    let gt_tracks = group_tracks(gt_entries, gt_filter(cfg));
    let pred_tracks = match cfg.score_threshold {
        ScoreThreshold::KeepAll => group_tracks(pred_entries, |_| true),
        ScoreThreshold::Fixed(threshold) => group_tracks(pred_entries, |e| e.conf >= threshold),
        ScoreThreshold::Auto => {
            let classes: BTreeSet<i64> = pred_entries.iter().map(|e| e.class_id).collect();
            let mut kept: Vec<RawEntry> = Vec::new();
            for class in classes {
                let of_class: Vec<RawEntry> =
                    pred_entries.iter().filter(|e| e.class_id == class).copied().collect();
                let mut candidates: Vec<f64> = of_class.iter().map(|e| e.conf).collect();
                candidates.sort_unstable_by(|a, b| a.partial_cmp(b).expect("conf must not be NaN"));
                candidates.dedup();
                let threshold = select_score_threshold(gt_entries, &of_class, cfg, &candidates);
                kept.extend(of_class.into_iter().filter(|e| e.conf >= threshold));
            }
            group_tracks(&kept, |_| true)
        }
    };

    let observed = gt_tracks
        .iter()
        .chain(&pred_tracks)
        .map(Track::last_frame)
        .max()
        .unwrap_or(0);
    let num_frames = observed.max(cfg.seq_length_override.unwrap_or(0));
    let fps = cfg.fps_override.unwrap_or(fps);
    Sequence::new(
        name,
        num_frames,
        fps,
        TrackSet::new(TrackRole::GroundTruth, gt_tracks),
        TrackSet::new(TrackRole::Predicted, pred_tracks),
    )
}

/// Picks the score threshold that maximises detection F1.
///
/// Every candidate is evaluated by actually filtering the predictions and
/// measuring DetF1 against the (filtered) ground truth; ties go to the
/// larger threshold, i.e. fewer boxes for the same F1. The distinct
/// confidences present in the data make an exact candidate set, since DetF1
/// only changes when a threshold crosses one of them.
///
/// # Panics
/// If `candidates` is empty.
pub fn select_score_threshold(
    gt_entries: &[RawEntry],
    pred_entries: &[RawEntry],
    cfg: &IngestConfig,
    candidates: &[f64],
) -> f64 {
    assert!(!candidates.is_empty(), "threshold selection needs candidates");
    let gt_tracks = group_tracks(gt_entries, gt_filter(cfg));
    let mut ordered = candidates.to_vec();
    ordered.sort_unstable_by(|a, b| a.partial_cmp(b).expect("threshold must not be NaN"));
    let mut best = (f64::NEG_INFINITY, ordered[0]);
    for &threshold in &ordered {
        let pred_tracks = group_tracks(pred_entries, |e| e.conf >= threshold);
        let observed = gt_tracks
            .iter()
            .chain(&pred_tracks)
            .map(Track::last_frame)
            .max()
            .unwrap_or(0);
        let sequence = Sequence::new(
            "threshold-probe",
            observed,
            30.0,
            TrackSet::new(TrackRole::GroundTruth, gt_tracks.clone()),
            TrackSet::new(TrackRole::Predicted, pred_tracks),
        );
        let f1 = metrics::det_f1(&build_overlap_series(&sequence, cfg.iou_threshold)).det_f1;
        // ≥ so that among ties the larger (ascending-order later) wins.
        if f1 >= best.0 {
            best = (f1, threshold);
        }
    }
    best.1
}

/// Sequence metadata from a `seqinfo.ini` file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SeqInfo {
    pub name: Option<String>,
    pub frame_rate: Option<f64>,
    pub seq_length: Option<u32>,
}

/// Parses the `[Sequence]` section of a seqinfo.ini: `name`, `frameRate`
/// and `seqLength` keys (case-insensitive), other sections and keys
/// ignored. `;`-comments are stripped.
pub fn parse_seqinfo(source: &str) -> Result<SeqInfo, IngestError> {
    let mut info = SeqInfo::default();
    let mut in_sequence_section = false;
    for (index, raw_line) in source.lines().enumerate() {
        let line_no = index + 1;
        let line = raw_line.split(';').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(section) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            in_sequence_section = section.trim().eq_ignore_ascii_case("sequence");
            continue;
        }
        if !in_sequence_section {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(malformed(line_no, format!("expected key=value, got {line:?}")));
        };
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim();
        match key.as_str() {
            "name" => info.name = Some(value.to_string()),
            "framerate" => {
                let rate: f64 = value
                    .parse()
                    .map_err(|_| malformed(line_no, format!("frameRate {value:?} is not a number")))?;
                if rate <= 0.0 || rate.is_nan() {
                    return Err(malformed(line_no, format!("frameRate {rate} is not positive")));
                }
                info.frame_rate = Some(rate);
            }
            "seqlength" => {
                let length: u32 = value.parse().map_err(|_| {
                    malformed(line_no, format!("seqLength {value:?} is not a non-negative integer"))
                })?;
                info.seq_length = Some(length);
            }
            _ => {}
        }
    }
    Ok(info)
}

/// Serialises a track set to MOT CSV, rows ordered by (frame, id), with
/// `conf = 1`, `class = 1`, `visibility = 1`. Round-trips through
/// [`parse_mot_file`].
pub fn write_mot(set: &TrackSet) -> String {
    let mut rows: Vec<(u32, i64, &BoundingBox)> = set
        .iter()
        .flat_map(|track| track.boxes().map(move |(frame, b)| (frame, track.external_id(), b)))
        .collect();
    rows.sort_by_key(|&(frame, id, _)| (frame, id));
    let mut out = String::new();
    for (frame, id, b) in rows {
        writeln!(out, "{frame},{id},{},{},{},{},1,1,1", b.left, b.top, b.width, b.height)
            .expect("writing to a String cannot fail");
    }
    out
}
