//! Temporally local tracking metrics: LIDF1 and ALTA.
//!
//! A strict metric like IDF1 demands one global gt↔prediction assignment for
//! the entire sequence, so a single identity switch halfway through costs
//! half the score no matter how long the sequence is. The local variants ask
//! a gentler question: within a window of `±r` frames around *each* frame,
//! how good is the best assignment? Each window may adopt a different
//! correspondence, so errors only hurt within a temporal radius `r`.
//!
//! For every frame `t` the window `[t−r, t+r]` is clipped to `[1, T]`, the
//! window-restricted metric numerator and denominator are computed, and both
//! are averaged over the `T` windows. At `r = 0` the result is exactly the
//! detection F1 score (no association left to test); as `r` grows it
//! converges to the strict metric — LIDF1 to IDF1, ALTA to ATA — reaching it
//! at `r ≥ T−1`. The value is *not* necessarily monotone in `r` for ALTA:
//! track fragments enter and leave the denominator as the window widens.
//!
//! The `1/T` factor in both accumulator halves matters when combining
//! sequences (or classes, which are treated as extra sequences): it weights
//! each sequence by evaluation time, not by how many windows happen to carry
//! many boxes.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::assign::{self, WeightMatrix};
use crate::metrics;
use crate::model::MetricAccumulator;
use crate::overlap::OverlapSeries;

/// A temporal horizon: how far association evidence reaches around a frame.
///
/// Seconds-based horizons keep their seconds value so reports can label
/// curves identically across sequences with different frame rates; they
/// resolve per sequence via `r = round(seconds × fps)` (half away from
/// zero).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Horizon {
    /// Fixed radius in frames.
    Frames(u32),
    /// Radius in seconds, resolved against each sequence's frame rate.
    Seconds(f64),
    /// The whole sequence, whatever its length: the strict metric.
    Strict,
}

/// A [`Horizon`] resolved against a concrete frame rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reach {
    Frames(u32),
    Strict,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid horizon {input:?}: expected <int>f, <real>s, an integer frame count, or \"strict\"")]
pub struct HorizonParseError {
    pub input: String,
}

impl Horizon {
    /// Parses `"12f"`, `"0.5s"`, a bare frame count like `"0"`, or
    /// `"strict"`.
    pub fn parse(text: &str) -> Result<Self, HorizonParseError> {
        let err = || HorizonParseError { input: text.to_string() };
        let trimmed = text.trim();
        if trimmed == "strict" {
            return Ok(Horizon::Strict);
        }
        if let Some(frames) = trimmed.strip_suffix('f') {
            return frames.parse::<u32>().map(Horizon::Frames).map_err(|_| err());
        }
        if let Some(seconds) = trimmed.strip_suffix('s') {
            let value: f64 = seconds.parse().map_err(|_| err())?;
            if !value.is_finite() || value < 0.0 {
                return Err(err());
            }
            return Ok(Horizon::Seconds(value));
        }
        trimmed.parse::<u32>().map(Horizon::Frames).map_err(|_| err())
    }

    /// Stable label for reports: `"12f"`, `"0.5s"`, `"strict"`.
    pub fn label(&self) -> String {
        match self {
            Horizon::Frames(r) => format!("{r}f"),
            Horizon::Seconds(v) => format!("{v}s"),
            Horizon::Strict => "strict".to_string(),
        }
    }

    /// Resolves the horizon against a frame rate.
    pub fn resolve(&self, fps: f64) -> Reach {
        match *self {
            Horizon::Frames(r) => Reach::Frames(r),
            Horizon::Seconds(v) => Reach::Frames((v * fps).round() as u32),
            Horizon::Strict => Reach::Strict,
        }
    }

    /// The default horizon sweep: detection end, a spread of sub-second to
    /// multi-second radii, and the strict end.
    pub fn default_set() -> Vec<Horizon> {
        vec![
            Horizon::Frames(0),
            Horizon::Seconds(0.2),
            Horizon::Seconds(0.5),
            Horizon::Seconds(1.0),
            Horizon::Seconds(2.0),
            Horizon::Seconds(5.0),
            Horizon::Strict,
        ]
    }
}

/// Which local metric a curve traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MetricKind {
    Lidf1,
    Alta,
}

impl MetricKind {
    pub fn name(&self) -> &'static str {
        match self {
            MetricKind::Lidf1 => "lidf1",
            MetricKind::Alta => "alta",
        }
    }
}

/// One evaluated horizon on a curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub horizon: Horizon,
    /// The horizon resolved against this sequence's frame rate.
    pub reach: Reach,
    pub value: f64,
    pub acc: MetricAccumulator,
}

/// A local metric evaluated across a sweep of horizons.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizonCurve {
    pub kind: MetricKind,
    pub points: Vec<CurvePoint>,
}

/// Temporally local IDF1. Numerator `(1/T) Σ_t IDTP_[t−r,t+r]`, denominator
/// `(1/2T) Σ_t (N + N̂)_[t−r,t+r]`, windows clipped to `[1, T]`.
pub fn lidf1(series: &OverlapSeries, horizon: Horizon) -> MetricAccumulator {
    local_metric(series, MetricKind::Lidf1, horizon)
}

/// Temporally local ATA. Numerator `(1/T) Σ_t TrackTP_[t−r,t+r]`, denominator
/// `(1/2T) Σ_t (K + K̂)_[t−r,t+r]`, where a track counts toward `K_[a,b]`
/// if it is present anywhere in the window.
pub fn alta(series: &OverlapSeries, horizon: Horizon) -> MetricAccumulator {
    local_metric(series, MetricKind::Alta, horizon)
}

fn local_metric(series: &OverlapSeries, kind: MetricKind, horizon: Horizon) -> MetricAccumulator {
    if series.num_frames() == 0 {
        return MetricAccumulator::ZERO;
    }
    match horizon.resolve(series.fps()) {
        // The strict horizon *is* the strict metric, including its pooling
        // semantics (no 1/T factor), so reports can label it IDF1/ATA.
        Reach::Strict => match kind {
            MetricKind::Lidf1 => metrics::idf1(series).acc,
            MetricKind::Alta => metrics::ata(series).acc,
        },
        Reach::Frames(radius) => windowed(series, kind, radius),
    }
}

/// Evaluates all `T` clipped windows. Consecutive frames near the sequence
/// ends share identical clipped windows (and for `r ≥ T−1` *every* window is
/// `[1, T]`), so distinct windows are evaluated once, in parallel; the
/// reduction then runs over frames in ascending order so results are
/// bit-identical regardless of thread count.
fn windowed(series: &OverlapSeries, kind: MetricKind, radius: u32) -> MetricAccumulator {
    let num_frames = series.num_frames();
    let mut distinct: Vec<(u32, u32)> = Vec::new();
    let mut window_of_frame: Vec<usize> = Vec::with_capacity(num_frames as usize);
    for t in 1..=num_frames {
        let a = t.saturating_sub(radius).max(1);
        let b = t.saturating_add(radius).min(num_frames);
        if distinct.last() != Some(&(a, b)) {
            distinct.push((a, b));
        }
        window_of_frame.push(distinct.len() - 1);
    }

    let evaluated: Vec<(f64, u64)> = distinct
        .par_iter()
        .map(|&(a, b)| evaluate_window(series, kind, a, b))
        .collect();

    let mut numerator = 0.0f64;
    let mut side_counts = 0u64;
    for &w in &window_of_frame {
        numerator += evaluated[w].0;
        side_counts += evaluated[w].1;
    }
    MetricAccumulator::new(
        numerator / num_frames as f64,
        side_counts as f64 / (2.0 * num_frames as f64),
    )
}

/// One window: the assignment objective and the denominator contribution
/// (`N_[a,b] + N̂_[a,b]` for LIDF1, `K_[a,b] + K̂_[a,b]` for ALTA).
fn evaluate_window(series: &OverlapSeries, kind: MetricKind, a: u32, b: u32) -> (f64, u64) {
    let side_counts = match kind {
        MetricKind::Lidf1 => series.gt_boxes_in(a, b) + series.pred_boxes_in(a, b),
        MetricKind::Alta => {
            let gt = (0..series.num_gt()).filter(|&i| series.gt_presence_in(i, a, b) > 0).count();
            let pred =
                (0..series.num_pred()).filter(|&j| series.pred_presence_in(j, a, b) > 0).count();
            (gt + pred) as u64
        }
    };
    (window_objective(series, kind, a, b), side_counts)
}

/// Maximum assignment weight within `[a, b]`: summed overlap counts for
/// LIDF1, temporal IOU for ALTA. The matrix is built only over tracks with a
/// positive entry in the window — all-zero rows and columns cannot affect
/// the objective.
fn window_objective(series: &OverlapSeries, kind: MetricKind, a: u32, b: u32) -> f64 {
    let mut entries: Vec<(u32, u32, f64)> = Vec::new();
    for i in 0..series.num_gt() {
        for &j in series.partners_of_gt(i) {
            let counts = series.interval_counts(i, j as usize, a, b);
            if counts.overlap == 0 {
                continue;
            }
            let value = match kind {
                MetricKind::Lidf1 => counts.overlap as f64,
                MetricKind::Alta => counts.overlap as f64 / counts.union as f64,
            };
            entries.push((i as u32, j, value));
        }
    }
    if entries.is_empty() {
        return 0.0;
    }
    let mut rows: Vec<u32> = entries.iter().map(|e| e.0).collect();
    rows.dedup(); // entries are generated in ascending gt order
    let mut cols: Vec<u32> = entries.iter().map(|e| e.1).collect();
    cols.sort_unstable();
    cols.dedup();
    let mut matrix = WeightMatrix::zeros(rows.len(), cols.len());
    for &(i, j, value) in &entries {
        let r = rows.binary_search(&i).unwrap();
        let c = cols.binary_search(&j).unwrap();
        matrix.set(r, c, value);
    }
    assign::max_weight_objective(&matrix)
}

/// Evaluates one local metric across a horizon sweep.
pub fn horizon_curve(series: &OverlapSeries, kind: MetricKind, horizons: &[Horizon]) -> HorizonCurve {
    assert!(!horizons.is_empty(), "horizon sweep must not be empty");
    let points = horizons
        .iter()
        .map(|&horizon| {
            let acc = local_metric(series, kind, horizon);
            CurvePoint { horizon, reach: horizon.resolve(series.fps()), value: acc.value(), acc }
        })
        .collect();
    HorizonCurve { kind, points }
}

#[derive(Debug, Error, PartialEq)]
pub enum CombineError {
    #[error("cannot combine results computed at different horizons: {first} vs {second}")]
    HorizonMismatch { first: String, second: String },
    #[error("cannot combine an empty result set")]
    Empty,
}

/// Combines per-sequence (or per-class — classes are treated exactly as
/// additional sequences) accumulators of the *same* horizon into one.
///
/// The horizon tags must agree: merging an ALTA(1s) accumulator into an
/// ALTA(30f) one would silently blend different metrics, so it is an error
/// even when both resolve to the same radius for some frame rate.
pub fn combine(
    results: &[(Horizon, MetricAccumulator)],
) -> Result<MetricAccumulator, CombineError> {
    let (first, rest) = results.split_first().ok_or(CombineError::Empty)?;
    let mut total = first.1;
    for (horizon, acc) in rest {
        if *horizon != first.0 {
            return Err(CombineError::HorizonMismatch {
                first: first.0.label(),
                second: horizon.label(),
            });
        }
        total = total.merge(*acc);
    }
    Ok(total)
}

/// Arithmetic mean across horizons — the scalar summary used to rank
/// trackers when a single number is wanted.
pub fn mean_over_horizons(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "mean over an empty horizon set");
    values.iter().sum::<f64>() / values.len() as f64
}
