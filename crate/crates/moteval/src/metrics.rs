//! Strict (whole-sequence) metrics: DetF1, IDF1, ATA and a reference MOTA.
//!
//! All except MOTA are built on the same two ingredients: the binary overlap
//! matrix `B` (per pair, the number of frames where the pair's IOU clears the
//! threshold) and a maximum-weight assignment. DetF1 matches per frame, IDF1
//! matches once over box counts, ATA matches once over temporal-IOU scores.
//! Every metric is reported both as a value and as a
//! [`MetricAccumulator`](crate::model::MetricAccumulator), so that results
//! from several sequences (or classes) combine exactly.

use crate::assign::{self, WeightMatrix};
use crate::model::MetricAccumulator;
use crate::overlap::{frame_matching, OverlapSeries};

/// Detection-level score: boxes matched per frame, identity ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct DetMetrics {
    /// `DetTP / ((N + N̂) / 2)` — the harmonic mean of per-box recall and
    /// precision.
    pub det_f1: f64,
    /// Boxes matched by the per-frame maximum-cardinality matchings.
    pub det_tp: u64,
    /// Ground-truth boxes left unmatched.
    pub det_fn: u64,
    /// Predicted boxes left unmatched.
    pub det_fp: u64,
    /// `(DetTP / T, (N + N̂) / (2T))`. The `1/T` weighting makes sequences
    /// combine by evaluation time rather than by raw box count.
    pub acc: MetricAccumulator,
}

/// Identity-level score over the whole sequence (IDF1 family).
#[derive(Debug, Clone, PartialEq)]
pub struct IdMetrics {
    pub idf1: f64,
    /// Identity recall `IDTP / N`.
    pub idr: f64,
    /// Identity precision `IDTP / N̂`.
    pub idp: f64,
    /// Weight of the optimal one-to-one track assignment on `B`.
    pub idtp: f64,
    /// `(IDTP, (N + N̂) / 2)`.
    pub acc: MetricAccumulator,
    /// `(IDTP, N)`.
    pub recall_acc: MetricAccumulator,
    /// `(IDTP, N̂)`.
    pub precision_acc: MetricAccumulator,
}

/// Track-level score (average track accuracy, ATA family).
#[derive(Debug, Clone, PartialEq)]
pub struct TrackMetrics {
    pub ata: f64,
    /// Track recall `TrackTP / K`.
    pub atr: f64,
    /// Track precision `TrackTP / K̂`.
    pub atp: f64,
    /// Weight of the optimal assignment on the temporal-IOU matrix `Q`.
    pub track_tp: f64,
    /// `(TrackTP, (K + K̂) / 2)`.
    pub acc: MetricAccumulator,
    /// `(TrackTP, K)`.
    pub recall_acc: MetricAccumulator,
    /// `(TrackTP, K̂)`.
    pub precision_acc: MetricAccumulator,
}

/// Reference MOTA with continuity-preferring per-frame matching.
#[derive(Debug, Clone, PartialEq)]
pub struct MotaMetrics {
    /// `1 − (FN + FP + IDSW) / N`. Can be negative; at most 1.
    pub mota: f64,
    pub det_fn: u64,
    pub det_fp: u64,
    /// Identity switches: a gt track matched to a different prediction than
    /// in its most recent previously matched frame (gaps allowed).
    pub id_switches: u64,
    /// `(FN + FP + IDSW, N)` — an *error* accumulator; the combined MOTA of
    /// several sequences is `1 − value()` of the merged accumulator.
    pub error_acc: MetricAccumulator,
}

/// The full strict-metric panel for one sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct StrictMetrics {
    pub det: DetMetrics,
    pub id: IdMetrics,
    pub track: TrackMetrics,
    pub mota: MotaMetrics,
}

/// Detection F1 from per-frame maximum-cardinality matchings.
pub fn det_f1(series: &OverlapSeries) -> DetMetrics {
    let t = series.num_frames();
    let n = if t == 0 { 0 } else { series.gt_boxes_in(1, t) };
    let n_hat = if t == 0 { 0 } else { series.pred_boxes_in(1, t) };
    let mut det_tp = 0u64;
    for frame in 1..=t {
        det_tp += frame_matching(series.frame_pairs(frame)).len() as u64;
    }
    let acc = if t == 0 {
        MetricAccumulator::ZERO
    } else {
        MetricAccumulator::new(
            det_tp as f64 / t as f64,
            (n + n_hat) as f64 / (2.0 * t as f64),
        )
    };
    DetMetrics { det_f1: acc.value(), det_tp, det_fn: n - det_tp, det_fp: n_hat - det_tp, acc }
}

/// Builds the dense `K × K̂` matrix of per-pair overlap counts over `[a, b]`.
fn overlap_count_matrix(series: &OverlapSeries, a: u32, b: u32) -> WeightMatrix {
    let mut matrix = WeightMatrix::zeros(series.num_gt(), series.num_pred());
    for i in 0..series.num_gt() {
        for &j in series.partners_of_gt(i) {
            matrix.set(i, j as usize, series.overlap_in(i, j as usize, a, b) as f64);
        }
    }
    matrix
}

/// IDF1: one global assignment of gt tracks to predicted tracks, scored by
/// overlapping frames.
pub fn idf1(series: &OverlapSeries) -> IdMetrics {
    let t = series.num_frames();
    let (n, n_hat) = if t == 0 {
        (0, 0)
    } else {
        (series.gt_boxes_in(1, t), series.pred_boxes_in(1, t))
    };
    let idtp = if t == 0 {
        0.0
    } else {
        assign::max_weight_objective(&overlap_count_matrix(series, 1, t))
    };
    let acc = MetricAccumulator::new(idtp, (n + n_hat) as f64 / 2.0);
    let recall_acc = MetricAccumulator::new(idtp, n as f64);
    let precision_acc = MetricAccumulator::new(idtp, n_hat as f64);
    IdMetrics {
        idf1: acc.value(),
        idr: recall_acc.value(),
        idp: precision_acc.value(),
        idtp,
        acc,
        recall_acc,
        precision_acc,
    }
}

/// ATA: one global assignment scored by temporal IOU (overlapping frames over
/// union of visible frames) per pair.
pub fn ata(series: &OverlapSeries) -> TrackMetrics {
    let t = series.num_frames();
    let k = series.num_gt();
    let k_hat = series.num_pred();
    let track_tp = if t == 0 || k == 0 || k_hat == 0 {
        0.0
    } else {
        let mut q = WeightMatrix::zeros(k, k_hat);
        for i in 0..k {
            for &j in series.partners_of_gt(i) {
                let counts = series.interval_counts(i, j as usize, 1, t);
                q.set(i, j as usize, counts.overlap as f64 / counts.union as f64);
            }
        }
        assign::max_weight_objective(&q)
    };
    let acc = MetricAccumulator::new(track_tp, (k + k_hat) as f64 / 2.0);
    let recall_acc = MetricAccumulator::new(track_tp, k as f64);
    let precision_acc = MetricAccumulator::new(track_tp, k_hat as f64);
    TrackMetrics {
        ata: acc.value(),
        atr: recall_acc.value(),
        atp: precision_acc.value(),
        track_tp,
        acc,
        recall_acc,
        precision_acc,
    }
}

/// Reference MOTA.
///
/// Per frame, matches from the previous frame are retained whenever the pair
/// still overlaps; the remaining boxes are matched by maximum cardinality.
/// An identity switch is counted when a gt track's match differs from its
/// most recent previous match, however long ago that was.
pub fn mota(series: &OverlapSeries) -> MotaMetrics {
    let t = series.num_frames();
    let n = if t == 0 { 0 } else { series.gt_boxes_in(1, t) };
    let n_hat = if t == 0 { 0 } else { series.pred_boxes_in(1, t) };

    let mut matched_boxes = 0u64;
    let mut id_switches = 0u64;
    let mut previous: Vec<(u32, u32)> = Vec::new();
    let mut last_partner: Vec<Option<u32>> = vec![None; series.num_gt()];

    for frame in 1..=t {
        let pairs = series.frame_pairs(frame);
        // Keep continuing matches.
        let mut current: Vec<(u32, u32)> = previous
            .iter()
            .copied()
            .filter(|&(i, j)| series.overlaps_at(i as usize, j as usize, frame))
            .collect();
        // Match what is left by cardinality (IOU ties, then lexicographic).
        let taken_gt: Vec<u32> = current.iter().map(|&(i, _)| i).collect();
        let taken_pred: Vec<u32> = current.iter().map(|&(_, j)| j).collect();
        let remaining: Vec<_> = pairs
            .iter()
            .filter(|p| !taken_gt.contains(&p.gt) && !taken_pred.contains(&p.pred))
            .copied()
            .collect();
        current.extend(frame_matching(&remaining));
        current.sort_unstable();

        matched_boxes += current.len() as u64;
        for &(i, j) in &current {
            if let Some(prev) = last_partner[i as usize] {
                if prev != j {
                    id_switches += 1;
                }
            }
            last_partner[i as usize] = Some(j);
        }
        previous = current;
    }

    let det_fn = n - matched_boxes;
    let det_fp = n_hat - matched_boxes;
    let errors = det_fn + det_fp + id_switches;
    let error_acc = MetricAccumulator::new(errors as f64, n as f64);
    let mota = if n == 0 {
        // No ground truth: perfect only if nothing was predicted either.
        if errors == 0 {
            1.0
        } else {
            f64::NEG_INFINITY
        }
    } else {
        1.0 - error_acc.value()
    };
    MotaMetrics { mota, det_fn, det_fp, id_switches, error_acc }
}

/// Convenience: the full strict panel.
pub fn strict_metrics(series: &OverlapSeries) -> StrictMetrics {
    StrictMetrics { det: det_f1(series), id: idf1(series), track: ata(series), mota: mota(series) }
}

/// How much of the detection quality survives as association quality:
/// `ATA / DetF1`. Absent when there are no detections to associate
/// (`DetF1 = 0`).
pub fn association_fraction(ata: f64, det_f1: f64) -> Option<f64> {
    if det_f1 == 0.0 {
        None
    } else {
        Some(ata / det_f1)
    }
}
