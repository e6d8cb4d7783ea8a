//! Four-way decomposition of tracking error: missed detections, false
//! positives, identity splits and identity merges.
//!
//! ATA tells a tracker *how much* association quality it lost but not *why*.
//! The decomposition answers that by replacing the overlap matrix `B` with
//! the per-frame correspondence `C` (each frame matched independently, which
//! is how detection error is measured) and walking a telescoping chain of
//! coverage ratios for every track. For gt track `i` with `π(i)` its partner
//! under the approximate assignment:
//!
//! ```text
//! ρ_det  = Σ_j C_ij / |V_i|      frames matched to any prediction
//! ρ_best = max_j C_ij / |V_i|    frames matched to the best single one
//! ρ_π    = C_iπ(i) / |V_i|       frames matched to the assigned one
//! Q̃      = C_iπ(i) / |V_i ∪ V̂_π(i)|
//!
//! 1 − Q̃ = (1 − ρ_det) + (ρ_det − ρ_best) + (ρ_best − ρ_π) + (ρ_π − Q̃)
//!           missed        split             merge             union gap
//! ```
//!
//! The union gap covers the partner's frames outside `V_i`; those frames are
//! partitioned by what the partner was doing there — matched to another gt
//! (merge-flavoured) or unmatched (false-positive-flavoured). The precision
//! side mirrors the chain with the error labels exchanged. Every gap is a
//! difference of two ratios, so per-track masses sum *exactly* (up to
//! floating-point accumulation) to `1 − Q̃`, and the overall fractions sum to
//! the total association error `1 − ÃTA`.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::assign::{self, WeightMatrix};
use crate::local::{Horizon, Reach};
use crate::model::MetricAccumulator;
use crate::overlap::{frame_matching, OverlapSeries, PrefixTable};

/// The per-frame correspondence `C`: every frame matched independently by
/// maximum cardinality (IOU ties, then lexicographic), with prefix tables
/// over match counts and over present-but-unmatched frames.
pub struct FrameCorrespondence {
    /// `frames[t]`: matched (gt, pred) pairs at frame `t`, sorted by gt.
    frames: Vec<Vec<(u32, u32)>>,
    /// Rows of `matches`, keyed by pair, for pairs ever matched.
    match_index: BTreeMap<(u32, u32), usize>,
    matches: PrefixTable,
    gt_partners: Vec<Vec<u32>>,
    pred_partners: Vec<Vec<u32>>,
    /// Present-and-unmatched frames per track.
    gt_unmatched: PrefixTable,
    pred_unmatched: PrefixTable,
    /// Rows aligned with `copresent_index`: frames where the pair is
    /// co-present and one side is unmatched. These drive the union-gap
    /// partition.
    copresent_index: BTreeMap<(u32, u32), usize>,
    cop_gt_unmatched: PrefixTable,
    cop_pred_unmatched: PrefixTable,
    det_tp: u64,
}

impl FrameCorrespondence {
    /// Matched pairs at `frame`, sorted by gt index.
    pub fn frame_matches(&self, frame: u32) -> &[(u32, u32)] {
        &self.frames[frame as usize]
    }

    /// Total matched boxes; coincides with the detection true positives of
    /// [`metrics::det_f1`](crate::metrics::det_f1).
    pub fn det_tp(&self) -> u64 {
        self.det_tp
    }

    /// Frames in `[a, b]` where the pair is matched in `C` (`C_ij`
    /// restricted to the window).
    pub fn matched_in(&self, gt: usize, pred: usize, a: u32, b: u32) -> u32 {
        match self.match_index.get(&(gt as u32, pred as u32)) {
            Some(&row) => self.matches.count(row, a, b),
            None => 0,
        }
    }

    /// Predictions ever matched to gt `i`, ascending.
    pub fn gt_partners(&self, gt: usize) -> &[u32] {
        &self.gt_partners[gt]
    }

    /// Ground-truth tracks ever matched to pred `j`, ascending.
    pub fn pred_partners(&self, pred: usize) -> &[u32] {
        &self.pred_partners[pred]
    }

    fn gt_unmatched_in(&self, gt: usize, a: u32, b: u32) -> u32 {
        self.gt_unmatched.count(gt, a, b)
    }

    fn pred_unmatched_in(&self, pred: usize, a: u32, b: u32) -> u32 {
        self.pred_unmatched.count(pred, a, b)
    }

    fn cop_gt_unmatched_in(&self, gt: usize, pred: usize, a: u32, b: u32) -> u32 {
        match self.copresent_index.get(&(gt as u32, pred as u32)) {
            Some(&row) => self.cop_gt_unmatched.count(row, a, b),
            None => 0,
        }
    }

    fn cop_pred_unmatched_in(&self, gt: usize, pred: usize, a: u32, b: u32) -> u32 {
        match self.copresent_index.get(&(gt as u32, pred as u32)) {
            Some(&row) => self.cop_pred_unmatched.count(row, a, b),
            None => 0,
        }
    }
}

/// Matches every frame independently and builds the window-query tables.
pub fn frame_correspondence(series: &OverlapSeries) -> FrameCorrespondence {
    let num_frames = series.num_frames();
    let num_gt = series.num_gt();
    let num_pred = series.num_pred();
    let stride = num_frames as usize + 1;

    let mut frames: Vec<Vec<(u32, u32)>> = vec![Vec::new(); stride];
    let mut match_index: BTreeMap<(u32, u32), usize> = BTreeMap::new();
    for t in 1..=num_frames {
        let matched = frame_matching(series.frame_pairs(t));
        for &pair in &matched {
            match_index.entry(pair).or_insert(0);
        }
        frames[t as usize] = matched;
    }
    for (row, slot) in match_index.values_mut().enumerate() {
        *slot = row;
    }

    let copresent_index: BTreeMap<(u32, u32), usize> = series.copresent_pairs().collect();
    let mut matches = PrefixTable::new(match_index.len(), num_frames);
    let mut gt_unmatched = PrefixTable::new(num_gt, num_frames);
    let mut pred_unmatched = PrefixTable::new(num_pred, num_frames);
    let mut cop_gt_unmatched = PrefixTable::new(copresent_index.len(), num_frames);
    let mut cop_pred_unmatched = PrefixTable::new(copresent_index.len(), num_frames);
    let mut det_tp = 0u64;

    let mut gt_matched_now = vec![false; num_gt];
    let mut pred_matched_now = vec![false; num_pred];
    for t in 1..=num_frames {
        let matched = &frames[t as usize];
        det_tp += matched.len() as u64;
        for &(i, j) in matched {
            matches.record(match_index[&(i, j)], t);
            gt_matched_now[i as usize] = true;
            pred_matched_now[j as usize] = true;
        }
        let present_gt: Vec<usize> =
            (0..num_gt).filter(|&i| series.gt_presence_in(i, t, t) == 1).collect();
        let present_pred: Vec<usize> =
            (0..num_pred).filter(|&j| series.pred_presence_in(j, t, t) == 1).collect();
        for &i in &present_gt {
            if !gt_matched_now[i] {
                gt_unmatched.record(i, t);
            }
        }
        for &j in &present_pred {
            if !pred_matched_now[j] {
                pred_unmatched.record(j, t);
            }
        }
        for &i in &present_gt {
            for &j in &present_pred {
                let row = copresent_index[&(i as u32, j as u32)];
                if !gt_matched_now[i] {
                    cop_gt_unmatched.record(row, t);
                }
                if !pred_matched_now[j] {
                    cop_pred_unmatched.record(row, t);
                }
            }
        }
        for &(i, j) in matched {
            gt_matched_now[i as usize] = false;
            pred_matched_now[j as usize] = false;
        }
    }
    matches.finalize();
    gt_unmatched.finalize();
    pred_unmatched.finalize();
    cop_gt_unmatched.finalize();
    cop_pred_unmatched.finalize();

    let mut gt_partners: Vec<Vec<u32>> = vec![Vec::new(); num_gt];
    let mut pred_partners: Vec<Vec<u32>> = vec![Vec::new(); num_pred];
    for &(i, j) in match_index.keys() {
        gt_partners[i as usize].push(j);
    }
    for &(i, j) in match_index.keys() {
        pred_partners[j as usize].push(i);
    }
    for partners in &mut pred_partners {
        partners.sort_unstable();
    }

    FrameCorrespondence {
        frames,
        match_index,
        matches,
        gt_partners,
        pred_partners,
        gt_unmatched,
        pred_unmatched,
        copresent_index,
        cop_gt_unmatched,
        cop_pred_unmatched,
        det_tp,
    }
}

/// The approximate track assignment: `Q̃_ij = C_ij / |V_i ∪ V̂_j|`, optimised
/// one-to-one. Because `C ≤ B` elementwise, `ÃTA ≤ ATA` always; they agree
/// when `B(t)` is one-to-one in every frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxAta {
    pub track_tp: f64,
    pub ata: f64,
    pub atr: f64,
    pub atp: f64,
    /// `π`: per gt track, the assigned prediction (`None` for unmatched).
    pub assignment: Vec<Option<u32>>,
}

pub fn approx_ata(series: &OverlapSeries, corr: &FrameCorrespondence) -> ApproxAta {
    let (track_tp, assignment) = window_assignment(series, corr, 1, series.num_frames());
    let k = series.num_gt() as f64;
    let k_hat = series.num_pred() as f64;
    ApproxAta {
        track_tp,
        ata: MetricAccumulator::new(track_tp, (k + k_hat) / 2.0).value(),
        atr: MetricAccumulator::new(track_tp, k).value(),
        atp: MetricAccumulator::new(track_tp, k_hat).value(),
        assignment,
    }
}

/// Optimal assignment on `Q̃` restricted to `[a, b]`. Only pairs with matched
/// frames inside the window get an entry, so absent tracks simply stay
/// unassigned.
fn window_assignment(
    series: &OverlapSeries,
    corr: &FrameCorrespondence,
    a: u32,
    b: u32,
) -> (f64, Vec<Option<u32>>) {
    let mut assignment: Vec<Option<u32>> = vec![None; series.num_gt()];
    let mut entries: Vec<(u32, u32, f64)> = Vec::new();
    for i in 0..series.num_gt() {
        for &j in corr.gt_partners(i) {
            let c = corr.matched_in(i, j as usize, a, b);
            if c > 0 {
                let counts = series.interval_counts(i, j as usize, a, b);
                entries.push((i as u32, j, c as f64 / counts.union as f64));
            }
        }
    }
    if entries.is_empty() {
        return (0.0, assignment);
    }
    let mut rows: Vec<u32> = entries.iter().map(|e| e.0).collect();
    rows.dedup();
    let mut cols: Vec<u32> = entries.iter().map(|e| e.1).collect();
    cols.sort_unstable();
    cols.dedup();
    let mut matrix = WeightMatrix::zeros(rows.len(), cols.len());
    for &(i, j, q) in &entries {
        matrix.set(rows.binary_search(&i).unwrap(), cols.binary_search(&j).unwrap(), q);
    }
    let matching = assign::max_weight_matching(&matrix);
    for &(r, c) in &matching.pairs {
        assignment[rows[r] as usize] = Some(cols[c]);
    }
    (matching.objective, assignment)
}

/// Error masses attributed to one ground-truth track. All masses are
/// fractions of the track's own error budget 1; they sum to `1 − coverage`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecallMasses {
    /// The assigned prediction, if any (strict decomposition only; windowed
    /// aggregates leave this `None` since the partner may vary per window).
    pub partner: Option<u32>,
    /// `Q̃_{i,π(i)}` — the retained association quality.
    pub coverage: f64,
    /// Frames matched to no prediction at all.
    pub det_fn: f64,
    /// Frames matched to predictions other than the best one.
    pub split: f64,
    /// Frames on the best prediction that the assignment could not keep
    /// (the prediction was needed for another gt track).
    pub merge: f64,
    /// Union-gap share from partner frames matched to nothing.
    pub union_fp: f64,
    /// Union-gap share from partner frames matched to another gt track.
    pub union_merge: f64,
}

impl RecallMasses {
    const ZERO: Self = Self {
        partner: None,
        coverage: 0.0,
        det_fn: 0.0,
        split: 0.0,
        merge: 0.0,
        union_fp: 0.0,
        union_merge: 0.0,
    };

    /// Total error mass; telescopes to `1 − coverage`.
    pub fn total(&self) -> f64 {
        self.det_fn + self.split + self.merge + self.union_fp + self.union_merge
    }
}

/// Error masses attributed to one predicted track — the mirror of
/// [`RecallMasses`] with the error labels exchanged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionMasses {
    /// The assigned gt track, if any.
    pub partner: Option<u32>,
    pub coverage: f64,
    /// Frames matched to no gt track (spurious boxes).
    pub det_fp: f64,
    /// Frames matched to gt tracks other than the best one: this prediction
    /// merges several objects.
    pub merge: f64,
    /// Frames on the best gt track lost to the assignment: that object is
    /// split across predictions.
    pub split: f64,
    /// Union-gap share from partner frames matched to nothing.
    pub union_fn: f64,
    /// Union-gap share from partner frames matched to another prediction.
    pub union_split: f64,
}

impl PrecisionMasses {
    const ZERO: Self = Self {
        partner: None,
        coverage: 0.0,
        det_fp: 0.0,
        merge: 0.0,
        split: 0.0,
        union_fn: 0.0,
        union_split: 0.0,
    };

    pub fn total(&self) -> f64 {
        self.det_fp + self.merge + self.split + self.union_fn + self.union_split
    }
}

/// Orientation-neutral mass chain; the public structs relabel it.
struct SideMasses {
    det: f64,
    multi: f64,
    taken: f64,
    union_unmatched: f64,
    union_matched: f64,
    coverage: f64,
}

/// The ρ-chain for one gt track over `[a, b]`. Caller guarantees the track
/// is present in the window.
fn gt_side_masses(
    series: &OverlapSeries,
    corr: &FrameCorrespondence,
    gt: usize,
    partner: Option<u32>,
    a: u32,
    b: u32,
) -> SideMasses {
    let visible = series.gt_presence_in(gt, a, b) as f64;
    debug_assert!(visible > 0.0);
    let mut matched_total = 0u32;
    let mut matched_best = 0u32;
    for &j in corr.gt_partners(gt) {
        let c = corr.matched_in(gt, j as usize, a, b);
        matched_total += c;
        matched_best = matched_best.max(c);
    }
    let rho_det = matched_total as f64 / visible;
    let rho_best = matched_best as f64 / visible;
    let (rho_pi, coverage, union_unmatched, union_matched) = match partner {
        None => (0.0, 0.0, 0.0, 0.0),
        Some(j) => {
            let j = j as usize;
            let c_pi = corr.matched_in(gt, j, a, b);
            let rho_pi = c_pi as f64 / visible;
            let counts = series.interval_counts(gt, j, a, b);
            let coverage = c_pi as f64 / counts.union as f64;
            let gap = rho_pi - coverage;
            // Partner frames outside V_i, split by what the partner was
            // doing there: unmatched (fp-flavoured) or matched to another
            // gt (merge-flavoured).
            let outside = counts.presence_pred - series.copresence_in(gt, j, a, b);
            if outside == 0 {
                (rho_pi, coverage, 0.0, gap)
            } else {
                let unmatched =
                    corr.pred_unmatched_in(j, a, b) - corr.cop_pred_unmatched_in(gt, j, a, b);
                let share = gap * unmatched as f64 / outside as f64;
                (rho_pi, coverage, share, gap - share)
            }
        }
    };
    SideMasses {
        det: 1.0 - rho_det,
        multi: rho_det - rho_best,
        taken: rho_best - rho_pi,
        union_unmatched,
        union_matched,
        coverage,
    }
}

/// The mirrored chain for one predicted track.
fn pred_side_masses(
    series: &OverlapSeries,
    corr: &FrameCorrespondence,
    pred: usize,
    partner: Option<u32>,
    a: u32,
    b: u32,
) -> SideMasses {
    let visible = series.pred_presence_in(pred, a, b) as f64;
    debug_assert!(visible > 0.0);
    let mut matched_total = 0u32;
    let mut matched_best = 0u32;
    for &i in corr.pred_partners(pred) {
        let c = corr.matched_in(i as usize, pred, a, b);
        matched_total += c;
        matched_best = matched_best.max(c);
    }
    let rho_det = matched_total as f64 / visible;
    let rho_best = matched_best as f64 / visible;
    let (rho_pi, coverage, union_unmatched, union_matched) = match partner {
        None => (0.0, 0.0, 0.0, 0.0),
        Some(i) => {
            let i = i as usize;
            let c_pi = corr.matched_in(i, pred, a, b);
            let rho_pi = c_pi as f64 / visible;
            let counts = series.interval_counts(i, pred, a, b);
            let coverage = c_pi as f64 / counts.union as f64;
            let gap = rho_pi - coverage;
            let outside = counts.presence_gt - series.copresence_in(i, pred, a, b);
            if outside == 0 {
                (rho_pi, coverage, 0.0, gap)
            } else {
                let unmatched =
                    corr.gt_unmatched_in(i, a, b) - corr.cop_gt_unmatched_in(i, pred, a, b);
                let share = gap * unmatched as f64 / outside as f64;
                (rho_pi, coverage, share, gap - share)
            }
        }
    };
    SideMasses {
        det: 1.0 - rho_det,
        multi: rho_det - rho_best,
        taken: rho_best - rho_pi,
        union_unmatched,
        union_matched,
        coverage,
    }
}

fn recall_from(side: SideMasses, partner: Option<u32>) -> RecallMasses {
    RecallMasses {
        partner,
        coverage: side.coverage,
        det_fn: side.det,
        split: side.multi,
        merge: side.taken,
        union_fp: side.union_unmatched,
        union_merge: side.union_matched,
    }
}

fn precision_from(side: SideMasses, partner: Option<u32>) -> PrecisionMasses {
    PrecisionMasses {
        partner,
        coverage: side.coverage,
        det_fp: side.det,
        merge: side.multi,
        split: side.taken,
        union_fn: side.union_unmatched,
        union_split: side.union_matched,
    }
}

/// Per-gt-track recall masses over the full sequence, under assignment `pi`
/// (from [`approx_ata`]).
pub fn decompose_recall(
    series: &OverlapSeries,
    corr: &FrameCorrespondence,
    pi: &[Option<u32>],
) -> Vec<RecallMasses> {
    assert_eq!(pi.len(), series.num_gt(), "assignment does not cover the gt tracks");
    (0..series.num_gt())
        .map(|i| recall_from(gt_side_masses(series, corr, i, pi[i], 1, series.num_frames()), pi[i]))
        .collect()
}

/// Per-predicted-track precision masses over the full sequence. Takes the
/// same gt-side `pi` and inverts it.
pub fn decompose_precision(
    series: &OverlapSeries,
    corr: &FrameCorrespondence,
    pi: &[Option<u32>],
) -> Vec<PrecisionMasses> {
    assert_eq!(pi.len(), series.num_gt(), "assignment does not cover the gt tracks");
    let mut pi_inv: Vec<Option<u32>> = vec![None; series.num_pred()];
    for (i, j) in pi.iter().enumerate() {
        if let Some(j) = j {
            pi_inv[*j as usize] = Some(i as u32);
        }
    }
    (0..series.num_pred())
        .map(|j| {
            precision_from(
                pred_side_masses(series, corr, j, pi_inv[j], 1, series.num_frames()),
                pi_inv[j],
            )
        })
        .collect()
}

/// Sequence-level error masses per type. The union-gap shares fold into the
/// base types: `union_fp → det_fp`, `union_fn → det_fn`, `union_merge →
/// merge`, `union_split → split`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverallDecomposition {
    pub det_fn: f64,
    pub det_fp: f64,
    pub split: f64,
    pub merge: f64,
    /// `K + K̂` for the strict decomposition; the windowed scheme's
    /// `(1/T) Σ_t (K + K̂)_[t−r,t+r]` at a horizon.
    pub denominator: f64,
}

impl OverallDecomposition {
    /// Summed error mass across types; equals `denominator · (1 − ÃTA)`.
    pub fn total_error_mass(&self) -> f64 {
        self.det_fn + self.det_fp + self.split + self.merge
    }

    /// Error fractions `[det_fn, det_fp, split, merge]` of the combined
    /// track budget; they sum to `1 − ÃTA`.
    pub fn raw_fractions(&self) -> [f64; 4] {
        [
            MetricAccumulator::new(self.det_fn, self.denominator).value(),
            MetricAccumulator::new(self.det_fp, self.denominator).value(),
            MetricAccumulator::new(self.split, self.denominator).value(),
            MetricAccumulator::new(self.merge, self.denominator).value(),
        ]
    }

    /// Fractions of the total error (summing to 1), or `None` when there is
    /// no error to attribute.
    pub fn normalized_fractions(&self) -> Option<[f64; 4]> {
        let total = self.total_error_mass();
        if total == 0.0 {
            return None;
        }
        Some([self.det_fn / total, self.det_fp / total, self.split / total, self.merge / total])
    }

    pub fn no_error(&self) -> bool {
        self.total_error_mass() == 0.0
    }

    /// Component-wise sum, for combining sequences or classes.
    pub fn merge_with(&self, other: &Self) -> Self {
        Self {
            det_fn: self.det_fn + other.det_fn,
            det_fp: self.det_fp + other.det_fp,
            split: self.split + other.split,
            merge: self.merge + other.merge,
            denominator: self.denominator + other.denominator,
        }
    }
}

/// Folds per-track masses into the overall per-type sums.
///
/// Each per-type total is summed in sorted order so that it depends only on
/// the multiset of per-track terms. Swapping the two track sets relabels
/// recall terms as precision terms and split as merge, which reorders the
/// terms but leaves each multiset intact — sorted summation then makes the
/// exchanged totals bit-identical rather than merely close.
pub fn decompose_overall(
    recall: &[RecallMasses],
    precision: &[PrecisionMasses],
) -> OverallDecomposition {
    let mut det_fn = Vec::with_capacity(recall.len() + precision.len());
    let mut det_fp = Vec::with_capacity(recall.len() + precision.len());
    let mut split = Vec::with_capacity(recall.len() + precision.len());
    let mut merge = Vec::with_capacity(recall.len() + precision.len());
    for r in recall {
        det_fn.push(r.det_fn);
        split.push(r.split);
        merge.push(r.merge + r.union_merge);
        det_fp.push(r.union_fp);
    }
    for p in precision {
        det_fp.push(p.det_fp);
        merge.push(p.merge);
        split.push(p.split + p.union_split);
        det_fn.push(p.union_fn);
    }
    let total = |mut terms: Vec<f64>| -> f64 {
        terms.sort_unstable_by(f64::total_cmp);
        terms.iter().sum()
    };
    OverallDecomposition {
        det_fn: total(det_fn),
        det_fp: total(det_fp),
        split: total(split),
        merge: total(merge),
        denominator: (recall.len() + precision.len()) as f64,
    }
}

/// A complete decomposition: per-track masses, per-type overall masses and
/// the approximate association metrics they are measured against.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport {
    pub recall: Vec<RecallMasses>,
    pub precision: Vec<PrecisionMasses>,
    pub overall: OverallDecomposition,
    pub approx_track_tp: f64,
    pub approx_ata: f64,
    pub approx_atr: f64,
    pub approx_atp: f64,
    pub ata_acc: MetricAccumulator,
    pub atr_acc: MetricAccumulator,
    pub atp_acc: MetricAccumulator,
}

/// The strict (whole-sequence) decomposition.
pub fn decompose(series: &OverlapSeries, corr: &FrameCorrespondence) -> DecompositionReport {
    let approx = approx_ata(series, corr);
    let recall = decompose_recall(series, corr, &approx.assignment);
    let precision = decompose_precision(series, corr, &approx.assignment);
    let overall = decompose_overall(&recall, &precision);
    let k = series.num_gt() as f64;
    let k_hat = series.num_pred() as f64;
    DecompositionReport {
        recall,
        precision,
        overall,
        approx_track_tp: approx.track_tp,
        approx_ata: approx.ata,
        approx_atr: approx.atr,
        approx_atp: approx.atp,
        ata_acc: MetricAccumulator::new(approx.track_tp, (k + k_hat) / 2.0),
        atr_acc: MetricAccumulator::new(approx.track_tp, k),
        atp_acc: MetricAccumulator::new(approx.track_tp, k_hat),
    }
}

/// The decomposition at a temporal horizon: the full per-window pipeline
/// (window-restricted `C`, `Q̃`, assignment, masses), accumulated with the
/// same `1/T`-mean scheme as the local metrics. At `r = 0` every window is a
/// single frame and the association masses vanish; for `r ≥ T−1` the result
/// equals the strict decomposition.
pub fn decompose_at_horizon(
    series: &OverlapSeries,
    corr: &FrameCorrespondence,
    horizon: Horizon,
) -> DecompositionReport {
    if series.num_frames() == 0 {
        return DecompositionReport {
            recall: Vec::new(),
            precision: Vec::new(),
            overall: OverallDecomposition {
                det_fn: 0.0,
                det_fp: 0.0,
                split: 0.0,
                merge: 0.0,
                denominator: 0.0,
            },
            approx_track_tp: 0.0,
            approx_ata: 0.0,
            approx_atr: 0.0,
            approx_atp: 0.0,
            ata_acc: MetricAccumulator::ZERO,
            atr_acc: MetricAccumulator::ZERO,
            atp_acc: MetricAccumulator::ZERO,
        };
    }
    match horizon.resolve(series.fps()) {
        Reach::Strict => decompose(series, corr),
        Reach::Frames(radius) => windowed_decomposition(series, corr, radius),
    }
}

struct WindowDecomposition {
    track_tp: f64,
    gt_count: u32,
    pred_count: u32,
    gt: Vec<(u32, SideMasses)>,
    pred: Vec<(u32, SideMasses)>,
}

fn window_decompose(
    series: &OverlapSeries,
    corr: &FrameCorrespondence,
    a: u32,
    b: u32,
) -> WindowDecomposition {
    let (track_tp, pi) = window_assignment(series, corr, a, b);
    let mut pi_inv: Vec<Option<u32>> = vec![None; series.num_pred()];
    for (i, j) in pi.iter().enumerate() {
        if let Some(j) = j {
            pi_inv[*j as usize] = Some(i as u32);
        }
    }
    let gt: Vec<(u32, SideMasses)> = (0..series.num_gt())
        .filter(|&i| series.gt_presence_in(i, a, b) > 0)
        .map(|i| (i as u32, gt_side_masses(series, corr, i, pi[i], a, b)))
        .collect();
    let pred: Vec<(u32, SideMasses)> = (0..series.num_pred())
        .filter(|&j| series.pred_presence_in(j, a, b) > 0)
        .map(|j| (j as u32, pred_side_masses(series, corr, j, pi_inv[j], a, b)))
        .collect();
    WindowDecomposition {
        track_tp,
        gt_count: gt.len() as u32,
        pred_count: pred.len() as u32,
        gt,
        pred,
    }
}

fn windowed_decomposition(
    series: &OverlapSeries,
    corr: &FrameCorrespondence,
    radius: u32,
) -> DecompositionReport {
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
    let evaluated: Vec<WindowDecomposition> = distinct
        .par_iter()
        .map(|&(a, b)| window_decompose(series, corr, a, b))
        .collect();

    let scale = num_frames as f64;
    let mut recall = vec![RecallMasses::ZERO; series.num_gt()];
    let mut precision = vec![PrecisionMasses::ZERO; series.num_pred()];
    let mut track_tp_sum = 0.0f64;
    let mut gt_count_sum = 0u64;
    let mut pred_count_sum = 0u64;
    for &w in &window_of_frame {
        let window = &evaluated[w];
        track_tp_sum += window.track_tp;
        gt_count_sum += window.gt_count as u64;
        pred_count_sum += window.pred_count as u64;
        for &(i, ref m) in &window.gt {
            let slot = &mut recall[i as usize];
            slot.coverage += m.coverage / scale;
            slot.det_fn += m.det / scale;
            slot.split += m.multi / scale;
            slot.merge += m.taken / scale;
            slot.union_fp += m.union_unmatched / scale;
            slot.union_merge += m.union_matched / scale;
        }
        for &(j, ref m) in &window.pred {
            let slot = &mut precision[j as usize];
            slot.coverage += m.coverage / scale;
            slot.det_fp += m.det / scale;
            slot.merge += m.multi / scale;
            slot.split += m.taken / scale;
            slot.union_fn += m.union_unmatched / scale;
            slot.union_split += m.union_matched / scale;
        }
    }

    let mut overall = decompose_overall(&recall, &precision);
    overall.denominator = (gt_count_sum + pred_count_sum) as f64 / scale;
    let track_tp = track_tp_sum / scale;
    let ata_acc =
        MetricAccumulator::new(track_tp, (gt_count_sum + pred_count_sum) as f64 / (2.0 * scale));
    let atr_acc = MetricAccumulator::new(track_tp, gt_count_sum as f64 / scale);
    let atp_acc = MetricAccumulator::new(track_tp, pred_count_sum as f64 / scale);
    DecompositionReport {
        recall,
        precision,
        overall,
        approx_track_tp: track_tp,
        approx_ata: ata_acc.value(),
        approx_atr: atr_acc.value(),
        approx_atp: atp_acc.value(),
        ata_acc,
        atr_acc,
        atp_acc,
    }
}
