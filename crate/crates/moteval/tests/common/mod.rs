//! Shared test support: seeded sequence generators and brute-force oracles.
//!
//! The oracles recompute every quantity by exhaustive enumeration straight
//! from the [`Sequence`] — no prefix tables, no Hungarian solver — so that
//! agreement with the library is meaningful. They are only viable on tiny
//! instances (≤ 3 tracks per side), which is what the micro generator
//! produces.

#![allow(dead_code)] // each integration-test binary uses a subset

use std::collections::BTreeMap;

use moteval::model::{BoundingBox, Sequence, Track, TrackRole, TrackSet};

// ---------------------------------------------------------------------------
// Deterministic RNG (SplitMix64): tiny, seedable, stable forever.

pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform value in `0..n`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        self.next_u64() % n
    }

    /// True with probability `p`.
    pub fn chance(&mut self, p: f64) -> bool {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64) < p
    }
}

// ---------------------------------------------------------------------------
// Sequence generators

fn grid_box(col: i64, row: i64, size: f64) -> BoundingBox {
    BoundingBox::new(col as f64, row as f64 * 30.0, size, size)
}

/// A randomised sequence for property-style corpora: ground-truth tracks on
/// a coarse grid, predictions derived from them by jitter, frame dropouts,
/// identity splits and spurious additions. Lanes are 30px apart vertically,
/// so only same-lane boxes can overlap; horizontal steps of 3px around a
/// 10px box put IOUs on either side of the 0.5 threshold.
pub fn random_sequence(seed: u64, max_frames: u32, max_tracks: usize) -> Sequence {
    let mut rng = Rng::new(seed);
    let num_frames = 2 + rng.below(max_frames as u64 - 1) as u32;
    let num_gt = 1 + rng.below(max_tracks as u64) as usize;

    let mut gt_tracks: Vec<Track> = Vec::new();
    for k in 0..num_gt {
        let row = (k % 3) as i64;
        let start = 1 + rng.below(num_frames as u64) as u32;
        let end = start + rng.below((num_frames - start + 1) as u64) as u32;
        let mut col = rng.below(8) as i64 * 3;
        let mut boxes = BTreeMap::new();
        for t in start..=end {
            col += [-3, 0, 3][rng.below(3) as usize];
            col = col.clamp(0, 36);
            boxes.insert(t, grid_box(col, row, 10.0));
        }
        gt_tracks.push(Track::new(k as i64 + 1, boxes));
    }

    let mut pred_tracks: Vec<Track> = Vec::new();
    let mut next_pred_id = 101i64;
    for track in &gt_tracks {
        if pred_tracks.len() >= max_tracks || !rng.chance(0.85) {
            continue;
        }
        // Jittered copy with dropouts, sometimes split into two identities.
        let mut kept: Vec<(u32, BoundingBox)> = Vec::new();
        for (t, b) in track.boxes() {
            if rng.chance(0.9) {
                // A coarse grid step decides rough overlap; a fine sub-pixel
                // offset makes every IOU value distinct, so per-frame
                // matchings never tie on equal IOU sums. (Exact cross ties
                // would make the matching orientation-dependent, which the
                // micro corpus covers deliberately — this corpus should not.)
                let coarse = [-3.0, 0.0, 0.0, 3.0][rng.below(4) as usize];
                let dx = coarse + (rng.below(200_001) as f64 - 100_000.0) * 1e-7;
                kept.push((t, BoundingBox::new(b.left + dx, b.top, b.width, b.height)));
            }
        }
        if kept.is_empty() {
            continue;
        }
        let split_at = if kept.len() >= 2 && rng.chance(0.4) {
            1 + rng.below(kept.len() as u64 - 1) as usize
        } else {
            kept.len()
        };
        for part in [&kept[..split_at], &kept[split_at..]] {
            if part.is_empty() || pred_tracks.len() >= max_tracks {
                continue;
            }
            pred_tracks.push(Track::new(next_pred_id, part.iter().copied().collect()));
            next_pred_id += 1;
        }
    }
    // Spurious tracks on an otherwise unused lane.
    for _ in 0..rng.below(3) {
        if pred_tracks.len() >= max_tracks {
            break;
        }
        let start = 1 + rng.below(num_frames as u64) as u32;
        let end = start + rng.below((num_frames - start + 1) as u64) as u32;
        let boxes: BTreeMap<u32, BoundingBox> =
            (start..=end).map(|t| (t, grid_box(rng.below(8) as i64 * 3, 7, 10.0))).collect();
        pred_tracks.push(Track::new(next_pred_id, boxes));
        next_pred_id += 1;
    }

    Sequence::new(
        format!("random-{seed}"),
        num_frames,
        10.0,
        TrackSet::new(TrackRole::GroundTruth, gt_tracks),
        TrackSet::new(TrackRole::Predicted, pred_tracks),
    )
}

/// Like [`random_sequence`], but every ground-truth track gets a private
/// lane and derived predictions stay on it (spurious tracks live on lanes
/// of their own). Per frame, each track then overlaps at most one partner:
/// `B(t)` is one-to-one by construction.
pub fn random_one_to_one_sequence(seed: u64, max_frames: u32, max_tracks: usize) -> Sequence {
    let mut rng = Rng::new(seed ^ 0x1701_C0DE);
    let num_frames = 2 + rng.below(max_frames as u64 - 1) as u32;
    let num_gt = 1 + rng.below(max_tracks as u64) as usize;

    let mut gt_tracks: Vec<Track> = Vec::new();
    for k in 0..num_gt {
        let row = k as i64; // private lane
        let start = 1 + rng.below(num_frames as u64) as u32;
        let end = start + rng.below((num_frames - start + 1) as u64) as u32;
        let col = rng.below(8) as i64 * 3;
        let boxes: BTreeMap<u32, BoundingBox> =
            (start..=end).map(|t| (t, grid_box(col, row, 10.0))).collect();
        gt_tracks.push(Track::new(k as i64 + 1, boxes));
    }

    let mut pred_tracks: Vec<Track> = Vec::new();
    let mut next_pred_id = 101i64;
    for track in &gt_tracks {
        if pred_tracks.len() >= max_tracks || !rng.chance(0.85) {
            continue;
        }
        let mut kept: Vec<(u32, BoundingBox)> = Vec::new();
        for (t, b) in track.boxes() {
            if rng.chance(0.9) {
                let dx = [-2.0, 0.0, 0.0, 2.0][rng.below(4) as usize];
                kept.push((t, BoundingBox::new(b.left + dx, b.top, b.width, b.height)));
            }
        }
        if kept.is_empty() {
            continue;
        }
        let split_at = if kept.len() >= 2 && rng.chance(0.4) {
            1 + rng.below(kept.len() as u64 - 1) as usize
        } else {
            kept.len()
        };
        for part in [&kept[..split_at], &kept[split_at..]] {
            if part.is_empty() || pred_tracks.len() >= max_tracks {
                continue;
            }
            pred_tracks.push(Track::new(next_pred_id, part.iter().copied().collect()));
            next_pred_id += 1;
        }
    }
    for lane in 0..rng.below(3) {
        if pred_tracks.len() >= max_tracks {
            break;
        }
        let start = 1 + rng.below(num_frames as u64) as u32;
        let end = start + rng.below((num_frames - start + 1) as u64) as u32;
        let boxes: BTreeMap<u32, BoundingBox> =
            (start..=end).map(|t| (t, grid_box(0, 20 + lane as i64, 10.0))).collect();
        pred_tracks.push(Track::new(next_pred_id, boxes));
        next_pred_id += 1;
    }

    Sequence::new(
        format!("one-to-one-{seed}"),
        num_frames,
        10.0,
        TrackSet::new(TrackRole::GroundTruth, gt_tracks),
        TrackSet::new(TrackRole::Predicted, pred_tracks),
    )
}

/// A micro-instance for the exhaustive oracle: `T ≤ 6`, at most three
/// tracks per side, boxes on a 2px grid around an 8px size so that exact
/// ties and contended matchings are common. Both sides are generated
/// independently; presence may have gaps.
pub fn random_micro_sequence(seed: u64) -> Sequence {
    let mut rng = Rng::new(seed ^ 0xA5A5_5A5A_DEAD_BEEF);
    let num_frames = 1 + rng.below(6) as u32;
    fn make_side(rng: &mut Rng, num_frames: u32, count: usize, base_id: i64) -> Vec<Track> {
        (0..count)
            .map(|k| {
                let mut boxes = BTreeMap::new();
                for t in 1..=num_frames {
                    if rng.chance(0.7) {
                        let col = rng.below(5) as i64 * 2;
                        let row = if rng.chance(0.75) { 0 } else { 1 };
                        boxes.insert(t, grid_box(col, row, 8.0));
                    }
                }
                if boxes.is_empty() {
                    // Tracks must exist somewhere; force one frame.
                    let t = 1 + rng.below(num_frames as u64) as u32;
                    boxes.insert(t, grid_box(rng.below(5) as i64 * 2, 0, 8.0));
                }
                Track::new(base_id + k as i64, boxes)
            })
            .collect()
    }
    let num_gt = rng.below(4) as usize;
    let gt = make_side(&mut rng, num_frames, num_gt, 1);
    let num_pred = rng.below(4) as usize;
    let pred = make_side(&mut rng, num_frames, num_pred, 1);
    Sequence::new(
        format!("micro-{seed}"),
        num_frames,
        10.0,
        TrackSet::new(TrackRole::GroundTruth, gt),
        TrackSet::new(TrackRole::Predicted, pred),
    )
}

/// Rebuilds the sequence with frame `t` renamed to `perm[t-1]` on both
/// sides. `perm` must be a permutation of `1..=T`.
pub fn permute_frames(seq: &Sequence, perm: &[u32]) -> Sequence {
    assert_eq!(perm.len(), seq.num_frames() as usize);
    let rename = |set: &TrackSet, role: TrackRole| {
        let tracks = set
            .iter()
            .map(|track| {
                let boxes: BTreeMap<u32, BoundingBox> =
                    track.boxes().map(|(t, b)| (perm[t as usize - 1], *b)).collect();
                Track::new(track.external_id(), boxes)
            })
            .collect();
        TrackSet::new(role, tracks)
    };
    Sequence::new(
        format!("{}-permuted", seq.name()),
        seq.num_frames(),
        seq.fps(),
        rename(seq.gt(), TrackRole::GroundTruth),
        rename(seq.pred(), TrackRole::Predicted),
    )
}

/// A random permutation of `1..=n`.
pub fn random_permutation(rng: &mut Rng, n: u32) -> Vec<u32> {
    let mut perm: Vec<u32> = (1..=n).collect();
    for i in (1..perm.len()).rev() {
        perm.swap(i, rng.below(i as u64 + 1) as usize);
    }
    perm
}

// ---------------------------------------------------------------------------
// Brute-force oracles

/// Intersection-over-union, written independently of the library.
pub fn oracle_iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let x = (a.left + a.width).min(b.left + b.width) - a.left.max(b.left);
    let y = (a.top + a.height).min(b.top + b.height) - a.top.max(b.top);
    if x <= 0.0 || y <= 0.0 {
        return 0.0;
    }
    let inter = x * y;
    inter / (a.width * a.height + b.width * b.height - inter)
}

/// Maximum total weight over all one-to-one row→column mappings, by
/// exhaustive recursion. Zero and negative entries never match.
pub fn oracle_best_assignment(weights: &[Vec<f64>]) -> f64 {
    fn recurse(weights: &[Vec<f64>], row: usize, used: u32) -> f64 {
        if row == weights.len() {
            return 0.0;
        }
        let mut best = recurse(weights, row + 1, used);
        for (j, &w) in weights[row].iter().enumerate() {
            if w > 0.0 && used & (1 << j) == 0 {
                best = best.max(w + recurse(weights, row + 1, used | (1 << j)));
            }
        }
        best
    }
    assert!(weights.iter().all(|r| r.len() <= 32));
    recurse(weights, 0, 0)
}

/// The deterministic matching the library promises: among all mappings
/// within `1e-9·max(W*, 1)` of the optimum `W*`, the lexicographically
/// smallest (rows ascending, each row preferring the smallest column, with
/// "unmatched" ordered after every column). Found by full enumeration.
pub fn oracle_lex_matching(weights: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let rows = weights.len();
    let mut best_weight = f64::NEG_INFINITY;
    let mut candidates: Vec<(f64, Vec<usize>)> = Vec::new();
    // Enumerate every mapping as a per-row column choice (usize::MAX = none).
    fn enumerate(
        weights: &[Vec<f64>],
        row: usize,
        used: u32,
        sum: f64,
        choice: &mut Vec<usize>,
        out: &mut Vec<(f64, Vec<usize>)>,
    ) {
        if row == weights.len() {
            out.push((sum, choice.clone()));
            return;
        }
        choice.push(usize::MAX);
        enumerate(weights, row + 1, used, sum, choice, out);
        choice.pop();
        for (j, &w) in weights[row].iter().enumerate() {
            if w > 0.0 && used & (1 << j) == 0 {
                choice.push(j);
                enumerate(weights, row + 1, used | (1 << j), sum + w, choice, out);
                choice.pop();
            }
        }
    }
    let mut all = Vec::new();
    enumerate(weights, 0, 0, 0.0, &mut Vec::with_capacity(rows), &mut all);
    for (sum, _) in &all {
        best_weight = best_weight.max(*sum);
    }
    let tolerance = 1e-9 * best_weight.abs().max(1.0);
    for (sum, choice) in all {
        if sum >= best_weight - tolerance {
            candidates.push((sum, choice));
        }
    }
    let lex = candidates.into_iter().map(|(_, c)| c).min().expect("at least the empty mapping");
    lex.iter()
        .enumerate()
        .filter(|&(_, &j)| j != usize::MAX)
        .map(|(i, &j)| (i, j))
        .collect()
}

/// Presence lookup used throughout the oracles.
fn box_of(set: &TrackSet, index: usize, frame: u32) -> Option<&BoundingBox> {
    set.track(index).box_at(frame)
}

/// Binary overlap at one frame: `iou >= threshold` with both present.
fn overlaps_at(seq: &Sequence, i: usize, j: usize, t: u32, threshold: f64) -> bool {
    match (box_of(seq.gt(), i, t), box_of(seq.pred(), j, t)) {
        (Some(a), Some(b)) => oracle_iou(a, b) >= threshold,
        _ => false,
    }
}

/// Overlap counts `|B_ij ∩ [a,b]|` for all pairs.
fn window_overlap_counts(seq: &Sequence, threshold: f64, a: u32, b: u32) -> Vec<Vec<u64>> {
    let (k, kh) = (seq.gt().len(), seq.pred().len());
    let mut counts = vec![vec![0u64; kh]; k];
    for (i, row) in counts.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            for t in a..=b {
                if overlaps_at(seq, i, j, t, threshold) {
                    *cell += 1;
                }
            }
        }
    }
    counts
}

/// Temporal-union sizes `|V_i ∪ V̂_j|` restricted to `[a, b]`.
fn window_union_counts(seq: &Sequence, a: u32, b: u32) -> Vec<Vec<u64>> {
    let (k, kh) = (seq.gt().len(), seq.pred().len());
    let mut unions = vec![vec![0u64; kh]; k];
    for (i, row) in unions.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            for t in a..=b {
                if box_of(seq.gt(), i, t).is_some() || box_of(seq.pred(), j, t).is_some() {
                    *cell += 1;
                }
            }
        }
    }
    unions
}

/// IDTP over `[a, b]`: maximum assignment on windowed overlap counts.
pub fn oracle_window_idtp(seq: &Sequence, threshold: f64, a: u32, b: u32) -> f64 {
    let counts = window_overlap_counts(seq, threshold, a, b);
    let weights: Vec<Vec<f64>> =
        counts.iter().map(|row| row.iter().map(|&c| c as f64).collect()).collect();
    oracle_best_assignment(&weights)
}

/// TrackTP over `[a, b]`: maximum assignment on windowed `Q`.
pub fn oracle_window_track_tp(seq: &Sequence, threshold: f64, a: u32, b: u32) -> f64 {
    let counts = window_overlap_counts(seq, threshold, a, b);
    let unions = window_union_counts(seq, a, b);
    let weights: Vec<Vec<f64>> = counts
        .iter()
        .zip(&unions)
        .map(|(crow, urow)| {
            crow.iter()
                .zip(urow)
                .map(|(&c, &u)| if c == 0 { 0.0 } else { c as f64 / u as f64 })
                .collect()
        })
        .collect();
    oracle_best_assignment(&weights)
}

/// Strict IDTP (whole sequence).
pub fn oracle_idtp(seq: &Sequence, threshold: f64) -> f64 {
    oracle_window_idtp(seq, threshold, 1, seq.num_frames().max(1))
}

/// Strict TrackTP (whole sequence).
pub fn oracle_track_tp(seq: &Sequence, threshold: f64) -> f64 {
    oracle_window_track_tp(seq, threshold, 1, seq.num_frames().max(1))
}

/// Boxes present per side within `[a, b]`.
fn window_box_counts(seq: &Sequence, a: u32, b: u32) -> (u64, u64) {
    let count = |set: &TrackSet| -> u64 {
        set.iter().flat_map(Track::frames).filter(|&t| t >= a && t <= b).count() as u64
    };
    (count(seq.gt()), count(seq.pred()))
}

/// Tracks present per side within `[a, b]`.
fn window_track_counts(seq: &Sequence, a: u32, b: u32) -> (u64, u64) {
    let count = |set: &TrackSet| -> u64 {
        set.iter().filter(|track| track.frames().any(|t| t >= a && t <= b)).count() as u64
    };
    (count(seq.gt()), count(seq.pred()))
}

/// Windowed metric accumulators rebuilt from scratch: for radius `r`,
/// returns `((lidf1_num, lidf1_den), (alta_num, alta_den))` scaled exactly
/// like the library: numerators are `(1/T)·Σ_t`, denominators
/// `(1/2T)·Σ_t`.
pub fn oracle_local_metrics(
    seq: &Sequence,
    threshold: f64,
    radius: u32,
) -> ((f64, f64), (f64, f64)) {
    let t_max = seq.num_frames();
    assert!(t_max > 0, "windowed metrics need at least one frame");
    let mut lidf1 = (0.0f64, 0.0f64);
    let mut alta = (0.0f64, 0.0f64);
    for t in 1..=t_max {
        let a = t.saturating_sub(radius).max(1);
        let b = t.saturating_add(radius).min(t_max);
        let (n_gt, n_pred) = window_box_counts(seq, a, b);
        lidf1.0 += oracle_window_idtp(seq, threshold, a, b);
        lidf1.1 += (n_gt + n_pred) as f64;
        let (k_gt, k_pred) = window_track_counts(seq, a, b);
        alta.0 += oracle_window_track_tp(seq, threshold, a, b);
        alta.1 += (k_gt + k_pred) as f64;
    }
    let t = t_max as f64;
    ((lidf1.0 / t, lidf1.1 / (2.0 * t)), (alta.0 / t, alta.1 / (2.0 * t)))
}

/// The per-frame correspondence rebuilt by enumeration: for each frame the
/// maximum-cardinality matching over overlapping pairs, ties broken by
/// total IOU then lexicographically — the same policy as the library,
/// realised on the same `1 + ε·iou` weights but solved by brute force.
/// Returns per-frame matched (gt, pred) pairs, `frames[0]` unused.
pub fn oracle_correspondence(seq: &Sequence, threshold: f64) -> Vec<Vec<(usize, usize)>> {
    let (k, kh) = (seq.gt().len(), seq.pred().len());
    let mut frames: Vec<Vec<(usize, usize)>> = vec![Vec::new(); seq.num_frames() as usize + 1];
    for t in 1..=seq.num_frames() {
        let mut iou_sum = 0.0f64;
        let mut ious = vec![vec![0.0f64; kh]; k];
        for (i, row) in ious.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                if let (Some(a), Some(b)) = (box_of(seq.gt(), i, t), box_of(seq.pred(), j, t)) {
                    let value = oracle_iou(a, b);
                    if value >= threshold {
                        *cell = value;
                        iou_sum += value;
                    }
                }
            }
        }
        let epsilon = 0.5 / (1.0 + iou_sum);
        let weights: Vec<Vec<f64>> = ious
            .iter()
            .map(|row| {
                row.iter().map(|&v| if v > 0.0 { 1.0 + epsilon * v } else { 0.0 }).collect()
            })
            .collect();
        frames[t as usize] = oracle_lex_matching(&weights);
    }
    frames
}

/// ÃTA rebuilt from the oracle correspondence: `Q̃_ij = C_ij / |V_i ∪ V̂_j|`
/// maximised over one-to-one assignments, normalised by `½(K + K̂)`.
pub fn oracle_approx_ata(seq: &Sequence, threshold: f64) -> f64 {
    let (k, kh) = (seq.gt().len(), seq.pred().len());
    if k + kh == 0 {
        return 0.0;
    }
    let correspondence = oracle_correspondence(seq, threshold);
    let mut matched = vec![vec![0u64; kh]; k];
    for pairs in &correspondence {
        for &(i, j) in pairs {
            matched[i][j] += 1;
        }
    }
    let unions = window_union_counts(seq, 1, seq.num_frames().max(1));
    let weights: Vec<Vec<f64>> = matched
        .iter()
        .zip(&unions)
        .map(|(crow, urow)| {
            crow.iter()
                .zip(urow)
                .map(|(&c, &u)| if c == 0 { 0.0 } else { c as f64 / u as f64 })
                .collect()
        })
        .collect();
    oracle_best_assignment(&weights) / (0.5 * (k + kh) as f64)
}

/// Detection counts rebuilt from the oracle correspondence.
pub fn oracle_det_counts(seq: &Sequence, threshold: f64) -> (u64, u64, u64) {
    let correspondence = oracle_correspondence(seq, threshold);
    let tp: u64 = correspondence.iter().map(|pairs| pairs.len() as u64).sum();
    let n: u64 = seq.gt().total_boxes();
    let n_hat: u64 = seq.pred().total_boxes();
    (tp, n - tp, n_hat - tp)
}

// ---------------------------------------------------------------------------
// Assertion helpers

#[track_caller]
pub fn assert_close(label: &str, got: f64, want: f64, tolerance: f64) {
    assert!(
        (got - want).abs() <= tolerance,
        "{label}: got {got}, want {want} (|Δ| = {} > {tolerance})",
        (got - want).abs(),
    );
}
