//! Spatial overlap tests and precomputed per-pair overlap statistics.
//!
//! Windowed metrics ask the same questions for thousands of overlapping
//! intervals: how often do gt track `i` and predicted track `j` overlap
//! within `[a, b]`? How many frames is each present? [`OverlapSeries`]
//! answers all of them in O(1) from cumulative-count tables built in a single
//! O(T · K · K̂) pass — the interval-query trick of summed-area tables, in
//! one dimension per pair.
//!
//! Storage is sparse in the pairs: only track pairs that are ever co-present
//! get a table row, and only pairs that ever overlap get an overlap row. For
//! real tracking data both sets are far smaller than `K · K̂`.

use std::collections::BTreeMap;

use crate::assign::{self, WeightMatrix};
use crate::model::{BoundingBox, Sequence};

/// Intersection over union of two boxes. Zero when disjoint; boxes touching
/// along an edge have zero intersection area and thus IOU 0.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let x = (a.right().min(b.right()) - a.left.max(b.left)).max(0.0);
    let y = (a.bottom().min(b.bottom()) - a.top.max(b.top)).max(0.0);
    let intersection = x * y;
    if intersection == 0.0 {
        return 0.0;
    }
    intersection / (a.area() + b.area() - intersection)
}

/// One overlapping (gt, pred) pair at a particular frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FramePair {
    pub gt: u32,
    pub pred: u32,
    pub iou: f64,
}

/// Per-row cumulative counts over frames `1..=T`, answering "how many hits in
/// `[a, b]`" in constant time.
#[derive(Debug, Clone)]
pub(crate) struct PrefixTable {
    stride: usize, // num_frames + 1
    data: Vec<u32>,
}

impl PrefixTable {
    pub(crate) fn new(rows: usize, num_frames: u32) -> Self {
        let stride = num_frames as usize + 1;
        Self { stride, data: vec![0; rows * stride] }
    }

    /// Marks a hit at `frame` for `row`. Must be called before `finalize`.
    pub(crate) fn record(&mut self, row: usize, frame: u32) {
        self.data[row * self.stride + frame as usize] += 1;
    }

    /// Converts per-frame hit counts into cumulative sums.
    pub(crate) fn finalize(&mut self) {
        for row in self.data.chunks_mut(self.stride) {
            for t in 1..row.len() {
                row[t] += row[t - 1];
            }
        }
    }

    /// Number of hits for `row` within frames `[a, b]`, inclusive.
    pub(crate) fn count(&self, row: usize, a: u32, b: u32) -> u32 {
        debug_assert!(a >= 1 && a <= b && (b as usize) < self.stride);
        let base = row * self.stride;
        self.data[base + b as usize] - self.data[base + a as usize - 1]
    }
}

/// Counts for a (gt, pred) pair over a frame interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntervalCounts {
    /// Frames in the interval where the pair overlaps (IOU above threshold).
    pub overlap: u32,
    /// Frames where the gt track is present.
    pub presence_gt: u32,
    /// Frames where the predicted track is present.
    pub presence_pred: u32,
    /// Frames where at least one of the two is present (`|V_i ∪ V̂_j|`
    /// restricted to the interval).
    pub union: u32,
}

/// Precomputed overlap structure for one sequence at one IOU threshold.
pub struct OverlapSeries {
    num_frames: u32,
    fps: f64,
    threshold: f64,
    num_gt: usize,
    num_pred: usize,
    /// `frames[t]` lists the overlapping pairs at frame `t`, sorted by
    /// (gt, pred). Index 0 is an unused placeholder so frames stay 1-based.
    frames: Vec<Vec<FramePair>>,
    gt_presence: PrefixTable,
    pred_presence: PrefixTable,
    /// Cumulative box counts per side, for `N_[a,b]` queries.
    gt_boxes: Vec<u64>,
    pred_boxes: Vec<u64>,
    /// Pairs that are ever co-present, in (gt, pred) order; `copresence`
    /// rows align with this map's values.
    copresent_index: BTreeMap<(u32, u32), usize>,
    copresence: PrefixTable,
    /// Pairs that ever overlap; `overlaps` rows align with the values.
    overlap_index: BTreeMap<(u32, u32), usize>,
    overlaps: PrefixTable,
    /// For each gt track, the predicted tracks it ever overlaps (sorted).
    partners_of_gt: Vec<Vec<u32>>,
}

impl OverlapSeries {
    pub fn num_frames(&self) -> u32 {
        self.num_frames
    }

    /// Frame rate of the underlying sequence, for seconds-based horizons.
    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Number of ground-truth tracks `K`.
    pub fn num_gt(&self) -> usize {
        self.num_gt
    }

    /// Number of predicted tracks `K̂`.
    pub fn num_pred(&self) -> usize {
        self.num_pred
    }

    /// Overlapping pairs at `frame` (1-based), sorted by (gt, pred).
    pub fn frame_pairs(&self, frame: u32) -> &[FramePair] {
        &self.frames[frame as usize]
    }

    /// Whether gt `i` and pred `j` overlap at `frame`.
    pub fn overlaps_at(&self, gt: usize, pred: usize, frame: u32) -> bool {
        self.frames[frame as usize]
            .binary_search_by_key(&(gt as u32, pred as u32), |p| (p.gt, p.pred))
            .is_ok()
    }

    /// All overlap statistics for the pair within `[a, b]`.
    pub fn interval_counts(&self, gt: usize, pred: usize, a: u32, b: u32) -> IntervalCounts {
        let presence_gt = self.gt_presence.count(gt, a, b);
        let presence_pred = self.pred_presence.count(pred, a, b);
        let copresence = self.copresence_in(gt, pred, a, b);
        IntervalCounts {
            overlap: self.overlap_in(gt, pred, a, b),
            presence_gt,
            presence_pred,
            union: presence_gt + presence_pred - copresence,
        }
    }

    /// Frames in `[a, b]` where the pair overlaps. O(1); zero for pairs that
    /// never overlap anywhere.
    pub fn overlap_in(&self, gt: usize, pred: usize, a: u32, b: u32) -> u32 {
        match self.overlap_index.get(&(gt as u32, pred as u32)) {
            Some(&row) => self.overlaps.count(row, a, b),
            None => 0,
        }
    }

    /// Frames in `[a, b]` where both tracks are present.
    pub(crate) fn copresence_in(&self, gt: usize, pred: usize, a: u32, b: u32) -> u32 {
        match self.copresent_index.get(&(gt as u32, pred as u32)) {
            Some(&row) => self.copresence.count(row, a, b),
            None => 0,
        }
    }

    pub fn gt_presence_in(&self, gt: usize, a: u32, b: u32) -> u32 {
        self.gt_presence.count(gt, a, b)
    }

    pub fn pred_presence_in(&self, pred: usize, a: u32, b: u32) -> u32 {
        self.pred_presence.count(pred, a, b)
    }

    /// Ground-truth boxes in the interval (`N` restricted to `[a, b]`).
    pub fn gt_boxes_in(&self, a: u32, b: u32) -> u64 {
        debug_assert!(a >= 1 && a <= b && b <= self.num_frames);
        self.gt_boxes[b as usize] - self.gt_boxes[a as usize - 1]
    }

    /// Predicted boxes in the interval (`N̂` restricted to `[a, b]`).
    pub fn pred_boxes_in(&self, a: u32, b: u32) -> u64 {
        debug_assert!(a >= 1 && a <= b && b <= self.num_frames);
        self.pred_boxes[b as usize] - self.pred_boxes[a as usize - 1]
    }

    /// Predicted tracks that gt `i` ever overlaps, ascending.
    pub fn partners_of_gt(&self, gt: usize) -> &[u32] {
        &self.partners_of_gt[gt]
    }

    /// Pairs that are ever co-present, ascending by (gt, pred), with their
    /// internal row index.
    pub(crate) fn copresent_pairs(&self) -> impl Iterator<Item = ((u32, u32), usize)> + '_ {
        self.copresent_index.iter().map(|(&pair, &row)| (pair, row))
    }

}

/// Builds the overlap structure for a sequence. `threshold` is the IOU level
/// at which a box pair counts as overlapping; the comparison is inclusive
/// (`iou >= threshold`) and the threshold must lie in `(0, 1]`.
pub fn build_overlap_series(sequence: &Sequence, threshold: f64) -> OverlapSeries {
    assert!(
        threshold > 0.0 && threshold <= 1.0,
        "IOU threshold must lie in (0, 1], got {threshold}"
    );
    let num_frames = sequence.num_frames();
    let num_gt = sequence.gt().len();
    let num_pred = sequence.pred().len();
    let stride = num_frames as usize + 1;

    // Per-frame visibility lists for the frame-local pair scan.
    let mut gt_at_frame: Vec<Vec<u32>> = vec![Vec::new(); stride];
    let mut pred_at_frame: Vec<Vec<u32>> = vec![Vec::new(); stride];
    let mut gt_presence = PrefixTable::new(num_gt, num_frames);
    let mut pred_presence = PrefixTable::new(num_pred, num_frames);
    let mut gt_boxes = vec![0u64; stride];
    let mut pred_boxes = vec![0u64; stride];
    for (i, track) in sequence.gt().iter().enumerate() {
        for frame in track.frames() {
            gt_at_frame[frame as usize].push(i as u32);
            gt_presence.record(i, frame);
            gt_boxes[frame as usize] += 1;
        }
    }
    for (j, track) in sequence.pred().iter().enumerate() {
        for frame in track.frames() {
            pred_at_frame[frame as usize].push(j as u32);
            pred_presence.record(j, frame);
            pred_boxes[frame as usize] += 1;
        }
    }
    gt_presence.finalize();
    pred_presence.finalize();
    for t in 1..stride {
        gt_boxes[t] += gt_boxes[t - 1];
        pred_boxes[t] += pred_boxes[t - 1];
    }

    // First pass: discover which pairs are ever co-present / overlapping, so
    // the tables can be laid out in deterministic (gt, pred) order.
    let mut frames: Vec<Vec<FramePair>> = vec![Vec::new(); stride];
    let mut copresent_index: BTreeMap<(u32, u32), usize> = BTreeMap::new();
    let mut overlap_index: BTreeMap<(u32, u32), usize> = BTreeMap::new();
    for t in 1..stride {
        let frame = t as u32;
        for &i in &gt_at_frame[t] {
            let gt_box = sequence.gt().track(i as usize).box_at(frame).unwrap();
            for &j in &pred_at_frame[t] {
                copresent_index.entry((i, j)).or_insert(0);
                let pred_box = sequence.pred().track(j as usize).box_at(frame).unwrap();
                let overlap = iou(gt_box, pred_box);
                if overlap >= threshold {
                    overlap_index.entry((i, j)).or_insert(0);
                    frames[t].push(FramePair { gt: i, pred: j, iou: overlap });
                }
            }
        }
        // The scan runs gt-major but pred order follows the inner loop, which
        // is already ascending; both sides visit ascending indices, so the
        // per-frame pairs come out sorted by (gt, pred).
        debug_assert!(frames[t].windows(2).all(|w| (w[0].gt, w[0].pred) < (w[1].gt, w[1].pred)));
    }
    for (row, (_, slot)) in copresent_index.iter_mut().enumerate() {
        *slot = row;
    }
    for (row, (_, slot)) in overlap_index.iter_mut().enumerate() {
        *slot = row;
    }

    // Second pass: fill the per-pair cumulative tables.
    let mut copresence = PrefixTable::new(copresent_index.len(), num_frames);
    let mut overlaps = PrefixTable::new(overlap_index.len(), num_frames);
    for t in 1..stride {
        let frame = t as u32;
        for &i in &gt_at_frame[t] {
            for &j in &pred_at_frame[t] {
                copresence.record(copresent_index[&(i, j)], frame);
            }
        }
        for pair in &frames[t] {
            overlaps.record(overlap_index[&(pair.gt, pair.pred)], frame);
        }
    }
    copresence.finalize();
    overlaps.finalize();

    let mut partners_of_gt: Vec<Vec<u32>> = vec![Vec::new(); num_gt];
    for &(i, j) in overlap_index.keys() {
        partners_of_gt[i as usize].push(j);
    }

    OverlapSeries {
        num_frames,
        fps: sequence.fps(),
        threshold,
        num_gt,
        num_pred,
        frames,
        gt_presence,
        pred_presence,
        gt_boxes,
        pred_boxes,
        copresent_index,
        copresence,
        overlap_index,
        overlaps,
        partners_of_gt,
    }
}

/// Per-frame correspondence: the maximum-cardinality matching over the
/// frame's overlapping pairs, ties broken by total IOU and then
/// lexicographically by (gt, pred). Returns global (gt, pred) index pairs,
/// sorted by gt.
pub fn frame_matching(pairs: &[FramePair]) -> Vec<(u32, u32)> {
    if pairs.is_empty() {
        return Vec::new();
    }
    // Compress to the tracks that actually appear in this frame's pair list.
    let mut gts: Vec<u32> = pairs.iter().map(|p| p.gt).collect();
    gts.dedup(); // already sorted gt-major
    let mut preds: Vec<u32> = pairs.iter().map(|p| p.pred).collect();
    preds.sort_unstable();
    preds.dedup();
    let gt_slot = |g: u32| gts.binary_search(&g).unwrap();
    let pred_slot = |p: u32| preds.binary_search(&p).unwrap();

    let mut binary = WeightMatrix::zeros(gts.len(), preds.len());
    let mut ties = WeightMatrix::zeros(gts.len(), preds.len());
    for pair in pairs {
        binary.set(gt_slot(pair.gt), pred_slot(pair.pred), 1.0);
        ties.set(gt_slot(pair.gt), pred_slot(pair.pred), pair.iou);
    }
    let matching = assign::max_cardinality_matching(&binary, &ties);
    matching.pairs.iter().map(|&(r, c)| (gts[r], preds[c])).collect()
}
