//! Core data model: boxes, tracks, sequences and metric accumulators.
//!
//! Frames are 1-based and a sequence spans frames `1..=num_frames`. A track
//! holds at most one box per frame; the set of frames it appears in is its
//! visibility set. Tracks never need to be contiguous — gaps are ordinary.

use std::collections::BTreeMap;

use serde::Serialize;

/// Axis-aligned bounding box in image coordinates.
///
/// `left`/`top` locate the top-left corner; `width` and `height` must be
/// strictly positive (degenerate boxes are rejected at ingest).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub left: f64,
    pub top: f64,
    pub width: f64,
    pub height: f64,
}

impl BoundingBox {
    /// Creates a box, panicking on non-positive dimensions or non-finite
    /// coordinates. External data goes through `ingest`, which reports such
    /// rows as errors instead.
    pub fn new(left: f64, top: f64, width: f64, height: f64) -> Self {
        assert!(
            left.is_finite() && top.is_finite() && width.is_finite() && height.is_finite(),
            "bounding box coordinates must be finite"
        );
        assert!(width > 0.0 && height > 0.0, "bounding box must have positive extent");
        Self { left, top, width, height }
    }

    pub fn right(&self) -> f64 {
        self.left + self.width
    }

    pub fn bottom(&self) -> f64 {
        self.top + self.height
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }
}

/// A single object trajectory: an external identity plus one box per frame
/// the object is visible in.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    external_id: i64,
    boxes: BTreeMap<u32, BoundingBox>,
}

impl Track {
    /// Creates a track from its per-frame boxes. Empty tracks are not
    /// representable; filtering that empties a track must drop it instead.
    pub fn new(external_id: i64, boxes: BTreeMap<u32, BoundingBox>) -> Self {
        assert!(!boxes.is_empty(), "track {external_id} has no boxes");
        assert!(*boxes.keys().next().unwrap() >= 1, "frames are 1-based");
        Self { external_id, boxes }
    }

    /// The identity carried by the source data (gt id or tracker id).
    pub fn external_id(&self) -> i64 {
        self.external_id
    }

    /// Frames this track is visible in, ascending.
    pub fn frames(&self) -> impl Iterator<Item = u32> + '_ {
        self.boxes.keys().copied()
    }

    pub fn boxes(&self) -> impl Iterator<Item = (u32, &BoundingBox)> {
        self.boxes.iter().map(|(&t, b)| (t, b))
    }

    pub fn box_at(&self, frame: u32) -> Option<&BoundingBox> {
        self.boxes.get(&frame)
    }

    /// Number of frames the track is visible in (`|V_i|`).
    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        false // by construction
    }

    pub fn first_frame(&self) -> u32 {
        *self.boxes.keys().next().unwrap()
    }

    pub fn last_frame(&self) -> u32 {
        *self.boxes.keys().next_back().unwrap()
    }
}

/// Which side of the evaluation a track set belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TrackRole {
    GroundTruth,
    Predicted,
}

/// All tracks on one side of the evaluation.
///
/// Tracks are addressed by dense index throughout the crate; the external id
/// is kept only for reporting. External ids must be unique within a set.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackSet {
    role: TrackRole,
    tracks: Vec<Track>,
}

impl TrackSet {
    pub fn new(role: TrackRole, tracks: Vec<Track>) -> Self {
        let mut seen = std::collections::HashSet::new();
        for track in &tracks {
            assert!(
                seen.insert(track.external_id()),
                "duplicate track id {} in {:?} set",
                track.external_id(),
                role
            );
        }
        // Canonical order: ascending external id. Internal indices then
        // agree between in-memory construction and file ingest, which keeps
        // index-based tie-breaking identical across the two paths.
        let mut tracks = tracks;
        tracks.sort_by_key(Track::external_id);
        Self { role, tracks }
    }

    pub fn role(&self) -> TrackRole {
        self.role
    }

    /// Number of tracks (`K` for ground truth, `K̂` for predictions).
    pub fn len(&self) -> usize {
        self.tracks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tracks.is_empty()
    }

    pub fn track(&self, index: usize) -> &Track {
        &self.tracks[index]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Track> {
        self.tracks.iter()
    }

    /// Total number of boxes across all tracks (`N` resp. `N̂`).
    pub fn total_boxes(&self) -> u64 {
        self.tracks.iter().map(|t| t.len() as u64).sum()
    }

    /// Largest frame index that carries a box, or 0 for an empty set.
    pub fn max_frame(&self) -> u32 {
        self.tracks.iter().map(|t| t.last_frame()).max().unwrap_or(0)
    }

    pub fn index_of(&self, external_id: i64) -> Option<usize> {
        self.tracks.iter().position(|t| t.external_id() == external_id)
    }
}

/// A ground-truth / prediction pair over a common frame range.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    name: String,
    num_frames: u32,
    fps: f64,
    gt: TrackSet,
    pred: TrackSet,
}

impl Sequence {
    /// Assembles a sequence. `num_frames` is the evaluation length `T`; every
    /// box on either side must lie in `1..=num_frames`. An empty sequence
    /// (`T = 0`, no tracks) is allowed and yields 0-valued metrics.
    pub fn new(name: impl Into<String>, num_frames: u32, fps: f64, gt: TrackSet, pred: TrackSet) -> Self {
        assert!(fps > 0.0 && fps.is_finite(), "fps must be positive");
        assert_eq!(gt.role(), TrackRole::GroundTruth);
        assert_eq!(pred.role(), TrackRole::Predicted);
        let max_frame = gt.max_frame().max(pred.max_frame());
        assert!(
            max_frame <= num_frames,
            "box at frame {max_frame} lies beyond sequence length {num_frames}"
        );
        Self { name: name.into(), num_frames, fps, gt, pred }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Sequence length `T` in frames.
    pub fn num_frames(&self) -> u32 {
        self.num_frames
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn gt(&self) -> &TrackSet {
        &self.gt
    }

    pub fn pred(&self) -> &TrackSet {
        &self.pred
    }

    /// The same sequence with ground truth and predictions exchanged.
    /// Symmetric metrics are invariant under this; precision/recall-style
    /// pairs swap.
    pub fn swapped(&self) -> Sequence {
        let gt = TrackSet::new(TrackRole::GroundTruth, self.pred.tracks.clone());
        let pred = TrackSet::new(TrackRole::Predicted, self.gt.tracks.clone());
        Sequence { name: self.name.clone(), num_frames: self.num_frames, fps: self.fps, gt, pred }
    }
}

/// A one-to-one assignment between row and column indices of a weight
/// matrix, together with the weight it attains.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    /// Matched `(row, column)` pairs, sorted by row. Pairs of zero weight are
    /// never included.
    pub pairs: Vec<(usize, usize)>,
    /// Total weight of the assignment (for cardinality matchings, the number
    /// of matched pairs).
    pub objective: f64,
}

impl Matching {
    pub fn empty() -> Self {
        Self { pairs: Vec::new(), objective: 0.0 }
    }

    /// Matched column for a row, if any. Linear scan; matchings are small.
    pub fn column_for(&self, row: usize) -> Option<usize> {
        self.pairs.iter().find(|&&(r, _)| r == row).map(|&(_, c)| c)
    }
}

/// A metric expressed as an exact numerator / denominator pair.
///
/// Keeping the two parts separate is what makes results combinable: merging
/// per-sequence (or per-class) results is component-wise addition, and the
/// ratio is taken once at the end. The empty ratio `0 / 0` reads as 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricAccumulator {
    pub numerator: f64,
    pub denominator: f64,
}

impl MetricAccumulator {
    pub const ZERO: Self = Self { numerator: 0.0, denominator: 0.0 };

    pub fn new(numerator: f64, denominator: f64) -> Self {
        Self { numerator, denominator }
    }

    /// The metric value. `0 / 0` (nothing to score) reads as 0 so that empty
    /// sequences do not poison averages with NaN.
    pub fn value(&self) -> f64 {
        if self.denominator == 0.0 {
            0.0
        } else {
            self.numerator / self.denominator
        }
    }

    /// Component-wise sum with another accumulator.
    pub fn merge(self, other: Self) -> Self {
        Self {
            numerator: self.numerator + other.numerator,
            denominator: self.denominator + other.denominator,
        }
    }
}

impl std::ops::Add for MetricAccumulator {
    type Output = Self;

    fn add(self, other: Self) -> Self {
        self.merge(other)
    }
}

impl std::iter::Sum for MetricAccumulator {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, Self::merge)
    }
}
