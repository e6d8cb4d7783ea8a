//! Evaluation of multi-object tracking output.
//!
//! The crate scores a set of predicted tracks against ground-truth tracks for
//! a video sequence. Alongside the established strict metrics (IDF1, ATA) and
//! detection-level baselines (DetF1, MOTA) it implements their *temporally
//! local* counterparts, LIDF1 and ALTA, which evaluate identity preservation
//! over sliding windows of a configurable horizon instead of over the entire
//! sequence. Sweeping the horizon from a single frame to the full sequence
//! interpolates between pure detection quality and strict identity quality,
//! which makes it possible to see *how long* a tracker keeps identities, not
//! just whether it ever drops them.
//!
//! A four-way error decomposition attributes the association shortfall of a
//! tracker to missed detections, false positives, identity splits and
//! identity merges, both for the whole sequence and per horizon.
//!
//! # Layout
//!
//! - [`model`] — core data types: boxes, tracks, sequences, accumulators.
//! - [`ingest`] — MOT CSV parsing, score-threshold selection, `seqinfo.ini`.
//! - [`overlap`] — IOU tests and prefix-sum tables for O(1) window queries.
//! - [`assign`] — deterministic maximum-weight bipartite assignment.
//! - [`metrics`] — strict metrics: DetF1, IDF1, ATA and a reference MOTA.
//! - [`local`] — LIDF1 and ALTA at configurable horizons, horizon curves.
//! - [`decompose`] — FN / FP / split / merge error decomposition.
//! - [`analysis`] — rank tables and rank-correlation utilities.
//! - [`synth`] — synthetic sequences and perturbations for testing.
//! - [`cli`] — the evaluation pipeline behind the `moteval` binary.

pub mod analysis;
pub mod assign;
pub mod cli;
pub mod decompose;
pub mod ingest;
pub mod local;
pub mod metrics;
pub mod model;
pub mod overlap;
pub mod synth;

pub use model::{BoundingBox, Matching, MetricAccumulator, Sequence, Track, TrackRole, TrackSet};
