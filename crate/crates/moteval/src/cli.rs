//! Command-line front end: evaluate (sequence, tracker) pairs, compare
//! trackers, emit synthetic fixtures and horizon curves.
//!
//! Reports are deterministic: sequences and windows are evaluated in a
//! worker pool but gathered in a fixed order, every map is sorted, and all
//! numbers derive from the same accumulators regardless of `--jobs`. Two
//! runs over the same inputs produce byte-identical output.
//!
//! Metric values are rounded to six decimal digits for display; each one is
//! accompanied by its exact numerator/denominator pair so that downstream
//! tools can re-aggregate without loss.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::analysis;
use crate::decompose::{self, DecompositionReport, OverallDecomposition};
use crate::ingest::{self, IngestConfig, ScoreThreshold};
use crate::local::{self, Horizon, MetricKind, Reach};
use crate::metrics::{self, StrictMetrics};
use crate::model::{MetricAccumulator, Sequence};
use crate::overlap::{build_overlap_series, OverlapSeries};
use crate::synth;

#[derive(Debug, Parser)]
#[command(
    name = "moteval",
    version,
    about = "Multi-object tracking evaluation with temporally local metrics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one tracker against ground truth.
    Eval(EvalArgs),
    /// Evaluate several trackers and rank them.
    Compare(CompareArgs),
    /// Write the synthetic fixture catalog as MOT files.
    Synth(SynthArgs),
    /// Emit horizon-curve data for plotting.
    Curve(CurveArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Flags shared by every evaluating subcommand.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Ground-truth file, `name=path` or a bare path (repeatable).
    #[arg(long = "gt", required = true)]
    pub gt: Vec<String>,
    /// Horizons to evaluate: `<int>f` frames, `<real>s` seconds, `strict`.
    #[arg(long, value_delimiter = ',')]
    pub horizons: Option<Vec<String>>,
    /// Frame rate override; beats any seqinfo.ini value.
    #[arg(long)]
    pub fps: Option<f64>,
    /// IOU at or above which boxes overlap.
    #[arg(long = "iou-thresh", default_value_t = 0.5)]
    pub iou_thresh: f64,
    /// Ground-truth classes to keep.
    #[arg(long, value_delimiter = ',', default_values_t = [1i64])]
    pub classes: Vec<i64>,
    /// Prediction score threshold: a number, or `auto` to maximise DetF1.
    #[arg(long = "score-thresh")]
    pub score_thresh: Option<String>,
    /// Minimum ground-truth visibility kept.
    #[arg(long = "min-visibility", default_value_t = 0.0)]
    pub min_visibility: f64,
    /// seqinfo.ini file, `name=path` or a bare path (repeatable).
    #[arg(long)]
    pub seqinfo: Vec<String>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Report file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; 0 picks the machine default.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Prediction file, `name=path` or a bare path (repeatable; names must
    /// match the ground-truth names).
    #[arg(long = "pred", required = true)]
    pub pred: Vec<String>,
    /// Tracker name recorded in the report.
    #[arg(long, default_value = "tracker")]
    pub tracker: String,
    /// Include the error decomposition.
    #[arg(long)]
    pub decompose: bool,
    /// Include per-sequence detail in the report.
    #[arg(long = "per-sequence")]
    pub per_sequence: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Prediction file per tracker: `tracker=path`, or
    /// `tracker:sequence=path` with several ground-truth sequences.
    #[arg(long = "pred", required = true)]
    pub pred: Vec<String>,
    /// Metric the ranking is ordered by.
    #[arg(long = "sort-key", default_value = "mean_alta")]
    pub sort_key: String,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Directory the fixtures are written into.
    #[arg(long, default_value = "fixtures")]
    pub out: PathBuf,
    /// Seed for the randomised fixtures.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Prediction file, `name=path` or a bare path (repeatable).
    #[arg(long = "pred", required = true)]
    pub pred: Vec<String>,
    /// Also sample every frame radius `0..=N` (added to --horizons).
    #[arg(long = "dense-to")]
    pub dense_to: Option<u32>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn usage(message: impl Into<String>) -> CliError {
    CliError::Usage(message.into())
}

/// Entry point: runs a parsed command line, writes the report, returns the
/// process exit code (0 clean, 1 any sequence failed, 2 usage error).
pub fn run(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::Eval(args) => run_eval(args),
        Command::Compare(args) => run_compare(args),
        Command::Synth(args) => run_synth(args),
        Command::Curve(args) => run_curve(args),
    };
    match outcome {
        Ok(clean) => {
            if clean {
                0
            } else {
                1
            }
        }
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            2
        }
        Err(error) => {
            eprintln!("error: {error}");
            1
        }
    }
}

// ---------------------------------------------------------------------------
// Argument resolution

/// Splits `name=path` into its parts; a bare path gets its file stem as the
/// name.
fn parse_named(raw: &str) -> (String, PathBuf) {
    match raw.split_once('=') {
        Some((name, path)) => (name.to_string(), PathBuf::from(path)),
        None => {
            let path = PathBuf::from(raw);
            let name = path
                .file_stem()
                .map(|stem| stem.to_string_lossy().into_owned())
                .unwrap_or_else(|| raw.to_string());
            (name, path)
        }
    }
}

fn parse_named_list(raw: &[String], what: &str) -> Result<Vec<(String, PathBuf)>, CliError> {
    let entries: Vec<(String, PathBuf)> = raw.iter().map(|r| parse_named(r)).collect();
    for (index, (name, _)) in entries.iter().enumerate() {
        if entries[..index].iter().any(|(other, _)| other == name) {
            return Err(usage(format!("duplicate {what} name {name:?}")));
        }
    }
    Ok(entries)
}

fn parse_horizons(args: &CommonArgs) -> Result<Vec<Horizon>, CliError> {
    match &args.horizons {
        None => Ok(Horizon::default_set()),
        Some(specs) => {
            if specs.is_empty() {
                return Err(usage("at least one horizon is required"));
            }
            specs
                .iter()
                .map(|spec| Horizon::parse(spec).map_err(|e| usage(e.to_string())))
                .collect()
        }
    }
}

fn parse_score_threshold(raw: &Option<String>) -> Result<ScoreThreshold, CliError> {
    match raw.as_deref() {
        None => Ok(ScoreThreshold::KeepAll),
        Some("auto") => Ok(ScoreThreshold::Auto),
        Some(text) => text
            .parse::<f64>()
            .map(ScoreThreshold::Fixed)
            .map_err(|_| usage(format!("--score-thresh expects a number or `auto`, got {text:?}"))),
    }
}

fn ingest_config(args: &CommonArgs) -> Result<IngestConfig, CliError> {
    if !(args.iou_thresh > 0.0 && args.iou_thresh <= 1.0) {
        return Err(usage(format!("--iou-thresh must lie in (0, 1], got {}", args.iou_thresh)));
    }
    Ok(IngestConfig {
        iou_threshold: args.iou_thresh,
        gt_classes: args.classes.iter().copied().collect(),
        min_visibility: args.min_visibility,
        score_threshold: parse_score_threshold(&args.score_thresh)?,
        fps_override: args.fps,
        seq_length_override: None, // filled per sequence from seqinfo
    })
}

/// One (sequence, prediction file) evaluation job.
#[derive(Debug)]
struct SeqJob {
    name: String,
    gt_path: PathBuf,
    pred_path: PathBuf,
    seqinfo_path: Option<PathBuf>,
}

fn pair_sequences(
    gt: &[String],
    pred: &[String],
    seqinfo: &[String],
) -> Result<Vec<SeqJob>, CliError> {
    // The common single-pair case: two bare paths belong together even when
    // their file stems differ. Explicit `name=` labels must still agree.
    let bare_pair = gt.len() == 1 && pred.len() == 1 && !gt[0].contains('=') && !pred[0].contains('=');
    let gt = parse_named_list(gt, "--gt")?;
    let mut pred = parse_named_list(pred, "--pred")?;
    let seqinfo = parse_named_list(seqinfo, "--seqinfo")?;
    if bare_pair {
        pred[0].0 = gt[0].0.clone();
    }
    let mut jobs = Vec::new();
    for (name, gt_path) in &gt {
        let Some((_, pred_path)) = pred.iter().find(|(p, _)| p == name) else {
            return Err(usage(format!("no --pred given for sequence {name:?}")));
        };
        let seqinfo_path = if seqinfo.len() == 1 && gt.len() == 1 {
            Some(seqinfo[0].1.clone())
        } else {
            seqinfo.iter().find(|(s, _)| s == name).map(|(_, p)| p.clone())
        };
        jobs.push(SeqJob {
            name: name.clone(),
            gt_path: gt_path.clone(),
            pred_path: pred_path.clone(),
            seqinfo_path,
        });
    }
    for (name, _) in &pred {
        if !gt.iter().any(|(g, _)| g == name) {
            return Err(usage(format!("--pred {name:?} has no matching --gt sequence")));
        }
    }
    Ok(jobs)
}

fn thread_pool(jobs: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("worker pool construction cannot fail with these settings")
}

// ---------------------------------------------------------------------------
// Sequence evaluation

/// Everything measured for one sequence.
struct SeqEval {
    name: String,
    num_frames: u32,
    fps: f64,
    strict: StrictMetrics,
    lidf1: Vec<(Horizon, Reach, MetricAccumulator)>,
    alta: Vec<(Horizon, Reach, MetricAccumulator)>,
    decomposition: Option<SeqDecomposition>,
    gt_ids: Vec<i64>,
    pred_ids: Vec<i64>,
}

struct SeqDecomposition {
    strict: DecompositionReport,
    per_horizon: Vec<(Horizon, DecompositionReport)>,
}

fn evaluate_sequence(
    job: &SeqJob,
    cfg: &IngestConfig,
    horizons: &[Horizon],
    decompose_flag: bool,
) -> Result<SeqEval, String> {
    let gt_entries = ingest::parse_mot_path(&job.gt_path)
        .map_err(|e| format!("reading {}: {e}", job.gt_path.display()))?;
    let pred_entries = ingest::parse_mot_path(&job.pred_path)
        .map_err(|e| format!("reading {}: {e}", job.pred_path.display()))?;
    let mut cfg = cfg.clone();
    let mut fps = 30.0;
    if let Some(info_path) = &job.seqinfo_path {
        let text = std::fs::read_to_string(info_path)
            .map_err(|e| format!("reading {}: {e}", info_path.display()))?;
        let info = ingest::parse_seqinfo(&text)
            .map_err(|e| format!("parsing {}: {e}", info_path.display()))?;
        if let Some(rate) = info.frame_rate {
            fps = rate;
        }
        cfg.seq_length_override = info.seq_length;
    }
    let sequence = ingest::build_sequence(&job.name, &gt_entries, &pred_entries, &cfg, fps);
    Ok(evaluate_built_sequence(&sequence, cfg.iou_threshold, horizons, decompose_flag))
}

fn evaluate_built_sequence(
    sequence: &Sequence,
    iou_threshold: f64,
    horizons: &[Horizon],
    decompose_flag: bool,
) -> SeqEval {
    let series = build_overlap_series(sequence, iou_threshold);
    let strict = metrics::strict_metrics(&series);
    let curve_points = |kind: MetricKind, series: &OverlapSeries| {
        local::horizon_curve(series, kind, horizons)
            .points
            .into_iter()
            .map(|p| (p.horizon, p.reach, p.acc))
            .collect::<Vec<_>>()
    };
    let decomposition = decompose_flag.then(|| {
        let corr = decompose::frame_correspondence(&series);
        SeqDecomposition {
            strict: decompose::decompose(&series, &corr),
            per_horizon: horizons
                .iter()
                .map(|&h| (h, decompose::decompose_at_horizon(&series, &corr, h)))
                .collect(),
        }
    });
    SeqEval {
        name: sequence.name().to_string(),
        num_frames: sequence.num_frames(),
        fps: sequence.fps(),
        strict,
        lidf1: curve_points(MetricKind::Lidf1, &series),
        alta: curve_points(MetricKind::Alta, &series),
        decomposition,
        gt_ids: sequence.gt().iter().map(|t| t.external_id()).collect(),
        pred_ids: sequence.pred().iter().map(|t| t.external_id()).collect(),
    }
}

/// Accumulators for everything that combines across sequences.
struct Combined {
    det: MetricAccumulator,
    id: MetricAccumulator,
    idr: MetricAccumulator,
    idp: MetricAccumulator,
    track: MetricAccumulator,
    atr: MetricAccumulator,
    atp: MetricAccumulator,
    mota_errors: MetricAccumulator,
    det_tp: u64,
    det_fn: u64,
    det_fp: u64,
    id_switches: u64,
    lidf1: Vec<(Horizon, MetricAccumulator)>,
    alta: Vec<(Horizon, MetricAccumulator)>,
    decomposition: Option<(OverallDecomposition, MetricAccumulator, MetricAccumulator, MetricAccumulator)>,
}

fn combine_sequences(evals: &[SeqEval], horizons: &[Horizon]) -> Combined {
    let mut combined = Combined {
        det: MetricAccumulator::ZERO,
        id: MetricAccumulator::ZERO,
        idr: MetricAccumulator::ZERO,
        idp: MetricAccumulator::ZERO,
        track: MetricAccumulator::ZERO,
        atr: MetricAccumulator::ZERO,
        atp: MetricAccumulator::ZERO,
        mota_errors: MetricAccumulator::ZERO,
        det_tp: 0,
        det_fn: 0,
        det_fp: 0,
        id_switches: 0,
        lidf1: horizons.iter().map(|&h| (h, MetricAccumulator::ZERO)).collect(),
        alta: horizons.iter().map(|&h| (h, MetricAccumulator::ZERO)).collect(),
        decomposition: None,
    };
    for eval in evals {
        combined.det = combined.det.merge(eval.strict.det.acc);
        combined.id = combined.id.merge(eval.strict.id.acc);
        combined.idr = combined.idr.merge(eval.strict.id.recall_acc);
        combined.idp = combined.idp.merge(eval.strict.id.precision_acc);
        combined.track = combined.track.merge(eval.strict.track.acc);
        combined.atr = combined.atr.merge(eval.strict.track.recall_acc);
        combined.atp = combined.atp.merge(eval.strict.track.precision_acc);
        combined.mota_errors = combined.mota_errors.merge(eval.strict.mota.error_acc);
        combined.det_tp += eval.strict.det.det_tp;
        combined.det_fn += eval.strict.mota.det_fn;
        combined.det_fp += eval.strict.mota.det_fp;
        combined.id_switches += eval.strict.mota.id_switches;
        for (slot, point) in combined.lidf1.iter_mut().zip(&eval.lidf1) {
            debug_assert_eq!(slot.0, point.0);
            slot.1 = slot.1.merge(point.2);
        }
        for (slot, point) in combined.alta.iter_mut().zip(&eval.alta) {
            debug_assert_eq!(slot.0, point.0);
            slot.1 = slot.1.merge(point.2);
        }
        if let Some(dec) = &eval.decomposition {
            let entry = combined.decomposition.get_or_insert((
                OverallDecomposition {
                    det_fn: 0.0,
                    det_fp: 0.0,
                    split: 0.0,
                    merge: 0.0,
                    denominator: 0.0,
                },
                MetricAccumulator::ZERO,
                MetricAccumulator::ZERO,
                MetricAccumulator::ZERO,
            ));
            entry.0 = entry.0.merge_with(&dec.strict.overall);
            entry.1 = entry.1.merge(dec.strict.ata_acc);
            entry.2 = entry.2.merge(dec.strict.atr_acc);
            entry.3 = entry.3.merge(dec.strict.atp_acc);
        }
    }
    combined
}

/// Combined MOTA honouring the empty edge cases: no gt boxes and no errors
/// is a perfect 1.0; errors against an empty gt have no finite score.
fn combined_mota(errors: MetricAccumulator) -> f64 {
    if errors.denominator > 0.0 {
        1.0 - errors.value()
    } else if errors.numerator == 0.0 {
        1.0
    } else {
        f64::NEG_INFINITY
    }
}

// ---------------------------------------------------------------------------
// JSON rendering

fn round6(value: f64) -> Value {
    if !value.is_finite() {
        return Value::Null;
    }
    let rounded = (value * 1e6).round() / 1e6;
    serde_json::Number::from_f64(rounded).map(Value::Number).unwrap_or(Value::Null)
}

fn finite(value: f64) -> Value {
    serde_json::Number::from_f64(value).map(Value::Number).unwrap_or(Value::Null)
}

fn acc_json(acc: MetricAccumulator) -> Value {
    json!({
        "value": round6(acc.value()),
        "num": finite(acc.numerator),
        "den": finite(acc.denominator),
    })
}

fn metrics_json(
    strict: &StrictMetrics,
    lidf1: &[(Horizon, MetricAccumulator)],
    alta: &[(Horizon, MetricAccumulator)],
) -> Value {
    let mean_lidf1 =
        local::mean_over_horizons(&lidf1.iter().map(|(_, acc)| acc.value()).collect::<Vec<_>>());
    let mean_alta =
        local::mean_over_horizons(&alta.iter().map(|(_, acc)| acc.value()).collect::<Vec<_>>());
    let nidsw =
        analysis::normalized_id_switches(strict.mota.id_switches, strict.det.det_tp);
    json!({
        "det_f1": acc_json(strict.det.acc),
        "det_tp": strict.det.det_tp,
        "det_fn": strict.det.det_fn,
        "det_fp": strict.det.det_fp,
        "idf1": acc_json(strict.id.acc),
        "idr": acc_json(strict.id.recall_acc),
        "idp": acc_json(strict.id.precision_acc),
        "idtp": finite(strict.id.idtp),
        "ata": acc_json(strict.track.acc),
        "atr": acc_json(strict.track.recall_acc),
        "atp": acc_json(strict.track.precision_acc),
        "track_tp": finite(strict.track.track_tp),
        "mota": {
            "value": round6(strict.mota.mota),
            "num": finite(strict.mota.error_acc.numerator),
            "den": finite(strict.mota.error_acc.denominator),
            "fn": strict.mota.det_fn,
            "fp": strict.mota.det_fp,
            "id_switches": strict.mota.id_switches,
        },
        "nidsw": round6(nidsw),
        "mean_lidf1": round6(mean_lidf1),
        "mean_alta": round6(mean_alta),
    })
}

fn combined_metrics_json(combined: &Combined) -> Value {
    let mean_lidf1 = local::mean_over_horizons(
        &combined.lidf1.iter().map(|(_, acc)| acc.value()).collect::<Vec<_>>(),
    );
    let mean_alta = local::mean_over_horizons(
        &combined.alta.iter().map(|(_, acc)| acc.value()).collect::<Vec<_>>(),
    );
    let nidsw = analysis::normalized_id_switches(combined.id_switches, combined.det_tp);
    json!({
        "det_f1": acc_json(combined.det),
        "det_tp": combined.det_tp,
        "det_fn": combined.det_fn,
        "det_fp": combined.det_fp,
        "idf1": acc_json(combined.id),
        "idr": acc_json(combined.idr),
        "idp": acc_json(combined.idp),
        "ata": acc_json(combined.track),
        "atr": acc_json(combined.atr),
        "atp": acc_json(combined.atp),
        "mota": {
            "value": round6(combined_mota(combined.mota_errors)),
            "num": finite(combined.mota_errors.numerator),
            "den": finite(combined.mota_errors.denominator),
            "fn": combined.det_fn,
            "fp": combined.det_fp,
            "id_switches": combined.id_switches,
        },
        "nidsw": round6(nidsw),
        "mean_lidf1": round6(mean_lidf1),
        "mean_alta": round6(mean_alta),
    })
}

fn curve_json(points: &[(Horizon, Reach, MetricAccumulator)]) -> Value {
    Value::Array(
        points
            .iter()
            .map(|(horizon, reach, acc)| {
                json!({
                    "horizon": horizon.label(),
                    "frames": match reach {
                        Reach::Frames(r) => Value::from(*r),
                        Reach::Strict => Value::Null,
                    },
                    "value": round6(acc.value()),
                    "num": finite(acc.numerator),
                    "den": finite(acc.denominator),
                })
            })
            .collect(),
    )
}

fn combined_curve_json(points: &[(Horizon, MetricAccumulator)]) -> Value {
    Value::Array(
        points
            .iter()
            .map(|(horizon, acc)| {
                json!({
                    "horizon": horizon.label(),
                    "value": round6(acc.value()),
                    "num": finite(acc.numerator),
                    "den": finite(acc.denominator),
                })
            })
            .collect(),
    )
}

fn overall_json(overall: &OverallDecomposition) -> Value {
    let raw = overall.raw_fractions();
    let normalized = overall.normalized_fractions();
    let fraction =
        |slot: usize| normalized.map_or(Value::Null, |fractions| round6(fractions[slot]));
    json!({
        "denominator": finite(overall.denominator),
        "det_fn": {"mass": finite(overall.det_fn), "raw": round6(raw[0]), "normalized": fraction(0)},
        "det_fp": {"mass": finite(overall.det_fp), "raw": round6(raw[1]), "normalized": fraction(1)},
        "split": {"mass": finite(overall.split), "raw": round6(raw[2]), "normalized": fraction(2)},
        "merge": {"mass": finite(overall.merge), "raw": round6(raw[3]), "normalized": fraction(3)},
        "no_error": overall.no_error(),
    })
}

fn decomposition_json(dec: &SeqDecomposition, gt_ids: &[i64], pred_ids: &[i64]) -> Value {
    let recall = Value::Array(
        dec.strict
            .recall
            .iter()
            .enumerate()
            .map(|(index, masses)| {
                json!({
                    "track": gt_ids[index],
                    "partner": masses.partner.map(|j| pred_ids[j as usize]),
                    "coverage": round6(masses.coverage),
                    "det_fn": round6(masses.det_fn),
                    "split": round6(masses.split),
                    "merge": round6(masses.merge),
                    "union_fp": round6(masses.union_fp),
                    "union_merge": round6(masses.union_merge),
                })
            })
            .collect(),
    );
    let precision = Value::Array(
        dec.strict
            .precision
            .iter()
            .enumerate()
            .map(|(index, masses)| {
                json!({
                    "track": pred_ids[index],
                    "partner": masses.partner.map(|i| gt_ids[i as usize]),
                    "coverage": round6(masses.coverage),
                    "det_fp": round6(masses.det_fp),
                    "merge": round6(masses.merge),
                    "split": round6(masses.split),
                    "union_fn": round6(masses.union_fn),
                    "union_split": round6(masses.union_split),
                })
            })
            .collect(),
    );
    let per_horizon = Value::Array(
        dec.per_horizon
            .iter()
            .map(|(horizon, report)| {
                json!({
                    "horizon": horizon.label(),
                    "approx_ata": acc_json(report.ata_acc),
                    "overall": overall_json(&report.overall),
                })
            })
            .collect(),
    );
    json!({
        "approx_ata": acc_json(dec.strict.ata_acc),
        "approx_atr": acc_json(dec.strict.atr_acc),
        "approx_atp": acc_json(dec.strict.atp_acc),
        "overall": overall_json(&dec.strict.overall),
        "recall": recall,
        "precision": precision,
        "horizons": per_horizon,
    })
}

fn config_json(args: &CommonArgs, horizons: &[Horizon], extra: &[(&str, Value)]) -> Value {
    let mut map = Map::new();
    map.insert("iou_threshold".into(), finite(args.iou_thresh));
    map.insert("classes".into(), json!(args.classes));
    map.insert(
        "score_threshold".into(),
        match args.score_thresh.as_deref() {
            None => Value::String("keep-all".into()),
            Some(text) => Value::String(text.into()),
        },
    );
    map.insert("min_visibility".into(), finite(args.min_visibility));
    map.insert("fps".into(), args.fps.map_or(Value::Null, finite));
    map.insert(
        "horizons".into(),
        Value::Array(horizons.iter().map(|h| Value::String(h.label())).collect()),
    );
    map.insert(
        "format".into(),
        Value::String(match args.format {
            Format::Json => "json".into(),
            Format::Csv => "csv".into(),
        }),
    );
    // `--jobs` deliberately stays out of the echo: it changes how work is
    // scheduled, not what is computed, and reports must be byte-identical
    // across worker counts.
    for (key, value) in extra {
        map.insert((*key).into(), value.clone());
    }
    Value::Object(map)
}

fn metadata_json(evals: &[SeqEval], horizons: &[Horizon]) -> Value {
    let resolution = Value::Array(
        evals
            .iter()
            .flat_map(|eval| {
                horizons.iter().map(move |h| {
                    json!({
                        "sequence": eval.name,
                        "horizon": h.label(),
                        "frames": match h.resolve(eval.fps) {
                            Reach::Frames(r) => Value::from(r),
                            Reach::Strict => Value::Null,
                        },
                    })
                })
            })
            .collect(),
    );
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "horizon_resolution": resolution,
    })
}

fn sequence_json(eval: &SeqEval) -> Value {
    json!({
        "name": eval.name,
        "num_frames": eval.num_frames,
        "fps": finite(eval.fps),
        "metrics": metrics_json(&eval.strict, &strip_reach(&eval.lidf1), &strip_reach(&eval.alta)),
        "curves": {
            "lidf1": curve_json(&eval.lidf1),
            "alta": curve_json(&eval.alta),
        },
        "decomposition": eval
            .decomposition
            .as_ref()
            .map_or(Value::Null, |d| decomposition_json(d, &eval.gt_ids, &eval.pred_ids)),
    })
}

fn strip_reach(points: &[(Horizon, Reach, MetricAccumulator)]) -> Vec<(Horizon, MetricAccumulator)> {
    points.iter().map(|&(h, _, acc)| (h, acc)).collect()
}

// ---------------------------------------------------------------------------
// CSV rendering

/// Flat CSV mirror of the JSON report:
/// `section,sequence,item,horizon,value,num,den`. Numbers are formatted
/// from the same rounded values as the JSON, so the two encodings agree.
fn report_csv(evals: &[SeqEval], combined: &Combined, per_sequence: bool) -> String {
    let mut out = String::from("section,sequence,item,horizon,value,num,den\n");
    let fmt = |value: Value| -> String {
        match value {
            Value::Number(n) => n.to_string(),
            Value::Null => String::new(),
            other => other.to_string(),
        }
    };
    let metric_rows = |seq: &str, metrics: &Value, out: &mut String| {
        let object = metrics.as_object().expect("metrics are an object");
        for (name, value) in object {
            match value {
                Value::Object(acc) => {
                    let _ = writeln!(
                        out,
                        "metric,{seq},{name},,{},{},{}",
                        fmt(acc.get("value").cloned().unwrap_or(Value::Null)),
                        fmt(acc.get("num").cloned().unwrap_or(Value::Null)),
                        fmt(acc.get("den").cloned().unwrap_or(Value::Null)),
                    );
                }
                other => {
                    let _ = writeln!(out, "metric,{seq},{name},,{},,", fmt(other.clone()));
                }
            }
        }
    };
    let curve_rows = |seq: &str, kind: &str, points: &[(Horizon, MetricAccumulator)], out: &mut String| {
        for (horizon, acc) in points {
            let _ = writeln!(
                out,
                "curve,{seq},{kind},{},{},{},{}",
                horizon.label(),
                fmt(round6(acc.value())),
                fmt(finite(acc.numerator)),
                fmt(finite(acc.denominator)),
            );
        }
    };
    metric_rows(
        "combined",
        &combined_metrics_json(combined),
        &mut out,
    );
    curve_rows("combined", "lidf1", &combined.lidf1, &mut out);
    curve_rows("combined", "alta", &combined.alta, &mut out);
    if let Some((overall, ata, _, _)) = &combined.decomposition {
        decomposition_rows("combined", overall, *ata, &mut out);
    }
    if per_sequence {
        for eval in evals {
            metric_rows(
                &eval.name,
                &metrics_json(&eval.strict, &strip_reach(&eval.lidf1), &strip_reach(&eval.alta)),
                &mut out,
            );
            curve_rows(&eval.name, "lidf1", &strip_reach(&eval.lidf1), &mut out);
            curve_rows(&eval.name, "alta", &strip_reach(&eval.alta), &mut out);
            if let Some(dec) = &eval.decomposition {
                decomposition_rows(&eval.name, &dec.strict.overall, dec.strict.ata_acc, &mut out);
            }
        }
    }
    out
}

fn decomposition_rows(seq: &str, overall: &OverallDecomposition, ata: MetricAccumulator, out: &mut String) {
    let fmt = |value: Value| -> String {
        match value {
            Value::Number(n) => n.to_string(),
            _ => String::new(),
        }
    };
    let raw = overall.raw_fractions();
    let normalized = overall.normalized_fractions();
    let masses = [
        ("det_fn", overall.det_fn, 0),
        ("det_fp", overall.det_fp, 1),
        ("split", overall.split, 2),
        ("merge", overall.merge, 3),
    ];
    for (name, mass, slot) in masses {
        let _ = writeln!(
            out,
            "decomposition,{seq},{name},,{},{},{}",
            fmt(round6(raw[slot])),
            fmt(finite(mass)),
            fmt(finite(overall.denominator)),
        );
        let _ = writeln!(
            out,
            "decomposition,{seq},{name}_normalized,,{},,",
            normalized.map_or(String::new(), |f| fmt(round6(f[slot]))),
        );
    }
    let _ = writeln!(
        out,
        "decomposition,{seq},approx_ata,,{},{},{}",
        fmt(round6(ata.value())),
        fmt(finite(ata.numerator)),
        fmt(finite(ata.denominator)),
    );
}

// ---------------------------------------------------------------------------
// Subcommand drivers

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, text)?;
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn evaluate_jobs(
    jobs: &[SeqJob],
    cfg: &IngestConfig,
    horizons: &[Horizon],
    decompose_flag: bool,
    workers: usize,
) -> (Vec<SeqEval>, Vec<(String, String)>) {
    use rayon::prelude::*;
    let pool = thread_pool(workers);
    let results: Vec<Result<SeqEval, (String, String)>> = pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                evaluate_sequence(job, cfg, horizons, decompose_flag)
                    .map_err(|message| (job.name.clone(), message))
            })
            .collect()
    });
    let mut evals = Vec::new();
    let mut errors = Vec::new();
    for result in results {
        match result {
            Ok(eval) => evals.push(eval),
            Err(pair) => errors.push(pair),
        }
    }
    (evals, errors)
}

fn errors_json(errors: &[(String, String)]) -> Value {
    Value::Array(
        errors
            .iter()
            .map(|(sequence, message)| json!({"sequence": sequence, "message": message}))
            .collect(),
    )
}

fn run_eval(args: EvalArgs) -> Result<bool, CliError> {
    let horizons = parse_horizons(&args.common)?;
    let cfg = ingest_config(&args.common)?;
    let jobs = pair_sequences(&args.common.gt, &args.pred, &args.common.seqinfo)?;
    let (evals, errors) =
        evaluate_jobs(&jobs, &cfg, &horizons, args.decompose, args.common.jobs);
    let combined = combine_sequences(&evals, &horizons);
    let text = match args.common.format {
        Format::Json => {
            let report = json!({
                "config": config_json(
                    &args.common,
                    &horizons,
                    &[
                        ("tracker", Value::String(args.tracker.clone())),
                        ("decompose", Value::Bool(args.decompose)),
                        ("per_sequence", Value::Bool(args.per_sequence)),
                    ],
                ),
                "per_sequence": if args.per_sequence {
                    Value::Array(evals.iter().map(sequence_json).collect())
                } else {
                    Value::Array(Vec::new())
                },
                "combined": {
                    "metrics": combined_metrics_json(&combined),
                    "curves": {
                        "lidf1": combined_curve_json(&combined.lidf1),
                        "alta": combined_curve_json(&combined.alta),
                    },
                    "decomposition": combined.decomposition.as_ref().map_or(Value::Null, |(overall, ata, atr, atp)| {
                        json!({
                            "overall": overall_json(overall),
                            "approx_ata": acc_json(*ata),
                            "approx_atr": acc_json(*atr),
                            "approx_atp": acc_json(*atp),
                        })
                    }),
                },
                "errors": errors_json(&errors),
                "metadata": metadata_json(&evals, &horizons),
            });
            let mut text = serde_json::to_string_pretty(&report).expect("report serialises");
            text.push('\n');
            text
        }
        Format::Csv => report_csv(&evals, &combined, args.per_sequence),
    };
    emit(&args.common.out, &text)?;
    Ok(errors.is_empty())
}

fn run_compare(args: CompareArgs) -> Result<bool, CliError> {
    let horizons = parse_horizons(&args.common)?;
    let cfg = ingest_config(&args.common)?;
    let gt = parse_named_list(&args.common.gt, "--gt")?;
    // `tracker=path` (single sequence) or `tracker:sequence=path`.
    let mut per_tracker: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for raw in &args.pred {
        let Some((label, path)) = raw.split_once('=') else {
            return Err(usage(format!("--pred {raw:?}: expected tracker=path")));
        };
        let (tracker, sequence) = match label.split_once(':') {
            Some((tracker, sequence)) => (tracker.to_string(), sequence.to_string()),
            None => {
                if gt.len() != 1 {
                    return Err(usage(format!(
                        "--pred {raw:?}: with several --gt sequences use tracker:sequence=path"
                    )));
                }
                (label.to_string(), gt[0].0.clone())
            }
        };
        per_tracker.entry(tracker).or_default().push(format!("{sequence}={path}"));
    }

    let mut trackers_json = Map::new();
    let mut scores: analysis::TrackerScores = BTreeMap::new();
    let mut any_errors = false;
    let mut all_errors: Vec<(String, String)> = Vec::new();
    let mut evals_for_metadata: Vec<SeqEval> = Vec::new();
    for (tracker, preds) in &per_tracker {
        let jobs = pair_sequences(&args.common.gt, preds, &args.common.seqinfo)?;
        let (evals, errors) = evaluate_jobs(&jobs, &cfg, &horizons, false, args.common.jobs);
        any_errors |= !errors.is_empty();
        all_errors
            .extend(errors.into_iter().map(|(seq, msg)| (format!("{tracker}/{seq}"), msg)));
        let combined = combine_sequences(&evals, &horizons);
        let mean_lidf1 = local::mean_over_horizons(
            &combined.lidf1.iter().map(|(_, acc)| acc.value()).collect::<Vec<_>>(),
        );
        let mean_alta = local::mean_over_horizons(
            &combined.alta.iter().map(|(_, acc)| acc.value()).collect::<Vec<_>>(),
        );
        let mota = combined_mota(combined.mota_errors);
        let nidsw = analysis::normalized_id_switches(combined.id_switches, combined.det_tp);
        let mut tracker_scores: BTreeMap<String, f64> = BTreeMap::new();
        tracker_scores.insert("det_f1".into(), combined.det.value());
        tracker_scores.insert("idf1".into(), combined.id.value());
        tracker_scores.insert("ata".into(), combined.track.value());
        tracker_scores.insert("mean_lidf1".into(), mean_lidf1);
        tracker_scores.insert("mean_alta".into(), mean_alta);
        tracker_scores.insert("mota".into(), mota);
        tracker_scores.insert("nidsw".into(), nidsw);
        scores.insert(tracker.clone(), tracker_scores);
        trackers_json.insert(tracker.clone(), combined_metrics_json(&combined));
        if evals_for_metadata.is_empty() {
            evals_for_metadata = evals;
        }
    }

    if !scores.values().any(|m| m.contains_key(args.sort_key.as_str())) {
        return Err(usage(format!("--sort-key {:?} is not a reported metric", args.sort_key)));
    }
    let table = analysis::rank_table_directed(&scores, &args.sort_key, &["nidsw"]);
    let table_json = json!({
        "metrics": table.metrics,
        "ascending": table.ascending,
        "sort_key": args.sort_key,
        "rows": Value::Array(
            table
                .rows
                .iter()
                .map(|row| {
                    let mut cells = Map::new();
                    for (metric, cell) in table.metrics.iter().zip(&row.cells) {
                        cells.insert(
                            metric.clone(),
                            cell.map_or(Value::Null, |(value, rank)| {
                                json!({"value": round6(value), "rank": rank})
                            }),
                        );
                    }
                    json!({"tracker": row.tracker, "metrics": Value::Object(cells)})
                })
                .collect(),
        ),
    });

    // Kendall correlation between metrics across trackers (needs at least
    // two trackers; with fewer the matrix is omitted).
    let metric_names: Vec<String> = table.metrics.clone();
    let kendall = if scores.len() >= 2 {
        let vectors: Vec<Vec<f64>> = metric_names
            .iter()
            .map(|metric| {
                scores
                    .values()
                    .map(|m| m.get(metric).copied().unwrap_or(f64::NEG_INFINITY))
                    .collect()
            })
            .collect();
        let matrix: Vec<Value> = vectors
            .iter()
            .map(|a| {
                Value::Array(
                    vectors.iter().map(|b| round6(analysis::kendall_tau(a, b))).collect(),
                )
            })
            .collect();
        json!({"metrics": metric_names, "matrix": Value::Array(matrix)})
    } else {
        Value::Null
    };

    let text = match args.common.format {
        Format::Json => {
            let report = json!({
                "config": config_json(&args.common, &horizons, &[("sort_key", Value::String(args.sort_key.clone()))]),
                "trackers": Value::Object(trackers_json),
                "rank_table": table_json,
                "kendall": kendall,
                "errors": errors_json(&all_errors),
                "metadata": metadata_json(&evals_for_metadata, &horizons),
            });
            let mut text = serde_json::to_string_pretty(&report).expect("report serialises");
            text.push('\n');
            text
        }
        Format::Csv => {
            let mut out = String::from("section,tracker,item,horizon,value,rank\n");
            for row in &table.rows {
                for (metric, cell) in table.metrics.iter().zip(&row.cells) {
                    if let Some((value, rank)) = cell {
                        let shown = match round6(*value) {
                            Value::Number(n) => n.to_string(),
                            _ => String::new(),
                        };
                        let _ = writeln!(out, "rank,{},{metric},,{shown},{rank}", row.tracker);
                    }
                }
            }
            out
        }
    };
    emit(&args.common.out, &text)?;
    Ok(!any_errors)
}

fn run_synth(args: SynthArgs) -> Result<bool, CliError> {
    let catalog = match args.seed {
        Some(seed) => synth::fixture_catalog_with_seed(seed),
        None => synth::fixture_catalog(),
    };
    let mut manifest = Vec::new();
    for fixture in &catalog {
        let dir = args.out.join(fixture.name);
        std::fs::create_dir_all(&dir)?;
        std::fs::write(dir.join("gt.txt"), ingest::write_mot(fixture.sequence.gt()))?;
        std::fs::write(dir.join("pred.txt"), ingest::write_mot(fixture.sequence.pred()))?;
        std::fs::write(
            dir.join("seqinfo.ini"),
            format!(
                "[Sequence]\nname={}\nframeRate={}\nseqLength={}\n",
                fixture.name,
                fixture.sequence.fps(),
                fixture.sequence.num_frames(),
            ),
        )?;
        let expected: Map<String, Value> =
            fixture.expected.iter().map(|(k, v)| (k.to_string(), finite(*v))).collect();
        manifest.push(json!({
            "name": fixture.name,
            "gt": format!("{}/gt.txt", fixture.name),
            "pred": format!("{}/pred.txt", fixture.name),
            "seqinfo": format!("{}/seqinfo.ini", fixture.name),
            "num_frames": fixture.sequence.num_frames(),
            "fps": finite(fixture.sequence.fps()),
            "expected": Value::Object(expected),
        }));
    }
    let mut text = serde_json::to_string_pretty(&json!({"fixtures": manifest}))
        .expect("manifest serialises");
    text.push('\n');
    std::fs::write(args.out.join("catalog.json"), text)?;
    Ok(true)
}

fn run_curve(args: CurveArgs) -> Result<bool, CliError> {
    let mut horizons = parse_horizons(&args.common)?;
    if let Some(limit) = args.dense_to {
        let dense: Vec<Horizon> = (0..=limit).map(Horizon::Frames).collect();
        for horizon in dense {
            if !horizons.contains(&horizon) {
                horizons.push(horizon);
            }
        }
    }
    let cfg = ingest_config(&args.common)?;
    let jobs = pair_sequences(&args.common.gt, &args.pred, &args.common.seqinfo)?;
    let (evals, errors) = evaluate_jobs(&jobs, &cfg, &horizons, false, args.common.jobs);
    let combined = combine_sequences(&evals, &horizons);
    let text = match args.common.format {
        Format::Json => {
            let report = json!({
                "config": config_json(&args.common, &horizons, &[]),
                "per_sequence": Value::Array(
                    evals
                        .iter()
                        .map(|eval| {
                            json!({
                                "name": eval.name,
                                "lidf1": curve_json(&eval.lidf1),
                                "alta": curve_json(&eval.alta),
                            })
                        })
                        .collect(),
                ),
                "combined": {
                    "lidf1": combined_curve_json(&combined.lidf1),
                    "alta": combined_curve_json(&combined.alta),
                },
                "errors": errors_json(&errors),
                "metadata": metadata_json(&evals, &horizons),
            });
            let mut text = serde_json::to_string_pretty(&report).expect("report serialises");
            text.push('\n');
            text
        }
        Format::Csv => {
            let mut out = String::from("sequence,metric,horizon,frames,value,num,den\n");
            let fmt = |value: Value| -> String {
                match value {
                    Value::Number(n) => n.to_string(),
                    _ => String::new(),
                }
            };
            for eval in &evals {
                for (kind, points) in [("lidf1", &eval.lidf1), ("alta", &eval.alta)] {
                    for (horizon, reach, acc) in points {
                        let frames = match reach {
                            Reach::Frames(r) => r.to_string(),
                            Reach::Strict => String::new(),
                        };
                        let _ = writeln!(
                            out,
                            "{},{kind},{},{frames},{},{},{}",
                            eval.name,
                            horizon.label(),
                            fmt(round6(acc.value())),
                            fmt(finite(acc.numerator)),
                            fmt(finite(acc.denominator)),
                        );
                    }
                }
            }
            for (kind, points) in [("lidf1", &combined.lidf1), ("alta", &combined.alta)] {
                for (horizon, acc) in points {
                    let _ = writeln!(
                        out,
                        "combined,{kind},{},,{},{},{}",
                        horizon.label(),
                        fmt(round6(acc.value())),
                        fmt(finite(acc.numerator)),
                        fmt(finite(acc.denominator)),
                    );
                }
            }
            out
        }
    };
    emit(&args.common.out, &text)?;
    Ok(errors.is_empty())
}
