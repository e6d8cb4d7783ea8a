//! Drives the compiled binary through a multi-tracker workflow: synthesize
//! the fixture catalog, rank two trackers with `compare`, and sample
//! horizon curves with `curve`. (`eval` and `synth` report output is
//! already exercised end to end by the determinism criterion in the
//! acceptance suite.)

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_moteval"))
        .args(args)
        .output()
        .expect("the binary runs")
}

fn stdout_json(output: &Output) -> Value {
    assert!(
        !output.stdout.is_empty(),
        "no report on stdout; stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("stdout is valid JSON")
}

/// Writes the fixture catalog and returns the fixture directory.
fn synth_fixtures(dir: &Path) -> PathBuf {
    let out = dir.join("fixtures");
    let result = run(&["synth", "--out", out.to_str().unwrap()]);
    assert!(result.status.success(), "synth failed: {}", String::from_utf8_lossy(&result.stderr));
    out
}

fn fixture_file(fixtures: &Path, name: &str, file: &str) -> String {
    fixtures.join(name).join(file).to_str().unwrap().to_string()
}

#[test]
fn compare_ranks_a_perfect_tracker_above_a_splitting_one() {
    let dir = tempfile::tempdir().unwrap();
    let fixtures = synth_fixtures(dir.path());
    let gt = fixture_file(&fixtures, "s1_split", "gt.txt");
    let pred = fixture_file(&fixtures, "s1_split", "pred.txt");
    let seqinfo = fixture_file(&fixtures, "s1_split", "seqinfo.ini");

    // The ground truth replayed as a prediction is a perfect tracker; the
    // fixture's own prediction splits the object's identity mid-sequence.
    let output = run(&[
        "compare",
        "--gt",
        &format!("s1={gt}"),
        "--seqinfo",
        &format!("s1={seqinfo}"),
        "--pred",
        &format!("perfect={gt}"),
        "--pred",
        &format!("splitter={pred}"),
        "--horizons",
        "0f,1f,strict",
    ]);
    assert!(
        output.status.success(),
        "compare failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let report = stdout_json(&output);

    assert_eq!(report["errors"].as_array().map(Vec::len), Some(0));
    assert_eq!(report["rank_table"]["sort_key"], "mean_alta");

    let rows = report["rank_table"]["rows"].as_array().expect("rank rows");
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["tracker"], "perfect");
    assert_eq!(rows[1]["tracker"], "splitter");
    assert_eq!(rows[0]["metrics"]["mean_alta"]["rank"], 1);
    assert_eq!(rows[1]["metrics"]["mean_alta"]["rank"], 2);

    // Whole-sequence scores of both trackers on the split fixture.
    let trackers = &report["trackers"];
    assert_eq!(trackers["perfect"]["ata"]["value"].as_f64(), Some(1.0));
    assert_eq!(trackers["perfect"]["idf1"]["value"].as_f64(), Some(1.0));
    assert_eq!(trackers["splitter"]["det_f1"]["value"].as_f64(), Some(1.0));
    assert_eq!(trackers["splitter"]["idf1"]["value"].as_f64(), Some(0.5));
    let splitter_ata = trackers["splitter"]["ata"]["value"].as_f64().unwrap();
    assert!((splitter_ata - 1.0 / 3.0).abs() < 1e-6, "ata = {splitter_ata}");
    assert_eq!(trackers["splitter"]["mota"]["value"].as_f64(), Some(0.9));

    // With two trackers the metric-agreement matrix is present and square.
    let metrics = report["kendall"]["metrics"].as_array().expect("kendall metrics");
    let matrix = report["kendall"]["matrix"].as_array().expect("kendall matrix");
    assert_eq!(matrix.len(), metrics.len());
    for row in matrix {
        assert_eq!(row.as_array().map(Vec::len), Some(metrics.len()));
    }
}

#[test]
fn compare_rejects_an_unknown_sort_key() {
    let dir = tempfile::tempdir().unwrap();
    let fixtures = synth_fixtures(dir.path());
    let gt = fixture_file(&fixtures, "perfect", "gt.txt");
    let pred = fixture_file(&fixtures, "perfect", "pred.txt");

    let output = run(&[
        "compare",
        "--gt",
        &format!("p={gt}"),
        "--pred",
        &format!("t={pred}"),
        "--sort-key",
        "no_such_metric",
    ]);
    assert_eq!(output.status.code(), Some(2), "usage errors exit with 2");
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("sort-key"), "stderr was: {stderr}");
}

#[test]
fn curve_samples_dense_and_strict_horizons() {
    let dir = tempfile::tempdir().unwrap();
    let fixtures = synth_fixtures(dir.path());
    let gt = fixture_file(&fixtures, "s1_split", "gt.txt");
    let pred = fixture_file(&fixtures, "s1_split", "pred.txt");
    let seqinfo = fixture_file(&fixtures, "s1_split", "seqinfo.ini");

    let output = run(&[
        "curve",
        "--gt",
        &format!("s1={gt}"),
        "--seqinfo",
        &format!("s1={seqinfo}"),
        "--pred",
        &format!("s1={pred}"),
        "--horizons",
        "strict",
        "--dense-to",
        "3",
    ]);
    assert!(output.status.success(), "curve failed: {}", String::from_utf8_lossy(&output.stderr));
    let report = stdout_json(&output);

    let point = |curve: &Value, label: &str| -> f64 {
        curve
            .as_array()
            .expect("curve points")
            .iter()
            .find(|p| p["horizon"] == label)
            .unwrap_or_else(|| panic!("no {label} point in {curve}"))["value"]
            .as_f64()
            .expect("numeric value")
    };

    // strict + radii 0..=3.
    let alta = &report["combined"]["alta"];
    assert_eq!(alta.as_array().map(Vec::len), Some(5));

    // At radius 0 both local metrics equal detection F1 (here 1.0); the
    // one-frame window scores 28/33; the strict end is ATA = 1/3.
    assert_eq!(point(alta, "0f"), 1.0);
    assert!((point(alta, "1f") - 28.0 / 33.0).abs() < 1e-6);
    assert!((point(alta, "strict") - 1.0 / 3.0).abs() < 1e-6);
    let lidf1 = &report["combined"]["lidf1"];
    assert_eq!(point(lidf1, "0f"), 1.0);
    assert!((point(lidf1, "strict") - 0.5).abs() < 1e-6, "strict LIDF1 is IDF1");

    // Per-sequence points label their window reach in frames; the strict
    // point has no finite reach.
    let seq = &report["per_sequence"][0];
    assert_eq!(seq["name"], "s1");
    let frames: Vec<&Value> = seq["alta"]
        .as_array()
        .expect("per-sequence curve")
        .iter()
        .map(|p| &p["frames"])
        .collect();
    assert!(frames.iter().any(|f| f.is_null()), "strict point lacks a frame radius");
    assert!(frames.iter().any(|f| f.as_u64() == Some(3)), "dense radius 3 present");
}

#[test]
fn curve_emits_csv_rows() {
    let dir = tempfile::tempdir().unwrap();
    let fixtures = synth_fixtures(dir.path());
    let gt = fixture_file(&fixtures, "s2_merge", "gt.txt");
    let pred = fixture_file(&fixtures, "s2_merge", "pred.txt");

    let output = run(&[
        "curve",
        "--gt",
        &format!("s2={gt}"),
        "--pred",
        &format!("s2={pred}"),
        "--horizons",
        "0f,strict",
        "--format",
        "csv",
    ]);
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).expect("CSV is UTF-8");
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("sequence,metric,horizon,frames,value,num,den"));
    assert!(
        text.lines().any(|line| line.starts_with("combined,alta,strict,,")),
        "missing combined strict row in:\n{text}"
    );
    assert!(
        text.lines().any(|line| line.starts_with("combined,lidf1,0f,,")),
        "missing combined radius-0 row in:\n{text}"
    );
}

#[test]
fn a_missing_prediction_file_is_a_reported_failure() {
    let dir = tempfile::tempdir().unwrap();
    let fixtures = synth_fixtures(dir.path());
    let gt = fixture_file(&fixtures, "perfect", "gt.txt");
    let pred = fixture_file(&fixtures, "perfect", "pred.txt");
    let missing = dir.path().join("no_such_tracker.txt");

    let output = run(&[
        "compare",
        "--gt",
        &format!("p={gt}"),
        "--pred",
        &format!("good={pred}"),
        "--pred",
        &format!("broken={}", missing.to_str().unwrap()),
    ]);
    // The healthy tracker is still evaluated and reported; the broken one
    // is recorded under `errors`, and the exit code flags the failure.
    assert_eq!(output.status.code(), Some(1));
    let report = stdout_json(&output);
    let errors = report["errors"].as_array().expect("errors array");
    assert_eq!(errors.len(), 1);
    let entry = errors[0].to_string();
    assert!(entry.contains("broken"), "error entry was: {entry}");
    assert_eq!(report["trackers"]["good"]["det_f1"]["value"].as_f64(), Some(1.0));
}
