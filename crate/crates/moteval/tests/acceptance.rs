//! Acceptance gate: one test per release criterion, each printing a single
//! PASS line (run with `--nocapture` to see them; the per-test ok/FAILED
//! lines carry the same information).
//!
//! Two criteria assert targets that are arithmetically out of reach; they
//! are implemented exactly as stated and fail with a full analysis in the
//! panic message rather than being weakened:
//!
//! - criterion 2 asserts `DetF1 >= ALTA(r), LIDF1(r)` with zero violations,
//!   which is not a theorem (see the test for two minimal counterexamples);
//! - criterion 6 asserts `0.443 / 0.769 = 0.577 ± 5e-4`, but the quotient
//!   is 0.57607.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use moteval::decompose::{approx_ata, decompose, frame_correspondence};
use moteval::local::{alta, lidf1, mean_over_horizons, Horizon};
use moteval::metrics;
use moteval::model::{BoundingBox, Sequence, Track, TrackRole, TrackSet};
use moteval::overlap::build_overlap_series;
use moteval::synth;

use common::assert_close;

const THRESHOLD: f64 = 0.5;

/// Exact float equality with a readable failure message.
#[track_caller]
fn assert_identical(label: &str, a: f64, b: f64) {
    assert!(a == b, "{label}: {a} != {b} (Δ = {:e})", (a - b).abs());
}

fn macro_corpus() -> impl Iterator<Item = Sequence> {
    (0..200u64).map(|seed| common::random_sequence(seed, 50, 8))
}

// ---------------------------------------------------------------------------
// Criterion 1 — the windowed metrics reduce to their endpoints: at radius 0
// both equal DetF1; at radius ≥ T−1 ALTA equals ATA and LIDF1 equals IDF1.
// 200 seeded sequences (T ≤ 50, K, K̂ ≤ 8), tolerance 1e-12, budget 30 s.

#[test]
fn criterion_1_reduction_identities() {
    let start = Instant::now();
    for seq in macro_corpus() {
        let series = build_overlap_series(&seq, THRESHOLD);
        let det = metrics::det_f1(&series).det_f1;
        let idf1_value = metrics::idf1(&series).idf1;
        let ata_value = metrics::ata(&series).ata;
        let t = series.num_frames();

        assert_close("ALTA(0) = DetF1", alta(&series, Horizon::Frames(0)).value(), det, 1e-12);
        assert_close("LIDF1(0) = DetF1", lidf1(&series, Horizon::Frames(0)).value(), det, 1e-12);
        for r in [t - 1, t, t + 99] {
            let label = format!("r = {r}, T = {t}");
            assert_close(
                &format!("ALTA({label}) = ATA"),
                alta(&series, Horizon::Frames(r)).value(),
                ata_value,
                1e-12,
            );
            assert_close(
                &format!("LIDF1({label}) = IDF1"),
                lidf1(&series, Horizon::Frames(r)).value(),
                idf1_value,
                1e-12,
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(30), "budget exceeded: {elapsed:?}");
    println!(
        "ACCEPTANCE PASS — criterion 1: reduction identities on 200 seeds within 1e-12 ({elapsed:?})"
    );
}

// ---------------------------------------------------------------------------
// Criterion 2 — asserted: DetF1 ≥ ALTA(r) and DetF1 ≥ LIDF1(r) for every
// r ∈ {0..T} on the criterion-1 corpus, zero violations.
//
// This property is NOT a theorem, and the corpus refutes it. Two minimal
// counterexamples are computed live below so the failure is self-contained:
//
// (a) ALTA weights *tracks* while DetF1 weights *boxes*. A short perfect
//     track plus a long half-matched track gives ATA = (1 + 1/2)/2 = 0.75
//     against DetF1 = (2+5)/12 ≈ 0.583 — and ALTA(r ≥ T−1) = ATA by
//     criterion 1, so the bound already fails at the strict end.
// (b) Windows are clipped to the sequence, so central frames appear in
//     more windows than boundary frames. A perfect middle frame between
//     two unmatched boundary frames gives LIDF1(1) = 0.6 > DetF1 = 0.5.
//
// The violating values themselves are correct: criterion 3 checks the same
// quantities against an exhaustive oracle, and both counterexamples are
// recomputed here from first principles.

#[test]
fn criterion_2_detection_upper_bound() {
    let mut violations = 0usize;
    let mut checked = 0usize;
    let mut seeds_affected = std::collections::BTreeSet::new();
    let mut worst_alta = (0.0f64, 0u64, 0u32);
    let mut worst_lidf1 = (0.0f64, 0u64, 0u32);
    for (seed, seq) in (0..200u64).zip(macro_corpus()) {
        let series = build_overlap_series(&seq, THRESHOLD);
        let det = metrics::det_f1(&series).det_f1;
        for r in 0..=series.num_frames() {
            let alta_excess = alta(&series, Horizon::Frames(r)).value() - det;
            let lidf1_excess = lidf1(&series, Horizon::Frames(r)).value() - det;
            checked += 2;
            if alta_excess > 1e-12 {
                violations += 1;
                seeds_affected.insert(seed);
                if alta_excess > worst_alta.0 {
                    worst_alta = (alta_excess, seed, r);
                }
            }
            if lidf1_excess > 1e-12 {
                violations += 1;
                seeds_affected.insert(seed);
                if lidf1_excess > worst_lidf1.0 {
                    worst_lidf1 = (lidf1_excess, seed, r);
                }
            }
        }
    }
    if violations == 0 {
        println!("ACCEPTANCE PASS — criterion 2: DetF1 bounds the windowed metrics ({checked} values)");
        return;
    }

    // Counterexample (a): track weighting vs box weighting, strict case.
    let lane = |frames: &[u32], x: f64, lane: f64| -> BTreeMap<u32, BoundingBox> {
        frames.iter().map(|&t| (t, BoundingBox::new(x, lane * 30.0, 10.0, 10.0))).collect()
    };
    let all: Vec<u32> = (1..=10).collect();
    let toy_a = Sequence::new(
        "short-perfect-long-half",
        10,
        10.0,
        TrackSet::new(
            TrackRole::GroundTruth,
            vec![Track::new(1, lane(&[1, 2], 0.0, 0.0)), Track::new(2, lane(&all, 0.0, 1.0))],
        ),
        TrackSet::new(
            TrackRole::Predicted,
            vec![
                Track::new(101, lane(&[1, 2], 0.0, 0.0)),
                // Overlaps its object in the first five frames only.
                Track::new(102, {
                    let mut boxes = lane(&[1, 2, 3, 4, 5], 0.0, 1.0);
                    boxes.extend(lane(&[6, 7, 8, 9, 10], 9.0, 1.0));
                    boxes
                }),
            ],
        ),
    );
    let series_a = build_overlap_series(&toy_a, THRESHOLD);
    let (det_a, ata_a) = (metrics::det_f1(&series_a).det_f1, metrics::ata(&series_a).ata);

    // Counterexample (b): clipped-window reweighting favours the middle.
    let toy_b = Sequence::new(
        "perfect-middle-frame",
        3,
        10.0,
        TrackSet::new(
            TrackRole::GroundTruth,
            vec![
                Track::new(1, lane(&[2], 0.0, 0.0)),
                Track::new(2, lane(&[2], 0.0, 1.0)),
                Track::new(3, lane(&[1], 0.0, 2.0)),
                Track::new(4, lane(&[3], 0.0, 3.0)),
            ],
        ),
        TrackSet::new(
            TrackRole::Predicted,
            vec![
                Track::new(101, lane(&[2], 0.0, 0.0)),
                Track::new(102, lane(&[2], 0.0, 1.0)),
                Track::new(103, lane(&[1], 0.0, 5.0)),
                Track::new(104, lane(&[3], 0.0, 6.0)),
            ],
        ),
    );
    let series_b = build_overlap_series(&toy_b, THRESHOLD);
    let (det_b, lidf1_b) =
        (metrics::det_f1(&series_b).det_f1, lidf1(&series_b, Horizon::Frames(1)).value());

    println!("ACCEPTANCE FAIL — criterion 2: the DetF1 upper bound is not a theorem");
    panic!(
        "DetF1 >= ALTA(r)/LIDF1(r) fails on the corpus: {violations} of {checked} windowed \
         values exceed DetF1 by more than 1e-12 across {} of 200 seeds \
         (worst ALTA excess {:.4} at seed {} r {}; worst LIDF1 excess {:.4} at seed {} r {}). \
         The asserted bound is false in general, for two independent reasons. \
         (a) ALTA counts tracks where DetF1 counts boxes: a 2-frame perfectly tracked object \
         next to a 10-frame object matched in 5 frames gives ATA = (1 + 1/2)/2 = {ata_a} \
         > DetF1 = 7/12 = {det_a}, and ALTA(r >= T-1) = ATA, so the bound fails at the \
         strict end. \
         (b) Windows are clipped to [1, T], so boundary frames fall in fewer windows than \
         central ones: one perfect 2-box frame flanked by two unmatched single-box frames \
         gives LIDF1(1) = {lidf1_b} > DetF1 = {det_b}. \
         The violating values are themselves correct — criterion 3 verifies the identical \
         quantities against an exhaustive-enumeration oracle. The bound does hold in the \
         box-counted strict case (IDF1 <= DetF1, same denominator), which criterion 1 covers.",
        seeds_affected.len(),
        worst_alta.0,
        worst_alta.1,
        worst_alta.2,
        worst_lidf1.0,
        worst_lidf1.1,
        worst_lidf1.2,
    );
}

// ---------------------------------------------------------------------------
// Criterion 3 — exhaustive-oracle equivalence on 500 micro-instances
// (T ≤ 6, K, K̂ ≤ 3): IDTP, TrackTP, every windowed ALTA/LIDF1 value, and
// the correspondence-restricted ÃTA, all within 1e-12. Budget 60 s.

#[test]
fn criterion_3_oracle_equivalence() {
    let start = Instant::now();
    for seed in 0..500u64 {
        let seq = common::random_micro_sequence(seed);
        let series = build_overlap_series(&seq, THRESHOLD);
        let label = |what: &str| format!("seed {seed}: {what}");

        assert_close(
            &label("IDTP"),
            metrics::idf1(&series).idtp,
            common::oracle_idtp(&seq, THRESHOLD),
            1e-12,
        );
        assert_close(
            &label("TrackTP"),
            metrics::ata(&series).track_tp,
            common::oracle_track_tp(&seq, THRESHOLD),
            1e-12,
        );

        for r in 0..=series.num_frames() {
            let ((l_num, l_den), (a_num, a_den)) =
                common::oracle_local_metrics(&seq, THRESHOLD, r);
            let l = lidf1(&series, Horizon::Frames(r));
            let a = alta(&series, Horizon::Frames(r));
            assert_close(&label(&format!("LIDF1({r}) num")), l.numerator, l_num, 1e-12);
            assert_close(&label(&format!("LIDF1({r}) den")), l.denominator, l_den, 1e-12);
            assert_close(
                &label(&format!("LIDF1({r})")),
                l.value(),
                moteval::MetricAccumulator::new(l_num, l_den).value(),
                1e-12,
            );
            assert_close(&label(&format!("ALTA({r}) num")), a.numerator, a_num, 1e-12);
            assert_close(&label(&format!("ALTA({r}) den")), a.denominator, a_den, 1e-12);
            assert_close(
                &label(&format!("ALTA({r})")),
                a.value(),
                moteval::MetricAccumulator::new(a_num, a_den).value(),
                1e-12,
            );
        }

        let corr = frame_correspondence(&series);
        assert_close(
            &label("ÃTA"),
            approx_ata(&series, &corr).ata,
            common::oracle_approx_ata(&seq, THRESHOLD),
            1e-12,
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(60), "budget exceeded: {elapsed:?}");
    println!(
        "ACCEPTANCE PASS — criterion 3: exhaustive oracle agreement on 500 micro-instances ({elapsed:?})"
    );
}

// ---------------------------------------------------------------------------
// Criterion 4 — the split fixture scores DetF1 1, IDF1 1/2, ATA 1/3,
// ALTA(1f) 28/33, MOTA 0.9 and 100% split decomposition; the merge fixture
// mirrors it with 100% merge.

#[test]
fn criterion_4_split_and_merge_fixtures() {
    let catalog = synth::fixture_catalog();
    let scenario = |name: &str| {
        let fixture = catalog.iter().find(|f| f.name == name).unwrap();
        let series = build_overlap_series(&fixture.sequence, THRESHOLD);
        let strict = metrics::strict_metrics(&series);
        let alta_1f = alta(&series, Horizon::Frames(1)).value();
        let corr = frame_correspondence(&series);
        let report = decompose(&series, &corr);
        (strict, alta_1f, report)
    };

    let (strict, alta_1f, report) = scenario("s1_split");
    assert_close("S1 DetF1", strict.det.det_f1, 1.0, 1e-12);
    assert_close("S1 IDF1", strict.id.idf1, 0.5, 1e-12);
    assert_close("S1 ATA", strict.track.ata, 1.0 / 3.0, 1e-12);
    assert_close("S1 ALTA(1f)", alta_1f, 28.0 / 33.0, 1e-12);
    assert_close("S1 MOTA", strict.mota.mota, 0.9, 1e-12);
    let fractions = report.overall.normalized_fractions().expect("S1 has error mass");
    assert_close("S1 split share", fractions[2], 1.0, 1e-12);
    assert_close("S1 fn share", fractions[0], 0.0, 1e-12);
    assert_close("S1 fp share", fractions[1], 0.0, 1e-12);
    assert_close("S1 merge share", fractions[3], 0.0, 1e-12);

    let (strict, alta_1f, report) = scenario("s2_merge");
    assert_close("S2 DetF1", strict.det.det_f1, 1.0, 1e-12);
    assert_close("S2 IDF1", strict.id.idf1, 0.5, 1e-12);
    assert_close("S2 ATA", strict.track.ata, 1.0 / 3.0, 1e-12);
    assert_close("S2 ALTA(1f)", alta_1f, 28.0 / 33.0, 1e-12);
    // The merge mirror is NOT symmetric for MOTA: identity switches are
    // counted per ground-truth track, and in a merge each object keeps its
    // (shared) hypothesis for its whole life, so MOTA sees nothing wrong.
    // That blindness is what the fixture pair demonstrates.
    assert_close("S2 MOTA", strict.mota.mota, 1.0, 1e-12);
    let fractions = report.overall.normalized_fractions().expect("S2 has error mass");
    assert_close("S2 merge share", fractions[3], 1.0, 1e-12);
    assert_close("S2 fn share", fractions[0], 0.0, 1e-12);
    assert_close("S2 fp share", fractions[1], 0.0, 1e-12);
    assert_close("S2 split share", fractions[2], 0.0, 1e-12);

    println!("ACCEPTANCE PASS — criterion 4: split and merge fixtures score exactly as derived");
}

// ---------------------------------------------------------------------------
// Criterion 5 — decomposition additivity: per-track masses sum to
// 1 − Q̃_{i,π(i)} and the normalised overall fractions sum to 1 (1e-9);
// ÃTA ≤ ATA always; ÃTA = ATA exactly when the per-frame overlap relation
// is one-to-one.

#[test]
fn criterion_5_decomposition_additivity() {
    for (seed, seq) in (0..200u64).zip(macro_corpus()) {
        let series = build_overlap_series(&seq, THRESHOLD);
        let corr = frame_correspondence(&series);
        let report = decompose(&series, &corr);
        for (i, masses) in report.recall.iter().enumerate() {
            assert_close(
                &format!("seed {seed}: gt {i} mass total"),
                masses.total(),
                1.0 - masses.coverage,
                1e-9,
            );
        }
        for (j, masses) in report.precision.iter().enumerate() {
            assert_close(
                &format!("seed {seed}: pred {j} mass total"),
                masses.total(),
                1.0 - masses.coverage,
                1e-9,
            );
        }
        if let Some(fractions) = report.overall.normalized_fractions() {
            assert_close(
                &format!("seed {seed}: normalised fractions"),
                fractions.iter().sum::<f64>(),
                1.0,
                1e-9,
            );
        }
        let ata = metrics::ata(&series).ata;
        assert!(
            report.approx_ata <= ata + 1e-12,
            "seed {seed}: ÃTA {} > ATA {ata}",
            report.approx_ata
        );
    }

    // One-to-one overlap ⇒ the correspondence keeps every overlapping pair,
    // so the restricted and unrestricted temporal IOU matrices coincide.
    for seed in 0..100u64 {
        let seq = common::random_one_to_one_sequence(seed, 40, 6);
        let series = build_overlap_series(&seq, THRESHOLD);
        let corr = frame_correspondence(&series);
        let approx = approx_ata(&series, &corr);
        assert_identical(
            &format!("seed {seed}: ÃTA = ATA"),
            approx.ata,
            metrics::ata(&series).ata,
        );
    }
    // The hand-built catalog scenarios are one-to-one per frame as well.
    for fixture in synth::fixture_catalog() {
        if fixture.name == "mixed_random" {
            continue;
        }
        let series = build_overlap_series(&fixture.sequence, THRESHOLD);
        let corr = frame_correspondence(&series);
        assert_identical(
            &format!("fixture {}: ÃTA = ATA", fixture.name),
            approx_ata(&series, &corr).ata,
            metrics::ata(&series).ata,
        );
    }
    println!("ACCEPTANCE PASS — criterion 5: masses telescope, ÃTA ≤ ATA, equality when one-to-one");
}

// ---------------------------------------------------------------------------
// Criterion 6 — aggregation arithmetic on reported leaderboard values:
// mean_over_horizons((0.660, 0.520, 0.443)) = 0.541 and
// association_fraction(0.443, 0.769) = 0.577 ± 5e-4.
//
// The second target is unreachable: 0.443/0.769 = 0.57607…, which is
// 9.3e-4 from 0.577. The published table computed the quotient from its
// unrounded internals (≈ 0.4434/0.7686 → 0.577) before rounding each
// column to three decimals; from the rounded inputs the nearest reachable
// value rounds to 0.576. Propagating the half-ulp input rounding allows a
// deviation of up to ≈ 1.0e-3, so a ±5e-4 window cannot be met by any
// correct implementation of ata/det_f1. Asserted as stated regardless.

#[test]
fn criterion_6_reported_number_arithmetic() {
    assert_close("mean over horizons", mean_over_horizons(&[0.660, 0.520, 0.443]), 0.541, 1e-12);

    let fraction = metrics::association_fraction(0.443, 0.769).expect("det_f1 > 0");
    let error = (fraction - 0.577).abs();
    if error > 5e-4 {
        println!("ACCEPTANCE FAIL — criterion 6: 0.443/0.769 cannot round to 0.577");
        panic!(
            "association_fraction(0.443, 0.769) = {fraction}, which is {error:.3e} from the \
             stated target 0.577 (> 5e-4). The target was transcribed from a table that \
             computed the quotient at full precision before rounding its columns to three \
             decimals; from the rounded inputs the true quotient is 0.57607…, so no correct \
             implementation of ata/det_f1 can land within 5e-4 of 0.577 (the window would \
             need to be ≈ ±1e-3 to absorb the input rounding)."
        );
    }
    println!("ACCEPTANCE PASS — criterion 6: reported-number arithmetic reproduces the table");
}

// ---------------------------------------------------------------------------
// Criterion 7 — symmetry: swapping the two track sets leaves DetF1, IDF1,
// ATA and every ALTA(r) unchanged, exchanges recall with precision and
// split with merge; permuting frames leaves DetF1, IDF1, ATA unchanged.
// 100 seeded cases, exact float equality.

#[test]
fn criterion_7_symmetry() {
    let mut rng = common::Rng::new(0x0057_1713);
    for seed in 0..100u64 {
        let seq = common::random_sequence(seed, 30, 6);
        let swapped = seq.swapped();
        let series = build_overlap_series(&seq, THRESHOLD);
        let sw_series = build_overlap_series(&swapped, THRESHOLD);

        let (det, sw_det) = (metrics::det_f1(&series), metrics::det_f1(&sw_series));
        assert_identical(&format!("seed {seed}: DetF1 swap"), det.det_f1, sw_det.det_f1);
        assert_eq!(det.det_fn, sw_det.det_fp, "seed {seed}: det_fn ↔ det_fp");
        assert_eq!(det.det_fp, sw_det.det_fn, "seed {seed}: det_fp ↔ det_fn");

        let (id, sw_id) = (metrics::idf1(&series), metrics::idf1(&sw_series));
        assert_identical(&format!("seed {seed}: IDF1 swap"), id.idf1, sw_id.idf1);
        assert_identical(&format!("seed {seed}: idr ↔ idp"), id.idr, sw_id.idp);
        assert_identical(&format!("seed {seed}: idp ↔ idr"), id.idp, sw_id.idr);

        let (track, sw_track) = (metrics::ata(&series), metrics::ata(&sw_series));
        assert_identical(&format!("seed {seed}: ATA swap"), track.ata, sw_track.ata);
        assert_identical(&format!("seed {seed}: atr ↔ atp"), track.atr, sw_track.atp);
        assert_identical(&format!("seed {seed}: atp ↔ atr"), track.atp, sw_track.atr);

        for r in 0..=series.num_frames() {
            assert_identical(
                &format!("seed {seed}: ALTA({r}) swap"),
                alta(&series, Horizon::Frames(r)).value(),
                alta(&sw_series, Horizon::Frames(r)).value(),
            );
        }

        let corr = frame_correspondence(&series);
        let sw_corr = frame_correspondence(&sw_series);
        let overall = decompose(&series, &corr).overall;
        let sw_overall = decompose(&sw_series, &sw_corr).overall;
        assert_identical(&format!("seed {seed}: split ↔ merge"), overall.split, sw_overall.merge);
        assert_identical(&format!("seed {seed}: merge ↔ split"), overall.merge, sw_overall.split);
        assert_identical(&format!("seed {seed}: fn ↔ fp mass"), overall.det_fn, sw_overall.det_fp);
        assert_identical(&format!("seed {seed}: fp ↔ fn mass"), overall.det_fp, sw_overall.det_fn);

        // Frame-permutation invariance of the strict metrics.
        let perm = common::random_permutation(&mut rng, seq.num_frames());
        let permuted = common::permute_frames(&seq, &perm);
        let p_series = build_overlap_series(&permuted, THRESHOLD);
        assert_identical(
            &format!("seed {seed}: DetF1 permutation"),
            det.det_f1,
            metrics::det_f1(&p_series).det_f1,
        );
        assert_identical(
            &format!("seed {seed}: IDF1 permutation"),
            id.idf1,
            metrics::idf1(&p_series).idf1,
        );
        assert_identical(
            &format!("seed {seed}: ATA permutation"),
            track.ata,
            metrics::ata(&p_series).ata,
        );
    }
    println!("ACCEPTANCE PASS — criterion 7: swap and frame-permutation symmetry, exact, 100 seeds");
}

// ---------------------------------------------------------------------------
// Criterion 8 — performance: T = 1000, K = K̂ = 50, ten horizons, no
// decomposition, under 10 seconds.

#[test]
fn criterion_8_performance() {
    let mut rng = common::Rng::new(0xFA57);
    let t_max = 1000u32;
    let mut gt_tracks = Vec::new();
    let mut pred_tracks = Vec::new();
    for k in 0..50usize {
        // Two objects per lane so per-frame contention actually occurs.
        let lane = (k / 2) as i64;
        let mut col = rng.below(30) as i64;
        let mut gt_boxes = BTreeMap::new();
        let mut pred_boxes = BTreeMap::new();
        for t in 1..=t_max {
            col = (col + [-3, 0, 3][rng.below(3) as usize]).clamp(0, 36);
            let gt_box = BoundingBox::new(col as f64, lane as f64 * 30.0, 10.0, 10.0);
            gt_boxes.insert(t, gt_box);
            if rng.chance(0.99) {
                let dx = [-3.0, 0.0, 0.0, 3.0][rng.below(4) as usize]
                    + (rng.below(200_001) as f64 - 100_000.0) * 1e-7;
                pred_boxes
                    .insert(t, BoundingBox::new(gt_box.left + dx, gt_box.top, 10.0, 10.0));
            }
        }
        if pred_boxes.is_empty() {
            pred_boxes.insert(1, grid_box_for_lane(lane));
        }
        gt_tracks.push(Track::new(k as i64 + 1, gt_boxes));
        pred_tracks.push(Track::new(k as i64 + 101, pred_boxes));
    }
    let seq = Sequence::new(
        "performance",
        t_max,
        30.0,
        TrackSet::new(TrackRole::GroundTruth, gt_tracks),
        TrackSet::new(TrackRole::Predicted, pred_tracks),
    );

    let start = Instant::now();
    let series = build_overlap_series(&seq, THRESHOLD);
    let strict = metrics::strict_metrics(&series);
    let horizons: Vec<Horizon> =
        [0u32, 1, 2, 5, 10, 25, 50, 100, 250, 999].into_iter().map(Horizon::Frames).collect();
    let mut checksum = 0.0;
    for &horizon in &horizons {
        checksum += lidf1(&series, horizon).value() + alta(&series, horizon).value();
    }
    let elapsed = start.elapsed();
    assert!(checksum.is_finite() && strict.det.det_f1 > 0.0);
    assert!(
        elapsed < Duration::from_secs(10),
        "budget exceeded: {elapsed:?} for T=1000, K=K̂=50, 10 horizons"
    );
    println!("ACCEPTANCE PASS — criterion 8: T=1000, K=K̂=50, 10 horizons in {elapsed:?}");
}

fn grid_box_for_lane(lane: i64) -> BoundingBox {
    BoundingBox::new(0.0, lane as f64 * 30.0, 10.0, 10.0)
}

// ---------------------------------------------------------------------------
// Criterion 9 — determinism: `--jobs 1` and `--jobs 8` produce byte-identical
// JSON reports over the full fixture catalog, exercised through the binary.

#[test]
fn criterion_9_byte_identical_reports() {
    let bin = env!("CARGO_BIN_EXE_moteval");
    let dir = tempfile::tempdir().unwrap();
    let fixtures = dir.path().join("fixtures");

    let synth_status = std::process::Command::new(bin)
        .args(["synth", "--out"])
        .arg(&fixtures)
        .status()
        .unwrap();
    assert!(synth_status.success(), "synth failed");

    let catalog: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(fixtures.join("catalog.json")).unwrap())
            .unwrap();
    let mut eval_args: Vec<String> = vec!["eval".into(), "--decompose".into(), "--per-sequence".into()];
    for fixture in catalog["fixtures"].as_array().unwrap() {
        let name = fixture["name"].as_str().unwrap();
        let path = |key: &str| fixtures.join(fixture[key].as_str().unwrap());
        eval_args.push("--gt".into());
        eval_args.push(format!("{name}={}", path("gt").display()));
        eval_args.push("--pred".into());
        eval_args.push(format!("{name}={}", path("pred").display()));
        eval_args.push("--seqinfo".into());
        eval_args.push(format!("{name}={}", path("seqinfo").display()));
    }

    let mut reports = Vec::new();
    for jobs in ["1", "8"] {
        let out = dir.path().join(format!("report-jobs-{jobs}.json"));
        let status = std::process::Command::new(bin)
            .args(&eval_args)
            .args(["--jobs", jobs, "--out"])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success(), "eval --jobs {jobs} failed");
        reports.push(std::fs::read(&out).unwrap());
    }
    assert!(
        reports[0] == reports[1],
        "reports differ between --jobs 1 ({} bytes) and --jobs 8 ({} bytes)",
        reports[0].len(),
        reports[1].len()
    );
    assert!(!reports[0].is_empty());
    println!("ACCEPTANCE PASS — criterion 9: byte-identical reports across worker counts");
}
