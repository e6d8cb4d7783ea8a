//! Comparative statistics across trackers: rank correlation between
//! metrics, switch-count normalisation and leaderboard-style rank tables.

use std::collections::BTreeMap;

/// Scores for a set of trackers: tracker name → (metric name → value).
/// `BTreeMap` keeps every iteration order deterministic.
pub type TrackerScores = BTreeMap<String, BTreeMap<String, f64>>;

/// Kendall rank correlation, tau-b (tie-corrected), over all `n(n−1)/2`
/// pairs. Returns 0 when either vector is constant (the coefficient is
/// undefined there, and "no information" reads as zero correlation).
///
/// Leaderboard score vectors routinely contain ties, which is why the
/// tie-corrected variant is used rather than tau-a.
///
/// # Panics
/// If the vectors differ in length or have fewer than two entries.
pub fn kendall_tau(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "rank correlation needs paired scores");
    assert!(a.len() >= 2, "rank correlation needs at least two scores");
    let n = a.len();
    let mut concordant = 0i64;
    let mut discordant = 0i64;
    let mut ties_a = 0i64; // pairs tied in a only
    let mut ties_b = 0i64; // pairs tied in b only
    let mut ties_both = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            let da = a[i].partial_cmp(&a[j]).expect("scores must not be NaN");
            let db = b[i].partial_cmp(&b[j]).expect("scores must not be NaN");
            match (da.is_eq(), db.is_eq()) {
                (true, true) => ties_both += 1,
                (true, false) => ties_a += 1,
                (false, true) => ties_b += 1,
                (false, false) => {
                    if da == db {
                        concordant += 1;
                    } else {
                        discordant += 1;
                    }
                }
            }
        }
    }
    let total = (n * (n - 1) / 2) as i64;
    let denom_a = total - ties_a - ties_both;
    let denom_b = total - ties_b - ties_both;
    let denominator = ((denom_a as f64) * (denom_b as f64)).sqrt();
    if denominator == 0.0 {
        return 0.0;
    }
    (concordant - discordant) as f64 / denominator
}

/// Identity switches per true-positive detection. Trackers that detect more
/// objects have more opportunities to switch, so the raw count is not
/// comparable across trackers; this ratio is.
///
/// # Panics
/// If switches are reported without any matched detections — a switch
/// requires two matches, so that state cannot arise from the metrics here.
pub fn normalized_id_switches(id_switches: u64, det_tp: u64) -> f64 {
    if det_tp == 0 {
        assert_eq!(id_switches, 0, "identity switches require matched detections");
        return 0.0;
    }
    id_switches as f64 / det_tp as f64
}

/// One row of a rank table: the tracker and, per metric (in the table's
/// column order), its score and dense rank. `None` where the tracker did not
/// report that metric.
#[derive(Debug, Clone, PartialEq)]
pub struct RankRow {
    pub tracker: String,
    pub cells: Vec<Option<(f64, u32)>>,
}

/// A leaderboard: trackers ordered by one metric, with every metric's dense
/// rank alongside the value.
#[derive(Debug, Clone, PartialEq)]
pub struct RankTable {
    /// Column order (the union of reported metric names, sorted).
    pub metrics: Vec<String>,
    /// Metrics ranked ascending (smaller is better), e.g. switch counts.
    pub ascending: Vec<String>,
    pub rows: Vec<RankRow>,
}

/// Builds a rank table ordered descending by `sort_key`, ties broken by
/// tracker name. Every metric is ranked densely (1, 2, 2, 3): equal scores
/// share a rank and the next distinct score takes the next integer. Higher
/// is treated as better for all metrics.
///
/// # Panics
/// If no tracker reports `sort_key`.
pub fn rank_table(scores: &TrackerScores, sort_key: &str) -> RankTable {
    rank_table_directed(scores, sort_key, &[])
}

/// [`rank_table`] with a set of metrics ranked ascending instead (smaller is
/// better — identity-switch counts, error fractions). The row order still
/// follows `sort_key` in its own direction.
pub fn rank_table_directed(scores: &TrackerScores, sort_key: &str, ascending: &[&str]) -> RankTable {
    assert!(
        scores.values().any(|m| m.contains_key(sort_key)),
        "sort key {sort_key:?} is reported by no tracker",
    );
    let mut metrics: Vec<String> = Vec::new();
    for per_metric in scores.values() {
        for name in per_metric.keys() {
            if !metrics.contains(name) {
                metrics.push(name.clone());
            }
        }
    }
    metrics.sort_unstable();
    let sort_ascending = ascending.contains(&sort_key);

    // Dense ranks per metric: sort the distinct reported values in quality
    // order; a tracker's rank is the position of its value.
    let mut ranks: BTreeMap<&str, BTreeMap<&str, u32>> = BTreeMap::new();
    for metric in &metrics {
        let metric_ascending = ascending.contains(&metric.as_str());
        let mut values: Vec<f64> = scores
            .values()
            .filter_map(|per_metric| per_metric.get(metric))
            .copied()
            .collect();
        values.sort_unstable_by(|x, y| x.partial_cmp(y).expect("scores must not be NaN"));
        if !metric_ascending {
            values.reverse();
        }
        values.dedup();
        let per_tracker = ranks.entry(metric).or_default();
        for (tracker, per_metric) in scores {
            if let Some(value) = per_metric.get(metric) {
                let position = values.iter().position(|v| v == value).expect("value was collected");
                per_tracker.insert(tracker, position as u32 + 1);
            }
        }
    }

    let mut names: Vec<&String> = scores.keys().collect();
    names.sort_unstable_by(|x, y| {
        let vx = scores[*x].get(sort_key);
        let vy = scores[*y].get(sort_key);
        match (vx, vy) {
            (Some(vx), Some(vy)) => {
                let by_value = if sort_ascending {
                    vx.partial_cmp(vy).expect("scores must not be NaN")
                } else {
                    vy.partial_cmp(vx).expect("scores must not be NaN")
                };
                by_value.then_with(|| x.cmp(y))
            }
            // Trackers without the sort key go last, in name order.
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => x.cmp(y),
        }
    });

    let rows = names
        .into_iter()
        .map(|tracker| RankRow {
            tracker: tracker.clone(),
            cells: metrics
                .iter()
                .map(|metric| {
                    scores[tracker].get(metric).map(|&value| {
                        (value, ranks[metric.as_str()][tracker.as_str()])
                    })
                })
                .collect(),
        })
        .collect();

    RankTable {
        metrics,
        ascending: ascending.iter().map(|s| s.to_string()).collect(),
        rows,
    }
}
