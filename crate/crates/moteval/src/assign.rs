//! Deterministic maximum-weight bipartite assignment.
//!
//! Everything downstream — IDF1, ATA, their windowed variants, per-frame
//! correspondences — reduces to assigning rows of a non-negative weight
//! matrix to columns, one-to-one, maximising total weight. Two requirements
//! shape the implementation:
//!
//! * **Optimality** via the Hungarian algorithm with potentials, `O(n² m)`
//!   for an `n × m` matrix with `n ≤ m` (the larger side is transposed in).
//! * **Determinism** beyond what optimality gives: when several assignments
//!   attain the maximum weight, [`max_weight_matching`] returns the one whose
//!   pair list — pairs `(row, col)` sorted by row — is lexicographically
//!   smallest. The result is thus a pure function of the matrix contents,
//!   independent of iteration order, thread count or allocation addresses.
//!
//! Pairs with zero weight never appear in a returned matching: matching a row
//! to a column it does not actually overlap with would manufacture
//! correspondences out of nothing.

use crate::model::Matching;

/// Dense row-major weight matrix with non-negative finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl WeightMatrix {
    /// Builds a matrix from row-major data. All weights must be finite and
    /// `>= 0`; negative weights have no meaning for overlap counts.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "weight data does not match shape");
        assert!(
            data.iter().all(|w| w.is_finite() && *w >= 0.0),
            "weights must be finite and non-negative"
        );
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, row: usize, col: usize) -> f64 {
        debug_assert!(row < self.rows && col < self.cols);
        self.data[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, weight: f64) {
        assert!(weight.is_finite() && weight >= 0.0);
        self.data[row * self.cols + col] = weight;
    }
}

/// Hungarian algorithm with potentials for `rows <= cols`, maximising total
/// weight. Every row is assigned some column; the caller discards zero-weight
/// pairs. Returns `(objective, row -> col)`.
///
/// This is the classic `O(rows² · cols)` shortest-augmenting-path formulation
/// on costs `-w`, with 1-based internal indexing and a virtual column 0.
fn solve_rows_le_cols(rows: usize, cols: usize, weight: &dyn Fn(usize, usize) -> f64) -> (f64, Vec<usize>) {
    debug_assert!(rows <= cols);
    if rows == 0 {
        return (0.0, Vec::new());
    }
    let inf = f64::INFINITY;
    let mut u = vec![0.0f64; rows + 1]; // row potentials
    let mut v = vec![0.0f64; cols + 1]; // column potentials
    let mut assigned_row = vec![0usize; cols + 1]; // column j -> row (0 = free)
    let mut way = vec![0usize; cols + 1];

    for i in 1..=rows {
        assigned_row[0] = i;
        let mut j0 = 0usize;
        let mut min_slack = vec![inf; cols + 1];
        let mut used = vec![false; cols + 1];
        loop {
            used[j0] = true;
            let i0 = assigned_row[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=cols {
                if used[j] {
                    continue;
                }
                let cur = -weight(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < min_slack[j] {
                    min_slack[j] = cur;
                    way[j] = j0;
                }
                if min_slack[j] < delta {
                    delta = min_slack[j];
                    j1 = j;
                }
            }
            for j in 0..=cols {
                if used[j] {
                    u[assigned_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_slack[j] -= delta;
                }
            }
            j0 = j1;
            if assigned_row[j0] == 0 {
                break;
            }
        }
        // Unwind the augmenting path.
        loop {
            let j1 = way[j0];
            assigned_row[j0] = assigned_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![usize::MAX; rows];
    for j in 1..=cols {
        if assigned_row[j] != 0 {
            row_to_col[assigned_row[j] - 1] = j - 1;
        }
    }
    // Sum the matched weights in sorted order: the objective then depends
    // only on the multiset of matched values, so a matrix and its transpose
    // produce bit-identical objectives (gt/pred swap symmetry) regardless
    // of which orientation the solver ran in.
    let mut matched: Vec<f64> = (0..rows).map(|i| weight(i, row_to_col[i])).collect();
    matched.sort_unstable_by(f64::total_cmp);
    let objective: f64 = matched.iter().sum();
    (objective, row_to_col)
}

/// Solves the assignment over `rows_from..matrix.rows()` and the columns not
/// marked in `banned_cols`, any shape. Returns the objective and, per active
/// row, the assigned original column (`None` when `rows > cols` leaves the
/// row out).
fn solve_partial(
    matrix: &WeightMatrix,
    banned_cols: &[bool],
    rows_from: usize,
) -> (f64, Vec<Option<usize>>) {
    let active_rows: Vec<usize> = (rows_from..matrix.rows()).collect();
    let active_cols: Vec<usize> =
        (0..matrix.cols()).filter(|&j| !banned_cols[j]).collect();
    let n = active_rows.len();
    let m = active_cols.len();
    if n == 0 || m == 0 {
        return (0.0, vec![None; n]);
    }
    let mut assignment = vec![None; n];
    let objective;
    if n <= m {
        let weight = |r: usize, c: usize| matrix.at(active_rows[r], active_cols[c]);
        let (obj, row_to_col) = solve_rows_le_cols(n, m, &weight);
        objective = obj;
        for (r, &c) in row_to_col.iter().enumerate() {
            assignment[r] = Some(active_cols[c]);
        }
    } else {
        // Transpose: assign every column to a distinct row.
        let weight = |c: usize, r: usize| matrix.at(active_rows[r], active_cols[c]);
        let (obj, col_to_row) = solve_rows_le_cols(m, n, &weight);
        objective = obj;
        for (c, &r) in col_to_row.iter().enumerate() {
            assignment[r] = Some(active_cols[c]);
        }
    }
    (objective, assignment)
}

/// Maximum attainable assignment weight, without materialising a matching.
///
/// This is the hot path for windowed metrics, where only the objective of
/// each window matters and the lexicographic refinement of
/// [`max_weight_matching`] would be wasted work.
pub fn max_weight_objective(matrix: &WeightMatrix) -> f64 {
    solve_partial(matrix, &vec![false; matrix.cols()], 0).0
}

/// Maximum-weight assignment with a deterministic choice among optima.
///
/// Among all assignments attaining the maximum total weight (and after
/// discarding zero-weight pairs, which carry no evidence), the returned
/// matching is the one whose row-sorted pair list is lexicographically
/// smallest. Concretely: the lowest row that can be positively matched in
/// *some* optimum is matched, to the lowest column possible, and so on.
///
/// The refinement fixes rows greedily from the top. For each row it first
/// consults the current optimal completion; only columns *smaller* than the
/// current choice require a feasibility re-solve, so rows whose optimal
/// column is already lexicographically minimal cost nothing extra. Weight
/// comparisons use a relative tolerance so that ties produced by equal sums
/// of floating-point weights are honoured.
pub fn max_weight_matching(matrix: &WeightMatrix) -> Matching {
    if matrix.rows() == 0 || matrix.cols() == 0 {
        return Matching::empty();
    }
    let mut banned = vec![false; matrix.cols()];
    let (objective, initial) = solve_partial(matrix, &banned, 0);
    let tolerance = 1e-9 * objective.abs().max(1.0);

    // `completion[i]` for i >= current row: an optimal completion consistent
    // with everything forced so far.
    let mut completion = initial;
    let mut forced_weight = 0.0f64;
    let mut pairs: Vec<(usize, usize)> = Vec::new();

    for row in 0..matrix.rows() {
        let current = completion[row].filter(|&j| matrix.at(row, j) > 0.0);
        let scan_end = current.unwrap_or(matrix.cols());
        let mut chosen = current;
        for col in 0..scan_end {
            if banned[col] || matrix.at(row, col) <= 0.0 {
                continue;
            }
            // Would forcing (row, col) still permit an optimal assignment?
            banned[col] = true;
            let (rest, rest_assignment) = solve_partial(matrix, &banned, row + 1);
            let attainable = forced_weight + matrix.at(row, col) + rest;
            if attainable >= objective - tolerance {
                chosen = Some(col);
                completion[row + 1..].copy_from_slice(&rest_assignment);
                break;
            }
            banned[col] = false;
        }
        match chosen {
            Some(col) => {
                pairs.push((row, col));
                banned[col] = true;
                forced_weight += matrix.at(row, col);
            }
            None => {
                // No optimum matches this row positively; leave it out.
            }
        }
    }

    Matching { pairs, objective }
}

/// Maximum-cardinality matching on a binary overlap matrix, with ties among
/// equal-cardinality matchings broken by `tie_weights` (larger total
/// preferred) and residual ties broken lexicographically.
///
/// Realised as a maximum-weight matching on `b + ε · tie_weights` with
/// `ε < 1 / (1 + Σ tie_weights)`, which is small enough that no amount of
/// tie weight can buy an extra unit of cardinality. The returned
/// `objective` is the cardinality.
pub fn max_cardinality_matching(binary: &WeightMatrix, tie_weights: &WeightMatrix) -> Matching {
    assert_eq!(
        (binary.rows(), binary.cols()),
        (tie_weights.rows(), tie_weights.cols()),
        "tie weights must have the shape of the binary matrix"
    );
    assert!(
        binary.data.iter().all(|&b| b == 0.0 || b == 1.0),
        "cardinality matching needs a 0/1 matrix"
    );
    let tie_total: f64 = tie_weights.data.iter().sum();
    let epsilon = 0.5 / (1.0 + tie_total);
    let mut perturbed = WeightMatrix::zeros(binary.rows(), binary.cols());
    for row in 0..binary.rows() {
        for col in 0..binary.cols() {
            if binary.at(row, col) == 1.0 {
                perturbed.set(row, col, 1.0 + epsilon * tie_weights.at(row, col));
            }
        }
    }
    let solved = max_weight_matching(&perturbed);
    Matching { objective: solved.pairs.len() as f64, pairs: solved.pairs }
}
