//! External clustering quality indicators: accuracy under the optimal
//! label matching, normalized mutual information, adjusted Rand index, and
//! the pairwise F-score, all built on one contingency table. Label values
//! are remapped to dense ids internally, so every indicator is invariant
//! under relabeling of either argument.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Cross-tabulation of two labelings over the same samples.
#[derive(Clone, Debug)]
pub struct Contingency {
    pub table: Vec<Vec<usize>>,
    pub row_totals: Vec<usize>,
    pub col_totals: Vec<usize>,
    pub n: usize,
}

fn dense_ids(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut distinct: Vec<usize> = labels.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let ids = labels
        .iter()
        .map(|l| distinct.binary_search(l).expect("value came from the same slice"))
        .collect();
    (ids, distinct.len())
}

impl Contingency {
    pub fn from_labels(y_true: &[usize], y_pred: &[usize]) -> Result<Self> {
        if y_true.len() != y_pred.len() {
            return Err(Error::LengthMismatch { left: y_true.len(), right: y_pred.len() });
        }
        if y_true.is_empty() {
            return Err(Error::BadLabels("label vectors are empty".into()));
        }
        let (rows, r) = dense_ids(y_true);
        let (cols, c) = dense_ids(y_pred);
        let mut table = vec![vec![0usize; c]; r];
        for (&i, &j) in rows.iter().zip(&cols) {
            table[i][j] += 1;
        }
        let row_totals: Vec<usize> = table.iter().map(|row| row.iter().sum()).collect();
        let mut col_totals = vec![0usize; c];
        for row in &table {
            for (j, &v) in row.iter().enumerate() {
                col_totals[j] += v;
            }
        }
        Ok(Contingency { table, row_totals, col_totals, n: y_true.len() })
    }

    pub fn check_invariants(&self) -> Result<()> {
        let total: usize = self.row_totals.iter().sum();
        let col_sum: usize = self.col_totals.iter().sum();
        let cells: usize = self.table.iter().map(|r| r.iter().sum::<usize>()).sum();
        if total != self.n || col_sum != self.n || cells != self.n {
            return Err(Error::InvariantViolation(format!(
                "contingency totals {total}/{col_sum}/{cells} disagree with n = {}",
                self.n
            )));
        }
        for (i, row) in self.table.iter().enumerate() {
            if row.iter().sum::<usize>() != self.row_totals[i] {
                return Err(Error::InvariantViolation(format!("row marginal {i} inconsistent")));
            }
        }
        Ok(())
    }
}

/// Minimum-cost perfect matching on a square cost matrix; `perm[i]` is the
/// column assigned to row i. O(k³) shortest augmenting paths with
/// potentials.
pub fn hungarian(cost: &DMatrix<f64>) -> Result<Vec<usize>> {
    let n = cost.nrows();
    if cost.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "assignment needs a square cost matrix, got {}x{}",
            n,
            cost.ncols()
        )));
    }
    if cost.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("assignment cost matrix".into()));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    // 1-indexed arrays; row/column 0 is the virtual source of each
    // augmenting search. p[j] holds the row matched to column j.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1, j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0usize; n];
    for j in 1..=n {
        perm[p[j] - 1] = j - 1;
    }
    Ok(perm)
}

/// Fraction of samples matched under the best one-to-one mapping of
/// predicted clusters onto true clusters (the contingency padded square,
/// matching found by `hungarian` on the negated counts).
pub fn accuracy(y_true: &[usize], y_pred: &[usize]) -> Result<f64> {
    let ct = Contingency::from_labels(y_true, y_pred)?;
    let side = ct.table.len().max(ct.col_totals.len());
    let mut cost = DMatrix::zeros(side, side);
    for (i, row) in ct.table.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            cost[(i, j)] = -(v as f64);
        }
    }
    let perm = hungarian(&cost)?;
    let mut matched = 0usize;
    for (i, row) in ct.table.iter().enumerate() {
        let j = perm[i];
        if j < row.len() {
            matched += row[j];
        }
    }
    Ok(matched as f64 / ct.n as f64)
}

/// Which entropy normalizes mutual information.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NmiNormalization {
    /// sqrt(H(U)·H(V)), the default.
    Geometric,
    /// max(H(U), H(V)).
    Max,
}

/// Normalized mutual information with natural logs. Two zero-entropy
/// partitions are identical constant partitions, scored 1; a single
/// zero-entropy side carries no information, scored 0.
pub fn nmi(y_true: &[usize], y_pred: &[usize]) -> Result<f64> {
    nmi_with(y_true, y_pred, NmiNormalization::Geometric)
}

pub fn nmi_with(
    y_true: &[usize],
    y_pred: &[usize],
    normalization: NmiNormalization,
) -> Result<f64> {
    let ct = Contingency::from_labels(y_true, y_pred)?;
    let n = ct.n as f64;
    let entropy = |totals: &[usize]| -> f64 {
        totals
            .iter()
            .filter(|&&t| t > 0)
            .map(|&t| {
                let p = t as f64 / n;
                -p * p.ln()
            })
            .sum()
    };
    let hu: f64 = entropy(&ct.row_totals);
    let hv: f64 = entropy(&ct.col_totals);
    if hu <= 0.0 && hv <= 0.0 {
        return Ok(1.0);
    }
    if hu <= 0.0 || hv <= 0.0 {
        return Ok(0.0);
    }
    let mut mi = 0.0;
    for (i, row) in ct.table.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v > 0 {
                let pij = v as f64 / n;
                mi += pij
                    * (n * v as f64 / (ct.row_totals[i] as f64 * ct.col_totals[j] as f64)).ln();
            }
        }
    }
    let norm = match normalization {
        NmiNormalization::Geometric => (hu * hv).sqrt(),
        NmiNormalization::Max => hu.max(hv),
    };
    Ok((mi / norm).clamp(0.0, 1.0))
}

fn choose2(x: usize) -> f64 {
    (x as f64) * (x as f64 - 1.0) / 2.0
}

/// Adjusted Rand index via the contingency form. The adjustment's
/// denominator vanishes only when both partitions are degenerate in the
/// same way (all singletons, or one block), where the partitions coincide
/// and the score is 1.
pub fn ari(y_true: &[usize], y_pred: &[usize]) -> Result<f64> {
    let ct = Contingency::from_labels(y_true, y_pred)?;
    let sum_cells: f64 =
        ct.table.iter().flat_map(|r| r.iter()).map(|&v| choose2(v)).sum();
    let sum_rows: f64 = ct.row_totals.iter().map(|&v| choose2(v)).sum();
    let sum_cols: f64 = ct.col_totals.iter().map(|&v| choose2(v)).sum();
    let total = choose2(ct.n);
    if total == 0.0 {
        return Ok(1.0);
    }
    let expected = sum_rows * sum_cols / total;
    let max_index = 0.5 * (sum_rows + sum_cols);
    let denom = max_index - expected;
    if denom == 0.0 {
        return Ok(1.0);
    }
    Ok((sum_cells - expected) / denom)
}

/// Pairwise F-score on same-cluster pair decisions: harmonic mean of
/// precision and recall over all sample pairs. Zero when no pair is
/// predicted (or truly) in a shared cluster.
pub fn pairwise_fscore(y_true: &[usize], y_pred: &[usize]) -> Result<f64> {
    let ct = Contingency::from_labels(y_true, y_pred)?;
    let tp: f64 = ct.table.iter().flat_map(|r| r.iter()).map(|&v| choose2(v)).sum();
    if tp == 0.0 {
        return Ok(0.0);
    }
    let pred_same: f64 = ct.col_totals.iter().map(|&v| choose2(v)).sum();
    let true_same: f64 = ct.row_totals.iter().map(|&v| choose2(v)).sum();
    let precision = tp / pred_same;
    let recall = tp / true_same;
    Ok(2.0 * precision * recall / (precision + recall))
}
