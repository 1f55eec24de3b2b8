use serde::{Deserialize, Serialize};

use super::normalize::{IndirectDenominator, NormalizationMode};
use super::solve::Strategy;

/// What produced a [`RowNormalizedMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowKind {
    /// `S`, normalised direct trust.
    Direct(NormalizationMode),
    /// `S̃`, normalised indirect trust.
    Indirect(IndirectDenominator),
}

/// Row-stochastic-or-zero sparse matrix (`S` or `S̃`).
///
/// Rows are sorted by column. A row flagged as zero holds no mass; every other
/// row sums to one.
#[derive(Debug, Clone, PartialEq)]
pub struct RowNormalizedMatrix {
    pub(crate) rows: Vec<Vec<(usize, f64)>>,
    pub(crate) zero_row: Vec<bool>,
    pub(crate) kind: RowKind,
}

impl RowNormalizedMatrix {
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn kind(&self) -> RowKind {
        self.kind
    }

    /// Stored entries of row `i`, including explicit zeros for structural
    /// neighbours without trust.
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn is_zero_row(&self, i: usize) -> bool {
        self.zero_row[i]
    }

    pub fn zero_row_count(&self) -> usize {
        self.zero_row.iter().filter(|&&z| z).count()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = &self.rows[i];
        row.binary_search_by_key(&j, |&(k, _)| k)
            .map(|pos| row[pos].1)
            .unwrap_or(0.0)
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.rows[i].iter().map(|&(_, v)| v).sum()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n();
        let mut out = vec![0.0; n * n];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                out[i * n + j] = v;
            }
        }
        out
    }

    /// Builds a matrix directly from sparse rows. Rows are sorted, zero rows
    /// are detected, and non-zero rows are rescaled to sum to one.
    pub fn from_rows(mut rows: Vec<Vec<(usize, f64)>>, kind: RowKind) -> Self {
        let mut zero_row = Vec::with_capacity(rows.len());
        for row in &mut rows {
            row.sort_unstable_by_key(|&(j, _)| j);
            let sum: f64 = row.iter().map(|&(_, v)| v).sum();
            if sum > 0.0 {
                for e in row.iter_mut() {
                    e.1 /= sum;
                }
                zero_row.push(false);
            } else {
                zero_row.push(true);
            }
        }
        Self {
            rows,
            zero_row,
            kind,
        }
    }
}

/// How an [`IndirectTrustMatrix`] was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveInfo {
    pub beta: f64,
    pub strategy: Strategy,
    /// Iterations for the iterative solver, walk cutoff `L` for the truncated
    /// series, zero for the exact solve.
    pub iterations: usize,
    /// `‖T̃ − S − βS·T̃‖∞` over computed rows. For a truncated run restricted
    /// to some rows this is the analytic bound `β^L` instead.
    pub residual: f64,
    pub converged: bool,
    /// `β^L / (1 − β)` for truncated runs.
    pub truncation_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Storage {
    Dense(Vec<f64>),
    Sparse(Vec<Vec<(usize, f64)>>),
}

/// Indirect trust `T̃`. Entries are nonnegative and bounded by `1/(1 − β)`
/// but, unlike direct trust, may exceed one.
#[derive(Debug, Clone, PartialEq)]
pub struct IndirectTrustMatrix {
    pub(crate) n: usize,
    pub(crate) storage: Storage,
    // Structural neighbour sets carried over from `S`; the denominator of the
    // neighbour-restricted normalisation.
    pub(crate) support: Vec<Vec<usize>>,
    // Rows actually computed (truncated runs on a subset of sources).
    pub(crate) computed: Option<Vec<bool>>,
    pub(crate) info: SolveInfo,
}

impl IndirectTrustMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn info(&self) -> &SolveInfo {
        &self.info
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    pub fn is_row_computed(&self, i: usize) -> bool {
        self.computed.as_ref().map_or(true, |c| c[i])
    }

    /// Structural neighbours of `i` in the graph `S` came from.
    pub fn neighbours(&self, i: usize) -> &[usize] {
        &self.support[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match &self.storage {
            Storage::Dense(d) => d[i * self.n + j],
            Storage::Sparse(rows) => {
                let row = &rows[i];
                row.binary_search_by_key(&j, |&(k, _)| k)
                    .map(|pos| row[pos].1)
                    .unwrap_or(0.0)
            }
        }
    }

    /// Non-zero entries of row `i` in column order.
    pub fn row_entries(&self, i: usize) -> Vec<(usize, f64)> {
        match &self.storage {
            Storage::Dense(d) => d[i * self.n..(i + 1) * self.n]
                .iter()
                .enumerate()
                .filter(|&(_, &v)| v != 0.0)
                .map(|(j, &v)| (j, v))
                .collect(),
            Storage::Sparse(rows) => rows[i].clone(),
        }
    }

    /// Calls `f(j, value)` for every stored entry of row `i` without
    /// allocating.
    pub fn for_each_in_row<F: FnMut(usize, f64)>(&self, i: usize, mut f: F) {
        match &self.storage {
            Storage::Dense(d) => {
                for (j, &v) in d[i * self.n..(i + 1) * self.n].iter().enumerate() {
                    if v != 0.0 {
                        f(j, v);
                    }
                }
            }
            Storage::Sparse(rows) => {
                for &(j, v) in &rows[i] {
                    f(j, v);
                }
            }
        }
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        match &self.storage {
            Storage::Dense(d) => d.clone(),
            Storage::Sparse(rows) => {
                let mut out = vec![0.0; self.n * self.n];
                for (i, row) in rows.iter().enumerate() {
                    for &(j, v) in row {
                        out[i * self.n + j] = v;
                    }
                }
                out
            }
        }
    }

    pub fn max_entry(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.n {
            self.for_each_in_row(i, |_, v| m = m.max(v));
        }
        m
    }

    pub fn min_entry(&self) -> f64 {
        let mut m = f64::INFINITY;
        match &self.storage {
            Storage::Dense(d) => d.iter().for_each(|&v| m = m.min(v)),
            Storage::Sparse(rows) => rows
                .iter()
                .flat_map(|r| r.iter())
                .for_each(|&(_, v)| m = m.min(v)),
        }
        if m.is_infinite() {
            0.0
        } else {
            m
        }
    }
}
