use serde::{Deserialize, Serialize};

use super::matrix::{IndirectTrustMatrix, RowKind, RowNormalizedMatrix};
use super::DEFAULT_DROP_TOL;
use crate::graph::TrustGraph;

/// Treatment of agents whose outgoing trust sums to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizationMode {
    /// Zero rows stay zero.
    Strict,
    /// Zero rows become uniform over structural neighbours, so information
    /// can flow before any trust exists.
    Bootstrap,
}

/// Which columns form the denominator when normalising indirect trust.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndirectDenominator {
    /// Structural neighbours `N_i` only; the row is supported on `N_i`.
    Neighbours,
    /// Every agent `j ≠ i` with `T̃_ij` above the drop tolerance.
    Reach,
}

/// `S_ij = T_ij / Σ_{k∈N_i} T_ik`.
pub fn normalize_direct(g: &TrustGraph, mode: NormalizationMode) -> RowNormalizedMatrix {
    let n = g.n_agents();
    let mut rows = Vec::with_capacity(n);
    let mut zero_row = Vec::with_capacity(n);
    for i in 0..n {
        let row = g.row(i);
        let sum: f64 = row.iter().map(|&(_, w)| w).sum();
        if sum > 0.0 {
            rows.push(row.iter().map(|&(j, w)| (j, w / sum)).collect());
            zero_row.push(false);
            continue;
        }
        match mode {
            NormalizationMode::Bootstrap if !row.is_empty() => {
                let u = 1.0 / row.len() as f64;
                rows.push(row.iter().map(|&(j, _)| (j, u)).collect());
                zero_row.push(false);
            }
            _ => {
                rows.push(row.iter().map(|&(j, _)| (j, 0.0)).collect());
                zero_row.push(true);
            }
        }
    }
    RowNormalizedMatrix {
        rows,
        zero_row,
        kind: RowKind::Direct(mode),
    }
}

/// `S̃_ij = T̃_ij / Σ_{k∈N_i} T̃_ik`, supported on the structural neighbours.
pub fn normalize_indirect(t: &IndirectTrustMatrix) -> RowNormalizedMatrix {
    normalize_indirect_with(t, IndirectDenominator::Neighbours, DEFAULT_DROP_TOL)
}

pub fn normalize_indirect_with(
    t: &IndirectTrustMatrix,
    denominator: IndirectDenominator,
    drop_tol: f64,
) -> RowNormalizedMatrix {
    let n = t.n();
    let mut rows = Vec::with_capacity(n);
    let mut zero_row = Vec::with_capacity(n);
    for i in 0..n {
        let mut row: Vec<(usize, f64)> = match denominator {
            IndirectDenominator::Neighbours => {
                t.neighbours(i).iter().map(|&j| (j, t.get(i, j))).collect()
            }
            IndirectDenominator::Reach => {
                let mut r = Vec::new();
                t.for_each_in_row(i, |j, v| {
                    if j != i && v > drop_tol {
                        r.push((j, v));
                    }
                });
                r
            }
        };
        let sum: f64 = row.iter().map(|&(_, v)| v).sum();
        if sum > 0.0 {
            for e in &mut row {
                e.1 /= sum;
            }
            zero_row.push(false);
        } else {
            for e in &mut row {
                e.1 = 0.0;
            }
            zero_row.push(true);
        }
        rows.push(row);
    }
    RowNormalizedMatrix {
        rows,
        zero_row,
        kind: RowKind::Indirect(denominator),
    }
}
