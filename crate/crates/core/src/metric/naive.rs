//! The recursion `T̃ = S·T̃` without damping or a direct-trust term.
//!
//! Kept only to show why it is unusable: on a primitive stochastic `S` every
//! column collapses to a constant vector, on acyclic graphs everything
//! vanishes, and on periodic graphs the iteration never settles.

use serde::{Deserialize, Serialize};

use super::matrix::RowNormalizedMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NaiveOutcome {
    /// Converged to columns with identical components.
    Consensus,
    /// Converged to the zero matrix.
    Vanishing,
    /// Converged to something else.
    Other,
    /// No convergence within the iteration budget.
    NotConverged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveRecursionReport {
    pub iterations: usize,
    pub converged: bool,
    pub outcome: NaiveOutcome,
    /// Largest per-column variance of the final iterate.
    pub max_column_variance: f64,
    pub max_entry: f64,
    /// `‖V⁽ᵏ⁺¹⁾ − V⁽ᵏ⁾‖∞` at the last step.
    pub final_change: f64,
    /// First step at which every column variance dropped below `tol`.
    pub variance_below_tol_at: Option<usize>,
}

fn max_column_variance(v: &[f64], n: usize) -> f64 {
    (0..n)
        .map(|j| {
            let mean = (0..n).map(|i| v[i * n + j]).sum::<f64>() / n as f64;
            (0..n).map(|i| (v[i * n + j] - mean).powi(2)).sum::<f64>() / n as f64
        })
        .fold(0.0, f64::max)
}

/// Power-iterates `V ← S·V` from `V = S` and classifies the limit.
pub fn naive_recursion_demo(
    s: &RowNormalizedMatrix,
    tol: f64,
    max_iter: usize,
) -> NaiveRecursionReport {
    let n = s.n();
    let mut cur = s.to_dense();
    let mut next = vec![0.0; n * n];
    let mut iterations = 0;
    let mut converged = false;
    let mut final_change = f64::INFINITY;
    let mut variance_below_tol_at = (max_column_variance(&cur, n) < tol).then_some(0);
    while iterations < max_iter {
        for i in 0..n {
            let out = &mut next[i * n..(i + 1) * n];
            out.iter_mut().for_each(|x| *x = 0.0);
            for &(l, w) in s.row(i) {
                if w == 0.0 {
                    continue;
                }
                for (o, &c) in out.iter_mut().zip(&cur[l * n..(l + 1) * n]) {
                    *o += w * c;
                }
            }
        }
        final_change = next
            .iter()
            .zip(&cur)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        std::mem::swap(&mut cur, &mut next);
        iterations += 1;
        if variance_below_tol_at.is_none() && max_column_variance(&cur, n) < tol {
            variance_below_tol_at = Some(iterations);
        }
        if final_change < tol {
            converged = true;
            break;
        }
    }
    let variance = max_column_variance(&cur, n);
    let max_entry = cur.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    let outcome = if !converged {
        NaiveOutcome::NotConverged
    } else if max_entry < tol {
        NaiveOutcome::Vanishing
    } else if variance < tol {
        NaiveOutcome::Consensus
    } else {
        NaiveOutcome::Other
    };
    NaiveRecursionReport {
        iterations,
        converged,
        outcome,
        max_column_variance: variance,
        max_entry,
        final_change,
        variance_below_tol_at,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::TrustGraph;
    use crate::metric::{normalize_direct, NormalizationMode};

    fn norm(n: usize, edges: &[(usize, usize)]) -> RowNormalizedMatrix {
        let g = TrustGraph::from_edges(n, edges.iter().map(|&(i, j)| (i, j, 1.0))).unwrap();
        normalize_direct(&g, NormalizationMode::Strict)
    }

    #[test]
    fn primitive_matrix_reaches_consensus() {
        // Triangle plus a chord: cycle lengths 2 and 3 make it aperiodic.
        let s = norm(3, &[(0, 1), (1, 2), (2, 0), (1, 0)]);
        let r = naive_recursion_demo(&s, 1e-10, 10_000);
        assert_eq!(r.outcome, NaiveOutcome::Consensus);
        assert!(r.max_column_variance < 1e-10);
        assert!(r.variance_below_tol_at.is_some());
    }

    #[test]
    fn chain_vanishes() {
        let s = norm(3, &[(0, 1), (1, 2)]);
        let r = naive_recursion_demo(&s, 1e-12, 100);
        assert_eq!(r.outcome, NaiveOutcome::Vanishing);
        assert!(r.iterations <= 3);
    }

    #[test]
    fn bipartite_two_cycle_oscillates() {
        let s = norm(2, &[(0, 1), (1, 0)]);
        let r = naive_recursion_demo(&s, 1e-8, 1_000);
        assert_eq!(r.outcome, NaiveOutcome::NotConverged);
        assert_eq!(r.final_change, 1.0);
    }
}
