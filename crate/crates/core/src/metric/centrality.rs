use serde::{Deserialize, Serialize};

use crate::error::{check_beta, Error, Result};
use crate::graph::TrustGraph;

/// Global PageRank-style score per agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityVector {
    pub scores: Vec<f64>,
    pub damping: f64,
    pub iterations: usize,
    pub residual: f64,
}

const RESIDUAL_TARGET: f64 = 1e-10;
const MAX_ITER: usize = 100_000;

/// Solves `c = βPc + (1 − β)·1` by Jacobi iteration, with
/// `P_ij = 1/|N_j|` when `j` links to `i`. Links are taken from the unweighted
/// structural graph. Agents without out-links spread their score uniformly.
pub fn global_centrality(g: &TrustGraph, beta: f64) -> Result<CentralityVector> {
    check_beta(beta)?;
    let n = g.n_agents();
    if n == 0 {
        return Err(Error::Empty("graph has no agents".into()));
    }
    let apply = |c: &[f64], out: &mut [f64]| {
        out.iter_mut().for_each(|x| *x = 0.0);
        let mut dangling = 0.0;
        for (j, &cj) in c.iter().enumerate() {
            let deg = g.out_degree(j);
            if deg == 0 {
                dangling += cj;
                continue;
            }
            let share = cj / deg as f64;
            for i in g.neighbours(j) {
                out[i] += share;
            }
        }
        let spread = dangling / n as f64;
        for (o, _) in out.iter_mut().zip(0..n) {
            *o = beta * (*o + spread) + (1.0 - beta);
        }
    };

    let mut c = vec![1.0; n];
    let mut next = vec![0.0; n];
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    while iterations < MAX_ITER {
        apply(&c, &mut next);
        // next − c is exactly the residual of the current iterate.
        residual = next
            .iter()
            .zip(&c)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if residual < RESIDUAL_TARGET {
            break;
        }
        std::mem::swap(&mut c, &mut next);
        iterations += 1;
    }
    Ok(CentralityVector {
        scores: c,
        damping: beta,
        iterations,
        residual,
    })
}
