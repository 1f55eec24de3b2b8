//! The three strategies for `T̃ = S + βS·T̃`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::matrix::{IndirectTrustMatrix, RowNormalizedMatrix, SolveInfo, Storage};
use super::{DEFAULT_DENSE_THRESHOLD, DEFAULT_DROP_TOL};
use crate::error::{check_beta, Error, Result};
use crate::par::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Direct solve of `(I − βS)·T̃ = S`.
    Exact,
    /// Fixed-point iteration `T̃ ← S + βS·T̃` from `T̃ = S`.
    Iterative,
    /// Geometric series `Σ_{k<L} (βS)^k S`, row by row.
    Truncated,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Exact => "exact",
            Strategy::Iterative => "iterative",
            Strategy::Truncated => "truncated",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Strategy::Exact),
            "iterative" => Ok(Strategy::Iterative),
            "truncated" => Ok(Strategy::Truncated),
            other => Err(Error::invalid(format!("unknown strategy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    pub strategy: Strategy,
    /// Stopping tolerance of the iterative solver, and the truncation-error
    /// target used to pick `L` when `walk_cutoff` is unset.
    pub tol: f64,
    /// Iteration cap; defaults to `10·⌈log(tol)/log(β)⌉`.
    pub max_iter: Option<usize>,
    pub walk_cutoff: Option<usize>,
    /// Sparse rows drop entries below this value.
    pub drop_tol: f64,
    /// Largest agent count for dense storage and the exact solver.
    pub dense_threshold: usize,
    #[serde(skip)]
    pub exec: Execution,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::Iterative,
            tol: 1e-8,
            max_iter: None,
            walk_cutoff: None,
            drop_tol: DEFAULT_DROP_TOL,
            dense_threshold: DEFAULT_DENSE_THRESHOLD,
            exec: Execution::default(),
        }
    }
}

impl MetricConfig {
    pub fn with_strategy(strategy: Strategy) -> Self {
        Self {
            strategy,
            ..Self::default()
        }
    }
}

/// `β^L / (1 − β)`: bound on every entry of the series tail after `L` terms.
pub fn truncation_bound(beta: f64, walk_cutoff: usize) -> f64 {
    beta.powi(walk_cutoff as i32) / (1.0 - beta)
}

/// Smallest `L ≥ 1` with `β^L / (1 − β) < tol`.
pub fn walk_cutoff_for(beta: f64, tol: f64) -> usize {
    if beta <= 0.0 {
        return 1;
    }
    let l = ((tol * (1.0 - beta)).ln() / beta.ln()).floor() as usize + 1;
    let mut l = l.max(1);
    while truncation_bound(beta, l) >= tol {
        l += 1;
    }
    while l > 1 && truncation_bound(beta, l - 1) < tol {
        l -= 1;
    }
    l
}

fn default_max_iter(beta: f64, tol: f64) -> usize {
    if beta <= 0.0 {
        return 1;
    }
    let k = (tol.ln() / beta.ln()).ceil();
    ((10.0 * k) as usize).max(1)
}

/// Computes `T̃` with the strategy selected in `cfg`.
pub fn indirect_trust(
    s: &RowNormalizedMatrix,
    beta: f64,
    cfg: &MetricConfig,
) -> Result<IndirectTrustMatrix> {
    match cfg.strategy {
        Strategy::Exact => indirect_trust_exact(s, beta, cfg),
        Strategy::Iterative => indirect_trust_iterative(s, beta, cfg.tol, cfg.max_iter, cfg),
        Strategy::Truncated => {
            let l = cfg
                .walk_cutoff
                .unwrap_or_else(|| walk_cutoff_for(beta, cfg.tol));
            indirect_trust_truncated(s, beta, l, None, cfg)
        }
    }
}

fn support_of(s: &RowNormalizedMatrix) -> Vec<Vec<usize>> {
    s.rows
        .iter()
        .map(|r| r.iter().map(|&(j, _)| j).collect())
        .collect()
}

/// `T̃ = (I − βS)⁻¹ S` by LU factorisation. Dense; limited to
/// `cfg.dense_threshold` agents.
pub fn indirect_trust_exact(
    s: &RowNormalizedMatrix,
    beta: f64,
    cfg: &MetricConfig,
) -> Result<IndirectTrustMatrix> {
    check_beta(beta)?;
    let n = s.n();
    if n > cfg.dense_threshold {
        return Err(Error::TooLargeForDense {
            n_agents: n,
            threshold: cfg.dense_threshold,
        });
    }
    let mut m = DMatrix::<f64>::identity(n, n);
    let mut rhs = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for &(j, v) in s.row(i) {
            m[(i, j)] -= beta * v;
            rhs[(i, j)] = v;
        }
    }
    let t = m.lu().solve(&rhs).ok_or(Error::Singular)?;
    let mut dense = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            // Round-off can leave tiny negatives where the true value is 0.
            dense[i * n + j] = t[(i, j)].max(0.0);
        }
    }
    let residual = dense_residual(s, &dense, beta, cfg.exec);
    Ok(IndirectTrustMatrix {
        n,
        storage: Storage::Dense(dense),
        support: support_of(s),
        computed: None,
        info: SolveInfo {
            beta,
            strategy: Strategy::Exact,
            iterations: 0,
            residual,
            converged: true,
            truncation_bound: None,
        },
    })
}

/// Fixed-point iteration `T̃⁽ᵏ⁺¹⁾ = S + βS·T̃⁽ᵏ⁾` from `T̃⁽⁰⁾ = S`, stopping when
/// `‖T̃⁽ᵏ⁺¹⁾ − T̃⁽ᵏ⁾‖∞ < tol` or after `max_iter` sweeps. Non-convergence is
/// reported through [`SolveInfo::converged`], not as an error.
pub fn indirect_trust_iterative(
    s: &RowNormalizedMatrix,
    beta: f64,
    tol: f64,
    max_iter: Option<usize>,
    cfg: &MetricConfig,
) -> Result<IndirectTrustMatrix> {
    check_beta(beta)?;
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tol must be positive, got {tol}")));
    }
    let max_iter = max_iter.unwrap_or_else(|| default_max_iter(beta, tol));
    let n = s.n();
    if n <= cfg.dense_threshold {
        iterate_dense(s, beta, tol, max_iter, cfg.exec)
    } else {
        iterate_sparse(s, beta, tol, max_iter, cfg)
    }
}

fn iterate_dense(
    s: &RowNormalizedMatrix,
    beta: f64,
    tol: f64,
    max_iter: usize,
    exec: Execution,
) -> Result<IndirectTrustMatrix> {
    let n = s.n();
    let base = s.to_dense();
    let mut cur = base.clone();
    let mut next = vec![0.0; n * n];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        {
            let cur = &cur;
            let base = &base;
            exec.for_each_chunk(&mut next, n.max(1), |i, out| {
                out.copy_from_slice(&base[i * n..(i + 1) * n]);
                for &(l, v) in s.row(i) {
                    if v == 0.0 {
                        continue;
                    }
                    let w = beta * v;
                    for (o, &c) in out.iter_mut().zip(&cur[l * n..(l + 1) * n]) {
                        *o += w * c;
                    }
                }
            });
        }
        let delta = next
            .iter()
            .zip(&cur)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        std::mem::swap(&mut cur, &mut next);
        iterations += 1;
        if delta < tol {
            converged = true;
            break;
        }
    }
    let residual = dense_residual(s, &cur, beta, exec);
    Ok(IndirectTrustMatrix {
        n,
        storage: Storage::Dense(cur),
        support: support_of(s),
        computed: None,
        info: SolveInfo {
            beta,
            strategy: Strategy::Iterative,
            iterations,
            residual,
            converged,
            truncation_bound: None,
        },
    })
}

fn iterate_sparse(
    s: &RowNormalizedMatrix,
    beta: f64,
    tol: f64,
    max_iter: usize,
    cfg: &MetricConfig,
) -> Result<IndirectTrustMatrix> {
    let n = s.n();
    let mut cur: Vec<Vec<(usize, f64)>> = s
        .rows
        .iter()
        .map(|r| r.iter().copied().filter(|&(_, v)| v != 0.0).collect())
        .collect();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let prev = &cur;
        let next: Vec<Vec<(usize, f64)>> = cfg.exec.map(n, |i| {
            let mut acc = Accumulator::new(n);
            for &(j, v) in s.row(i) {
                acc.add(j, v);
            }
            for &(l, v) in s.row(i) {
                if v == 0.0 {
                    continue;
                }
                for &(j, c) in &prev[l] {
                    acc.add(j, beta * v * c);
                }
            }
            acc.into_sorted(cfg.drop_tol)
        });
        let delta = (0..n)
            .map(|i| sparse_row_diff(&next[i], &cur[i]))
            .fold(0.0f64, f64::max);
        cur = next;
        iterations += 1;
        if delta < tol {
            converged = true;
            break;
        }
    }
    let residual = sparse_residual(s, &cur, beta, cfg.exec);
    Ok(IndirectTrustMatrix {
        n,
        storage: Storage::Sparse(cur),
        support: support_of(s),
        computed: None,
        info: SolveInfo {
            beta,
            strategy: Strategy::Iterative,
            iterations,
            residual,
            converged,
            truncation_bound: None,
        },
    })
}

/// Truncated geometric series `Σ_{k=0}^{L−1} (βS)^k S`, evaluated per source
/// row as repeated sparse row-vector products. Only `source_rows` are
/// computed (all rows when `None`); other rows are left empty. Each entry
/// differs from the exact value by at most `β^L / (1 − β)`.
pub fn indirect_trust_truncated(
    s: &RowNormalizedMatrix,
    beta: f64,
    walk_cutoff: usize,
    source_rows: Option<&[usize]>,
    cfg: &MetricConfig,
) -> Result<IndirectTrustMatrix> {
    check_beta(beta)?;
    if walk_cutoff == 0 {
        return Err(Error::invalid("walk cutoff must be at least 1"));
    }
    let n = s.n();
    let sources: Vec<usize> = match source_rows {
        Some(rows) => {
            if let Some(&bad) = rows.iter().find(|&&i| i >= n) {
                return Err(Error::AgentOutOfRange {
                    index: bad,
                    n_agents: n,
                });
            }
            rows.to_vec()
        }
        None => (0..n).collect(),
    };
    let computed_rows: Vec<Vec<(usize, f64)>> = cfg.exec.map(sources.len(), |k| {
        series_row(s, beta, walk_cutoff, sources[k], cfg.drop_tol)
    });
    let mut rows = vec![Vec::new(); n];
    let mut computed = vec![false; n];
    for (&i, row) in sources.iter().zip(computed_rows) {
        rows[i] = row;
        computed[i] = true;
    }
    let all = computed.iter().all(|&c| c);
    let bound = truncation_bound(beta, walk_cutoff);
    let residual = if all {
        sparse_residual(s, &rows, beta, cfg.exec)
    } else {
        beta.powi(walk_cutoff as i32)
    };
    Ok(IndirectTrustMatrix {
        n,
        storage: Storage::Sparse(rows),
        support: support_of(s),
        computed: if all { None } else { Some(computed) },
        info: SolveInfo {
            beta,
            strategy: Strategy::Truncated,
            iterations: walk_cutoff,
            residual,
            converged: true,
            truncation_bound: Some(bound),
        },
    })
}

fn series_row(
    s: &RowNormalizedMatrix,
    beta: f64,
    walk_cutoff: usize,
    source: usize,
    drop_tol: f64,
) -> Vec<(usize, f64)> {
    let n = s.n();
    let mut total = Accumulator::new(n);
    // Current walk mass vector v_k = e_source · S^(k+1).
    let mut walk = Accumulator::new(n);
    let mut next = Accumulator::new(n);
    for &(j, v) in s.row(source) {
        if v != 0.0 {
            walk.add(j, v);
        }
    }
    let mut coef = 1.0;
    for k in 0..walk_cutoff {
        for &j in &walk.touched {
            total.add(j, coef * walk.values[j]);
        }
        if k + 1 == walk_cutoff || walk.touched.is_empty() {
            break;
        }
        for &l in &walk.touched {
            let m = walk.values[l];
            if m == 0.0 {
                continue;
            }
            for &(j, v) in s.row(l) {
                if v != 0.0 {
                    next.add(j, m * v);
                }
            }
        }
        walk.clear();
        std::mem::swap(&mut walk, &mut next);
        coef *= beta;
        if coef == 0.0 {
            break;
        }
    }
    total.into_sorted(drop_tol)
}

/// Dense scratch vector with a list of touched indices.
struct Accumulator {
    values: Vec<f64>,
    touched: Vec<usize>,
    mark: Vec<bool>,
}

impl Accumulator {
    fn new(n: usize) -> Self {
        Self {
            values: vec![0.0; n],
            touched: Vec::new(),
            mark: vec![false; n],
        }
    }

    #[inline]
    fn add(&mut self, j: usize, x: f64) {
        if !self.mark[j] {
            self.mark[j] = true;
            self.touched.push(j);
        }
        self.values[j] += x;
    }

    fn clear(&mut self) {
        for &j in &self.touched {
            self.values[j] = 0.0;
            self.mark[j] = false;
        }
        self.touched.clear();
    }

    fn into_sorted(mut self, drop_tol: f64) -> Vec<(usize, f64)> {
        self.touched.sort_unstable();
        self.touched
            .iter()
            .map(|&j| (j, self.values[j]))
            .filter(|&(_, v)| v > drop_tol)
            .collect()
    }
}

fn sparse_row_diff(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let (mut p, mut q) = (0, 0);
    let mut m = 0.0f64;
    while p < a.len() || q < b.len() {
        match (a.get(p), b.get(q)) {
            (Some(&(ja, va)), Some(&(jb, vb))) if ja == jb => {
                m = m.max((va - vb).abs());
                p += 1;
                q += 1;
            }
            (Some(&(ja, va)), Some(&(jb, _))) if ja < jb => {
                m = m.max(va.abs());
                p += 1;
            }
            (Some(_), Some(&(_, vb))) => {
                m = m.max(vb.abs());
                q += 1;
            }
            (Some(&(_, va)), None) => {
                m = m.max(va.abs());
                p += 1;
            }
            (None, Some(&(_, vb))) => {
                m = m.max(vb.abs());
                q += 1;
            }
            (None, None) => break,
        }
    }
    m
}

fn dense_residual(s: &RowNormalizedMatrix, t: &[f64], beta: f64, exec: Execution) -> f64 {
    let n = s.n();
    exec.map(n, |i| {
        let mut r: Vec<f64> = t[i * n..(i + 1) * n].to_vec();
        for &(l, v) in s.row(i) {
            r[l] -= v;
            if v == 0.0 {
                continue;
            }
            let w = beta * v;
            for (o, &c) in r.iter_mut().zip(&t[l * n..(l + 1) * n]) {
                *o -= w * c;
            }
        }
        r.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    })
    .into_iter()
    .fold(0.0, f64::max)
}

fn sparse_residual(
    s: &RowNormalizedMatrix,
    rows: &[Vec<(usize, f64)>],
    beta: f64,
    exec: Execution,
) -> f64 {
    let n = s.n();
    exec.map(n, |i| {
        let mut r = vec![0.0; n];
        for &(j, v) in &rows[i] {
            r[j] += v;
        }
        for &(l, v) in s.row(i) {
            r[l] -= v;
            if v == 0.0 {
                continue;
            }
            for &(j, c) in &rows[l] {
                r[j] -= beta * v * c;
            }
        }
        r.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    })
    .into_iter()
    .fold(0.0, f64::max)
}

/// `‖T̃ − S − βS·T̃‖∞` (max absolute entry), recomputed from scratch.
pub fn defining_identity_residual(
    s: &RowNormalizedMatrix,
    t: &IndirectTrustMatrix,
    beta: f64,
) -> f64 {
    let dense = t.to_dense();
    dense_residual(s, &dense, beta, Execution::Sequential)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::TrustGraph;
    use crate::metric::{normalize_direct, NormalizationMode};
    use approx::assert_abs_diff_eq;

    fn norm(edges: &[(usize, usize)], n: usize) -> RowNormalizedMatrix {
        let g = TrustGraph::from_edges(n, edges.iter().map(|&(i, j)| (i, j, 1.0))).unwrap();
        normalize_direct(&g, NormalizationMode::Strict)
    }

    fn cfg() -> MetricConfig {
        MetricConfig::default()
    }

    #[test]
    fn two_cycle_closed_form() {
        // Walks 0→1 have odd length: Σ β^(2m) = 1/(1−β²); walks 0→0 even: β/(1−β²).
        let s = norm(&[(0, 1), (1, 0)], 2);
        let b: f64 = 0.8;
        let t = indirect_trust_exact(&s, b, &cfg()).unwrap();
        assert_abs_diff_eq!(t.get(0, 1), 1.0 / (1.0 - b * b), epsilon = 1e-12);
        assert_abs_diff_eq!(t.get(0, 0), b / (1.0 - b * b), epsilon = 1e-12);
        assert!(t.info().residual < 1e-10);

        let it = indirect_trust_iterative(&s, b, 1e-12, None, &cfg()).unwrap();
        assert!(it.info().converged);
        assert_abs_diff_eq!(it.get(0, 1), 1.0 / (1.0 - b * b), epsilon = 1e-10);
    }

    #[test]
    fn chain_has_single_walks() {
        let s = norm(&[(0, 1), (1, 2)], 3);
        let t = indirect_trust_exact(&s, 0.8, &cfg()).unwrap();
        assert_abs_diff_eq!(t.get(0, 2), 0.8, epsilon = 1e-14);
        assert_abs_diff_eq!(t.get(0, 1), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(t.get(1, 2), 1.0, epsilon = 1e-14);
        assert_eq!(t.get(2, 0), 0.0);
    }

    #[test]
    fn beta_zero_returns_s() {
        let s = norm(&[(0, 1), (1, 2), (2, 0), (0, 2)], 3);
        let dense = s.to_dense();
        let t = indirect_trust_exact(&s, 0.0, &cfg()).unwrap();
        assert_eq!(t.to_dense(), dense);
        let it = indirect_trust_iterative(&s, 0.0, 1e-8, None, &cfg()).unwrap();
        assert_eq!(it.to_dense(), dense);
        let tr = indirect_trust_truncated(&s, 0.0, 1, None, &cfg()).unwrap();
        assert_eq!(tr.to_dense(), dense);
    }

    #[test]
    fn zero_iterations_returns_s_unconverged() {
        let s = norm(&[(0, 1), (1, 0)], 2);
        let it = indirect_trust_iterative(&s, 0.8, 1e-8, Some(0), &cfg()).unwrap();
        assert!(!it.info().converged);
        assert_eq!(it.info().iterations, 0);
        assert_eq!(it.to_dense(), s.to_dense());
    }

    #[test]
    fn truncated_chain_cutoffs() {
        let s = norm(&[(0, 1), (1, 2), (2, 3)], 4);
        let l2 = indirect_trust_truncated(&s, 0.8, 2, None, &cfg()).unwrap();
        assert_eq!(l2.get(0, 3), 0.0);
        let l3 = indirect_trust_truncated(&s, 0.8, 3, None, &cfg()).unwrap();
        assert_abs_diff_eq!(l3.get(0, 3), 0.64, epsilon = 1e-15);
        let l1 = indirect_trust_truncated(&s, 0.8, 1, None, &cfg()).unwrap();
        assert_eq!(l1.to_dense(), s.to_dense());
    }

    #[test]
    fn truncated_source_rows_only() {
        let s = norm(&[(0, 1), (1, 2), (2, 0)], 3);
        let t = indirect_trust_truncated(&s, 0.5, 40, Some(&[1]), &cfg()).unwrap();
        assert!(t.is_row_computed(1));
        assert!(!t.is_row_computed(0));
        assert!(t.row_entries(0).is_empty());
        assert!(!t.row_entries(1).is_empty());
    }

    #[test]
    fn rejects_bad_beta_and_large_dense() {
        let s = norm(&[(0, 1)], 2);
        assert!(indirect_trust_exact(&s, 1.0, &cfg()).is_err());
        assert!(indirect_trust_exact(&s, -0.1, &cfg()).is_err());
        assert!(indirect_trust_iterative(&s, 1.0, 1e-8, None, &cfg()).is_err());
        let small = MetricConfig {
            dense_threshold: 1,
            ..cfg()
        };
        assert!(matches!(
            indirect_trust_exact(&s, 0.5, &small),
            Err(Error::TooLargeForDense { .. })
        ));
    }

    #[test]
    fn sparse_iterative_matches_dense() {
        let s = norm(&[(0, 1), (1, 2), (2, 0), (0, 2), (3, 0), (2, 3)], 4);
        let dense = indirect_trust_iterative(&s, 0.7, 1e-12, None, &cfg()).unwrap();
        let sparse_cfg = MetricConfig {
            dense_threshold: 2,
            drop_tol: 0.0,
            ..cfg()
        };
        let sparse = indirect_trust_iterative(&s, 0.7, 1e-12, None, &sparse_cfg).unwrap();
        assert!(!sparse.is_dense());
        for i in 0..4 {
            for j in 0..4 {
                assert_abs_diff_eq!(dense.get(i, j), sparse.get(i, j), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn walk_cutoff_is_minimal() {
        for &b in &[0.1, 0.5, 0.8, 0.85, 0.99] {
            for &tol in &[1e-4, 1e-8, 1e-10] {
                let l = walk_cutoff_for(b, tol);
                assert!(truncation_bound(b, l) < tol);
                assert!(l == 1 || truncation_bound(b, l - 1) >= tol);
            }
        }
        assert_eq!(walk_cutoff_for(0.0, 1e-10), 1);
    }
}
