//! Two-profile agent simulation of trust formation.
//!
//! Each step introduces one object that every agent rates with its profile.
//! Each agent signals its rating with probability `η`; for the others the
//! system substitutes the trust-weighted prediction. Every agent then scores
//! each neighbour's output, updates its trust, and `S̃` is recomputed.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    apply_update, normalized_indirect_trust, utility, NeighbourOutput, ProfileVector, UpdateRule,
};
use crate::error::{check_beta, check_unit, Error, Result};
use crate::graph::{generate_random_graph_with, TrustGraph};
use crate::metric::{MetricConfig, NormalizationMode, RowNormalizedMatrix};
use crate::par::Execution;
use crate::recommender::{predict_tw, RatingFunction, RatingScale};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub n_agents: usize,
    pub mean_degree: f64,
    pub eta: f64,
    pub gamma: f64,
    pub beta: f64,
    pub u_thr: f64,
    pub steps: usize,
    pub runs: usize,
    pub seed: u64,
    pub normalization: NormalizationMode,
    pub update_rule: UpdateRule,
    pub metric: MetricConfig,
    #[serde(skip)]
    pub exec: Execution,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            n_agents: 500,
            mean_degree: 7.0,
            eta: 0.1,
            gamma: 0.75,
            beta: crate::metric::DEFAULT_BETA,
            u_thr: 0.5,
            steps: 50,
            runs: 100,
            seed: 0,
            normalization: NormalizationMode::Bootstrap,
            update_rule: UpdateRule::Verbatim,
            metric: MetricConfig::default(),
            exec: Execution::default(),
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_agents < 2 || self.n_agents % 2 != 0 {
            return Err(Error::invalid(format!(
                "n_agents must be even and at least 2, got {}",
                self.n_agents
            )));
        }
        if self.steps == 0 || self.runs == 0 {
            return Err(Error::invalid("steps and runs must be at least 1"));
        }
        check_unit("eta", self.eta)?;
        check_unit("gamma", self.gamma)?;
        check_beta(self.beta)?;
        Ok(())
    }
}

/// Observables after one step (or at `t = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    pub mean_same_trust: f64,
    pub mean_cross_trust: f64,
    /// Trust-weighted utility of this step's outputs under the updated trust.
    pub phi: f64,
    /// Running mean of `phi` over steps `1..=t`.
    pub phi_time_avg: f64,
}

#[derive(Debug, Clone)]
pub struct SimulationState {
    pub t: usize,
    pub trust: TrustGraph,
    pub profiles: ProfileVector,
    pub records: Vec<StepRecord>,
    rng: ChaCha8Rng,
    phi_sum: f64,
}

impl SimulationState {
    /// Fresh population for run `run` of `cfg`: profiles split in half, a
    /// random graph with zero trust, and an RNG on stream `run` of the master
    /// seed.
    pub fn new(cfg: &SimulationConfig, run: u64) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(run);
        let trust = generate_random_graph_with(cfg.n_agents, cfg.mean_degree, &mut rng)?;
        let profiles = ProfileVector::split_half(cfg.n_agents);
        Self::from_parts(trust, profiles, rng)
    }

    /// State over a caller-supplied graph and profiles.
    pub fn with_graph(trust: TrustGraph, profiles: ProfileVector, seed: u64) -> Result<Self> {
        Self::from_parts(trust, profiles, ChaCha8Rng::seed_from_u64(seed))
    }

    fn from_parts(trust: TrustGraph, profiles: ProfileVector, rng: ChaCha8Rng) -> Result<Self> {
        if profiles.len() != trust.n_agents() {
            return Err(Error::invalid("profile count must match agent count"));
        }
        let mut state = Self {
            t: 0,
            trust,
            profiles,
            records: Vec::new(),
            rng,
            phi_sum: 0.0,
        };
        let (same, cross) = state.mean_trust();
        let phi = performance(&state.trust, |_, _| 0.0);
        state.records.push(StepRecord {
            t: 0,
            mean_same_trust: same,
            mean_cross_trust: cross,
            phi,
            phi_time_avg: phi,
        });
        Ok(state)
    }

    /// Mean trust over same-profile and cross-profile structural links.
    pub fn mean_trust(&self) -> (f64, f64) {
        let (mut same, mut ns, mut cross, mut nc) = (0.0, 0usize, 0.0, 0usize);
        for (i, j, w) in self.trust.links() {
            if self.profiles.same(i, j) {
                same += w;
                ns += 1;
            } else {
                cross += w;
                nc += 1;
            }
        }
        let avg = |s: f64, c: usize| if c == 0 { 0.0 } else { s / c as f64 };
        (avg(same, ns), avg(cross, nc))
    }

    pub fn last(&self) -> &StepRecord {
        self.records.last().expect("state always holds the t = 0 record")
    }
}

/// `Φ = (1/n) Σ_i Σ_j u_ij T_ij / Σ_k T_ik`; agents without trust contribute 0.
pub fn performance<F>(trust: &TrustGraph, mut utility_of: F) -> f64
where
    F: FnMut(usize, usize) -> f64,
{
    let n = trust.n_agents();
    if n == 0 {
        return 0.0;
    }
    let mut total = 0.0;
    for i in 0..n {
        let row = trust.row(i);
        let sum: f64 = row.iter().map(|&(_, w)| w).sum();
        if sum <= 0.0 {
            continue;
        }
        total += row
            .iter()
            .filter(|&&(_, w)| w > 0.0)
            .map(|&(j, w)| utility_of(i, j) * w / sum)
            .sum::<f64>();
    }
    total / n as f64
}

/// Advances the simulation by one step.
pub fn step(state: &mut SimulationState, cfg: &SimulationConfig) -> Result<()> {
    let n = state.trust.n_agents();
    let st: RowNormalizedMatrix =
        normalized_indirect_trust(&state.trust, cfg.beta, cfg.normalization, &cfg.metric)?;

    // The object of this step: everyone's rating equals its profile.
    let ratings = RatingFunction::from_triples(
        RatingScale::Binary,
        n,
        1,
        (0..n).map(|i| (i, 0, state.profiles.get(i))),
    )?;
    let signalled: Vec<bool> = (0..n).map(|_| state.rng.gen::<f64>() < cfg.eta).collect();
    let outputs: Vec<NeighbourOutput> = (0..n)
        .map(|j| {
            if signalled[j] {
                NeighbourOutput::Signalled(state.profiles.get(j))
            } else {
                // An agent with no usable trust yields the neutral prediction 0.
                NeighbourOutput::Predicted(predict_tw(&st, &ratings, j, 0).map_or(0.0, |p| p.value))
            }
        })
        .collect();

    let mut utilities: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let r_i = state.profiles.get(i);
        let row = state.trust.row_weights_mut(i);
        let mut u_row = Vec::with_capacity(row.len());
        for (j, w) in row.iter_mut() {
            let u = utility(r_i, outputs[*j]);
            *w = apply_update(*w, u, cfg.gamma, cfg.u_thr, cfg.update_rule);
            u_row.push(u);
        }
        utilities.push(u_row);
    }

    let phi = {
        let trust = &state.trust;
        performance(trust, |i, j| {
            let pos = trust
                .row(i)
                .binary_search_by_key(&j, |&(k, _)| k)
                .expect("utility recorded for every link");
            utilities[i][pos]
        })
    };
    state.t += 1;
    state.phi_sum += phi;
    let (same, cross) = state.mean_trust();
    state.records.push(StepRecord {
        t: state.t,
        mean_same_trust: same,
        mean_cross_trust: cross,
        phi,
        phi_time_avg: state.phi_sum / state.t as f64,
    });
    Ok(())
}

/// One full run: `cfg.steps` steps from a fresh population.
pub fn run_single(cfg: &SimulationConfig, run: u64) -> Result<Vec<StepRecord>> {
    let mut state = SimulationState::new(cfg, run)?;
    for _ in 0..cfg.steps {
        step(&mut state, cfg)?;
    }
    Ok(state.records)
}

/// Mean and standard error over runs at one time step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregatePoint {
    pub t: usize,
    pub mean_same_trust: f64,
    pub mean_cross_trust: f64,
    pub phi: f64,
    pub phi_time_avg: f64,
    pub stderr_same: f64,
    pub stderr_cross: f64,
    pub stderr_phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesResult {
    pub mean_degree: f64,
    pub eta: f64,
    pub runs: usize,
    pub points: Vec<AggregatePoint>,
}

impl TimeSeriesResult {
    pub fn at(&self, t: usize) -> Option<&AggregatePoint> {
        self.points.get(t)
    }

    pub fn last(&self) -> &AggregatePoint {
        self.points.last().expect("series has at least t = 0")
    }

    /// First step whose mean same-profile trust reaches `level`.
    pub fn first_crossing(&self, level: f64) -> Option<usize> {
        self.points
            .iter()
            .find(|p| p.mean_same_trust >= level)
            .map(|p| p.t)
    }
}

fn mean_stderr(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

fn aggregate(cfg: &SimulationConfig, runs: &[Vec<StepRecord>]) -> TimeSeriesResult {
    let steps = runs.first().map_or(0, Vec::len);
    let points = (0..steps)
        .map(|t| {
            let col = |f: fn(&StepRecord) -> f64| runs.iter().map(move |r| f(&r[t]));
            let (same, se_same) = mean_stderr(col(|r| r.mean_same_trust));
            let (cross, se_cross) = mean_stderr(col(|r| r.mean_cross_trust));
            let (phi, se_phi) = mean_stderr(col(|r| r.phi));
            let (phi_avg, _) = mean_stderr(col(|r| r.phi_time_avg));
            AggregatePoint {
                t,
                mean_same_trust: same,
                mean_cross_trust: cross,
                phi,
                phi_time_avg: phi_avg,
                stderr_same: se_same,
                stderr_cross: se_cross,
                stderr_phi: se_phi,
            }
        })
        .collect();
    TimeSeriesResult {
        mean_degree: cfg.mean_degree,
        eta: cfg.eta,
        runs: runs.len(),
        points,
    }
}

/// Runs `cfg.runs` independent runs (in parallel when enabled) and
/// aggregates them per step.
pub fn run(cfg: &SimulationConfig) -> Result<TimeSeriesResult> {
    cfg.validate()?;
    let runs: Vec<Vec<StepRecord>> = cfg
        .exec
        .map(cfg.runs, |r| run_single(cfg, r as u64))
        .into_iter()
        .collect::<Result<_>>()?;
    Ok(aggregate(cfg, &runs))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: SimulationConfig,
    pub degrees: Vec<f64>,
    pub etas: Vec<f64>,
    /// Row-major over `degrees × etas`.
    pub cells: Vec<TimeSeriesResult>,
}

impl SweepResult {
    pub fn cell(&self, d_index: usize, eta_index: usize) -> &TimeSeriesResult {
        &self.cells[d_index * self.etas.len() + eta_index]
    }
}

/// Runs the `degrees × etas` grid with the other parameters of `base`.
///
/// Run `r` uses RNG stream `r` in every cell, so cells share random numbers:
/// for a fixed degree a larger `η` signals in a superset of the steps.
pub fn sweep(base: &SimulationConfig, degrees: &[f64], etas: &[f64]) -> Result<SweepResult> {
    if degrees.is_empty() || etas.is_empty() {
        return Err(Error::invalid("sweep grid must be non-empty"));
    }
    let cells_cfg: Vec<SimulationConfig> = degrees
        .iter()
        .flat_map(|&d| {
            etas.iter().map(move |&eta| SimulationConfig {
                mean_degree: d,
                eta,
                ..base.clone()
            })
        })
        .collect();
    for c in &cells_cfg {
        c.validate()?;
    }
    let runs = base.runs;
    let flat: Vec<Vec<StepRecord>> = base
        .exec
        .map(cells_cfg.len() * runs, |k| {
            run_single(&cells_cfg[k / runs], (k % runs) as u64)
        })
        .into_iter()
        .collect::<Result<_>>()?;
    let cells = cells_cfg
        .iter()
        .zip(flat.chunks(runs))
        .map(|(c, chunk)| aggregate(c, chunk))
        .collect();
    Ok(SweepResult {
        config: base.clone(),
        degrees: degrees.to_vec(),
        etas: etas.to_vec(),
        cells,
    })
}

pub const SWEEP_CSV_HEADER: [&str; 10] = [
    "d",
    "eta",
    "t",
    "mean_same_trust",
    "mean_cross_trust",
    "phi",
    "stderr_same",
    "stderr_cross",
    "stderr_phi",
    "phi_time_avg",
];

/// One row per `(d, η, t)`.
pub fn write_sweep_csv<W: Write>(sweep: &SweepResult, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_CSV_HEADER)?;
    for cell in &sweep.cells {
        for p in &cell.points {
            w.write_record([
                cell.mean_degree.to_string(),
                cell.eta.to_string(),
                p.t.to_string(),
                p.mean_same_trust.to_string(),
                p.mean_cross_trust.to_string(),
                p.phi.to_string(),
                p.stderr_same.to_string(),
                p.stderr_cross.to_string(),
                p.stderr_phi.to_string(),
                p.phi_time_avg.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(same: bool) -> (TrustGraph, ProfileVector) {
        let mut g = TrustGraph::new(2);
        g.connect(0, 1).unwrap();
        g.connect(1, 0).unwrap();
        let p = if same { vec![1.0, 1.0] } else { vec![1.0, -1.0] };
        (g, ProfileVector::new(p).unwrap())
    }

    fn cfg(eta: f64) -> SimulationConfig {
        SimulationConfig {
            n_agents: 2,
            eta,
            ..SimulationConfig::default()
        }
    }

    #[test]
    fn same_profile_pair_gains_quarter_trust() {
        let (g, p) = pair(true);
        let mut s = SimulationState::with_graph(g, p, 1).unwrap();
        step(&mut s, &cfg(1.0)).unwrap();
        assert_eq!(s.trust.weight(0, 1), 0.25);
        assert_eq!(s.trust.weight(1, 0), 0.25);
    }

    #[test]
    fn cross_profile_pair_never_trusts() {
        let (g, p) = pair(false);
        let mut s = SimulationState::with_graph(g, p, 1).unwrap();
        for _ in 0..10 {
            step(&mut s, &cfg(1.0)).unwrap();
            assert_eq!(s.trust.weight(0, 1), 0.0);
            assert_eq!(s.trust.weight(1, 0), 0.0);
        }
    }

    #[test]
    fn silent_strict_population_is_frozen() {
        let c = SimulationConfig {
            n_agents: 40,
            mean_degree: 5.0,
            eta: 0.0,
            normalization: NormalizationMode::Strict,
            ..SimulationConfig::default()
        };
        let mut s = SimulationState::new(&c, 0).unwrap();
        let before = s.trust.clone();
        for _ in 0..3 {
            step(&mut s, &c).unwrap();
        }
        assert_eq!(s.trust, before);
        assert_eq!(s.t, 3);
        assert!(s.records.iter().all(|r| r.phi == 0.0));
    }

    #[test]
    fn performance_examples() {
        let mut g = TrustGraph::new(4);
        g.add_edge(0, 1, 0.5).unwrap();
        let phi = performance(&g, |_, _| 1.0);
        assert_eq!(phi, 0.25);
        assert_eq!(performance(&TrustGraph::new(3), |_, _| 1.0), 0.0);
    }

    #[test]
    fn converged_state_with_full_signalling_has_unit_performance() {
        let mut g = TrustGraph::new(4);
        for &(a, b) in &[(0, 1), (2, 3), (0, 2), (1, 3)] {
            g.connect(a, b).unwrap();
            g.connect(b, a).unwrap();
        }
        let p = ProfileVector::split_half(4);
        let polar = crate::dynamics::polarized_configuration(&g, &p);
        let mut s = SimulationState::with_graph(polar, p, 3).unwrap();
        step(&mut s, &cfg(1.0)).unwrap();
        assert_eq!(s.last().phi, 1.0);
        assert_eq!(s.last().mean_same_trust, 1.0);
        assert_eq!(s.last().mean_cross_trust, 0.0);
    }

    #[test]
    fn full_signalling_same_trust_is_non_decreasing() {
        let c = SimulationConfig {
            n_agents: 60,
            mean_degree: 6.0,
            eta: 1.0,
            steps: 8,
            runs: 1,
            ..SimulationConfig::default()
        };
        let recs = run_single(&c, 0).unwrap();
        assert_eq!(recs[0].phi, 0.0);
        for w in recs.windows(2) {
            assert!(w[1].mean_same_trust >= w[0].mean_same_trust);
            assert!((0.0..=1.0).contains(&w[1].mean_same_trust));
            assert!((-1.0..=1.0).contains(&w[1].phi));
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let c = SimulationConfig {
            n_agents: 50,
            mean_degree: 4.0,
            eta: 0.2,
            steps: 5,
            runs: 3,
            ..SimulationConfig::default()
        };
        let a = run(&c).unwrap();
        let b = run(&c).unwrap();
        assert_eq!(a, b);
        let seq = run(&SimulationConfig {
            exec: Execution::Sequential,
            ..c.clone()
        })
        .unwrap();
        assert_eq!(a, seq);
    }

    #[test]
    fn rejects_odd_population() {
        let c = SimulationConfig {
            n_agents: 11,
            ..SimulationConfig::default()
        };
        assert!(run(&c).is_err());
    }

    #[test]
    fn sweep_csv_shape() {
        let c = SimulationConfig {
            n_agents: 20,
            steps: 2,
            runs: 2,
            ..SimulationConfig::default()
        };
        let s = sweep(&c, &[3.0, 5.0], &[0.1]).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], SWEEP_CSV_HEADER.join(","));
        assert_eq!(lines.len(), 1 + 2 * 3);
    }
}
