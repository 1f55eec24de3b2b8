//! Trust dynamics: utility of a neighbour's output, the trust update rule, and
//! the mean-field self-consistency map whose fixed points describe the
//! equilibria of the dynamics.

use serde::{Deserialize, Serialize};

use crate::error::{check_beta, check_unit, Error, Result};
use crate::graph::TrustGraph;
use crate::metric::{
    indirect_trust, normalize_direct, normalize_indirect, MetricConfig, NormalizationMode,
    RowNormalizedMatrix, Strategy,
};

/// Which branch structure the trust update uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateRule {
    /// Increase when `u > u_thr` or `−u_thr ≤ u ≤ 0`; decrease when
    /// `u < −u_thr` or `0 < u ≤ u_thr`.
    #[default]
    Verbatim,
    /// Increase iff `u > 0`, by `(1 − γ)|u|`.
    SignFollowsUtility,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsParams {
    /// Memory weight of the previous trust value.
    pub gamma: f64,
    pub u_thr: f64,
    pub beta: f64,
    /// Probability that an agent signals its rating in a step.
    pub eta: f64,
    pub rule: UpdateRule,
}

impl Default for DynamicsParams {
    fn default() -> Self {
        Self {
            gamma: 0.75,
            u_thr: 0.5,
            beta: crate::metric::DEFAULT_BETA,
            eta: 0.1,
            rule: UpdateRule::Verbatim,
        }
    }
}

impl DynamicsParams {
    pub fn validate(&self) -> Result<()> {
        check_unit("gamma", self.gamma)?;
        check_unit("eta", self.eta)?;
        check_beta(self.beta)?;
        if !self.u_thr.is_finite() {
            return Err(Error::invalid("u_thr must be finite"));
        }
        Ok(())
    }
}

/// Two opposite tastes, one per agent, each exactly `+1` or `−1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileVector(Vec<f64>);

impl ProfileVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|&&v| v != 1.0 && v != -1.0) {
            return Err(Error::invalid(format!("profile entries must be ±1, got {bad}")));
        }
        Ok(Self(values))
    }

    /// First `⌈n/2⌉` agents `+1`, the rest `−1`.
    pub fn split_half(n: usize) -> Self {
        Self((0..n).map(|i| if i < n.div_ceil(2) { 1.0 } else { -1.0 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn same(&self, i: usize, j: usize) -> bool {
        self.0[i] == self.0[j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// What agent `i` learns from neighbour `j` about the current object.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NeighbourOutput {
    /// `j` revealed its own rating.
    Signalled(f64),
    /// The system's prediction for `j`.
    Predicted(f64),
}

impl NeighbourOutput {
    pub fn value(self) -> f64 {
        match self {
            NeighbourOutput::Signalled(v) | NeighbourOutput::Predicted(v) => v,
        }
    }
}

/// `u = 1 − |r_i − x|` where `x` is the neighbour's rating or prediction.
pub fn utility(own_rating: f64, output: NeighbourOutput) -> f64 {
    1.0 - (own_rating - output.value()).abs()
}

/// One trust update followed by clamping to `[0, 1]`.
pub fn update_trust(trust: f64, u: f64, params: &DynamicsParams) -> Result<f64> {
    check_unit("trust", trust)?;
    if !(-1.0..=1.0).contains(&u) {
        return Err(Error::invalid(format!("utility must lie in [-1, 1], got {u}")));
    }
    check_unit("gamma", params.gamma)?;
    Ok(apply_update(trust, u, params.gamma, params.u_thr, params.rule))
}

#[inline]
pub(crate) fn apply_update(trust: f64, u: f64, gamma: f64, u_thr: f64, rule: UpdateRule) -> f64 {
    let increase = match rule {
        UpdateRule::Verbatim => u > u_thr || (-u_thr..=0.0).contains(&u),
        UpdateRule::SignFollowsUtility => u > 0.0,
    };
    let step = (1.0 - gamma) * u.abs();
    let raw = if increase {
        gamma * trust + step
    } else {
        gamma * trust - step
    };
    raw.clamp(0.0, 1.0)
}

/// Expected utility of `i` from neighbour `j` when `j` signals with
/// probability `η` and is otherwise replaced by its expected prediction
/// `Σ_k S̃_jk π_k`.
pub fn expected_utility(
    profiles: &ProfileVector,
    trust: &RowNormalizedMatrix,
    eta: f64,
    i: usize,
    j: usize,
) -> f64 {
    let pi = profiles.get(i);
    let expected_prediction: f64 = trust
        .row(j)
        .iter()
        .map(|&(k, w)| w * profiles.get(k))
        .sum();
    eta * (1.0 - (pi - profiles.get(j)).abs()) + (1.0 - eta) * (1.0 - (pi - expected_prediction).abs())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldConfig {
    pub normalization: NormalizationMode,
    pub metric: MetricConfig,
}

impl Default for MeanFieldConfig {
    fn default() -> Self {
        Self {
            normalization: NormalizationMode::Bootstrap,
            metric: MetricConfig::with_strategy(Strategy::Exact),
        }
    }
}

/// `S̃` for the current trust matrix: direct normalisation, indirect trust,
/// neighbour-restricted normalisation.
pub fn normalized_indirect_trust(
    trust: &TrustGraph,
    beta: f64,
    normalization: NormalizationMode,
    metric: &MetricConfig,
) -> Result<RowNormalizedMatrix> {
    let s = normalize_direct(trust, normalization);
    let t = indirect_trust(&s, beta, metric)?;
    Ok(normalize_indirect(&t))
}

/// Applies the equilibrium condition to every structural link:
/// `T'_ij = clamp(u_ij(S̃(T)), 0, 1)`.
pub fn mean_field_map(
    trust: &TrustGraph,
    profiles: &ProfileVector,
    eta: f64,
    beta: f64,
    cfg: &MeanFieldConfig,
) -> Result<TrustGraph> {
    check_unit("eta", eta)?;
    if profiles.len() != trust.n_agents() {
        return Err(Error::invalid(format!(
            "{} profiles for {} agents",
            profiles.len(),
            trust.n_agents()
        )));
    }
    let st = normalized_indirect_trust(trust, beta, cfg.normalization, &cfg.metric)?;
    Ok(trust.map_weights(|i, j, _| expected_utility(profiles, &st, eta, i, j)))
}

/// `max |f(T)_ij − T_ij|` over structural links.
pub fn fixed_point_residual(
    trust: &TrustGraph,
    profiles: &ProfileVector,
    eta: f64,
    beta: f64,
    cfg: &MeanFieldConfig,
) -> Result<f64> {
    let mapped = mean_field_map(trust, profiles, eta, beta, cfg)?;
    Ok(trust
        .links()
        .zip(mapped.links())
        .map(|((_, _, a), (_, _, b))| (a - b).abs())
        .fold(0.0, f64::max))
}

/// The configuration with trust 1 between same-profile neighbours and 0
/// across profiles, on the structure of `g`.
pub fn polarized_configuration(g: &TrustGraph, profiles: &ProfileVector) -> TrustGraph {
    g.map_weights(|i, j, _| if profiles.same(i, j) { 1.0 } else { 0.0 })
}
