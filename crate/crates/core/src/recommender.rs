//! Rating prediction: trust-weighted (TW), user-based collaborative filtering
//! (CF) and the simple item average (SA).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::RowNormalizedMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RatingScale {
    /// `{−1, +1}`; predictions live in `[−1, 1]`.
    Binary,
    /// Integer stars `min..=max`.
    Stars { min: u8, max: u8 },
}

impl RatingScale {
    pub const FIVE_STARS: RatingScale = RatingScale::Stars { min: 1, max: 5 };

    pub fn contains(self, v: f64) -> bool {
        match self {
            RatingScale::Binary => v == 1.0 || v == -1.0,
            RatingScale::Stars { min, max } => {
                v.fract() == 0.0 && v >= f64::from(min) && v <= f64::from(max)
            }
        }
    }

    pub fn bounds(self) -> (f64, f64) {
        match self {
            RatingScale::Binary => (-1.0, 1.0),
            RatingScale::Stars { min, max } => (f64::from(min), f64::from(max)),
        }
    }

    /// Width of the scale, used to normalise absolute errors to `[0, 1]`.
    pub fn range(self) -> f64 {
        let (lo, hi) = self.bounds();
        hi - lo
    }

    pub fn clamp(self, v: f64) -> f64 {
        let (lo, hi) = self.bounds();
        v.clamp(lo, hi)
    }
}

/// Sparse partial map `(agent, object) → rating`, indexed both ways.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingFunction {
    scale: RatingScale,
    by_agent: Vec<Vec<(usize, f64)>>,
    by_object: Vec<Vec<(usize, f64)>>,
}

impl RatingFunction {
    pub fn new(scale: RatingScale, n_agents: usize, n_objects: usize) -> Self {
        Self {
            scale,
            by_agent: vec![Vec::new(); n_agents],
            by_object: vec![Vec::new(); n_objects],
        }
    }

    /// Builds from `(agent, object, rating)` triples; later duplicates win.
    pub fn from_triples<I>(scale: RatingScale, n_agents: usize, n_objects: usize, triples: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut r = Self::new(scale, n_agents, n_objects);
        for (i, o, v) in triples {
            r.set(i, o, v)?;
        }
        Ok(r)
    }

    pub fn set(&mut self, agent: usize, object: usize, rating: f64) -> Result<()> {
        if agent >= self.by_agent.len() {
            return Err(Error::AgentOutOfRange {
                index: agent,
                n_agents: self.by_agent.len(),
            });
        }
        if object >= self.by_object.len() {
            return Err(Error::invalid(format!(
                "object {object} out of range for {} objects",
                self.by_object.len()
            )));
        }
        if !self.scale.contains(rating) {
            return Err(Error::invalid(format!(
                "rating {rating} outside scale {:?}",
                self.scale
            )));
        }
        upsert(&mut self.by_agent[agent], object, rating);
        upsert(&mut self.by_object[object], agent, rating);
        Ok(())
    }

    pub fn scale(&self) -> RatingScale {
        self.scale
    }

    pub fn n_agents(&self) -> usize {
        self.by_agent.len()
    }

    pub fn n_objects(&self) -> usize {
        self.by_object.len()
    }

    pub fn len(&self) -> usize {
        self.by_agent.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, agent: usize, object: usize) -> Option<f64> {
        let row = self.by_agent.get(agent)?;
        row.binary_search_by_key(&object, |&(o, _)| o)
            .ok()
            .map(|p| row[p].1)
    }

    /// `(object, rating)` pairs of an agent, sorted by object.
    pub fn of_agent(&self, agent: usize) -> &[(usize, f64)] {
        &self.by_agent[agent]
    }

    /// `(agent, rating)` pairs for an object, sorted by agent.
    pub fn of_object(&self, object: usize) -> &[(usize, f64)] {
        &self.by_object[object]
    }

    pub fn agent_mean(&self, agent: usize) -> Option<f64> {
        mean(self.by_agent[agent].iter().map(|&(_, v)| v))
    }
}

fn upsert(row: &mut Vec<(usize, f64)>, key: usize, value: f64) {
    match row.binary_search_by_key(&key, |&(k, _)| k) {
        Ok(p) => row[p].1 = value,
        Err(p) => row.insert(p, (key, value)),
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Tw,
    Cf,
    Sa,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub value: f64,
    /// Number of raters that contributed.
    pub support: usize,
    pub method: Method,
}

/// Trust-weighted prediction `Σ_j S̃_ij r_j^o / Σ_j S̃_ij` over the agents `j`
/// in row `i` of `S̃` that rated `o`.
///
/// When every weighted agent rated `o` the denominator is one and this is the
/// plain weighted sum. `None` when no agent with positive weight rated `o`.
pub fn predict_tw(
    trust: &RowNormalizedMatrix,
    ratings: &RatingFunction,
    agent: usize,
    object: usize,
) -> Option<Prediction> {
    if trust.is_zero_row(agent) {
        return None;
    }
    let row = trust.row(agent);
    let raters = ratings.of_object(object);
    let mut num = 0.0;
    let mut den = 0.0;
    let mut support = 0;
    let mut take = |w: f64, r: f64| {
        if w > 0.0 {
            num += w * r;
            den += w;
            support += 1;
        }
    };
    if raters.len() < row.len() {
        for &(j, r) in raters {
            if j != agent {
                take(trust.get(agent, j), r);
            }
        }
    } else {
        for &(j, w) in row {
            if j == agent {
                continue;
            }
            if let Some(r) = ratings.get(j, object) {
                take(w, r);
            }
        }
    }
    (den > 0.0).then(|| Prediction {
        value: num / den,
        support,
        method: Method::Tw,
    })
}

/// Mean of all ratings on `o`.
pub fn predict_sa(ratings: &RatingFunction, object: usize) -> Option<Prediction> {
    let raters = ratings.of_object(object);
    mean(raters.iter().map(|&(_, v)| v)).map(|value| Prediction {
        value,
        support: raters.len(),
        method: Method::Sa,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CfConfig {
    /// Neighbourhood size (top-k most similar raters).
    pub k_neighbours: usize,
    /// Minimum number of co-rated items for a similarity to exist.
    pub min_corated: usize,
}

impl Default for CfConfig {
    fn default() -> Self {
        Self {
            k_neighbours: 100,
            min_corated: 2,
        }
    }
}

#[derive(Default, Clone, Copy)]
struct CoStats {
    n: usize,
    sx: f64,
    sy: f64,
    sxx: f64,
    syy: f64,
    sxy: f64,
}

impl CoStats {
    fn push(&mut self, x: f64, y: f64) {
        self.n += 1;
        self.sx += x;
        self.sy += y;
        self.sxx += x * x;
        self.syy += y * y;
        self.sxy += x * y;
    }

    fn pearson(&self, min_corated: usize) -> Option<f64> {
        if self.n < min_corated.max(2) {
            return None;
        }
        let n = self.n as f64;
        let cov = n * self.sxy - self.sx * self.sy;
        let vx = n * self.sxx - self.sx * self.sx;
        let vy = n * self.syy - self.sy * self.sy;
        if vx <= 1e-12 || vy <= 1e-12 {
            return None;
        }
        Some((cov / (vx * vy).sqrt()).clamp(-1.0, 1.0))
    }
}

/// Pearson correlation of two agents over co-rated objects, with means taken
/// over the co-rated set. `None` below `min_corated` or for constant vectors.
pub fn pearson(ratings: &RatingFunction, a: usize, b: usize, min_corated: usize) -> Option<f64> {
    let (ra, rb) = (ratings.of_agent(a), ratings.of_agent(b));
    let mut st = CoStats::default();
    let (mut p, mut q) = (0, 0);
    while p < ra.len() && q < rb.len() {
        match ra[p].0.cmp(&rb[q].0) {
            std::cmp::Ordering::Less => p += 1,
            std::cmp::Ordering::Greater => q += 1,
            std::cmp::Ordering::Equal => {
                st.push(ra[p].1, rb[q].1);
                p += 1;
                q += 1;
            }
        }
    }
    st.pearson(min_corated)
}

/// User-based collaborative filter with per-agent means cached.
#[derive(Debug, Clone)]
pub struct CollaborativeFilter<'a> {
    ratings: &'a RatingFunction,
    means: Vec<Option<f64>>,
    cfg: CfConfig,
}

impl<'a> CollaborativeFilter<'a> {
    pub fn new(ratings: &'a RatingFunction, cfg: CfConfig) -> Self {
        let means = (0..ratings.n_agents()).map(|i| ratings.agent_mean(i)).collect();
        Self {
            ratings,
            means,
            cfg,
        }
    }

    pub fn config(&self) -> CfConfig {
        self.cfg
    }

    /// Positive similarities of every other agent to `agent`, most similar
    /// first (ties by index).
    pub fn similarities(&self, agent: usize) -> Vec<(usize, f64)> {
        let mut stats: Vec<CoStats> = vec![CoStats::default(); self.ratings.n_agents()];
        for &(o, x) in self.ratings.of_agent(agent) {
            for &(j, y) in self.ratings.of_object(o) {
                if j != agent {
                    stats[j].push(x, y);
                }
            }
        }
        let mut sims: Vec<(usize, f64)> = stats
            .iter()
            .enumerate()
            .filter_map(|(j, st)| st.pearson(self.cfg.min_corated).map(|s| (j, s)))
            .filter(|&(_, s)| s > 0.0)
            .collect();
        sims.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        sims
    }

    /// Prediction for `(agent, object)` given `agent`'s similarity list.
    pub fn predict_with(&self, sims: &[(usize, f64)], agent: usize, object: usize) -> Option<Prediction> {
        let base = self.means[agent]?;
        let mut num = 0.0;
        let mut den = 0.0;
        let mut support = 0;
        for &(j, s) in sims {
            if support == self.cfg.k_neighbours {
                break;
            }
            let Some(r) = self.ratings.get(j, object) else {
                continue;
            };
            let Some(mj) = self.means[j] else {
                continue;
            };
            num += s * (r - mj);
            den += s;
            support += 1;
        }
        (support > 0 && den > 0.0).then(|| Prediction {
            value: self.ratings.scale().clamp(base + num / den),
            support,
            method: Method::Cf,
        })
    }

    pub fn predict(&self, agent: usize, object: usize) -> Option<Prediction> {
        let sims = self.similarities(agent);
        self.predict_with(&sims, agent, object)
    }
}

/// User-based CF prediction: `r̄_i + Σ s_ij (r_j^o − r̄_j) / Σ s_ij` over the
/// `k` most similar (positive Pearson) agents that rated `o`.
pub fn predict_cf(
    ratings: &RatingFunction,
    agent: usize,
    object: usize,
    k_neighbours: usize,
) -> Option<Prediction> {
    let cfg = CfConfig {
        k_neighbours,
        ..CfConfig::default()
    };
    CollaborativeFilter::new(ratings, cfg).predict(agent, object)
}
