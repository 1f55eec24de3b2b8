//! Synthetic datasets with planted structure, used as ground truth when
//! comparing predictors.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Rating, RatingsDataset, Split};
use crate::error::{check_unit, Error, Result};

/// Star distribution with 75% of the mass on 4 and 5 stars.
pub const DEFAULT_STAR_BIAS: [f64; 5] = [0.06, 0.07, 0.12, 0.35, 0.40];

/// Communities of users who agree on item tastes.
///
/// Each community assigns tastes to the items so that the share of every star
/// value matches `star_bias` as closely as rounding allows. A user
/// rates with the taste of its own community with probability
/// `taste_agreement`, otherwise with a fresh draw from `star_bias`, so the
/// marginal star distribution is `star_bias` exactly. Each community owns
/// `items_per_community` items ranked by popularity: the item of rank `r` is
/// rated with probability `p_rate · w_r` where `w_r ∝ (r + 1)^(−popularity_exponent)`
/// has mean 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CommunitySpec {
    pub communities: usize,
    pub users_per_community: usize,
    pub items_per_community: usize,
    pub p_rate_intra: f64,
    pub p_rate_cross: f64,
    pub p_trust_intra: f64,
    pub p_trust_cross: f64,
    pub star_bias: [f64; 5],
    pub taste_agreement: f64,
    pub popularity_exponent: f64,
    pub seed: u64,
}

impl Default for CommunitySpec {
    fn default() -> Self {
        Self {
            communities: 2,
            users_per_community: 200,
            items_per_community: 250,
            p_rate_intra: 0.03,
            p_rate_cross: 0.004,
            p_trust_intra: 0.05,
            p_trust_cross: 0.002,
            star_bias: DEFAULT_STAR_BIAS,
            taste_agreement: 0.8,
            popularity_exponent: 0.8,
            seed: 0,
        }
    }
}

impl CommunitySpec {
    pub fn validate(&self) -> Result<()> {
        if self.communities == 0 || self.users_per_community == 0 || self.items_per_community == 0 {
            return Err(Error::invalid("community sizes must be positive"));
        }
        for (name, p) in [
            ("p_rate_intra", self.p_rate_intra),
            ("p_rate_cross", self.p_rate_cross),
            ("p_trust_intra", self.p_trust_intra),
            ("p_trust_cross", self.p_trust_cross),
            ("taste_agreement", self.taste_agreement),
        ] {
            check_unit(name, p)?;
        }
        if self.popularity_exponent < 0.0 || !self.popularity_exponent.is_finite() {
            return Err(Error::invalid("popularity_exponent must be finite and non-negative"));
        }
        star_sampler(&self.star_bias)?;
        Ok(())
    }

    pub fn community_of_user(&self, user: usize) -> usize {
        user / self.users_per_community
    }

    pub fn community_of_item(&self, item: usize) -> usize {
        item / self.items_per_community
    }
}

fn star_sampler(bias: &[f64; 5]) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(bias).map_err(|e| Error::invalid(format!("star_bias: {e}")))
}

fn draw_star<R: Rng>(rng: &mut R, stars: &WeightedIndex<f64>) -> u8 {
    stars.sample(rng) as u8 + 1
}

/// `n` star values with counts proportional to `bias` (largest remainder),
/// in random order.
fn stratified_tastes<R: Rng>(rng: &mut R, bias: &[f64; 5], n: usize) -> Vec<u8> {
    let total: f64 = bias.iter().sum();
    let exact: Vec<f64> = bias.iter().map(|b| b / total * n as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..5).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())));
    let missing = n - counts.iter().sum::<usize>();
    for &k in order.iter().take(missing) {
        counts[k] += 1;
    }
    let mut out: Vec<u8> = counts
        .iter()
        .enumerate()
        .flat_map(|(k, &c)| std::iter::repeat(k as u8 + 1).take(c))
        .collect();
    out.shuffle(rng);
    out
}

fn popularity_weights(n: usize, exponent: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|r| ((r + 1) as f64).powf(-exponent)).collect();
    let mean = raw.iter().sum::<f64>() / n as f64;
    raw.into_iter().map(|w| w / mean).collect()
}

fn ids(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|k| format!("{prefix}{k}")).collect()
}

fn rating(user: usize, item: usize, stars: u8) -> Rating {
    Rating {
        user,
        item,
        stars,
        timestamp: None,
        split: Split::Train,
    }
}

pub fn synthesize_community_dataset(spec: &CommunitySpec) -> Result<RatingsDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let stars = star_sampler(&spec.star_bias)?;
    let n_users = spec.communities * spec.users_per_community;
    let n_items = spec.communities * spec.items_per_community;

    let taste: Vec<Vec<u8>> = (0..spec.communities)
        .map(|_| stratified_tastes(&mut rng, &spec.star_bias, n_items))
        .collect();
    let popularity = popularity_weights(spec.items_per_community, spec.popularity_exponent);

    let mut ratings = Vec::new();
    for u in 0..n_users {
        let cu = spec.community_of_user(u);
        for o in 0..n_items {
            let base = if spec.community_of_item(o) == cu {
                spec.p_rate_intra
            } else {
                spec.p_rate_cross
            };
            let p = (base * popularity[o % spec.items_per_community]).min(1.0);
            if rng.gen::<f64>() >= p {
                continue;
            }
            let s = if rng.gen::<f64>() < spec.taste_agreement {
                taste[cu][o]
            } else {
                draw_star(&mut rng, &stars)
            };
            ratings.push(rating(u, o, s));
        }
    }

    let mut trust = Vec::new();
    for a in 0..n_users {
        for b in 0..n_users {
            if a == b {
                continue;
            }
            let p = if spec.community_of_user(a) == spec.community_of_user(b) {
                spec.p_trust_intra
            } else {
                spec.p_trust_cross
            };
            if rng.gen::<f64>() < p {
                trust.push((a, b));
            }
        }
    }

    RatingsDataset::from_parts(ids("u", n_users), ids("i", n_items), ratings, trust)
}

/// A population where useful raters sit two trust hops away.
///
/// Users come in three roles, numbered in this order: *seekers*, *connectors*
/// and *experts*. Every item has one hidden taste. Seekers and experts rate
/// with that taste (or a fresh draw, with probability `1 − taste_agreement`);
/// connectors rate every item with an independent draw and so carry no
/// information. Seekers trust only connectors, connectors trust only experts,
/// and experts trust seekers, which keeps the graph strongly connected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RelaySpec {
    pub seekers: usize,
    pub connectors: usize,
    pub experts: usize,
    pub items: usize,
    pub p_rate_seeker: f64,
    pub p_rate_connector: f64,
    pub p_rate_expert: f64,
    pub connectors_per_seeker: usize,
    pub experts_per_connector: usize,
    pub seekers_per_expert: usize,
    pub star_bias: [f64; 5],
    pub taste_agreement: f64,
    pub seed: u64,
}

impl Default for RelaySpec {
    fn default() -> Self {
        Self {
            seekers: 150,
            connectors: 50,
            experts: 50,
            items: 300,
            p_rate_seeker: 0.1,
            p_rate_connector: 0.2,
            p_rate_expert: 0.2,
            connectors_per_seeker: 3,
            experts_per_connector: 3,
            seekers_per_expert: 3,
            star_bias: DEFAULT_STAR_BIAS,
            taste_agreement: 0.9,
            seed: 0,
        }
    }
}

impl RelaySpec {
    pub fn validate(&self) -> Result<()> {
        if self.seekers == 0 || self.connectors == 0 || self.experts == 0 || self.items == 0 {
            return Err(Error::invalid("relay role sizes must be positive"));
        }
        for (name, p) in [
            ("p_rate_seeker", self.p_rate_seeker),
            ("p_rate_connector", self.p_rate_connector),
            ("p_rate_expert", self.p_rate_expert),
            ("taste_agreement", self.taste_agreement),
        ] {
            check_unit(name, p)?;
        }
        if self.connectors_per_seeker == 0
            || self.connectors_per_seeker > self.connectors
            || self.experts_per_connector == 0
            || self.experts_per_connector > self.experts
            || self.seekers_per_expert == 0
            || self.seekers_per_expert > self.seekers
        {
            return Err(Error::invalid("relay fan-outs must lie in 1..=target role size"));
        }
        if self.seekers * self.connectors_per_seeker < self.connectors
            || self.connectors * self.experts_per_connector < self.experts
            || self.experts * self.seekers_per_expert < self.seekers
        {
            return Err(Error::invalid("relay fan-outs must reach every member of the next role"));
        }
        star_sampler(&self.star_bias)?;
        Ok(())
    }

    pub fn is_seeker(&self, user: usize) -> bool {
        user < self.seekers
    }
}

pub fn synthesize_relay_dataset(spec: &RelaySpec) -> Result<RatingsDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let stars = star_sampler(&spec.star_bias)?;
    let (ns, nc, ne) = (spec.seekers, spec.connectors, spec.experts);
    let n_users = ns + nc + ne;
    let taste = stratified_tastes(&mut rng, &spec.star_bias, spec.items);

    let mut ratings = Vec::new();
    for u in 0..n_users {
        let (p, informed) = if u < ns {
            (spec.p_rate_seeker, true)
        } else if u < ns + nc {
            (spec.p_rate_connector, false)
        } else {
            (spec.p_rate_expert, true)
        };
        for (o, &t) in taste.iter().enumerate() {
            if rng.gen::<f64>() >= p {
                continue;
            }
            let s = if informed && rng.gen::<f64>() < spec.taste_agreement {
                t
            } else {
                draw_star(&mut rng, &stars)
            };
            ratings.push(rating(u, o, s));
        }
    }

    let mut trust = Vec::new();
    // Targets are dealt round-robin from a shuffled order, so every member of
    // the target role receives at least one incoming edge.
    let mut fan_out = |from: std::ops::Range<usize>, to_start: usize, to_len: usize, k: usize| {
        let mut perm: Vec<usize> = (0..to_len).collect();
        perm.shuffle(&mut rng);
        for (slot, a) in from.enumerate() {
            for m in 0..k {
                trust.push((a, to_start + perm[(slot * k + m) % to_len]));
            }
        }
    };
    fan_out(0..ns, ns, nc, spec.connectors_per_seeker);
    fan_out(ns..ns + nc, ns + nc, ne, spec.experts_per_connector);
    fan_out(ns + nc..n_users, 0, ns, spec.seekers_per_expert);

    let user_ids = (0..n_users)
        .map(|u| {
            let role = if u < ns {
                "s"
            } else if u < ns + nc {
                "c"
            } else {
                "e"
            };
            format!("{role}{u}")
        })
        .collect();
    RatingsDataset::from_parts(user_ids, ids("i", spec.items), ratings, trust)
}
