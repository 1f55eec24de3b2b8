//! Rating and trust datasets: loading, cleaning, splitting and synthesis.
//!
//! Users and items carry external string ids and are re-indexed densely in
//! first-seen order. Ratings use 1..=5 stars; trust edges are binary and
//! become weight-1 links in a [`TrustGraph`].

mod clean;
mod io;
mod synth;

pub use clean::{clean, CleanReport};
pub use io::{load, parse, write_ratings_csv, write_trust_csv};
pub use synth::{synthesize_community_dataset, synthesize_relay_dataset, CommunitySpec, RelaySpec};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Error, Result};
use crate::graph::TrustGraph;
use crate::recommender::{RatingFunction, RatingScale};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rating {
    pub user: usize,
    pub item: usize,
    pub stars: u8,
    pub timestamp: Option<i64>,
    pub split: Split,
}

/// Counters collected while reading input files.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadReport {
    pub ratings_read: usize,
    pub duplicate_ratings: usize,
    pub trust_read: usize,
    pub unknown_user_edges: usize,
    pub self_loops: usize,
    pub duplicate_edges: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingsDataset {
    pub user_ids: Vec<String>,
    pub item_ids: Vec<String>,
    /// At most one record per `(user, item)`, ordered by user then item.
    pub ratings: Vec<Rating>,
    /// Sorted, deduplicated `(truster, trustee)` pairs without self-loops.
    pub trust: Vec<(usize, usize)>,
    pub load_report: LoadReport,
}

/// Outcome of [`RatingsDataset::split`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    pub test_fraction: f64,
    pub seed: u64,
    pub train: usize,
    pub test: usize,
    pub warnings: Vec<String>,
}

impl RatingsDataset {
    /// Builds a dataset from index-based parts, normalising order and
    /// dropping duplicates (the last rating for a pair wins).
    pub fn from_parts(
        user_ids: Vec<String>,
        item_ids: Vec<String>,
        ratings: Vec<Rating>,
        trust: Vec<(usize, usize)>,
    ) -> Result<Self> {
        let (nu, ni) = (user_ids.len(), item_ids.len());
        for r in &ratings {
            if r.user >= nu || r.item >= ni {
                return Err(Error::invalid(format!(
                    "rating ({}, {}) outside {nu} users × {ni} items",
                    r.user, r.item
                )));
            }
            if !(1..=5).contains(&r.stars) {
                return Err(Error::invalid(format!("stars {} outside 1..=5", r.stars)));
            }
        }
        for &(a, b) in &trust {
            if a >= nu || b >= nu {
                return Err(Error::invalid(format!("trust edge ({a}, {b}) outside {nu} users")));
            }
        }
        let mut report = LoadReport {
            ratings_read: ratings.len(),
            trust_read: trust.len(),
            ..LoadReport::default()
        };
        let ratings = dedup_ratings(ratings, &mut report.duplicate_ratings);
        let trust = dedup_trust(trust, &mut report.self_loops, &mut report.duplicate_edges);
        Ok(Self {
            user_ids,
            item_ids,
            ratings,
            trust,
            load_report: report,
        })
    }

    pub fn n_users(&self) -> usize {
        self.user_ids.len()
    }

    pub fn n_items(&self) -> usize {
        self.item_ids.len()
    }

    /// `1 − |ratings| / (|users| · |items|)`.
    pub fn sparsity(&self) -> f64 {
        let cells = self.n_users() as f64 * self.n_items() as f64;
        if cells == 0.0 {
            1.0
        } else {
            1.0 - self.ratings.len() as f64 / cells
        }
    }

    pub fn train(&self) -> impl Iterator<Item = &Rating> {
        self.ratings.iter().filter(|r| r.split == Split::Train)
    }

    pub fn test(&self) -> impl Iterator<Item = &Rating> {
        self.ratings.iter().filter(|r| r.split == Split::Test)
    }

    /// Training ratings as a 1..=5 star rating function.
    pub fn train_ratings(&self) -> RatingFunction {
        let mut rf = RatingFunction::new(RatingScale::FIVE_STARS, self.n_users(), self.n_items());
        for r in self.train() {
            rf.set(r.user, r.item, f64::from(r.stars))
                .expect("dataset ratings are validated on construction");
        }
        rf
    }

    /// Trust edges as a graph with every weight equal to 1.
    pub fn trust_graph(&self) -> TrustGraph {
        TrustGraph::from_edges(self.n_users(), self.trust.iter().map(|&(a, b)| (a, b, 1.0)))
            .expect("dataset trust edges are validated on construction")
    }

    /// Tags every rating independently as test with probability
    /// `test_fraction`. Trust is never split. A warning is recorded when
    /// either partition ends up empty.
    pub fn split(&mut self, test_fraction: f64, seed: u64) -> Result<SplitReport> {
        check_unit("test_fraction", test_fraction)?;
        if test_fraction == 0.0 || test_fraction == 1.0 {
            return Err(Error::invalid("test_fraction must lie strictly inside (0, 1)"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut test = 0;
        for r in &mut self.ratings {
            r.split = if rng.gen::<f64>() < test_fraction {
                test += 1;
                Split::Test
            } else {
                Split::Train
            };
        }
        let train = self.ratings.len() - test;
        let mut warnings = Vec::new();
        if train == 0 {
            warnings.push("training partition is empty".to_string());
        }
        if test == 0 {
            warnings.push("test partition is empty".to_string());
        }
        Ok(SplitReport {
            test_fraction,
            seed,
            train,
            test,
            warnings,
        })
    }
}

fn dedup_ratings(mut ratings: Vec<Rating>, duplicates: &mut usize) -> Vec<Rating> {
    // Stable sort keeps input order within a pair so the last one can win.
    ratings.sort_by_key(|r| (r.user, r.item));
    let mut out: Vec<Rating> = Vec::with_capacity(ratings.len());
    for r in ratings {
        match out.last_mut() {
            Some(prev) if prev.user == r.user && prev.item == r.item => {
                *prev = r;
                *duplicates += 1;
            }
            _ => out.push(r),
        }
    }
    out
}

fn dedup_trust(
    mut trust: Vec<(usize, usize)>,
    self_loops: &mut usize,
    duplicates: &mut usize,
) -> Vec<(usize, usize)> {
    let before = trust.len();
    trust.retain(|&(a, b)| a != b);
    *self_loops += before - trust.len();
    trust.sort_unstable();
    let before = trust.len();
    trust.dedup();
    *duplicates += before - trust.len();
    trust
}
