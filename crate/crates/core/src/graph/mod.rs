//! Sparse directed trust graphs.
//!
//! A [`TrustGraph`] separates *structure* from *weight*: a pair `(i, j)` can be
//! a structural neighbour pair while its trust weight is still zero. The
//! simulation relies on this, since agents exchange ratings with neighbours
//! long before any trust has formed. Metric code only looks at weights.

mod io;
mod random;
mod scc;

pub use io::{parse_edge_list, read_edge_list, write_edge_list};
pub use random::{generate_random_graph, generate_random_graph_with, RandomGraphSpec};
pub use scc::strongly_connected_components;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrustGraph {
    n_agents: usize,
    // Row-major adjacency, each row sorted by target index. Weight 0 means the
    // pair is structurally linked but carries no trust yet.
    rows: Vec<Vec<(usize, f64)>>,
}

impl TrustGraph {
    pub fn new(n_agents: usize) -> Self {
        Self {
            n_agents,
            rows: vec![Vec::new(); n_agents],
        }
    }

    /// Builds a graph from `(truster, trustee, weight)` triples. Later
    /// duplicates overwrite earlier ones.
    pub fn from_edges<I>(n_agents: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut g = Self::new(n_agents);
        for (i, j, w) in edges {
            g.add_edge(i, j, w)?;
        }
        Ok(g)
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    /// Sets the direct trust from `i` to `j`, making them structural
    /// neighbours if they were not already.
    pub fn add_edge(&mut self, i: usize, j: usize, w: f64) -> Result<()> {
        self.check_pair(i, j)?;
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::WeightOutOfRange(w));
        }
        let row = &mut self.rows[i];
        match row.binary_search_by_key(&j, |&(k, _)| k) {
            Ok(pos) => row[pos].1 = w,
            Err(pos) => row.insert(pos, (j, w)),
        }
        Ok(())
    }

    /// Links `i` to `j` structurally, keeping any existing weight.
    pub fn connect(&mut self, i: usize, j: usize) -> Result<()> {
        self.check_pair(i, j)?;
        let row = &mut self.rows[i];
        if let Err(pos) = row.binary_search_by_key(&j, |&(k, _)| k) {
            row.insert(pos, (j, 0.0));
        }
        Ok(())
    }

    /// Removes the structural link `i → j` together with its weight.
    pub fn disconnect(&mut self, i: usize, j: usize) -> bool {
        let Some(row) = self.rows.get_mut(i) else {
            return false;
        };
        match row.binary_search_by_key(&j, |&(k, _)| k) {
            Ok(pos) => {
                row.remove(pos);
                true
            }
            Err(_) => false,
        }
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        for index in [i, j] {
            if index >= self.n_agents {
                return Err(Error::AgentOutOfRange {
                    index,
                    n_agents: self.n_agents,
                });
            }
        }
        if i == j {
            return Err(Error::SelfLoop(i));
        }
        Ok(())
    }

    /// Direct trust `T_ij`; zero when there is no link.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.rows
            .get(i)
            .and_then(|row| {
                row.binary_search_by_key(&j, |&(k, _)| k)
                    .ok()
                    .map(|pos| row[pos].1)
            })
            .unwrap_or(0.0)
    }

    pub fn is_linked(&self, i: usize, j: usize) -> bool {
        self.rows
            .get(i)
            .is_some_and(|row| row.binary_search_by_key(&j, |&(k, _)| k).is_ok())
    }

    /// Structural out-neighbours of `i` with their weights, sorted by index.
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn neighbours(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.rows[i].iter().map(|&(j, _)| j)
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.rows[i].len()
    }

    /// Number of structural links.
    pub fn link_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Number of links carrying positive trust.
    pub fn edge_count(&self) -> usize {
        self.rows
            .iter()
            .flat_map(|r| r.iter())
            .filter(|&&(_, w)| w > 0.0)
            .count()
    }

    pub fn mean_out_degree(&self) -> f64 {
        if self.n_agents == 0 {
            return 0.0;
        }
        self.link_count() as f64 / self.n_agents as f64
    }

    /// All structural links as `(i, j, weight)`, row-major.
    pub fn links(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&(j, w)| (i, j, w)))
    }

    /// Returns a graph with the same structure and weights produced by `f`,
    /// clamped to `[0, 1]`.
    pub fn map_weights<F>(&self, mut f: F) -> TrustGraph
    where
        F: FnMut(usize, usize, f64) -> f64,
    {
        let rows = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .map(|&(j, w)| (j, f(i, j, w).clamp(0.0, 1.0)))
                    .collect()
            })
            .collect();
        TrustGraph {
            n_agents: self.n_agents,
            rows,
        }
    }

    /// Mutable weights of row `i`; callers keep them in `[0, 1]`.
    pub(crate) fn row_weights_mut(&mut self, i: usize) -> &mut [(usize, f64)] {
        &mut self.rows[i]
    }
}
