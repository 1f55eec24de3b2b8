use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::TrustGraph;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomGraphSpec {
    pub n_agents: usize,
    pub mean_degree: f64,
    pub seed: u64,
}

impl RandomGraphSpec {
    pub fn new(n_agents: usize, mean_degree: f64, seed: u64) -> Self {
        Self {
            n_agents,
            mean_degree,
            seed,
        }
    }

    /// Edge probability `p = d / (n − 1)`.
    pub fn edge_probability(&self) -> f64 {
        self.mean_degree / (self.n_agents as f64 - 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_agents < 2 {
            return Err(Error::invalid("random graph needs at least 2 agents"));
        }
        if !(self.mean_degree > 0.0) || self.mean_degree > (self.n_agents - 1) as f64 {
            return Err(Error::invalid(format!(
                "mean degree must lie in (0, n - 1] = (0, {}], got {}",
                self.n_agents - 1,
                self.mean_degree
            )));
        }
        Ok(())
    }
}

/// Erdős–Rényi `G(n, p)` with every structural link present in both
/// directions and all trust weights zero.
pub fn generate_random_graph(spec: &RandomGraphSpec) -> Result<TrustGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    generate_random_graph_with(spec.n_agents, spec.mean_degree, &mut rng)
}

/// Same as [`generate_random_graph`] but draws from a caller-owned RNG.
pub fn generate_random_graph_with<R: Rng + ?Sized>(
    n_agents: usize,
    mean_degree: f64,
    rng: &mut R,
) -> Result<TrustGraph> {
    let spec = RandomGraphSpec::new(n_agents, mean_degree, 0);
    spec.validate()?;
    let p = spec.edge_probability();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_agents];
    for i in 0..n_agents {
        for j in (i + 1)..n_agents {
            if rng.gen::<f64>() < p {
                rows[i].push((j, 0.0));
                rows[j].push((i, 0.0));
            }
        }
    }
    // Row k receives every i < k in order before any j > k, so rows are sorted.
    Ok(TrustGraph { n_agents, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_agents_with_p_one_are_linked_both_ways() {
        let g = generate_random_graph(&RandomGraphSpec::new(2, 1.0, 3)).unwrap();
        assert!(g.is_linked(0, 1));
        assert!(g.is_linked(1, 0));
    }

    #[test]
    fn weights_start_at_zero_and_links_are_symmetric() {
        let g = generate_random_graph(&RandomGraphSpec::new(500, 7.0, 11)).unwrap();
        assert!(g.link_count() > 0);
        assert_eq!(g.edge_count(), 0);
        for (i, j, w) in g.links() {
            assert_eq!(w, 0.0);
            assert!(g.is_linked(j, i));
        }
    }

    #[test]
    fn rows_are_sorted() {
        let g = generate_random_graph(&RandomGraphSpec::new(60, 10.0, 5)).unwrap();
        for i in 0..60 {
            let r: Vec<_> = g.neighbours(i).collect();
            assert!(r.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn mean_degree_over_seeds() {
        // Oracle: direct count of structural out-links.
        let mean: f64 = (0..100)
            .map(|s| {
                let g = generate_random_graph(&RandomGraphSpec::new(500, 7.0, s)).unwrap();
                g.link_count() as f64 / 500.0
            })
            .sum::<f64>()
            / 100.0;
        assert!((mean - 7.0).abs() <= 0.5, "mean degree {mean}");
    }

    #[test]
    fn same_seed_same_graph() {
        let spec = RandomGraphSpec::new(200, 5.0, 42);
        assert_eq!(
            generate_random_graph(&spec).unwrap(),
            generate_random_graph(&spec).unwrap()
        );
    }

    #[test]
    fn rejects_bad_spec() {
        assert!(generate_random_graph(&RandomGraphSpec::new(1, 1.0, 0)).is_err());
        assert!(generate_random_graph(&RandomGraphSpec::new(10, 0.0, 0)).is_err());
        assert!(generate_random_graph(&RandomGraphSpec::new(10, 9.5, 0)).is_err());
    }
}
