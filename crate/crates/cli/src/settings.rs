//! Every tunable parameter as one flat key/value set.
//!
//! The same struct is read from the `--config` TOML file and from command-line
//! flags. Flags win: the file table is loaded first and the keys given on the
//! command line are written over it.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::de::{value::StrDeserializer, DeserializeOwned, IntoDeserializer};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Master random seed.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Damping factor for indirect trust, in [0, 1).
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// sequential | parallel
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exec: Option<String>,

    /// exact | iterative | truncated
    #[arg(long, global = true, help_heading = "Metric")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,
    #[arg(long, global = true, help_heading = "Metric")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[arg(long, global = true, help_heading = "Metric")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[arg(long, global = true, help_heading = "Metric")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub walk_cutoff: Option<usize>,
    #[arg(long, global = true, help_heading = "Metric")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drop_tol: Option<f64>,
    #[arg(long, global = true, help_heading = "Metric")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dense_threshold: Option<usize>,
    /// strict | bootstrap
    #[arg(long, global = true, help_heading = "Metric")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalization: Option<String>,
    /// neighbours | reach
    #[arg(long, global = true, help_heading = "Metric")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub denominator: Option<String>,
    /// Trust graph as a tab-separated `i j w` edge list.
    #[arg(long, global = true, help_heading = "Metric")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<PathBuf>,
    #[arg(long, global = true, help_heading = "Metric")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub naive_tol: Option<f64>,
    #[arg(long, global = true, help_heading = "Metric")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub naive_max_iter: Option<usize>,

    #[arg(long, global = true, help_heading = "Simulation")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_agents: Option<usize>,
    #[arg(long, global = true, help_heading = "Simulation")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_degree: Option<f64>,
    #[arg(long, global = true, help_heading = "Simulation")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[arg(long, global = true, help_heading = "Simulation")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[arg(long, global = true, help_heading = "Simulation")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u_thr: Option<f64>,
    #[arg(long, global = true, help_heading = "Simulation")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[arg(long, global = true, help_heading = "Simulation")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runs: Option<usize>,
    /// verbatim | sign_follows_utility
    #[arg(long, global = true, help_heading = "Simulation")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub update_rule: Option<String>,
    /// Mean-degree grid for a sweep (comma separated).
    #[arg(long, global = true, value_delimiter = ',', help_heading = "Simulation")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degrees: Option<Vec<f64>>,
    /// Signalling-probability grid for a sweep (comma separated).
    #[arg(long, global = true, value_delimiter = ',', help_heading = "Simulation")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub etas: Option<Vec<f64>>,

    #[arg(long, global = true, help_heading = "Evaluation")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratings: Option<PathBuf>,
    #[arg(long, global = true, help_heading = "Evaluation")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trust: Option<PathBuf>,
    #[arg(long, global = true, help_heading = "Evaluation")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_fraction: Option<f64>,
    /// Skip cleaning before the split.
    #[arg(long, global = true, help_heading = "Evaluation")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub no_clean: Option<bool>,
    #[arg(long, global = true, help_heading = "Evaluation")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_neighbours: Option<usize>,
    #[arg(long, global = true, help_heading = "Evaluation")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_corated: Option<usize>,
    #[arg(long, global = true, value_delimiter = ',', help_heading = "Evaluation")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub top_n: Option<Vec<usize>>,
    #[arg(long, global = true, help_heading = "Evaluation")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_neighbourhood: Option<usize>,
    /// test_side | all_ratings
    #[arg(long, global = true, help_heading = "Evaluation")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub overlap_targets: Option<String>,
    #[arg(long, global = true, value_delimiter = ',', help_heading = "Evaluation")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_grid: Option<Vec<f64>>,
    #[arg(long, global = true, help_heading = "Evaluation")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub walk_tol: Option<f64>,

    /// community | relay
    #[arg(long, global = true, help_heading = "Synthesis")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[arg(long, global = true, help_heading = "Synthesis")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub communities: Option<usize>,
    #[arg(long, global = true, help_heading = "Synthesis")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub users_per_community: Option<usize>,
    #[arg(long, global = true, help_heading = "Synthesis")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub items_per_community: Option<usize>,
    #[arg(long, global = true, help_heading = "Synthesis")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_rate_intra: Option<f64>,
    #[arg(long, global = true, help_heading = "Synthesis")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_rate_cross: Option<f64>,
    #[arg(long, global = true, help_heading = "Synthesis")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_trust_intra: Option<f64>,
    #[arg(long, global = true, help_heading = "Synthesis")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_trust_cross: Option<f64>,
    /// Probabilities of 1..5 stars (comma separated).
    #[arg(long, global = true, value_delimiter = ',', help_heading = "Synthesis")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub star_bias: Option<Vec<f64>>,
    #[arg(long, global = true, help_heading = "Synthesis")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub taste_agreement: Option<f64>,
    #[arg(long, global = true, help_heading = "Synthesis")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub popularity_exponent: Option<f64>,
    #[arg(long, global = true, help_heading = "Synthesis")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seekers: Option<usize>,
    #[arg(long, global = true, help_heading = "Synthesis")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub connectors: Option<usize>,
    #[arg(long, global = true, help_heading = "Synthesis")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experts: Option<usize>,
    #[arg(long, global = true, help_heading = "Synthesis")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub items: Option<usize>,
    #[arg(long, global = true, help_heading = "Synthesis")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_rate_seeker: Option<f64>,
    #[arg(long, global = true, help_heading = "Synthesis")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_rate_connector: Option<f64>,
    #[arg(long, global = true, help_heading = "Synthesis")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_rate_expert: Option<f64>,
    #[arg(long, global = true, help_heading = "Synthesis")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub connectors_per_seeker: Option<usize>,
    #[arg(long, global = true, help_heading = "Synthesis")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experts_per_connector: Option<usize>,
    #[arg(long, global = true, help_heading = "Synthesis")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seekers_per_expert: Option<usize>,
}

impl Settings {
    /// Overlays `self` (from the command line) on the table in `config`.
    pub fn layered(self, config: Option<&Path>) -> Result<Settings, CliError> {
        let Some(path) = config else {
            return Ok(self);
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| CliError::usage(format!("config {}: {}", path.display(), e.message())))?;
        let overrides = toml::Table::try_from(&self)
            .map_err(|e| CliError::usage(format!("cannot merge flags: {e}")))?;
        table.extend(overrides);
        table
            .try_into()
            .map_err(|e: toml::de::Error| CliError::usage(format!("config {}: {}", path.display(), e.message())))
    }
}

/// Parses a lowercase enum name using the type's own serde names.
pub fn parse_name<T: DeserializeOwned>(key: &str, value: &str) -> Result<T, CliError> {
    let de: StrDeserializer<'_, serde::de::value::Error> = value.into_deserializer();
    T::deserialize(de).map_err(|_| CliError::usage(format!("unknown {key} {value:?}")))
}

/// `Some(parsed)` when the key was set.
pub fn parse_opt<T: DeserializeOwned>(key: &str, value: &Option<String>) -> Result<Option<T>, CliError> {
    value.as_deref().map(|v| parse_name(key, v)).transpose()
}
