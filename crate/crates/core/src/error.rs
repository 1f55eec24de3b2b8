use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("agent index {index} out of range for {n_agents} agents")]
    AgentOutOfRange { index: usize, n_agents: usize },

    #[error("self-loop on agent {0} is not allowed")]
    SelfLoop(usize),

    #[error("trust weight {0} outside [0, 1]")]
    WeightOutOfRange(f64),

    #[error("{n_agents} agents exceeds the dense solver threshold of {threshold}; use the iterative or truncated strategy")]
    TooLargeForDense { n_agents: usize, threshold: usize },

    #[error("linear system is singular")]
    Singular,

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("empty result: {0}")]
    Empty(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short stable identifier used in machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::AgentOutOfRange { .. } => "agent_out_of_range",
            Error::SelfLoop(_) => "self_loop",
            Error::WeightOutOfRange(_) => "weight_out_of_range",
            Error::TooLargeForDense { .. } => "too_large_for_dense",
            Error::Singular => "singular",
            Error::Parse { .. } => "parse",
            Error::Empty(_) => "empty",
            Error::Io { .. } => "io",
        }
    }
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::invalid(format!("beta must lie in [0, 1), got {beta}")));
    }
    Ok(())
}

pub(crate) fn check_unit(name: &str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::invalid(format!("{name} must lie in [0, 1], got {value}")));
    }
    Ok(())
}
