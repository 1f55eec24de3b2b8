//! Personalised indirect trust on weighted social graphs.
//!
//! The crate computes indirect trust `T̃ = (I − βS)⁻¹ S` from a row-normalised
//! direct-trust matrix `S`, simulates how trust evolves when agents exchange
//! ratings and predictions, and evaluates trust-based rating prediction
//! against collaborative filtering and simple averages on rating datasets.
//!
//! Module map:
//! - [`graph`]: sparse directed trust graphs, random graphs, SCCs, edge files.
//! - [`metric`]: normalisation, the three indirect-trust solvers, the global
//!   centrality baseline and the naive-recursion demonstrator.
//! - [`recommender`]: trust-weighted, collaborative-filtering and simple-average
//!   predictions.
//! - [`dynamics`]: utilities, the trust update rule and the mean-field map.
//! - [`simulate`]: the two-profile agent simulation and parameter sweeps.
//! - [`dataset`]: rating/trust ingestion, cleaning, splitting and synthesis.
//! - [`evaluate`]: MAE, coverage, top-N overlap and β sweeps.

pub mod dataset;
pub mod dynamics;
pub mod error;
pub mod evaluate;
pub mod graph;
pub mod metric;
pub mod par;
pub mod recommender;
pub mod simulate;

pub use error::{Error, Result};
pub use graph::TrustGraph;
pub use metric::{IndirectTrustMatrix, RowNormalizedMatrix};
pub use par::Execution;
