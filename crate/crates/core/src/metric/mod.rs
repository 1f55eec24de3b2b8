//! Trust-metric computations.
//!
//! Pipeline: a [`TrustGraph`](crate::TrustGraph) is row-normalised into `S`
//! ([`normalize_direct`]), indirect trust `T̃ = S + βS·T̃` is solved by one of
//! three interchangeable strategies ([`indirect_trust_exact`],
//! [`indirect_trust_iterative`], [`indirect_trust_truncated`]), and `T̃` is
//! row-normalised again into `S̃` ([`normalize_indirect`]) for prediction.

mod centrality;
mod dump;
mod matrix;
mod naive;
mod normalize;
mod solve;

pub use centrality::{global_centrality, CentralityVector};
pub use dump::{parse_matrix_dump, write_indirect_dump, write_normalized_dump, MatrixDump};
pub use matrix::{IndirectTrustMatrix, RowNormalizedMatrix, RowKind, SolveInfo};
pub use naive::{naive_recursion_demo, NaiveOutcome, NaiveRecursionReport};
pub use normalize::{
    normalize_direct, normalize_indirect, normalize_indirect_with, IndirectDenominator,
    NormalizationMode,
};
pub use solve::{
    defining_identity_residual, indirect_trust, indirect_trust_exact, indirect_trust_iterative,
    indirect_trust_truncated, truncation_bound, walk_cutoff_for, MetricConfig, Strategy,
};

pub const DEFAULT_BETA: f64 = 0.8;
pub const DEFAULT_DROP_TOL: f64 = 1e-9;
pub const DEFAULT_DENSE_THRESHOLD: usize = 2000;
