//! Causal discovery for nonlinear additive noise models with arbitrary noise.
//!
//! The pipeline estimates a topological order by repeatedly removing the node
//! whose score entry is best predicted from its own regression residual
//! ([`nogam_order`]), then prunes the complete DAG implied by that order
//! ([`prune`]). Simulation ([`scm`]), evaluation ([`metrics`]) and the
//! experiment runner ([`harness`]) live alongside.

pub mod dataset;
pub mod entropy;
pub mod error;
pub mod graph;
pub mod harness;
mod linalg;
pub mod metrics;
pub mod ordering;
pub mod pruning;
pub mod regression;
pub mod scm;
pub mod stein;

pub use dataset::Dataset;
pub use entropy::{direction_test, entropy_estimate, gaussian_entropy, Direction, DirectionVerdict, EntropyMode};
pub use error::{Error, Result};
pub use graph::{Dag, Ordering};
pub use harness::{
    discover, run_example1, run_experiment, DiscoveryConfig, ExperimentConfig, GenConfig, GraphType, Method,
};
pub use metrics::{d_top, shd, sid, EvalReport};
pub use ordering::{nogam_order, score_order, OrderingResult};
pub use pruning::{prune, PruneConfig};
pub use regression::{RegressorConfig, RegressorKind};
pub use scm::{NoiseKind, NoiseSpec, ScmSpec};
pub use stein::{stein_score, Bandwidth, ScoreEstimate, SteinConfig};
