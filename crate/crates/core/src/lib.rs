//! Influence maximization as a combinatorial multi-armed bandit under the
//! independent cascade model.
//!
//! The crate provides the hidden environment (a directed graph with true
//! influence probabilities and IC diffusion), seed-selection oracles
//! (greedy Monte Carlo and reverse-reachable-set max coverage), estimators
//! for the unknown probabilities under edge-level and node-level feedback
//! (frequentist and online maximum likelihood), exploration and
//! regret-minimization strategies, and closed-form bound calculators.

pub mod bandit;
pub mod diffusion;
pub mod feedback;
pub mod graph;
pub mod metrics;
pub mod oracle;
pub mod rng;

pub use bandit::{FeedbackMode, GameResult, RoundRecord, StrategyConfig, StrategyKind};
pub use diffusion::{Cascade, PossibleWorld};
pub use feedback::{EstimatorState, MleConfig};
pub use graph::{EdgeId, Graph};
pub use metrics::MetricsRow;
pub use oracle::{OracleConfig, RRSet};
pub use rng::RngStream;
