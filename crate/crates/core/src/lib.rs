//! Multi-armed bandit decision making driven by chaotic time series.
//!
//! An arm index of `K = 2^M` arms is read bit by bit by comparing successive
//! signal samples against a binary tree of thresholds. Rewards nudge the
//! thresholds on the decision path; the confidence-interval variant also
//! rescales each threshold's step sizes depending on whether the pooled
//! reward estimates on its two sides are already separated, which keeps
//! every arm sampled at a linear rate and makes the full arm ranking
//! recoverable.
//!
//! Modules:
//! - [`signal`]: normalized amplitude sources (recorded traces, synthetic surrogates).
//! - [`env`]: Bernoulli environments and the sweep protocols.
//! - [`policy`]: round robin, UCB1, the threshold policy and its CI variant.
//! - [`metrics`]: reward, regret, correct order rate.
//! - [`theory`]: two-armed expected-threshold dynamics and a Monte-Carlo check.
//! - [`harness`]: parallel, deterministic ensembles and their CSV outputs.

pub mod env;
pub mod error;
pub mod exec;
pub mod harness;
pub mod metrics;
pub mod policy;
pub mod seed;
pub mod signal;
pub mod theory;

pub use error::{Error, Result};
pub use exec::Schedule;
