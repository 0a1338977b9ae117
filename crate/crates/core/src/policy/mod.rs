//! Arm-selection policies: round robin, UCB1, the chaotic-signal threshold
//! policy and its confidence-interval controlled variant.

mod stats;
mod tree;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::RewardEnvironment;
use crate::error::{Error, Result};
use crate::signal::SignalSource;

pub use stats::{ci_bounds, ArmStats, ConfidenceInterval};
pub use tree::{arm_sets, Decision, Node, ThresholdTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    RoundRobin,
    Ucb1,
    Chaos,
    ChaosCi,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [Self::RoundRobin, Self::Ucb1, Self::Chaos, Self::ChaosCi];

    pub fn name(self) -> &'static str {
        match self {
            Self::RoundRobin => "round-robin",
            Self::Ucb1 => "ucb1",
            Self::Chaos => "chaos",
            Self::ChaosCi => "chaos-ci",
        }
    }

    /// Whether the policy reads a signal source.
    pub fn uses_signal(self) -> bool {
        matches!(self, Self::Chaos | Self::ChaosCi)
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown policy `{s}`")))
    }
}

/// Parameters of the threshold policies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChaosParams {
    /// Threshold decay factor in (0, 1).
    pub alpha: f64,
    /// Initial reward step Λ.
    pub lambda_init: f64,
    /// Initial no-reward step Ω.
    pub omega_init: f64,
    /// Confidence width scale.
    pub gamma: f64,
    /// Magnitude scaling factor, > 1.
    pub beta: f64,
    /// Confidence adjustment period `d` in steps.
    pub period: u64,
    /// Signal stride between bits of one decision.
    pub delta_l: u64,
    /// Signal stride between decisions; `None` means `M`.
    pub delta_s: Option<u64>,
    /// Signal index of the first decision.
    pub tau_init: u64,
    pub mag_min: f64,
    pub mag_max: f64,
    /// Also shrink path thresholds by `1/beta` when intervals overlap.
    pub pull_to_zero: bool,
}

impl Default for ChaosParams {
    fn default() -> Self {
        Self {
            alpha: 0.99,
            lambda_init: 0.02,
            omega_init: 0.02,
            gamma: 1.0,
            beta: 1.5,
            period: 100,
            delta_l: 1,
            delta_s: None,
            tau_init: 0,
            mag_min: 1e-4,
            mag_max: 0.25,
            pull_to_zero: false,
        }
    }
}

impl ChaosParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad("alpha must lie in (0, 1)");
        }
        if !(self.lambda_init >= 0.0 && self.omega_init >= 0.0)
            || !self.lambda_init.is_finite()
            || !self.omega_init.is_finite()
        {
            return bad("lambda_init and omega_init must be finite and non-negative");
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad("gamma must be finite and non-negative");
        }
        if !(self.beta > 1.0 && self.beta.is_finite()) {
            return bad("beta must be finite and greater than 1");
        }
        if self.period == 0 {
            return bad("period must be at least 1");
        }
        if self.delta_l == 0 || self.delta_s == Some(0) {
            return bad("delta_l and delta_s must be at least 1");
        }
        if !(self.mag_min > 0.0 && self.mag_min <= self.mag_max && self.mag_max.is_finite()) {
            return bad("magnitude bounds must satisfy 0 < mag_min <= mag_max");
        }
        Ok(())
    }

    pub fn delta_s_for(&self, depth: u32) -> u64 {
        self.delta_s.unwrap_or(u64::from(depth))
    }
}

/// Round robin: arm `(n - 1) mod K` at step `n >= 1`.
#[inline]
pub fn rr_select(n: u64, arms: usize) -> usize {
    ((n - 1) % arms as u64) as usize
}

/// UCB1 at step `n >= 1`: untried arms first (lowest index), then the
/// largest `mean + sqrt(2 ln n / T_i)`, ties to the lowest index.
pub fn ucb1_select(stats: &ArmStats, n: u64) -> usize {
    if let Some(i) = stats.pulls().iter().position(|&t| t == 0) {
        return i;
    }
    let log_n = 2.0 * (n as f64).ln();
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (i, (&t, &r)) in stats.pulls().iter().zip(stats.rewards()).enumerate() {
        let t = t as f64;
        let score = r as f64 / t + (log_n / t).sqrt();
        if score > best_score {
            best = i;
            best_score = score;
        }
    }
    best
}

/// Single-owner state of one policy during one measurement.
#[derive(Debug, Clone)]
pub struct Agent<'a> {
    kind: PolicyKind,
    params: ChaosParams,
    stats: ArmStats,
    tree: Option<ThresholdTree>,
    source: Option<&'a SignalSource>,
    tau: u64,
    delta_s: u64,
}

impl<'a> Agent<'a> {
    /// Creates a fresh agent for `arms = 2^M` arms. Signal-driven policies
    /// need `source`; their first decision reads index `tau_init + offset`.
    pub fn new(
        kind: PolicyKind,
        arms: usize,
        params: &ChaosParams,
        source: Option<&'a SignalSource>,
        offset: u64,
    ) -> Result<Self> {
        if arms < 2 || !arms.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "number of arms must be a power of two >= 2, got {arms}"
            )));
        }
        let depth = arms.trailing_zeros();
        let tree = if kind.uses_signal() {
            params.validate()?;
            if source.is_none() {
                return Err(Error::Config(format!(
                    "policy `{kind}` needs a signal source"
                )));
            }
            Some(ThresholdTree::new(
                depth,
                params.lambda_init,
                params.omega_init,
                params.mag_min,
                params.mag_max,
            ))
        } else {
            None
        };
        Ok(Self {
            kind,
            params: params.clone(),
            stats: ArmStats::new(arms),
            tree,
            source,
            tau: params.tau_init.wrapping_add(offset),
            delta_s: params.delta_s_for(depth),
        })
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn stats(&self) -> &ArmStats {
        &self.stats
    }

    pub fn tree(&self) -> Option<&ThresholdTree> {
        self.tree.as_ref()
    }

    /// Signal index the next decision starts at.
    pub fn signal_position(&self) -> u64 {
        self.tau
    }

    /// One full iteration: select, play, record, adapt. Returns the arm and
    /// the observed reward.
    pub fn step<R: Rng + ?Sized>(&mut self, env: &RewardEnvironment, rng: &mut R) -> (usize, u8) {
        debug_assert_eq!(env.arms(), self.stats.arms());
        let n = self.stats.step() + 1;
        match self.kind {
            PolicyKind::RoundRobin => {
                let arm = rr_select(n, self.stats.arms());
                self.play(env, arm, rng)
            }
            PolicyKind::Ucb1 => {
                let arm = ucb1_select(&self.stats, n);
                self.play(env, arm, rng)
            }
            PolicyKind::Chaos | PolicyKind::ChaosCi => {
                let (Some(tree), Some(source)) = (self.tree.as_mut(), self.source) else {
                    unreachable!("signal policies are built with a tree and source");
                };
                let decision = tree.select(source, self.tau, self.params.delta_l);
                let reward = env.bernoulli(decision.arm, rng);
                self.stats.record(decision.arm, reward);
                tree.update(&decision, reward, self.params.alpha);
                if self.kind == PolicyKind::ChaosCi && n.is_multiple_of(self.params.period) {
                    tree.ci_adjust(
                        &self.stats,
                        &decision,
                        self.params.gamma,
                        self.params.beta,
                        n,
                        self.params.pull_to_zero,
                    );
                }
                self.tau = self.tau.wrapping_add(self.delta_s);
                (decision.arm, reward)
            }
        }
    }

    fn play<R: Rng + ?Sized>(
        &mut self,
        env: &RewardEnvironment,
        arm: usize,
        rng: &mut R,
    ) -> (usize, u8) {
        let reward = env.bernoulli(arm, rng);
        self.stats.record(arm, reward);
        (arm, reward)
    }
}
