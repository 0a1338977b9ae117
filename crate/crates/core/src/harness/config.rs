use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::env::default_grid;
use crate::error::{Error, Result};
use crate::metrics::DEFAULT_TOP_K;
use crate::policy::{ChaosParams, PolicyKind};
use crate::signal::TraceFormat;

/// Measurements per environment used by the published single-environment
/// curves; selected with the CLI's full-scale switch.
pub const FULL_SCALE_MEASUREMENTS: u64 = 12_000;

/// Upper bound on the default synthetic signal length (samples).
pub const MAX_DEFAULT_SIGNAL_LEN: usize = 1 << 22;

/// One experiment: every listed policy on every environment, `measurements`
/// independent runs of `n_max` steps each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Number of arms `K` (a power of two).
    pub k: usize,
    #[serde(default = "default_n_max")]
    pub n_max: u64,
    /// Measurements per (environment, policy), `l_m`.
    #[serde(default = "default_measurements")]
    pub measurements: u64,
    #[serde(default = "default_policies")]
    pub policies: Vec<PolicyKind>,
    /// Master seed; every random stream derives from it.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_stride")]
    pub checkpoint_stride: u64,
    /// Ranks checked by the correct-order rate (capped at `k`).
    #[serde(default = "default_top_k")]
    pub top_k: usize,
    pub environments: EnvSource,
    #[serde(default)]
    pub signal: SignalSpec,
    #[serde(default)]
    pub chaos: ChaosParams,
}

fn default_n_max() -> u64 {
    10_000
}
fn default_measurements() -> u64 {
    100
}
fn default_policies() -> Vec<PolicyKind> {
    PolicyKind::ALL.to_vec()
}
fn default_stride() -> u64 {
    100
}
fn default_top_k() -> usize {
    DEFAULT_TOP_K
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EnvSource {
    /// Every ordered assignment from `values` with max pairwise gap `gap`.
    Enumerated {
        #[serde(default = "default_grid")]
        values: Vec<f64>,
        gap: f64,
    },
    /// `count` random ordered subsets of `values`.
    Sampled {
        #[serde(default = "default_grid")]
        values: Vec<f64>,
        count: usize,
        /// Defaults to a seed derived from the master seed.
        #[serde(default)]
        seed: Option<u64>,
    },
    Explicit {
        list: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SignalSpec {
    Uniform {
        #[serde(default)]
        length: Option<usize>,
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default = "default_true")]
        wrap: bool,
    },
    Logistic {
        #[serde(default)]
        length: Option<usize>,
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default)]
        x0: Option<f64>,
        #[serde(default = "default_true")]
        wrap: bool,
    },
    Recorded {
        path: PathBuf,
        format: TraceFormat,
        #[serde(default = "default_true")]
        wrap: bool,
    },
}

impl Default for SignalSpec {
    fn default() -> Self {
        Self::Uniform {
            length: None,
            seed: None,
            wrap: true,
        }
    }
}

impl SignalSpec {
    /// Whether reads past the end of the trace may wrap to its start.
    pub fn wrap(&self) -> bool {
        match *self {
            Self::Uniform { wrap, .. }
            | Self::Logistic { wrap, .. }
            | Self::Recorded { wrap, .. } => wrap,
        }
    }
}

impl ExperimentConfig {
    /// A config with protocol defaults for the given arms and environments.
    pub fn new(k: usize, environments: EnvSource) -> Self {
        Self {
            k,
            n_max: default_n_max(),
            measurements: default_measurements(),
            policies: default_policies(),
            seed: 0,
            checkpoint_stride: default_stride(),
            top_k: default_top_k(),
            environments,
            signal: SignalSpec::default(),
            chaos: ChaosParams::default(),
        }
    }

    pub fn depth(&self) -> u32 {
        self.k.trailing_zeros()
    }

    pub fn uses_signal(&self) -> bool {
        self.policies.iter().any(|p| p.uses_signal())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.k < 2 || !self.k.is_power_of_two() {
            return bad(format!("k must be a power of two >= 2, got {}", self.k));
        }
        if self.n_max == 0 {
            return bad("n_max must be at least 1".into());
        }
        if self.measurements == 0 {
            return bad("measurements must be at least 1".into());
        }
        if self.checkpoint_stride == 0 {
            return bad("checkpoint_stride must be at least 1".into());
        }
        if self.top_k == 0 {
            return bad("top_k must be at least 1".into());
        }
        if self.policies.is_empty() {
            return bad("at least one policy is required".into());
        }
        let mut seen = Vec::new();
        for p in &self.policies {
            if seen.contains(p) {
                return bad(format!("policy `{p}` listed twice"));
            }
            seen.push(*p);
        }
        self.chaos.validate()?;
        if let SignalSpec::Logistic { x0: Some(x0), .. } = self.signal {
            if !(0.0..=1.0).contains(&x0) {
                return bad(format!("logistic x0 {x0} outside [0, 1]"));
            }
        }
        Ok(())
    }
}
