//! Experiment orchestration: many independent measurements per
//! (environment, policy) pair, averaged into curves, scatter points and
//! cross-environment variances.
//!
//! Every measurement owns its policy state and reward stream; the stream's
//! seed is derived from `(master seed, environment index, policy name,
//! measurement id)`, and measurement `l` starts reading the signal at
//! `l * n_max * M` (mod trace length). Aggregation folds measurements in id
//! order, so serial and parallel runs are bit-identical.

mod config;
mod output;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::env::{enumerate_envs, sample_envs, RewardEnvironment};
use crate::error::{Error, Result};
use crate::exec::Schedule;
use crate::metrics::{checkpoints, normalized_reward, MetricsSeries};
use crate::policy::{Agent, PolicyKind};
use crate::seed;
use crate::signal::{gen_synthetic, load_recorded, logistic_from, SignalSource, SyntheticKind};

pub use config::{
    EnvSource, ExperimentConfig, SignalSpec, FULL_SCALE_MEASUREMENTS, MAX_DEFAULT_SIGNAL_LEN,
};
pub use output::{write_curves, write_ensemble_means, write_scatter, write_variance};

/// A validated config with its environments and signal materialized.
#[derive(Debug, Clone)]
pub struct Experiment {
    config: ExperimentConfig,
    envs: Vec<RewardEnvironment>,
    signal: Option<SignalSource>,
}

impl Experiment {
    /// Validates `config`, builds its environments and, when a signal policy
    /// is listed, its signal.
    pub fn prepare(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let envs = build_envs(&config)?;
        let signal = if config.uses_signal() {
            Some(build_signal(&config)?)
        } else {
            None
        };
        Self::from_parts(config, envs, signal)
    }

    /// Uses caller-provided environments and signal instead of the config's
    /// descriptors.
    pub fn from_parts(
        config: ExperimentConfig,
        envs: Vec<RewardEnvironment>,
        signal: Option<SignalSource>,
    ) -> Result<Self> {
        config.validate()?;
        if envs.is_empty() {
            return Err(Error::Config("environment list is empty".into()));
        }
        if let Some(env) = envs.iter().find(|e| e.arms() != config.k) {
            return Err(Error::Config(format!(
                "environment with {} arms in a k = {} experiment",
                env.arms(),
                config.k
            )));
        }
        if config.uses_signal() {
            let Some(src) = &signal else {
                return Err(Error::Config(
                    "signal policies configured without a signal".into(),
                ));
            };
            if !config.signal.wrap() {
                let needed = last_signal_index(&config).saturating_add(1);
                if needed > src.len() as u64 {
                    return Err(Error::Config(format!(
                        "signal has {} samples but the experiment reads {needed} without wrap-around",
                        src.len()
                    )));
                }
            }
        }
        Ok(Self {
            config,
            envs,
            signal,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn envs(&self) -> &[RewardEnvironment] {
        &self.envs
    }

    pub fn signal(&self) -> Option<&SignalSource> {
        self.signal.as_ref()
    }

    /// Signal index at which measurement `id` starts reading.
    pub fn signal_offset(&self, id: u64) -> u64 {
        let raw = id
            .wrapping_mul(self.config.n_max)
            .wrapping_mul(u64::from(self.config.depth()));
        match &self.signal {
            Some(src) if self.config.signal.wrap() => raw % src.len() as u64,
            _ => raw,
        }
    }

    /// One measurement of `policy` on environment `env_index`.
    pub fn run_measurement(
        &self,
        env_index: usize,
        policy: PolicyKind,
        id: u64,
    ) -> Result<MetricsSeries> {
        let env = self.envs.get(env_index).ok_or_else(|| {
            Error::InvalidArgument(format!("environment index {env_index} out of range"))
        })?;
        let cfg = &self.config;
        let source = if policy.uses_signal() {
            self.signal.as_ref()
        } else {
            None
        };
        let mut agent = Agent::new(policy, cfg.k, &cfg.chaos, source, self.signal_offset(id))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed::measurement_seed(
            cfg.seed,
            env_index,
            policy.name(),
            id,
        ));
        let mut series = MetricsSeries::new(cfg.k, cfg.top_k);
        for checkpoint in checkpoints(cfg.n_max, cfg.checkpoint_stride) {
            while agent.stats().step() < checkpoint {
                agent.step(env, &mut rng);
            }
            series.record(agent.stats(), env);
        }
        Ok(series)
    }

    /// Averages `measurements` runs of every (environment, policy) pair.
    pub fn run_ensemble(&self, schedule: Schedule) -> Result<EnsembleResult> {
        let cfg = &self.config;
        let policies = cfg.policies.clone();
        let cells = self.envs.len() * policies.len();
        let measurements = cfg.measurements;
        let results = schedule.install(|| {
            schedule.map(cells, |c| -> Result<CellResult> {
                let env_index = c / policies.len();
                let policy = policies[c % policies.len()];
                let runs = schedule.map(measurements as usize, |id| {
                    self.run_measurement(env_index, policy, id as u64)
                });
                let mut mean = MeanSeries::zeros(cfg.k, cfg.n_max, cfg.checkpoint_stride);
                for run in runs {
                    mean.accumulate(&run?);
                }
                mean.finish(measurements);
                Ok(CellResult {
                    env_index,
                    policy,
                    series: mean,
                })
            })
        });
        Ok(EnsembleResult {
            policies,
            envs: self.envs.clone(),
            measurements,
            cells: results.into_iter().collect::<Result<_>>()?,
        })
    }
}

fn last_signal_index(cfg: &ExperimentConfig) -> u64 {
    let depth = u64::from(cfg.depth());
    let last_offset = (cfg.measurements - 1) * cfg.n_max * depth;
    cfg.chaos.tau_init
        + last_offset
        + (cfg.n_max - 1) * cfg.chaos.delta_s_for(cfg.depth())
        + (depth - 1) * cfg.chaos.delta_l
}

fn build_envs(cfg: &ExperimentConfig) -> Result<Vec<RewardEnvironment>> {
    match &cfg.environments {
        EnvSource::Enumerated { values, gap } => enumerate_envs(cfg.k, values, *gap),
        EnvSource::Sampled {
            values,
            count,
            seed,
        } => {
            let seed = seed.unwrap_or_else(|| seed::derive(cfg.seed, "environments", &[]));
            sample_envs(cfg.k, *count, values, seed)
        }
        EnvSource::Explicit { list } => list.iter().cloned().map(RewardEnvironment::new).collect(),
    }
    .map_err(|e| match e {
        Error::InvalidArgument(msg) => Error::Config(msg),
        other => other,
    })
}

fn build_signal(cfg: &ExperimentConfig) -> Result<SignalSource> {
    let default_len = || {
        let wanted = cfg.n_max * u64::from(cfg.depth()) * cfg.measurements + cfg.chaos.tau_init;
        (wanted.min(MAX_DEFAULT_SIGNAL_LEN as u64) as usize).max(cfg.k)
    };
    let derived = || seed::derive(cfg.seed, "signal", &[]);
    match &cfg.signal {
        SignalSpec::Uniform { length, seed, .. } => gen_synthetic(
            SyntheticKind::UniformIid,
            length.unwrap_or_else(default_len),
            seed.unwrap_or_else(derived),
        ),
        SignalSpec::Logistic {
            length, seed, x0, ..
        } => {
            let len = length.unwrap_or_else(default_len);
            match x0 {
                Some(x0) => logistic_from(*x0, len),
                None => gen_synthetic(
                    SyntheticKind::LogisticMap,
                    len,
                    seed.unwrap_or_else(derived),
                ),
            }
        }
        SignalSpec::Recorded { path, format, .. } => load_recorded(path, *format),
    }
    .map_err(|e| match e {
        Error::InvalidArgument(msg) => Error::Config(msg),
        Error::Io { path, source } => {
            Error::Config(format!("cannot read signal {}: {source}", path.display()))
        }
        Error::Parse { .. } | Error::EmptyTrace(_) => Error::Config(e.to_string()),
        other => other,
    })
}

/// Checkpointed means over a set of measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanSeries {
    pub arms: usize,
    pub steps: Vec<u64>,
    pub reward: Vec<f64>,
    pub regret: Vec<f64>,
    pub cor: Vec<f64>,
    /// Row-major `steps.len() x arms` mean pull counts.
    pub pulls: Vec<f64>,
}

impl MeanSeries {
    fn zeros(arms: usize, n_max: u64, stride: u64) -> Self {
        let steps = checkpoints(n_max, stride);
        let rows = steps.len();
        Self {
            arms,
            steps,
            reward: vec![0.0; rows],
            regret: vec![0.0; rows],
            cor: vec![0.0; rows],
            pulls: vec![0.0; rows * arms],
        }
    }

    fn accumulate(&mut self, run: &MetricsSeries) {
        debug_assert_eq!(run.steps(), self.steps.as_slice());
        for row in 0..self.steps.len() {
            self.reward[row] += run.reward()[row] as f64;
            self.regret[row] += run.regret()[row];
            self.cor[row] += f64::from(run.cor()[row]);
            for (acc, &t) in self.pulls[row * self.arms..(row + 1) * self.arms]
                .iter_mut()
                .zip(run.pulls_at(row))
            {
                *acc += t as f64;
            }
        }
    }

    fn finish(&mut self, count: u64) {
        let n = count as f64;
        for v in self
            .reward
            .iter_mut()
            .chain(&mut self.regret)
            .chain(&mut self.cor)
            .chain(&mut self.pulls)
        {
            *v /= n;
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn pulls_at(&self, row: usize) -> &[f64] {
        &self.pulls[row * self.arms..(row + 1) * self.arms]
    }

    /// Mean pull count of `arm` at every checkpoint.
    pub fn arm_pulls(&self, arm: usize) -> Vec<f64> {
        (0..self.len())
            .map(|row| self.pulls[row * self.arms + arm])
            .collect()
    }

    pub fn last(&self) -> usize {
        self.steps.len() - 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub env_index: usize,
    pub policy: PolicyKind,
    pub series: MeanSeries,
}

/// One environment's final `(reward†, COR)` point for one policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterPoint {
    pub env_index: usize,
    pub policy: PolicyKind,
    pub reward_norm: f64,
    pub cor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceRow {
    pub policy: PolicyKind,
    pub var_cor: f64,
    pub var_reward_norm: f64,
}

/// Cross-environment average curve of one policy.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleMean {
    pub policy: PolicyKind,
    pub steps: Vec<u64>,
    pub cor: Vec<f64>,
    pub reward_norm: Vec<f64>,
    pub regret: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub policies: Vec<PolicyKind>,
    pub envs: Vec<RewardEnvironment>,
    pub measurements: u64,
    /// Environment-major, then in `policies` order.
    pub cells: Vec<CellResult>,
}

impl EnsembleResult {
    pub fn cell(&self, env_index: usize, policy: PolicyKind) -> Option<&CellResult> {
        let p = self.policies.iter().position(|&q| q == policy)?;
        self.cells.get(env_index * self.policies.len() + p)
    }

    pub fn cells_for(&self, policy: PolicyKind) -> impl Iterator<Item = &CellResult> {
        self.cells.iter().filter(move |c| c.policy == policy)
    }

    /// Final-step scatter points, in cell order.
    pub fn scatter(&self) -> Vec<ScatterPoint> {
        self.cells
            .iter()
            .map(|c| {
                let row = c.series.last();
                let env = &self.envs[c.env_index];
                ScatterPoint {
                    env_index: c.env_index,
                    policy: c.policy,
                    reward_norm: normalized_reward(c.series.reward[row], env, c.series.steps[row]),
                    cor: c.series.cor[row],
                }
            })
            .collect()
    }

    /// Per-policy averages over environments at every checkpoint.
    pub fn ensemble_means(&self) -> Vec<EnsembleMean> {
        self.policies
            .iter()
            .map(|&policy| {
                let cells: Vec<&CellResult> = self.cells_for(policy).collect();
                let steps = cells[0].series.steps.clone();
                let count = cells.len() as f64;
                let avg = |f: &dyn Fn(&CellResult, usize) -> f64| -> Vec<f64> {
                    (0..steps.len())
                        .map(|row| cells.iter().map(|c| f(c, row)).sum::<f64>() / count)
                        .collect()
                };
                EnsembleMean {
                    policy,
                    cor: avg(&|c, row| c.series.cor[row]),
                    regret: avg(&|c, row| c.series.regret[row]),
                    reward_norm: avg(&|c, row| {
                        normalized_reward(
                            c.series.reward[row],
                            &self.envs[c.env_index],
                            c.series.steps[row],
                        )
                    }),
                    steps,
                }
            })
            .collect()
    }
}

/// Unbiased sample variance; `None` for fewer than two values.
pub fn sample_variance(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    Some(values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0))
}

/// Per-policy sample variance of final COR and normalized reward across
/// environments. Needs at least two environments.
pub fn variance_table(result: &EnsembleResult) -> Result<Vec<VarianceRow>> {
    if result.envs.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "variance needs at least 2 environments, got {}",
            result.envs.len()
        )));
    }
    let scatter = result.scatter();
    Ok(result
        .policies
        .iter()
        .map(|&policy| {
            let (cor, reward): (Vec<f64>, Vec<f64>) = scatter
                .iter()
                .filter(|p| p.policy == policy)
                .map(|p| (p.cor, p.reward_norm))
                .unzip();
            VarianceRow {
                policy,
                var_cor: sample_variance(&cor).unwrap_or(0.0),
                var_reward_norm: sample_variance(&reward).unwrap_or(0.0),
            }
        })
        .collect())
}
