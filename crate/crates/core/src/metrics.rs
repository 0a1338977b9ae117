//! Evaluation quantities: cumulative reward, regret, correct order rate and
//! normalized reward.

use std::io::{self, Write};

use crate::env::RewardEnvironment;
use crate::policy::ArmStats;

/// Number of top-ranked arms whose order is checked by default.
pub const DEFAULT_TOP_K: usize = 4;

/// Expected regret `sum_{i != i*} (mu* - mu_i) * t_i`.
pub fn regret_of(env: &RewardEnvironment, pulls: &[u64]) -> f64 {
    assert_eq!(pulls.len(), env.arms(), "pull vector length must equal K");
    let best = env.best_mean();
    env.mus()
        .iter()
        .zip(pulls)
        .map(|(&mu, &t)| (best - mu) * t as f64)
        .sum()
}

/// Arms ranked by decreasing sample mean; unpulled arms count as 0 and ties
/// go to the lower index.
pub fn estimated_order(stats: &ArmStats) -> Vec<usize> {
    let means = stats.sample_means();
    let mut order: Vec<usize> = (0..means.len()).collect();
    order.sort_by(|&a, &b| means[b].total_cmp(&means[a]).then(a.cmp(&b)));
    order
}

/// 1 if the estimated top `top_k` ranking matches the true one exactly.
pub fn cor_of(stats: &ArmStats, env: &RewardEnvironment, top_k: usize) -> u8 {
    let k = top_k.min(env.arms());
    let est = estimated_order(stats);
    u8::from(est[..k] == env.true_order()[..k])
}

/// `reward / (mu* * n)`.
pub fn normalized_reward(cum_reward: f64, env: &RewardEnvironment, n: u64) -> f64 {
    assert!(n >= 1, "normalized reward needs n >= 1");
    cum_reward / (env.best_mean() * n as f64)
}

/// Step 1, every multiple of `stride`, and `n_max`, ascending and distinct.
pub fn checkpoints(n_max: u64, stride: u64) -> Vec<u64> {
    assert!(
        n_max >= 1 && stride >= 1,
        "n_max and stride must be positive"
    );
    let mut steps = vec![1];
    steps.extend((1..=n_max / stride).map(|i| i * stride).filter(|&s| s > 1));
    if *steps.last().unwrap() != n_max {
        steps.push(n_max);
    }
    steps
}

/// Checkpointed trajectory of one measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsSeries {
    arms: usize,
    top_k: usize,
    steps: Vec<u64>,
    reward: Vec<u64>,
    regret: Vec<f64>,
    cor: Vec<u8>,
    pulls: Vec<u64>,
}

impl MetricsSeries {
    pub fn new(arms: usize, top_k: usize) -> Self {
        Self {
            arms,
            top_k,
            steps: Vec::new(),
            reward: Vec::new(),
            regret: Vec::new(),
            cor: Vec::new(),
            pulls: Vec::new(),
        }
    }

    /// Snapshots `stats` at its current step.
    pub fn record(&mut self, stats: &ArmStats, env: &RewardEnvironment) {
        debug_assert!(self.steps.last().is_none_or(|&s| s < stats.step()));
        self.steps.push(stats.step());
        self.reward.push(stats.total_reward());
        self.regret.push(regret_of(env, stats.pulls()));
        self.cor.push(cor_of(stats, env, self.top_k));
        self.pulls.extend_from_slice(stats.pulls());
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[u64] {
        &self.steps
    }

    pub fn reward(&self) -> &[u64] {
        &self.reward
    }

    pub fn regret(&self) -> &[f64] {
        &self.regret
    }

    pub fn cor(&self) -> &[u8] {
        &self.cor
    }

    /// `T_i` vector at checkpoint `row`.
    pub fn pulls_at(&self, row: usize) -> &[u64] {
        &self.pulls[row * self.arms..(row + 1) * self.arms]
    }

    /// Rows `step,reward,regret,cor,t_0..t_{K-1}` with a header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "step,reward,regret,cor")?;
        for i in 0..self.arms {
            write!(out, ",t_{i}")?;
        }
        writeln!(out)?;
        for row in 0..self.len() {
            write!(
                out,
                "{},{},{},{}",
                self.steps[row], self.reward[row], self.regret[row], self.cor[row]
            )?;
            for t in self.pulls_at(row) {
                write!(out, ",{t}")?;
            }
            writeln!(out)?;
        }
        out.flush()
    }
}
