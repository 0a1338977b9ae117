use std::ops::Range;

/// Per-arm cumulative pull counts `T_i(n)` and rewards `R_i(n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArmStats {
    pulls: Vec<u64>,
    rewards: Vec<u64>,
    step: u64,
}

impl ArmStats {
    pub fn new(arms: usize) -> Self {
        Self {
            pulls: vec![0; arms],
            rewards: vec![0; arms],
            step: 0,
        }
    }

    /// Builds statistics from explicit counts; `step` is the total pull count.
    ///
    /// # Panics
    /// If the vectors differ in length or some arm has more rewards than pulls.
    pub fn from_counts(pulls: Vec<u64>, rewards: Vec<u64>) -> Self {
        assert_eq!(pulls.len(), rewards.len(), "pulls/rewards length mismatch");
        assert!(
            pulls.iter().zip(&rewards).all(|(t, r)| r <= t),
            "rewards exceed pulls"
        );
        let step = pulls.iter().sum();
        Self {
            pulls,
            rewards,
            step,
        }
    }

    #[inline]
    pub fn record(&mut self, arm: usize, reward: u8) {
        self.pulls[arm] += 1;
        self.rewards[arm] += u64::from(reward);
        self.step += 1;
    }

    pub fn arms(&self) -> usize {
        self.pulls.len()
    }

    pub fn pulls(&self) -> &[u64] {
        &self.pulls
    }

    pub fn rewards(&self) -> &[u64] {
        &self.rewards
    }

    /// Number of completed steps `n`.
    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn total_reward(&self) -> u64 {
        self.rewards.iter().sum()
    }

    /// Sample mean of arm `i`; an unpulled arm counts as 0.
    #[inline]
    pub fn sample_mean(&self, arm: usize) -> f64 {
        match self.pulls[arm] {
            0 => 0.0,
            t => self.rewards[arm] as f64 / t as f64,
        }
    }

    pub fn sample_means(&self) -> Vec<f64> {
        (0..self.arms()).map(|i| self.sample_mean(i)).collect()
    }
}

/// A pooled reward estimate `p_hat ± half_width` over a set of arms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    pub p_hat: f64,
    pub half_width: f64,
}

impl ConfidenceInterval {
    pub fn lower(&self) -> f64 {
        self.p_hat - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.p_hat + self.half_width
    }

    /// Closed-interval intersection; touching endpoints overlap.
    pub fn overlaps(&self, other: &Self) -> bool {
        self.lower() <= other.upper() && other.lower() <= self.upper()
    }
}

/// Pooled sample mean over `arms` with half-width `gamma * sqrt(ln n / sum T)`.
///
/// An unexplored set has `p_hat = 0` and infinite width; `gamma = 0` always
/// yields zero width.
pub fn ci_bounds(stats: &ArmStats, arms: Range<usize>, gamma: f64, n: u64) -> ConfidenceInterval {
    let pulls: u64 = stats.pulls[arms.clone()].iter().sum();
    let rewards: u64 = stats.rewards[arms].iter().sum();
    if pulls == 0 {
        let half_width = if gamma == 0.0 { 0.0 } else { f64::INFINITY };
        return ConfidenceInterval {
            p_hat: 0.0,
            half_width,
        };
    }
    let log_n = (n.max(1) as f64).ln();
    ConfidenceInterval {
        p_hat: rewards as f64 / pulls as f64,
        half_width: gamma * (log_n / pulls as f64).sqrt(),
    }
}
