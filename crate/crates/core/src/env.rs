//! Bernoulli reward environments and the generation protocols used by the
//! benchmark sweeps.

use std::io::{self, Write};

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Absolute tolerance used when matching the max pairwise gap against grid
/// arithmetic such as `0.9 - 0.6`.
const GAP_TOLERANCE: f64 = 1e-9;

/// The nine-point probability grid `{0.1, 0.2, ..., 0.9}`.
pub fn default_grid() -> Vec<f64> {
    (1..=9).map(|i| f64::from(i) / 10.0).collect()
}

/// A vector of Bernoulli reward means `(mu_0, ..., mu_{K-1})` with `K = 2^M`.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardEnvironment {
    mus: Vec<f64>,
    depth: u32,
    /// Arm indices sorted by decreasing mean (`order[0]` is the best arm).
    order: Vec<usize>,
}

impl RewardEnvironment {
    /// Builds an environment from protocol values: every mean must lie in
    /// the open interval (0, 1).
    pub fn new(mus: Vec<f64>) -> Result<Self> {
        if let Some(bad) = mus.iter().find(|&&m| !(m > 0.0 && m < 1.0)) {
            return Err(Error::InvalidArgument(format!(
                "reward mean {bad} outside (0, 1)"
            )));
        }
        Self::with_closed_means(mus)
    }

    /// Like [`RewardEnvironment::new`] but allows the degenerate means 0 and 1.
    pub fn with_closed_means(mus: Vec<f64>) -> Result<Self> {
        let k = mus.len();
        if k < 2 || !k.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "number of arms must be a power of two >= 2, got {k}"
            )));
        }
        if let Some(bad) = mus.iter().find(|m| !(0.0..=1.0).contains(*m)) {
            return Err(Error::InvalidArgument(format!(
                "reward mean {bad} outside [0, 1]"
            )));
        }
        if mus.iter().tuple_combinations().any(|(a, b)| a == b) {
            return Err(Error::InvalidArgument(
                "reward means must be pairwise distinct".into(),
            ));
        }
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| mus[b].total_cmp(&mus[a]).then(a.cmp(&b)));
        Ok(Self {
            depth: k.trailing_zeros(),
            mus,
            order,
        })
    }

    pub fn mus(&self) -> &[f64] {
        &self.mus
    }

    pub fn arms(&self) -> usize {
        self.mus.len()
    }

    /// `M = log2 K`.
    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn mean(&self, arm: usize) -> f64 {
        self.mus[arm]
    }

    pub fn best_arm(&self) -> usize {
        self.order[0]
    }

    pub fn best_mean(&self) -> f64 {
        self.mus[self.order[0]]
    }

    /// True ranking: `true_order()[k]` is the (k+1)-th best arm.
    pub fn true_order(&self) -> &[usize] {
        &self.order
    }

    /// Draws a Bernoulli reward for `arm`, consuming exactly one uniform draw.
    #[inline]
    pub fn draw_reward<R: Rng + ?Sized>(&self, arm: usize, rng: &mut R) -> Result<u8> {
        let mu = *self.mus.get(arm).ok_or_else(|| {
            Error::InvalidArgument(format!("arm {arm} out of range for K = {}", self.arms()))
        })?;
        Ok(u8::from(rng.random::<f64>() < mu))
    }

    #[inline]
    pub(crate) fn bernoulli<R: Rng + ?Sized>(&self, arm: usize, rng: &mut R) -> u8 {
        u8::from(rng.random::<f64>() < self.mus[arm])
    }
}

fn validate_grid(k: usize, values: &[f64]) -> Result<()> {
    if k < 2 || !k.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "number of arms must be a power of two >= 2, got {k}"
        )));
    }
    if k > values.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot draw {k} distinct means from {} values",
            values.len()
        )));
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "value set must be sorted ascending without duplicates".into(),
        ));
    }
    Ok(())
}

/// All ordered assignments of `k` distinct grid values whose maximum pairwise
/// gap equals `max_gap`, in lexicographic order of grid indices.
pub fn enumerate_envs(k: usize, values: &[f64], max_gap: f64) -> Result<Vec<RewardEnvironment>> {
    validate_grid(k, values)?;
    values
        .iter()
        .copied()
        .permutations(k)
        .filter(|mus| {
            let (lo, hi) = mus
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &m| {
                    (lo.min(m), hi.max(m))
                });
            ((hi - lo) - max_gap).abs() <= GAP_TOLERANCE
        })
        .map(RewardEnvironment::with_closed_means)
        .collect()
}

/// `count` environments, each a uniformly random ordered `k`-subset of
/// `values`.
pub fn sample_envs(
    k: usize,
    count: usize,
    values: &[f64],
    seed: u64,
) -> Result<Vec<RewardEnvironment>> {
    validate_grid(k, values)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool = values.to_vec();
    (0..count)
        .map(|_| {
            let (chosen, _) = pool.partial_shuffle(&mut rng, k);
            RewardEnvironment::with_closed_means(chosen.to_vec())
        })
        .collect()
}

/// Writes one row per environment with columns `mu_0 .. mu_{K-1}`.
pub fn write_envs_csv<W: Write>(mut out: W, envs: &[RewardEnvironment]) -> io::Result<()> {
    let k = envs.first().map_or(0, RewardEnvironment::arms);
    let header = (0..k).map(|i| format!("mu_{i}")).join(",");
    writeln!(out, "{header}")?;
    for env in envs {
        writeln!(out, "{}", env.mus().iter().join(","))?;
    }
    out.flush()
}
