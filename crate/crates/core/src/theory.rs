//! Expected threshold dynamics of the two-armed threshold policy under a
//! uniform `[-1/2, 1/2]` signal.
//!
//! With `w(n)` the threshold at the start of step `n`,
//! `w(n+1) = alpha * w(n) + q(n)` where `q` is `+Λ` (arm 0 paid), `-Λ`
//! (arm 1 paid), `+Ω` (arm 1 missed) or `-Ω` (arm 0 missed). While
//! `|w| <= 1/2`, `P(A = 0) = 1/2 + w`, which makes the mean affine:
//! `E[w(n+1)] = P + Q * E[w(n)]` with
//!
//! ```text
//! P = (Λ + Ω)(mu0 - mu1) / 2
//! Q = alpha + (Λ + Ω)(mu0 + mu1) - 2Ω
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Schedule;
use crate::seed;

/// Trials per deterministic reduction block.
const MC_BLOCK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoArmModel {
    pub mu0: f64,
    pub mu1: f64,
    pub lambda: f64,
    pub omega: f64,
    pub alpha: f64,
    /// Initial (expected) threshold `E[w(1)]`.
    pub w1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Both arms keep a selection probability inside (0, 1).
    LinearSelection,
    /// The threshold leaves `(-1/2, 1/2)` and one arm dominates.
    Saturating,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Self::LinearSelection => "linear-selection",
            Self::Saturating => "saturating",
        }
    }
}

impl TwoArmModel {
    pub fn validate(&self) -> Result<()> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if !prob(self.mu0) || !prob(self.mu1) {
            return Err(Error::InvalidArgument(
                "mu0 and mu1 must lie in [0, 1]".into(),
            ));
        }
        if !(self.lambda >= 0.0
            && self.omega >= 0.0
            && self.lambda.is_finite()
            && self.omega.is_finite())
        {
            return Err(Error::InvalidArgument(
                "lambda and omega must be finite and non-negative".into(),
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidArgument("alpha must lie in (0, 1)".into()));
        }
        if !self.w1.is_finite() {
            return Err(Error::InvalidArgument("w1 must be finite".into()));
        }
        Ok(())
    }

    /// Drift `P` and contraction `Q`.
    pub fn pq(&self) -> (f64, f64) {
        let sum = self.lambda + self.omega;
        let p = 0.5 * sum * (self.mu0 - self.mu1);
        let q = self.alpha + sum * (self.mu0 + self.mu1) - 2.0 * self.omega;
        (p, q)
    }

    /// `P / (1 - Q)`, the fixed point of the mean recurrence.
    pub fn fixed_point(&self) -> Option<f64> {
        let (p, q) = self.pq();
        (q != 1.0).then(|| p / (1.0 - q))
    }

    /// Closed-form `E[w(n)]` for `n >= 1`; `w1 + P (n - 1)` when `Q = 1`.
    pub fn expected_threshold(&self, n: u64) -> f64 {
        assert!(n >= 1, "steps are 1-based");
        let (p, q) = self.pq();
        if q == 1.0 {
            return self.w1 + p * (n - 1) as f64;
        }
        let fixed = p / (1.0 - q);
        fixed + q.powf((n - 1) as f64) * (self.w1 - fixed)
    }

    pub fn classify(&self) -> Regime {
        let (p, q) = self.pq();
        let linear = if q == 1.0 {
            p == 0.0 && self.w1.abs() < 0.5
        } else {
            (p / (1.0 - q)).abs() < 0.5 && q.abs() < 1.0
        };
        if linear {
            Regime::LinearSelection
        } else {
            Regime::Saturating
        }
    }
}

/// Trial-averaged threshold at one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McPoint {
    pub step: u64,
    pub mean: f64,
    pub stderr: f64,
}

/// Running mean / squared-deviation accumulator per step (Chan et al. merge).
#[derive(Debug, Clone)]
struct Moments {
    count: f64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn new(steps: usize) -> Self {
        Self {
            count: 0.0,
            mean: vec![0.0; steps],
            m2: vec![0.0; steps],
        }
    }

    fn push(&mut self, trajectory: &[f64]) {
        self.count += 1.0;
        for ((mean, m2), &x) in self.mean.iter_mut().zip(&mut self.m2).zip(trajectory) {
            let delta = x - *mean;
            *mean += delta / self.count;
            *m2 += delta * (x - *mean);
        }
    }

    fn merge(&mut self, other: &Self) {
        if other.count == 0.0 {
            return;
        }
        let total = self.count + other.count;
        for i in 0..self.mean.len() {
            let delta = other.mean[i] - self.mean[i];
            self.mean[i] += delta * other.count / total;
            self.m2[i] += other.m2[i] + delta * delta * self.count * other.count / total;
        }
        self.count = total;
    }
}

/// Simulates the threshold recurrence directly for `trials` independent
/// runs of `n_max` steps and reports the per-step mean and standard error.
///
/// Each trial draws `s ~ U[-1/2, 1/2]` and picks arm 0 iff `s < w`, so the
/// selection probability saturates at 0 or 1 once `|w| > 1/2`; `w` itself
/// is not clamped. Trial `t` uses a seed derived from `(seed, t)` and blocks
/// are reduced in index order, so results do not depend on `schedule`.
pub fn mc_two_arm(
    model: &TwoArmModel,
    n_max: u64,
    trials: usize,
    seed: u64,
    schedule: Schedule,
) -> Result<Vec<McPoint>> {
    model.validate()?;
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    if n_max == 0 {
        return Err(Error::InvalidArgument("need at least one step".into()));
    }
    let steps = n_max as usize;
    let blocks = trials.div_ceil(MC_BLOCK);
    let partials = schedule.install(|| {
        schedule.map(blocks, |b| {
            let mut acc = Moments::new(steps);
            let mut traj = vec![0.0; steps];
            for trial in b * MC_BLOCK..((b + 1) * MC_BLOCK).min(trials) {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(seed::derive(seed, "two-arm", &[trial as u64]));
                simulate_trial(model, &mut rng, &mut traj);
                acc.push(&traj);
            }
            acc
        })
    });
    let mut total = Moments::new(steps);
    for p in &partials {
        total.merge(p);
    }
    let n = total.count;
    Ok((0..steps)
        .map(|i| {
            let var = if n > 1.0 {
                total.m2[i] / (n - 1.0)
            } else {
                0.0
            };
            McPoint {
                step: i as u64 + 1,
                mean: total.mean[i],
                stderr: (var.max(0.0) / n).sqrt(),
            }
        })
        .collect())
}

fn simulate_trial<R: Rng>(model: &TwoArmModel, rng: &mut R, traj: &mut [f64]) {
    let mut w = model.w1;
    let last = traj.len() - 1;
    for (i, slot) in traj.iter_mut().enumerate() {
        *slot = w;
        if i == last {
            break;
        }
        let s = rng.random::<f64>() - 0.5;
        let q = if s < w {
            if rng.random::<f64>() < model.mu0 {
                model.lambda
            } else {
                -model.omega
            }
        } else if rng.random::<f64>() < model.mu1 {
            -model.lambda
        } else {
            model.omega
        };
        w = model.alpha * w + q;
    }
}
