//! Invariant checks shared by the property tests and the acceptance suite.
//! Each check takes a randomly generated case and returns `Err` with a
//! description on violation.

#![allow(dead_code)]

use chaos_bandit::env::RewardEnvironment;
use chaos_bandit::policy::{
    arm_sets, Agent, ArmStats, ChaosParams, Node, PolicyKind, ThresholdTree,
};
use chaos_bandit::signal::{gen_synthetic, Origin, SignalSource, SyntheticKind};
use chaos_bandit::theory::TwoArmModel;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Check = Result<(), TestCaseError>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

/// A tree with arbitrary in-range thresholds and magnitudes.
#[derive(Debug, Clone)]
pub struct TreeCase {
    pub depth: u32,
    pub thresholds: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub omegas: Vec<f64>,
    pub samples: Vec<f64>,
    pub alpha: f64,
    pub reward: u8,
}

impl TreeCase {
    pub fn build(&self) -> ThresholdTree {
        let mut tree = ThresholdTree::new(self.depth, 0.0, 0.0, 1e-4, 1.0);
        for level in 1..=self.depth {
            for prefix in 0..(1usize << (level - 1)) {
                let node = Node { level, prefix };
                let i = node.index();
                tree.set_threshold(node, self.thresholds[i]);
                tree.set_magnitudes(node, self.lambdas[i], self.omegas[i]);
            }
        }
        tree
    }

    pub fn signal(&self) -> SignalSource {
        SignalSource::from_normalized(self.samples.clone(), Origin::Recorded).unwrap()
    }
}

pub fn tree_case() -> impl Strategy<Value = TreeCase> {
    (1u32..=5).prop_flat_map(|depth| {
        let nodes = (1usize << depth) - 1;
        (
            Just(depth),
            prop::collection::vec(-0.5f64..=0.5, nodes),
            prop::collection::vec(0.0f64..1.0, nodes),
            prop::collection::vec(0.0f64..1.0, nodes),
            prop::collection::vec(-0.5f64..=0.5, depth as usize),
            0.01f64..0.999,
            0u8..=1,
        )
            .prop_map(
                |(depth, thresholds, lambdas, omegas, samples, alpha, reward)| TreeCase {
                    depth,
                    thresholds,
                    lambdas,
                    omegas,
                    samples,
                    alpha,
                    reward,
                },
            )
    })
}

/// Thresholds stay inside `[-1/2, 1/2]` after any update.
pub fn check_threshold_clamping(case: &TreeCase) -> Check {
    let mut tree = case.build();
    let src = case.signal();
    let decision = tree.select(&src, 0, 1);
    tree.update(&decision, case.reward, case.alpha);
    ensure(
        tree.thresholds().iter().all(|t| (-0.5..=0.5).contains(t)),
        || format!("threshold escaped range: {:?}", tree.thresholds()),
    )
}

/// Only the `M` path thresholds change, each by the expected signed step.
pub fn check_path_only_mutation(case: &TreeCase) -> Check {
    let before = case.build();
    let src = case.signal();
    let decision = before.select(&src, 0, 1);
    let mut after = before.clone();
    after.update(&decision, case.reward, case.alpha);
    let path: Vec<usize> = decision.path().map(Node::index).collect();
    for i in 0..before.len() {
        let (old, new) = (before.thresholds()[i], after.thresholds()[i]);
        match path.iter().position(|&p| p == i) {
            None => ensure(old.to_bits() == new.to_bits(), || {
                format!("off-path node {i} moved")
            })?,
            Some(m) => {
                let bit = decision.bit(m as u32 + 1);
                let step = match (case.reward, bit) {
                    (1, 0) => before.lambdas()[i],
                    (1, _) => -before.lambdas()[i],
                    (_, 0) => -before.omegas()[i],
                    _ => before.omegas()[i],
                };
                let want = (case.alpha * old + step).clamp(-0.5, 0.5);
                ensure(new == want, || format!("node {i}: got {new}, want {want}"))?;
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct RunCase {
    pub policy: PolicyKind,
    pub mus: Vec<f64>,
    pub steps: u64,
    pub seed: u64,
    pub params: ChaosParams,
}

pub fn run_case() -> impl Strategy<Value = RunCase> {
    let policy = prop::sample::select(PolicyKind::ALL.to_vec());
    let depth = 1u32..=3;
    (
        policy,
        depth,
        1u64..300,
        any::<u64>(),
        1u64..20,
        1.1f64..3.0,
    )
        .prop_flat_map(|(policy, depth, steps, seed, period, beta)| {
            let k = 1usize << depth;
            (
                Just(policy),
                prop::sample::subsequence(
                    (1..=9).map(|i| f64::from(i) / 10.0).collect::<Vec<_>>(),
                    k,
                )
                .prop_shuffle(),
                Just(steps),
                Just(seed),
                Just(ChaosParams {
                    period,
                    beta,
                    ..ChaosParams::default()
                }),
            )
                .prop_map(|(policy, mus, steps, seed, params)| RunCase {
                    policy,
                    mus,
                    steps,
                    seed,
                    params,
                })
        })
}

/// `sum T_i(n) = n` and `R_i <= T_i` after every step, magnitudes in bounds.
pub fn check_pull_conservation(case: &RunCase) -> Check {
    let env = RewardEnvironment::new(case.mus.clone()).unwrap();
    let src = gen_synthetic(SyntheticKind::UniformIid, 97, case.seed).unwrap();
    let mut agent = Agent::new(
        case.policy,
        env.arms(),
        &case.params,
        Some(&src),
        case.seed % 97,
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(case.seed);
    for n in 1..=case.steps {
        agent.step(&env, &mut rng);
        let stats = agent.stats();
        ensure(
            stats.pulls().iter().sum::<u64>() == n && stats.step() == n,
            || format!("{}: pulls {:?} at n = {n}", case.policy, stats.pulls()),
        )?;
        ensure(
            stats
                .rewards()
                .iter()
                .zip(stats.pulls())
                .all(|(r, t)| r <= t),
            || "rewards exceed pulls".into(),
        )?;
        if let Some(tree) = agent.tree() {
            let (lo, hi) = tree.magnitude_bounds();
            if case.policy == PolicyKind::ChaosCi {
                ensure(
                    tree.lambdas()
                        .iter()
                        .chain(tree.omegas())
                        .all(|m| (lo..=hi).contains(m)),
                    || "magnitude out of bounds".into(),
                )?;
            }
            ensure(
                tree.thresholds().iter().all(|t| (-0.5..=0.5).contains(t)),
                || "threshold out of range".into(),
            )?;
        }
    }
    Ok(())
}

pub fn arm_set_case() -> impl Strategy<Value = (u32, u32, usize)> {
    (1u32..=10).prop_flat_map(|depth| {
        (1..=depth)
            .prop_flat_map(move |level| (Just(depth), Just(level), 0..(1usize << (level - 1))))
    })
}

/// `I(0)` and `I(1)` are disjoint halves of the prefix-consistent arms.
pub fn check_arm_set_partition(&(depth, level, prefix): &(u32, u32, usize)) -> Check {
    let (zero, one) = arm_sets(depth, Node { level, prefix });
    let half = 1usize << (depth - level);
    ensure(zero.len() == half && one.len() == half, || {
        "unequal halves".into()
    })?;
    ensure(zero.end <= one.start, || "sets overlap".into())?;
    let shift = depth - level + 1;
    let consistent: Vec<usize> = (0..1usize << depth)
        .filter(|a| a >> shift == prefix)
        .collect();
    let union: Vec<usize> = zero.clone().chain(one.clone()).collect();
    ensure(union == consistent, || {
        format!("union {union:?} != {consistent:?}")
    })?;
    ensure(
        zero.clone().all(|a| (a >> (depth - level)) & 1 == 0),
        || "I(0) has a 1 bit".into(),
    )?;
    ensure(one.clone().all(|a| (a >> (depth - level)) & 1 == 1), || {
        "I(1) has a 0 bit".into()
    })
}

#[derive(Debug, Clone)]
pub struct AdjustCase {
    pub depth: u32,
    pub pulls: Vec<u64>,
    pub reward_frac: Vec<f64>,
    pub mags: Vec<f64>,
    pub bounds: (f64, f64),
    pub beta: f64,
    pub gamma: f64,
    pub arm: usize,
    pub n: u64,
    pub rounds: usize,
}

pub fn adjust_case() -> impl Strategy<Value = AdjustCase> {
    (
        1u32..=4,
        1e-5f64..0.1,
        0.0f64..1.0,
        1.0001f64..4.0,
        0.0f64..3.0,
        1usize..6,
    )
        .prop_flat_map(|(depth, lo, width, beta, gamma, rounds)| {
            let k = 1usize << depth;
            let nodes = k - 1;
            let hi = lo + width;
            (
                Just(depth),
                prop::collection::vec(0u64..500, k),
                prop::collection::vec(0.0f64..=1.0, k),
                prop::collection::vec(lo..=hi, 2 * nodes),
                Just((lo, hi)),
                Just(beta),
                Just(gamma),
                0..k,
                1u64..100_000,
                Just(rounds),
            )
                .prop_map(
                    |(depth, pulls, reward_frac, mags, bounds, beta, gamma, arm, n, rounds)| {
                        AdjustCase {
                            depth,
                            pulls,
                            reward_frac,
                            mags,
                            bounds,
                            beta,
                            gamma,
                            arm,
                            n,
                            rounds,
                        }
                    },
                )
        })
}

/// Every confidence adjustment leaves all magnitudes in `[mag_min, mag_max]`.
pub fn check_magnitude_bounds(case: &AdjustCase) -> Check {
    let (lo, hi) = case.bounds;
    let mut tree = ThresholdTree::new(case.depth, 0.0, 0.0, lo, hi);
    let nodes = tree.len();
    for level in 1..=case.depth {
        for prefix in 0..(1usize << (level - 1)) {
            let node = Node { level, prefix };
            let i = node.index();
            tree.set_magnitudes(node, case.mags[i], case.mags[nodes + i]);
        }
    }
    let rewards = case
        .pulls
        .iter()
        .zip(&case.reward_frac)
        .map(|(&t, &f)| ((t as f64) * f).floor() as u64)
        .collect();
    let stats = ArmStats::from_counts(case.pulls.clone(), rewards);
    // A decision for an arbitrary arm: constant signal at the arm's bits.
    let samples: Vec<f64> = (1..=case.depth)
        .map(|m| {
            if (case.arm >> (case.depth - m)) & 1 == 1 {
                0.5
            } else {
                -0.5
            }
        })
        .collect();
    let zeroed = ThresholdTree::new(case.depth, 0.0, 0.0, lo, hi);
    let src = SignalSource::from_normalized(samples, Origin::Recorded).unwrap();
    let decision = zeroed.select(&src, 0, 1);
    ensure(decision.arm == case.arm, || {
        "bad decision construction".into()
    })?;
    for _ in 0..case.rounds {
        tree.ci_adjust(&stats, &decision, case.gamma, case.beta, case.n, false);
        ensure(
            tree.lambdas()
                .iter()
                .chain(tree.omegas())
                .all(|m| (lo..=hi).contains(m)),
            || {
                format!(
                    "magnitudes {:?} / {:?} outside [{lo}, {hi}]",
                    tree.lambdas(),
                    tree.omegas()
                )
            },
        )?;
    }
    Ok(())
}

pub fn model_case() -> impl Strategy<Value = (TwoArmModel, u64)> {
    (
        0.0f64..=1.0,
        0.0f64..=1.0,
        0.0f64..0.2,
        0.0f64..0.2,
        0.01f64..0.999,
        -0.5f64..0.5,
        1u64..200,
    )
        .prop_map(|(mu0, mu1, lambda, omega, alpha, w1, n)| {
            (
                TwoArmModel {
                    mu0,
                    mu1,
                    lambda,
                    omega,
                    alpha,
                    w1,
                },
                n,
            )
        })
}

/// The closed form satisfies `E[w(n+1)] = P + Q E[w(n)]`.
pub fn check_recurrence_identity((model, n): &(TwoArmModel, u64)) -> Check {
    let (p, q) = model.pq();
    let lhs = model.expected_threshold(n + 1);
    let rhs = p + q * model.expected_threshold(*n);
    let scale = 1.0 + lhs.abs().max(rhs.abs());
    ensure((lhs - rhs).abs() <= 1e-9 * scale, || {
        format!("n = {n}: E[w(n+1)] = {lhs}, P + Q E[w(n)] = {rhs}")
    })
}
