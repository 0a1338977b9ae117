mod common;

use chaos_bandit::env::{default_grid, enumerate_envs, RewardEnvironment};
use chaos_bandit::metrics::{cor_of, regret_of};
use chaos_bandit::policy::{ci_bounds, Agent, ArmStats, ChaosParams, PolicyKind};
use chaos_bandit::signal::{gen_synthetic, SyntheticKind};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #[test]
    fn thresholds_stay_clamped(case in common::tree_case()) {
        common::check_threshold_clamping(&case)?;
    }

    #[test]
    fn only_path_thresholds_move(case in common::tree_case()) {
        common::check_path_only_mutation(&case)?;
    }

    #[test]
    fn pulls_are_conserved(case in common::run_case()) {
        common::check_pull_conservation(&case)?;
    }

    #[test]
    fn arm_sets_partition(case in common::arm_set_case()) {
        common::check_arm_set_partition(&case)?;
    }

    #[test]
    fn magnitudes_stay_bounded(case in common::adjust_case()) {
        common::check_magnitude_bounds(&case)?;
    }

    #[test]
    fn closed_form_satisfies_recurrence(case in common::model_case()) {
        common::check_recurrence_identity(&case)?;
    }

    #[test]
    fn synthetic_signals_in_range_and_wrap(
        uniform in any::<bool>(),
        len in 1usize..2000,
        seed in any::<u64>(),
        i in 0u64..1_000_000,
    ) {
        let kind = if uniform { SyntheticKind::UniformIid } else { SyntheticKind::LogisticMap };
        let src = gen_synthetic(kind, len, seed).unwrap();
        prop_assert!(src.samples().iter().all(|s| (-0.5..=0.5).contains(s)));
        prop_assert_eq!(src.sample_at(i).to_bits(), src.sample_at(i + len as u64).to_bits());
        prop_assert_eq!(&src, &gen_synthetic(kind, len, seed).unwrap());
    }

    #[test]
    fn regret_is_linear_and_ignores_best_arm(
        perm in Just(vec![0.9, 0.7, 0.5, 0.3]).prop_shuffle(),
        a in prop::collection::vec(0u64..10_000, 4),
        b in prop::collection::vec(0u64..10_000, 4),
        extra in 0u64..10_000,
    ) {
        let env = RewardEnvironment::new(perm).unwrap();
        let sum: Vec<u64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let lhs = regret_of(&env, &sum);
        let rhs = regret_of(&env, &a) + regret_of(&env, &b);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
        let mut more = a.clone();
        more[env.best_arm()] += extra;
        prop_assert!((regret_of(&env, &more) - regret_of(&env, &a)).abs() <= 1e-9 * (1.0 + lhs.abs()));
    }

    #[test]
    fn cor_invariant_under_monotone_transform(
        perm in Just(vec![0.8, 0.6, 0.4, 0.2, 0.9, 0.7, 0.5, 0.3]).prop_shuffle(),
        rewards in prop::collection::vec(0u64..=100, 8),
        top_k in 1usize..=8,
    ) {
        // Doubling every pull count halves each sample mean, preserving ranks.
        let env = RewardEnvironment::new(perm).unwrap();
        let stats = ArmStats::from_counts(vec![100; 8], rewards.clone());
        let scaled = ArmStats::from_counts(vec![200; 8], rewards);
        prop_assert_eq!(cor_of(&stats, &env, top_k), cor_of(&scaled, &env, top_k));
    }

    #[test]
    fn reward_moves_threshold_towards_repeating_bit(case in common::tree_case()) {
        // Before clamping a reward moves TH by +Λ after a 0 and -Λ after a 1.
        let mut tree = case.build();
        let src = case.signal();
        let d = tree.select(&src, 0, 1);
        let root = chaos_bandit::policy::Node::root();
        let (th, lambda, omega) = (tree.threshold(root), tree.lambda(root), tree.omega(root));
        tree.update(&d, case.reward, case.alpha);
        let sign = if d.bit(1) == 0 { 1.0 } else { -1.0 };
        let step = if case.reward == 1 { sign * lambda } else { -sign * omega };
        prop_assert_eq!(tree.threshold(root), (case.alpha * th + step).clamp(-0.5, 0.5));
    }

    #[test]
    fn interval_width_scales_with_gamma(
        pulls in prop::collection::vec(1u64..1000, 4),
        gamma in 0.0f64..5.0,
        n in 1u64..1_000_000,
    ) {
        let rewards = pulls.iter().map(|t| t / 2).collect();
        let stats = ArmStats::from_counts(pulls, rewards);
        let unit = ci_bounds(&stats, 0..4, 1.0, n);
        let scaled = ci_bounds(&stats, 0..4, gamma, n);
        prop_assert_eq!(unit.p_hat, scaled.p_hat);
        prop_assert!((scaled.half_width - gamma * unit.half_width).abs() <= 1e-12);
    }

    #[test]
    fn agent_trajectories_are_reproducible(case in common::run_case()) {
        let env = RewardEnvironment::new(case.mus.clone()).unwrap();
        let src = gen_synthetic(SyntheticKind::UniformIid, 500, case.seed).unwrap();
        let run = || {
            let mut agent = Agent::new(case.policy, env.arms(), &case.params, Some(&src), 0).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(case.seed);
            (0..case.steps).map(|_| agent.step(&env, &mut rng)).collect::<Vec<_>>()
        };
        prop_assert_eq!(run(), run());
    }
}

#[test]
fn enumerated_environments_recheck() {
    let grid = default_grid();
    for (k, gap) in [(2, 0.1), (2, 0.5), (4, 0.3), (4, 0.5)] {
        let envs = enumerate_envs(k, &grid, gap).unwrap();
        for env in &envs {
            let mus = env.mus();
            assert!(mus.iter().all(|m| grid.contains(m)));
            let hi = mus.iter().cloned().fold(f64::MIN, f64::max);
            let lo = mus.iter().cloned().fold(f64::MAX, f64::min);
            assert!((hi - lo - gap).abs() < 1e-9);
        }
        let mut sorted: Vec<_> = envs.iter().map(|e| e.mus().to_vec()).collect();
        sorted.dedup();
        assert_eq!(sorted.len(), envs.len());
    }
    // K = 2 pairs at gap 0.1: 8 adjacent pairs in both orders.
    assert_eq!(enumerate_envs(2, &grid, 0.1).unwrap().len(), 16);
}

#[test]
fn default_params_are_valid() {
    ChaosParams::default().validate().unwrap();
    let src = gen_synthetic(SyntheticKind::UniformIid, 10, 0).unwrap();
    for p in PolicyKind::ALL {
        Agent::new(p, 8, &ChaosParams::default(), Some(&src), 0).unwrap();
    }
}
