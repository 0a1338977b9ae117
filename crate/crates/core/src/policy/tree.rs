//! The binary threshold tree that turns `M` signal samples into an `M`-bit
//! arm index, plus its reward-driven and confidence-driven updates.

use std::ops::Range;

use crate::signal::{SignalSource, AMPLITUDE_MAX, AMPLITUDE_MIN};

use super::stats::{ci_bounds, ArmStats};

/// Address of one threshold: `level` in `1..=M` and the `level - 1` bits
/// decided above it, packed most-significant-first into `prefix`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Node {
    pub level: u32,
    pub prefix: usize,
}

impl Node {
    pub fn root() -> Self {
        Self {
            level: 1,
            prefix: 0,
        }
    }

    /// Position in breadth-first order; the root is 0.
    #[inline]
    pub fn index(self) -> usize {
        (1usize << (self.level - 1)) - 1 + self.prefix
    }

    /// The node at `level` on the path to `arm` in a tree of `depth` levels.
    #[inline]
    pub fn on_path(arm: usize, level: u32, depth: u32) -> Self {
        Self {
            level,
            prefix: arm >> (depth - level + 1),
        }
    }
}

/// Arms reachable from `node` when its bit resolves to 0 and to 1.
///
/// Arm codes read `S_1 ... S_M` most-significant-first, so each set is the
/// contiguous block of arms whose code begins with `prefix · z`.
pub fn arm_sets(depth: u32, node: Node) -> (Range<usize>, Range<usize>) {
    assert!(
        (1..=depth).contains(&node.level),
        "level {} outside 1..={depth}",
        node.level
    );
    assert!(
        node.prefix < (1 << (node.level - 1)),
        "prefix too long for level"
    );
    let width = 1usize << (depth - node.level);
    let zero = (node.prefix << 1) * width;
    (zero..zero + width, zero + width..zero + 2 * width)
}

/// One arm selection: the chosen arm and the signal positions that decided it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    pub arm: usize,
    pub depth: u32,
    first_index: u64,
    stride: u64,
}

impl Decision {
    /// Bit `S_level` of the selected arm's code.
    #[inline]
    pub fn bit(&self, level: u32) -> u8 {
        ((self.arm >> (self.depth - level)) & 1) as u8
    }

    pub fn bits(&self) -> impl Iterator<Item = u8> + '_ {
        (1..=self.depth).map(|m| self.bit(m))
    }

    /// The `M` signal indices consumed, in decision order.
    pub fn signal_indices(&self) -> impl Iterator<Item = u64> + '_ {
        (0..u64::from(self.depth)).map(|m| self.first_index + m * self.stride)
    }

    /// Thresholds visited by this decision, root first.
    pub fn path(&self) -> impl Iterator<Item = Node> + '_ {
        (1..=self.depth).map(|m| Node::on_path(self.arm, m, self.depth))
    }
}

/// Thresholds `TH_{m, prefix}` and their exploration magnitudes `(Λ, Ω)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdTree {
    depth: u32,
    thresholds: Vec<f64>,
    lambda: Vec<f64>,
    omega: Vec<f64>,
    mag_min: f64,
    mag_max: f64,
}

impl ThresholdTree {
    /// All thresholds start at 0 and all magnitudes at the given initial values.
    /// `mag_min..=mag_max` bounds the magnitudes after confidence adjustments.
    pub fn new(depth: u32, lambda_init: f64, omega_init: f64, mag_min: f64, mag_max: f64) -> Self {
        assert!(depth >= 1, "tree needs at least one level");
        assert!(
            0.0 < mag_min && mag_min <= mag_max,
            "magnitude bounds must satisfy 0 < min <= max"
        );
        let nodes = (1usize << depth) - 1;
        Self {
            depth,
            thresholds: vec![0.0; nodes],
            lambda: vec![lambda_init; nodes],
            omega: vec![omega_init; nodes],
            mag_min,
            mag_max,
        }
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn arms(&self) -> usize {
        1 << self.depth
    }

    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }

    pub fn magnitude_bounds(&self) -> (f64, f64) {
        (self.mag_min, self.mag_max)
    }

    pub fn threshold(&self, node: Node) -> f64 {
        self.thresholds[node.index()]
    }

    pub fn lambda(&self, node: Node) -> f64 {
        self.lambda[node.index()]
    }

    pub fn omega(&self, node: Node) -> f64 {
        self.omega[node.index()]
    }

    /// Thresholds in breadth-first node order.
    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambda
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omega
    }

    /// Sets a threshold, clamped to the signal range.
    pub fn set_threshold(&mut self, node: Node, value: f64) {
        self.thresholds[node.index()] = value.clamp(AMPLITUDE_MIN, AMPLITUDE_MAX);
    }

    /// Sets both magnitudes of a node verbatim.
    pub fn set_magnitudes(&mut self, node: Node, lambda: f64, omega: f64) {
        self.lambda[node.index()] = lambda;
        self.omega[node.index()] = omega;
    }

    /// Compares `M` successive samples against the thresholds along the path
    /// chosen so far. Sample `m` is read at `tau_s + (m - 1) * delta_l`.
    pub fn select(&self, source: &SignalSource, tau_s: u64, delta_l: u64) -> Decision {
        let mut arm = 0usize;
        let mut index = tau_s;
        for level in 1..=self.depth {
            let node = Node { level, prefix: arm };
            let bit = usize::from(source.sample_at(index) >= self.thresholds[node.index()]);
            arm = (arm << 1) | bit;
            index = index.wrapping_add(delta_l);
        }
        Decision {
            arm,
            depth: self.depth,
            first_index: tau_s,
            stride: delta_l,
        }
    }

    /// Reward-driven threshold update along the decision path.
    ///
    /// A reward moves each path threshold towards repeating the same bit
    /// (`+Λ` after a 0, `-Λ` after a 1); a miss moves it away (`-Ω` after a 0,
    /// `+Ω` after a 1). Every threshold first decays by `alpha`.
    pub fn update(&mut self, decision: &Decision, reward: u8, alpha: f64) {
        debug_assert_eq!(decision.depth, self.depth);
        for level in 1..=self.depth {
            let i = Node::on_path(decision.arm, level, self.depth).index();
            let bit_is_zero = decision.bit(level) == 0;
            let step = if reward > 0 {
                if bit_is_zero {
                    self.lambda[i]
                } else {
                    -self.lambda[i]
                }
            } else if bit_is_zero {
                -self.omega[i]
            } else {
                self.omega[i]
            };
            self.thresholds[i] =
                (alpha * self.thresholds[i] + step).clamp(AMPLITUDE_MIN, AMPLITUDE_MAX);
        }
    }

    /// Confidence-interval exploration control along the decision path.
    ///
    /// For each path threshold, pooled intervals for its 0-side and 1-side arm
    /// sets are compared. Overlapping intervals divide `(Λ, Ω)` by `beta`
    /// (and, with `pull_to_zero`, the threshold too); separated intervals
    /// multiply them by `beta`. Magnitudes are clamped to the tree's bounds.
    /// Returns how many path thresholds saw overlapping intervals.
    pub fn ci_adjust(
        &mut self,
        stats: &ArmStats,
        decision: &Decision,
        gamma: f64,
        beta: f64,
        n: u64,
        pull_to_zero: bool,
    ) -> u32 {
        let mut overlapped = 0;
        for level in 1..=self.depth {
            let node = Node::on_path(decision.arm, level, self.depth);
            let (zero, one) = arm_sets(self.depth, node);
            let ci0 = ci_bounds(stats, zero, gamma, n);
            let ci1 = ci_bounds(stats, one, gamma, n);
            let i = node.index();
            let factor = if ci0.overlaps(&ci1) {
                overlapped += 1;
                if pull_to_zero {
                    self.thresholds[i] /= beta;
                }
                beta.recip()
            } else {
                beta
            };
            self.lambda[i] = (self.lambda[i] * factor).clamp(self.mag_min, self.mag_max);
            self.omega[i] = (self.omega[i] * factor).clamp(self.mag_min, self.mag_max);
        }
        overlapped
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::Origin;

    fn constant(v: f64) -> SignalSource {
        SignalSource::from_normalized(vec![v], Origin::Recorded).unwrap()
    }

    #[test]
    fn node_indexing_is_dense() {
        let depth = 4;
        let mut seen = [false; 15];
        for level in 1..=depth {
            for prefix in 0..(1 << (level - 1)) {
                let i = Node { level, prefix }.index();
                assert!(!seen[i]);
                seen[i] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn eight_arm_sets() {
        let root = arm_sets(3, Node::root());
        assert_eq!(root.0, 0..4);
        assert_eq!(root.1, 4..8);
        assert_eq!(
            arm_sets(
                3,
                Node {
                    level: 2,
                    prefix: 0
                }
            )
            .0,
            0..2
        );
        assert_eq!(
            arm_sets(
                3,
                Node {
                    level: 3,
                    prefix: 0
                }
            )
            .1,
            1..2
        );
        // Plain binary reading of the prefix-1, bit-1 set.
        assert_eq!(
            arm_sets(
                3,
                Node {
                    level: 2,
                    prefix: 1
                }
            )
            .1,
            6..8
        );
    }

    #[test]
    fn zero_thresholds_follow_signal_sign() {
        let tree = ThresholdTree::new(3, 0.02, 0.02, 1e-4, 0.25);
        let d = tree.select(&constant(0.3), 0, 1);
        assert_eq!(d.arm, 7);
        assert!(d.bits().all(|b| b == 1));
        assert_eq!(tree.select(&constant(-0.1), 0, 1).arm, 0);
    }

    #[test]
    fn manual_two_level_trace() {
        let mut tree = ThresholdTree::new(2, 0.02, 0.02, 1e-4, 0.25);
        tree.set_threshold(Node::root(), 0.2);
        tree.set_threshold(
            Node {
                level: 2,
                prefix: 0,
            },
            -0.3,
        );
        let src = SignalSource::from_normalized(vec![0.1, -0.2], Origin::Recorded).unwrap();
        let d = tree.select(&src, 0, 1);
        assert_eq!(d.bits().collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(d.arm, 1);
        assert_eq!(d.signal_indices().collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn signal_indices_use_stride() {
        let tree = ThresholdTree::new(3, 0.02, 0.02, 1e-4, 0.25);
        let d = tree.select(&constant(0.0), 10, 4);
        assert_eq!(d.signal_indices().collect::<Vec<_>>(), vec![10, 14, 18]);
    }

    #[test]
    fn one_step_updates() {
        let root = Node::root();
        let mut tree = ThresholdTree::new(1, 0.02, 0.02, 1e-4, 0.25);
        let zero = tree.select(&constant(-0.4), 0, 1);
        tree.update(&zero, 1, 0.99);
        assert!((tree.threshold(root) - 0.02).abs() < 1e-15);

        let mut tree = ThresholdTree::new(1, 0.02, 0.02, 1e-4, 0.25);
        let one = tree.select(&constant(0.4), 0, 1);
        tree.update(&one, 0, 0.99);
        assert!((tree.threshold(root) - 0.02).abs() < 1e-15);

        let mut tree = ThresholdTree::new(1, 0.05, 0.05, 1e-4, 0.25);
        tree.set_threshold(root, 0.5);
        let zero = tree.select(&constant(-0.4), 0, 1);
        tree.update(&zero, 1, 0.99);
        assert_eq!(tree.threshold(root), 0.5);
    }

    #[test]
    fn ci_adjust_scales_by_overlap() {
        // Separated: arms 0..2 near 0.9, arms 2..4 near 0.1.
        let separated = ArmStats::from_counts(vec![500, 500, 500, 500], vec![450, 450, 50, 50]);
        let mut tree = ThresholdTree::new(2, 0.02, 0.02, 1e-4, 0.25);
        let d = tree.select(&constant(-0.4), 0, 1);
        assert_eq!(d.arm, 0);
        tree.ci_adjust(&separated, &d, 1.0, 1.5, 2000, false);
        assert!((tree.lambda(Node::root()) - 0.03).abs() < 1e-12);
        // Arms 0 and 1 are indistinguishable.
        assert!(
            (tree.omega(Node {
                level: 2,
                prefix: 0
            }) - 0.02 / 1.5)
                .abs()
                < 1e-12
        );
        // Off-path node untouched.
        assert_eq!(
            tree.lambda(Node {
                level: 2,
                prefix: 1
            }),
            0.02
        );

        let fresh = ArmStats::new(4);
        let mut tree = ThresholdTree::new(2, 0.02, 0.02, 1e-4, 0.25);
        tree.set_threshold(Node::root(), 0.3);
        let n = tree.ci_adjust(&fresh, &d, 1.0, 1.5, 100, true);
        assert_eq!(n, 2);
        assert!((tree.threshold(Node::root()) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn magnitudes_clamp() {
        let separated = ArmStats::from_counts(vec![500, 500], vec![490, 10]);
        let mut tree = ThresholdTree::new(1, 0.2, 0.2, 1e-4, 0.25);
        let d = tree.select(&constant(-0.4), 0, 1);
        tree.ci_adjust(&separated, &d, 1.0, 2.0, 1000, false);
        assert_eq!(tree.lambda(Node::root()), 0.25);
        let fresh = ArmStats::new(2);
        for _ in 0..40 {
            tree.ci_adjust(&fresh, &d, 1.0, 2.0, 1000, false);
        }
        assert_eq!(tree.omega(Node::root()), 1e-4);
    }
}
