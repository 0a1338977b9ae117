//! Hierarchical seed derivation.
//!
//! Every random stream is keyed by its position in the experiment rather
//! than by execution order, so parallel and serial runs draw identical numbers.

use sha2::{Digest, Sha256};

/// Hashes `master` together with a labelled path of indices into a child seed.
pub fn derive(master: u64, label: &str, path: &[u64]) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update((label.len() as u64).to_le_bytes());
    h.update(label.as_bytes());
    for p in path {
        h.update(p.to_le_bytes());
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

/// Seed of the reward stream for one measurement.
pub fn measurement_seed(master: u64, env_index: usize, policy: &str, measurement: u64) -> u64 {
    derive(master, policy, &[env_index as u64, measurement])
}
