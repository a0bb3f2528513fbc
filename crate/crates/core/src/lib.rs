//! Tabular reinforcement learning for episodic MDPs with random episode
//! lengths: general discount curves, optimistic layered value iteration,
//! fixed-horizon baselines, block-wise horizon estimation, exact planning
//! oracles, and a reproducible experiment harness.

pub mod baseline;
pub mod config;
pub mod discount;
pub mod envs;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod horizon;
pub mod mdp;
pub mod oracle;
pub mod trace;
pub mod ucbvi;

pub use error::{Error, Result};

/// SplitMix64 step, used to derive per-trial seeds from a base seed.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Deterministic, well-spread seed for trial `trial` of a run seeded `base`.
pub fn trial_seed(base: u64, trial: usize) -> u64 {
    splitmix64(base ^ splitmix64(trial as u64 + 1))
}
