//! Trusted-coordinator stand-ins for the classical sub-protocols
//! `UniqueIndex`, `RandomAgent` and `LogicalOr`. Each is a plain function of
//! its seed so a cryptographic version can replace it without touching callers.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::seed;

/// Secret voter index per agent: a uniformly random permutation of `0..n`.
pub fn unique_index(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = seed::rng_for(seed, "unique-index", 0);
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(&mut rng);
    indices
}

/// Verifier for `event`, uniform over `0..n`.
pub fn random_agent(n: usize, seed: u64, event: u64) -> usize {
    seed::rng_for(seed, "random-agent", event).random_range(0..n)
}

pub fn logical_or(flags: &[bool]) -> bool {
    flags.iter().any(|&f| f)
}
