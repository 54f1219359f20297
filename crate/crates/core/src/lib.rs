//! Anonymous quantum e-voting over GHZ-family states.
//!
//! The crate is organized bottom-up:
//!
//! * [`qsim`]: dense pure-state simulator (local gates, Born sampling, projector oracles).
//! * [`family`]: the `Φ₀ⁿ`, `Φ₁ⁿ`, `Ψ₀ᵏ`, `Ψ₁ᵏ` and GHZ constructors, their Hadamard-count
//!   transformation laws, and source strategies (ideal, noisy, malicious).
//! * [`protocol`]: basis choice, Verifier classification, parity verification, the public
//!   results board and the tally, plus the trusted-coordinator classical sub-protocols.
//! * [`adversary`]: colluding source/agent attacks, exhaustive colluder policy search and the
//!   anonymity audit.
//! * [`coincidence`]: synthetic 16-channel timestamp streams, the per-agent veto filter and
//!   fourfold coincidence search.
//! * [`harness`]: configuration, statistics, experiment runner and property suite used by the CLI.
//!
//! Data-parallel loops (rounds, trials, per-channel generation) go through [`par`], which uses
//! rayon when the default `parallel` feature is enabled and plain iterators otherwise. Every
//! random draw is keyed by [`seed::derive_seed`], so results do not depend on worker count.

pub mod adversary;
pub mod coincidence;
pub mod error;
pub mod family;
pub mod harness;
pub mod par;
pub mod protocol;
pub mod qsim;
pub mod seed;

pub use error::{Error, Result};
