//! The `verify-properties` suite: exact and statistical checks of the state
//! family, protocol, adversary and coincidence stages, each reported as one
//! named pass/fail line.

use rand::Rng;

use super::checks::{parity_support, uniformity_test, ALPHA};
use super::experiment::InvariantCheck;
use super::report::ReportStatus;
use crate::adversary::{self, PassExpectation};
use crate::coincidence::{self, ChannelMap, TimestampEvent};
use crate::error::Result;
use crate::family::{self, FamilyKind, FamilyLabel};
use crate::protocol::{self, Intent, SecurityParams};
use crate::qsim::{self, LocalGate, StateVector, DEFAULT_TOL};
use crate::{par, seed};

/// Computational-basis samples of `state`, one derived seed per sample.
pub fn sample_bitstrings(state: &StateVector, count: u64, master: u64) -> Vec<Vec<u8>> {
    par::map_indexed(count, |i| qsim::sample_computational(state, seed::derive_seed(master, "samples", i)).bits)
}

/// All subsets of `0..n` whose size has the given parity.
pub fn subsets_with_parity(n: usize, odd: bool) -> Vec<Vec<usize>> {
    (0..1usize << n)
        .filter(|m| (m.count_ones() % 2 == 1) == odd)
        .map(|m| (0..n).filter(|&q| (m >> q) & 1 == 1).collect())
        .collect()
}

pub fn verify_properties(master_seed: u64, samples: u64) -> Result<Vec<InvariantCheck>> {
    let mut checks = Vec::new();

    for (kind, odd) in [(FamilyKind::Phi0, false), (FamilyKind::Phi1, true)] {
        let state = FamilyLabel::new(kind, 1, 4).state()?;
        let drawn = sample_bitstrings(&state, samples, seed::derive_seed(master_seed, "parity-sampling", odd as u64));
        let check = match uniformity_test(&drawn, &parity_support(4, odd)) {
            Ok(r) => InvariantCheck::new(
                format!("{kind:?}-4 samples uniform on its parity class"),
                r.status == ReportStatus::Pass,
                format!("p = {:.4} (reject below {ALPHA})", r.p_value.unwrap_or(0.0)),
            ),
            Err(e) => {
                InvariantCheck::new(format!("{kind:?}-4 samples uniform on its parity class"), false, e.to_string())
            }
        };
        checks.push(check);
    }

    let mut laws = Vec::new();
    for n in 3..=6 {
        for s in subsets_with_parity(n, false) {
            let label = family::transformation_property_check(n, &s)?;
            let want = if s.len() % 4 == 0 { FamilyKind::Phi0 } else { FamilyKind::Phi1 };
            if label.kind != want {
                laws.push(format!("n={n} S={s:?} gave {label}"));
            }
        }
    }
    checks.push(InvariantCheck::new(
        "even Hadamard subsets map Phi0 to ±Phi0 or ±Phi1 by |S| mod 4",
        laws.is_empty(),
        if laws.is_empty() { "n = 3..6, every even subset".into() } else { laws.join("; ") },
    ));

    let mut ghz_ok = true;
    for n in 2..=8 {
        let h = qsim::apply_local(&family::make_ghz(n)?, &vec![LocalGate::Hadamard; n])?;
        let out = qsim::apply_local(&h, &vec![LocalGate::SqrtZ; n])?;
        ghz_ok &= out.approx_eq_up_to_phase(&family::make_phi0(n)?, DEFAULT_TOL);
    }
    checks.push(InvariantCheck::new(
        "GHZ is locally equivalent to Phi0",
        ghz_ok,
        "Hadamard then √Z on every qubit, n = 2..8",
    ));

    let mut nondeterministic = Vec::new();
    for label in adversary::all_family_labels(3) {
        let state = label.state()?;
        let odd = matches!(label.kind, FamilyKind::Psi0 | FamilyKind::Psi1);
        for s in subsets_with_parity(3, odd) {
            if family::deterministic_statistic(&state, &s, DEFAULT_TOL)?.is_none() {
                nondeterministic.push(format!("{label} S={s:?}"));
            }
        }
    }
    checks.push(InvariantCheck::new(
        "every k=3 family member has a deterministic parity statistic",
        nondeterministic.is_empty(),
        if nondeterministic.is_empty() { "8 states × 4 basis sets".into() } else { nondeterministic.join("; ") },
    ));
    let w = family::make_w(3)?;
    let mut w_random = 0;
    for odd in [false, true] {
        for s in subsets_with_parity(3, odd) {
            w_random += usize::from(family::deterministic_statistic(&w, &s, DEFAULT_TOL)?.is_none());
        }
    }
    checks.push(InvariantCheck::new(
        "W state has a non-deterministic parity statistic",
        w_random > 0,
        format!("{w_random} of 8 basis sets are random"),
    ));

    let mut dichotomy = Vec::new();
    for name in adversary::CATALOG {
        let s = adversary::scenario_by_name(name)?;
        let p = adversary::scenario_pass_probability(&s)?;
        let ok = match (s.expected_pass, p) {
            (PassExpectation::Exactly { value }, Some(p)) => (p - value).abs() < 1e-9,
            (PassExpectation::Below { value }, Some(p)) => p < value,
            _ => false,
        };
        if !ok {
            dichotomy.push(format!("{name}: {p:?}"));
        }
    }
    checks.push(InvariantCheck::new(
        "family attacks pass with certainty and other honest parts do not",
        dichotomy.is_empty(),
        if dichotomy.is_empty() {
            format!("{} catalog scenarios", adversary::CATALOG.len())
        } else {
            dichotomy.join("; ")
        },
    ));

    let mut mismatches = Vec::new();
    for trial in 0..8u64 {
        let mut rng = seed::rng_for(master_seed, "intents", trial);
        let n = 3 + (trial as usize % 4);
        let intents: Vec<Intent> = (0..n).map(|_| Intent::from_bit(u8::from(rng.random_bool(0.5)))).collect();
        let profiles = protocol::assign_profiles(&intents, &[], seed::derive_seed(master_seed, "profiles", trial));
        let params = SecurityParams { m: 3, tau: 0.05, rounds: 4_000 };
        let quantum = protocol::run_election(&profiles, &family::SourceStrategy::Ideal, &params, trial, None)?;
        let classical = protocol::classical_baseline_election(&profiles, trial)?;
        let q = &quantum.outcome;
        let c = &classical.outcome;
        if (q.votes_e, q.votes_f, &q.recorded) != (c.votes_e, c.votes_f, &c.recorded) || q.aborted() {
            mismatches.push(format!("trial {trial}: quantum {:?} vs classical {:?}", q.status, c.status));
        }
    }
    checks.push(InvariantCheck::new(
        "ideal quantum election agrees with the trusted-dealer baseline",
        mismatches.is_empty(),
        if mismatches.is_empty() { "8 random intent vectors, n = 3..6".into() } else { mismatches.join("; ") },
    ));

    let map = ChannelMap::agent_major();
    let stream = random_stream(seed::derive_seed(master_seed, "stream", 0), 4_000, 4_000_000);
    let filtered = coincidence::reference::veto(&stream, 1_000, &map);
    let reference = coincidence::reference::fourfolds(&filtered, 1_000, &map);
    let mut chunk_ok = true;
    let mut equal = true;
    for chunk in [1, 7, 256, stream.len()] {
        let streamed = coincidence::process_stream(&stream, 1_000, &map, chunk)?;
        equal &= streamed == reference;
        chunk_ok &= streamed == coincidence::process_stream(&stream, 1_000, &map, stream.len())?;
    }
    checks.push(InvariantCheck::new(
        "streaming coincidence search equals the quadratic reference",
        equal,
        format!("{} events, {} fourfolds", stream.len(), reference.len()),
    ));
    checks.push(InvariantCheck::new("coincidence output independent of chunking", chunk_ok, "chunks 1, 7, 256, all"));

    Ok(checks)
}

/// Uniform random events over `span_ps` on all 16 channels, sorted.
pub fn random_stream(rng_seed: u64, count: usize, span_ps: u64) -> Vec<TimestampEvent> {
    let mut rng = seed::rng_for(rng_seed, "random-stream", 0);
    let mut events: Vec<TimestampEvent> = (0..count)
        .map(|_| TimestampEvent {
            t: rng.random_range(0..span_ps),
            channel: rng.random_range(0..coincidence::CHANNELS as u8),
        })
        .collect();
    events.sort_unstable();
    events
}
