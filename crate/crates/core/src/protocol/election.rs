use std::io::Write;

use super::board::{tally, ResultsBoard};
use super::classical::confirm_and_decide;
use super::rounds::{choose_basis, classify_round, hadamard_count, verify_round};
use super::{
    check_profiles, stubs, voting_round_to_row, AbortReason, AgentProfile, Basis, Classification, ElectionOutcome,
    ElectionStatus, RoundRecord, SecurityParams,
};
use crate::error::{contract, Result};
use crate::family::{emit_round, SideInfo, SourceStrategy};
use crate::qsim::{self, StateVector};
use crate::{par, seed};

/// Reporting behaviour of the dishonest agents. The protocol treats whatever
/// these return as the agent's claim; it never looks behind it.
pub trait Colluders: Sync {
    fn controls(&self, agent: usize) -> bool;

    /// Basis the colluder actually measures its own qubit in.
    fn measurement_basis(&self, agent: usize, side_info: &SideInfo) -> Basis;

    /// Claimed `(basis, outcome)` given what the source disclosed and the
    /// colluder's own measurement.
    fn report(&self, agent: usize, side_info: &SideInfo, measured: Basis, own_outcome: u8) -> (Basis, u8);

    /// A dishonest Verifier announces "success" regardless of the test.
    fn verifier_lies(&self) -> bool {
        false
    }
}

#[derive(Clone, Copy)]
pub struct RoundContext<'a> {
    pub n: usize,
    pub strategy: &'a SourceStrategy,
    pub m: u32,
    pub master_seed: u64,
    pub colluders: Option<&'a dyn Colluders>,
}

impl RoundContext<'_> {
    fn is_dishonest(&self, agent: usize) -> bool {
        self.colluders.is_some_and(|c| c.controls(agent))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulatedRound {
    pub record: RoundRecord,
    pub side_info: SideInfo,
    /// Bases and outcomes as measured, before any dishonest report rewriting.
    pub true_bases: Vec<Basis>,
    pub true_outcomes: Vec<u8>,
}

/// Quantum steps 1–2 for one event: emission, basis choice, measurement and
/// (for colluders) report rewriting. Returns `(reported bases, reported
/// outcomes, side info, true bases, true outcomes)`.
#[allow(clippy::type_complexity)]
pub fn measure_event(
    ctx: &RoundContext<'_>,
    event: u64,
) -> Result<(Vec<Basis>, Vec<u8>, SideInfo, Vec<Basis>, Vec<u8>)> {
    let emitted = emit_round(ctx.strategy, ctx.n, event, seed::derive_seed(ctx.master_seed, "source", 0))?;
    contract!(emitted.state.n_qubits() == ctx.n, "source emitted a state of the wrong size");
    let basis_seed = seed::derive_seed(ctx.master_seed, "bases", 0);
    let true_bases: Vec<Basis> = (0..ctx.n)
        .map(|agent| match ctx.colluders {
            Some(c) if c.controls(agent) => c.measurement_basis(agent, &emitted.side_info),
            _ => choose_basis(agent, event, basis_seed),
        })
        .collect();
    let rotated = qsim::rotate_to_bases(&emitted.state, &true_bases)?;
    let mut rng = seed::rng_for(ctx.master_seed, "measure", event);
    let true_outcomes = qsim::sample_with(&rotated, &mut rng).bits;

    let mut bases = true_bases.clone();
    let mut outcomes = true_outcomes.clone();
    if let Some(c) = ctx.colluders {
        for agent in (0..ctx.n).filter(|&a| c.controls(a)) {
            let (b, y) = c.report(agent, &emitted.side_info, true_bases[agent], true_outcomes[agent]);
            bases[agent] = b;
            outcomes[agent] = y & 1;
        }
    }
    Ok((bases, outcomes, emitted.side_info, true_bases, true_outcomes))
}

/// Quantum step 3 for one postselected event: pick the Verifier, classify,
/// and verify when the event is not kept for voting.
pub fn adjudicate_event(
    ctx: &RoundContext<'_>,
    event: u64,
    bases: Vec<Basis>,
    outcomes: Vec<u8>,
) -> Result<RoundRecord> {
    contract!(bases.len() == ctx.n && outcomes.len() == ctx.n, "event {event} does not cover {} agents", ctx.n);
    let verifier = stubs::random_agent(ctx.n, seed::derive_seed(ctx.master_seed, "verifier", 0), event);
    let coin_seed = seed::derive_seed(ctx.master_seed, "coins", event);
    let classification = match classify_round(&bases, coin_seed, ctx.m) {
        Classification::Verifying { .. } => {
            let honest_result = verify_round(hadamard_count(&bases), &outcomes)?;
            let lies = ctx.is_dishonest(verifier) && ctx.colluders.is_some_and(|c| c.verifier_lies());
            Classification::Verifying { pass: honest_result || lies }
        }
        other => other,
    };
    Ok(RoundRecord { event_id: event, bases, outcomes, verifier, classification })
}

pub fn simulate_round(ctx: &RoundContext<'_>, event: u64) -> Result<SimulatedRound> {
    let (bases, outcomes, side_info, true_bases, true_outcomes) = measure_event(ctx, event)?;
    let record = adjudicate_event(ctx, event, bases, outcomes)?;
    Ok(SimulatedRound { record, side_info, true_bases, true_outcomes })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ElectionRun {
    pub outcome: ElectionOutcome,
    pub transcript: Vec<RoundRecord>,
    pub board: Option<ResultsBoard>,
}

/// End-to-end quantum election over `params.rounds` distributed states.
pub fn run_election(
    profiles: &[AgentProfile],
    strategy: &SourceStrategy,
    params: &SecurityParams,
    master_seed: u64,
    colluders: Option<&dyn Colluders>,
) -> Result<ElectionRun> {
    let n = profiles.len();
    contract!(n >= 3, "need at least 3 agents, got {n}");
    check_profiles(profiles)?;
    params.validate()?;
    strategy.validate(n)?;
    for p in profiles {
        let dishonest = colluders.is_some_and(|c| c.controls(p.id));
        contract!(p.honest != dishonest, "agent {} honesty disagrees with the colluder set", p.id);
    }

    let ctx = RoundContext { n, strategy, m: params.m, master_seed, colluders };
    let transcript = par::map_indexed(params.rounds, |event| simulate_round(&ctx, event).map(|r| r.record))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let (outcome, board) = decide_election(profiles, &transcript, params.tau)?;
    Ok(ElectionRun { outcome, transcript, board })
}

/// Quantum step 4 on a finished transcript: abort on too many failed
/// verifications, otherwise fill the board from the first `n` voting rounds,
/// tally and confirm.
pub fn decide_election(
    profiles: &[AgentProfile],
    transcript: &[RoundRecord],
    tau: f64,
) -> Result<(ElectionOutcome, Option<ResultsBoard>)> {
    let n = profiles.len();
    check_profiles(profiles)?;
    let mut outcome = ElectionOutcome::empty(n);
    let mut voting = Vec::new();
    for r in transcript {
        match r.classification {
            Classification::Discarded => outcome.discarded_rounds += 1,
            Classification::Voting { .. } => voting.push(r),
            Classification::Verifying { pass } => {
                outcome.verifying_rounds += 1;
                outcome.passed_rounds += usize::from(pass);
            }
        }
    }
    outcome.voting_rounds = voting.len();
    let failed = outcome.verifying_rounds - outcome.passed_rounds;
    if outcome.verifying_rounds > 0 {
        outcome.verification_pass_rate = Some(outcome.passed_rounds as f64 / outcome.verifying_rounds as f64);
        if failed as f64 / outcome.verifying_rounds as f64 > tau {
            outcome.status = ElectionStatus::Aborted { reason: AbortReason::VerificationFailures };
            return Ok((outcome, None));
        }
    }
    if voting.len() < n {
        outcome.status = ElectionStatus::InsufficientVotingRounds { needed: n, available: voting.len() };
        return Ok((outcome, None));
    }

    let mut board = ResultsBoard::new(n);
    for p in profiles {
        let row = voting_round_to_row(voting[p.voter_index], p.id, p.intent)?;
        board.set_row(p.voter_index, row)?;
    }
    let t = tally(&board)?;
    Ok((confirm_and_decide(profiles, &t, tau, outcome), Some(board)))
}

/// Exact probability that a verifying round passes when every agent is
/// honest: average over the ensemble branches and over the `2^{n-1}`
/// even-Hadamard basis assignments (all equally likely given non-discard).
pub fn exact_honest_pass_probability(branches: &[(f64, StateVector, SideInfo)]) -> Result<f64> {
    contract!(!branches.is_empty(), "empty ensemble");
    let n = branches[0].1.n_qubits();
    let mut total = 0.0;
    let mut weight = 0.0;
    for (w, state, _) in branches {
        contract!(state.n_qubits() == n, "ensemble branches differ in size");
        let mut branch = 0.0;
        let mut combos = 0usize;
        for mask in 0..1usize << n {
            let h = mask.count_ones() as usize;
            if h % 2 == 1 {
                continue;
            }
            let bases: Vec<Basis> = (0..n)
                .map(|q| if qsim::bit(mask, q, n) == 1 { Basis::Hadamard } else { Basis::Computational })
                .collect();
            let target = ((h / 2) % 2) as u32;
            branch += qsim::outcome_distribution(state, &bases)?
                .iter()
                .enumerate()
                .filter(|(y, _)| y.count_ones() % 2 == target)
                .map(|(_, p)| p)
                .sum::<f64>();
            combos += 1;
        }
        total += w * branch / combos as f64;
        weight += w;
    }
    Ok(total / weight)
}

/// Writes one JSON object per line.
pub fn write_transcript<W: Write>(records: &[RoundRecord], mut out: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{FamilyKind, FamilyLabel};
    use crate::protocol::{assign_profiles, Intent};

    #[test]
    fn too_few_rounds_is_a_distinct_outcome() {
        let p = assign_profiles(&[Intent::CandidateE; 4], &[], 0);
        let params = SecurityParams { m: 7, tau: 0.05, rounds: 20 };
        let run = run_election(&p, &SourceStrategy::Ideal, &params, 1, None).unwrap();
        assert!(matches!(run.outcome.status, ElectionStatus::InsufficientVotingRounds { needed: 4, .. }));
        assert_eq!(run.transcript.len(), 20);
    }

    #[test]
    fn phi1_source_fails_every_verification() {
        let p = assign_profiles(&[Intent::CandidateE; 4], &[], 0);
        let strategy = SourceStrategy::FixedFamily { schedule: vec![FamilyLabel::new(FamilyKind::Phi1, 1, 4)] };
        let params = SecurityParams { m: 2, tau: 0.05, rounds: 400 };
        let run = run_election(&p, &strategy, &params, 5, None).unwrap();
        assert_eq!(run.outcome.verification_pass_rate, Some(0.0));
        assert_eq!(run.outcome.status, ElectionStatus::Aborted { reason: AbortReason::VerificationFailures });
    }

    #[test]
    fn ideal_oracle_is_one() {
        let branches = crate::family::ensemble_branches(&SourceStrategy::Ideal, 4).unwrap().unwrap();
        assert!((exact_honest_pass_probability(&branches).unwrap() - 1.0).abs() < 1e-12);
    }
}
