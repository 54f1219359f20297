use rand::Rng;

use super::board::{tally, BoardRow, ResultsBoard, Tally};
use super::{
    check_profiles, stubs, AbortReason, AgentProfile, ElectionOutcome, ElectionStatus, Intent, SecurityParams,
};
use crate::error::{contract, Result};
use crate::seed;

#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalRun {
    pub outcome: ElectionOutcome,
    pub board: ResultsBoard,
    /// Parity-even bit string the trusted dealer handed out for each row.
    pub dealt: Vec<Vec<u8>>,
}

/// Classical XOR election with a trusted dealer of parity-even strings.
/// This is the reference the quantum run must agree with.
pub fn classical_baseline_election(profiles: &[AgentProfile], dealer_seed: u64) -> Result<ClassicalRun> {
    classical_election_with(profiles, dealer_seed, SecurityParams::default().tau, |_, _, bit| bit)
}

/// As [`classical_baseline_election`], with `broadcast(row, agent, bit)`
/// deciding what each agent actually announces.
pub fn classical_election_with<F>(
    profiles: &[AgentProfile],
    dealer_seed: u64,
    tau: f64,
    broadcast: F,
) -> Result<ClassicalRun>
where
    F: Fn(usize, usize, u8) -> u8,
{
    let n = profiles.len();
    contract!(n >= 3, "need at least 3 agents, got {n}");
    check_profiles(profiles)?;

    let mut board = ResultsBoard::new(n);
    let mut dealt = Vec::with_capacity(n);
    for row in 0..n {
        let mut rng = seed::rng_for(dealer_seed, "dealer", row as u64);
        let mut bits: Vec<u8> = (0..n - 1).map(|_| u8::from(rng.random_bool(0.5))).collect();
        bits.push(bits.iter().fold(0, |a, b| a ^ b));
        let announced = profiles
            .iter()
            .map(|p| {
                let own = if p.voter_index == row { bits[p.id] ^ p.intent.flip_bit() } else { bits[p.id] };
                broadcast(row, p.id, own) & 1
            })
            .collect();
        board.set_row(row, BoardRow { bits: announced, s_p: 0 })?;
        dealt.push(bits);
    }
    let t = tally(&board)?;
    let outcome = confirm_and_decide(profiles, &t, tau, ElectionOutcome::empty(n));
    Ok(ClassicalRun { outcome, board, dealt })
}

/// Confirmation phase: each agent checks its own row; abort when the share of
/// failures exceeds `tau`.
pub(super) fn confirm_and_decide(
    profiles: &[AgentProfile],
    t: &Tally,
    tau: f64,
    mut outcome: ElectionOutcome,
) -> ElectionOutcome {
    let n = profiles.len();
    outcome.recorded = profiles.iter().map(|p| Some(Intent::from_bit(t.decoded[p.voter_index]))).collect();
    outcome.success_flags = profiles.iter().zip(&outcome.recorded).map(|(p, r)| *r == Some(p.intent)).collect();
    let failures: Vec<bool> = outcome.success_flags.iter().map(|ok| !ok).collect();
    outcome.any_failure = stubs::logical_or(&failures);
    outcome.votes_e = t.votes_e;
    outcome.votes_f = t.votes_f;
    let failed = failures.iter().filter(|&&f| f).count() as f64 / n as f64;
    outcome.status = if failed > tau {
        ElectionStatus::Aborted { reason: AbortReason::VoteFailures }
    } else {
        ElectionStatus::Completed
    };
    outcome
}

impl ElectionOutcome {
    pub(super) fn empty(n: usize) -> Self {
        Self {
            status: ElectionStatus::Completed,
            votes_e: 0,
            votes_f: 0,
            recorded: vec![None; n],
            success_flags: vec![false; n],
            any_failure: false,
            verifying_rounds: 0,
            passed_rounds: 0,
            verification_pass_rate: None,
            discarded_rounds: 0,
            voting_rounds: 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::assign_profiles;
    use Intent::{CandidateE as E, CandidateF as F};

    #[test]
    fn unanimous_e() {
        let p = assign_profiles(&[E; 4], &[], 1);
        let run = classical_baseline_election(&p, 2).unwrap();
        let t = tally(&run.board).unwrap();
        assert_eq!(t.decoded, vec![0; 4]);
        assert_eq!((run.outcome.votes_e, run.outcome.votes_f), (4, 0));
        assert!(!run.outcome.aborted());
        for d in &run.dealt {
            assert_eq!(d.iter().fold(0, |a, b| a ^ b), 0);
        }
    }

    #[test]
    fn split_vote_is_recorded_per_voter() {
        let intents = [E, F, E, F];
        let p = assign_profiles(&intents, &[], 11);
        let run = classical_baseline_election(&p, 3).unwrap();
        assert_eq!((run.outcome.votes_e, run.outcome.votes_f), (2, 2));
        for (agent, intent) in intents.iter().enumerate() {
            assert_eq!(run.outcome.recorded[agent], Some(*intent));
        }
        assert!(run.outcome.success_flags.iter().all(|&ok| ok));
        assert_eq!(run.outcome.winner(), None);
    }

    #[test]
    fn too_few_agents() {
        let p = assign_profiles(&[E; 2], &[], 1);
        assert!(classical_baseline_election(&p, 0).is_err());
    }
}
