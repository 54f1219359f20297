//! The voting protocol: classical XOR scheme, quantum rounds, Verifier
//! classification, parity verification, results board and tally.
//!
//! Agents are numbered `0..n`. Voter indices are a secret permutation of
//! `0..n` drawn by [`stubs::unique_index`]; the `j`-th reserved voting round
//! (in event order) becomes row `j` of the board and belongs to the agent
//! holding voter index `j`.

mod board;
mod classical;
mod election;
mod rounds;
pub mod stubs;

use serde::{Deserialize, Serialize};

pub use crate::qsim::Basis;
pub use board::{tally, voting_round_to_row, BoardRow, ResultsBoard, Tally};
pub use classical::{classical_baseline_election, classical_election_with, ClassicalRun};
pub use election::{
    adjudicate_event, decide_election, exact_honest_pass_probability, measure_event, run_election, simulate_round,
    write_transcript, Colluders, ElectionRun, RoundContext, SimulatedRound,
};
pub use rounds::{choose_basis, classify_round, classify_with_coins, hadamard_count, verifier_coins, verify_round};

use crate::error::{contract, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Intent {
    #[serde(rename = "E")]
    CandidateE,
    #[serde(rename = "F")]
    CandidateF,
}

impl Intent {
    /// Bit the voter XORs onto its broadcast: 0 for E, 1 for F.
    pub fn flip_bit(self) -> u8 {
        match self {
            Intent::CandidateE => 0,
            Intent::CandidateF => 1,
        }
    }

    pub fn from_bit(bit: u8) -> Self {
        if bit & 1 == 0 {
            Intent::CandidateE
        } else {
            Intent::CandidateF
        }
    }
}

impl std::str::FromStr for Intent {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "E" | "e" => Ok(Intent::CandidateE),
            "F" | "f" => Ok(Intent::CandidateF),
            other => Err(crate::Error::Config(format!("unknown candidate `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentProfile {
    pub id: usize,
    pub honest: bool,
    pub voter_index: usize,
    pub intent: Intent,
}

/// Builds profiles with voter indices from the `UniqueIndex` stub.
pub fn assign_profiles(intents: &[Intent], dishonest: &[usize], seed: u64) -> Vec<AgentProfile> {
    let indices = stubs::unique_index(intents.len(), seed);
    intents
        .iter()
        .enumerate()
        .map(|(id, &intent)| AgentProfile { id, honest: !dishonest.contains(&id), voter_index: indices[id], intent })
        .collect()
}

pub(crate) fn check_profiles(profiles: &[AgentProfile]) -> Result<()> {
    let n = profiles.len();
    let mut seen = vec![false; n];
    for (i, p) in profiles.iter().enumerate() {
        contract!(p.id == i, "profile {i} carries id {}", p.id);
        contract!(p.voter_index < n && !seen[p.voter_index], "voter indices are not a permutation");
        seen[p.voter_index] = true;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classification {
    Discarded,
    Voting { s_p: u8 },
    Verifying { pass: bool },
}

/// Public per-event transcript entry. Bases and outcomes are the reported ones.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "TranscriptLine", try_from = "TranscriptLine")]
pub struct RoundRecord {
    pub event_id: u64,
    pub bases: Vec<Basis>,
    pub outcomes: Vec<u8>,
    pub verifier: usize,
    pub classification: Classification,
}

impl RoundRecord {
    pub fn hadamard_count(&self) -> usize {
        hadamard_count(&self.bases)
    }

    pub fn s_p(&self) -> Option<u8> {
        match self.classification {
            Classification::Voting { s_p } => Some(s_p),
            _ => None,
        }
    }
}

/// JSON-lines schema of one transcript record:
/// `{"event_id", "bases": ["C"|"H"], "outcomes": [0|1], "verifier",
///   "classification": "discarded"|"voting"|"verifying", "S_p": 0|1|null, "pass": bool|null}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TranscriptLine {
    pub event_id: u64,
    pub bases: Vec<Basis>,
    pub outcomes: Vec<u8>,
    pub verifier: usize,
    pub classification: String,
    #[serde(rename = "S_p")]
    pub s_p: Option<u8>,
    pub pass: Option<bool>,
}

impl From<RoundRecord> for TranscriptLine {
    fn from(r: RoundRecord) -> Self {
        let (classification, s_p, pass) = match r.classification {
            Classification::Discarded => ("discarded", None, None),
            Classification::Voting { s_p } => ("voting", Some(s_p), None),
            Classification::Verifying { pass } => ("verifying", None, Some(pass)),
        };
        Self {
            event_id: r.event_id,
            bases: r.bases,
            outcomes: r.outcomes,
            verifier: r.verifier,
            classification: classification.to_string(),
            s_p,
            pass,
        }
    }
}

impl TryFrom<TranscriptLine> for RoundRecord {
    type Error = String;

    fn try_from(t: TranscriptLine) -> std::result::Result<Self, String> {
        let classification = match (t.classification.as_str(), t.s_p, t.pass) {
            ("discarded", None, None) => Classification::Discarded,
            ("voting", Some(s_p), None) if s_p <= 1 => Classification::Voting { s_p },
            ("verifying", None, Some(pass)) => Classification::Verifying { pass },
            (c, s, p) => return Err(format!("inconsistent classification {c} (S_p={s:?}, pass={p:?})")),
        };
        if t.bases.len() != t.outcomes.len() {
            return Err("bases and outcomes differ in length".into());
        }
        Ok(Self { event_id: t.event_id, bases: t.bases, outcomes: t.outcomes, verifier: t.verifier, classification })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecurityParams {
    /// Verifier coin count; a usable event is a voting round with probability `2^{-m}`.
    pub m: u32,
    /// Abort when the failed fraction exceeds `tau`.
    pub tau: f64,
    /// Number of distributed states `l`.
    pub rounds: u64,
}

impl Default for SecurityParams {
    fn default() -> Self {
        Self { m: 7, tau: 0.05, rounds: 10_000 }
    }
}

impl SecurityParams {
    pub fn validate(&self) -> Result<()> {
        contract!((1..=63).contains(&self.m), "coin count m = {} outside 1..=63", self.m);
        contract!((0.0..=1.0).contains(&self.tau), "threshold τ = {} not in [0, 1]", self.tau);
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbortReason {
    VerificationFailures,
    VoteFailures,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ElectionStatus {
    Completed,
    Aborted { reason: AbortReason },
    InsufficientVotingRounds { needed: usize, available: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElectionOutcome {
    pub status: ElectionStatus,
    pub votes_e: usize,
    pub votes_f: usize,
    /// Candidate recorded for each agent's own row, indexed by agent id.
    pub recorded: Vec<Option<Intent>>,
    /// Whether each agent found its vote recorded as intended.
    pub success_flags: Vec<bool>,
    /// `LogicalOr` of the failure flags.
    pub any_failure: bool,
    pub verifying_rounds: usize,
    pub passed_rounds: usize,
    /// `None` when no verifying round occurred.
    pub verification_pass_rate: Option<f64>,
    pub discarded_rounds: usize,
    pub voting_rounds: usize,
}

impl ElectionOutcome {
    pub fn aborted(&self) -> bool {
        !matches!(self.status, ElectionStatus::Completed)
    }

    pub fn winner(&self) -> Option<Intent> {
        if self.aborted() || self.votes_e == self.votes_f {
            None
        } else if self.votes_e > self.votes_f {
            Some(Intent::CandidateE)
        } else {
            Some(Intent::CandidateF)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transcript_line_schema() {
        let r = RoundRecord {
            event_id: 3,
            bases: vec![Basis::Hadamard, Basis::Hadamard, Basis::Computational, Basis::Computational],
            outcomes: vec![1, 0, 0, 0],
            verifier: 2,
            classification: Classification::Voting { s_p: 1 },
        };
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(
            json,
            r#"{"event_id":3,"bases":["H","H","C","C"],"outcomes":[1,0,0,0],"verifier":2,"classification":"voting","S_p":1,"pass":null}"#
        );
        let back: RoundRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
        let bad = json.replace(r#""S_p":1"#, r#""S_p":null"#);
        assert!(serde_json::from_str::<RoundRecord>(&bad).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(SecurityParams::default().validate().is_ok());
        assert!(SecurityParams { m: 0, ..Default::default() }.validate().is_err());
        assert!(SecurityParams { tau: 1.5, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn profiles_get_a_permutation() {
        let p = assign_profiles(&[Intent::CandidateE; 5], &[1], 42);
        let mut idx: Vec<usize> = p.iter().map(|a| a.voter_index).collect();
        idx.sort_unstable();
        assert_eq!(idx, vec![0, 1, 2, 3, 4]);
        assert!(!p[1].honest && p[0].honest);
        assert!(check_profiles(&p).is_ok());
    }
}
