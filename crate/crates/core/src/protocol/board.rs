use serde::{Deserialize, Serialize};

use super::{Classification, Intent, RoundRecord};
use crate::error::{contract, Result};

/// Broadcast bits of one voting round plus its `S_p` correction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoardRow {
    pub bits: Vec<u8>,
    pub s_p: u8,
}

impl BoardRow {
    /// `(⊕ᵢ R_{ji}) ⊕ S_j`.
    pub fn decode(&self) -> u8 {
        self.bits.iter().fold(self.s_p & 1, |acc, b| acc ^ (b & 1))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultsBoard {
    n: usize,
    rows: Vec<Option<BoardRow>>,
}

impl ResultsBoard {
    pub fn new(n: usize) -> Self {
        Self { n, rows: vec![None; n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn set_row(&mut self, j: usize, row: BoardRow) -> Result<()> {
        contract!(j < self.n, "row {j} out of range");
        contract!(row.bits.len() == self.n, "row has {} bits, board is {}", row.bits.len(), self.n);
        self.rows[j] = Some(row);
        Ok(())
    }

    pub fn row(&self, j: usize) -> Option<&BoardRow> {
        self.rows.get(j).and_then(Option::as_ref)
    }

    pub fn is_complete(&self) -> bool {
        self.rows.iter().all(Option::is_some)
    }
}

/// Every agent broadcasts its reported outcome; `voter` XORs its intent bit.
pub fn voting_round_to_row(round: &RoundRecord, voter: usize, intent: Intent) -> Result<BoardRow> {
    let Classification::Voting { s_p } = round.classification else {
        return Err(crate::Error::ContractViolation(format!("event {} is not a voting round", round.event_id)));
    };
    contract!(voter < round.outcomes.len(), "voter {voter} out of range");
    let mut bits = round.outcomes.clone();
    bits[voter] ^= intent.flip_bit();
    Ok(BoardRow { bits, s_p })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    /// Decoded bit `r_j` per row; 0 is a vote for E.
    pub decoded: Vec<u8>,
    pub votes_e: usize,
    pub votes_f: usize,
}

pub fn tally(board: &ResultsBoard) -> Result<Tally> {
    contract!(board.is_complete(), "results board has empty rows");
    let decoded: Vec<u8> = board.rows.iter().flatten().map(BoardRow::decode).collect();
    let votes_f = decoded.iter().filter(|&&r| r == 1).count();
    Ok(Tally { votes_e: decoded.len() - votes_f, votes_f, decoded })
}
