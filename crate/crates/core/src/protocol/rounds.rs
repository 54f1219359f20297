use rand::Rng;

use super::{Basis, Classification};
use crate::error::{contract, Result};
use crate::seed;

/// Fair coin per `(agent, round, seed)`.
pub fn choose_basis(agent: usize, round: u64, rng_seed: u64) -> Basis {
    let mut rng = seed::rng_for(seed::derive_seed(rng_seed, "basis", round), "agent", agent as u64);
    if rng.random_bool(0.5) {
        Basis::Hadamard
    } else {
        Basis::Computational
    }
}

pub fn hadamard_count(bases: &[Basis]) -> usize {
    bases.iter().filter(|b| b.is_hadamard()).count()
}

/// True when all `m` Verifier coins land heads.
pub fn verifier_coins(coin_seed: u64, m: u32) -> bool {
    let mut rng = seed::rng_for(coin_seed, "verifier-coins", 0);
    (0..m).all(|_| rng.random_bool(0.5))
}

/// Odd `H_p` discards; otherwise all-heads reserves the event for voting with
/// `S_p = ½H_p mod 2`, and anything else sends it to verification (the pass
/// flag is filled in by [`verify_round`]).
pub fn classify_round(bases: &[Basis], coin_seed: u64, m: u32) -> Classification {
    if hadamard_count(bases) % 2 == 1 {
        return Classification::Discarded;
    }
    classify_with_coins(bases, verifier_coins(coin_seed, m))
}

pub fn classify_with_coins(bases: &[Basis], all_heads: bool) -> Classification {
    let h = hadamard_count(bases);
    if h % 2 == 1 {
        Classification::Discarded
    } else if all_heads {
        Classification::Voting { s_p: ((h / 2) % 2) as u8 }
    } else {
        Classification::Verifying { pass: false }
    }
}

/// Passes iff `½H_p ≡ ΣY (mod 2)`.
pub fn verify_round(h_p: usize, outcomes: &[u8]) -> Result<bool> {
    contract!(h_p.is_multiple_of(2), "H_p = {h_p} is odd; the round should have been discarded");
    let sum: usize = outcomes.iter().map(|&y| usize::from(y & 1)).sum();
    Ok((h_p / 2) % 2 == sum % 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Basis::{Computational as C, Hadamard as H};

    #[test]
    fn classification_examples() {
        assert_eq!(classify_round(&[H, C, C, C], 1, 7), Classification::Discarded);
        assert_eq!(classify_with_coins(&[H, H, C, C], true), Classification::Voting { s_p: 1 });
        assert_eq!(classify_with_coins(&[H, H, H, H], true), Classification::Voting { s_p: 0 });
        assert!(matches!(classify_with_coins(&[C, C, C, C], false), Classification::Verifying { .. }));
    }

    #[test]
    fn verification_examples() {
        assert!(verify_round(0, &[0, 0, 0, 0]).unwrap());
        assert!(verify_round(2, &[1, 0, 0, 0]).unwrap());
        assert!(!verify_round(4, &[1, 0, 0, 0]).unwrap());
        assert!(verify_round(3, &[1, 0, 0, 0]).is_err());
    }

    #[test]
    fn basis_choice_replays() {
        let a: Vec<Basis> = (0..64).map(|r| choose_basis(1, r, 5)).collect();
        let b: Vec<Basis> = (0..64).map(|r| choose_basis(1, r, 5)).collect();
        assert_eq!(a, b);
        assert!(a.contains(&H) && a.contains(&C));
    }

    #[test]
    fn single_coin_can_land_heads() {
        // m = 1 must produce both answers across seeds
        let heads = (0..200).filter(|&s| verifier_coins(s, 1)).count();
        assert!(heads > 50 && heads < 150);
    }
}
