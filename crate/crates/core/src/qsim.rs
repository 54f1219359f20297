//! Dense pure-state simulator.
//!
//! Bit convention: qubit `q` of an `n`-qubit register is bit `n - 1 - q` of the
//! basis index, so qubit 0 is the leftmost character of a printed bitstring.
//! Polarization maps as `H ↔ 0`, `V ↔ 1`.
//!
//! `SqrtZ` is `diag(1, i)`. Applying `Hadamard` and then `SqrtZ` to every qubit
//! of the GHZ state gives `|Φ₀ⁿ⟩` exactly (no global phase); the opposite order
//! does not.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::seed;

pub const MAX_QUBITS: usize = 16;
pub const DEFAULT_TOL: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[inline]
pub fn bit(index: usize, qubit: usize, n: usize) -> u8 {
    ((index >> (n - 1 - qubit)) & 1) as u8
}

pub fn bits_of(index: usize, n: usize) -> Vec<u8> {
    (0..n).map(|q| bit(index, q, n)).collect()
}

pub fn index_of(bits: &[u8]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b & 1))
}

pub fn format_bits(bits: &[u8]) -> String {
    bits.iter().map(|b| if *b == 0 { '0' } else { '1' }).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Builds a state, checking the length and the normalization (within 1e-9).
    pub fn new(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        contract!((1..=MAX_QUBITS).contains(&n_qubits), "qubit count {n_qubits} outside 1..={MAX_QUBITS}");
        contract!(
            amplitudes.len() == 1 << n_qubits,
            "expected {} amplitudes, got {}",
            1usize << n_qubits,
            amplitudes.len()
        );
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        contract!((norm - 1.0).abs() <= DEFAULT_TOL, "state norm {norm} is not 1");
        Ok(Self { n_qubits, amplitudes })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn from_unnormalized(n_qubits: usize, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        contract!(norm > 0.0, "cannot normalize the zero vector");
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Self::new(n_qubits, amplitudes)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        contract!((1..=MAX_QUBITS).contains(&n_qubits), "qubit count {n_qubits} outside 1..={MAX_QUBITS}");
        contract!(index < 1 << n_qubits, "basis index {index} out of range");
        let mut amplitudes = vec![ZERO; 1 << n_qubits];
        amplitudes[index] = ONE;
        Ok(Self { n_qubits, amplitudes })
    }

    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Multiplies by a unit-modulus phase.
    pub fn phased(&self, phase: Complex64) -> Self {
        Self { n_qubits: self.n_qubits, amplitudes: self.amplitudes.iter().map(|a| a * phase).collect() }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        contract!(self.n_qubits == other.n_qubits, "qubit count mismatch: {} vs {}", self.n_qubits, other.n_qubits);
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    /// Equality up to a global phase: `min_φ ‖a − e^{iφ} b‖∞ ≤ tol`.
    pub fn approx_eq_up_to_phase(&self, other: &Self, tol: f64) -> bool {
        let Ok(overlap) = other.inner(self) else {
            return false;
        };
        if overlap.norm() < 1e-15 {
            return false;
        }
        let phase = overlap / overlap.norm();
        self.amplitudes.iter().zip(&other.amplitudes).all(|(a, b)| (a - b * phase).norm() <= tol)
    }

    /// Real global sign `s` with `self ≈ s · other`, if one exists.
    pub fn sign_relative_to(&self, other: &Self, tol: f64) -> Option<i8> {
        let close = |s: f64| self.amplitudes.iter().zip(&other.amplitudes).all(|(a, b)| (a - b * s).norm() <= tol);
        if other.n_qubits != self.n_qubits {
            None
        } else if close(1.0) {
            Some(1)
        } else if close(-1.0) {
            Some(-1)
        } else {
            None
        }
    }

    /// Places this state on `positions` of an `n_total`-qubit register, with
    /// every other qubit in `|0⟩`.
    pub fn embed(&self, positions: &[usize], n_total: usize) -> Result<Self> {
        contract!(positions.len() == self.n_qubits, "need {} positions, got {}", self.n_qubits, positions.len());
        contract!((1..=MAX_QUBITS).contains(&n_total), "qubit count {n_total} outside 1..={MAX_QUBITS}");
        let mut seen = vec![false; n_total];
        for &p in positions {
            contract!(p < n_total && !seen[p], "invalid embedding position {p}");
            seen[p] = true;
        }
        let mut amplitudes = vec![ZERO; 1 << n_total];
        for (i, a) in self.amplitudes.iter().enumerate() {
            let target = positions
                .iter()
                .enumerate()
                .filter(|(q, _)| bit(i, *q, self.n_qubits) == 1)
                .fold(0usize, |acc, (_, &p)| acc | 1 << (n_total - 1 - p));
            amplitudes[target] = *a;
        }
        Ok(Self { n_qubits: n_total, amplitudes })
    }
}

impl std::ops::Neg for StateVector {
    type Output = StateVector;

    fn neg(self) -> StateVector {
        self.phased(-ONE)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LocalGate {
    Identity,
    Hadamard,
    PauliZ,
    SqrtZ,
    PauliX,
}

impl LocalGate {
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        match self {
            LocalGate::Identity => [[ONE, ZERO], [ZERO, ONE]],
            LocalGate::Hadamard => [[h, h], [h, -h]],
            LocalGate::PauliZ => [[ONE, ZERO], [ZERO, -ONE]],
            LocalGate::SqrtZ => [[ONE, ZERO], [ZERO, Complex64::i()]],
            LocalGate::PauliX => [[ZERO, ONE], [ONE, ZERO]],
        }
    }
}

/// Applies a 2×2 matrix to one qubit in place.
pub fn apply_matrix_in_place(amps: &mut [Complex64], n: usize, qubit: usize, m: &[[Complex64; 2]; 2]) {
    let stride = 1usize << (n - 1 - qubit);
    for base in 0..amps.len() {
        if base & stride != 0 {
            continue;
        }
        let a0 = amps[base];
        let a1 = amps[base | stride];
        amps[base] = m[0][0] * a0 + m[0][1] * a1;
        amps[base | stride] = m[1][0] * a0 + m[1][1] * a1;
    }
}

/// `U₁ ⊗ … ⊗ Uₙ |state⟩`, one gate per qubit.
pub fn apply_local(state: &StateVector, gates: &[LocalGate]) -> Result<StateVector> {
    contract!(gates.len() == state.n_qubits, "{} gates for {} qubits", gates.len(), state.n_qubits);
    let mut amplitudes = state.amplitudes.clone();
    for (q, gate) in gates.iter().enumerate() {
        if *gate != LocalGate::Identity {
            apply_matrix_in_place(&mut amplitudes, state.n_qubits, q, &gate.matrix());
        }
    }
    Ok(StateVector { n_qubits: state.n_qubits, amplitudes })
}

/// Applies a sequence of layers, each layer one gate per qubit.
pub fn apply_layers(state: &StateVector, layers: &[&[LocalGate]]) -> Result<StateVector> {
    layers.iter().try_fold(state.clone(), |s, layer| apply_local(&s, layer))
}

/// Local measurement basis. `Hadamard` means "apply H, then measure computationally".
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    #[serde(rename = "C")]
    Computational,
    #[serde(rename = "H")]
    Hadamard,
}

impl Basis {
    pub fn gate(self) -> LocalGate {
        match self {
            Basis::Computational => LocalGate::Identity,
            Basis::Hadamard => LocalGate::Hadamard,
        }
    }

    pub fn is_hadamard(self) -> bool {
        self == Basis::Hadamard
    }

    pub fn symbol(self) -> char {
        match self {
            Basis::Computational => 'C',
            Basis::Hadamard => 'H',
        }
    }
}

/// Bases for `n` qubits with Hadamard on `subset` and computational elsewhere.
pub fn bases_from_subset(n: usize, subset: &[usize]) -> Vec<Basis> {
    (0..n).map(|q| if subset.contains(&q) { Basis::Hadamard } else { Basis::Computational }).collect()
}

/// Rotates every qubit into its measurement basis.
pub fn rotate_to_bases(state: &StateVector, bases: &[Basis]) -> Result<StateVector> {
    let gates: Vec<LocalGate> = bases.iter().map(|b| b.gate()).collect();
    apply_local(state, &gates)
}

/// Exact outcome distribution (indexed by basis index) for a product measurement.
pub fn outcome_distribution(state: &StateVector, bases: &[Basis]) -> Result<Vec<f64>> {
    Ok(rotate_to_bases(state, bases)?.probabilities())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementOutcome {
    pub bits: Vec<u8>,
    pub index: usize,
    pub probability: f64,
}

/// Born-rule sample of all qubits, deterministic in `rng_seed`.
pub fn sample_computational(state: &StateVector, rng_seed: u64) -> MeasurementOutcome {
    let mut rng = seed::rng_for(rng_seed, "qsim/sample", 0);
    sample_with(state, &mut rng)
}

pub fn sample_with<R: Rng + ?Sized>(state: &StateVector, rng: &mut R) -> MeasurementOutcome {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut chosen = None;
    let mut last_nonzero = 0;
    for (i, a) in state.amplitudes.iter().enumerate() {
        let p = a.norm_sqr();
        if p > 0.0 {
            last_nonzero = i;
            acc += p;
            if u < acc {
                chosen = Some(i);
                break;
            }
        }
    }
    // rounding can leave acc slightly below u
    let index = chosen.unwrap_or(last_nonzero);
    MeasurementOutcome { bits: bits_of(index, state.n_qubits), index, probability: state.probability(index) }
}

/// `|⟨target|state⟩|²`.
pub fn projector_expectation(state: &StateVector, target: &StateVector) -> Result<f64> {
    Ok(target.inner(state)?.norm_sqr().clamp(0.0, 1.0))
}

/// Row-major `dim × dim` complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn projector(state: &StateVector) -> Self {
        let dim = state.dim();
        let a = state.amplitudes();
        let data = (0..dim * dim).map(|k| a[k / dim] * a[k % dim].conj()).collect();
        Self { n_qubits: state.n_qubits, data }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim() + col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let d = self.dim();
        (0..d).all(|i| (0..d).all(|j| (self.get(i, j) - self.get(j, i).conj()).norm() <= tol))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// Reduced density operator on `keep` (listed in ascending qubit order in the result).
pub fn marginal_state(state: &StateVector, keep: &[usize]) -> Result<DensityMatrix> {
    let n = state.n_qubits;
    contract!(!keep.is_empty(), "keep set must be nonempty");
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    contract!(kept.len() == keep.len(), "keep set has duplicates");
    contract!(kept.iter().all(|&q| q < n), "keep set exceeds {n} qubits");

    let traced: Vec<usize> = (0..n).filter(|q| !kept.contains(q)).collect();
    let k = kept.len();
    let dk = 1usize << k;
    let dt = 1usize << traced.len();

    let split = |i: usize| {
        let ki = kept.iter().fold(0, |acc, &q| (acc << 1) | usize::from(bit(i, q, n)));
        let ti = traced.iter().fold(0, |acc, &q| (acc << 1) | usize::from(bit(i, q, n)));
        (ki, ti)
    };
    let mut blocks = vec![ZERO; dt * dk];
    for (i, a) in state.amplitudes.iter().enumerate() {
        let (ki, ti) = split(i);
        blocks[ti * dk + ki] = *a;
    }
    let mut data = vec![ZERO; dk * dk];
    for t in 0..dt {
        let v = &blocks[t * dk..(t + 1) * dk];
        for r in 0..dk {
            if v[r] == ZERO {
                continue;
            }
            for c in 0..dk {
                data[r * dk + c] += v[r] * v[c].conj();
            }
        }
    }
    Ok(DensityMatrix { n_qubits: k, data })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn matmul(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
        let mut out = [[ZERO; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        out
    }

    fn mat_close(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2], tol: f64) -> bool {
        (0..2).all(|i| (0..2).all(|j| (a[i][j] - b[i][j]).norm() <= tol))
    }

    #[test]
    fn gate_algebra() {
        let h = LocalGate::Hadamard.matrix();
        let s = LocalGate::SqrtZ.matrix();
        assert!(mat_close(&matmul(&h, &h), &LocalGate::Identity.matrix(), 1e-12));
        assert!(mat_close(&matmul(&s, &s), &LocalGate::PauliZ.matrix(), 1e-12));
        let x = LocalGate::PauliX.matrix();
        assert!(mat_close(&matmul(&x, &x), &LocalGate::Identity.matrix(), 1e-12));
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let s = StateVector::zero(3).unwrap();
        assert!(apply_local(&s, &[LocalGate::Hadamard; 2]).is_err());
        assert!(StateVector::new(2, vec![ONE; 3]).is_err());
        assert!(StateVector::new(1, vec![ONE, ONE]).is_err());
        assert!(StateVector::zero(MAX_QUBITS + 1).is_err());
    }

    #[test]
    fn identity_layer_is_noop() {
        let s = StateVector::from_unnormalized(2, vec![c(1.0), Complex64::new(0.0, 2.0), c(-1.0), c(0.5)]).unwrap();
        let out = apply_local(&s, &[LocalGate::Identity; 2]).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn sampling_a_basis_state_is_certain() {
        let s = StateVector::zero(4).unwrap();
        for seed in 0..20 {
            let o = sample_computational(&s, seed);
            assert_eq!(o.bits, vec![0, 0, 0, 0]);
            assert!((o.probability - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let s = apply_local(&StateVector::zero(3).unwrap(), &[LocalGate::Hadamard; 3]).unwrap();
        for seed in 0..50 {
            assert_eq!(sample_computational(&s, seed), sample_computational(&s, seed));
        }
    }

    #[test]
    fn projector_dimension_mismatch() {
        let a = StateVector::zero(2).unwrap();
        let b = StateVector::zero(3).unwrap();
        assert!(projector_expectation(&a, &b).is_err());
        assert!((projector_expectation(&a, &a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn marginal_of_product_state() {
        let s = StateVector::zero(2).unwrap();
        let rho = marginal_state(&s, &[0]).unwrap();
        assert_eq!(rho.dim(), 2);
        assert!((rho.get(0, 0) - ONE).norm() < 1e-12);
        assert!(rho.get(1, 1).norm() < 1e-12);
        assert!(marginal_state(&s, &[]).is_err());
        assert!(marginal_state(&s, &[2]).is_err());
        assert!(marginal_state(&s, &[1, 1]).is_err());
    }

    #[test]
    fn embed_places_bits() {
        let one = StateVector::basis(1, 1).unwrap();
        let e = one.embed(&[2], 3).unwrap();
        assert_eq!(e.probability(0b001), 1.0);
        let e = one.embed(&[0], 3).unwrap();
        assert_eq!(e.probability(0b100), 1.0);
        assert!(one.embed(&[3], 3).is_err());
    }

    #[test]
    fn bit_helpers_roundtrip() {
        for i in 0..16 {
            assert_eq!(index_of(&bits_of(i, 4)), i);
        }
        assert_eq!(format_bits(&bits_of(0b0110, 4)), "0110");
    }
}
