//! GHZ-family states, their Hadamard-count transformation laws, and sources.
//!
//! `|Φ₀ⁿ⟩` has amplitude `+2^{-(n-1)/2}` on strings of Hamming weight `0 mod 4`
//! and `-2^{-(n-1)/2}` on weight `2 mod 4`; `|Φ₁ⁿ⟩` does the same for weights
//! `1` and `3 mod 4`. `|Ψ₀ᵏ⟩` (resp. `|Ψ₁ᵏ⟩`) is `|Φ₀ᵏ⟩` with Hadamard on a
//! subset of size `1 mod 4` (resp. `3 mod 4`) and Z on the remaining qubits.
//! The canonical subsets are `{0}` and `{0, 1, 2}`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::qsim::{self, apply_local, bit, LocalGate, StateVector, DEFAULT_TOL};
use crate::seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FamilyKind {
    Phi0,
    Phi1,
    Psi0,
    Psi1,
    Ghz,
    Other,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FamilyLabel {
    pub kind: FamilyKind,
    pub sign: i8,
    pub n: usize,
}

impl FamilyLabel {
    pub fn new(kind: FamilyKind, sign: i8, n: usize) -> Self {
        Self { kind, sign, n }
    }

    /// Builds the labelled state. `Other` has no constructor.
    pub fn state(&self) -> Result<StateVector> {
        contract!(self.sign == 1 || self.sign == -1, "sign must be ±1, got {}", self.sign);
        let base = match self.kind {
            FamilyKind::Phi0 => make_phi0(self.n)?,
            FamilyKind::Phi1 => make_phi1(self.n)?,
            FamilyKind::Ghz => make_ghz(self.n)?,
            FamilyKind::Psi0 => make_canonical_psi(self.n, PsiVariant::Psi0)?,
            FamilyKind::Psi1 => make_canonical_psi(self.n, PsiVariant::Psi1)?,
            FamilyKind::Other => return Err(Error::ContractViolation("label `Other` has no state".into())),
        };
        Ok(if self.sign < 0 { -base } else { base })
    }
}

impl std::fmt::Display for FamilyLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = if self.sign < 0 { '-' } else { '+' };
        write!(f, "{s}{:?}^{}", self.kind, self.n)
    }
}

fn mod4_state(n: usize, plus: u32, minus: u32) -> Result<StateVector> {
    contract!(n >= 1, "qubit count must be at least 1");
    contract!(n <= qsim::MAX_QUBITS, "qubit count {n} too large");
    let amp = (2f64).powf(-((n - 1) as f64) / 2.0);
    let amplitudes = (0..1usize << n)
        .map(|y| match y.count_ones() % 4 {
            w if w == plus => Complex64::new(amp, 0.0),
            w if w == minus => Complex64::new(-amp, 0.0),
            _ => Complex64::new(0.0, 0.0),
        })
        .collect();
    StateVector::new(n, amplitudes)
}

pub fn make_phi0(n: usize) -> Result<StateVector> {
    mod4_state(n, 0, 2)
}

pub fn make_phi1(n: usize) -> Result<StateVector> {
    mod4_state(n, 1, 3)
}

pub fn make_ghz(n: usize) -> Result<StateVector> {
    contract!(n >= 1, "qubit count must be at least 1");
    contract!(n <= qsim::MAX_QUBITS, "qubit count {n} too large");
    let dim = 1usize << n;
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
    let h = std::f64::consts::FRAC_1_SQRT_2;
    amplitudes[0] = Complex64::new(h, 0.0);
    amplitudes[dim - 1] = Complex64::new(h, 0.0);
    StateVector::new(n, amplitudes)
}

/// Per-qubit gate layer: Hadamard on `subset`, PauliZ elsewhere.
pub fn hadamard_z_layer(n: usize, subset: &[usize]) -> Vec<LocalGate> {
    (0..n).map(|q| if subset.contains(&q) { LocalGate::Hadamard } else { LocalGate::PauliZ }).collect()
}

fn check_subset(n: usize, subset: &[usize]) -> Result<()> {
    let mut seen = vec![false; n];
    for &q in subset {
        contract!(q < n, "subset index {q} out of range for {n} qubits");
        contract!(!seen[q], "subset index {q} repeated");
        seen[q] = true;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PsiVariant {
    Psi0,
    Psi1,
}

impl PsiVariant {
    fn residue(self) -> usize {
        match self {
            PsiVariant::Psi0 => 1,
            PsiVariant::Psi1 => 3,
        }
    }
}

pub fn make_psi(k: usize, hadamard_subset: &[usize], variant: PsiVariant) -> Result<StateVector> {
    check_subset(k, hadamard_subset)?;
    contract!(
        hadamard_subset.len() % 4 == variant.residue(),
        "{variant:?} needs a Hadamard subset of size {} mod 4, got {}",
        variant.residue(),
        hadamard_subset.len()
    );
    apply_local(&make_phi0(k)?, &hadamard_z_layer(k, hadamard_subset))
}

pub fn canonical_psi_subset(variant: PsiVariant) -> Vec<usize> {
    match variant {
        PsiVariant::Psi0 => vec![0],
        PsiVariant::Psi1 => vec![0, 1, 2],
    }
}

pub fn make_canonical_psi(k: usize, variant: PsiVariant) -> Result<StateVector> {
    make_psi(k, &canonical_psi_subset(variant), variant)
}

/// Names a state as a member of the family (canonical Ψ subsets), or `Other`.
pub fn classify(state: &StateVector, tol: f64) -> FamilyLabel {
    let n = state.n_qubits();
    let mut candidates = vec![
        (FamilyKind::Phi0, make_phi0(n)),
        (FamilyKind::Phi1, make_phi1(n)),
        (FamilyKind::Ghz, make_ghz(n)),
        (FamilyKind::Psi0, make_canonical_psi(n, PsiVariant::Psi0)),
    ];
    if n >= 3 {
        candidates.push((FamilyKind::Psi1, make_canonical_psi(n, PsiVariant::Psi1)));
    }
    for (kind, candidate) in candidates {
        if let Ok(c) = candidate {
            if let Some(sign) = state.sign_relative_to(&c, tol) {
                return FamilyLabel::new(kind, sign, n);
            }
        }
    }
    FamilyLabel::new(FamilyKind::Other, 1, n)
}

/// Applies Hadamard on `hadamard_subset` and Z elsewhere to `|Φ₀ⁿ⟩` and names the result.
pub fn transformation_property_check(n: usize, hadamard_subset: &[usize]) -> Result<FamilyLabel> {
    check_subset(n, hadamard_subset)?;
    contract!(hadamard_subset.len().is_multiple_of(2), "odd Hadamard subsets produce Ψ states; use make_psi");
    let out = apply_local(&make_phi0(n)?, &hadamard_z_layer(n, hadamard_subset))?;
    Ok(classify(&out, DEFAULT_TOL))
}

/// Distribution `[P(stat = 0), P(stat = 1)]` of the parity statistic
/// `⌈H/2⌉ mod 2 ⊕ (ΣY mod 2)`, where `H = |hadamards|`. For even `H` this is
/// `½H ⊕ ΣY`, for odd `H` it is `½(H+1) ⊕ ΣY`.
pub fn parity_statistic_distribution(state: &StateVector, hadamards: &[usize]) -> Result<[f64; 2]> {
    let n = state.n_qubits();
    check_subset(n, hadamards)?;
    let offset = (hadamards.len().div_ceil(2) % 2) as u32;
    let probs = qsim::outcome_distribution(state, &qsim::bases_from_subset(n, hadamards))?;
    let mut dist = [0.0; 2];
    for (y, p) in probs.into_iter().enumerate() {
        dist[((y.count_ones() + offset) % 2) as usize] += p;
    }
    Ok(dist)
}

/// The statistic's value when it is certain within `tol`.
pub fn deterministic_statistic(state: &StateVector, hadamards: &[usize], tol: f64) -> Result<Option<u8>> {
    let [p0, p1] = parity_statistic_distribution(state, hadamards)?;
    Ok(if p1 <= tol && (p0 - 1.0).abs() <= tol {
        Some(0)
    } else if p0 <= tol && (p1 - 1.0).abs() <= tol {
        Some(1)
    } else {
        None
    })
}

/// Honest-part state emitted by a malicious source.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state")]
pub enum HonestState {
    Family {
        label: FamilyLabel,
    },
    /// `(|0…01⟩ + |0…10⟩ + … + |10…0⟩)/√k`
    W,
    /// `|0…0⟩`
    Zero,
}

impl HonestState {
    pub fn build(&self, k: usize) -> Result<StateVector> {
        match self {
            HonestState::Family { label } => {
                contract!(label.n == k, "label {label} does not fit {k} honest qubits");
                label.state()
            }
            HonestState::W => make_w(k),
            HonestState::Zero => StateVector::zero(k),
        }
    }

    pub fn label(&self) -> Option<FamilyLabel> {
        match self {
            HonestState::Family { label } => Some(*label),
            _ => None,
        }
    }
}

pub fn make_w(k: usize) -> Result<StateVector> {
    contract!(k >= 1, "qubit count must be at least 1");
    let amplitudes = (0..1usize << k)
        .map(|y| if y.count_ones() == 1 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
        .collect();
    StateVector::from_unnormalized(k, amplitudes)
}

/// Source colluding with the dishonest agents: each round it emits one of
/// `members` on the honest qubits (`|0⟩` on the rest) and tells the
/// colluders which one through the side information.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaliciousSource {
    pub honest: Vec<usize>,
    pub members: Vec<HonestState>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum SourceStrategy {
    Ideal,
    /// `|Φ₀ⁿ⟩` with probability `p`, else a uniformly random basis state.
    WernerEnsemble {
        p: f64,
    },
    /// `|Φ₀ⁿ⟩` with an independent `diag(1, e^{iθ})`, `θ ~ N(0, σ²)`, on each qubit.
    DephasingEnsemble {
        sigma: f64,
    },
    /// Round `r` emits `schedule[r mod len]`.
    FixedFamily {
        schedule: Vec<FamilyLabel>,
    },
    AdaptiveMalicious {
        policy: MaliciousSource,
    },
}

/// Token visible only to dishonest agents.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideInfo {
    pub member: Option<usize>,
    pub label: Option<FamilyLabel>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmittedRoundState {
    pub round: u64,
    pub state: StateVector,
    pub side_info: SideInfo,
}

impl SourceStrategy {
    pub fn validate(&self, n: usize) -> Result<()> {
        contract!((1..=qsim::MAX_QUBITS).contains(&n), "agent count {n} out of range");
        match self {
            SourceStrategy::Ideal => {}
            SourceStrategy::WernerEnsemble { p } => {
                contract!((0.0..=1.0).contains(p), "Werner mixing probability {p} not in [0, 1]")
            }
            SourceStrategy::DephasingEnsemble { sigma } => {
                contract!(*sigma >= 0.0 && sigma.is_finite(), "dephasing σ {sigma} must be ≥ 0")
            }
            SourceStrategy::FixedFamily { schedule } => {
                contract!(!schedule.is_empty(), "empty family schedule");
                for label in schedule {
                    contract!(label.n == n, "label {label} does not fit {n} agents");
                    label.state()?;
                }
            }
            SourceStrategy::AdaptiveMalicious { policy } => {
                contract!(!policy.members.is_empty(), "malicious source without members");
                check_subset(n, &policy.honest)?;
                contract!(!policy.honest.is_empty(), "no honest qubits");
                for m in &policy.members {
                    m.build(policy.honest.len())?;
                }
            }
        }
        Ok(())
    }
}

/// State emitted on `round`, deterministic in `(strategy, n, round, rng_seed)`.
pub fn emit_round(strategy: &SourceStrategy, n: usize, round: u64, rng_seed: u64) -> Result<EmittedRoundState> {
    let mut rng = seed::rng_for(rng_seed, "source", round);
    let (state, side_info) = match strategy {
        SourceStrategy::Ideal => (make_phi0(n)?, SideInfo::default()),
        SourceStrategy::WernerEnsemble { p } => {
            let state = if rng.random_bool(p.clamp(0.0, 1.0)) {
                make_phi0(n)?
            } else {
                StateVector::basis(n, rng.random_range(0..1usize << n))?
            };
            (state, SideInfo::default())
        }
        SourceStrategy::DephasingEnsemble { sigma } => {
            let mut state = make_phi0(n)?;
            if *sigma > 0.0 {
                let normal =
                    Normal::new(0.0, *sigma).map_err(|e| Error::ContractViolation(format!("dephasing σ: {e}")))?;
                let thetas: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
                state = dephase(&state, &thetas)?;
            }
            (state, SideInfo::default())
        }
        SourceStrategy::FixedFamily { schedule } => {
            contract!(!schedule.is_empty(), "empty family schedule");
            let label = schedule[(round % schedule.len() as u64) as usize];
            contract!(label.n == n, "label {label} does not fit {n} agents");
            (label.state()?, SideInfo { member: None, label: Some(label) })
        }
        SourceStrategy::AdaptiveMalicious { policy } => {
            contract!(!policy.members.is_empty(), "malicious source without members");
            let member = if policy.members.len() == 1 { 0 } else { rng.random_range(0..policy.members.len()) };
            let chosen = &policy.members[member];
            let part = chosen.build(policy.honest.len())?;
            (part.embed(&policy.honest, n)?, SideInfo { member: Some(member), label: chosen.label() })
        }
    };
    Ok(EmittedRoundState { round, state, side_info })
}

/// Applies `diag(1, e^{iθ_q})` on every qubit.
pub fn dephase(state: &StateVector, thetas: &[f64]) -> Result<StateVector> {
    let n = state.n_qubits();
    contract!(thetas.len() == n, "{} phases for {n} qubits", thetas.len());
    let amplitudes = state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(y, a)| {
            let phase: f64 = (0..n).filter(|&q| bit(y, q, n) == 1).map(|q| thetas[q]).sum();
            a * Complex64::from_polar(1.0, phase)
        })
        .collect();
    StateVector::new(n, amplitudes)
}

/// `p` such that the Werner ensemble has fidelity `fidelity` to `|Φ₀ⁿ⟩`:
/// `F = p + (1 − p)/2ⁿ`.
pub fn werner_p_for_fidelity(fidelity: f64, n: usize) -> f64 {
    let floor = 1.0 / (1u64 << n) as f64;
    (fidelity - floor) / (1.0 - floor)
}

/// Finite ensemble decomposition `(weight, state, side info)` of a strategy,
/// or `None` when the ensemble is continuous (dephasing).
pub fn ensemble_branches(strategy: &SourceStrategy, n: usize) -> Result<Option<Vec<(f64, StateVector, SideInfo)>>> {
    strategy.validate(n)?;
    Ok(match strategy {
        SourceStrategy::Ideal => Some(vec![(1.0, make_phi0(n)?, SideInfo::default())]),
        SourceStrategy::WernerEnsemble { p } => {
            let dim = 1usize << n;
            let mut branches = vec![(*p, make_phi0(n)?, SideInfo::default())];
            for x in 0..dim {
                branches.push(((1.0 - p) / dim as f64, StateVector::basis(n, x)?, SideInfo::default()));
            }
            Some(branches)
        }
        SourceStrategy::DephasingEnsemble { sigma } if *sigma == 0.0 => {
            Some(vec![(1.0, make_phi0(n)?, SideInfo::default())])
        }
        SourceStrategy::DephasingEnsemble { .. } => None,
        SourceStrategy::FixedFamily { schedule } => {
            let w = 1.0 / schedule.len() as f64;
            let mut branches = Vec::with_capacity(schedule.len());
            for label in schedule {
                branches.push((w, label.state()?, SideInfo { member: None, label: Some(*label) }));
            }
            Some(branches)
        }
        SourceStrategy::AdaptiveMalicious { policy } => {
            let w = 1.0 / policy.members.len() as f64;
            let mut branches = Vec::with_capacity(policy.members.len());
            for (i, m) in policy.members.iter().enumerate() {
                let state = m.build(policy.honest.len())?.embed(&policy.honest, n)?;
                branches.push((w, state, SideInfo { member: Some(i), label: m.label() }));
            }
            Some(branches)
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// Ensemble average of `|⟨target|ψ⟩|²`.
pub fn ensemble_fidelity(strategy: &SourceStrategy, n: usize, target: &StateVector) -> Result<FidelityEstimate> {
    contract!(target.n_qubits() == n, "target has {} qubits, source {n}", target.n_qubits());
    strategy.validate(n)?;
    let exact = |value: f64| FidelityEstimate { value, std_error: 0.0 };
    match strategy {
        SourceStrategy::WernerEnsemble { p } => {
            let phi0 = make_phi0(n)?;
            let f = qsim::projector_expectation(&phi0, target)?;
            Ok(exact(p * f + (1.0 - p) / (1u64 << n) as f64))
        }
        SourceStrategy::DephasingEnsemble { sigma } => {
            // E|Σ_y t̄_y a_y e^{iθ·y}|² with independent Gaussian θ_q:
            // E e^{iθ_q (y_q − y'_q)} = exp(−σ² (y_q − y'_q)² / 2).
            let phi0 = make_phi0(n)?;
            let terms: Vec<(usize, Complex64)> = phi0
                .amplitudes()
                .iter()
                .zip(target.amplitudes())
                .enumerate()
                .filter(|(_, (a, _))| a.norm_sqr() > 0.0)
                .map(|(y, (a, t))| (y, t.conj() * a))
                .collect();
            let mut total = Complex64::new(0.0, 0.0);
            for &(y, u) in &terms {
                for &(z, v) in &terms {
                    let distance = (y ^ z).count_ones() as f64;
                    total += u * v.conj() * (-sigma * sigma * distance / 2.0).exp();
                }
            }
            Ok(exact(total.re.clamp(0.0, 1.0)))
        }
        _ => {
            let branches = ensemble_branches(strategy, n)?.expect("finite ensemble");
            let mut value = 0.0;
            for (w, state, _) in &branches {
                value += w * qsim::projector_expectation(state, target)?;
            }
            Ok(exact(value))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi0_small_cases() {
        let p1 = make_phi0(1).unwrap();
        assert_eq!(p1.probabilities(), vec![1.0, 0.0]);
        assert!(make_phi0(0).is_err());
        assert!(make_phi1(0).is_err());
        assert_eq!(make_phi1(1).unwrap().probabilities(), vec![0.0, 1.0]);
    }

    #[test]
    fn psi_rejects_wrong_cardinality() {
        assert!(make_psi(3, &[0, 1], PsiVariant::Psi0).is_err());
        assert!(make_psi(3, &[0], PsiVariant::Psi1).is_err());
        assert!(make_psi(3, &[0, 0, 1], PsiVariant::Psi1).is_err());
        assert!(make_psi(3, &[3], PsiVariant::Psi0).is_err());
    }

    #[test]
    fn transformation_check_rejects_odd_subsets() {
        assert!(transformation_property_check(4, &[0]).is_err());
        assert!(transformation_property_check(4, &[0, 1, 2]).is_err());
    }

    #[test]
    fn zero_hadamards_gives_plus_phi0() {
        let label = transformation_property_check(4, &[]).unwrap();
        assert_eq!(label, FamilyLabel::new(FamilyKind::Phi0, 1, 4));
    }

    #[test]
    fn werner_p_inverts_fidelity() {
        let p = werner_p_for_fidelity(0.89, 4);
        assert!((p + (1.0 - p) / 16.0 - 0.89).abs() < 1e-12);
    }

    #[test]
    fn strategy_validation() {
        assert!(SourceStrategy::WernerEnsemble { p: 1.5 }.validate(4).is_err());
        assert!(SourceStrategy::DephasingEnsemble { sigma: -0.1 }.validate(4).is_err());
        let bad = SourceStrategy::FixedFamily { schedule: vec![FamilyLabel::new(FamilyKind::Phi0, 1, 3)] };
        assert!(bad.validate(4).is_err());
        let other = SourceStrategy::FixedFamily { schedule: vec![FamilyLabel::new(FamilyKind::Other, 1, 4)] };
        assert!(other.validate(4).is_err());
    }

    #[test]
    fn dephasing_zero_sigma_is_ideal() {
        let s = SourceStrategy::DephasingEnsemble { sigma: 0.0 };
        let e = emit_round(&s, 4, 3, 9).unwrap();
        assert_eq!(e.state, make_phi0(4).unwrap());
        let f = ensemble_fidelity(&s, 4, &make_phi0(4).unwrap()).unwrap();
        assert!((f.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn malicious_source_embeds_honest_part() {
        let policy = MaliciousSource {
            honest: vec![0, 1, 2],
            members: vec![HonestState::Family { label: FamilyLabel::new(FamilyKind::Phi0, 1, 3) }],
        };
        let s = SourceStrategy::AdaptiveMalicious { policy };
        let e = emit_round(&s, 4, 0, 1).unwrap();
        let expected = make_phi0(3).unwrap().embed(&[0, 1, 2], 4).unwrap();
        assert_eq!(e.state, expected);
        assert_eq!(e.side_info.label, Some(FamilyLabel::new(FamilyKind::Phi0, 1, 3)));
    }
}
