//! Simulator and state-family checks against oracles written from scratch:
//! dense Kronecker-product operators, an explicit partial trace, and the
//! amplitude formulas of the family states.

use ghz_vote::adversary::all_family_labels;
use ghz_vote::family::{self, FamilyKind, FamilyLabel, PsiVariant, SourceStrategy};
use ghz_vote::harness::checks::{parity_support, uniformity_test};
use ghz_vote::harness::properties::{sample_bitstrings, subsets_with_parity};
use ghz_vote::harness::ReportStatus;
use ghz_vote::qsim::{self, LocalGate, StateVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Dense = Vec<Vec<Complex64>>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn kron(a: &Dense, b: &Dense) -> Dense {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0, 0.0); ra * rb]; ra * rb];
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

fn gate_matrix(g: LocalGate) -> Dense {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match g {
        LocalGate::Identity => vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]],
        LocalGate::Hadamard => vec![vec![c(s, 0.0), c(s, 0.0)], vec![c(s, 0.0), c(-s, 0.0)]],
        LocalGate::PauliZ => vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(-1.0, 0.0)]],
        LocalGate::SqrtZ => vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 1.0)]],
        LocalGate::PauliX => vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]],
    }
}

/// Qubit 0 is the most significant factor.
fn dense_operator(gates: &[LocalGate]) -> Dense {
    gates.iter().skip(1).fold(gate_matrix(gates[0]), |acc, &g| kron(&acc, &gate_matrix(g)))
}

fn mat_vec(m: &Dense, v: &[Complex64]) -> Vec<Complex64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> StateVector {
    let amps = (0..1usize << n).map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    StateVector::from_unnormalized(n, amps).unwrap()
}

fn close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
}

/// `±2^{-(n-1)/2}` on weights `r` and `r + 2` mod 4 (`+` on `r`).
fn family_formula(n: usize, r: u32) -> Vec<Complex64> {
    let a = 2f64.powf(-((n - 1) as f64) / 2.0);
    (0..1usize << n)
        .map(|y| match (y.count_ones() + 4 - r) % 4 {
            0 => c(a, 0.0),
            2 => c(-a, 0.0),
            _ => c(0.0, 0.0),
        })
        .collect()
}

const GATES: [LocalGate; 5] =
    [LocalGate::Identity, LocalGate::Hadamard, LocalGate::PauliZ, LocalGate::SqrtZ, LocalGate::PauliX];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn local_gates_match_dense_kronecker_product(n in 1usize..=5, seed in any::<u64>(), picks in prop::collection::vec(0usize..5, 5)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let state = random_state(n, &mut rng);
        let gates: Vec<LocalGate> = picks[..n].iter().map(|&i| GATES[i]).collect();
        let fast = qsim::apply_local(&state, &gates).unwrap();
        let dense = mat_vec(&dense_operator(&gates), state.amplitudes());
        prop_assert!(close(fast.amplitudes(), &dense, 1e-12));
        prop_assert!((fast.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inner_product_matches_definition(n in 1usize..=5, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_state(n, &mut rng);
        let b = random_state(n, &mut rng);
        let direct: Complex64 = a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| x.conj() * y).sum();
        prop_assert!((a.inner(&b).unwrap() - direct).norm() < 1e-12);
        prop_assert!((a.inner(&a).unwrap() - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn marginal_matches_brute_force_partial_trace(n in 2usize..=5, seed in any::<u64>(), keep_mask in 1usize..32) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let state = random_state(n, &mut rng);
        let keep: Vec<usize> = (0..n).filter(|q| (keep_mask >> q) & 1 == 1).collect();
        prop_assume!(!keep.is_empty());
        let rho = qsim::marginal_state(&state, &keep).unwrap();
        let k = keep.len();
        let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let compose = |kept: usize, env: usize| -> usize {
            let mut bits = vec![0u8; n];
            for (i, &q) in keep.iter().enumerate() {
                bits[q] = qsim::bit(kept, i, k);
            }
            for (i, &q) in traced.iter().enumerate() {
                bits[q] = qsim::bit(env, i, traced.len());
            }
            qsim::index_of(&bits)
        };
        for r in 0..1usize << k {
            for col in 0..1usize << k {
                let mut sum = c(0.0, 0.0);
                for env in 0..1usize << traced.len() {
                    sum += state.amplitude(compose(r, env)) * state.amplitude(compose(col, env)).conj();
                }
                prop_assert!((rho.get(r, col) - sum).norm() < 1e-12);
            }
        }
        prop_assert!((rho.trace() - c(1.0, 0.0)).norm() < 1e-12);
        prop_assert!(rho.is_hermitian(1e-12));
    }

    #[test]
    fn embedding_places_qubits_and_pads_with_zero(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let small = random_state(2, &mut rng);
        let big = small.embed(&[3, 1], 4).unwrap();
        for y in 0..16usize {
            let bits = qsim::bits_of(y, 4);
            let expect = if bits[0] == 0 && bits[2] == 0 { small.amplitude(qsim::index_of(&[bits[3], bits[1]])) } else { c(0.0, 0.0) };
            prop_assert!((big.amplitude(y) - expect).norm() < 1e-12);
        }
    }
}

#[test]
fn family_states_match_amplitude_formulas() {
    for n in 1..=8 {
        assert!(close(family::make_phi0(n).unwrap().amplitudes(), &family_formula(n, 0), 1e-12), "Phi0^{n}");
        assert!(close(family::make_phi1(n).unwrap().amplitudes(), &family_formula(n, 1), 1e-12), "Phi1^{n}");
    }
}

#[test]
fn ghz_goes_to_phi0_under_hadamard_then_sqrt_z() {
    for n in 2..=8 {
        let ghz = family::make_ghz(n).unwrap();
        let mut gates = vec![LocalGate::Hadamard; n];
        let mid = mat_vec(&dense_operator(&gates), ghz.amplitudes());
        gates.fill(LocalGate::SqrtZ);
        let out = StateVector::new(n, mat_vec(&dense_operator(&gates), &mid)).unwrap();
        assert!(out.approx_eq_up_to_phase(&family::make_phi0(n).unwrap(), 1e-12), "n = {n}");
    }
}

#[test]
fn transformation_law_is_exhaustive_over_even_subsets() {
    for n in 2..=7 {
        let phi0 = StateVector::new(n, family_formula(n, 0)).unwrap();
        let phi1 = StateVector::new(n, family_formula(n, 1)).unwrap();
        for s in subsets_with_parity(n, false) {
            let gates = family::hadamard_z_layer(n, &s);
            let out = StateVector::new(n, mat_vec(&dense_operator(&gates), phi0.amplitudes())).unwrap();
            let target = if s.len() % 4 == 0 { &phi0 } else { &phi1 };
            assert!(out.sign_relative_to(target, 1e-12).is_some(), "n = {n}, S = {s:?}");
            let label = family::transformation_property_check(n, &s).unwrap();
            let want = if s.len() % 4 == 0 { FamilyKind::Phi0 } else { FamilyKind::Phi1 };
            assert_eq!(label.kind, want, "n = {n}, S = {s:?}");
        }
    }
}

#[test]
fn odd_subsets_are_refused_by_the_phi_law_and_land_in_psi() {
    assert!(family::transformation_property_check(4, &[0]).is_err());
    for n in 3..=6 {
        for s in subsets_with_parity(n, true) {
            let variant = if s.len() % 4 == 1 { PsiVariant::Psi0 } else { PsiVariant::Psi1 };
            assert!(family::make_psi(n, &s, variant).is_ok());
            let wrong = if variant == PsiVariant::Psi0 { PsiVariant::Psi1 } else { PsiVariant::Psi0 };
            assert!(family::make_psi(n, &s, wrong).is_err());
        }
    }
}

/// Born-rule oracle for the parity statistic with dense operators.
fn statistic_oracle(state: &StateVector, hadamards: &[usize]) -> [f64; 2] {
    let n = state.n_qubits();
    let gates: Vec<LocalGate> =
        (0..n).map(|q| if hadamards.contains(&q) { LocalGate::Hadamard } else { LocalGate::Identity }).collect();
    let rotated = mat_vec(&dense_operator(&gates), state.amplitudes());
    let offset = hadamards.len().div_ceil(2) as u32;
    let mut out = [0.0; 2];
    for (y, a) in rotated.iter().enumerate() {
        out[((y.count_ones() + offset) % 2) as usize] += a.norm_sqr();
    }
    out
}

#[test]
fn family_parity_statistic_is_deterministic_at_k3() {
    let mut seen = Vec::new();
    for label in all_family_labels(3) {
        let state = label.state().unwrap();
        let odd = matches!(label.kind, FamilyKind::Psi0 | FamilyKind::Psi1);
        let mut values = Vec::new();
        for s in subsets_with_parity(3, odd) {
            let oracle = statistic_oracle(&state, &s);
            let fast = family::parity_statistic_distribution(&state, &s).unwrap();
            assert!((oracle[0] - fast[0]).abs() < 1e-12 && (oracle[1] - fast[1]).abs() < 1e-12);
            let v = family::deterministic_statistic(&state, &s, 1e-9).unwrap();
            assert!(v.is_some(), "{label} S = {s:?}: {oracle:?}");
            values.push(v.unwrap());
        }
        values.dedup();
        assert_eq!(values.len(), 1, "{label}: statistic depends on the basis set");
        seen.push((label.kind, values[0]));
    }
    for (kind, v) in seen {
        let expect = match kind {
            FamilyKind::Phi0 | FamilyKind::Psi1 => 0,
            _ => 1,
        };
        assert_eq!(v, expect, "{kind:?}");
    }
}

#[test]
fn w_state_is_a_counterexample() {
    let w = family::make_w(3).unwrap();
    let mut best = 0.0f64;
    for odd in [false, true] {
        for s in subsets_with_parity(3, odd) {
            let [p0, p1] = statistic_oracle(&w, &s);
            best = best.max(p0.min(p1));
        }
    }
    assert!(best >= 0.05, "W state statistic too close to deterministic: {best}");
    assert_eq!(family::classify(&w, 1e-9).kind, FamilyKind::Other);
}

#[test]
fn classify_recognises_every_signed_member() {
    for n in 3..=5 {
        for label in all_family_labels(n) {
            assert_eq!(family::classify(&label.state().unwrap(), 1e-9), label);
        }
        let ghz = FamilyLabel::new(FamilyKind::Ghz, -1, n);
        assert_eq!(family::classify(&ghz.state().unwrap(), 1e-9), ghz);
    }
}

#[test]
fn phi_samples_are_uniform_on_their_parity_class() {
    let phi0 = family::make_phi0(4).unwrap();
    let r = uniformity_test(&sample_bitstrings(&phi0, 100_000, 17), &parity_support(4, false)).unwrap();
    assert_eq!(r.status, ReportStatus::Pass, "{r:?}");
    let phi1 = family::make_phi1(4).unwrap();
    let r = uniformity_test(&sample_bitstrings(&phi1, 100_000, 18), &parity_support(4, true)).unwrap();
    assert_eq!(r.status, ReportStatus::Pass, "{r:?}");
    assert!(uniformity_test(&sample_bitstrings(&phi1, 100, 19), &parity_support(4, false)).is_err());
}

#[test]
fn ensemble_fidelities_match_monte_carlo() {
    let n = 4;
    let phi0 = family::make_phi0(n).unwrap();
    let p = family::werner_p_for_fidelity(0.89, n);
    let f = family::ensemble_fidelity(&SourceStrategy::WernerEnsemble { p }, n, &phi0).unwrap();
    assert!((f.value - 0.89).abs() < 1e-12);

    let sigma = 0.4;
    let closed = family::ensemble_fidelity(&SourceStrategy::DephasingEnsemble { sigma }, n, &phi0).unwrap().value;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let normal = rand_distr::Normal::new(0.0, sigma).unwrap();
    let draws = 20_000;
    let mut samples = Vec::with_capacity(draws);
    for _ in 0..draws {
        let thetas: Vec<f64> = (0..n).map(|_| rand_distr::Distribution::sample(&normal, &mut rng)).collect();
        let state = family::dephase(&phi0, &thetas).unwrap();
        samples.push(state.inner(&phi0).unwrap().norm_sqr());
    }
    let mean = samples.iter().sum::<f64>() / draws as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
    let se = (var / draws as f64).sqrt();
    assert!((mean - closed).abs() < 4.0 * se + 1e-12, "closed {closed} vs MC {mean} ± {se}");
}

#[test]
fn sampling_is_reproducible_per_seed() {
    let s = family::make_phi0(5).unwrap();
    assert_eq!(qsim::sample_computational(&s, 99), qsim::sample_computational(&s, 99));
    let a = sample_bitstrings(&s, 200, 1);
    assert_eq!(a, sample_bitstrings(&s, 200, 1));
    assert_ne!(a, sample_bitstrings(&s, 200, 2));
}
