use ghz_vote::adversary::{
    self, anonymity_audit, exact_pass_probability, scenario_by_name, AuditOptions, ColluderTable, DishonestPolicy,
};
use ghz_vote::family::HonestState;
use ghz_vote::harness::stats;
use ghz_vote::protocol::{assign_profiles, run_election, Intent, SecurityParams};
use ghz_vote::Error;

/// Exact joint law of (voter, view) for three honest agents holding |000⟩
/// next to a truthful computational colluder: accepted rounds have an even
/// honest Hadamard set, Hadamard outcomes are fair coins, computational ones
/// are 0, and the voter flips its own bit.
fn planted_leak_joint() -> Vec<Vec<f64>> {
    let k = 3;
    let even_subsets: Vec<u32> = (0u32..8).filter(|s| s.count_ones() % 2 == 0).collect();
    let mut joint = vec![vec![0.0; 16]; k];
    for &s in &even_subsets {
        let s_p = ((s.count_ones() / 2) % 2) as usize;
        for bits in 0u32..8 {
            if bits & !s != 0 {
                continue;
            }
            let p_bits = 1.0 / f64::from(1u32 << s.count_ones());
            for (voter, row) in joint.iter_mut().enumerate() {
                let announced = bits ^ (1 << voter);
                row[s_p * 8 + announced as usize] += p_bits / even_subsets.len() as f64 / k as f64;
            }
        }
    }
    joint
}

fn mutual_information(joint: &[Vec<f64>]) -> f64 {
    let rows: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<f64> = (0..joint[0].len()).map(|c| joint.iter().map(|r| r[c]).sum()).collect();
    let mut mi = 0.0;
    for (r, row) in joint.iter().enumerate() {
        for (c, &p) in row.iter().enumerate() {
            if p > 0.0 {
                mi += p * (p / (rows[r] * cols[c])).log2();
            }
        }
    }
    mi
}

#[test]
fn planted_leak_audit_recovers_exact_mutual_information() {
    let joint = planted_leak_joint();
    let total: f64 = joint.iter().flatten().sum();
    assert!((total - 1.0).abs() < 1e-12);
    let exact = mutual_information(&joint);
    assert!(exact > 0.3, "exact MI {exact}");

    let s = scenario_by_name("planted-leak").unwrap();
    let opts = AuditOptions { trials: 30_000, bootstrap: 50, allow_failing_source: true, ..Default::default() };
    let a = anonymity_audit(&s, 17, &opts).unwrap();
    assert!(a.leak_flagged);
    assert!((a.mi_bias_corrected - exact).abs() < 0.02, "audit {} vs exact {exact}", a.mi_bias_corrected);
    assert!((stats::mutual_information_bits(&a.counts) - a.mutual_information_bits).abs() < 1e-12);
}

#[test]
fn audit_refuses_failing_source_unless_allowed() {
    let s = scenario_by_name("naive-zero").unwrap();
    let strict = AuditOptions { trials: 300, bootstrap: 5, ..Default::default() };
    assert!(matches!(anonymity_audit(&s, 3, &strict), Err(Error::AuditRefused(_))));
    let lenient = AuditOptions { allow_failing_source: true, ..strict };
    let a = anonymity_audit(&s, 3, &lenient).unwrap();
    assert!(a.empirical_pass_rate < 1.0);
}

#[test]
fn policy_search_is_exhaustive_for_one_colluder() {
    let (scenario, search) = adversary::naive_attack(3, 4, HonestState::Zero).unwrap();
    assert!(search.exhaustive);
    assert_eq!(search.evaluated, ColluderTable::SPACE);
    let best = (0..ColluderTable::SPACE)
        .filter_map(|i| {
            let policy = DishonestPolicy::fixed(vec![3], vec![ColluderTable::from_index(i)]).unwrap();
            exact_pass_probability(&scenario.source, 4, Some(&policy)).unwrap()
        })
        .fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(search.best_pass, best);
    // honest |000⟩: an even honest Hadamard set passes when it is empty (1/4)
    // and half the time otherwise (3/4 · 1/2); odd sets pass half the time
    assert!((best - 0.625).abs() < 1e-12, "best {best}");
}

#[test]
fn family_attacks_pass_with_certainty_for_every_member() {
    for name in adversary::CATALOG.iter().filter(|n| n.starts_with("family")) {
        let s = scenario_by_name(name).unwrap();
        let p = adversary::scenario_pass_probability(&s).unwrap().unwrap();
        assert!((p - 1.0).abs() < 1e-12, "{name}: {p}");
    }
}

#[test]
fn accepted_attack_rounds_have_matching_hadamard_parities() {
    let params = SecurityParams { m: 3, tau: 0.05, rounds: 3_000 };
    for name in ["family-psi0", "family-minus-phi1", "family-mixed", "naive-w"] {
        let s = scenario_by_name(name).unwrap();
        let profiles = assign_profiles(&vec![Intent::CandidateE; s.n], &s.dishonest(), 5);
        let run = run_election(&profiles, &s.source, &params, 9, s.colluders()).unwrap();
        assert!(run.transcript.iter().all(|r| adversary::discard_parity_holds(r, &s.honest)), "{name}");
    }
}

#[test]
fn mixed_family_leakage_stays_within_estimator_bias() {
    let s = scenario_by_name("family-mixed").unwrap();
    let opts = AuditOptions { trials: 10_000, bootstrap: 20, ..Default::default() };
    let a = anonymity_audit(&s, 23, &opts).unwrap();
    assert!(
        a.mutual_information_bits < 2.0 * a.mi_bias_estimate,
        "{} vs bias {}",
        a.mutual_information_bits,
        a.mi_bias_estimate
    );
    assert!(!a.leak_flagged, "p {} corrected MI {}", a.p_value, a.mi_bias_corrected);
}
