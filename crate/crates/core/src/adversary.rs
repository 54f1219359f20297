//! Malicious sources colluding with dishonest agents.
//!
//! Honest agents sit on qubits `0..k`, colluders on `k..n`. A colluder can
//! only act on what it reports: its basis (which fixes the parity of `H_d`)
//! and its outcome bit (which shifts `ΣY`). In a non-discarded round the
//! parities of `H_h` and `H_d` agree, so a colluder that knows the honest part
//! is `±Φ₀ᵏ`/`±Φ₁ᵏ` reports an even `H_d`, one that knows it is `±Ψ₀ᵏ`/`±Ψ₁ᵏ`
//! reports an odd `H_d`, and in both cases it sets `ΣY_d` to the value of the
//! honest parity statistic, which is deterministic on those states.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::family::{
    self, ensemble_branches, FamilyKind, FamilyLabel, HonestState, MaliciousSource, SideInfo, SourceStrategy,
};
use crate::harness::report::Provenance;
use crate::harness::stats;
use crate::protocol::{self, Basis, Colluders, RoundContext};
use crate::qsim::{self, DEFAULT_TOL};
use crate::{par, seed};

/// Deterministic colluder behaviour given its own measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ColluderTable {
    pub measure: Basis,
    /// Report when the own outcome is 0.
    pub on_zero: (Basis, u8),
    /// Report when the own outcome is 1.
    pub on_one: (Basis, u8),
}

impl ColluderTable {
    pub const SPACE: usize = 32;

    /// Truthful computational-basis reporter.
    pub fn truthful() -> Self {
        Self { measure: Basis::Computational, on_zero: (Basis::Computational, 0), on_one: (Basis::Computational, 1) }
    }

    /// The `i`-th of the 32 tables (5 bits: measure, basis/bit for 0, basis/bit for 1).
    pub fn from_index(i: usize) -> Self {
        let b = |bit: usize| if (i >> bit) & 1 == 1 { Basis::Hadamard } else { Basis::Computational };
        Self { measure: b(4), on_zero: (b(3), ((i >> 2) & 1) as u8), on_one: (b(1), (i & 1) as u8) }
    }

    fn apply(&self, own: u8) -> (Basis, u8) {
        if own & 1 == 0 {
            self.on_zero
        } else {
            self.on_one
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ReportRule {
    /// Reads the family label from the side information and reports so that
    /// the verification equality holds.
    FamilyAdaptive,
    /// One table per controlled agent, in the order of `controlled`.
    Fixed { tables: Vec<ColluderTable> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DishonestPolicy {
    pub controlled: Vec<usize>,
    pub rule: ReportRule,
    pub verifier_lies: bool,
    /// Per label: (`H_d` parity to report, `ΣY_d` to report).
    #[serde(skip)]
    plan: HashMap<FamilyLabel, (u8, u8)>,
}

impl DishonestPolicy {
    pub fn family_adaptive(controlled: Vec<usize>, labels: &[FamilyLabel]) -> Result<Self> {
        let mut plan = HashMap::new();
        for label in labels {
            plan.insert(*label, family_plan(label)?);
        }
        Ok(Self { controlled, rule: ReportRule::FamilyAdaptive, verifier_lies: false, plan })
    }

    pub fn fixed(controlled: Vec<usize>, tables: Vec<ColluderTable>) -> Result<Self> {
        contract!(tables.len() == controlled.len(), "one table per colluder required");
        Ok(Self { controlled, rule: ReportRule::Fixed { tables }, verifier_lies: false, plan: HashMap::new() })
    }

    pub fn with_lying_verifier(mut self, lies: bool) -> Self {
        self.verifier_lies = lies;
        self
    }

    fn slot(&self, agent: usize) -> Option<usize> {
        self.controlled.iter().position(|&a| a == agent)
    }
}

/// Reporting plan that makes verification pass on a family honest part:
/// `H_d` parity is 0 for Φ states and 1 for Ψ states; `ΣY_d` equals the
/// honest parity statistic.
pub fn family_plan(label: &FamilyLabel) -> Result<(u8, u8)> {
    let state = label.state()?;
    let (parity, probe): (u8, Vec<usize>) = match label.kind {
        FamilyKind::Phi0 | FamilyKind::Phi1 => (0, vec![]),
        FamilyKind::Psi0 | FamilyKind::Psi1 => (1, vec![0]),
        other => return Err(Error::ContractViolation(format!("{other:?} is not an attackable family member"))),
    };
    let stat = family::deterministic_statistic(&state, &probe, DEFAULT_TOL)?
        .ok_or_else(|| Error::ContractViolation(format!("{label} parity statistic is not deterministic")))?;
    Ok((parity, stat))
}

impl Colluders for DishonestPolicy {
    fn controls(&self, agent: usize) -> bool {
        self.controlled.contains(&agent)
    }

    fn measurement_basis(&self, agent: usize, _side_info: &SideInfo) -> Basis {
        match (&self.rule, self.slot(agent)) {
            (ReportRule::Fixed { tables }, Some(i)) => tables[i].measure,
            _ => Basis::Computational,
        }
    }

    fn report(&self, agent: usize, side_info: &SideInfo, measured: Basis, own_outcome: u8) -> (Basis, u8) {
        let Some(slot) = self.slot(agent) else {
            return (measured, own_outcome);
        };
        match &self.rule {
            ReportRule::Fixed { tables } => tables[slot].apply(own_outcome),
            ReportRule::FamilyAdaptive => {
                let plan = side_info.label.and_then(|l| self.plan.get(&l).copied());
                match (plan, slot) {
                    (Some((1, bit)), 0) => (Basis::Hadamard, bit),
                    (Some((_, bit)), 0) => (Basis::Computational, bit),
                    _ => (Basis::Computational, 0),
                }
            }
        }
    }

    fn verifier_lies(&self) -> bool {
        self.verifier_lies
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "relation", rename_all = "snake_case")]
pub enum PassExpectation {
    Exactly { value: f64 },
    Below { value: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackScenario {
    pub name: String,
    pub n: usize,
    pub honest: Vec<usize>,
    pub source: SourceStrategy,
    /// `None` when every agent is honest.
    pub policy: Option<DishonestPolicy>,
    pub expected_pass: PassExpectation,
    pub expected_pass_provenance: Provenance,
    pub expected_leak: bool,
    pub leak_provenance: Provenance,
}

impl AttackScenario {
    pub fn colluders(&self) -> Option<&dyn Colluders> {
        self.policy.as_ref().map(|p| p as &dyn Colluders)
    }

    pub fn dishonest(&self) -> Vec<usize> {
        (0..self.n).filter(|a| !self.honest.contains(a)).collect()
    }
}

fn split(k: usize, n: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    contract!(k >= 1 && k < n, "need 1 ≤ k < n, got k = {k}, n = {n}");
    contract!(n <= qsim::MAX_QUBITS, "n = {n} too large");
    Ok(((0..k).collect(), (k..n).collect()))
}

/// The source hands the honest agents `members` (chosen at random each round
/// when there are several) and tells the colluders which one it sent.
pub fn family_attack(k: usize, n: usize, members: &[FamilyLabel]) -> Result<AttackScenario> {
    let (honest, dishonest) = split(k, n)?;
    contract!(!members.is_empty(), "no family members");
    for m in members {
        contract!(m.n == k, "member {m} does not fit {k} honest agents");
    }
    let policy = DishonestPolicy::family_adaptive(dishonest, members)?;
    let name =
        if members.len() == 1 { format!("family{}", members[0]) } else { format!("family-mix-{}", members.len()) };
    Ok(AttackScenario {
        name,
        n,
        source: SourceStrategy::AdaptiveMalicious {
            policy: MaliciousSource {
                honest: honest.clone(),
                members: members.iter().map(|&label| HonestState::Family { label }).collect(),
            },
        },
        honest,
        policy: Some(policy),
        expected_pass: PassExpectation::Exactly { value: 1.0 },
        expected_pass_provenance: Provenance::Derived,
        expected_leak: false,
        leak_provenance: Provenance::Derived,
    })
}

/// All eight signed family members on `k` honest qubits.
pub fn all_family_labels(k: usize) -> Vec<FamilyLabel> {
    let mut out = Vec::new();
    for kind in [FamilyKind::Phi0, FamilyKind::Phi1, FamilyKind::Psi0, FamilyKind::Psi1] {
        for sign in [1, -1] {
            out.push(FamilyLabel::new(kind, sign, k));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicySearch {
    pub best: Vec<ColluderTable>,
    pub best_pass: f64,
    pub evaluated: usize,
    pub space: u128,
    pub exhaustive: bool,
}

/// Largest number of joint tables enumerated before falling back to sampling.
const EXHAUSTIVE_LIMIT: u128 = 1 << 15;
const SAMPLED_POLICIES: usize = 4096;

/// Best fixed colluder policy against a single-member source. Exhaustive
/// when the joint table space is small (always for one colluder), otherwise
/// a seeded sample of `SAMPLED_POLICIES` joint tables.
pub fn search_fixed_policies(source: &SourceStrategy, n: usize, dishonest: &[usize]) -> Result<PolicySearch> {
    contract!(!dishonest.is_empty(), "no colluders to search over");
    let space = (ColluderTable::SPACE as u128).pow(dishonest.len() as u32);
    let exhaustive = space <= EXHAUSTIVE_LIMIT;
    let count = if exhaustive { space as usize } else { SAMPLED_POLICIES };
    let candidate = |i: u64| -> Vec<ColluderTable> {
        if exhaustive {
            let mut rest = i as usize;
            (0..dishonest.len())
                .map(|_| {
                    let t = ColluderTable::from_index(rest % ColluderTable::SPACE);
                    rest /= ColluderTable::SPACE;
                    t
                })
                .collect()
        } else {
            let mut rng = seed::rng_for(0x5eed, "policy-sample", i);
            (0..dishonest.len()).map(|_| ColluderTable::from_index(rng.random_range(0..ColluderTable::SPACE))).collect()
        }
    };
    let scores = par::map_indexed(count as u64, |i| {
        let tables = candidate(i);
        let policy = DishonestPolicy::fixed(dishonest.to_vec(), tables.clone())?;
        Ok((exact_pass_probability(source, n, Some(&policy))?, tables))
    })
    .into_iter()
    .collect::<Result<Vec<(Option<f64>, Vec<ColluderTable>)>>>()?;
    // first maximum in enumeration order, ignoring policies that never get a round accepted
    let (best_pass, best) = scores
        .into_iter()
        .filter_map(|(p, t)| p.map(|p| (p, t)))
        .fold((f64::NEG_INFINITY, Vec::new()), |acc, (p, t)| if p > acc.0 { (p, t) } else { acc });
    Ok(PolicySearch { best, best_pass, evaluated: count, space, exhaustive })
}

/// Negative control: a non-family honest part against the best fixed colluder policy.
pub fn naive_attack(k: usize, n: usize, honest_state: HonestState) -> Result<(AttackScenario, PolicySearch)> {
    let (honest, dishonest) = split(k, n)?;
    let name = match &honest_state {
        HonestState::W => "naive-w".to_string(),
        HonestState::Zero => "naive-zero".to_string(),
        HonestState::Family { label } => format!("naive-control{label}"),
    };
    let source = SourceStrategy::AdaptiveMalicious {
        policy: MaliciousSource { honest: honest.clone(), members: vec![honest_state.clone()] },
    };
    let search = search_fixed_policies(&source, n, &dishonest)?;
    let policy = DishonestPolicy::fixed(dishonest, search.best.clone())?;
    let is_family = matches!(honest_state, HonestState::Family { .. });
    Ok((
        AttackScenario {
            name,
            n,
            honest,
            source,
            policy: Some(policy),
            expected_pass: if is_family {
                PassExpectation::Exactly { value: 1.0 }
            } else {
                PassExpectation::Below { value: 1.0 }
            },
            expected_pass_provenance: if is_family { Provenance::Trivial } else { Provenance::Derived },
            // W and |0…0⟩ give honest outcomes far from uniform, so a flipped bit stands out
            expected_leak: !is_family,
            leak_provenance: Provenance::Derived,
        },
        search,
    ))
}

/// Source sends `|0…0⟩` to the honest agents and a truthful colluder reports
/// computational outcomes: outcomes are predictable, so a flipped bit points
/// at the voter.
pub fn planted_leak(k: usize, n: usize) -> Result<AttackScenario> {
    let (honest, dishonest) = split(k, n)?;
    let tables = vec![ColluderTable::truthful(); dishonest.len()];
    Ok(AttackScenario {
        name: "planted-leak".into(),
        n,
        source: SourceStrategy::AdaptiveMalicious {
            policy: MaliciousSource { honest: honest.clone(), members: vec![HonestState::Zero] },
        },
        honest,
        policy: Some(DishonestPolicy::fixed(dishonest, tables)?),
        expected_pass: PassExpectation::Below { value: 1.0 },
        expected_pass_provenance: Provenance::Derived,
        expected_leak: true,
        leak_provenance: Provenance::Derived,
    })
}

/// Every agent honest, ideal source.
pub fn ideal_scenario(n: usize) -> AttackScenario {
    AttackScenario {
        name: "ideal".into(),
        n,
        honest: (0..n).collect(),
        source: SourceStrategy::Ideal,
        policy: None,
        expected_pass: PassExpectation::Exactly { value: 1.0 },
        expected_pass_provenance: Provenance::Trivial,
        expected_leak: false,
        leak_provenance: Provenance::Derived,
    }
}

pub const CATALOG: &[&str] = &[
    "ideal",
    "family-phi0",
    "family-minus-phi0",
    "family-phi1",
    "family-minus-phi1",
    "family-psi0",
    "family-minus-psi0",
    "family-psi1",
    "family-minus-psi1",
    "family-mixed",
    "naive-w",
    "naive-zero",
    "planted-leak",
];

/// Scenario by catalog name, with three honest agents and one colluder
/// (four agents for `ideal`).
pub fn scenario_by_name(name: &str) -> Result<AttackScenario> {
    const K: usize = 3;
    const N: usize = 4;
    let family = |kind, sign| family_attack(K, N, &[FamilyLabel::new(kind, sign, K)]);
    let mut s = match name {
        "ideal" => ideal_scenario(N),
        "family-phi0" => family(FamilyKind::Phi0, 1)?,
        "family-minus-phi0" => family(FamilyKind::Phi0, -1)?,
        "family-phi1" => family(FamilyKind::Phi1, 1)?,
        "family-minus-phi1" => family(FamilyKind::Phi1, -1)?,
        "family-psi0" => family(FamilyKind::Psi0, 1)?,
        "family-minus-psi0" => family(FamilyKind::Psi0, -1)?,
        "family-psi1" => family(FamilyKind::Psi1, 1)?,
        "family-minus-psi1" => family(FamilyKind::Psi1, -1)?,
        "family-mixed" => family_attack(K, N, &all_family_labels(K))?,
        "naive-w" => naive_attack(K, N, HonestState::W)?.0,
        "naive-zero" => naive_attack(K, N, HonestState::Zero)?.0,
        "planted-leak" => planted_leak(K, N)?,
        other => return Err(Error::Config(format!("unknown scenario `{other}`; known: {}", CATALOG.join(", ")))),
    };
    s.name = name.to_string();
    Ok(s)
}

/// Exact probability that an accepted (non-discarded) round passes the
/// parity test, given honest agents choosing bases uniformly and colluders
/// following `policy`. Enumerates ensemble branches, honest basis
/// assignments and Born outcomes. `None` if no round is ever accepted.
pub fn exact_pass_probability(
    source: &SourceStrategy,
    n: usize,
    policy: Option<&DishonestPolicy>,
) -> Result<Option<f64>> {
    let branches = ensemble_branches(source, n)?
        .ok_or_else(|| Error::ContractViolation("source has no finite ensemble".into()))?;
    let dishonest: Vec<usize> = policy.map(|p| p.controlled.clone()).unwrap_or_default();
    let honest: Vec<usize> = (0..n).filter(|a| !dishonest.contains(a)).collect();
    let k = honest.len();
    let mut accepted = 0.0;
    let mut passed = 0.0;
    for (w, state, side_info) in &branches {
        for mask in 0..1usize << k {
            let mut bases = vec![Basis::Computational; n];
            for (i, &a) in honest.iter().enumerate() {
                if qsim::bit(mask, i, k) == 1 {
                    bases[a] = Basis::Hadamard;
                }
            }
            if let Some(p) = policy {
                for &a in &dishonest {
                    bases[a] = p.measurement_basis(a, side_info);
                }
            }
            let weight = w / (1usize << k) as f64;
            let probs = qsim::outcome_distribution(state, &bases)?;
            for (y, prob) in probs.into_iter().enumerate() {
                if prob <= 0.0 {
                    continue;
                }
                let mut reported_bases = bases.clone();
                let mut outcomes = qsim::bits_of(y, n);
                if let Some(p) = policy {
                    for &a in &dishonest {
                        let (b, bit) = p.report(a, side_info, bases[a], outcomes[a]);
                        reported_bases[a] = b;
                        outcomes[a] = bit & 1;
                    }
                }
                let h = protocol::hadamard_count(&reported_bases);
                if h % 2 == 1 {
                    continue;
                }
                accepted += weight * prob;
                if protocol::verify_round(h, &outcomes)? {
                    passed += weight * prob;
                }
            }
        }
    }
    Ok((accepted > 0.0).then(|| passed / accepted))
}

pub fn scenario_pass_probability(s: &AttackScenario) -> Result<Option<f64>> {
    exact_pass_probability(&s.source, s.n, s.policy.as_ref())
}

/// Accepted rounds always have `H_h` and `H_d` of equal parity.
pub fn discard_parity_holds(record: &protocol::RoundRecord, honest: &[usize]) -> bool {
    let h_h = honest.iter().filter(|&&a| record.bases[a].is_hadamard()).count();
    let h_d = record.hadamard_count() - h_h;
    match record.classification {
        protocol::Classification::Discarded => (h_h + h_d) % 2 == 1,
        _ => h_h % 2 == h_d % 2,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditOptions {
    pub trials: u64,
    pub bootstrap: usize,
    /// Leak flag threshold on the bias-corrected MI estimate (bits).
    pub mi_threshold: f64,
    /// Rejection level of the homogeneity test.
    pub alpha: f64,
    /// Run even when the source fails verification (negative controls).
    pub allow_failing_source: bool,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self { trials: 10_000, bootstrap: 200, mi_threshold: 0.01, alpha: 1e-3, allow_failing_source: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub scenario: String,
    pub trials: u64,
    /// Fraction of probed rounds whose reports pass the parity test before the voter's flip.
    pub empirical_pass_rate: f64,
    /// View labels, `S_p|bits` (with `#member` when the source mixes states).
    pub views: Vec<String>,
    /// Counts per honest voter identity (row) and view (column).
    pub counts: Vec<Vec<u64>>,
    pub chi_square: f64,
    pub df: usize,
    pub p_value: f64,
    pub mutual_information_bits: f64,
    pub mi_ci95: (f64, f64),
    /// Expected plug-in bias `(r−1)(c−1) / (2N ln 2)` under independence.
    pub mi_bias_estimate: f64,
    /// Plug-in MI minus the bias estimate, floored at 0.
    pub mi_bias_corrected: f64,
    /// Homogeneity rejected at `alpha`, or bias-corrected MI above the threshold.
    pub leak_flagged: bool,
}

/// One probed voting round per trial. The voter (an honest agent, round
/// robin over the honest set) votes F, i.e. flips its announced bit. The
/// adversary sees `S_p`, the announced honest bits and its side information;
/// the audit measures how much that view says about which honest agent voted.
pub fn anonymity_audit(scenario: &AttackScenario, master_seed: u64, opts: &AuditOptions) -> Result<AuditReport> {
    contract!(opts.trials > 0, "audit needs at least one trial");
    let n = scenario.n;
    let honest = &scenario.honest;
    let k = honest.len();
    contract!(k >= 1, "no honest agents");
    scenario.source.validate(n)?;
    let multi = matches!(&scenario.source, SourceStrategy::AdaptiveMalicious { policy } if policy.members.len() > 1);

    let trial = |t: u64| -> Result<(usize, (u8, usize, usize), bool)> {
        let ctx = RoundContext {
            n,
            strategy: &scenario.source,
            m: 1,
            master_seed: seed::derive_seed(master_seed, "audit-trial", t),
            colluders: scenario.colluders(),
        };
        for attempt in 0..10_000u64 {
            let (bases, outcomes, side_info, _, _) = protocol::measure_event(&ctx, attempt)?;
            let h = protocol::hadamard_count(&bases);
            if h % 2 == 1 {
                continue;
            }
            let passes = protocol::verify_round(h, &outcomes)?;
            let voter = (t % k as u64) as usize;
            let mut announced: Vec<u8> = honest.iter().map(|&a| outcomes[a]).collect();
            announced[voter] ^= 1;
            let s_p = ((h / 2) % 2) as u8;
            let member = side_info.member.unwrap_or(0);
            return Ok((voter, (s_p, qsim::index_of(&announced), member), passes));
        }
        Err(Error::ContractViolation("source never produced an accepted round".into()))
    };
    let results = par::map_indexed(opts.trials, trial).into_iter().collect::<Result<Vec<_>>>()?;

    let empirical_pass_rate = results.iter().filter(|r| r.2).count() as f64 / results.len() as f64;
    if empirical_pass_rate < 1.0 && !opts.allow_failing_source {
        return Err(Error::AuditRefused(format!(
            "scenario `{}` passes verification at rate {empirical_pass_rate:.4} < 1",
            scenario.name
        )));
    }

    let mut view_ids: Vec<(u8, usize, usize)> = results.iter().map(|r| r.1).collect();
    view_ids.sort_unstable();
    view_ids.dedup();
    let column = |v: &(u8, usize, usize)| view_ids.binary_search(v).expect("view present");
    let samples: Vec<(usize, usize)> = results.iter().map(|r| (r.0, column(&r.1))).collect();
    let table_of = |pairs: &mut dyn Iterator<Item = (usize, usize)>| {
        let mut table = vec![vec![0u64; view_ids.len()]; k];
        for (row, col) in pairs {
            table[row][col] += 1;
        }
        table
    };
    let counts = table_of(&mut samples.iter().copied());
    let chi = stats::chi_square_homogeneity(&counts);
    let mi = stats::mutual_information_bits(&counts);

    let boot: Vec<f64> = par::map_indexed(opts.bootstrap as u64, |b| {
        let mut rng = seed::rng_for(master_seed, "audit-bootstrap", b);
        let mut draws = (0..samples.len()).map(|_| samples[rng.random_range(0..samples.len())]);
        stats::mutual_information_bits(&table_of(&mut draws))
    });
    let mi_ci95 = percentile_interval(boot, 0.025, 0.975).unwrap_or((mi, mi));

    let views = view_ids
        .iter()
        .map(|(s, bits, member)| {
            let base = format!("{s}|{}", qsim::format_bits(&qsim::bits_of(*bits, k)));
            if multi {
                format!("{base}#{member}")
            } else {
                base
            }
        })
        .collect();
    let cols_used = view_ids.len();
    let mi_bias_estimate =
        ((k - 1) * cols_used.saturating_sub(1)) as f64 / (2.0 * opts.trials as f64 * std::f64::consts::LN_2);
    let mi_bias_corrected = (mi - mi_bias_estimate).max(0.0);
    Ok(AuditReport {
        scenario: scenario.name.clone(),
        trials: opts.trials,
        empirical_pass_rate,
        views,
        counts,
        chi_square: chi.statistic,
        df: chi.df,
        p_value: chi.p_value,
        mutual_information_bits: mi,
        mi_ci95,
        mi_bias_estimate,
        mi_bias_corrected,
        leak_flagged: chi.p_value < opts.alpha || mi_bias_corrected > opts.mi_threshold,
    })
}

fn percentile_interval(mut xs: Vec<f64>, lo: f64, hi: f64) -> Option<(f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let at = |q: f64| xs[((q * (xs.len() - 1) as f64).round() as usize).min(xs.len() - 1)];
    Some((at(lo), at(hi)))
}
