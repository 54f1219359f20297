use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::checks::{observed_pass_rate_reference, verification_rate_report, werner_context_report};
use super::config::{ExperimentConfig, Mode};
use super::report::{Provenance, Reference, ReportStatus, StatReport};
use crate::adversary::{self, AuditOptions, AuditReport, PassExpectation};
use crate::coincidence::{self, ChannelMap, PS_PER_S};
use crate::error::Result;
use crate::family::{self, SourceStrategy};
use crate::protocol::{
    self, decide_election, run_election, Classification, ElectionOutcome, ElectionStatus, RoundContext, RoundRecord,
};
use crate::{par, seed};

/// Events per chunk fed to the coincidence pipeline.
const PIPELINE_CHUNK: usize = 1 << 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantCheck {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

impl InvariantCheck {
    pub fn new(name: impl Into<String>, holds: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), holds, detail: detail.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceSummary {
    pub planted: usize,
    pub recovered_planted: usize,
    pub fourfolds: usize,
    pub accidental: usize,
    pub expected_accidental: f64,
    pub dark_counts: u64,
    pub stream_events: usize,
    pub veto_survivors: u64,
    pub peak_buffer: usize,
    pub duration_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub version: String,
    pub config: ExperimentConfig,
    pub outcome: Option<ElectionOutcome>,
    pub reports: Vec<StatReport>,
    pub audit: Option<AuditReport>,
    pub coincidence: Option<CoincidenceSummary>,
    pub invariants: Vec<InvariantCheck>,
    pub all_invariants_hold: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    pub summary: ExperimentSummary,
    pub transcript: Vec<RoundRecord>,
}

/// Runs the pipeline selected by `config.mode`. Every output is a function
/// of the config alone.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let mut reports = Vec::new();
    let mut invariants = Vec::new();
    let mut audit = None;
    let mut coincidence_summary = None;

    let (outcome, transcript) = match config.mode {
        Mode::Protocol => {
            let profiles = config.profiles(&[]);
            let run = run_election(&profiles, &config.source, &config.params, config.seed, None)?;
            honest_run_checks(config, &config.source, &run.transcript, &run.outcome, &mut reports, &mut invariants)?;
            (run.outcome, run.transcript)
        }
        Mode::CoincidencePipeline => {
            let (outcome, transcript, summary) = run_over_stream(config, &mut reports, &mut invariants)?;
            honest_run_checks(config, &config.source, &transcript, &outcome, &mut reports, &mut invariants)?;
            coincidence_summary = Some(summary);
            (outcome, transcript)
        }
        Mode::Attack => {
            let name = config.scenario.as_deref().unwrap_or_default();
            let scenario = adversary::scenario_by_name(name)?;
            let exact = adversary::scenario_pass_probability(&scenario)?;
            let expectation_holds = match (scenario.expected_pass, exact) {
                (PassExpectation::Exactly { value }, Some(p)) => (p - value).abs() < 1e-9,
                (PassExpectation::Below { value }, Some(p)) => p < value,
                (_, None) => false,
            };
            invariants.push(InvariantCheck::new(
                "exact-pass-probability-matches-expectation",
                expectation_holds,
                format!("exact {exact:?}, expected {:?}", scenario.expected_pass),
            ));
            let intents = vec![protocol::Intent::CandidateE; scenario.n];
            let profiles = protocol::assign_profiles(
                &intents,
                &scenario.dishonest(),
                seed::derive_seed(config.seed, "profiles", 0),
            );
            let run = run_election(&profiles, &scenario.source, &config.params, config.seed, scenario.colluders())?;
            let lies = scenario.policy.as_ref().is_some_and(|p| p.verifier_lies);
            let model = if lies { None } else { exact };
            reports.push(verification_rate_report(&run.transcript, model, &pass_rate_references(config)?));
            invariants.push(InvariantCheck::new(
                "accepted-rounds-have-matching-hadamard-parities",
                run.transcript.iter().all(|r| adversary::discard_parity_holds(r, &scenario.honest)),
                "H_h ≡ H_d (mod 2) on every non-discarded round",
            ));
            invariants.extend(transcript_invariants(&run.transcript, scenario.n));

            let below = matches!(scenario.expected_pass, PassExpectation::Below { .. });
            let opts = AuditOptions { trials: config.trials, allow_failing_source: below, ..AuditOptions::default() };
            let a = adversary::anonymity_audit(&scenario, seed::derive_seed(config.seed, "audit", 0), &opts)?;
            invariants.push(InvariantCheck::new(
                "leak-flag-matches-expectation",
                a.leak_flagged == scenario.expected_leak,
                format!("flagged {}, expected {}", a.leak_flagged, scenario.expected_leak),
            ));
            reports.push(audit_report(&a, scenario.expected_leak, scenario.leak_provenance));
            audit = Some(a);
            (run.outcome, run.transcript)
        }
    };

    for r in &reports {
        r.validate()?;
    }
    let all_invariants_hold = invariants.iter().all(|c| c.holds);
    Ok(ExperimentResult {
        summary: ExperimentSummary {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            outcome: Some(outcome),
            reports,
            audit,
            coincidence: coincidence_summary,
            invariants,
            all_invariants_hold,
        },
        transcript,
    })
}

fn pass_rate_references(config: &ExperimentConfig) -> Result<Vec<Reference>> {
    let configured = config.references_for("verification_pass_rate")?;
    Ok(if configured.is_empty() { vec![observed_pass_rate_reference()] } else { configured })
}

fn audit_report(a: &AuditReport, expected_leak: bool, provenance: Provenance) -> StatReport {
    let status = if a.leak_flagged == expected_leak { ReportStatus::Pass } else { ReportStatus::Fail };
    let mut r = StatReport::new("anonymity_mutual_information_bits", a.mutual_information_bits, status)
        .reference(Reference::new("expected leak (1 = yes)", f64::from(u8::from(expected_leak)), provenance))
        .note(format!(
            "chi-square {:.3} on {} df; bias estimate {:.5} bits; bias-corrected {:.5} bits",
            a.chi_square, a.df, a.mi_bias_estimate, a.mi_bias_corrected
        ));
    r.interval = Some(a.mi_ci95);
    r.statistic = Some(a.chi_square);
    r.p_value = Some(a.p_value);
    r
}

/// Bookkeeping that holds on every transcript regardless of the source.
pub fn transcript_invariants(transcript: &[RoundRecord], n: usize) -> Vec<InvariantCheck> {
    let discard = transcript
        .iter()
        .all(|r| matches!(r.classification, Classification::Discarded) == (r.hadamard_count() % 2 == 1));
    let s_p = transcript.iter().all(|r| match r.classification {
        Classification::Voting { s_p } => usize::from(s_p) == (r.hadamard_count() / 2) % 2,
        _ => true,
    });
    let shape = transcript
        .iter()
        .all(|r| r.bases.len() == n && r.outcomes.len() == n && r.verifier < n && r.outcomes.iter().all(|&y| y <= 1));
    vec![
        InvariantCheck::new("discarded-iff-odd-hadamard-count", discard, "Discarded ⇔ H_p odd"),
        InvariantCheck::new("voting-correction-bit", s_p, "S_p = ½H_p mod 2 on voting rounds"),
        InvariantCheck::new("transcript-shape", shape, format!("{n} agents per record")),
    ]
}

/// Checks on a run where every agent (and the Verifier) is honest.
fn honest_run_checks(
    config: &ExperimentConfig,
    source: &SourceStrategy,
    transcript: &[RoundRecord],
    outcome: &ElectionOutcome,
    reports: &mut Vec<StatReport>,
    invariants: &mut Vec<InvariantCheck>,
) -> Result<()> {
    let n = config.agents;
    invariants.extend(transcript_invariants(transcript, n));
    let pass_consistent = transcript.iter().all(|r| match r.classification {
        Classification::Verifying { pass } => {
            protocol::verify_round(r.hadamard_count(), &r.outcomes).ok() == Some(pass)
        }
        _ => true,
    });
    invariants.push(InvariantCheck::new(
        "honest-verifier-announces-parity-test",
        pass_consistent,
        "pass = (½H_p ≡ ΣY mod 2) on every verifying round",
    ));

    let model = match family::ensemble_branches(source, n)? {
        Some(branches) => Some(protocol::exact_honest_pass_probability(&branches)?),
        None => None,
    };
    let rate = verification_rate_report(transcript, model, &pass_rate_references(config)?);
    let simulated_failure = rate.estimate.map(|p| 1.0 - p);
    reports.push(rate);

    if let SourceStrategy::WernerEnsemble { .. } = source {
        let fidelity = family::ensemble_fidelity(source, n, &family::make_phi0(n)?)?.value;
        let model_failure = 1.0 - model.unwrap_or(1.0);
        reports.push(werner_context_report(fidelity, model_failure, simulated_failure));
    }

    if matches!(source, SourceStrategy::Ideal) {
        invariants.push(InvariantCheck::new(
            "ideal-source-always-passes",
            outcome.passed_rounds == outcome.verifying_rounds,
            format!("{} of {} verifying rounds passed", outcome.passed_rounds, outcome.verifying_rounds),
        ));
        let intents = config.intents();
        let recorded_ok = outcome.status == ElectionStatus::Completed
            && outcome.recorded.iter().zip(&intents).all(|(r, i)| *r == Some(*i))
            && !outcome.any_failure;
        invariants.push(InvariantCheck::new(
            "ideal-votes-recorded-as-cast",
            recorded_ok,
            format!("status {:?}, E {} F {}", outcome.status, outcome.votes_e, outcome.votes_f),
        ));
    }
    Ok(())
}

/// Protocol events are planted as fourfolds in a synthetic stream, then
/// recovered by veto and fourfold search and handed to the Verifier in
/// recovery order.
fn run_over_stream(
    config: &ExperimentConfig,
    reports: &mut Vec<StatReport>,
    invariants: &mut Vec<InvariantCheck>,
) -> Result<(ElectionOutcome, Vec<RoundRecord>, CoincidenceSummary)> {
    let n = config.agents;
    let ctx =
        RoundContext { n, strategy: &config.source, m: config.params.m, master_seed: config.seed, colluders: None };
    let detections = par::map_indexed(config.params.rounds, |event| {
        let (bases, outcomes, ..) = protocol::measure_event(&ctx, event)?;
        let mut d = [(protocol::Basis::Computational, 0u8); coincidence::AGENTS];
        for (a, slot) in d.iter_mut().enumerate() {
            *slot = (bases[a], outcomes[a]);
        }
        Ok(d)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut stream_cfg = config.stream.clone();
    let spacing = (stream_cfg.pulse_rate_hz / stream_cfg.fourfold_rate_hz).round().max(1.0) as u64;
    let planted = coincidence::plant_sequence(&detections, spacing);
    stream_cfg.duration_s =
        (config.params.rounds + 1) as f64 * spacing as f64 * stream_cfg.pulse_period_ps() / PS_PER_S;
    let map = ChannelMap::agent_major();
    let generated =
        coincidence::generate_stream(&stream_cfg, &map, &planted, seed::derive_seed(config.seed, "stream", 0))?;

    let mut pipeline = coincidence::CoincidencePipeline::new(stream_cfg.window_ps, &map);
    let mut found = Vec::new();
    for chunk in generated.events.chunks(PIPELINE_CHUNK) {
        pipeline.push_chunk(chunk, &mut found)?;
    }
    pipeline.finish(&mut found);

    let truth: HashSet<_> = generated.truth.iter().map(|f| f.hits).collect();
    let recovered_planted = found.iter().filter(|f| truth.contains(&f.hits)).count();
    let accidental = found.len() - recovered_planted;
    let per_agent_hz = 4.0 * stream_cfg.dark_rate_hz;
    let expected_accidental =
        coincidence::accidental_rate(per_agent_hz, stream_cfg.window_ps as f64 / PS_PER_S, coincidence::AGENTS)
            * stream_cfg.duration_s;

    let transcript = par::map_indexed(found.len() as u64, |i| {
        let f = &found[i as usize];
        let (bases, outcomes): (Vec<_>, Vec<_>) = f.detections(&map).into_iter().unzip();
        protocol::adjudicate_event(&ctx, i, bases, outcomes)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let profiles = config.profiles(&[]);
    let (outcome, _) = decide_election(&profiles, &transcript, config.params.tau)?;

    let recall = recovered_planted as f64 / planted.len().max(1) as f64;
    reports.push(
        StatReport::new("planted_fourfold_recall", recall, ReportStatus::Info)
            .note(format!("{recovered_planted} of {} planted fourfolds recovered", planted.len())),
    );
    let mut acc = StatReport::new("accidental_fourfolds", accidental as f64, ReportStatus::Info).reference(
        Reference::new("expected accidentals after the veto", expected_accidental, Provenance::Derived)
            .with_note("4R(RW)³e^{−8RW} per second, R = per-agent dark rate"),
    );
    acc.std_error = Some(expected_accidental.sqrt());
    reports.push(acc);

    if stream_cfg.dark_rate_hz == 0.0 {
        invariants.push(InvariantCheck::new(
            "lossless-planting-recovers-every-event",
            recovered_planted == planted.len() && accidental == 0,
            format!("{recovered_planted} of {} recovered, {accidental} extra", planted.len()),
        ));
        let pure = run_election(&profiles, &config.source, &config.params, config.seed, None)?;
        invariants.push(InvariantCheck::new(
            "stream-mode-matches-pure-protocol",
            pure.transcript == transcript && pure.outcome == outcome,
            "identical transcripts and outcomes under the same seed",
        ));
    }

    let summary = CoincidenceSummary {
        planted: planted.len(),
        recovered_planted,
        fourfolds: found.len(),
        accidental,
        expected_accidental,
        dark_counts: generated.dark_counts,
        stream_events: generated.events.len(),
        veto_survivors: pipeline.survivors(),
        peak_buffer: pipeline.peak_buffer(),
        duration_s: stream_cfg.duration_s,
    };
    Ok((outcome, transcript, summary))
}

/// Writes the JSON-lines transcript and pretty JSON summary to the paths in
/// the config (when set).
pub fn write_outputs(result: &ExperimentResult) -> Result<()> {
    let out = &result.summary.config.output;
    if let Some(path) = &out.transcript {
        create_parent(path)?;
        protocol::write_transcript(&result.transcript, BufWriter::new(fs::File::create(path)?))?;
    }
    if let Some(path) = &out.summary {
        create_parent(path)?;
        fs::write(path, summary_json(&result.summary)?)?;
    }
    Ok(())
}

pub fn summary_json(summary: &ExperimentSummary) -> Result<String> {
    let mut s = serde_json::to_string_pretty(summary)?;
    s.push('\n');
    Ok(s)
}

fn create_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(())
}

/// Plain-text rendering of a summary.
pub fn render_summary(s: &ExperimentSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "ghz-vote {} | mode {:?} | seed {}", s.version, s.config.mode, s.config.seed);
    if let Some(o) = &s.outcome {
        let _ = writeln!(
            out,
            "election: {:?} | E {} F {} | rounds: {} voting, {} verifying ({} passed), {} discarded",
            o.status, o.votes_e, o.votes_f, o.voting_rounds, o.verifying_rounds, o.passed_rounds, o.discarded_rounds
        );
    }
    for r in &s.reports {
        let est = r.estimate.map_or("n/a".to_string(), |e| format!("{e:.6}"));
        let _ = write!(out, "[{:?}] {} = {est}", r.status, r.metric);
        if let Some((lo, hi)) = r.interval {
            let _ = write!(out, " [{lo:.6}, {hi:.6}]");
        }
        if let Some(p) = r.p_value {
            let _ = write!(out, " p = {p:.4}");
        }
        out.push('\n');
        for reference in &r.references {
            let _ = write!(out, "    ref {:?}: {} = {:.6}", reference.provenance, reference.label, reference.value);
            if let Some(n) = &reference.note {
                let _ = write!(out, " ({n})");
            }
            out.push('\n');
        }
        for note in &r.notes {
            let _ = writeln!(out, "    note: {note}");
        }
    }
    if let Some(c) = &s.coincidence {
        let _ = writeln!(
            out,
            "stream: {} events over {:.1} s, {} dark, {} fourfolds ({} planted recovered of {}, {} accidental; {:.3} expected)",
            c.stream_events,
            c.duration_s,
            c.dark_counts,
            c.fourfolds,
            c.recovered_planted,
            c.planted,
            c.accidental,
            c.expected_accidental
        );
    }
    for c in &s.invariants {
        let _ = writeln!(out, "{} {} ({})", if c.holds { "ok  " } else { "FAIL" }, c.name, c.detail);
    }
    let _ = writeln!(out, "all invariants hold: {}", s.all_invariants_hold);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_ideal_run_is_green() {
        let mut cfg = ExperimentConfig::new(11);
        cfg.params.rounds = 2_000;
        cfg.params.m = 3;
        let r = run_experiment(&cfg).unwrap();
        assert!(r.summary.all_invariants_hold, "{}", render_summary(&r.summary));
        let text = summary_json(&r.summary).unwrap();
        let back: ExperimentSummary = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r.summary);
    }

    #[test]
    fn stream_mode_without_darks_matches_pure_mode() {
        let mut cfg = ExperimentConfig::new(5);
        cfg.mode = Mode::CoincidencePipeline;
        cfg.params.rounds = 300;
        cfg.params.m = 2;
        cfg.stream.dark_rate_hz = 0.0;
        let r = run_experiment(&cfg).unwrap();
        assert!(r.summary.all_invariants_hold, "{}", render_summary(&r.summary));
    }
}
