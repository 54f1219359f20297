use ghz_vote::family::{werner_p_for_fidelity, SourceStrategy};
use ghz_vote::harness::checks::{observed_pass_rate_reference, OBSERVED_PASS_RATE};
use ghz_vote::harness::{run_experiment, ExperimentConfig, Provenance, ReportStatus, StatReport};

fn report<'a>(reports: &'a [StatReport], metric: &str) -> &'a StatReport {
    reports.iter().find(|r| r.metric == metric).unwrap_or_else(|| panic!("no `{metric}` report"))
}

#[test]
fn ideal_ten_thousand_rounds_is_green() {
    let mut cfg = ExperimentConfig::new(10);
    cfg.params.rounds = 10_000;
    let s = run_experiment(&cfg).unwrap().summary;
    assert!(s.all_invariants_hold, "{:?}", s.invariants);
    let v = report(&s.reports, "verification_pass_rate");
    assert_eq!(v.status, ReportStatus::Pass);
    assert_eq!(v.estimate, Some(1.0));
}

#[test]
fn werner_source_reports_model_next_to_published_figures() {
    // white noise over 16 basis states: F = p + (1 − p)/16
    let p = (0.89 - 1.0 / 16.0) / (15.0 / 16.0);
    assert!((werner_p_for_fidelity(0.89, 4) - p).abs() < 1e-12);
    let model_failure = (1.0 - p) / 2.0;
    assert!((model_failure - 0.058_667).abs() < 1e-6);

    let mut cfg = ExperimentConfig::new(11);
    cfg.source = SourceStrategy::WernerEnsemble { p };
    cfg.params.tau = 0.15;
    cfg.params.rounds = 20_000;
    let s = run_experiment(&cfg).unwrap().summary;
    assert!(s.all_invariants_hold, "{:?}", s.invariants);

    let v = report(&s.reports, "verification_pass_rate");
    assert_eq!(v.status, ReportStatus::Pass, "{v:?}");
    let published = v.references.iter().find(|r| r.provenance == Provenance::Paper).unwrap();
    assert_eq!(published.value, observed_pass_rate_reference().value);
    assert!(published.note.as_deref().unwrap().contains("outside the simulated interval"));

    let w = report(&s.reports, "werner_failure_attribution");
    assert!((w.estimate.unwrap() - model_failure).abs() < 1e-9);
    let losses = w.references.iter().find(|r| r.label == "implementation losses").unwrap();
    assert!((losses.value - (1.0 - OBSERVED_PASS_RATE - model_failure)).abs() < 1e-9);
    assert_eq!(losses.provenance, Provenance::Derived);
    let fidelity = w.references.iter().find(|r| r.label.starts_with("ensemble fidelity")).unwrap();
    assert!((fidelity.value - 0.89).abs() < 1e-9);
}
