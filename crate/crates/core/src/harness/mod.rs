//! Experiment configuration, runner, statistical reports and the property suite.

pub mod checks;
pub mod config;
pub mod experiment;
pub mod properties;
pub mod report;
pub mod stats;

pub use checks::{uniformity_test, verification_rate_report, werner_context_report};
pub use config::{ExperimentConfig, Mode, OutputPaths};
pub use experiment::{run_experiment, write_outputs, ExperimentResult, ExperimentSummary, InvariantCheck};
pub use report::{Provenance, Reference, ReportStatus, StatReport};
