//! Experiment configuration, read from TOML.
//!
//! ```toml
//! mode = "protocol"            # protocol | coincidence-pipeline | attack
//! agents = 4
//! intents = ["E", "F", "E", "E"]
//! seed = 42
//! trials = 10000               # anonymity-audit trials (attack mode)
//! scenario = "family-phi0"     # attack mode only
//!
//! [source]
//! kind = "WernerEnsemble"      # Ideal | WernerEnsemble | DephasingEnsemble | FixedFamily
//! p = 0.882667
//!
//! [params]
//! m = 7
//! tau = 0.05
//! rounds = 10000
//!
//! [output]
//! transcript = "out/transcript.jsonl"
//! summary = "out/summary.json"
//!
//! [[references]]
//! metric = "verification_pass_rate"
//! label = "observed in the photonic experiment"
//! value = 0.87
//! provenance = "PAPER"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::report::{RawReference, Reference};
use crate::coincidence::StreamConfig;
use crate::error::{contract, Error, Result};
use crate::family::SourceStrategy;
use crate::protocol::{assign_profiles, AgentProfile, Intent, SecurityParams};
use crate::seed;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Protocol,
    /// Protocol events planted into a synthetic timestamp stream and
    /// recovered through the veto and fourfold stages.
    CoincidencePipeline,
    Attack,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub transcript: Option<PathBuf>,
    pub summary: Option<PathBuf>,
}

fn default_agents() -> usize {
    4
}

fn default_trials() -> u64 {
    10_000
}

fn default_source() -> SourceStrategy {
    SourceStrategy::Ideal
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub mode: Mode,
    #[serde(default = "default_agents")]
    pub agents: usize,
    /// Empty means every agent votes E.
    #[serde(default)]
    pub intents: Vec<Intent>,
    #[serde(default = "default_source")]
    pub source: SourceStrategy,
    #[serde(default)]
    pub params: SecurityParams,
    #[serde(default)]
    pub scenario: Option<String>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    pub seed: u64,
    #[serde(default)]
    pub output: OutputPaths,
    /// Coincidence-pipeline mode. Planted fourfolds are spaced at
    /// `1 / fourfold_rate_hz`; the stream lasts as long as the rounds need.
    #[serde(default)]
    pub stream: StreamConfig,
    #[serde(default)]
    pub references: Vec<RawReference>,
}

impl ExperimentConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            mode: Mode::Protocol,
            agents: default_agents(),
            intents: Vec::new(),
            source: default_source(),
            params: SecurityParams::default(),
            scenario: None,
            trials: default_trials(),
            seed,
            output: OutputPaths::default(),
            stream: StreamConfig::default(),
            references: Vec::new(),
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        contract!(self.agents >= 3, "need at least 3 agents, got {}", self.agents);
        contract!(
            self.intents.is_empty() || self.intents.len() == self.agents,
            "{} intents for {} agents",
            self.intents.len(),
            self.agents
        );
        self.params.validate()?;
        self.source.validate(self.agents)?;
        match self.mode {
            Mode::Attack => contract!(self.scenario.is_some(), "attack mode needs a scenario name"),
            Mode::CoincidencePipeline => {
                contract!(self.agents == crate::coincidence::AGENTS, "the coincidence pipeline has 4 agents");
                self.stream.validate()?;
                contract!(self.stream.fourfold_rate_hz > 0.0, "fourfold rate must be positive");
            }
            Mode::Protocol => {}
        }
        for r in &self.references {
            r.clone().into_reference()?;
        }
        Ok(())
    }

    pub fn intents(&self) -> Vec<Intent> {
        if self.intents.is_empty() {
            vec![Intent::CandidateE; self.agents]
        } else {
            self.intents.clone()
        }
    }

    pub fn profiles(&self, dishonest: &[usize]) -> Vec<AgentProfile> {
        assign_profiles(&self.intents(), dishonest, seed::derive_seed(self.seed, "profiles", 0))
    }

    /// Configured references attached to `metric`.
    pub fn references_for(&self, metric: &str) -> Result<Vec<Reference>> {
        let mut out = Vec::new();
        for r in &self.references {
            let (m, reference) = r.clone().into_reference()?;
            if m == metric {
                out.push(reference);
            }
        }
        Ok(out)
    }
}
