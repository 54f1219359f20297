use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Where a reference value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Provenance {
    /// Reported in the published experiment.
    Paper,
    /// Follows by inspection.
    Trivial,
    /// Computed by an independent oracle (enumeration, closed form).
    Derived,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub label: String,
    pub value: f64,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Reference {
    pub fn new(label: impl Into<String>, value: f64, provenance: Provenance) -> Self {
        Self { label: label.into(), value, provenance, note: None }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Reference as it appears in a user config, before the provenance check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawReference {
    pub metric: String,
    pub label: String,
    pub value: f64,
    pub provenance: Option<Provenance>,
    #[serde(default)]
    pub note: Option<String>,
}

impl RawReference {
    pub fn into_reference(self) -> Result<(String, Reference)> {
        let provenance = self.provenance.ok_or_else(|| {
            Error::Config(format!("reference `{}` on `{}` has no provenance tag", self.label, self.metric))
        })?;
        Ok((self.metric, Reference { label: self.label, value: self.value, provenance, note: self.note }))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportStatus {
    Pass,
    Fail,
    InsufficientData,
    Info,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatReport {
    pub metric: String,
    /// `None` when there is nothing to estimate from.
    pub estimate: Option<f64>,
    pub std_error: Option<f64>,
    pub interval: Option<(f64, f64)>,
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub status: ReportStatus,
    pub references: Vec<Reference>,
    pub notes: Vec<String>,
}

impl StatReport {
    pub fn new(metric: impl Into<String>, estimate: f64, status: ReportStatus) -> Self {
        Self {
            metric: metric.into(),
            estimate: (!estimate.is_nan()).then_some(estimate),
            std_error: None,
            interval: None,
            statistic: None,
            p_value: None,
            status,
            references: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn reference(mut self, r: Reference) -> Self {
        self.references.push(r);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(p) = self.p_value {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{}: p-value {p} outside [0, 1]", self.metric)));
            }
        }
        Ok(())
    }
}
