//! Scenario runner, process-spec file ingestion and report emission.
//!
//! Exit codes: 0 pass, 1 negative classification, 2 scenario assertion
//! failure, 3 undetermined, 64 usage error, 65 data error.

mod report;
mod scenario;
mod specfile;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::catalysis::{classify, Classification, NotCatalysisReason};
use crate::numerics::DEFAULT_TOLERANCE;
use crate::process::ProcessError;

pub use report::{emit_report, format_float, Assertion, ReportDocument, SCHEMA_VERSION};
pub use scenario::{run_scenario, SCENARIOS};
pub use specfile::{parse_spec_file, write_spec_file, SpecFileError};

pub const EXIT_PASS: u8 = 0;
pub const EXIT_NEGATIVE: u8 = 1;
pub const EXIT_ASSERTION_FAILED: u8 = 2;
pub const EXIT_UNDETERMINED: u8 = 3;
pub const EXIT_USAGE: u8 = 64;
pub const EXIT_DATA: u8 = 65;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

impl Format {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Json => "json",
            Self::Text => "text",
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Self::Json),
            "text" => Ok(Self::Text),
            other => Err(CliError::InvalidConfig(format!(
                "unknown format '{other}' (expected json or text)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub tolerance: f64,
    pub format: Format,
    pub seed: u64,
    pub steps: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            format: Format::Json,
            seed: 0,
            steps: 64,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(CliError::InvalidConfig(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.steps < 2 {
            return Err(CliError::InvalidConfig(format!(
                "steps must be at least 2, got {}",
                self.steps
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown scenario '{0}' (expected one of: {list})", list = SCENARIOS.join(", "))]
    UnknownScenario(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    SpecFile(#[from] SpecFileError),
    #[error(transparent)]
    Process(#[from] ProcessError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::UnknownScenario(_) | Self::InvalidConfig(_) => EXIT_USAGE,
            Self::Io { .. } | Self::SpecFile(_) | Self::Process(_) => EXIT_DATA,
        }
    }
}

/// Exit code for a classification of a spec read from a file.
pub fn classification_exit_code(classification: &Classification) -> u8 {
    match classification {
        Classification::QuantumCatalysis(_) | Classification::NoEntanglingWitnessFound => EXIT_PASS,
        Classification::NotCatalysis(NotCatalysisReason::Undetermined { .. }) => EXIT_UNDETERMINED,
        Classification::NotCatalysis(_) => EXIT_NEGATIVE,
    }
}

/// Reads, validates and classifies a process-spec file.
pub fn check_spec_file(path: &Path, config: &RunConfig) -> Result<ReportDocument, CliError> {
    config.validate()?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let spec = parse_spec_file(&text, config.tolerance)?;
    let report = classify(&spec, config.tolerance)?;
    let mut doc = ReportDocument::new("check", config);
    doc.insert("spec_file", path.display().to_string());
    scenario::record_analysis(&mut doc, &spec, &report, config.tolerance)?;
    doc.exit_code = classification_exit_code(&report.classification);
    Ok(doc)
}
