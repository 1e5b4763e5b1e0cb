//! Scenario configuration, built-in presets, and file output.
//!
//! A scenario is a parameter set plus one of a few kinds of computation
//! (eigenvalue sweep, transmission traces, EP search, splitting fit, or
//! time-domain cross-check). [`run_scenario`] writes CSV tables and a JSON
//! summary into an output directory.

mod config;
mod output;
mod presets;
mod run;

use std::path::PathBuf;

use thiserror::Error;

use crate::dynamics::DynamicsError;
use crate::hamiltonian::ParamError;
use crate::spectrum::SpectrumError;
use crate::transmission::TransmissionError;

pub use config::{load_config, GridSpec, LadderSpec, ParamOverrides, ScenarioConfig, ScenarioKind, SweepSpec};
pub use output::{format_float, trajectory_csv, write_trace_csv, write_trajectory_csv};
pub use presets::{preset, preset_catalog, Preset};
pub use run::{run_scenario, sweep_table, RunSummary};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid config: {field} {reason}")]
    Invalid { field: String, reason: String },
    #[error("unknown scenario {0:?} (see list-presets)")]
    UnknownPreset(String),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("scenario {scenario}: {source}")]
    Spectrum {
        scenario: String,
        #[source]
        source: SpectrumError,
    },
    #[error("scenario {scenario}: {source}")]
    Transmission {
        scenario: String,
        #[source]
        source: TransmissionError,
    },
    #[error("scenario {scenario}: {source}")]
    Dynamics {
        scenario: String,
        #[source]
        source: DynamicsError,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl ExperimentError {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ExperimentError::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for problems with the input rather than with the computation.
    pub fn is_validation(&self) -> bool {
        match self {
            ExperimentError::Parse { .. }
            | ExperimentError::Invalid { .. }
            | ExperimentError::UnknownPreset(_)
            | ExperimentError::Param(_) => true,
            ExperimentError::Spectrum { source, .. } => matches!(source, SpectrumError::Param(_)),
            ExperimentError::Transmission { source, .. } => matches!(source, TransmissionError::Param(_)),
            ExperimentError::Dynamics { source, .. } => matches!(
                source,
                DynamicsError::Param(_) | DynamicsError::BadSpan | DynamicsError::StepTooLarge { .. }
            ),
            ExperimentError::Io { .. } => false,
        }
    }

    /// Process exit code: 1 for invalid input, 2 for numerical or I/O failure.
    pub fn exit_code(&self) -> i32 {
        if self.is_validation() {
            1
        } else {
            2
        }
    }
}
