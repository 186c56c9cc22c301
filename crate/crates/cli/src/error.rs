use std::path::PathBuf;

use csc_core::solver::{ContinuationFailure, SolveFailure, SolveReport};
use serde::Serialize;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const USAGE: u8 = 2;
    pub const NO_CONVERGENCE: u8 = 3;
    pub const INVARIANT: u8 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed JSON: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Core(#[from] csc_core::Error),

    #[error("solve failed: {0}")]
    Solve(Box<SolveFailure>),

    #[error("{0}")]
    Continuation(Box<ContinuationFailure>),

    #[error("{failed} of {total} checks failed")]
    ChecksFailed { failed: usize, total: usize },
}

impl From<SolveFailure> for CliError {
    fn from(f: SolveFailure) -> Self {
        CliError::Solve(Box::new(f))
    }
}

impl From<ContinuationFailure> for CliError {
    fn from(f: ContinuationFailure) -> Self {
        CliError::Continuation(Box::new(f))
    }
}

fn core_code(e: &csc_core::Error) -> u8 {
    use csc_core::Error::*;
    match e {
        NonConvergence(_) | BranchDeparture(_) | Numerical(_) => exit::NO_CONVERGENCE,
        _ => exit::INVARIANT,
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } | CliError::Json { .. } => exit::USAGE,
            CliError::Csv(_) => exit::USAGE,
            CliError::Core(e) => core_code(e),
            CliError::Solve(f) => core_code(&f.error),
            CliError::Continuation(f) => core_code(&f.error),
            CliError::ChecksFailed { .. } => exit::INVARIANT,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Json { .. } => "json",
            CliError::Csv(_) => "csv",
            CliError::Core(_) => "invalid-input",
            CliError::Solve(_) => "solve",
            CliError::Continuation(_) => "continuation",
            CliError::ChecksFailed { .. } => "checks-failed",
        }
    }

    /// The machine-readable error document written by the binary.
    pub fn payload(&self) -> ErrorPayload {
        let (report, failed_step) = match self {
            CliError::Solve(f) => (Some(f.report.clone()), None),
            CliError::Continuation(f) => (Some(f.report.clone()), Some(f.index)),
            _ => (None, None),
        };
        ErrorPayload {
            error: self.kind(),
            message: self.to_string(),
            exit_code: self.exit_code(),
            failed_step,
            report,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ErrorPayload {
    pub error: &'static str,
    pub message: String,
    pub exit_code: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failed_step: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<SolveReport>,
}

pub type Result<T> = std::result::Result<T, CliError>;
