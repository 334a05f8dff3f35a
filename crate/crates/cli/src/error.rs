use std::path::PathBuf;

use thiserror::Error;
use tosyn_core::constraints::ConstraintError;
use tosyn_core::ltl::LtlError;
use tosyn_core::model::ModelError;
use tosyn_core::monitor::MonitorError;
use tosyn_core::oracle::OracleError;
use tosyn_core::pipeline::PipelineError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Ltl(#[from] LtlError),
    #[error(transparent)]
    Monitor(#[from] MonitorError),
    #[error(transparent)]
    Constraints(#[from] ConstraintError),
    #[error("{0}")]
    Solver(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Ltl(e) => CliError::Ltl(e),
            PipelineError::Monitor(e) => CliError::Monitor(e),
            PipelineError::Constraints(e) => CliError::Constraints(e),
            PipelineError::Oracle(e) => CliError::Oracle(e),
        }
    }
}

impl CliError {
    /// The module an error comes from.
    pub fn module(&self) -> &'static str {
        match self {
            CliError::Io { .. } | CliError::Usage(_) | CliError::Config(_) => "cli",
            CliError::Model(_) => "model",
            CliError::Ltl(_) => "ltl",
            CliError::Monitor(_) => "monitor",
            CliError::Constraints(_) => "constraints",
            CliError::Solver(_) => "efsmt",
            CliError::Oracle(OracleError::Model(_)) => "model",
            CliError::Oracle(OracleError::Monitor(_)) => "monitor",
            CliError::Oracle(_) => "oracle",
        }
    }
}

pub fn read(path: &std::path::Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write(path: &std::path::Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}
