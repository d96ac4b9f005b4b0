//! Command-line front end: reads scenario files, writes routing tables,
//! run reports and sweep CSVs. All randomness stays in the simulator.

use std::path::{Path, PathBuf};

use thiserror::Error;
use wsn_qos::{QosError, SimError};

pub mod commands;
pub mod output;
pub mod scenario;

pub use commands::{cmd_loadcheck, cmd_run, cmd_sweep, parse_axis_values};
pub use scenario::ScenarioFile;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot parse scenario: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("infeasible parameters: {0}")]
    InvalidParams(String),
    #[error("solver inconsistency: {0}")]
    Inconsistent(String),
}

impl CliError {
    /// 1 parse or I/O, 2 infeasible parameters, 3 solver failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Io(_) => 1,
            CliError::InvalidParams(_) => 2,
            CliError::Inconsistent(_) => 3,
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match &e {
            SimError::InvalidParams(_) | SimError::Net(_) => CliError::InvalidParams(e.to_string()),
            SimError::Qos(q) => q.clone().into(),
        }
    }
}

impl From<QosError> for CliError {
    fn from(e: QosError) -> Self {
        match e {
            QosError::Net(_)
            | QosError::InvalidRequest(_)
            | QosError::LedgerSize { .. }
            | QosError::InvalidThreshold(_)
            | QosError::Disconnected => CliError::InvalidParams(e.to_string()),
            QosError::Model(_) | QosError::ResourceLimit | QosError::Inconsistent(_) => {
                CliError::Inconsistent(e.to_string())
            }
        }
    }
}

pub(crate) fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    Ok(dir.to_path_buf())
}
