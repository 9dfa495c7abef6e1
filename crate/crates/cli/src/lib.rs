//! Library half of the `surfclust` binary: error taxonomy, file formats,
//! and the subcommand implementations. The binary in `main.rs` is a thin
//! argument-parsing shell over [`commands`].

pub mod commands;
pub mod io;

use thiserror::Error;

use surfclust_core::evalmetrics::MetricError;
use surfclust_core::matkmeans::ClusterError;
use surfclust_core::simlab::SimError;
use surfclust_core::splines::SplineError;
use surfclust_core::tensorfit::FitError;

/// Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Data(String),

    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl From<FitError> for CliError {
    fn from(err: FitError) -> Self {
        match err {
            FitError::RankDeficient(_) => CliError::Numerical(err.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<ClusterError> for CliError {
    fn from(err: ClusterError) -> Self {
        CliError::Data(err.to_string())
    }
}

impl From<SplineError> for CliError {
    fn from(err: SplineError) -> Self {
        CliError::Data(err.to_string())
    }
}

impl From<MetricError> for CliError {
    fn from(err: MetricError) -> Self {
        CliError::Data(err.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(err: SimError) -> Self {
        match err {
            SimError::InvalidConfig(_) | SimError::InvalidSizes(_) => {
                CliError::Usage(err.to_string())
            }
            SimError::Fit(fit) => CliError::from(fit),
            SimError::GridMismatch(_) => CliError::Data(err.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}
