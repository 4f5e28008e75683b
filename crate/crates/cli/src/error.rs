use std::path::PathBuf;
use std::process::ExitCode;

use cdma_downlink::Error as SimError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error in `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Simulation(SimError),

    #[error("validation gate failed: {within}/{total} contexts within tolerance")]
    GateFailed { within: usize, total: usize },
}

impl CliError {
    pub fn config(key: &str, reason: impl Into<String>) -> Self {
        Self::Config {
            key: key.to_string(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for this error class.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::GateFailed { .. } => 1,
            Self::Config { .. } => 2,
            Self::Simulation(SimError::PlacementInfeasible { .. }) => 3,
            Self::Simulation(SimError::EmptyAggregate) => 4,
            Self::Io { .. } => 5,
            Self::Simulation(_) => 6,
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidParameter { name, reason } => Self::Config {
                key: name.to_string(),
                reason,
            },
            other => Self::Simulation(other),
        }
    }
}

impl From<&CliError> for ExitCode {
    fn from(e: &CliError) -> Self {
        ExitCode::from(e.exit_code())
    }
}
