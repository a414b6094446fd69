use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] dicke_rap::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),

    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for configuration problems, 3 for numerical failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use dicke_rap::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::Domain(_) | E::Contract(_)) => 2,
            CliError::Core(_) => 3,
            CliError::Io { .. } | CliError::Csv(_) | CliError::Json(_) => 1,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

pub(crate) fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}
