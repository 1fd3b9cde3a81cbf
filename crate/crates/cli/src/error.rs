use thiserror::Error;

/// A failed command, classified by the exit code it maps to.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Io(String),

    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    /// Classifies a library error, prefixing `context` to the message.
    pub fn from_core(context: &str, err: allstd_core::Error) -> Self {
        use allstd_core::Error as E;
        let msg = if context.is_empty() {
            err.to_string()
        } else {
            format!("{context}: {err}")
        };
        match err {
            E::Io(_) | E::Parse { .. } | E::InconsistentDimension { .. } => CliError::Io(msg),
            E::InvalidArgument(_) | E::InsufficientData { .. } | E::DimensionMismatch { .. } | E::EmptyTrajectory { .. } => {
                CliError::Usage(msg)
            }
            _ => CliError::Numerical(msg),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(err: csv::Error) -> Self {
        CliError::Io(err.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
