use thiserror::Error;

/// Failure of a command, carrying the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] twm_core::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// `2` for configuration problems, `3` for integrator failures, `4` for
    /// unreachable branches or the OPA exceptional region, `1` otherwise.
    pub fn exit_code(&self) -> i32 {
        use twm_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                E::Invalid(_) => 2,
                E::StepUnderflow { .. } | E::TooManySteps { .. } => 3,
                E::NoRoot { .. } | E::AmbiguousRoot { .. } | E::ExceptionalRegion { .. } => 4,
                _ => 1,
            },
            CliError::Io { .. } => 1,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
