use std::path::PathBuf;

/// Exit status for configuration and missing-input errors.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for solver and I/O failures.
pub const EXIT_FAILURE: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config at {path}: {message}")]
    ConfigInvalid { path: String, message: String },

    #[error("stage `{stage}` needs the output of `{requires}`: {} not found", manifest.display())]
    StageInputMissing { stage: &'static str, requires: &'static str, manifest: PathBuf },

    #[error(transparent)]
    Core(#[from] thermoscale::Error),

    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
}

impl CliError {
    pub fn config(path: &str, message: impl Into<String>) -> Self {
        CliError::ConfigInvalid { path: path.to_string(), message: message.into() }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { context: context.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ConfigInvalid { .. } | CliError::StageInputMissing { .. } => EXIT_CONFIG,
            CliError::Core(_) | CliError::Io { .. } => EXIT_FAILURE,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
