use std::path::PathBuf;

use desitter_twistor::Error as CoreError;

/// Exit codes of the `desitter` binary.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FORMAT: i32 = 2;
    pub const GEOMETRY: i32 = 3;
    pub const RESIDUAL: i32 = 4;
    pub const SOLVER: i32 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {msg}")]
    Format { path: String, line: usize, msg: String },
    #[error("input lacks required fields: {0}")]
    MissingField(&'static str),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("config: {0}")]
    Config(String),
    #[error("geometry check failed: {0}")]
    Geometry(String),
    #[error("residual tests failed: {0}")]
    Residual(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. }
            | CliError::Format { .. }
            | CliError::MissingField(_)
            | CliError::Argument(_)
            | CliError::Config(_) => exit::FORMAT,
            CliError::Geometry(_) => exit::GEOMETRY,
            CliError::Residual(_) => exit::RESIDUAL,
            CliError::Core(e) => match e {
                CoreError::InvalidGrid(_)
                | CoreError::GridMismatch
                | CoreError::OutOfRange { .. }
                | CoreError::LambdaNotUnit { .. }
                | CoreError::InvalidArgument(_) => exit::FORMAT,
                CoreError::NotCmc { .. }
                | CoreError::Inconsistent { .. }
                | CoreError::NoConvergence { .. }
                | CoreError::Integration { .. } => exit::SOLVER,
                _ => exit::GEOMETRY,
            },
        }
    }
}
