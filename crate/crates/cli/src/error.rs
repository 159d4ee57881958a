use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("i/o error: {0}")]
    Io(String),
    #[error("config line {line}, key `{key}`: {message}")]
    Parse {
        line: usize,
        key: String,
        message: String,
    },
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("simulation aborted: {0}")]
    Simulation(String),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Parse { .. } | CliError::Validation(_) => 2,
            CliError::Simulation(_) => 3,
        }
    }
}
