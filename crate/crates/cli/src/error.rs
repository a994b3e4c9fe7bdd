use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed configuration or parameters outside their domain.
    #[error("invalid input: {0}")]
    Input(String),
    /// A validation run finished and found mismatches.
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Input(_) | CliError::Io(_) => 2,
        }
    }
}

impl From<treelink::Error> for CliError {
    fn from(e: treelink::Error) -> Self {
        CliError::Input(e.to_string())
    }
}
