use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot access {0}: {1}")]
    Io(String, String),
    #[error("invalid report: {0}")]
    Report(String),
    #[error(transparent)]
    Model(#[from] d22_core::Error),
}

impl From<d22_core::tensor::TensorError> for CliError {
    fn from(e: d22_core::tensor::TensorError) -> Self {
        CliError::Model(e.into())
    }
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(_) => 1,
            _ => 2,
        }
    }
}
