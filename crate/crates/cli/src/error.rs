use fraclab_core::FracError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration syntax: {0}")]
    Syntax(String),

    #[error("unknown key '{0}'")]
    UnknownKey(String),

    #[error("missing key '{0}'")]
    Missing(String),

    #[error("key '{path}': expected {expected}, found '{found}'")]
    Type { path: String, expected: &'static str, found: String },

    #[error("key '{path}': {msg}")]
    Precondition { path: String, msg: String },

    #[error(transparent)]
    Compute(#[from] FracError),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Compute(_) => 3,
            CliError::Io(_) => 4,
            _ => 2,
        }
    }
}
