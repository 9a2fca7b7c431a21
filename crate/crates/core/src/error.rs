use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FracError {
    #[error("domain error in {op}: {msg}")]
    Domain { op: &'static str, msg: String },

    #[error("divergent integral in {op}: {msg}")]
    Divergent { op: &'static str, msg: String },

    #[error("singular evaluation in {op}: {msg}")]
    Singular { op: &'static str, msg: String },

    #[error("quadrature did not settle in {op}: {msg}")]
    NotSettled { op: &'static str, msg: String },

    #[error("field evaluation failed at {location}: {msg}")]
    Field { location: String, msg: String },
}

impl FracError {
    pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        FracError::Domain { op, msg: msg.into() }
    }

    pub(crate) fn divergent(op: &'static str, msg: impl Into<String>) -> Self {
        FracError::Divergent { op, msg: msg.into() }
    }

    pub(crate) fn singular(op: &'static str, msg: impl Into<String>) -> Self {
        FracError::Singular { op, msg: msg.into() }
    }

    pub(crate) fn not_settled(op: &'static str, msg: impl Into<String>) -> Self {
        FracError::NotSettled { op, msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, FracError>;
