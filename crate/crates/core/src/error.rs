use thiserror::Error;

/// Errors raised by the analysis library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("basis mismatch: `{left}` vs `{right}`")]
    BasisMismatch { left: String, right: String },

    #[error("invalid basis `{name}`: {reason}")]
    InvalidBasis { name: String, reason: String },

    #[error("non-finite amplitude in {0}")]
    NonFinite(&'static str),

    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },

    #[error("element `{0}` has no unitary (it is a tap or detector)")]
    WrongKind(String),

    #[error("pre- and postselection are orthogonal (|<f|i>| = {overlap:e})")]
    OrthogonalSelection { overlap: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
