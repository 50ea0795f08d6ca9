use thiserror::Error;

use crate::prob::Validation;

/// Errors raised across the workbench.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid alphabet `{name}`: {reason}")]
    InvalidAlphabet { name: String, reason: String },

    #[error("unknown axis `{0}`")]
    UnknownAxis(String),

    #[error("axis `{0}` appears more than once")]
    DuplicateAxis(String),

    #[error("axis sets overlap on `{0}`")]
    OverlappingAxes(String),

    #[error("empty axis set")]
    EmptyAxisSet,

    #[error("shape mismatch: expected {expected} entries, found {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("invalid pmf: {0}")]
    InvalidPmf(Validation),

    #[error("kernel row {row} is not a distribution: {detail}")]
    InvalidKernelRow { row: usize, detail: String },

    #[error("alphabet mismatch on axis `{axis}`: {detail}")]
    AlphabetMismatch { axis: String, detail: String },

    #[error("{what} needs {needed}, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        needed: usize,
        cap: usize,
    },

    #[error("invalid parameter `{name}`: {detail}")]
    InvalidParameter { name: &'static str, detail: String },

    #[error("invalid distortion table: {0}")]
    InvalidDistortion(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid_param(name: &'static str, detail: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        detail: detail.into(),
    }
}
