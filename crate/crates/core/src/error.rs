use std::io;

/// Everything that can go wrong while building, checking or rendering a tiling.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid word: {0}")]
    InvalidWord(String),
    #[error("iterated function system is not certified contractive (estimated factor {factor})")]
    NotContractive { factor: f64 },
    #[error("budget exceeded: {what} needs {requested}, budget is {budget}")]
    BudgetExceeded {
        what: &'static str,
        requested: u128,
        budget: u128,
    },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("map {index} is singular (determinant {det})")]
    Singular { index: usize, det: f64 },
    #[error("point is too close to the line at infinity")]
    NearInfinity,
    #[error("attractor images overlap: {0}")]
    NotNonOverlapping(String),
    #[error("invalid mask: {0}")]
    InvalidMask(String),
    #[error("graph error: {0}")]
    GraphError(String),
    #[error("point {0:?} lies outside the attractor")]
    OutsideAttractor(Vec<f64>),
    #[error("point {0:?} was not reached within the expansion depth")]
    OutsideExpansion(Vec<f64>),
    #[error("invalid preset: {0}")]
    InvalidPreset(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("parse error at line {line}, field `{field}`: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("image error: {0}")]
    Image(#[from] image::ImageError),
}

impl Error {
    pub fn parse(line: usize, field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn budget(what: &'static str, requested: u128, budget: u128) -> Self {
        Error::BudgetExceeded {
            what,
            requested,
            budget,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
