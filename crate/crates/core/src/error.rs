use nalgebra::Complex;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised anywhere in the approximation pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("evaluation of term {term} is not finite at z = {z}")]
    NonFiniteTerm { term: usize, z: Complex<f64> },

    #[error("evaluation produced non-finite values at z = {z}")]
    NonFiniteValue { z: Complex<f64> },

    #[error("barycentric denominator vanishes at z = {z}")]
    Pole { z: Complex<f64> },

    #[error("function is identically zero on the sampling set")]
    ZeroFunction,

    #[error("sampling set exhausted: {remaining} points left for degree {degree}")]
    GridExhausted { remaining: usize, degree: usize },

    #[error("stable rank undefined for the zero matrix")]
    UndefinedRank,

    #[error("residual is identically zero; the approximant is exact")]
    DegenerateResidual,

    #[error("weight {index} is zero (|w| = {magnitude:e})")]
    WeightDegeneracy { index: usize, magnitude: f64 },

    #[error("degree {0} is not supported by the linearization (need d >= 2)")]
    UnsupportedDegree(usize),

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("{kind} at byte offset {offset}: {message}")]
    Parse {
        kind: ParseErrorKind,
        offset: usize,
        message: String,
    },

    #[error("problem file: {0}")]
    ProblemFile(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    UnknownIdentifier,
    Arity,
}

impl std::fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParseErrorKind::Syntax => f.write_str("syntax error"),
            ParseErrorKind::UnknownIdentifier => f.write_str("unknown identifier"),
            ParseErrorKind::Arity => f.write_str("arity mismatch"),
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
