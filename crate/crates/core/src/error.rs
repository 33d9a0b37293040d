use thiserror::Error;

use crate::contour::ConvergenceViolation;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("undefined order: the zero operator has no order")]
    UndefinedOrder,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("non-rational literal '{literal}' at position {pos}; write exact fractions such as 3/2")]
    NonRational { pos: usize, literal: String },
    #[error("division by a non-constant or zero expression at position {pos}")]
    BadDivision { pos: usize },
    #[error("more than one variable letter in '{0}'")]
    MixedVariables(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContourError {
    #[error("unsupported degree {0}: contours need a polynomial of degree at least 2 (lower degrees reduce to affine changes of variables)")]
    UnsupportedDegree(usize),
    #[error("degenerate contour: root indices {k1} and {k2} coincide modulo {n}, so the two rays cancel")]
    Degenerate { k1: i64, k2: i64, n: usize },
    #[error("contour plan has {got} layers, expected {expected}")]
    PlanLength { got: usize, expected: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("divergent configuration: {0}")]
    Divergent(ConvergenceViolation),
    #[error("truncation failure: relative change {est_error:.3e} exceeds tolerance {rel_tol:.3e} after {doublings} doublings")]
    TruncationFailure { est_error: f64, rel_tol: f64, doublings: u32 },
    #[error("m = {0} exceeds the default cap of 2; enable high-dimensional evaluation explicitly")]
    DimensionCap(usize),
    #[error("evaluation point |{which}| = {value} lies outside the default domain |x|,|z| <= {limit}")]
    OutOfDomain { which: &'static str, value: f64, limit: f64 },
    #[error("invalid quadrature specification: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Contour(#[from] ContourError),
}

impl QuadError {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            QuadError::Divergent(_) => 2,
            QuadError::TruncationFailure { .. } => 3,
            _ => 1,
        }
    }
}
