use thiserror::Error;

use crate::C64;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid scattering function: {0}")]
    Semantic(String),
    #[error("evaluation point {at} is within {distance:.3e} of the pole {pole}")]
    PoleProximity { at: C64, pole: C64, distance: f64 },
    #[error("regularity failure: {0}")]
    Regularity(String),
    #[error("S2(0) = {0} is not ±1")]
    InvalidSign(C64),
    #[error("phase unwrapping failed: {0}")]
    PhaseUnwrap(String),
    #[error("argument {value} lies outside the analyticity strip |Im| < {half_width}")]
    OutsideStrip { value: C64, half_width: f64 },
    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("truncation overflow: sector {sector} would exceed n_max = {n_max}")]
    TruncationOverflow { sector: usize, n_max: usize },
    #[error("malformed contraction: {0}")]
    MalformedContraction(String),
    #[error("wavefunction supports are not strictly ordered")]
    Precedence,
    #[error("input tensor is not symmetric (residual {0:.3e})")]
    NonSymmetric(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no convergence after {steps} refinements (last relative change {last_delta:.3e})")]
    NonConvergence { steps: usize, last_delta: f64 },
    #[error("threshold not bracketed in {0}")]
    OutOfRange(String),
    #[error("mode error: {0}")]
    Mode(String),
}
