use alloc::string::String;

use crate::types::Shape;

/// Errors raised by the reconstruction toolkit.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: Shape, right: Shape },

    #[error("data length {len} does not match shape {shape}")]
    LengthMismatch { shape: Shape, len: usize },

    #[error("{what} contains a non-finite value at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("shape {0} is not a power-of-two square")]
    NotDyadicSquare(Shape),

    #[error("zero-sized dimension")]
    EmptyShape,

    #[error("invalid wavelet level count {levels} for shape {shape} (max {max})")]
    InvalidLevels { levels: usize, shape: Shape, max: usize },

    #[error("wrong domain: expected {expected}, got {got}")]
    WrongDomain {
        expected: crate::types::Domain,
        got: crate::types::Domain,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("sampling ratio {0} outside (0, 1]")]
    RatioOutOfRange(f64),

    #[error("negative intensity {value} at index {index}")]
    NegativeIntensity { index: usize, value: f64 },

    #[error("denoiser `{name}` violated its contract: {reason}")]
    Denoiser { name: String, reason: String },

    #[error("unknown denoiser `{0}`")]
    UnknownDenoiser(String),

    #[error("unknown ablation variant `{0}`")]
    UnknownVariant(String),

    #[error("root finder did not converge for v={v}, tau={tau}, p={p}")]
    ProxNonConvergence { v: f64, tau: f64, p: f64 },

    #[error("descent violated at iteration {iteration} ({stage}): lhs {lhs:e} > rhs {rhs:e}")]
    DescentViolation {
        iteration: usize,
        stage: &'static str,
        lhs: f64,
        rhs: f64,
    },

    #[error("reference image has zero norm")]
    ZeroReference,
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
