//! Error type shared by the factorization routines.

use std::fmt;

/// Errors reported by matrix operations and solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Operand shapes are incompatible for the named operation.
    ShapeMismatch {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },
    /// Data contains NaN or infinite entries.
    NonFinite { what: &'static str },
    /// Input matrix or tensor has negative entries where nonnegativity is required.
    NegativeInput { what: &'static str },
    /// A parameter is outside its valid range.
    InvalidArg { msg: String },
    /// Requested rank exceeds what the operand supports.
    RankOutOfRange { rank: usize, max: usize },
    /// Jacobi SVD did not reach the off-diagonal tolerance within the sweep cap.
    SvdNoConvergence { sweeps: usize },
    /// Active-set NNLS exceeded its swap budget (near-degenerate design matrix).
    NnlsDegenerate,
    /// A column update has no well-defined value (zero pivot column).
    ZeroColumn { what: &'static str },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ShapeMismatch { op, lhs, rhs } => write!(
                f,
                "{op}: shape mismatch, {}x{} vs {}x{}",
                lhs.0, lhs.1, rhs.0, rhs.1
            ),
            Error::NonFinite { what } => write!(f, "{what} contains non-finite entries"),
            Error::NegativeInput { what } => write!(f, "{what} must be elementwise nonnegative"),
            Error::InvalidArg { msg } => write!(f, "invalid argument: {msg}"),
            Error::RankOutOfRange { rank, max } => {
                write!(f, "rank {rank} out of range (must be in 1..={max})")
            }
            Error::SvdNoConvergence { sweeps } => {
                write!(f, "jacobi svd did not converge within {sweeps} sweeps")
            }
            Error::NnlsDegenerate => write!(f, "nnls active-set iteration cap exceeded"),
            Error::ZeroColumn { what } => write!(f, "{what}: update undefined for a zero column"),
        }
    }
}

impl std::error::Error for Error {}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
