use alloc::string::String;
use core::fmt;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Matrix expected square.
    NotSquare { rows: usize, cols: usize },
    /// Operand dimensions do not line up.
    DimMismatch { left: usize, right: usize, context: &'static str },
    /// `|M - M^dagger|_max` above tolerance.
    NotHermitian { deviation: f64 },
    /// Eigenvalue below the hard PSD failure threshold.
    NotPsd { min_eig: f64 },
    /// Trace of a would-be density matrix too far from one.
    TraceNotOne { trace: f64 },
    /// Vector norm too far from one.
    NotNormalized { norm: f64 },
    /// Kraus completeness `sum K^dagger K = I` violated.
    NotTracePreserving { residual: f64 },
    /// Choi matrix has a genuinely negative eigenvalue.
    NotCompletelyPositive { min_eig: f64 },
    /// Jacobi sweep cap reached before the off-diagonal mass vanished.
    EigNonConvergence { dim: usize, off_norm: f64 },
    /// Factor index set invalid for a partial trace / trace-out channel.
    BadIndexSet { reason: &'static str },
    /// Player set below the scheme threshold where an authorized set is required.
    Unauthorized { size: usize, threshold: usize },
    /// Requested configuration exceeds the dense-matrix desk-scale guard.
    DimensionGuard { dim: usize, max: usize },
    /// A solver stopped above its tolerance; carries the best value and gap.
    SolverNonConvergence { best: f64, gap: f64 },
    /// Parameter outside its documented range.
    InvalidParameter(String),
    /// NaN or infinity encountered where finite data is required.
    NonFinite,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotSquare { rows, cols } => write!(f, "matrix is not square: {rows}x{cols}"),
            Error::DimMismatch { left, right, context } => {
                write!(f, "dimension mismatch in {context}: {left} vs {right}")
            }
            Error::NotHermitian { deviation } => {
                write!(f, "not Hermitian (max deviation {deviation:.3e})")
            }
            Error::NotPsd { min_eig } => {
                write!(f, "not positive semidefinite (min eigenvalue {min_eig:.3e})")
            }
            Error::TraceNotOne { trace } => write!(f, "trace is not 1 (got {trace:.12})"),
            Error::NotNormalized { norm } => write!(f, "vector norm is not 1 (got {norm:.12})"),
            Error::NotTracePreserving { residual } => {
                write!(f, "Kraus completeness violated (|sum K^dag K - I| = {residual:.3e})")
            }
            Error::NotCompletelyPositive { min_eig } => {
                write!(f, "Choi matrix not PSD (min eigenvalue {min_eig:.3e})")
            }
            Error::EigNonConvergence { dim, off_norm } => write!(
                f,
                "Jacobi eigensolver did not converge (dim {dim}, off-diagonal norm {off_norm:.3e})"
            ),
            Error::BadIndexSet { reason } => write!(f, "bad factor index set: {reason}"),
            Error::Unauthorized { size, threshold } => {
                write!(f, "set of {size} players is below threshold {threshold}")
            }
            Error::DimensionGuard { dim, max } => {
                write!(f, "total share dimension {dim} exceeds desk-scale limit {max}")
            }
            Error::SolverNonConvergence { best, gap } => {
                write!(f, "solver did not converge (best value {best:.9}, gap {gap:.3e})")
            }
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::NonFinite => write!(f, "non-finite value encountered"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
