//! Dense complex-matrix primitives: Hermitian eigendecomposition, PSD matrix
//! functions, norms, partial traces, purification, and projection onto the
//! density-matrix set. Everything else in the crate builds on this module.

mod density;
mod eig;
mod matrix;

pub use density::{
    density_project, fidelity, partial_trace, psd_sqrt, purify, simplex_project, trace_distance,
    trace_out_first, trace_out_second, DensityMatrix, HermitianOperator, PureState,
};
pub use eig::{eig_hermitian, svd, trace_norm, trace_norm_polar, EigH, Svd};
pub use matrix::{
    basis_vec, c, cr, kron_vec, vec_dot, vec_norm, vec_scale, vec_sub, CMat, C64, ONE, ZERO,
};

/// Construction tolerance for Hermiticity defects.
pub const HERM_TOL: f64 = 1e-10;
/// Eigenvalues in `[-EIG_CLIP, 0)` are treated as float noise and clipped.
pub const EIG_CLIP: f64 = 1e-10;
/// Eigenvalues below this are a genuine PSD violation, not noise.
pub const PSD_FAIL: f64 = -1e-6;
/// Acceptable distance from unit trace / unit norm at construction.
pub const TRACE_TOL: f64 = 1e-8;
/// Kraus completeness tolerance.
pub const TP_TOL: f64 = 1e-8;
