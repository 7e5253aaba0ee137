//! Hermitian operators, density matrices, pure states, and the PSD /
//! state-space operations built on the eigensolver.

use alloc::vec::Vec;

use libm::sqrt;

use crate::error::{Error, Result};
use crate::numkernel::eig::{eig_hermitian, trace_norm, EigH};
use crate::numkernel::matrix::{cr, kron_vec, vec_norm, CMat, C64, ZERO};
use crate::numkernel::{HERM_TOL, PSD_FAIL, TRACE_TOL};

/// Hermitian operator: symmetrized at construction, rejected if the defect
/// exceeds tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    mat: CMat,
}

impl HermitianOperator {
    pub fn new(m: CMat) -> Result<Self> {
        m.ensure_square()?;
        m.ensure_finite()?;
        let defect = m.hermiticity_defect();
        if defect > HERM_TOL * (1.0 + m.max_abs()) {
            return Err(Error::NotHermitian { deviation: defect });
        }
        Ok(Self { mat: m.hermitize() })
    }

    /// Trusted constructor for matrices that are Hermitian by construction
    /// (still symmetrized to keep the invariant exact).
    pub fn from_hermitian_parts(m: CMat) -> Self {
        Self { mat: m.hermitize() }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn eig(&self) -> Result<EigH> {
        eig_hermitian(&self.mat)
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }
}

/// Positive semidefinite, unit-trace Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    herm: HermitianOperator,
}

impl DensityMatrix {
    /// Validates Hermiticity, clips eigenvalue noise in `[-EIG_CLIP, 0)` to
    /// zero, rejects eigenvalues below `PSD_FAIL`, and renormalizes the trace
    /// (rejected when further than `TRACE_TOL` from one).
    pub fn new(m: CMat) -> Result<Self> {
        let h = HermitianOperator::new(m)?;
        let tr = h.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::TraceNotOne { trace: tr });
        }
        let eig = h.eig()?;
        let min = eig.values.last().copied().unwrap_or(0.0);
        if min < PSD_FAIL {
            return Err(Error::NotPsd { min_eig: min });
        }
        let clipped: f64 = eig.values.iter().map(|&l| l.max(0.0)).sum();
        let rebuilt = eig.apply(|l| l.max(0.0) / clipped);
        Ok(Self { herm: HermitianOperator::from_hermitian_parts(rebuilt) })
    }

    /// Trusted path for solver internals that produce exact densities
    /// (already PSD and unit trace up to roundoff).
    pub fn from_projected(m: CMat) -> Self {
        Self { herm: HermitianOperator::from_hermitian_parts(m) }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::from_projected(CMat::identity(dim).scale_re(1.0 / dim as f64))
    }

    pub fn pure(state: &PureState) -> Self {
        Self::from_projected(CMat::outer(state.amplitudes(), state.amplitudes()))
    }

    pub fn basis_state(dim: usize, index: usize) -> Self {
        let v = crate::numkernel::matrix::basis_vec(dim, index);
        Self::from_projected(CMat::outer(&v, &v))
    }

    pub fn dim(&self) -> usize {
        self.herm.dim()
    }

    pub fn matrix(&self) -> &CMat {
        self.herm.matrix()
    }

    pub fn hermitian(&self) -> &HermitianOperator {
        &self.herm
    }

    pub fn eig(&self) -> Result<EigH> {
        self.herm.eig()
    }
}

/// Unit vector in a complex Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: Vec<C64>,
}

impl PureState {
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let n = vec_norm(&amps);
        if (n - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotNormalized { norm: n });
        }
        let amps = amps.iter().map(|z| z / cr(n)).collect();
        Ok(Self { amps })
    }

    /// Normalize an arbitrary nonzero vector.
    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        let n = vec_norm(&amps);
        if !n.is_finite() || n < 1e-300 {
            return Err(Error::NotNormalized { norm: n });
        }
        Ok(Self { amps: amps.iter().map(|z| z / cr(n)).collect() })
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        Self { amps: crate::numkernel::matrix::basis_vec(dim, index) }
    }

    /// Unnormalized-to-normalized maximally entangled state on `dim^2`.
    pub fn maximally_entangled(dim: usize) -> Self {
        let mut amps = alloc::vec![ZERO; dim * dim];
        let w = cr(1.0 / sqrt(dim as f64));
        for i in 0..dim {
            amps[i * dim + i] = w;
        }
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn projector(&self) -> CMat {
        CMat::outer(&self.amps, &self.amps)
    }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// PSD square root via the spectral decomposition; eigenvalues in
/// `[PSD_FAIL, 0)` clip to zero, below that is an error.
pub fn psd_sqrt(p: &HermitianOperator) -> Result<HermitianOperator> {
    let eig = p.eig()?;
    if let Some(&min) = eig.values.last() {
        if min < PSD_FAIL {
            return Err(Error::NotPsd { min_eig: min });
        }
    }
    Ok(HermitianOperator::from_hermitian_parts(eig.apply(|l| sqrt(l.max(0.0)))))
}

/// Uhlmann fidelity `F(rho, sigma) = |sqrt(rho) sqrt(sigma)|_1^2`, in `[0, 1]`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimMismatch { left: rho.dim(), right: sigma.dim(), context: "fidelity" });
    }
    let a = psd_sqrt(rho.hermitian())?;
    let b = psd_sqrt(sigma.hermitian())?;
    let t = trace_norm(&a.matrix().mul_mat(b.matrix()))?;
    Ok((t * t).clamp(0.0, 1.0))
}

/// Trace distance `T(rho, sigma) = |rho - sigma|_1 / 2`, in `[0, 1]`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimMismatch {
            left: rho.dim(),
            right: sigma.dim(),
            context: "trace_distance",
        });
    }
    let d = rho.matrix().sub_mat(sigma.matrix());
    Ok((0.5 * trace_norm(&d)?).clamp(0.0, 1.0))
}

/// Purification `(sqrt(rho) ⊗ I) |Phi>` with the reference factor second:
/// `sum_i sqrt(lambda_i) |psi_i> ⊗ conj(|psi_i>)`. The first marginal is
/// exactly `rho`; the second is its transpose.
pub fn purify(rho: &DensityMatrix) -> Result<PureState> {
    let eig = rho.eig()?;
    let d = rho.dim();
    let mut amps = alloc::vec![ZERO; d * d];
    for (k, &lam) in eig.values.iter().enumerate() {
        if lam <= 0.0 {
            continue;
        }
        let w = cr(sqrt(lam));
        let col: Vec<C64> = eig.vectors.col(k);
        let conj: Vec<C64> = col.iter().map(|z| z.conj()).collect();
        let term = kron_vec(&col, &conj);
        for (a, t) in amps.iter_mut().zip(term) {
            *a += w * t;
        }
    }
    PureState::normalized(amps)
}

/// Nearest (Frobenius) density matrix: spectral decomposition plus Euclidean
/// projection of the eigenvalues onto the probability simplex.
pub fn density_project(h: &HermitianOperator) -> Result<DensityMatrix> {
    let eig = h.eig()?;
    let probs = simplex_project(&eig.values);
    let mut idx = 0;
    let rebuilt = eig.apply(|_| {
        let p = probs[idx];
        idx += 1;
        p
    });
    Ok(DensityMatrix::from_projected(rebuilt))
}

/// Euclidean projection of a real vector onto `{x >= 0, sum x = 1}`.
pub fn simplex_project(values: &[f64]) -> Vec<f64> {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    let mut support = 0;
    for (k, &v) in sorted.iter().enumerate() {
        cumsum += v;
        let candidate = (cumsum - 1.0) / (k + 1) as f64;
        if v - candidate > 0.0 {
            theta = candidate;
            support = k + 1;
        }
    }
    debug_assert!(support > 0, "simplex projection found empty support");
    values.iter().map(|&v| (v - theta).max(0.0)).collect()
}

/// Partial trace of a square matrix over the factors *not* in `keep`.
/// `dims` lists every tensor factor in row-major (first factor slowest)
/// order; `keep` lists factor indices to retain, in ascending order.
pub fn partial_trace(m: &CMat, dims: &[usize], keep: &[usize]) -> Result<CMat> {
    m.ensure_square()?;
    let total: usize = dims.iter().product();
    if total != m.rows() {
        return Err(Error::DimMismatch { left: total, right: m.rows(), context: "partial_trace" });
    }
    if keep.is_empty() {
        return Err(Error::BadIndexSet { reason: "keep set must be nonempty" });
    }
    let mut seen = alloc::vec![false; dims.len()];
    for &k in keep {
        if k >= dims.len() {
            return Err(Error::BadIndexSet { reason: "keep index out of range" });
        }
        if seen[k] {
            return Err(Error::BadIndexSet { reason: "duplicate keep index" });
        }
        seen[k] = true;
    }
    let mut ordered = keep.to_vec();
    ordered.sort_unstable();

    let strides = row_major_strides(dims);
    let traced: Vec<usize> = (0..dims.len()).filter(|f| !ordered.contains(f)).collect();

    let kept_dim: usize = ordered.iter().map(|&f| dims[f]).product();
    let traced_dim: usize = traced.iter().map(|&f| dims[f]).product();

    // Offsets of every kept / traced multi-index into the flat index.
    let kept_offsets = enumerate_offsets(dims, &strides, &ordered);
    let traced_offsets = enumerate_offsets(dims, &strides, &traced);
    debug_assert_eq!(kept_offsets.len(), kept_dim);
    debug_assert_eq!(traced_offsets.len(), traced_dim);

    let mut out = CMat::zeros(kept_dim, kept_dim);
    for (a, &ra) in kept_offsets.iter().enumerate() {
        for (b, &rb) in kept_offsets.iter().enumerate() {
            let mut s = ZERO;
            for &t in &traced_offsets {
                s += m.at(ra + t, rb + t);
            }
            out.set(a, b, s);
        }
    }
    Ok(out)
}

/// Convenience for bipartite systems: trace out the second factor.
pub fn trace_out_second(m: &CMat, d1: usize, d2: usize) -> Result<CMat> {
    partial_trace(m, &[d1, d2], &[0])
}

/// Convenience for bipartite systems: trace out the first factor.
pub fn trace_out_first(m: &CMat, d1: usize, d2: usize) -> Result<CMat> {
    partial_trace(m, &[d1, d2], &[1])
}

fn row_major_strides(dims: &[usize]) -> Vec<usize> {
    let mut strides = alloc::vec![1usize; dims.len()];
    for f in (0..dims.len().saturating_sub(1)).rev() {
        strides[f] = strides[f + 1] * dims[f + 1];
    }
    strides
}

/// Flat-index offsets of all multi-indices over the given factor subset.
fn enumerate_offsets(dims: &[usize], strides: &[usize], factors: &[usize]) -> Vec<usize> {
    let mut offsets = alloc::vec![0usize];
    for &f in factors {
        let mut next = Vec::with_capacity(offsets.len() * dims[f]);
        for &base in &offsets {
            for i in 0..dims[f] {
                next.push(base + i * strides[f]);
            }
        }
        offsets = next;
    }
    offsets
}
