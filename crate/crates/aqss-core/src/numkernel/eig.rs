//! Hermitian eigendecomposition by cyclic Jacobi rotations, and an SVD built
//! on it through the Hermitian dilation `[[0, M], [M^dag, 0]]`.
//!
//! Jacobi is chosen over tridiagonalization for its backward stability and
//! its high relative accuracy on small eigenvalues, which the trace-norm and
//! PSD-function tests lean on. Desk-scale dimensions (< ~200) keep the
//! O(n^3)-per-sweep cost irrelevant.

use alloc::vec;
use alloc::vec::Vec;

use libm::sqrt;

use crate::error::{Error, Result};
use crate::numkernel::matrix::{cr, CMat, ZERO};

const MAX_SWEEPS: usize = 64;

/// Eigendecomposition `H = V diag(values) V^dagger`, values descending,
/// columns of `vectors` the matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct EigH {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl EigH {
    /// Reassemble `V f(diag) V^dagger` for a scalar function of the spectrum.
    pub fn apply(&self, mut f: impl FnMut(f64) -> f64) -> CMat {
        let n = self.values.len();
        let v = &self.vectors;
        let mut out = CMat::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = v.at(i, k) * cr(w);
                for j in 0..n {
                    *out.at_mut(i, j) += vik * v.at(j, k).conj();
                }
            }
        }
        out
    }
}

/// Cyclic Jacobi on a Hermitian matrix. The input is symmetrized first; callers
/// that require strict Hermiticity validate before calling.
pub fn eig_hermitian(h: &CMat) -> Result<EigH> {
    h.ensure_square()?;
    h.ensure_finite()?;
    let n = h.rows();
    if n == 0 {
        return Ok(EigH { values: Vec::new(), vectors: CMat::zeros(0, 0) });
    }
    let mut a = h.hermitize();
    let mut v = CMat::identity(n);

    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let stop = 1e-14 * scale;

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off = off_diagonal_norm(&a);
        if off <= stop {
            converged = true;
            break;
        }
        // Skip rotations on entries that cannot move the off-norm meaningfully.
        let skip = off / (n as f64 * n as f64);
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q, skip * 1e-2);
            }
        }
    }
    if !converged && off_diagonal_norm(&a) > 1e-10 * scale {
        return Err(Error::EigNonConvergence { dim: n, off_norm: off_diagonal_norm(&a) });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a.at(i, i).re).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap_or(core::cmp::Ordering::Equal));

    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let vectors = CMat::from_fn(n, n, |i, j| v.at(i, order[j]));
    Ok(EigH { values, vectors })
}

/// One complex Jacobi rotation zeroing `a[p][q]`.
fn rotate(a: &mut CMat, v: &mut CMat, p: usize, q: usize, skip: f64) {
    let apq = a.at(p, q);
    let g = apq.norm();
    if g <= skip {
        return;
    }
    let phase = apq / cr(g); // e^{i phi}
    let app = a.at(p, p).re;
    let aqq = a.at(q, q).re;
    // Root of t^2 - 2 tau t - 1 = 0 with |t| <= 1; for this rotation's sign
    // convention the annihilating choice is the negative branch.
    let tau = (aqq - app) / (2.0 * g);
    let t = {
        let s = if tau >= 0.0 { 1.0 } else { -1.0 };
        -s / (tau.abs() + sqrt(1.0 + tau * tau))
    };
    let cth = 1.0 / sqrt(1.0 + t * t);
    let sth = t * cth;

    let cs = cr(cth);
    let sp = phase * cr(sth); // s * e^{i phi}
    let spc = sp.conj(); //       s * e^{-i phi}

    let n = a.rows();
    // Column update: A <- A R, with R[p][p]=c, R[q][p]=s e^{-i phi},
    // R[p][q]=-s e^{i phi}, R[q][q]=c.
    for i in 0..n {
        let aip = a.at(i, p);
        let aiq = a.at(i, q);
        a.set(i, p, aip * cs + aiq * spc);
        a.set(i, q, aiq * cs - aip * sp);
    }
    // Row update: A <- R^dagger A.
    for j in 0..n {
        let apj = a.at(p, j);
        let aqj = a.at(q, j);
        a.set(p, j, apj * cs + aqj * sp);
        a.set(q, j, aqj * cs - apj * spc);
    }
    // Clean the rotated pair exactly.
    let hp = a.at(p, p).re;
    let hq = a.at(q, q).re;
    a.set(p, p, cr(hp));
    a.set(q, q, cr(hq));
    a.set(p, q, ZERO);
    a.set(q, p, ZERO);

    // Accumulate eigenvectors: V <- V R.
    for i in 0..v.rows() {
        let vip = v.at(i, p);
        let viq = v.at(i, q);
        v.set(i, p, vip * cs + viq * spc);
        v.set(i, q, viq * cs - vip * sp);
    }
}

fn off_diagonal_norm(a: &CMat) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a.at(i, j).norm_sqr();
            }
        }
    }
    sqrt(s)
}

/// Compact-style SVD `M = U diag(sigma) V^dagger`, sigma descending and of
/// length `min(rows, cols)`; `U`, `V` carry the matching columns.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMat,
    pub sigma: Vec<f64>,
    pub v: CMat,
}

/// SVD through the Hermitian dilation: eigenpairs `(sigma, (u; v)/sqrt(2))`.
/// Full accuracy on small singular values, unlike the `M^dagger M` route.
pub fn svd(m: &CMat) -> Result<Svd> {
    m.ensure_finite()?;
    let (r, c) = (m.rows(), m.cols());
    let k = r.min(c);
    let n = r + c;
    let mut d = CMat::zeros(n, n);
    for i in 0..r {
        for j in 0..c {
            let z = m.at(i, j);
            d.set(i, r + j, z);
            d.set(r + j, i, z.conj());
        }
    }
    let eig = eig_hermitian(&d)?;

    // The k largest eigenvalues are the singular values (>= 0 up to roundoff).
    let mut u = CMat::zeros(r, k);
    let mut v = CMat::zeros(c, k);
    let mut sigma = vec![0.0; k];
    let root2 = sqrt(2.0);
    for idx in 0..k {
        sigma[idx] = eig.values[idx].max(0.0);
        for i in 0..r {
            u.set(i, idx, eig.vectors.at(i, idx) * cr(root2));
        }
        for j in 0..c {
            v.set(j, idx, eig.vectors.at(r + j, idx) * cr(root2));
        }
    }
    // Zero-sigma columns of the dilation need not split into unit halves;
    // renormalize where possible so U, V stay near-isometric on the support.
    for idx in 0..k {
        normalize_column(&mut u, idx);
        normalize_column(&mut v, idx);
    }
    Ok(Svd { u, sigma, v })
}

fn normalize_column(m: &mut CMat, j: usize) {
    let mut s = 0.0;
    for i in 0..m.rows() {
        s += m.at(i, j).norm_sqr();
    }
    let nrm = sqrt(s);
    if nrm > 1e-14 {
        for i in 0..m.rows() {
            let z = m.at(i, j) / cr(nrm);
            m.set(i, j, z);
        }
    }
}

/// Sum of singular values. Hermitian inputs take the direct spectral route.
pub fn trace_norm(m: &CMat) -> Result<f64> {
    m.ensure_square()?;
    if m.hermiticity_defect() < 1e-12 * (1.0 + m.max_abs()) {
        let eig = eig_hermitian(m)?;
        return Ok(eig.values.iter().map(|l| l.abs()).sum());
    }
    let s = svd(m)?;
    Ok(s.sigma.iter().sum())
}

/// Trace-norm polar factor `D = U V^dagger` restricted to singular values
/// above `floor`; a subgradient of the trace norm at `M`.
pub fn trace_norm_polar(m: &CMat, floor: f64) -> Result<(f64, CMat)> {
    let s = svd(m)?;
    let value: f64 = s.sigma.iter().sum();
    let (r, c) = (m.rows(), m.cols());
    let mut d = CMat::zeros(r, c);
    for (idx, &sg) in s.sigma.iter().enumerate() {
        if sg <= floor {
            continue;
        }
        for i in 0..r {
            let ui = s.u.at(i, idx);
            for j in 0..c {
                *d.at_mut(i, j) += ui * s.v.at(j, idx).conj();
            }
        }
    }
    Ok((value, d))
}
