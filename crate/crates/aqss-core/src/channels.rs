//! Quantum channel representations (Kraus, Choi, Stinespring), conversions
//! between them, composition, and the complementary-channel construction
//! `Nhat = tr_out ∘ U` built from the Stinespring isometry
//! `W = sum_i |i> ⊗ K_i`.
//!
//! Conventions: Choi matrices are unnormalized (`tr J = dim_in`) with the
//! input factor first, `J = sum_ij |i><j| ⊗ N(|i><j|)`.

use alloc::vec;
use alloc::vec::Vec;

use libm::sqrt;

use crate::error::{Error, Result};
use crate::numkernel::{
    basis_vec, cr, eig_hermitian, partial_trace, CMat, DensityMatrix, HermitianOperator, C64, ONE,
    TP_TOL, ZERO,
};

/// Eigenvalue cutoff below which Choi directions are dropped when extracting
/// Kraus operators; keeps environments minimal for downstream solvers.
pub const KRAUS_RANK_CUTOFF: f64 = 1e-10;

/// CPTP map in Kraus form; every operator is `dim_out x dim_in` and
/// `sum_i K_i^dag K_i = I` within tolerance.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<CMat>,
}

impl KrausChannel {
    pub fn new(kraus: Vec<CMat>) -> Result<Self> {
        let first = kraus.first().ok_or(Error::InvalidParameter(
            alloc::string::String::from("channel needs at least one Kraus operator"),
        ))?;
        let (dim_out, dim_in) = (first.rows(), first.cols());
        for k in &kraus {
            k.ensure_finite()?;
            if k.rows() != dim_out || k.cols() != dim_in {
                return Err(Error::DimMismatch {
                    left: dim_out * dim_in,
                    right: k.rows() * k.cols(),
                    context: "Kraus operator shapes",
                });
            }
        }
        let ch = Self { dim_in, dim_out, kraus };
        let residual = ch.trace_preservation_residual();
        if residual > TP_TOL {
            return Err(Error::NotTracePreserving { residual });
        }
        Ok(ch)
    }

    /// Bypass the completeness check; for diagnostics on deliberately broken
    /// channels and for internal constructions that preserve it structurally.
    pub fn new_unchecked(dim_in: usize, dim_out: usize, kraus: Vec<CMat>) -> Self {
        Self { dim_in, dim_out, kraus }
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim_in: dim, dim_out: dim, kraus: vec![CMat::identity(dim)] }
    }

    /// Isometry channel `rho -> V rho V^dag` from a single isometric Kraus.
    pub fn isometry(v: CMat) -> Result<Self> {
        Self::new(vec![v])
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus_ops(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn kraus_count(&self) -> usize {
        self.kraus.len()
    }

    /// `|sum K^dag K - I|_F`.
    pub fn trace_preservation_residual(&self) -> f64 {
        let mut acc = CMat::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            acc = acc.add_mat(&k.dagger().mul_mat(k));
        }
        acc.sub_mat(&CMat::identity(self.dim_in)).frobenius_norm()
    }

    /// Apply to an arbitrary matrix (not necessarily a state).
    pub fn apply_matrix(&self, m: &CMat) -> Result<CMat> {
        if m.rows() != self.dim_in || m.cols() != self.dim_in {
            return Err(Error::DimMismatch {
                left: self.dim_in,
                right: m.rows(),
                context: "apply_channel input",
            });
        }
        let mut out = CMat::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out = out.add_mat(&k.mul_mat(m).mul_mat(&k.dagger()));
        }
        Ok(out)
    }

    /// Adjoint (Heisenberg-picture) action `sum K^dag X K`.
    pub fn apply_adjoint(&self, m: &CMat) -> Result<CMat> {
        if m.rows() != self.dim_out || m.cols() != self.dim_out {
            return Err(Error::DimMismatch {
                left: self.dim_out,
                right: m.rows(),
                context: "adjoint input",
            });
        }
        let mut out = CMat::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            out = out.add_mat(&k.dagger().mul_mat(m).mul_mat(k));
        }
        Ok(out)
    }

    /// Stinespring isometry `W = sum_i |i> ⊗ K_i` with the environment
    /// (Kraus-label) register first.
    pub fn stinespring(&self) -> StinespringIsometry {
        let r = self.kraus.len();
        let mut w = CMat::zeros(r * self.dim_out, self.dim_in);
        for (i, k) in self.kraus.iter().enumerate() {
            for a in 0..self.dim_out {
                for b in 0..self.dim_in {
                    w.set(i * self.dim_out + a, b, k.at(a, b));
                }
            }
        }
        StinespringIsometry { dim_in: self.dim_in, dim_out: self.dim_out, dim_env: r, isometry: w }
    }

    /// Minimal-Kraus form via a Choi eigendecomposition round trip.
    pub fn reduced(&self) -> Result<Self> {
        choi_to_kraus(&kraus_to_choi(self))
    }
}

/// Apply a channel to a density matrix.
pub fn apply_channel(ch: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let out = ch.apply_matrix(rho.matrix())?;
    Ok(DensityMatrix::from_projected(out))
}

/// Composition `outer ∘ inner`; Kraus set is all products.
pub fn compose(outer: &KrausChannel, inner: &KrausChannel) -> Result<KrausChannel> {
    if inner.dim_out != outer.dim_in {
        return Err(Error::DimMismatch {
            left: inner.dim_out,
            right: outer.dim_in,
            context: "compose",
        });
    }
    let mut kraus = Vec::with_capacity(outer.kraus.len() * inner.kraus.len());
    for o in &outer.kraus {
        for i in &inner.kraus {
            kraus.push(o.mul_mat(i));
        }
    }
    Ok(KrausChannel { dim_in: inner.dim_in, dim_out: outer.dim_out, kraus })
}

/// Unnormalized Choi matrix, input factor first, `tr J = dim_in`.
#[derive(Debug, Clone)]
pub struct ChoiMatrix {
    dim_in: usize,
    dim_out: usize,
    matrix: HermitianOperator,
}

impl ChoiMatrix {
    /// Validate PSD-ness (within clipping tolerance) and the partial-trace
    /// condition `tr_out J = I_in`.
    pub fn new(dim_in: usize, dim_out: usize, matrix: CMat) -> Result<Self> {
        let h = HermitianOperator::new(matrix)?;
        if h.dim() != dim_in * dim_out {
            return Err(Error::DimMismatch {
                left: dim_in * dim_out,
                right: h.dim(),
                context: "Choi dimension",
            });
        }
        let choi = Self { dim_in, dim_out, matrix: h };
        let min = choi.min_eigenvalue()?;
        if min < -TP_TOL {
            return Err(Error::NotCompletelyPositive { min_eig: min });
        }
        let residual = choi.trace_preservation_residual()?;
        if residual > TP_TOL {
            return Err(Error::NotTracePreserving { residual });
        }
        Ok(choi)
    }

    pub fn from_parts_unchecked(dim_in: usize, dim_out: usize, matrix: CMat) -> Self {
        Self { dim_in, dim_out, matrix: HermitianOperator::from_hermitian_parts(matrix) }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn matrix(&self) -> &CMat {
        self.matrix.matrix()
    }

    pub fn hermitian(&self) -> &HermitianOperator {
        &self.matrix
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let eig = self.matrix.eig()?;
        Ok(eig.values.last().copied().unwrap_or(0.0))
    }

    pub fn trace_preservation_residual(&self) -> Result<f64> {
        let marg = partial_trace(self.matrix.matrix(), &[self.dim_in, self.dim_out], &[0])?;
        Ok(marg.sub_mat(&CMat::identity(self.dim_in)).frobenius_norm())
    }

    /// Channel action from the Choi matrix: `N(X) = tr_in(J (X^T ⊗ I))`.
    pub fn apply_matrix(&self, x: &CMat) -> Result<CMat> {
        if x.rows() != self.dim_in || x.cols() != self.dim_in {
            return Err(Error::DimMismatch {
                left: self.dim_in,
                right: x.rows(),
                context: "choi apply input",
            });
        }
        let j = self.matrix.matrix();
        let (din, dout) = (self.dim_in, self.dim_out);
        let mut out = CMat::zeros(dout, dout);
        for m in 0..dout {
            for n in 0..dout {
                let mut s = ZERO;
                for i in 0..din {
                    for k in 0..din {
                        // (X^T)[k][i] = X[i][k]
                        s += j.at(i * dout + m, k * dout + n) * x.at(i, k);
                    }
                }
                out.set(m, n, s);
            }
        }
        Ok(out)
    }

    /// Channel image of the maximally mixed state, `tr_in J / dim_in`.
    pub fn output_of_maximally_mixed(&self) -> Result<CMat> {
        let marg = partial_trace(self.matrix.matrix(), &[self.dim_in, self.dim_out], &[1])?;
        Ok(marg.scale_re(1.0 / self.dim_in as f64))
    }
}

/// Stinespring isometry `W : H_in -> H_env ⊗ H_out` with `W^dag W = I`.
#[derive(Debug, Clone)]
pub struct StinespringIsometry {
    pub dim_in: usize,
    pub dim_out: usize,
    pub dim_env: usize,
    pub isometry: CMat,
}

impl StinespringIsometry {
    pub fn isometry_defect(&self) -> f64 {
        let wtw = self.isometry.dagger().mul_mat(&self.isometry);
        wtw.sub_mat(&CMat::identity(self.dim_in)).frobenius_norm()
    }
}

/// `J = sum_ij |i><j| ⊗ ch(|i><j|) = sum_k vec(K_k) vec(K_k)^dag` where
/// `vec(K)[(i, m)] = K[m][i]`.
pub fn kraus_to_choi(ch: &KrausChannel) -> ChoiMatrix {
    let (din, dout) = (ch.dim_in, ch.dim_out);
    let n = din * dout;
    let mut j = CMat::zeros(n, n);
    for k in &ch.kraus {
        let mut v = vec![ZERO; n];
        for i in 0..din {
            for m in 0..dout {
                v[i * dout + m] = k.at(m, i);
            }
        }
        for (a, &va) in v.iter().enumerate() {
            if va == ZERO {
                continue;
            }
            for (b, &vb) in v.iter().enumerate() {
                *j.at_mut(a, b) += va * vb.conj();
            }
        }
    }
    ChoiMatrix::from_parts_unchecked(din, dout, j)
}

/// Kraus operators from the Choi eigendecomposition; rank is the count of
/// eigenvalues above [`KRAUS_RANK_CUTOFF`]. Errors on genuine CP violations.
pub fn choi_to_kraus(j: &ChoiMatrix) -> Result<KrausChannel> {
    let eig = eig_hermitian(j.matrix())?;
    if let Some(&min) = eig.values.last() {
        if min < -1e-6 {
            return Err(Error::NotCompletelyPositive { min_eig: min });
        }
    }
    let (din, dout) = (j.dim_in, j.dim_out);
    let mut kraus = Vec::new();
    for (idx, &lam) in eig.values.iter().enumerate() {
        if lam <= KRAUS_RANK_CUTOFF {
            continue;
        }
        let w = sqrt(lam);
        let mut k = CMat::zeros(dout, din);
        for i in 0..din {
            for m in 0..dout {
                k.set(m, i, eig.vectors.at(i * dout + m, idx) * cr(w));
            }
        }
        kraus.push(k);
    }
    if kraus.is_empty() {
        return Err(Error::NotCompletelyPositive { min_eig: 0.0 });
    }
    Ok(KrausChannel { dim_in: din, dim_out: dout, kraus })
}

/// Complementary channel `rho -> tr_out(W rho W^dag)` with the environment
/// register indexed by the Kraus label: Kraus operators
/// `B_m[i][l] = K_i[m][l]` for each output-basis label `m`.
pub fn complementary(ch: &KrausChannel) -> KrausChannel {
    let r = ch.kraus.len();
    let (din, dout) = (ch.dim_in, ch.dim_out);
    let mut comp = Vec::with_capacity(dout);
    for m in 0..dout {
        let mut b = CMat::zeros(r, din);
        for (i, k) in ch.kraus.iter().enumerate() {
            for l in 0..din {
                b.set(i, l, k.at(m, l));
            }
        }
        comp.push(b);
    }
    KrausChannel { dim_in: din, dim_out: r, kraus: comp }
}

/// Partial-trace channel on a multi-factor space: Kraus set
/// `{<k_discard| ⊗ I_keep}` over all basis labels of the discarded factors.
pub fn trace_out_channel(dims: &[usize], discard: &[usize]) -> Result<KrausChannel> {
    if discard.is_empty() {
        return Err(Error::BadIndexSet { reason: "discard set must be nonempty" });
    }
    let mut seen = vec![false; dims.len()];
    for &d in discard {
        if d >= dims.len() {
            return Err(Error::BadIndexSet { reason: "discard index out of range" });
        }
        if seen[d] {
            return Err(Error::BadIndexSet { reason: "duplicate discard index" });
        }
        seen[d] = true;
    }
    let keep: Vec<usize> = (0..dims.len()).filter(|f| !seen[*f]).collect();
    let dim_in: usize = dims.iter().product();
    let dim_out: usize = keep.iter().map(|&f| dims[f]).product::<usize>().max(1);

    let mut strides = vec![1usize; dims.len()];
    for f in (0..dims.len().saturating_sub(1)).rev() {
        strides[f] = strides[f + 1] * dims[f + 1];
    }
    let discard_dims: Vec<usize> = discard.iter().map(|&f| dims[f]).collect();
    let kept_dims: Vec<usize> = keep.iter().map(|&f| dims[f]).collect();
    let total_discard: usize = discard_dims.iter().product();
    let kept_total: usize = kept_dims.iter().product::<usize>().max(1);

    let mut kraus = Vec::with_capacity(total_discard);
    for label in 0..total_discard {
        let mut rem = label;
        let mut discard_idx = vec![0usize; discard.len()];
        for pos in (0..discard.len()).rev() {
            discard_idx[pos] = rem % discard_dims[pos];
            rem /= discard_dims[pos];
        }
        let mut k = CMat::zeros(dim_out, dim_in);
        for kept_label in 0..kept_total {
            let mut rem = kept_label;
            let mut col = 0usize;
            for pos in (0..keep.len()).rev() {
                let idx = rem % kept_dims[pos];
                rem /= kept_dims[pos];
                col += idx * strides[keep[pos]];
            }
            for (pos, &f) in discard.iter().enumerate() {
                col += discard_idx[pos] * strides[f];
            }
            k.set(kept_label, col, ONE);
        }
        kraus.push(k);
    }
    Ok(KrausChannel { dim_in, dim_out, kraus })
}

/// Constant channel `rho -> tr(rho) sigma`.
pub fn preparation_channel(dim_in: usize, sigma: &DensityMatrix) -> Result<KrausChannel> {
    let eig = sigma.eig()?;
    let mut kraus = Vec::new();
    for (idx, &lam) in eig.values.iter().enumerate() {
        if lam <= KRAUS_RANK_CUTOFF {
            continue;
        }
        let w = cr(sqrt(lam));
        let v = eig.vectors.col(idx);
        for kin in 0..dim_in {
            let basis = basis_vec(dim_in, kin);
            kraus.push(CMat::outer(&v, &basis).scale(w));
        }
    }
    KrausChannel::new(kraus)
}

/// CPTP diagnostics: trace-preservation residual and minimum Choi eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CptpDiagnostics {
    pub tp_residual: f64,
    pub choi_min_eig: f64,
    pub pass: bool,
}

pub fn validate_cptp(ch: &KrausChannel) -> Result<CptpDiagnostics> {
    let tp_residual = ch.trace_preservation_residual();
    let choi = kraus_to_choi(ch);
    let choi_min_eig = choi.min_eigenvalue()?;
    Ok(CptpDiagnostics {
        tp_residual,
        choi_min_eig,
        pass: tp_residual <= TP_TOL && choi_min_eig >= -TP_TOL,
    })
}

// ---------------------------------------------------------------------------
// Built-in single-qudit noise families
// ---------------------------------------------------------------------------

/// Depolarizing channel `rho -> (1-p) rho + p I/d` with Weyl-operator Kraus.
pub fn depolarizing(dim: usize, p: f64) -> Result<KrausChannel> {
    check_probability(p)?;
    let d2 = (dim * dim) as f64;
    let mut kraus = Vec::with_capacity(dim * dim);
    kraus.push(CMat::identity(dim).scale_re(sqrt(1.0 - p + p / d2)));
    let w = sqrt(p) / dim as f64;
    for a in 0..dim {
        for b in 0..dim {
            if a == 0 && b == 0 {
                continue;
            }
            kraus.push(weyl_operator(dim, a, b).scale_re(w));
        }
    }
    KrausChannel::new(kraus)
}

/// Qudit phase damping `rho -> (1-p) rho + (p/d) sum_k Z^k rho Z^-k` with
/// diagonal Weyl Kraus; at `p = 1` every off-diagonal element vanishes.
pub fn dephasing(dim: usize, p: f64) -> Result<KrausChannel> {
    check_probability(p)?;
    let mut kraus = Vec::with_capacity(dim);
    kraus.push(CMat::identity(dim).scale_re(sqrt(1.0 - p + p / dim as f64)));
    let w = sqrt(p / dim as f64);
    for k in 1..dim {
        kraus.push(weyl_operator(dim, 0, k).scale_re(w));
    }
    KrausChannel::new(kraus)
}

/// Share erasure: with probability `p` replace the qudit with the maximally
/// mixed state. Same map as depolarizing, expressed with flip-flop Kraus
/// `|m><k|`; the two representations agree after Choi reduction.
pub fn erasure(dim: usize, p: f64) -> Result<KrausChannel> {
    check_probability(p)?;
    let mut kraus = Vec::with_capacity(dim * dim + 1);
    kraus.push(CMat::identity(dim).scale_re(sqrt(1.0 - p)));
    let w = sqrt(p / dim as f64);
    for m in 0..dim {
        for k in 0..dim {
            let mut op = CMat::zeros(dim, dim);
            op.set(m, k, cr(w));
            kraus.push(op);
        }
    }
    KrausChannel::new(kraus)
}

/// Weyl (generalized Pauli) operator `X^a Z^b` on a qudit.
pub fn weyl_operator(dim: usize, a: usize, b: usize) -> CMat {
    let mut m = CMat::zeros(dim, dim);
    let omega = 2.0 * core::f64::consts::PI / dim as f64;
    for k in 0..dim {
        let phase = omega * (b * k) as f64;
        m.set((k + a) % dim, k, C64::new(libm::cos(phase), libm::sin(phase)));
    }
    m
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(Error::InvalidParameter(alloc::format!(
            "noise parameter out of range [0,1]: {p}"
        )));
    }
    Ok(())
}


#[cfg(test)]
mod tests {
    use super::testutil::{random_channel, random_density};
    use super::*;
    use crate::numkernel::fidelity;
    use crate::rng::SplitMix64;

    #[test]
    fn identity_choi_is_maximally_entangled() {
        let ch = KrausChannel::identity(3);
        let j = kraus_to_choi(&ch);
        assert!((j.matrix().trace().re - 3.0).abs() < 1e-12);
        let eig = eig_hermitian(j.matrix()).unwrap();
        assert!((eig.values[0] - 3.0).abs() < 1e-12);
        assert!(eig.values[1].abs() < 1e-12);
        assert!(j.trace_preservation_residual().unwrap() < 1e-12);
    }

    #[test]
    fn constant_channel_choi_is_product() {
        let mut rng = SplitMix64::new(1);
        let sigma = random_density(2, &mut rng);
        let ch = preparation_channel(3, &sigma).unwrap();
        let j = kraus_to_choi(&ch);
        let want = CMat::identity(3).kron(sigma.matrix());
        assert!(j.matrix().sub_mat(&want).frobenius_norm() < 1e-10);
        let rho = random_density(3, &mut rng);
        let out = apply_channel(&ch, &rho).unwrap();
        assert!(out.matrix().sub_mat(sigma.matrix()).frobenius_norm() < 1e-10);
    }

    #[test]
    fn choi_contraction_matches_kraus_application() {
        let mut rng = SplitMix64::new(2);
        let ch = random_channel(2, 2, 2, &mut rng);
        let j = kraus_to_choi(&ch);
        for _ in 0..20 {
            let rho = random_density(2, &mut rng);
            let via_kraus = ch.apply_matrix(rho.matrix()).unwrap();
            let via_choi = j.apply_matrix(rho.matrix()).unwrap();
            assert!(via_kraus.sub_mat(&via_choi).frobenius_norm() < 1e-9);
        }
    }

    #[test]
    fn choi_to_kraus_round_trip() {
        let mut rng = SplitMix64::new(3);
        for (din, dout, rank) in [(2, 2, 2), (2, 3, 2), (3, 2, 3)] {
            let ch = random_channel(din, dout, rank, &mut rng);
            let j = kraus_to_choi(&ch);
            let back = choi_to_kraus(&j).unwrap();
            assert_eq!(back.kraus_count(), rank, "kraus rank should match");
            let j2 = kraus_to_choi(&back);
            assert!(j.matrix().sub_mat(j2.matrix()).frobenius_norm() < 1e-8);
        }
    }

    #[test]
    fn choi_of_identity_gives_identity_kraus() {
        let j = kraus_to_choi(&KrausChannel::identity(2));
        let ch = choi_to_kraus(&j).unwrap();
        assert_eq!(ch.kraus_count(), 1);
        let k = &ch.kraus_ops()[0];
        let phase = k.at(0, 0) / cr(k.at(0, 0).norm());
        assert!(k.sub_mat(&CMat::identity(2).scale(phase)).frobenius_norm() < 1e-9);
    }

    #[test]
    fn depolarizing_full_noise_maps_to_maximally_mixed() {
        let mut rng = SplitMix64::new(4);
        let ch = depolarizing(2, 1.0).unwrap();
        for _ in 0..5 {
            let rho = random_density(2, &mut rng);
            let out = apply_channel(&ch, &rho).unwrap();
            assert!(
                out.matrix().sub_mat(&CMat::identity(2).scale_re(0.5)).frobenius_norm() < 1e-10
            );
        }
        let k = choi_to_kraus(&kraus_to_choi(&ch)).unwrap();
        assert_eq!(k.kraus_count(), 4);
    }

    #[test]
    fn dephasing_full_noise_kills_coherences() {
        let half = cr(core::f64::consts::FRAC_1_SQRT_2);
        let plus = CMat::outer(&[half, half], &[half, half]);
        let ch = dephasing(2, 1.0).unwrap();
        let out = ch.apply_matrix(&plus).unwrap();
        assert!(out.sub_mat(&CMat::identity(2).scale_re(0.5)).frobenius_norm() < 1e-12);
    }

    #[test]
    fn erasure_equals_depolarizing_as_map() {
        for p in [0.0, 0.3, 1.0] {
            let a = erasure(3, p).unwrap();
            let b = depolarizing(3, p).unwrap();
            let ja = kraus_to_choi(&a);
            let jb = kraus_to_choi(&b);
            assert!(ja.matrix().sub_mat(jb.matrix()).frobenius_norm() < 1e-10, "p={p}");
        }
    }

    #[test]
    fn compose_matches_sequential_application() {
        let mut rng = SplitMix64::new(6);
        let inner = random_channel(2, 2, 2, &mut rng);
        let outer = random_channel(2, 2, 2, &mut rng);
        let chained = compose(&outer, &inner).unwrap();
        for _ in 0..20 {
            let rho = random_density(2, &mut rng);
            let step = outer.apply_matrix(&inner.apply_matrix(rho.matrix()).unwrap()).unwrap();
            let joined = chained.apply_matrix(rho.matrix()).unwrap();
            assert!(step.sub_mat(&joined).frobenius_norm() < 1e-10);
        }
        let idc = compose(&KrausChannel::identity(2), &inner).unwrap();
        let rho = random_density(2, &mut rng);
        assert!(idc
            .apply_matrix(rho.matrix())
            .unwrap()
            .sub_mat(&inner.apply_matrix(rho.matrix()).unwrap())
            .frobenius_norm()
            < 1e-12);
        // trace-and-prepare composed with anything stays constant
        let sigma = random_density(2, &mut rng);
        let prep = preparation_channel(2, &sigma).unwrap();
        let constant = compose(&prep, &inner).unwrap();
        let out = constant.apply_matrix(rho.matrix()).unwrap();
        assert!(out.sub_mat(sigma.matrix()).frobenius_norm() < 1e-10);
    }

    #[test]
    fn complementary_of_identity_is_trace_channel() {
        let mut rng = SplitMix64::new(7);
        let comp = complementary(&KrausChannel::identity(3));
        assert_eq!(comp.dim_out(), 1);
        for _ in 0..5 {
            let rho = random_density(3, &mut rng);
            let out = comp.apply_matrix(rho.matrix()).unwrap();
            assert!((out.at(0, 0).re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn complementary_of_unitary_is_constant_with_trivial_environment() {
        let u = weyl_operator(3, 1, 1);
        let ch = KrausChannel::new(vec![u]).unwrap();
        let comp = complementary(&ch);
        assert_eq!(comp.dim_out(), 1);
        let mut rng = SplitMix64::new(15);
        let a = comp.apply_matrix(random_density(3, &mut rng).matrix()).unwrap();
        let b = comp.apply_matrix(random_density(3, &mut rng).matrix()).unwrap();
        assert!(a.sub_mat(&b).frobenius_norm() < 1e-12);
    }

    #[test]
    fn complementary_preserves_trace_and_isometry() {
        let mut rng = SplitMix64::new(8);
        let ch = random_channel(3, 2, 3, &mut rng);
        let w = ch.stinespring();
        assert!(w.isometry_defect() < 1e-8);
        let comp = complementary(&ch);
        assert!(validate_cptp(&comp).unwrap().pass);
        for _ in 0..10 {
            let rho = random_density(3, &mut rng);
            let t1 = ch.apply_matrix(rho.matrix()).unwrap().trace().re;
            let t2 = comp.apply_matrix(rho.matrix()).unwrap().trace().re;
            assert!((t1 - 1.0).abs() < 1e-9);
            assert!((t2 - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn random_channels_satisfy_choi_invariants() {
        let mut rng = SplitMix64::new(13);
        for _ in 0..6 {
            let din = 2 + rng.next_below(3);
            let dout = 2 + rng.next_below(3);
            let rank = 1 + rng.next_below(3);
            let ch = random_channel(din, dout, rank.max(din.div_ceil(dout)), &mut rng);
            let j = kraus_to_choi(&ch);
            assert!(j.min_eigenvalue().unwrap() > -1e-10);
            assert!(j.trace_preservation_residual().unwrap() < 1e-8);
        }
    }

    #[test]
    fn trace_out_channel_matches_partial_trace() {
        let mut rng = SplitMix64::new(9);
        let dims = [2usize, 2];
        let ch = trace_out_channel(&dims, &[1]).unwrap();
        for _ in 0..20 {
            let rho = random_density(4, &mut rng);
            let via_channel = ch.apply_matrix(rho.matrix()).unwrap();
            let via_pt = partial_trace(rho.matrix(), &dims, &[0]).unwrap();
            assert!(via_channel.sub_mat(&via_pt).frobenius_norm() < 1e-12);
        }
        let rho = random_density(2, &mut rng);
        let sig = random_density(2, &mut rng);
        let joint = rho.matrix().kron(sig.matrix());
        let out = ch.apply_matrix(&joint).unwrap();
        assert!(out.sub_mat(rho.matrix()).frobenius_norm() < 1e-12);
    }

    #[test]
    fn trace_out_everything_gives_trace_functional() {
        let ch = trace_out_channel(&[2], &[0]).unwrap();
        assert_eq!(ch.dim_out(), 1);
        let mut rng = SplitMix64::new(10);
        let rho = random_density(2, &mut rng);
        let out = ch.apply_matrix(rho.matrix()).unwrap();
        assert!((out.at(0, 0).re - 1.0).abs() < 1e-12);
        assert!(trace_out_channel(&[2, 2], &[]).is_err());
    }

    #[test]
    fn validate_cptp_diagnostics() {
        let ok = validate_cptp(&KrausChannel::identity(2)).unwrap();
        assert!(ok.pass && ok.tp_residual < 1e-12);

        // {I, I} fails completeness: construction rejects, diagnostics report.
        let double = KrausChannel::new_unchecked(
            2,
            2,
            vec![CMat::identity(2), CMat::identity(2)],
        );
        let d = validate_cptp(&double).unwrap();
        assert!(!d.pass);
        assert!((d.tp_residual - sqrt(2.0)).abs() < 1e-12);
        assert!(matches!(
            KrausChannel::new(vec![CMat::identity(2), CMat::identity(2)]),
            Err(Error::NotTracePreserving { .. })
        ));

        let scaled =
            KrausChannel::new_unchecked(2, 2, vec![CMat::identity(2).scale_re(0.999)]);
        let d = validate_cptp(&scaled).unwrap();
        assert!(!d.pass);
        let expect = (1.0 - 0.999f64 * 0.999) * sqrt(2.0);
        assert!((d.tp_residual - expect).abs() < 1e-9, "residual {}", d.tp_residual);
    }

    #[test]
    fn preparation_channel_complement_carries_input_through() {
        let mut rng = SplitMix64::new(12);
        let sigma = random_density(2, &mut rng);
        let prep = preparation_channel(3, &sigma).unwrap();
        let comp = complementary(&prep);
        assert_eq!(comp.dim_out(), prep.kraus_count());
        assert!(validate_cptp(&comp).unwrap().pass);
        // env register order is (sigma-eig index, input basis); tracing out
        // the first factor must recover the input state exactly.
        let rho = random_density(3, &mut rng);
        let out = comp.apply_matrix(rho.matrix()).unwrap();
        let r = prep.kraus_count() / 3;
        let marg = partial_trace(&out, &[r, 3], &[1]).unwrap();
        let f = fidelity(&DensityMatrix::new(marg).unwrap(), &rho).unwrap();
        assert!((f - 1.0).abs() < 1e-8, "fidelity {f}");
    }

    #[test]
    fn reduced_keeps_action_and_shrinks_rank() {
        let mut rng = SplitMix64::new(14);
        let a = random_channel(2, 2, 2, &mut rng);
        let b = random_channel(2, 2, 2, &mut rng);
        let big = compose(&a, &b).unwrap(); // 4 kraus, rank <= 4
        let small = big.reduced().unwrap();
        assert!(small.kraus_count() <= 4);
        for _ in 0..10 {
            let rho = random_density(2, &mut rng);
            let x = big.apply_matrix(rho.matrix()).unwrap();
            let y = small.apply_matrix(rho.matrix()).unwrap();
            assert!(x.sub_mat(&y).frobenius_norm() < 1e-8);
        }
    }
}
