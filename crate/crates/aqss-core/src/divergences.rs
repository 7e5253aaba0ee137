//! Entropic and fidelity-based quantities: sandwiched Renyi divergence, the
//! q-function `q(rho, sigma) = |J^{1/2} (rho ⊗ sqrt(sigma))|_1`, mutual
//! informations in the von Neumann and Renyi-1/2 senses, and the channel
//! capacities built from them. All logarithms are natural (nats).

use alloc::vec::Vec;

use libm::{log, sqrt};

use crate::channels::{complementary, kraus_to_choi, ChoiMatrix, KrausChannel};
use crate::error::{Error, Result};
use crate::numkernel::{
    cr, eig_hermitian, partial_trace, psd_sqrt, purify, trace_norm, CMat, DensityMatrix,
    HermitianOperator, ZERO,
};
use crate::saddle::{
    maximize_over_densities, saddle_max_sigma_min_rho, AscentResult, SaddleResult, SolverConfig,
};

/// Relative eigenvalue cutoff defining numerical support.
const SUPPORT_CUTOFF: f64 = 1e-12;
/// Floor applied inside matrix logarithms to keep gradients finite.
const LOG_FLOOR: f64 = 1e-14;

/// Von Neumann entropy in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let eig = rho.eig()?;
    Ok(eig.values.iter().map(|&l| if l > 0.0 { -l * log(l) } else { 0.0 }).sum())
}

fn entropy_of_matrix(m: &CMat) -> Result<f64> {
    let eig = eig_hermitian(m)?;
    Ok(eig.values.iter().map(|&l| if l > 0.0 { -l * log(l) } else { 0.0 }).sum())
}

/// Umegaki relative entropy `D(rho || sigma) = tr rho (ln rho - ln sigma)`;
/// `+inf` when the support of `rho` escapes the support of `sigma`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimMismatch {
            left: rho.dim(),
            right: sigma.dim(),
            context: "relative_entropy",
        });
    }
    let se = sigma.eig()?;
    let smax = se.values.first().copied().unwrap_or(0.0);
    let cutoff = SUPPORT_CUTOFF * smax.max(1.0);
    let kernel = se.apply(|l| if l <= cutoff { 1.0 } else { 0.0 });
    let escaped = kernel.mul_mat(rho.matrix()).trace().re;
    if escaped > 1e-10 {
        return Ok(f64::INFINITY);
    }
    let ln_sigma = se.apply(|l| if l > cutoff { log(l) } else { 0.0 });
    let re = rho.eig()?;
    let neg_entropy: f64 = re.values.iter().map(|&l| if l > 0.0 { l * log(l) } else { 0.0 }).sum();
    let cross = rho.matrix().mul_mat(&ln_sigma).trace().re;
    Ok(neg_entropy - cross)
}

/// Sandwiched Renyi relative entropy of order `alpha`:
/// `(1/(alpha-1)) ln tr[(sigma^{(1-alpha)/(2 alpha)} rho
/// sigma^{(1-alpha)/(2 alpha)})^alpha]`, powers of `sigma` taken on its
/// support. For `alpha > 1` a support escape returns `+inf`.
pub fn sandwiched_renyi(rho: &DensityMatrix, sigma: &DensityMatrix, alpha: f64) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimMismatch {
            left: rho.dim(),
            right: sigma.dim(),
            context: "sandwiched_renyi",
        });
    }
    if !(alpha > 0.0) || alpha == 1.0 || !alpha.is_finite() {
        return Err(Error::InvalidParameter(alloc::format!(
            "alpha must be positive, finite, and != 1, got {alpha}"
        )));
    }
    let se = sigma.eig()?;
    let smax = se.values.first().copied().unwrap_or(0.0);
    let cutoff = SUPPORT_CUTOFF * smax.max(1.0);
    if alpha > 1.0 {
        let kernel = se.apply(|l| if l <= cutoff { 1.0 } else { 0.0 });
        if kernel.mul_mat(rho.matrix()).trace().re > 1e-10 {
            return Ok(f64::INFINITY);
        }
    }
    let p = (1.0 - alpha) / (2.0 * alpha);
    let sp = se.apply(|l| if l > cutoff { libm::pow(l, p) } else { 0.0 });
    let inner = sp.mul_mat(rho.matrix()).mul_mat(&sp);
    let eig = eig_hermitian(&inner)?;
    let tr: f64 = eig.values.iter().map(|&l| if l > 0.0 { libm::pow(l, alpha) } else { 0.0 }).sum();
    Ok(log(tr.max(f64::MIN_POSITIVE)) / (alpha - 1.0))
}

// ---------------------------------------------------------------------------
// q-function
// ---------------------------------------------------------------------------

/// Factored q-function engine for a fixed channel.
///
/// Stores `L` with `L^dag L = J` as per-row slices `L_a` of shape
/// `dim_in x dim_out` (for a Kraus channel, `L_a = K_a^dag`). Values and
/// gradients reduce to `rank x rank` eigenproblems:
/// `q(rho, sigma) = tr sqrt(B B^dag)` with `B = L (rho ⊗ sqrt(sigma))`,
/// by the left-unitary invariance of singular values.
#[derive(Debug, Clone)]
pub struct QKernel {
    dim_in: usize,
    dim_out: usize,
    slices: Vec<CMat>,
}

impl QKernel {
    /// Build from a channel: `L_a = K_a^dag`.
    pub fn from_channel(ch: &KrausChannel) -> Self {
        Self {
            dim_in: ch.dim_in(),
            dim_out: ch.dim_out(),
            slices: ch.kraus_ops().iter().map(|k| k.dagger()).collect(),
        }
    }

    /// Build from a Choi matrix through its eigendecomposition.
    pub fn from_choi(j: &ChoiMatrix) -> Result<Self> {
        let eig = eig_hermitian(j.matrix())?;
        if let Some(&min) = eig.values.last() {
            if min < -1e-6 {
                return Err(Error::NotCompletelyPositive { min_eig: min });
            }
        }
        let (din, dout) = (j.dim_in(), j.dim_out());
        let mut slices = Vec::new();
        for (idx, &lam) in eig.values.iter().enumerate() {
            if lam <= crate::channels::KRAUS_RANK_CUTOFF {
                continue;
            }
            let w = sqrt(lam);
            let mut s = CMat::zeros(din, dout);
            for i in 0..din {
                for m in 0..dout {
                    s.set(i, m, eig.vectors.at(i * dout + m, idx).conj() * cr(w));
                }
            }
            slices.push(s);
        }
        if slices.is_empty() {
            return Err(Error::NotCompletelyPositive { min_eig: 0.0 });
        }
        Ok(Self { dim_in: din, dim_out: dout, slices })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn rank(&self) -> usize {
        self.slices.len()
    }

    /// Channel action `N(X) = sum_a L_a^dag X L_a`.
    pub fn channel_output(&self, x: &CMat) -> CMat {
        let mut out = CMat::zeros(self.dim_out, self.dim_out);
        for s in &self.slices {
            out = out.add_mat(&s.dagger().mul_mat(x).mul_mat(s));
        }
        out
    }

    /// Rows of `B` as matrices: `Y_a = rho^T L_a sqrt(sigma)`.
    fn b_slices(&self, rho_t: &CMat, sigma_sqrt: &CMat) -> Vec<CMat> {
        self.slices.iter().map(|s| rho_t.mul_mat(s).mul_mat(sigma_sqrt)).collect()
    }

    /// Gram matrix `B B^dag`, entries `tr(Y_a Y_b^dag)`.
    fn gram(b: &[CMat]) -> CMat {
        let r = b.len();
        let mut g = CMat::zeros(r, r);
        for a in 0..r {
            for bb in a..r {
                let mut s = ZERO;
                for (x, y) in b[a].data().iter().zip(b[bb].data()) {
                    s += x * y.conj();
                }
                g.set(a, bb, s);
                if bb != a {
                    g.set(bb, a, s.conj());
                }
            }
        }
        g
    }

    /// q-value for density `rho` and the PSD square root of `sigma`.
    pub fn q(&self, rho: &CMat, sigma_sqrt: &CMat) -> Result<f64> {
        let b = self.b_slices(&rho.transpose(), sigma_sqrt);
        let g = Self::gram(&b);
        let eig = eig_hermitian(&g)?;
        Ok(eig.values.iter().map(|&l| if l > 0.0 { sqrt(l) } else { 0.0 }).sum())
    }

    /// q-value and its Hermitian subgradient in `rho` at fixed `sigma`,
    /// from the trace-norm polar factor of `B`.
    pub fn q_grad_rho(&self, rho: &CMat, sigma_sqrt: &CMat) -> Result<(f64, CMat)> {
        let rho_t = rho.transpose();
        let b = self.b_slices(&rho_t, sigma_sqrt);
        let g = Self::gram(&b);
        let eig = eig_hermitian(&g)?;
        let r = self.slices.len();
        let lam_max = eig.values.first().copied().unwrap_or(0.0).max(0.0);
        let floor = 1e-12 * lam_max.max(f64::MIN_POSITIVE);
        let q: f64 = eig.values.iter().map(|&l| if l > 0.0 { sqrt(l) } else { 0.0 }).sum();

        // Polar factor D = U W^dag of B with W = B^dag U / s; columns of
        // T = W U^dag reshape to T_a, and dq = Re tr(Z drho) with
        // Z = sum_a T_a sqrt(sigma)^T L_a^T.
        let n = self.dim_in * self.dim_out;
        let mut t = CMat::zeros(n, r);
        for (idx, &lam) in eig.values.iter().enumerate() {
            if lam <= floor {
                continue;
            }
            let s_inv = cr(1.0 / sqrt(lam));
            let mut w = alloc::vec![ZERO; n];
            for a in 0..r {
                let ua = eig.vectors.at(a, idx);
                if ua == ZERO {
                    continue;
                }
                let scale = ua * s_inv;
                for (pos, &bval) in b[a].data().iter().enumerate() {
                    w[pos] += bval.conj() * scale;
                }
            }
            for a in 0..r {
                let ua_c = eig.vectors.at(a, idx).conj();
                for (pos, &wv) in w.iter().enumerate() {
                    *t.at_mut(pos, a) += wv * ua_c;
                }
            }
        }
        let sig_t = sigma_sqrt.transpose();
        let mut z = CMat::zeros(self.dim_in, self.dim_in);
        for (a, la) in self.slices.iter().enumerate() {
            let ta = CMat::from_fn(self.dim_in, self.dim_out, |i, m| t.at(i * self.dim_out + m, a));
            z = z.add_mat(&ta.mul_mat(&sig_t).mul_mat(&la.transpose()));
        }
        Ok((q, z.hermitize()))
    }

    /// q-value and its Hermitian supergradient in `sigma` at fixed `rho`,
    /// from `q = tr sqrt(omega)` with `omega = L (rho^2 ⊗ sigma) L^dag`:
    /// supergradient `(1/2) tr_in[L^dag omega^{-1/2} L (rho^2 ⊗ I)]` on the
    /// support of `omega`.
    pub fn q_grad_sigma(&self, rho: &CMat, sigma_sqrt: &CMat) -> Result<(f64, CMat)> {
        let rho_t = rho.transpose();
        let b = self.b_slices(&rho_t, sigma_sqrt);
        let g = Self::gram(&b);
        let eig = eig_hermitian(&g)?;
        let q: f64 = eig.values.iter().map(|&l| if l > 0.0 { sqrt(l) } else { 0.0 }).sum();
        let lam_max = eig.values.first().copied().unwrap_or(0.0).max(0.0);
        let floor = 1e-12 * lam_max.max(f64::MIN_POSITIVE);
        let r = self.slices.len();
        let mut omega_inv_sqrt = CMat::zeros(r, r);
        for (idx, &lam) in eig.values.iter().enumerate() {
            if lam <= floor {
                continue;
            }
            let w = cr(1.0 / sqrt(lam));
            for a in 0..r {
                let va = eig.vectors.at(a, idx) * w;
                for bb in 0..r {
                    *omega_inv_sqrt.at_mut(a, bb) += va * eig.vectors.at(bb, idx).conj();
                }
            }
        }
        // K[m][n] = sum_ab Omega[a][b] (L_b^T P conj(L_a))[n][m], P = rho^2.
        let p = rho.mul_mat(rho);
        let pla: Vec<CMat> = self.slices.iter().map(|la| p.mul_mat(&la.conj())).collect();
        let mut k = CMat::zeros(self.dim_out, self.dim_out);
        for a in 0..r {
            for bb in 0..r {
                let w = omega_inv_sqrt.at(a, bb);
                if w == ZERO {
                    continue;
                }
                let c = self.slices[bb].transpose().mul_mat(&pla[a]);
                for m in 0..self.dim_out {
                    for nn in 0..self.dim_out {
                        *k.at_mut(m, nn) += w * c.at(nn, m);
                    }
                }
            }
        }
        Ok((q, k.hermitize().scale_re(0.5)))
    }
}

/// PSD square root of a density matrix as a plain matrix.
pub fn density_sqrt(sigma: &DensityMatrix) -> Result<CMat> {
    Ok(psd_sqrt(sigma.hermitian())?.into_matrix())
}

/// Reference q-function straight from the definition,
/// `|J^{1/2} (rho ⊗ sqrt(sigma))|_1`, on the full-dimensional matrices.
pub fn q_function(rho: &DensityMatrix, sigma: &DensityMatrix, j: &ChoiMatrix) -> Result<f64> {
    if rho.dim() != j.dim_in() {
        return Err(Error::DimMismatch { left: rho.dim(), right: j.dim_in(), context: "q rho" });
    }
    if sigma.dim() != j.dim_out() {
        return Err(Error::DimMismatch {
            left: sigma.dim(),
            right: j.dim_out(),
            context: "q sigma",
        });
    }
    let j_sqrt = psd_sqrt(j.hermitian())?;
    let arg = rho.matrix().kron(&density_sqrt(sigma)?);
    trace_norm(&j_sqrt.matrix().mul_mat(&arg))
}

// ---------------------------------------------------------------------------
// Mutual informations and capacities
// ---------------------------------------------------------------------------

/// A channel mutual-information evaluation: the channel, the input state it
/// was evaluated at, and the value in nats.
#[derive(Debug, Clone)]
pub struct ChannelMI {
    pub channel: KrausChannel,
    pub input: DensityMatrix,
    pub value: f64,
}

impl ChannelMI {
    /// Evaluate `I(X:Y)` of `tau = (1 ⊗ ch)(|psi_rho><psi_rho|)`.
    pub fn evaluate(channel: &KrausChannel, input: &DensityMatrix) -> Result<Self> {
        let value = mutual_info_vn(channel, input)?;
        Ok(Self { channel: channel.clone(), input: input.clone(), value })
    }

    /// Evaluate the Renyi-1/2 variant `Itilde(X:Y)`.
    pub fn evaluate_renyi_half(
        channel: &KrausChannel,
        input: &DensityMatrix,
        cfg: &SolverConfig,
    ) -> Result<Self> {
        let value = mutual_info_renyi_half(channel, input, cfg)?;
        Ok(Self { channel: channel.clone(), input: input.clone(), value })
    }
}

/// Quantum mutual information `I(X:Y)` of `tau = (1 ⊗ ch)(|psi_rho><psi_rho|)`
/// in nats, from the entropy formula on the explicit joint state.
pub fn mutual_info_vn(ch: &KrausChannel, rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != ch.dim_in() {
        return Err(Error::DimMismatch {
            left: rho.dim(),
            right: ch.dim_in(),
            context: "mutual_info_vn",
        });
    }
    let tau = joint_state(ch, rho)?;
    let dx = rho.dim();
    let dy = ch.dim_out();
    let tau_x = partial_trace(&tau, &[dx, dy], &[0])?;
    let tau_y = partial_trace(&tau, &[dx, dy], &[1])?;
    let i = entropy_of_matrix(&tau_x)? + entropy_of_matrix(&tau_y)? - entropy_of_matrix(&tau)?;
    Ok(i.max(0.0))
}

/// `tau = (1 ⊗ ch)(|psi_rho><psi_rho|)` with the crate's purification
/// convention (reference factor first).
pub fn joint_state(ch: &KrausChannel, rho: &DensityMatrix) -> Result<CMat> {
    let psi = purify(rho)?;
    let dx = rho.dim();
    let mut tau = CMat::zeros(dx * ch.dim_out(), dx * ch.dim_out());
    let proj = psi.projector();
    for k in ch.kraus_ops() {
        let lifted = CMat::identity(dx).kron(k);
        tau = tau.add_mat(&lifted.mul_mat(&proj).mul_mat(&lifted.dagger()));
    }
    Ok(tau)
}

/// Renyi-1/2 mutual information
/// `Itilde(X:Y) = -ln max_sigma q(rho, sigma)^2`; the sigma-maximization is a
/// concave program solved by projected supergradient ascent.
pub fn mutual_info_renyi_half(
    ch: &KrausChannel,
    rho: &DensityMatrix,
    cfg: &SolverConfig,
) -> Result<f64> {
    let kernel = QKernel::from_channel(ch);
    let res = crate::saddle::max_sigma_q(rho, &kernel, cfg)?;
    if !res.converged {
        return Err(Error::SolverNonConvergence { best: res.value, gap: res.fw_gap });
    }
    Ok((-2.0 * log(res.value.clamp(f64::MIN_POSITIVE, 1.0))).max(0.0))
}

/// Entanglement-assisted mutual-information functional
/// `g(omega) = S(omega) + S(N(omega)) - S(Nhat(omega))` with floored-log
/// gradients. Equals `I(X:Y)` at `omega = conj(rho)` and shares its maximum
/// over states (conjugation is a bijection of the density set).
pub struct EaObjective {
    forward: KrausChannel,
    complement: KrausChannel,
}

impl EaObjective {
    pub fn new(ch: &KrausChannel) -> Self {
        Self { forward: ch.clone(), complement: complementary(ch) }
    }

    /// Value and gradient modulo additive multiples of the identity (which
    /// the simplex geometry quotients out).
    pub fn value_and_grad(&self, omega: &DensityMatrix) -> Result<(f64, CMat)> {
        let x = omega.matrix();
        let nx = self.forward.apply_matrix(x)?;
        let cx = self.complement.apply_matrix(x)?;
        let (s0, ln0) = entropy_and_log(x)?;
        let (s1, ln1) = entropy_and_log(&nx)?;
        let (s2, ln2) = entropy_and_log(&cx)?;
        let value = s0 + s1 - s2;
        let grad = ln0
            .scale_re(-1.0)
            .sub_mat(&self.forward.apply_adjoint(&ln1)?)
            .add_mat(&self.complement.apply_adjoint(&ln2)?);
        Ok((value, grad.hermitize()))
    }
}

fn entropy_and_log(m: &CMat) -> Result<(f64, CMat)> {
    let eig = eig_hermitian(m)?;
    let s = eig.values.iter().map(|&l| if l > 0.0 { -l * log(l) } else { 0.0 }).sum();
    let ln = eig.apply(|l| log(l.max(LOG_FLOOR)));
    Ok((s, ln))
}

/// Result of a capacity computation.
#[derive(Debug, Clone)]
pub struct CapacityResult {
    /// Capacity value in nats.
    pub value: f64,
    /// Maximizing channel-input state.
    pub argmax: DensityMatrix,
    /// Frank-Wolfe stationarity gap on the density set at the reported state.
    pub fw_gap: f64,
    pub converged: bool,
}

/// Entanglement-assisted classical capacity `C = max I(X:Y)` by projected
/// gradient ascent on the concave entropy functional, with restarts.
pub fn capacity_ea(ch: &KrausChannel, cfg: &SolverConfig) -> Result<CapacityResult> {
    let obj = EaObjective::new(ch);
    let dim = ch.dim_in();
    let mut starts = alloc::vec![DensityMatrix::maximally_mixed(dim)];
    let mut rng = crate::rng::SplitMix64::stream(cfg.seed, 0xEA);
    for _ in 1..cfg.restarts.max(1) {
        starts.push(random_density_for_start(dim, &mut rng));
    }
    let res: AscentResult = maximize_over_densities(dim, |w| obj.value_and_grad(w), &starts, cfg)?;
    if !res.converged {
        return Err(Error::SolverNonConvergence { best: res.value, gap: res.fw_gap });
    }
    Ok(CapacityResult {
        value: res.value.max(0.0),
        argmax: res.argmax,
        fw_gap: res.fw_gap,
        converged: res.converged,
    })
}

/// Renyi-1/2 entanglement-assisted capacity
/// `Ctilde = -ln(max_sigma min_rho q^2)`, via the saddle solver; returns the
/// value together with the certified saddle.
pub fn capacity_renyi_half(ch: &KrausChannel, cfg: &SolverConfig) -> Result<(f64, SaddleResult)> {
    let j = kraus_to_choi(ch);
    let saddle = saddle_max_sigma_min_rho(&j, cfg)?;
    let q = saddle.value.clamp(f64::MIN_POSITIVE, 1.0);
    let value = (-2.0 * log(q)).max(0.0);
    if !saddle.converged {
        return Err(Error::SolverNonConvergence { best: value, gap: saddle.gap });
    }
    Ok((value, saddle))
}

pub(crate) fn random_density_for_start(
    dim: usize,
    rng: &mut crate::rng::SplitMix64,
) -> DensityMatrix {
    let g = CMat::from_fn(dim, dim, |_, _| {
        let (re, im) = rng.next_gaussian_pair();
        crate::numkernel::c(re, im)
    });
    let p = g.mul_mat(&g.dagger());
    let tr = p.trace().re.max(f64::MIN_POSITIVE);
    DensityMatrix::from_projected(p.scale_re(1.0 / tr))
}

/// Random Hermitian matrix; shared by gradient-check tests.
#[doc(hidden)]
pub fn hermitian_direction(dim: usize, rng: &mut crate::rng::SplitMix64) -> HermitianOperator {
    let g = CMat::from_fn(dim, dim, |_, _| {
        let (re, im) = rng.next_gaussian_pair();
        crate::numkernel::c(re, im)
    });
    HermitianOperator::from_hermitian_parts(g)
}
