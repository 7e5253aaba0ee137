//! Optimization engines: projected ascent/descent over density matrices with
//! Frank-Wolfe stationarity certificates, the convex-concave saddle solver
//! for `max_sigma min_rho q`, Dykstra projection onto the CPTP set, the
//! recovery-channel seesaw, and worst-case-input searches.

use alloc::vec;
use alloc::vec::Vec;

use libm::sqrt;

use crate::channels::{choi_to_kraus, compose, preparation_channel, ChoiMatrix, KrausChannel};
use crate::divergences::{density_sqrt, QKernel};
use crate::error::{Error, Result};
use crate::numkernel::{
    cr, density_project, eig_hermitian, partial_trace, vec_dot, vec_norm, CMat, DensityMatrix,
    HermitianOperator, PureState, C64, ZERO,
};
use crate::rng::SplitMix64;

/// Solver knobs; all randomness is derived from `seed`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Duality-gap / stationarity tolerance.
    pub tol: f64,
    pub restarts: usize,
    pub step_init: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { max_iters: 5000, tol: 1e-6, restarts: 16, step_init: 0.1, seed: 42 }
    }
}

impl SolverConfig {
    /// Looser tolerance for the non-certified seesaw.
    pub fn seesaw_default() -> Self {
        Self { tol: 1e-3, ..Self::default() }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

/// Outcome of a concave maximization (or convex minimization, negated) over
/// the density-matrix set.
#[derive(Debug, Clone)]
pub struct AscentResult {
    pub value: f64,
    pub argmax: DensityMatrix,
    /// Frank-Wolfe gap `max_{v in D} <G, v - x>`; upper-bounds the
    /// suboptimality for concave objectives.
    pub fw_gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Projected gradient ascent with backtracking line search over the density
/// set, one run per start, best result returned. The Frank-Wolfe gap at the
/// final iterate certifies suboptimality for concave objectives.
pub fn maximize_over_densities(
    dim: usize,
    f: impl Fn(&DensityMatrix) -> Result<(f64, CMat)>,
    starts: &[DensityMatrix],
    cfg: &SolverConfig,
) -> Result<AscentResult> {
    let mut best: Option<AscentResult> = None;
    let mut total_iters = 0usize;
    for start in starts {
        let run = ascend_from(dim, &f, start, cfg, cfg.max_iters, cfg.tol)?;
        total_iters += run.iterations;
        let better = match &best {
            None => true,
            Some(b) => run.value > b.value,
        };
        if better {
            best = Some(run);
        }
    }
    let mut out = best.ok_or(Error::InvalidParameter(alloc::string::String::from(
        "maximize_over_densities needs at least one start",
    )))?;
    out.iterations = total_iters;
    Ok(out)
}

fn ascend_from(
    _dim: usize,
    f: &impl Fn(&DensityMatrix) -> Result<(f64, CMat)>,
    start: &DensityMatrix,
    cfg: &SolverConfig,
    max_iters: usize,
    tol: f64,
) -> Result<AscentResult> {
    let mut x = start.clone();
    let (mut v, mut g) = f(&x)?;
    let mut t = cfg.step_init.max(1e-6);
    let mut fw_gap = f64::INFINITY;
    let mut iters = 0;
    let mut converged = false;
    while iters < max_iters {
        iters += 1;
        fw_gap = fw_gap_max(&g, &x)?;
        if fw_gap <= tol {
            converged = true;
            break;
        }
        // Backtracking projected step.
        let mut accepted = false;
        for _ in 0..36 {
            let cand_m = x.matrix().add_mat(&g.scale_re(t));
            let cand = density_project(&HermitianOperator::from_hermitian_parts(cand_m))?;
            let move_norm = cand.matrix().sub_mat(x.matrix()).frobenius_norm();
            if move_norm < 1e-15 {
                break;
            }
            let (vc, gc) = f(&cand)?;
            let gain = trace_inner(&g, &cand.matrix().sub_mat(x.matrix()));
            if vc >= v + 1e-4 * gain.max(0.0) - 1e-14 && vc > v - 1e-13 {
                x = cand;
                v = vc;
                g = gc;
                t = (t * 1.4).min(1e3);
                accepted = true;
                break;
            }
            t *= 0.4;
        }
        if !accepted {
            break; // stalled; gap reported as-is
        }
    }
    if !converged {
        fw_gap = fw_gap_max(&g, &x)?;
        converged = fw_gap <= tol;
    }
    Ok(AscentResult { value: v, argmax: x, fw_gap, iterations: iters, converged })
}

/// `max_{v density} <G, v> - <G, x>` = `lambda_max(G) - tr(G x)`.
fn fw_gap_max(g: &CMat, x: &DensityMatrix) -> Result<f64> {
    let eig = eig_hermitian(g)?;
    let lam_max = eig.values.first().copied().unwrap_or(0.0);
    Ok((lam_max - trace_inner(g, x.matrix())).max(0.0))
}

fn trace_inner(a: &CMat, b: &CMat) -> f64 {
    a.mul_mat(b).trace().re
}

// ---------------------------------------------------------------------------
// q-function optimizations
// ---------------------------------------------------------------------------

/// Result of the inner convex minimization `min_rho q(rho, sigma)`.
#[derive(Debug, Clone)]
pub struct MinRhoResult {
    /// `q^2` at the minimizer: the stabilized fidelity against the
    /// preparation channel of `sigma`.
    pub value: f64,
    /// `q` at the minimizer.
    pub q: f64,
    pub rho_star: DensityMatrix,
    pub fw_gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Convex minimization of `rho -> q(rho, sigma)` by projected subgradient
/// descent with line search; the Frank-Wolfe gap certifies stationarity.
pub fn min_rho_q(sigma: &DensityMatrix, j: &ChoiMatrix, cfg: &SolverConfig) -> Result<MinRhoResult> {
    let kernel = QKernel::from_choi(j)?;
    if sigma.dim() != kernel.dim_out() {
        return Err(Error::DimMismatch {
            left: sigma.dim(),
            right: kernel.dim_out(),
            context: "min_rho_q sigma",
        });
    }
    let ss = density_sqrt(sigma)?;
    let starts = rho_starts(kernel.dim_in(), cfg, 0x01F0);
    let run = min_rho_q_kernel(&kernel, &ss, &starts, cfg.max_iters, cfg.tol)?;
    Ok(run)
}

pub(crate) fn rho_starts(dim: usize, cfg: &SolverConfig, tag: u64) -> Vec<DensityMatrix> {
    let mut starts = vec![DensityMatrix::maximally_mixed(dim)];
    let mut rng = SplitMix64::stream(cfg.seed, tag);
    for _ in 1..cfg.restarts.clamp(1, 8) {
        starts.push(crate::divergences::random_density_for_start(dim, &mut rng));
    }
    starts
}

pub(crate) fn min_rho_q_kernel(
    kernel: &QKernel,
    sigma_sqrt: &CMat,
    starts: &[DensityMatrix],
    max_iters: usize,
    tol: f64,
) -> Result<MinRhoResult> {
    let dim = kernel.dim_in();
    let cfg = SolverConfig { max_iters, tol, ..SolverConfig::default() };
    // minimize q == maximize -q
    let f = |rho: &DensityMatrix| -> Result<(f64, CMat)> {
        let (q, g) = kernel.q_grad_rho(rho.matrix(), sigma_sqrt)?;
        Ok((-q, g.scale_re(-1.0)))
    };
    let res = maximize_over_densities(dim, f, starts, &cfg)?;
    let q = (-res.value).max(0.0);
    Ok(MinRhoResult {
        value: (q * q).clamp(0.0, 1.0),
        q,
        rho_star: res.argmax,
        fw_gap: res.fw_gap,
        iterations: res.iterations,
        converged: res.converged,
    })
}

/// Concave maximization of `sigma -> q(rho, sigma)`; restarts include the
/// maximally mixed state and the channel output at `rho`.
pub fn max_sigma_q(
    rho: &DensityMatrix,
    kernel: &QKernel,
    cfg: &SolverConfig,
) -> Result<AscentResult> {
    if rho.dim() != kernel.dim_in() {
        return Err(Error::DimMismatch {
            left: rho.dim(),
            right: kernel.dim_in(),
            context: "max_sigma_q rho",
        });
    }
    let starts = sigma_starts(rho, kernel, cfg, 0x51F0);
    max_sigma_q_kernel(rho, kernel, &starts, cfg.max_iters, cfg.tol)
}

pub(crate) fn sigma_starts(
    rho: &DensityMatrix,
    kernel: &QKernel,
    cfg: &SolverConfig,
    tag: u64,
) -> Vec<DensityMatrix> {
    let dim = kernel.dim_out();
    let mut starts = vec![DensityMatrix::maximally_mixed(dim)];
    let out = kernel.channel_output(rho.matrix());
    let tr = out.trace().re;
    if tr > 1e-12 {
        starts.push(DensityMatrix::from_projected(out.scale_re(1.0 / tr)));
    }
    let mut rng = SplitMix64::stream(cfg.seed, tag);
    for _ in starts.len()..cfg.restarts.clamp(2, 8) {
        starts.push(crate::divergences::random_density_for_start(dim, &mut rng));
    }
    starts
}

pub(crate) fn max_sigma_q_kernel(
    rho: &DensityMatrix,
    kernel: &QKernel,
    starts: &[DensityMatrix],
    max_iters: usize,
    tol: f64,
) -> Result<AscentResult> {
    let cfg = SolverConfig { max_iters, tol, ..SolverConfig::default() };
    let f = |sigma: &DensityMatrix| -> Result<(f64, CMat)> {
        let ss = density_sqrt(sigma)?;
        kernel.q_grad_sigma(rho.matrix(), &ss)
    };
    maximize_over_densities(kernel.dim_out(), f, starts, &cfg)
}

/// Certified value of the convex-concave program `max_sigma min_rho q`.
#[derive(Debug, Clone)]
pub struct SaddleResult {
    /// q at the saddle (midpoint of the two certified routes).
    pub value: f64,
    pub rho_star: DensityMatrix,
    pub sigma_star: DensityMatrix,
    /// `|value(min-max route) - value(max-min route)|`.
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Lower route: `min_rho q(rho, sigma_star)`.
    pub max_min_value: f64,
    /// Upper route: `max_sigma q(rho_star, sigma)`.
    pub min_max_value: f64,
}

/// Solve `max_sigma min_rho q(rho, sigma)` on a channel's Choi matrix.
///
/// Phase 1 runs an extragradient scheme (simultaneous projected ascent in
/// `sigma` / descent in `rho` with extrapolation, constant step with halving
/// on stagnation, iterate averaging over the last half). Phase 2 certifies
/// and polishes: ascent on the concave `phi(sigma) = min_rho q` and descent
/// on the convex `psi(rho) = max_sigma q` (Danskin supergradients, nested
/// solves warm-started); the bracket `phi <= q* <= psi` yields the gap.
pub fn saddle_max_sigma_min_rho(j: &ChoiMatrix, cfg: &SolverConfig) -> Result<SaddleResult> {
    let kernel = QKernel::from_choi(j)?;
    saddle_on_kernel(&kernel, cfg)
}

pub(crate) fn saddle_on_kernel(kernel: &QKernel, cfg: &SolverConfig) -> Result<SaddleResult> {
    let din = kernel.dim_in();
    let dout = kernel.dim_out();
    let mut iterations = 0usize;

    // ---- Phase 1: extragradient with averaging ----
    let mut rho = DensityMatrix::maximally_mixed(din);
    let mut sigma = {
        let out = kernel.channel_output(rho.matrix());
        let tr = out.trace().re;
        if tr > 1e-12 {
            DensityMatrix::from_projected(out.scale_re(1.0 / tr))
        } else {
            DensityMatrix::maximally_mixed(dout)
        }
    };
    let eg_iters = cfg.max_iters.min(400);
    let mut step = cfg.step_init;
    let mut avg_rho = CMat::zeros(din, din);
    let mut avg_sigma = CMat::zeros(dout, dout);
    let mut avg_count = 0usize;
    let mut last_probe = f64::INFINITY;
    for k in 0..eg_iters {
        iterations += 1;
        let ss = density_sqrt(&sigma)?;
        let (_, grho) = kernel.q_grad_rho(rho.matrix(), &ss)?;
        let (_, gsig) = kernel.q_grad_sigma(rho.matrix(), &ss)?;
        let rho_h = density_project(&HermitianOperator::from_hermitian_parts(
            rho.matrix().sub_mat(&grho.scale_re(step)),
        ))?;
        let sig_h = density_project(&HermitianOperator::from_hermitian_parts(
            sigma.matrix().add_mat(&gsig.scale_re(step)),
        ))?;
        let ss_h = density_sqrt(&sig_h)?;
        let (_, grho2) = kernel.q_grad_rho(rho_h.matrix(), &ss_h)?;
        let (_, gsig2) = kernel.q_grad_sigma(rho_h.matrix(), &ss_h)?;
        rho = density_project(&HermitianOperator::from_hermitian_parts(
            rho.matrix().sub_mat(&grho2.scale_re(step)),
        ))?;
        sigma = density_project(&HermitianOperator::from_hermitian_parts(
            sigma.matrix().add_mat(&gsig2.scale_re(step)),
        ))?;
        if k >= eg_iters / 2 {
            avg_rho = avg_rho.add_mat(rho.matrix());
            avg_sigma = avg_sigma.add_mat(sigma.matrix());
            avg_count += 1;
        }
        // Halve the step when progress stagnates.
        if k % 60 == 59 {
            let ss = density_sqrt(&sigma)?;
            let probe = kernel.q(rho.matrix(), &ss)?;
            if (probe - last_probe).abs() < 1e-7 {
                step *= 0.5;
            }
            last_probe = probe;
        }
    }
    let (rho_avg, sigma_avg) = if avg_count > 0 {
        let w = 1.0 / avg_count as f64;
        (
            density_project(&HermitianOperator::from_hermitian_parts(avg_rho.scale_re(w)))?,
            density_project(&HermitianOperator::from_hermitian_parts(avg_sigma.scale_re(w)))?,
        )
    } else {
        (rho.clone(), sigma.clone())
    };

    // ---- Phase 2: two certified routes, refined alternately ----
    // phi(sigma) = min_rho q is concave, psi(rho) = max_sigma q is convex;
    // Danskin super/subgradients come from the warm-started inner solves.
    // Line-search stalls at kinks fall back to Frank-Wolfe segment steps
    // toward the gradient's extremal eigenstate.
    let inner_tol = (cfg.tol * 1e-2).max(1e-10);
    let inner_iters = 400;
    let phi_eval = |sig: &DensityMatrix,
                    warm: &DensityMatrix,
                    iterations: &mut usize|
     -> Result<(f64, DensityMatrix, CMat)> {
        let ss = density_sqrt(sig)?;
        let starts = [warm.clone(), DensityMatrix::maximally_mixed(din)];
        let run = min_rho_q_kernel(kernel, &ss, &starts, inner_iters, inner_tol)?;
        *iterations += run.iterations;
        let (_, gsig) = kernel.q_grad_sigma(run.rho_star.matrix(), &ss)?;
        Ok((run.q, run.rho_star, gsig))
    };
    let psi_eval = |rho_pt: &DensityMatrix,
                    warm: &DensityMatrix,
                    iterations: &mut usize|
     -> Result<(f64, DensityMatrix, CMat)> {
        let starts = [warm.clone(), DensityMatrix::maximally_mixed(dout)];
        let run = max_sigma_q_kernel(rho_pt, kernel, &starts, inner_iters, inner_tol)?;
        *iterations += run.iterations;
        let ss = density_sqrt(&run.argmax)?;
        let (_, grho) = kernel.q_grad_rho(rho_pt.matrix(), &ss)?;
        Ok((run.value, run.argmax, grho))
    };

    let mut warm_rho = rho_avg.clone();
    let mut sigma_best = sigma_avg.clone();
    let (mut phi_best, rs, mut phi_grad) = phi_eval(&sigma_best, &warm_rho, &mut iterations)?;
    warm_rho = rs;
    {
        // the last (non-averaged) extragradient iterate is sometimes sharper
        let (v, rs, g) = phi_eval(&sigma, &warm_rho, &mut iterations)?;
        if v > phi_best {
            phi_best = v;
            sigma_best = sigma.clone();
            warm_rho = rs;
            phi_grad = g;
        }
    }
    let mut warm_sigma = sigma_best.clone();
    let mut rho_best = warm_rho.clone();
    let (mut psi_best, ws, mut psi_grad) = psi_eval(&rho_best, &warm_sigma, &mut iterations)?;
    warm_sigma = ws;
    {
        let (v, ws, g) = psi_eval(&rho_avg, &warm_sigma, &mut iterations)?;
        if v < psi_best {
            psi_best = v;
            rho_best = rho_avg.clone();
            warm_sigma = ws;
            psi_grad = g;
        }
    }

    let outer_cap = 80usize;
    let fw_grid = [1.0, 0.5, 0.25, 0.1, 0.04, 0.01, 0.003];
    for _pass in 0..5 {
        let gap_before = psi_best - phi_best;
        if gap_before <= cfg.tol * 0.5 {
            break;
        }

        // route A: ascend phi
        let mut t = cfg.step_init;
        for _ in 0..outer_cap {
            let fw = fw_gap_max(&phi_grad, &sigma_best)?;
            if fw <= cfg.tol * 0.25 {
                break;
            }
            let mut improved = false;
            for _ in 0..18 {
                let cand = density_project(&HermitianOperator::from_hermitian_parts(
                    sigma_best.matrix().add_mat(&phi_grad.scale_re(t)),
                ))?;
                if cand.matrix().sub_mat(sigma_best.matrix()).frobenius_norm() < 1e-14 {
                    break;
                }
                let (v, rs, g) = phi_eval(&cand, &warm_rho, &mut iterations)?;
                if v > phi_best + 1e-14 {
                    phi_best = v;
                    sigma_best = cand;
                    warm_rho = rs;
                    phi_grad = g;
                    t = (t * 1.4).min(1e3);
                    improved = true;
                    break;
                }
                t *= 0.4;
            }
            if !improved {
                // Frank-Wolfe segment toward the supergradient's top eigenstate
                let eig = eig_hermitian(&phi_grad)?;
                let vtx = eig.vectors.col(0);
                let vertex = CMat::outer(&vtx, &vtx);
                for &gamma in &fw_grid {
                    let cand = DensityMatrix::from_projected(
                        sigma_best
                            .matrix()
                            .scale_re(1.0 - gamma)
                            .add_mat(&vertex.scale_re(gamma)),
                    );
                    let (v, rs, g) = phi_eval(&cand, &warm_rho, &mut iterations)?;
                    if v > phi_best + 1e-14 {
                        phi_best = v;
                        sigma_best = cand;
                        warm_rho = rs;
                        phi_grad = g;
                        improved = true;
                        break;
                    }
                }
                if !improved {
                    break;
                }
                t = cfg.step_init;
            }
        }

        // route B: descend psi
        let mut t = cfg.step_init;
        for _ in 0..outer_cap {
            if psi_best - phi_best <= cfg.tol * 0.5 {
                break;
            }
            let mut improved = false;
            for _ in 0..18 {
                let cand = density_project(&HermitianOperator::from_hermitian_parts(
                    rho_best.matrix().sub_mat(&psi_grad.scale_re(t)),
                ))?;
                if cand.matrix().sub_mat(rho_best.matrix()).frobenius_norm() < 1e-14 {
                    break;
                }
                let (v, ws, g) = psi_eval(&cand, &warm_sigma, &mut iterations)?;
                if v < psi_best - 1e-14 {
                    psi_best = v;
                    rho_best = cand;
                    warm_sigma = ws;
                    psi_grad = g;
                    t = (t * 1.4).min(1e3);
                    improved = true;
                    break;
                }
                t *= 0.4;
            }
            if !improved {
                // Frank-Wolfe segment toward the subgradient's bottom eigenstate
                let eig = eig_hermitian(&psi_grad)?;
                let vtx = eig.vectors.col(din - 1);
                let vertex = CMat::outer(&vtx, &vtx);
                for &gamma in &fw_grid {
                    let cand = DensityMatrix::from_projected(
                        rho_best
                            .matrix()
                            .scale_re(1.0 - gamma)
                            .add_mat(&vertex.scale_re(gamma)),
                    );
                    let (v, ws, g) = psi_eval(&cand, &warm_sigma, &mut iterations)?;
                    if v < psi_best - 1e-14 {
                        psi_best = v;
                        rho_best = cand;
                        warm_sigma = ws;
                        psi_grad = g;
                        improved = true;
                        break;
                    }
                }
                if !improved {
                    break;
                }
                t = cfg.step_init;
            }
        }

        let gap_after = psi_best - phi_best;
        if gap_after <= cfg.tol * 0.5 {
            break;
        }
        // Nonsmooth outer stall with a live gap: run a small-step averaged
        // extragradient burst from the certified pair and feed the averages
        // back as candidates. The averaged iterates approach the saddle at
        // O(1/k), which the kink-bound outer loops cannot match.
        let burst_iters = 2500 * (_pass + 1);
        let burst_step = cfg.step_init * 0.2 / (1 + _pass) as f64;
        let mut r = rho_best.clone();
        let mut sg = sigma_best.clone();
        let mut sum_r = CMat::zeros(din, din);
        let mut sum_s = CMat::zeros(dout, dout);
        let mut count = 0usize;
        for k in 0..burst_iters {
            iterations += 1;
            let ss = density_sqrt(&sg)?;
            let (_, gr) = kernel.q_grad_rho(r.matrix(), &ss)?;
            let (_, gs) = kernel.q_grad_sigma(r.matrix(), &ss)?;
            let rh = density_project(&HermitianOperator::from_hermitian_parts(
                r.matrix().sub_mat(&gr.scale_re(burst_step)),
            ))?;
            let sh = density_project(&HermitianOperator::from_hermitian_parts(
                sg.matrix().add_mat(&gs.scale_re(burst_step)),
            ))?;
            let ssh = density_sqrt(&sh)?;
            let (_, gr2) = kernel.q_grad_rho(rh.matrix(), &ssh)?;
            let (_, gs2) = kernel.q_grad_sigma(rh.matrix(), &ssh)?;
            r = density_project(&HermitianOperator::from_hermitian_parts(
                r.matrix().sub_mat(&gr2.scale_re(burst_step)),
            ))?;
            sg = density_project(&HermitianOperator::from_hermitian_parts(
                sg.matrix().add_mat(&gs2.scale_re(burst_step)),
            ))?;
            if k >= burst_iters / 2 {
                sum_r = sum_r.add_mat(r.matrix());
                sum_s = sum_s.add_mat(sg.matrix());
                count += 1;
            }
        }
        if count > 0 {
            let w = 1.0 / count as f64;
            let r_avg = density_project(&HermitianOperator::from_hermitian_parts(
                sum_r.scale_re(w),
            ))?;
            let s_avg = density_project(&HermitianOperator::from_hermitian_parts(
                sum_s.scale_re(w),
            ))?;
            let (v, rs, g) = phi_eval(&s_avg, &warm_rho, &mut iterations)?;
            if v > phi_best {
                phi_best = v;
                sigma_best = s_avg;
                warm_rho = rs;
                phi_grad = g;
            }
            let (v, ws, g) = psi_eval(&r_avg, &warm_sigma, &mut iterations)?;
            if v < psi_best {
                psi_best = v;
                rho_best = r_avg;
                warm_sigma = ws;
                psi_grad = g;
            }
        }
        if (psi_best - phi_best) > gap_before * 0.98 {
            break; // no progress from any mechanism
        }
    }

    let gap = (psi_best - phi_best).abs();
    let value = 0.5 * (psi_best + phi_best);
    Ok(SaddleResult {
        value,
        rho_star: rho_best,
        sigma_star: sigma_best,
        gap,
        iterations,
        converged: gap <= cfg.tol,
        max_min_value: phi_best,
        min_max_value: psi_best,
    })
}

// ---------------------------------------------------------------------------
// CPTP projection (Dykstra)
// ---------------------------------------------------------------------------

const DYKSTRA_TOL: f64 = 1e-8;
const DYKSTRA_CAP: usize = 4000;

/// Dykstra alternating projections of a Hermitian matrix onto the CPTP Choi
/// set (PSD cone intersected with `tr_out J = I_in`).
pub fn dykstra_cptp_project(x: &HermitianOperator, dim_in: usize, dim_out: usize) -> Result<ChoiMatrix> {
    if x.dim() != dim_in * dim_out {
        return Err(Error::DimMismatch {
            left: x.dim(),
            right: dim_in * dim_out,
            context: "dykstra input",
        });
    }
    let mut cur = x.matrix().clone();
    let mut inc_psd = CMat::zeros(cur.rows(), cur.cols());
    let mut inc_aff = CMat::zeros(cur.rows(), cur.cols());
    let mut psd_residual = f64::INFINITY;
    let mut aff_residual = f64::INFINITY;
    for _ in 0..DYKSTRA_CAP {
        // PSD projection with memory
        let y_in = cur.add_mat(&inc_psd);
        let eig = eig_hermitian(&y_in)?;
        let y = eig.apply(|l| l.max(0.0));
        inc_psd = y_in.sub_mat(&y);
        // affine projection with memory
        let z_in = y.add_mat(&inc_aff);
        let z = tp_affine_project(&z_in, dim_in, dim_out)?;
        inc_aff = z_in.sub_mat(&z);
        cur = z;
        // residuals of the current point against both sets
        let eig = eig_hermitian(&cur)?;
        psd_residual = (-eig.values.last().copied().unwrap_or(0.0)).max(0.0);
        let marg = partial_trace(&cur, &[dim_in, dim_out], &[0])?;
        aff_residual = marg.sub_mat(&CMat::identity(dim_in)).frobenius_norm();
        if psd_residual < DYKSTRA_TOL && aff_residual < DYKSTRA_TOL {
            return Ok(ChoiMatrix::from_parts_unchecked(dim_in, dim_out, cur));
        }
    }
    Err(Error::SolverNonConvergence { best: psd_residual, gap: aff_residual })
}

/// Orthogonal projection onto `{X : tr_out X = I_in}`:
/// `X + ((I - tr_out X)/dim_out) ⊗ I_out`.
fn tp_affine_project(x: &CMat, dim_in: usize, dim_out: usize) -> Result<CMat> {
    let marg = partial_trace(x, &[dim_in, dim_out], &[0])?;
    let delta = CMat::identity(dim_in).sub_mat(&marg).scale_re(1.0 / dim_out as f64);
    Ok(x.add_mat(&delta.kron(&CMat::identity(dim_out))))
}

// ---------------------------------------------------------------------------
// Worst-case input searches
// ---------------------------------------------------------------------------

/// Outcome of a heuristic pure-state search; `candidates` holds the final
/// state of every restart so callers can form matched estimates.
#[derive(Debug, Clone)]
pub struct WorstCaseResult {
    pub value: f64,
    pub state: PureState,
    pub candidates: Vec<PureState>,
}

/// Entanglement fidelity of a channel against the identity at input `psi`
/// (reference factor first): `sum_k |<psi|(I ⊗ A_k)|psi>|^2`.
pub fn stabilized_fidelity_at(ch: &KrausChannel, psi: &PureState) -> Result<f64> {
    let d = ch.dim_in();
    if psi.dim() != d * d {
        return Err(Error::DimMismatch {
            left: psi.dim(),
            right: d * d,
            context: "stabilized fidelity input",
        });
    }
    let mut f = 0.0;
    for k in ch.kraus_ops() {
        let lifted = CMat::identity(d).kron(k);
        let out = lifted.mul_vec(psi.amplitudes());
        let c = vec_dot(psi.amplitudes(), &out);
        f += c.norm_sqr();
    }
    Ok(f.clamp(0.0, 1.0))
}

/// Stabilized trace distance to the identity at input `psi`:
/// `|(I ⊗ F)(Psi) - Psi|_1 / 2`.
pub fn stabilized_trace_distance_at(ch: &KrausChannel, psi: &PureState) -> Result<f64> {
    let d = ch.dim_in();
    let lifted_kraus: Vec<CMat> =
        ch.kraus_ops().iter().map(|k| CMat::identity(d).kron(k)).collect();
    let proj = psi.projector();
    let mut out = CMat::zeros(d * d, d * d);
    for l in &lifted_kraus {
        out = out.add_mat(&l.mul_mat(&proj).mul_mat(&l.dagger()));
    }
    let delta = out.sub_mat(&proj);
    let eig = eig_hermitian(&delta)?;
    Ok(0.5 * eig.values.iter().map(|l| l.abs()).sum::<f64>())
}

/// Worst-case (minimum) stabilized fidelity of `ch` against the identity over
/// pure inputs with a same-dimension reference, by Riemannian gradient
/// descent with restarts (always including the maximally entangled state).
/// The found value upper-bounds the true `F_dia(ch, I)`.
pub fn worst_case_input(ch: &KrausChannel, cfg: &SolverConfig) -> Result<WorstCaseResult> {
    if ch.dim_in() != ch.dim_out() {
        return Err(Error::DimMismatch {
            left: ch.dim_in(),
            right: ch.dim_out(),
            context: "worst_case_input needs a square channel",
        });
    }
    let d = ch.dim_in();
    let lifted: Vec<CMat> = ch.kraus_ops().iter().map(|k| CMat::identity(d).kron(k)).collect();
    let value_grad = |psi: &[C64]| -> (f64, Vec<C64>) {
        let mut f = 0.0;
        let mut grad = vec![ZERO; psi.len()];
        for l in &lifted {
            let lp = l.mul_vec(psi);
            let c = vec_dot(psi, &lp);
            f += c.norm_sqr();
            // d/d<psi| of |c|^2: conj(c) * L|psi> + c * L^dag|psi>
            let ldp = l.dagger().mul_vec(psi);
            for i in 0..grad.len() {
                grad[i] += lp[i] * c.conj() + ldp[i] * c;
            }
        }
        (f, grad)
    };
    let mut starts: Vec<PureState> = vec![PureState::maximally_entangled(d)];
    let mut rng = SplitMix64::stream(cfg.seed, 0xF1DE);
    for _ in 1..cfg.restarts.max(1) {
        starts.push(random_pure(d * d, &mut rng));
    }
    sphere_search(&value_grad, &starts, cfg, false)
}

/// Heuristic maximization of the stabilized trace distance to the identity
/// over pure inputs; the found value lower-bounds the true `D_dia(ch, I)`.
pub fn worst_case_trace_distance(ch: &KrausChannel, cfg: &SolverConfig) -> Result<WorstCaseResult> {
    if ch.dim_in() != ch.dim_out() {
        return Err(Error::DimMismatch {
            left: ch.dim_in(),
            right: ch.dim_out(),
            context: "worst_case_trace_distance needs a square channel",
        });
    }
    let d = ch.dim_in();
    let lifted: Vec<CMat> = ch.kraus_ops().iter().map(|k| CMat::identity(d).kron(k)).collect();
    let value_grad = |psi: &[C64]| -> (f64, Vec<C64>) {
        let proj = CMat::outer(psi, psi);
        let mut out = CMat::zeros(psi.len(), psi.len());
        for l in &lifted {
            out = out.add_mat(&l.mul_mat(&proj).mul_mat(&l.dagger()));
        }
        let delta = out.sub_mat(&proj);
        let eig = eig_hermitian(&delta).expect("trace-distance eig");
        let t = 0.5 * eig.values.iter().map(|l| l.abs()).sum::<f64>();
        // subgradient: S = sign(delta); dT = tr(S dDelta)/2,
        // dDelta = (I⊗F)(dPsi) - dPsi => H = ((I⊗F)^dag(S) - S)/2.
        let sign = eig.apply(|l| if l > 0.0 { 1.0 } else if l < 0.0 { -1.0 } else { 0.0 });
        let mut adj = CMat::zeros(psi.len(), psi.len());
        for l in &lifted {
            adj = adj.add_mat(&l.dagger().mul_mat(&sign).mul_mat(l));
        }
        let h = adj.sub_mat(&sign).scale_re(0.5);
        // gradient of <psi|H|psi> wrt <psi| is H|psi>
        let grad = h.mul_vec(psi);
        (t, grad)
    };
    let mut starts: Vec<PureState> = vec![PureState::maximally_entangled(d)];
    let mut rng = SplitMix64::stream(cfg.seed, 0xD1A0);
    for _ in 1..cfg.restarts.max(1) {
        starts.push(random_pure(d * d, &mut rng));
    }
    sphere_search(&value_grad, &starts, cfg, true)
}

fn random_pure(dim: usize, rng: &mut SplitMix64) -> PureState {
    let v: Vec<C64> = (0..dim)
        .map(|_| {
            let (re, im) = rng.next_gaussian_pair();
            C64::new(re, im)
        })
        .collect();
    PureState::normalized(v).expect("gaussian vector is nonzero")
}

/// Line-searched Riemannian gradient flow on the unit sphere; `maximize`
/// flips the direction. Always returns the best found plus all restart ends.
fn sphere_search(
    value_grad: &impl Fn(&[C64]) -> (f64, Vec<C64>),
    starts: &[PureState],
    cfg: &SolverConfig,
    maximize: bool,
) -> Result<WorstCaseResult> {
    let sign = if maximize { 1.0 } else { -1.0 };
    let mut candidates = Vec::with_capacity(starts.len());
    let mut best: Option<(f64, PureState)> = None;
    for start in starts {
        let mut psi: Vec<C64> = start.amplitudes().to_vec();
        let (mut v, mut g) = value_grad(&psi);
        let mut t = cfg.step_init.max(1e-3);
        for _ in 0..cfg.max_iters.min(300) {
            // tangent component
            let overlap = vec_dot(&psi, &g);
            let tangent: Vec<C64> =
                g.iter().zip(&psi).map(|(gi, pi)| gi - pi * overlap).collect();
            let tnorm = vec_norm(&tangent);
            if tnorm < 1e-10 {
                break;
            }
            let mut stepped = false;
            for _ in 0..25 {
                let cand: Vec<C64> = psi
                    .iter()
                    .zip(&tangent)
                    .map(|(pi, ti)| pi + ti * cr(sign * t))
                    .collect();
                let n = vec_norm(&cand);
                let cand: Vec<C64> = cand.iter().map(|z| z / cr(n)).collect();
                let (vc, gc) = value_grad(&cand);
                if sign * (vc - v) > 1e-14 {
                    psi = cand;
                    v = vc;
                    g = gc;
                    t = (t * 1.3).min(10.0);
                    stepped = true;
                    break;
                }
                t *= 0.4;
            }
            if !stepped {
                break;
            }
        }
        let state = PureState::normalized(psi).expect("search iterate is unit");
        let better = match &best {
            None => true,
            Some((bv, _)) => sign * (v - bv) > 0.0,
        };
        if better {
            best = Some((v, state.clone()));
        }
        candidates.push(state);
    }
    let (value, state) = best.expect("at least one start");
    Ok(WorstCaseResult { value, state, candidates })
}

// ---------------------------------------------------------------------------
// Recovery seesaw
// ---------------------------------------------------------------------------

/// Outcome of the recovery optimization `max_R F_dia(R ∘ N, I)`.
#[derive(Debug, Clone)]
pub struct RecoveryResult {
    /// Heuristic primal estimate of the best worst-case fidelity.
    pub fidelity: f64,
    pub recovery: KrausChannel,
    pub worst_input: PureState,
    pub rounds: usize,
    pub converged: bool,
}

/// Seesaw over recovery channels and adversarial inputs.
///
/// The R-step maximizes `min_psi` over the current adversarial pool; that is
/// a piecewise-linear concave function of the recovery's Choi matrix, solved
/// by projected supergradient steps with Dykstra CPTP projections (the
/// supergradient is the objective of the pool-worst input). The psi-step
/// finds a new worst-case input for the current recovery and grows the pool.
/// The reported value is the best (over visited recoveries) estimated
/// minimum over inputs; certification is delegated to the dual route.
pub fn optimize_recovery(n: &KrausChannel, cfg: &SolverConfig) -> Result<RecoveryResult> {
    let q = n.dim_in();
    let m = n.dim_out();
    let phi = PureState::maximally_entangled(q);

    // Initial recovery candidates: the Petz transpose map at the maximally
    // mixed input, and trace-and-prepare of the maximally mixed state.
    let mut candidates: Vec<KrausChannel> = Vec::new();
    if let Ok(petz) = petz_recovery(n) {
        candidates.push(petz);
    }
    candidates.push(preparation_channel(m, &DensityMatrix::maximally_mixed(q))?);

    let mut pool: Vec<PureState> = vec![phi.clone()];
    let inner_cfg = SolverConfig { restarts: 4, ..*cfg };

    let mut best_value = f64::NEG_INFINITY;
    let mut best_r = candidates[0].clone();
    let mut best_worst = phi.clone();
    for r in &candidates {
        let joint = compose(r, n)?.reduced()?;
        let wc = worst_case_input(&joint, &inner_cfg)?;
        if wc.value > best_value {
            best_value = wc.value;
            best_r = r.clone();
            best_worst = wc.state.clone();
        }
        pool.push(wc.state);
    }

    let mut j_r = crate::channels::kraus_to_choi(&best_r).matrix().clone();
    let mut rounds = 0usize;
    let mut converged = false;
    let max_rounds = 40usize;
    let mut stall = 0usize;
    let mut last = best_value;
    for _ in 0..max_rounds {
        rounds += 1;
        let objectives: Vec<CMat> =
            pool.iter().map(|psi| single_input_objective(n, psi)).collect::<Result<_>>()?;
        j_r = maximize_pool_min_over_cptp(&objectives, &j_r, m, q)?;
        let r = choi_to_kraus(&ChoiMatrix::from_parts_unchecked(m, q, j_r.clone()))?;
        // psi-step: find the worst input for this recovery.
        let joint = compose(&r, n)?.reduced()?;
        let mut wc = worst_case_input(&joint, &inner_cfg)?;
        // also probe pool members (matched evaluation keeps the estimate honest)
        for p in &pool {
            let f = stabilized_fidelity_at(&joint, p)?;
            if f < wc.value {
                wc.value = f;
                wc.state = p.clone();
            }
        }
        if wc.value > best_value {
            best_value = wc.value;
            best_r = r;
            best_worst = wc.state.clone();
        }
        pool.push(wc.state);
        if pool.len() > 20 {
            pool.remove(1); // keep the maximally entangled anchor
        }
        if (best_value - last).abs() < cfg.tol {
            stall += 1;
            if stall >= 2 && rounds >= 4 {
                converged = true;
                break;
            }
        } else {
            stall = 0;
        }
        // a perfect recovery cannot improve further
        if best_value >= 1.0 - 1e-9 {
            converged = true;
            break;
        }
        last = best_value;
    }

    Ok(RecoveryResult {
        fidelity: best_value.clamp(0.0, 1.0),
        recovery: best_r,
        worst_input: best_worst,
        rounds,
        converged,
    })
}

/// Petz transpose channel of `n` at the maximally mixed reference input:
/// Kraus `{rho^{1/2} K_i^dag M^{-1/2}}` with `M = N(I/q)`, completed to CPTP
/// by a Dykstra projection when `M` is singular.
pub fn petz_recovery(n: &KrausChannel) -> Result<KrausChannel> {
    let q = n.dim_in();
    let m_dim = n.dim_out();
    let mm = CMat::identity(q).scale_re(1.0 / q as f64);
    let m_out = n.apply_matrix(&mm)?;
    let eig = eig_hermitian(&m_out)?;
    let lam_max = eig.values.first().copied().unwrap_or(0.0);
    let m_inv_sqrt = eig.apply(|l| if l > 1e-12 * lam_max.max(1e-300) { 1.0 / sqrt(l) } else { 0.0 });
    let rho_sqrt = CMat::identity(q).scale_re(1.0 / sqrt(q as f64));
    let kraus: Vec<CMat> = n
        .kraus_ops()
        .iter()
        .map(|k| rho_sqrt.mul_mat(&k.dagger()).mul_mat(&m_inv_sqrt))
        .collect();
    let raw = KrausChannel::new_unchecked(m_dim, q, kraus);
    if raw.trace_preservation_residual() < crate::numkernel::TP_TOL {
        return KrausChannel::new(raw.kraus_ops().to_vec());
    }
    // Singular output support: project the Choi onto the CPTP set.
    let j = crate::channels::kraus_to_choi(&raw);
    let projected = dykstra_cptp_project(j.hermitian(), m_dim, q)?;
    choi_to_kraus(&projected)
}

/// `Omega[(u', y'), (u, y)] = sum_{x, x'} conj(psi[(x,y)]) psi[(x',y')]
/// tau[(x,u), (x',u')]` with `tau = (I ⊗ N)(|psi><psi|)`.
fn single_input_objective(n: &KrausChannel, psi: &PureState) -> Result<CMat> {
    let q = n.dim_in();
    let m = n.dim_out();
    if psi.dim() != q * q {
        return Err(Error::DimMismatch {
            left: psi.dim(),
            right: q * q,
            context: "recovery objective input",
        });
    }
    let proj = psi.projector();
    let mut tau = CMat::zeros(q * m, q * m);
    for k in n.kraus_ops() {
        let lifted = CMat::identity(q).kron(k);
        tau = tau.add_mat(&lifted.mul_mat(&proj).mul_mat(&lifted.dagger()));
    }
    let amps = psi.amplitudes();
    let mut omega = CMat::zeros(m * q, m * q);
    for u_p in 0..m {
        for y_p in 0..q {
            for u in 0..m {
                for y in 0..q {
                    let mut s = ZERO;
                    for x in 0..q {
                        for x_p in 0..q {
                            s += amps[x * q + y].conj()
                                * amps[x_p * q + y_p]
                                * tau.at(x * m + u, x_p * m + u_p);
                        }
                    }
                    omega.set(u_p * q + y_p, u * q + y, s);
                }
            }
        }
    }
    Ok(omega.hermitize())
}

/// Projected supergradient ascent of the piecewise-linear concave function
/// `g(J) = min_i tr(J Omega_i)` over the CPTP Choi set. Near-active pieces
/// (within a shrinking band of the minimum) are averaged to stabilize steps
/// along the min-ridge.
fn maximize_pool_min_over_cptp(
    objectives: &[CMat],
    warm: &CMat,
    dim_in: usize,
    dim_out: usize,
) -> Result<CMat> {
    let eval = |j: &CMat| -> f64 {
        objectives.iter().map(|o| trace_inner(o, j)).fold(f64::INFINITY, f64::min)
    };
    let mut j = warm.clone();
    let mut value = eval(&j);
    let mut t = 1.0f64;
    let mut flat = 0usize;
    for iter in 0..50 {
        // supergradient from the (near-)active pieces
        let scores: Vec<f64> = objectives.iter().map(|o| trace_inner(o, &j)).collect();
        let worst = scores.iter().copied().fold(f64::INFINITY, f64::min);
        let band = 1e-3 / (1.0 + iter as f64);
        let mut grad = CMat::zeros(j.rows(), j.cols());
        let mut active = 0usize;
        for (o, &sc) in objectives.iter().zip(&scores) {
            if sc <= worst + band {
                grad = grad.add_mat(o);
                active += 1;
            }
        }
        grad = grad.scale_re(1.0 / active as f64);

        let mut stepped = false;
        let before = value;
        for _ in 0..16 {
            let cand = dykstra_cptp_project(
                &HermitianOperator::from_hermitian_parts(j.add_mat(&grad.scale_re(t))),
                dim_in,
                dim_out,
            )?;
            let vc = eval(cand.matrix());
            if vc > value + 1e-12 {
                j = cand.matrix().clone();
                value = vc;
                t = (t * 1.5).min(1e4);
                stepped = true;
                break;
            }
            t *= 0.4;
        }
        if !stepped || t < 1e-10 {
            break;
        }
        if value - before < 1e-6 {
            flat += 1;
            if flat >= 4 {
                break;
            }
        } else {
            flat = 0;
        }
    }
    Ok(j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::testutil::{random_channel, random_density};
    use crate::channels::{
        complementary, dephasing, depolarizing, kraus_to_choi, preparation_channel, validate_cptp,
    };
    use crate::divergences::density_sqrt;

    #[test]
    fn min_rho_identity_channel_closed_form() {
        // identity channel (dim 2), sigma = I/2: q^2 = sum(lambda_i^2)/2,
        // minimized at rho = I/2 with value 1/4.
        let j = kraus_to_choi(&KrausChannel::identity(2));
        let mm = DensityMatrix::maximally_mixed(2);
        let cfg = SolverConfig { restarts: 4, ..Default::default() };
        let res = min_rho_q(&mm, &j, &cfg).unwrap();
        assert!((res.value - 0.25).abs() < 1e-7, "value {}", res.value);
        assert!(res.rho_star.matrix().sub_mat(mm.matrix()).frobenius_norm() < 1e-3);

        // dense-grid oracle over the Bloch ball: q^2 = (sum lam_i^2)/2
        let mut grid_min = f64::INFINITY;
        let steps = 40;
        for i in 0..=steps {
            let lam = i as f64 / steps as f64;
            let q2 = (lam * lam + (1.0 - lam) * (1.0 - lam)) / 2.0;
            grid_min = grid_min.min(q2);
        }
        assert!((res.value - grid_min).abs() < 1e-7);
    }

    #[test]
    fn min_rho_constant_channel_is_one() {
        let mut rng = SplitMix64::new(1);
        let sigma0 = random_density(2, &mut rng);
        let prep = preparation_channel(3, &sigma0).unwrap();
        let j = kraus_to_choi(&prep);
        let cfg = SolverConfig { restarts: 2, ..Default::default() };
        let res = min_rho_q(&sigma0, &j, &cfg).unwrap();
        assert!((res.value - 1.0).abs() < 1e-9, "value {}", res.value);
    }

    #[test]
    fn min_rho_monte_carlo_upper_bound() {
        let mut rng = SplitMix64::new(2);
        let ch = random_channel(2, 2, 2, &mut rng);
        let comp = complementary(&ch);
        let j = kraus_to_choi(&comp);
        let kernel = QKernel::from_channel(&comp);
        let sigma = random_density(comp.dim_out(), &mut rng);
        let ss = density_sqrt(&sigma).unwrap();
        let cfg = SolverConfig { restarts: 4, ..Default::default() };
        let res = min_rho_q(&sigma, &j, &cfg).unwrap();
        let mut sampled = f64::INFINITY;
        for _ in 0..10_000 {
            let rho = crate::divergences::random_density_for_start(2, &mut rng);
            let q = kernel.q(rho.matrix(), &ss).unwrap();
            sampled = sampled.min(q);
        }
        assert!(res.q <= sampled + 1e-4, "solver {} vs sampled {}", res.q, sampled);
    }

    #[test]
    fn max_sigma_identity_channel_flat_objective() {
        // identity channel at rho = I/d: q^2 = 1/d^2 for every sigma.
        let ch = KrausChannel::identity(3);
        let kernel = QKernel::from_channel(&ch);
        let mm = DensityMatrix::maximally_mixed(3);
        let cfg = SolverConfig { restarts: 3, ..Default::default() };
        let res = max_sigma_q(&mm, &kernel, &cfg).unwrap();
        assert!((res.value - 1.0 / 3.0).abs() < 1e-8, "q {}", res.value);
    }

    #[test]
    fn saddle_identity_channel() {
        for d in [2usize, 3] {
            let j = kraus_to_choi(&KrausChannel::identity(d));
            let cfg = SolverConfig { restarts: 4, ..Default::default() };
            let res = saddle_max_sigma_min_rho(&j, &cfg).unwrap();
            assert!(res.converged, "gap {}", res.gap);
            assert!(
                (res.value - 1.0 / d as f64).abs() < 1e-6,
                "d={d}: saddle value {} (want {})",
                res.value,
                1.0 / d as f64
            );
            let mm = DensityMatrix::maximally_mixed(d);
            assert!(res.rho_star.matrix().sub_mat(mm.matrix()).frobenius_norm() < 1e-2);
        }
    }

    #[test]
    fn saddle_constant_channel_is_one() {
        let mut rng = SplitMix64::new(3);
        let sigma0 = random_density(3, &mut rng);
        let prep = preparation_channel(2, &sigma0).unwrap();
        let j = kraus_to_choi(&prep);
        let cfg = SolverConfig { restarts: 2, ..Default::default() };
        let res = saddle_max_sigma_min_rho(&j, &cfg).unwrap();
        assert!(res.converged);
        assert!((res.value - 1.0).abs() < 1e-9, "value {}", res.value);
        assert!(res.gap < 1e-9);
    }

    #[test]
    fn saddle_routes_bracket_each_other() {
        let mut rng = SplitMix64::new(4);
        for _ in 0..4 {
            let ch = random_channel(2, 3, 2, &mut rng);
            let j = kraus_to_choi(&ch);
            let cfg = SolverConfig { restarts: 3, ..Default::default() };
            let res = saddle_max_sigma_min_rho(&j, &cfg).unwrap();
            assert!(
                res.max_min_value <= res.min_max_value + 1e-9,
                "weak duality violated: {} > {}",
                res.max_min_value,
                res.min_max_value
            );
            assert!(res.gap < 2e-5, "gap {}", res.gap);
        }
    }

    #[test]
    fn dykstra_fixed_point_and_feasibility() {
        let mut rng = SplitMix64::new(5);
        let ch = random_channel(2, 2, 2, &mut rng);
        let j = kraus_to_choi(&ch);
        let back = dykstra_cptp_project(j.hermitian(), 2, 2).unwrap();
        assert!(back.matrix().sub_mat(j.matrix()).frobenius_norm() < 1e-7);

        // identity matrix normalizes onto the TP slice
        let id = HermitianOperator::from_hermitian_parts(CMat::identity(4));
        let proj = dykstra_cptp_project(&id, 2, 2).unwrap();
        assert!(proj.trace_preservation_residual().unwrap() < 1e-7);
        assert!(proj.min_eigenvalue().unwrap() > -1e-8);
        assert!(proj.matrix().sub_mat(&CMat::identity(4).scale_re(0.5)).frobenius_norm() < 1e-6);

        // random Hermitian perturbation: feasible and close
        let noise = crate::divergences::hermitian_direction(4, &mut rng);
        let perturbed = HermitianOperator::from_hermitian_parts(
            j.matrix().add_mat(&noise.matrix().scale_re(0.1 / noise.matrix().frobenius_norm())),
        );
        let proj = dykstra_cptp_project(&perturbed, 2, 2).unwrap();
        assert!(proj.trace_preservation_residual().unwrap() < 1e-7);
        assert!(proj.min_eigenvalue().unwrap() > -1e-8);
        assert!(proj.matrix().sub_mat(j.matrix()).frobenius_norm() < 0.2);
        // projected channel passes CPTP validation
        let ch2 = choi_to_kraus(&proj).unwrap();
        assert!(validate_cptp(&ch2).unwrap().pass);
    }

    #[test]
    fn worst_case_identity_is_one() {
        let cfg = SolverConfig { restarts: 3, ..Default::default() };
        let res = worst_case_input(&KrausChannel::identity(2), &cfg).unwrap();
        assert!((res.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn worst_case_depolarizing_closed_form() {
        // fully depolarizing qubit: F_dia = 1/4 at the maximally entangled
        // input, D_dia = 3/4.
        let ch = depolarizing(2, 1.0).unwrap();
        let cfg = SolverConfig { restarts: 4, ..Default::default() };
        let f = worst_case_input(&ch, &cfg).unwrap();
        assert!((f.value - 0.25).abs() < 1e-6, "F {}", f.value);
        let d = worst_case_trace_distance(&ch, &cfg).unwrap();
        assert!((d.value - 0.75).abs() < 1e-6, "D {}", d.value);
    }

    #[test]
    fn worst_case_dephasing_monotone_in_noise() {
        let cfg = SolverConfig { restarts: 3, ..Default::default() };
        let mut last = 1.0;
        for p in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let ch = dephasing(2, p).unwrap();
            let res = worst_case_input(&ch, &cfg).unwrap();
            assert!(res.value <= last + 1e-9, "p={p}: {} > {last}", res.value);
            last = res.value;
        }
    }

    #[test]
    fn recovery_of_identity_channel_is_perfect() {
        let cfg = SolverConfig::seesaw_default();
        let res = optimize_recovery(&KrausChannel::identity(2), &cfg).unwrap();
        assert!(res.fidelity > 1.0 - 1e-6, "fidelity {}", res.fidelity);
    }

    #[test]
    fn recovery_of_constant_channel_hits_dual_value() {
        // constant channel from a qubit secret: max_R F_dia = 1/q^2 = 1/4.
        let mut rng = SplitMix64::new(6);
        let sigma0 = random_density(3, &mut rng);
        let n = preparation_channel(2, &sigma0).unwrap();
        let cfg = SolverConfig::seesaw_default();
        let res = optimize_recovery(&n, &cfg).unwrap();
        assert!((res.fidelity - 0.25).abs() < 2e-3, "fidelity {}", res.fidelity);
    }

    #[test]
    fn recovery_never_beaten_by_prepare_baseline() {
        let mut rng = SplitMix64::new(7);
        let cfg = SolverConfig::seesaw_default();
        for _ in 0..3 {
            let n = random_channel(2, 3, 2, &mut rng);
            let res = optimize_recovery(&n, &cfg).unwrap();
            assert!(res.fidelity <= 1.0 + 1e-12);
            let baseline_r =
                preparation_channel(3, &DensityMatrix::maximally_mixed(2)).unwrap();
            let joint = compose(&baseline_r, &n).unwrap().reduced().unwrap();
            let baseline = worst_case_input(&joint, &cfg).unwrap();
            assert!(
                res.fidelity >= baseline.value - 1e-9,
                "seesaw {} below prepare baseline {}",
                res.fidelity,
                baseline.value
            );
        }
    }

    #[test]
    fn petz_recovery_is_cptp_and_good_for_unitary() {
        // For a unitary channel the Petz map is its inverse.
        let u = crate::channels::weyl_operator(3, 1, 2);
        let ch = KrausChannel::new(vec![u]).unwrap();
        let petz = petz_recovery(&ch).unwrap();
        assert!(validate_cptp(&petz).unwrap().pass);
        let joint = compose(&petz, &ch).unwrap();
        let cfg = SolverConfig { restarts: 2, ..Default::default() };
        let wc = worst_case_input(&joint, &cfg).unwrap();
        assert!(wc.value > 1.0 - 1e-9);
    }
}
