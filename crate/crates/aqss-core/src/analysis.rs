//! Top-level quantities per authorized set and aggregated: secrecy leakage,
//! fidelity reconstructability (dual and primal routes), adversarial strength
//! `C` / `Ctilde`, diamond-distance brackets, and the numerical certification
//! that all routes agree.

use alloc::string::String;
use alloc::vec::Vec;

use libm::{exp, log, sqrt};

use crate::channels::{compose, KrausChannel};
use crate::divergences::{capacity_ea, QKernel};
use crate::error::{Error, Result};
use crate::qss::{
    all_authorized_sets, effective_channels, min_authorized_sets, AttackModel, AuthorizedSet,
    ThresholdScheme,
};
use crate::saddle::{
    optimize_recovery, saddle_on_kernel, stabilized_fidelity_at, stabilized_trace_distance_at,
    worst_case_input, worst_case_trace_distance, SolverConfig, WorstCaseResult,
};

/// Residual thresholds for the three-way equivalence certification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualThresholds {
    /// Saddle two-route residual `|exp(-Ctilde) - max_sigma F_dia|`
    /// (exact-math identity; tight).
    pub saddle: f64,
    /// Dual-vs-primal residual `|F_dual - F_primal|` (heuristic seesaw; loose).
    pub duality: f64,
}

impl Default for ResidualThresholds {
    fn default() -> Self {
        Self { saddle: 2e-5, duality: 5e-3 }
    }
}

/// Which authorized sets an analysis sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetPolicy {
    /// Only `|A| = t` (sufficient for the extremal quantities).
    MinimalOnly,
    /// Every `|A| >= t`; validates the minimality restriction empirically.
    AllAuthorized,
}

#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    pub solver: SolverConfig,
    pub seesaw: SolverConfig,
    pub sets: SetPolicy,
    pub thresholds: ResidualThresholds,
    /// Run the recovery seesaw (primal route). Sweeps skip it for speed.
    pub with_primal: bool,
    /// Also run the fidelity / trace-distance chain check on the recovered
    /// end-to-end channel `R* ∘ N_A` (requires `with_primal`).
    pub with_fvg: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            seesaw: SolverConfig::seesaw_default(),
            sets: SetPolicy::MinimalOnly,
            thresholds: ResidualThresholds::default(),
            with_primal: true,
            with_fvg: false,
        }
    }
}

/// Per-authorized-set quantities.
#[derive(Debug, Clone)]
pub struct SetReport {
    pub set: AuthorizedSet,
    /// `max_sigma F_dia(Nhat_A, V_sigma)`: the sigma-outer saddle route (q^2).
    pub secrecy_fid: f64,
    /// `Ctilde_A = -ln(min_rho max_sigma q^2)`: the rho-outer route, in nats.
    pub ctilde: f64,
    /// Entanglement-assisted capacity of the complement, in nats.
    pub c_ea: f64,
    /// Dual-route reconstruction fidelity; equals `secrecy_fid` by
    /// construction (shared subroutine, distinct report field).
    pub recon_fid_dual: f64,
    /// Seesaw estimate of `max_R F_dia(R ∘ N_A, I)`; `None` when skipped.
    pub recon_fid_primal: Option<f64>,
    pub primal_dual_gap: Option<f64>,
    /// Certification gap of the saddle solve (two-route residual in q).
    pub saddle_gap: f64,
    /// Diamond-distance bracket from the per-set fidelity quantities.
    pub diamond_lower: f64,
    pub diamond_upper: f64,
    /// Heuristic stabilized-trace-distance estimate at the seesaw recovery;
    /// a lower estimate of the true reconstruction diamond distance.
    pub diamond_primal_estimate: Option<f64>,
    /// Inequality-chain check on `R* ∘ N_A` when requested.
    pub fvg: Option<FvgReport>,
    pub converged: bool,
}

/// Aggregated analysis of one scheme under one attack.
#[derive(Debug, Clone)]
pub struct AnalysisReport {
    pub scheme_descriptor: String,
    pub attack_descriptor: String,
    pub sets: Vec<SetReport>,
    /// `1 - min_A max_sigma F_dia(Nhat_A, V_sigma)`.
    pub epsilon_secrecy: f64,
    /// Same quantity reported as the dual reconstructability certificate.
    pub epsilon_recon_dual: f64,
    pub epsilon_recon_primal: Option<f64>,
    /// `max_A C(Nhat_A)` in nats.
    pub strength_c: f64,
    /// `max_A Ctilde_A` in nats.
    pub strength_ctilde: f64,
    pub delta_lower: f64,
    pub delta_upper: f64,
    /// Worst per-set `|exp(-Ctilde_A) - secrecy_fid_A|`.
    pub saddle_route_residual: f64,
    /// Worst per-set `|secrecy_fid_A - recon_fid_primal_A|`.
    pub duality_residual: Option<f64>,
    pub diamond_primal_max: Option<f64>,
    pub all_converged: bool,
}

fn selected_sets(scheme: &ThresholdScheme, policy: SetPolicy) -> Vec<AuthorizedSet> {
    match policy {
        SetPolicy::MinimalOnly => min_authorized_sets(scheme),
        SetPolicy::AllAuthorized => all_authorized_sets(scheme),
    }
}

/// Full per-set computation: one saddle solve on the complement, one EA
/// capacity, and optionally the recovery seesaw on the forward channel.
pub fn analyze_set(
    scheme: &ThresholdScheme,
    attack: &AttackModel,
    set: &AuthorizedSet,
    opts: &AnalysisOptions,
) -> Result<SetReport> {
    let eff = effective_channels(scheme, attack, set)?;
    let kernel = QKernel::from_channel(&eff.complement);
    let saddle = saddle_on_kernel(&kernel, &opts.solver)?;
    let secrecy_fid = (saddle.max_min_value * saddle.max_min_value).clamp(0.0, 1.0);
    let minmax_fid = (saddle.min_max_value * saddle.min_max_value).clamp(0.0, 1.0);
    let ctilde = -log(minmax_fid.max(f64::MIN_POSITIVE));
    // A non-certified capacity still yields a partial report (flagged
    // below); other solver failures propagate.
    let (c_ea, cap_converged) = match capacity_ea(&eff.complement, &opts.solver) {
        Ok(cap) => (cap.value, cap.converged),
        Err(Error::SolverNonConvergence { best, .. }) => (best.max(0.0), false),
        Err(e) => return Err(e),
    };

    let (recon_fid_primal, primal_dual_gap, diamond_primal_estimate, fvg) = if opts.with_primal {
        let rec = optimize_recovery(&eff.forward, &opts.seesaw)?;
        let joint = compose(&rec.recovery, &eff.forward)?.reduced()?;
        let d_est = worst_case_trace_distance(&joint, &opts.seesaw)?;
        let fvg = if opts.with_fvg { Some(fvg_channel_check(&joint, &opts.seesaw)?) } else { None };
        (Some(rec.fidelity), Some((rec.fidelity - secrecy_fid).abs()), Some(d_est.value), fvg)
    } else {
        (None, None, None, None)
    };

    let eps_set = (1.0 - secrecy_fid).clamp(0.0, 1.0);
    let (diamond_lower, diamond_upper) = diamond_bounds(eps_set, c_ea)?;

    Ok(SetReport {
        set: set.clone(),
        secrecy_fid,
        ctilde: ctilde.max(0.0),
        c_ea,
        recon_fid_dual: secrecy_fid,
        recon_fid_primal,
        primal_dual_gap,
        saddle_gap: saddle.gap,
        diamond_lower,
        diamond_upper,
        diamond_primal_estimate,
        fvg,
        converged: saddle.converged && cap_converged,
    })
}

/// Analyze a scheme under an attack across the selected authorized sets.
pub fn analyze(
    scheme: &ThresholdScheme,
    attack: &AttackModel,
    opts: &AnalysisOptions,
) -> Result<AnalysisReport> {
    let sets = selected_sets(scheme, opts.sets);
    if sets.is_empty() {
        return Err(Error::InvalidParameter(String::from("no authorized sets selected")));
    }
    let mut reports = Vec::with_capacity(sets.len());
    for set in &sets {
        reports.push(analyze_set(scheme, attack, set, opts)?);
    }

    let min_secrecy = reports.iter().map(|r| r.secrecy_fid).fold(f64::INFINITY, f64::min);
    let strength_c = reports.iter().map(|r| r.c_ea).fold(0.0, f64::max);
    let strength_ctilde = reports.iter().map(|r| r.ctilde).fold(0.0, f64::max);
    let epsilon_secrecy = (1.0 - min_secrecy).clamp(0.0, 1.0);
    let saddle_route_residual =
        reports.iter().map(|r| (exp(-r.ctilde) - r.secrecy_fid).abs()).fold(0.0, f64::max);
    let epsilon_recon_primal = if opts.with_primal {
        Some(
            (1.0 - reports.iter().filter_map(|r| r.recon_fid_primal).fold(f64::INFINITY, f64::min))
                .clamp(0.0, 1.0),
        )
    } else {
        None
    };
    let duality_residual = if opts.with_primal {
        Some(reports.iter().filter_map(|r| r.primal_dual_gap).fold(0.0, f64::max))
    } else {
        None
    };
    let diamond_primal_max = if opts.with_primal {
        Some(reports.iter().filter_map(|r| r.diamond_primal_estimate).fold(0.0, f64::max))
    } else {
        None
    };
    let (delta_lower, delta_upper) = diamond_bounds(epsilon_secrecy, strength_c)?;
    let all_converged = reports.iter().all(|r| r.converged);

    Ok(AnalysisReport {
        scheme_descriptor: alloc::format!(
            "(({},{})) threshold, secret dim {}, share dim {}",
            scheme.threshold(),
            scheme.players(),
            scheme.secret_dim(),
            scheme.share_dim()
        ),
        attack_descriptor: String::from(attack.label()),
        sets: reports,
        epsilon_secrecy,
        epsilon_recon_dual: epsilon_secrecy,
        epsilon_recon_primal,
        strength_c,
        strength_ctilde,
        delta_lower,
        delta_upper,
        saddle_route_residual,
        duality_residual,
        diamond_primal_max,
        all_converged,
    })
}

/// Secrecy leakage `eps = 1 - min_A max_sigma F_dia(Nhat_A, V_sigma)` over
/// the given sets; returns the per-set fidelities alongside.
pub fn secrecy_epsilon(
    scheme: &ThresholdScheme,
    attack: &AttackModel,
    sets: &[AuthorizedSet],
    cfg: &SolverConfig,
) -> Result<(f64, Vec<f64>)> {
    let mut fids = Vec::with_capacity(sets.len());
    for set in sets {
        let eff = effective_channels(scheme, attack, set)?;
        let kernel = QKernel::from_channel(&eff.complement);
        let saddle = saddle_on_kernel(&kernel, cfg)?;
        if !saddle.converged {
            return Err(Error::SolverNonConvergence { best: saddle.value, gap: saddle.gap });
        }
        fids.push((saddle.max_min_value * saddle.max_min_value).clamp(0.0, 1.0));
    }
    let eps = (1.0 - fids.iter().copied().fold(f64::INFINITY, f64::min)).clamp(0.0, 1.0);
    Ok((eps, fids))
}

/// Dual-route reconstructability: identical computation path to
/// [`secrecy_epsilon`], reported as the reconstruction certificate.
pub fn reconstructability_dual(
    scheme: &ThresholdScheme,
    attack: &AttackModel,
    sets: &[AuthorizedSet],
    cfg: &SolverConfig,
) -> Result<(f64, Vec<f64>)> {
    secrecy_epsilon(scheme, attack, sets, cfg)
}

/// Primal-route reconstructability by the recovery seesaw; returns
/// `(eps_primal, per-set fidelities, per-set |primal - dual| residuals)`.
pub fn reconstructability_primal(
    scheme: &ThresholdScheme,
    attack: &AttackModel,
    sets: &[AuthorizedSet],
    cfg: &SolverConfig,
) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let (_, dual_fids) = secrecy_epsilon(scheme, attack, sets, cfg)?;
    let seesaw_cfg = SolverConfig { tol: cfg.tol.max(1e-3), ..*cfg };
    let mut fids = Vec::with_capacity(sets.len());
    let mut gaps = Vec::with_capacity(sets.len());
    for (set, dual) in sets.iter().zip(&dual_fids) {
        let eff = effective_channels(scheme, attack, set)?;
        let rec = optimize_recovery(&eff.forward, &seesaw_cfg)?;
        fids.push(rec.fidelity);
        gaps.push((rec.fidelity - dual).abs());
    }
    let eps = (1.0 - fids.iter().copied().fold(f64::INFINITY, f64::min)).clamp(0.0, 1.0);
    Ok((eps, fids, gaps))
}

/// Adversarial strength: `C = max_A C(Nhat_A)`, `Ctilde = max_A Ctilde_A`.
pub fn adversary_strength(
    scheme: &ThresholdScheme,
    attack: &AttackModel,
    sets: &[AuthorizedSet],
    cfg: &SolverConfig,
) -> Result<(f64, f64, Vec<(f64, f64)>)> {
    let mut per_set = Vec::with_capacity(sets.len());
    for set in sets {
        let eff = effective_channels(scheme, attack, set)?;
        let cap = capacity_ea(&eff.complement, cfg)?;
        let kernel = QKernel::from_channel(&eff.complement);
        let saddle = saddle_on_kernel(&kernel, cfg)?;
        let minmax_fid = (saddle.min_max_value * saddle.min_max_value).clamp(0.0, 1.0);
        let ctilde = (-log(minmax_fid.max(f64::MIN_POSITIVE))).max(0.0);
        if cap.value < ctilde - 1e-4 {
            return Err(Error::SolverNonConvergence { best: cap.value, gap: ctilde - cap.value });
        }
        per_set.push((cap.value, ctilde));
    }
    let c = per_set.iter().map(|p| p.0).fold(0.0, f64::max);
    let ctilde = per_set.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok((c, ctilde, per_set))
}

/// Two-sided diamond-distance bracket from a fidelity-reconstructability
/// `eps` and a strength `C` (nats): `lower = eps`,
/// `upper = min(sqrt(eps), sqrt(1 - exp(-C)))`.
pub fn diamond_bounds(eps_fid: f64, c: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0 + 1e-12).contains(&eps_fid) || eps_fid.is_nan() {
        return Err(Error::InvalidParameter(alloc::format!("eps out of range [0,1]: {eps_fid}")));
    }
    if c < -1e-12 || c.is_nan() {
        return Err(Error::InvalidParameter(alloc::format!("strength must be >= 0: {c}")));
    }
    let eps = eps_fid.clamp(0.0, 1.0);
    let cap_term = sqrt((1.0 - exp(-c.max(0.0))).clamp(0.0, 1.0));
    Ok((eps, sqrt(eps).min(cap_term)))
}

/// Per-set cross-route agreement check.
#[derive(Debug, Clone)]
pub struct SetCheck {
    pub set: AuthorizedSet,
    pub exp_neg_ctilde: f64,
    pub secrecy_fid: f64,
    pub primal_fid: f64,
    /// `|exp(-Ctilde_A) - max_sigma F_dia|`: the two saddle routes.
    pub saddle_residual: f64,
    /// `|max_sigma F_dia - primal fidelity|`: duality vs seesaw.
    pub duality_residual: f64,
    pub saddle_pass: bool,
    pub duality_pass: bool,
}

#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub checks: Vec<SetCheck>,
    pub thresholds: ResidualThresholds,
    pub pass: bool,
}

/// Certify the three-way equivalence on every selected authorized set:
/// (a) `exp(-Ctilde_A)` from the rho-outer route, (b) `max_sigma F_dia` from
/// the sigma-outer route, (c) the primal recovery fidelity from the seesaw.
pub fn verify_equivalence(
    scheme: &ThresholdScheme,
    attack: &AttackModel,
    opts: &AnalysisOptions,
) -> Result<EquivalenceReport> {
    let sets = selected_sets(scheme, opts.sets);
    let mut checks = Vec::with_capacity(sets.len());
    let mut pass = true;
    for set in &sets {
        let eff = effective_channels(scheme, attack, set)?;
        let kernel = QKernel::from_channel(&eff.complement);
        let saddle = saddle_on_kernel(&kernel, &opts.solver)?;
        let secrecy_fid = (saddle.max_min_value * saddle.max_min_value).clamp(0.0, 1.0);
        let exp_neg_ctilde = (saddle.min_max_value * saddle.min_max_value).clamp(0.0, 1.0);
        let rec = optimize_recovery(&eff.forward, &opts.seesaw)?;
        let saddle_residual = (exp_neg_ctilde - secrecy_fid).abs();
        let duality_residual = (secrecy_fid - rec.fidelity).abs();
        let saddle_pass = saddle_residual <= opts.thresholds.saddle;
        let duality_pass = duality_residual <= opts.thresholds.duality;
        pass &= saddle_pass && duality_pass;
        checks.push(SetCheck {
            set: set.clone(),
            exp_neg_ctilde,
            secrecy_fid,
            primal_fid: rec.fidelity,
            saddle_residual,
            duality_residual,
            saddle_pass,
            duality_pass,
        });
    }
    Ok(EquivalenceReport { checks, thresholds: opts.thresholds, pass })
}

/// Report of the channel fidelity / trace-distance inequality chain
/// `1 - D <= F_dia <= 1 - D^2` using matched heuristic estimates.
#[derive(Debug, Clone)]
pub struct FvgReport {
    pub f_estimate: f64,
    pub d_estimate: f64,
    /// `F - (1 - D)`; nonnegative when the lower chain holds.
    pub lower_margin: f64,
    /// `(1 - D^2) - F`; nonnegative when the upper chain holds.
    pub upper_margin: f64,
    pub pass: bool,
}

/// Estimate `F_dia(ch, I)` and `D_dia(ch, I)` over a shared candidate pool
/// (both searches' restart endpoints, each evaluated under both metrics), so
/// the two same-direction heuristics satisfy the chain exactly up to
/// numerics; a violation indicates a bug, not estimation noise.
pub fn fvg_channel_check(ch: &KrausChannel, cfg: &SolverConfig) -> Result<FvgReport> {
    if ch.dim_in() != ch.dim_out() {
        return Err(Error::DimMismatch {
            left: ch.dim_in(),
            right: ch.dim_out(),
            context: "fvg_channel_check",
        });
    }
    let f_run: WorstCaseResult = worst_case_input(ch, cfg)?;
    let d_run: WorstCaseResult = worst_case_trace_distance(ch, cfg)?;
    let mut f_est = f64::INFINITY;
    let mut d_est: f64 = 0.0;
    for psi in f_run.candidates.iter().chain(d_run.candidates.iter()) {
        let f = stabilized_fidelity_at(ch, psi)?;
        let t = stabilized_trace_distance_at(ch, psi)?;
        f_est = f_est.min(f);
        d_est = d_est.max(t);
    }
    let lower_margin = f_est - (1.0 - d_est);
    let upper_margin = (1.0 - d_est * d_est) - f_est;
    let tol = 1e-6;
    Ok(FvgReport {
        f_estimate: f_est,
        d_estimate: d_est,
        lower_margin,
        upper_margin,
        pass: lower_margin >= -tol && upper_margin >= -tol,
    })
}
