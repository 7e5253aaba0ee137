//! Report serialization (JSON) and human-readable rendering.
//!
//! Every value in a report is reproducible from the scenario plus the seed;
//! the only non-deterministic field is `generated_unix_ms`.

use std::fmt::Write as _;

use serde::Serialize;

use aqss_core::analysis::{AnalysisReport, FvgReport, SetReport, ResidualThresholds};

use crate::scenario::ScenarioFile;

const LN2: f64 = core::f64::consts::LN_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Units {
    Nats,
    Bits,
}

impl Units {
    pub fn name(self) -> &'static str {
        match self {
            Units::Nats => "nats",
            Units::Bits => "bits",
        }
    }

    pub fn convert(self, nats: f64) -> f64 {
        match self {
            Units::Nats => nats,
            Units::Bits => nats / LN2,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ReportFile {
    pub tool: &'static str,
    pub version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_unix_ms: Option<u128>,
    pub seed: u64,
    pub units: &'static str,
    pub scenario: ScenarioFile,
    pub analysis: AnalysisJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationJson>,
}

#[derive(Debug, Serialize)]
pub struct AnalysisJson {
    pub scheme: String,
    pub attack: String,
    pub epsilon_secrecy: f64,
    pub epsilon_recon_dual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_recon_primal: Option<f64>,
    pub strength_c: f64,
    pub strength_ctilde: f64,
    pub delta_lower: f64,
    pub delta_upper: f64,
    pub saddle_route_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duality_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diamond_primal_max: Option<f64>,
    pub all_converged: bool,
    pub sets: Vec<SetJson>,
}

#[derive(Debug, Serialize)]
pub struct SetJson {
    /// 1-based player indices.
    pub set: Vec<usize>,
    pub secrecy_fid: f64,
    pub ctilde: f64,
    pub c_ea: f64,
    pub recon_fid_dual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recon_fid_primal: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub primal_dual_gap: Option<f64>,
    pub saddle_gap: f64,
    pub diamond_lower: f64,
    pub diamond_upper: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diamond_primal_estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fvg: Option<FvgJson>,
    pub converged: bool,
}

#[derive(Debug, Serialize)]
pub struct FvgJson {
    pub f_estimate: f64,
    pub d_estimate: f64,
    pub lower_margin: f64,
    pub upper_margin: f64,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct VerificationJson {
    pub saddle_threshold: f64,
    pub duality_threshold: f64,
    pub saddle_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duality_residual: Option<f64>,
    pub corollary_margin: Option<f64>,
    pub pass: bool,
}

impl From<&FvgReport> for FvgJson {
    fn from(r: &FvgReport) -> Self {
        Self {
            f_estimate: r.f_estimate,
            d_estimate: r.d_estimate,
            lower_margin: r.lower_margin,
            upper_margin: r.upper_margin,
            pass: r.pass,
        }
    }
}

fn set_json(r: &SetReport, units: Units) -> SetJson {
    SetJson {
        set: r.set.members().iter().map(|m| m + 1).collect(),
        secrecy_fid: r.secrecy_fid,
        ctilde: units.convert(r.ctilde),
        c_ea: units.convert(r.c_ea),
        recon_fid_dual: r.recon_fid_dual,
        recon_fid_primal: r.recon_fid_primal,
        primal_dual_gap: r.primal_dual_gap,
        saddle_gap: r.saddle_gap,
        diamond_lower: r.diamond_lower,
        diamond_upper: r.diamond_upper,
        diamond_primal_estimate: r.diamond_primal_estimate,
        fvg: r.fvg.as_ref().map(FvgJson::from),
        converged: r.converged,
    }
}

pub fn analysis_json(report: &AnalysisReport, units: Units) -> AnalysisJson {
    AnalysisJson {
        scheme: report.scheme_descriptor.clone(),
        attack: report.attack_descriptor.clone(),
        epsilon_secrecy: report.epsilon_secrecy,
        epsilon_recon_dual: report.epsilon_recon_dual,
        epsilon_recon_primal: report.epsilon_recon_primal,
        strength_c: units.convert(report.strength_c),
        strength_ctilde: units.convert(report.strength_ctilde),
        delta_lower: report.delta_lower,
        delta_upper: report.delta_upper,
        saddle_route_residual: report.saddle_route_residual,
        duality_residual: report.duality_residual,
        diamond_primal_max: report.diamond_primal_max,
        all_converged: report.all_converged,
        sets: report.sets.iter().map(|s| set_json(s, units)).collect(),
    }
}

/// Verification summary derived from a full (primal-inclusive) analysis:
/// the two-route saddle residual, the primal-dual residual, and the
/// diamond-corollary margin `sqrt(1 - exp(-C)) - D_estimate`.
pub fn verification_json(
    report: &AnalysisReport,
    thresholds: &ResidualThresholds,
) -> VerificationJson {
    let corollary_margin = report.diamond_primal_max.map(|d| {
        let cap = (1.0 - (-report.strength_c).exp()).max(0.0).sqrt();
        cap - d
    });
    let saddle_ok = report.saddle_route_residual <= thresholds.saddle;
    let duality_ok = report.duality_residual.map(|r| r <= thresholds.duality).unwrap_or(false);
    let fvg_ok = report
        .sets
        .iter()
        .all(|s| s.fvg.as_ref().map(|f| f.pass).unwrap_or(true));
    let corollary_ok = corollary_margin.map(|m| m >= -1e-4).unwrap_or(false);
    VerificationJson {
        saddle_threshold: thresholds.saddle,
        duality_threshold: thresholds.duality,
        saddle_residual: report.saddle_route_residual,
        duality_residual: report.duality_residual,
        corollary_margin,
        pass: saddle_ok && duality_ok && fvg_ok && corollary_ok && report.all_converged,
    }
}

/// Human-readable rendering of an analysis (plus optional verification).
pub fn render_text(
    report: &AnalysisReport,
    verification: Option<&VerificationJson>,
    units: Units,
) -> String {
    let mut out = String::new();
    let u = units.name();
    let _ = writeln!(out, "scheme : {}", report.scheme_descriptor);
    let _ = writeln!(out, "attack : {}", report.attack_descriptor);
    let _ = writeln!(out, "sets analyzed: {}", report.sets.len());
    let _ = writeln!(out);
    for s in &report.sets {
        let _ = writeln!(
            out,
            "set A = {}{}",
            s.set,
            if s.converged { "" } else { "   [NOT CONVERGED]" }
        );
        let _ = writeln!(out, "  max_sigma F_dia(Nhat_A, V_sigma) = {:.9}", s.secrecy_fid);
        let _ = writeln!(
            out,
            "  Ctilde_A = {:.9} {u}   C_A = {:.9} {u}   (saddle gap {:.3e})",
            units.convert(s.ctilde),
            units.convert(s.c_ea),
            s.saddle_gap
        );
        if let Some(p) = s.recon_fid_primal {
            let _ = writeln!(
                out,
                "  recon fidelity: dual {:.9} | primal {:.9} | gap {:.3e}",
                s.recon_fid_dual,
                p,
                s.primal_dual_gap.unwrap_or(f64::NAN)
            );
        } else {
            let _ = writeln!(out, "  recon fidelity (dual) = {:.9}", s.recon_fid_dual);
        }
        let _ = writeln!(
            out,
            "  diamond bracket [{:.9}, {:.9}]{}",
            s.diamond_lower,
            s.diamond_upper,
            match s.diamond_primal_estimate {
                Some(d) => format!("  primal estimate {d:.9}"),
                None => String::new(),
            }
        );
        if let Some(f) = &s.fvg {
            let _ = writeln!(
                out,
                "  fvg chain: F={:.9} D={:.9} margins [{:+.3e}, {:+.3e}] {}",
                f.f_estimate,
                f.d_estimate,
                f.lower_margin,
                f.upper_margin,
                if f.pass { "PASS" } else { "FAIL" }
            );
        }
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "epsilon_secrecy      = {:.9}", report.epsilon_secrecy);
    let _ = writeln!(out, "epsilon_recon (dual) = {:.9}", report.epsilon_recon_dual);
    if let Some(p) = report.epsilon_recon_primal {
        let _ = writeln!(out, "epsilon_recon (prim) = {p:.9}");
    }
    let _ = writeln!(out, "strength C           = {:.9} {u}", units.convert(report.strength_c));
    let _ = writeln!(
        out,
        "strength Ctilde      = {:.9} {u}",
        units.convert(report.strength_ctilde)
    );
    let _ = writeln!(
        out,
        "delta bracket        = [{:.9}, {:.9}]",
        report.delta_lower, report.delta_upper
    );
    let _ = writeln!(out, "two-route residual = {:.3e}", report.saddle_route_residual);
    if let Some(d) = report.duality_residual {
        let _ = writeln!(out, "primal-dual residual = {d:.3e}");
    }
    if let Some(v) = verification {
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "verify: saddle residual {:.3e} <= {:.1e} : {}",
            v.saddle_residual,
            v.saddle_threshold,
            pass_str(v.saddle_residual <= v.saddle_threshold)
        );
        if let Some(d) = v.duality_residual {
            let _ = writeln!(
                out,
                "verify: duality residual {:.3e} <= {:.1e} : {}",
                d,
                v.duality_threshold,
                pass_str(d <= v.duality_threshold)
            );
        }
        if let Some(m) = v.corollary_margin {
            let _ = writeln!(
                out,
                "verify: corollary margin sqrt(1-exp(-C)) - D_est = {:+.3e} : {}",
                m,
                pass_str(m >= -1e-4)
            );
        }
        let _ = writeln!(out, "verify: overall {}", pass_str(v.pass));
    }
    out
}

fn pass_str(b: bool) -> &'static str {
    if b {
        "PASS"
    } else {
        "FAIL"
    }
}

/// One sweep table row.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub parameter: f64,
    pub epsilon: f64,
    pub ctilde: f64,
    pub c: f64,
    pub delta_lower: f64,
    pub delta_upper: f64,
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("parameter,epsilon,ctilde,c,delta_lower,delta_upper\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            r.parameter, r.epsilon, r.ctilde, r.c, r.delta_lower, r.delta_upper
        );
    }
    out
}
