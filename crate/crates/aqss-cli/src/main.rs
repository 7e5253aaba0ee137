//! Command-line front end: scenario ingestion, analysis orchestration,
//! equivalence verification, and parameter sweeps.
//!
//! Exit codes: 0 = converged (and, for `verify`, certified); 1 = input
//! error; 2 = partial convergence or failed certification.

mod report;
mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use aqss_core::analysis::{analyze, AnalysisOptions, ResidualThresholds};
use aqss_core::saddle::SolverConfig;

use report::{
    analysis_json, render_text, sweep_csv, verification_json, ReportFile, SweepRow, Units,
};
use scenario::{
    attack_parameter, build_attack, build_scheme, parse_scenario, parse_set_policy,
    with_attack_parameter, ScenarioFile,
};

#[derive(Parser)]
#[command(name = "aqss", version, about = "Approximate quantum secret sharing analyzer")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Analyze a scheme under an attack: secrecy, reconstructability,
    /// adversarial strength, diamond bounds.
    Analyze {
        file: PathBuf,
        /// Write the JSON report here as well as printing to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Authorized-set policy: minimal | all.
        #[arg(long)]
        sets: Option<String>,
        /// Master seed overriding the scenario's solver seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Report capacities in bits instead of nats.
        #[arg(long)]
        bits: bool,
    },
    /// Run the full cross-route certification (saddle two-route identity,
    /// primal-dual agreement, inequality chain, diamond corollary).
    Verify {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        sets: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        bits: bool,
    },
    /// Sweep an attack parameter over a grid, emitting one CSV row per point
    /// (parameter, epsilon, Ctilde, C, delta bracket).
    Sweep {
        file: PathBuf,
        /// Attack-family parameter name (currently: p).
        #[arg(long)]
        param: String,
        /// Comma-separated grid values, e.g. 0,0.25,0.5.
        #[arg(long)]
        grid: String,
        /// Write the CSV here as well as printing to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = match cli.cmd {
        Cmd::Analyze { file, out, sets, seed, bits } => {
            cmd_analyze(&file, out.as_deref(), sets.as_deref(), seed, bits, false)
        }
        Cmd::Verify { file, out, sets, seed, bits } => {
            cmd_analyze(&file, out.as_deref(), sets.as_deref(), seed, bits, true)
        }
        Cmd::Sweep { file, param, grid, out, seed } => {
            cmd_sweep(&file, &param, &grid, out.as_deref(), seed)
        }
    };
    match run {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

struct LoadedScenario {
    scenario: ScenarioFile,
    opts: AnalysisOptions,
    seed: u64,
}

fn load(path: &Path, sets_flag: Option<&str>, seed_flag: Option<u64>) -> Result<LoadedScenario> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading scenario {}", path.display()))?;
    let scenario = parse_scenario(&text)?;
    let mut solver = SolverConfig::default();
    if let Some(spec) = &scenario.solver {
        solver = spec.apply(solver);
    }
    if let Some(seed) = seed_flag {
        solver.seed = seed;
    }
    let mut opts = AnalysisOptions {
        solver,
        seesaw: SolverConfig { tol: 1e-3, ..solver },
        ..AnalysisOptions::default()
    };
    if let Some(policy) = sets_flag.or(scenario.sets.as_deref()) {
        opts.sets = parse_set_policy(policy)?;
    }
    Ok(LoadedScenario { scenario, opts, seed: solver.seed })
}

fn cmd_analyze(
    path: &Path,
    out: Option<&Path>,
    sets_flag: Option<&str>,
    seed_flag: Option<u64>,
    bits: bool,
    verify: bool,
) -> Result<ExitCode> {
    let LoadedScenario { scenario, mut opts, seed } = load(path, sets_flag, seed_flag)?;
    opts.with_primal = true;
    opts.with_fvg = verify;
    let scheme = build_scheme(&scenario.scheme)?;
    let attack = build_attack(&scenario.attack, &scheme)?;
    let units = if bits { Units::Bits } else { Units::Nats };

    let analysis =
        analyze(&scheme, &attack, &opts).map_err(|e| anyhow::anyhow!("analysis failed: {e}"))?;
    let verification = if verify {
        Some(verification_json(&analysis, &ResidualThresholds::default()))
    } else {
        None
    };

    print!("{}", render_text(&analysis, verification.as_ref(), units));

    let file = ReportFile {
        tool: "aqss",
        version: env!("CARGO_PKG_VERSION"),
        generated_unix_ms: now_ms(),
        seed,
        units: units.name(),
        scenario,
        analysis: analysis_json(&analysis, units),
        verification,
    };
    if let Some(out) = out {
        let json = serde_json::to_string_pretty(&file).context("serializing report")?;
        std::fs::write(out, json + "\n")
            .with_context(|| format!("writing report {}", out.display()))?;
    }

    let ok = match &file.verification {
        Some(v) => v.pass && analysis.all_converged,
        None => analysis.all_converged,
    };
    Ok(ExitCode::from(if ok { 0 } else { 2 }))
}

fn cmd_sweep(
    path: &Path,
    param: &str,
    grid: &str,
    out: Option<&Path>,
    seed_flag: Option<u64>,
) -> Result<ExitCode> {
    let LoadedScenario { scenario, mut opts, .. } = load(path, None, seed_flag)?;
    opts.with_primal = false;
    let scheme = build_scheme(&scenario.scheme)?;
    if attack_parameter(&scenario.attack, param).is_none() {
        // fail early with a clear message (also rejects explicit attacks)
        with_attack_parameter(&scenario.attack, param, 0.0)?;
    }

    let mut values: Vec<f64> = Vec::new();
    for tok in grid.split(',') {
        let tok = tok.trim();
        if tok.is_empty() {
            continue;
        }
        let v = tok.parse::<f64>().with_context(|| format!("grid value '{tok}'"))?;
        if !v.is_finite() {
            bail!("grid value '{tok}' is not finite");
        }
        values.push(v);
    }
    if values.is_empty() {
        bail!("grid must be nonempty");
    }
    let before = values.len();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    if values.len() < before {
        eprintln!("warning: duplicate grid values removed ({} -> {})", before, values.len());
    }

    let mut rows: Vec<SweepRow> = Vec::with_capacity(values.len());
    let mut all_converged = true;
    for &v in &values {
        let attack_spec = with_attack_parameter(&scenario.attack, param, v)?;
        let attack = build_attack(&attack_spec, &scheme)?;
        let analysis = analyze(&scheme, &attack, &opts)
            .map_err(|e| anyhow::anyhow!("analysis failed at {param}={v}: {e}"))?;
        all_converged &= analysis.all_converged;
        rows.push(SweepRow {
            parameter: v,
            epsilon: analysis.epsilon_secrecy,
            ctilde: analysis.strength_ctilde,
            c: analysis.strength_c,
            delta_lower: analysis.delta_lower,
            delta_upper: analysis.delta_upper,
        });
    }
    for w in rows.windows(2) {
        if w[1].epsilon < w[0].epsilon - 1e-6 {
            eprintln!(
                "warning: epsilon not monotone between {}={} and {}={}",
                param, w[0].parameter, param, w[1].parameter
            );
        }
    }
    let csv = sweep_csv(&rows);
    print!("{csv}");
    if let Some(out) = out {
        std::fs::write(out, &csv).with_context(|| format!("writing CSV {}", out.display()))?;
    }
    Ok(ExitCode::from(if all_converged { 0 } else { 2 }))
}

fn now_ms() -> Option<u128> {
    SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_millis())
}
