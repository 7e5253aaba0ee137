//! Scenario file parsing: scheme, attack, solver overrides, set policy.
//!
//! Format: JSON with top-level keys `scheme`, `attack`, `solver`, `sets`.
//! Complex entries are `[re, im]` pairs; matrices are row-major nested
//! arrays. Share and player indices are 1-based in files and reports.

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use aqss_core::analysis::SetPolicy;
use aqss_core::channels::{dephasing, depolarizing, erasure, KrausChannel};
use aqss_core::numkernel::{c, CMat, C64};
use aqss_core::qss::{build_cgl_2_3_scheme, product_attack, AttackModel, ThresholdScheme};
use aqss_core::saddle::SolverConfig;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub scheme: SchemeSpec,
    pub attack: AttackSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sets: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SchemeSpec {
    Builtin { builtin: String },
    Explicit { threshold: ThresholdSpec },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdSpec {
    pub t: usize,
    pub n: usize,
    pub secret_dim: usize,
    pub share_dim: usize,
    /// Encoder isometry, `share_dim^n x secret_dim`, row-major `[re, im]`.
    pub encoder: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttackSpec {
    Family {
        family: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p: Option<f64>,
        /// 1-based share indices the family acts on; defaults to all shares.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        shares: Option<Vec<usize>>,
    },
    Explicit {
        /// Kraus operators on the full (share_dim^n)-dimensional space.
        kraus: Vec<Vec<Vec<[f64; 2]>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SolverSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_init: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl SolverSpec {
    pub fn apply(&self, base: SolverConfig) -> SolverConfig {
        SolverConfig {
            max_iters: self.max_iters.unwrap_or(base.max_iters),
            tol: self.tol.unwrap_or(base.tol),
            restarts: self.restarts.unwrap_or(base.restarts),
            step_init: self.step_init.unwrap_or(base.step_init),
            seed: self.seed.unwrap_or(base.seed),
        }
    }
}

pub fn parse_scenario(text: &str) -> Result<ScenarioFile> {
    serde_json::from_str(text).context("scenario file is not valid JSON for the expected schema")
}

pub fn build_scheme(spec: &SchemeSpec) -> Result<ThresholdScheme> {
    match spec {
        SchemeSpec::Builtin { builtin } => match builtin.as_str() {
            "cgl23" => Ok(build_cgl_2_3_scheme()),
            other => bail!("unknown builtin scheme '{other}' (available: cgl23)"),
        },
        SchemeSpec::Explicit { threshold } => {
            let rows = threshold.share_dim.pow(threshold.n as u32);
            let v = matrix_from_rows(&threshold.encoder, rows, threshold.secret_dim)
                .context("encoder matrix")?;
            let encoder = KrausChannel::isometry(v)
                .map_err(|e| anyhow!("encoder is not a valid isometry channel: {e}"))?;
            ThresholdScheme::new(
                threshold.t,
                threshold.n,
                threshold.secret_dim,
                threshold.share_dim,
                encoder,
            )
            .map_err(|e| anyhow!("invalid threshold scheme: {e}"))
        }
    }
}

/// The value of the swept parameter in a family attack, if any.
pub fn attack_parameter(spec: &AttackSpec, name: &str) -> Option<f64> {
    match (spec, name) {
        (AttackSpec::Family { p, .. }, "p") => *p,
        _ => None,
    }
}

/// Rebuild the attack spec with the named parameter replaced.
pub fn with_attack_parameter(spec: &AttackSpec, name: &str, value: f64) -> Result<AttackSpec> {
    match spec {
        AttackSpec::Family { family, shares, .. } if name == "p" => Ok(AttackSpec::Family {
            family: family.clone(),
            p: Some(value),
            shares: shares.clone(),
        }),
        AttackSpec::Family { .. } => bail!("unknown parameter '{name}' (families take 'p')"),
        AttackSpec::Explicit { .. } => {
            bail!("explicit Kraus attacks have no sweepable parameter '{name}'")
        }
    }
}

pub fn build_attack(spec: &AttackSpec, scheme: &ThresholdScheme) -> Result<AttackModel> {
    let d = scheme.share_dim();
    let n = scheme.players();
    match spec {
        AttackSpec::Family { family, p, shares } => {
            let targets = match shares {
                None => (0..n).collect::<Vec<_>>(),
                Some(list) => {
                    let mut out = Vec::with_capacity(list.len());
                    for &s in list {
                        if s == 0 || s > n {
                            bail!("share index {s} out of range 1..={n}");
                        }
                        out.push(s - 1);
                    }
                    out.sort_unstable();
                    out.dedup();
                    out
                }
            };
            let make = |p: f64| -> Result<KrausChannel> {
                match family.as_str() {
                    "depolarizing" => depolarizing(d, p)
                        .map_err(|e| anyhow!("depolarizing: {e}")),
                    "dephasing" => dephasing(d, p).map_err(|e| anyhow!("dephasing: {e}")),
                    "erasure" => erasure(d, p).map_err(|e| anyhow!("erasure: {e}")),
                    other => bail!(
                        "unknown attack family '{other}' \
                         (available: identity, depolarizing, dephasing, erasure)"
                    ),
                }
            };
            if family == "identity" {
                return Ok(AttackModel::identity(scheme.total_dim()));
            }
            let p = p.ok_or_else(|| anyhow!("attack family '{family}' requires parameter p"))?;
            let per_share: Vec<KrausChannel> = (0..n)
                .map(|i| {
                    if targets.contains(&i) {
                        make(p)
                    } else {
                        Ok(KrausChannel::identity(d))
                    }
                })
                .collect::<Result<_>>()?;
            let label = format!(
                "{family} p={p} on shares {:?}",
                targets.iter().map(|t| t + 1).collect::<Vec<_>>()
            );
            let mut model = product_attack(&per_share, label)
                .map_err(|e| anyhow!("building product attack: {e}"))?;
            model = AttackModel::new(
                model.channel().clone(),
                model.label().to_string(),
                vec![("p".to_string(), p)],
            )
            .map_err(|e| anyhow!("attack validation: {e}"))?;
            Ok(model)
        }
        AttackSpec::Explicit { kraus, label } => {
            let dim = scheme.total_dim();
            let ops: Vec<CMat> = kraus
                .iter()
                .enumerate()
                .map(|(i, rows)| {
                    matrix_from_rows(rows, dim, dim)
                        .with_context(|| format!("Kraus operator {i}"))
                })
                .collect::<Result<_>>()?;
            let ch = KrausChannel::new(ops)
                .map_err(|e| anyhow!("explicit attack is not CPTP: {e}"))?;
            AttackModel::new(ch, label.clone().unwrap_or_else(|| "explicit".to_string()), vec![])
                .map_err(|e| anyhow!("attack validation: {e}"))
        }
    }
}

pub fn parse_set_policy(name: &str) -> Result<SetPolicy> {
    match name {
        "minimal" => Ok(SetPolicy::MinimalOnly),
        "all" => Ok(SetPolicy::AllAuthorized),
        other => bail!("unknown set policy '{other}' (minimal | all)"),
    }
}

fn matrix_from_rows(rows: &[Vec<[f64; 2]>], want_rows: usize, want_cols: usize) -> Result<CMat> {
    if rows.len() != want_rows {
        bail!("expected {want_rows} rows, found {}", rows.len());
    }
    let mut entries: Vec<C64> = Vec::with_capacity(want_rows * want_cols);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != want_cols {
            bail!("row {i}: expected {want_cols} entries, found {}", row.len());
        }
        for &[re, im] in row {
            if !re.is_finite() || !im.is_finite() {
                bail!("row {i}: non-finite entry");
            }
            entries.push(c(re, im));
        }
    }
    CMat::from_slice(want_rows, want_cols, &entries).map_err(|e| anyhow!("matrix shape: {e}"))
}
