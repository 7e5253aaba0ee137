//! End-to-end tests of the `aqss` binary: exit-code contract, error paths,
//! and output formats.

use std::path::PathBuf;
use std::process::{Command, Output};

fn workdir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("aqss-cli-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_scenario(name: &str, body: &str) -> PathBuf {
    let path = workdir().join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aqss")).args(args).output().expect("binary runs")
}

const QUICK_IDENTITY: &str = r#"{
  "scheme": {"builtin": "cgl23"},
  "attack": {"family": "identity"},
  "solver": {"restarts": 3, "seed": 42}
}"#;

#[test]
fn analyze_identity_attack_exits_zero_with_clean_report() {
    let scenario = write_scenario("identity.json", QUICK_IDENTITY);
    let out_path = workdir().join("identity-report.json");
    let out = run(&["analyze", scenario.to_str().unwrap(), "--out", out_path.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("epsilon_secrecy      = 0.000000000"), "stdout:\n{stdout}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(report["seed"], 42);
    assert_eq!(report["units"], "nats");
    assert!(report["analysis"]["all_converged"].as_bool().unwrap());
    assert_eq!(report["analysis"]["sets"].as_array().unwrap().len(), 3);
}

#[test]
fn out_of_range_parameter_exits_one() {
    let scenario = write_scenario(
        "badp.json",
        r#"{"scheme": {"builtin": "cgl23"}, "attack": {"family": "depolarizing", "p": 2.0}}"#,
    );
    let out = run(&["analyze", scenario.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("out of range [0,1]"), "stderr: {stderr}");
}

#[test]
fn non_cptp_explicit_kraus_exits_one() {
    // single Kraus = 0.9 I on the 27-dim share space: not trace preserving
    let mut rows = String::from("[");
    for i in 0..27 {
        if i > 0 {
            rows.push(',');
        }
        rows.push('[');
        for j in 0..27 {
            if j > 0 {
                rows.push(',');
            }
            rows.push_str(if i == j { "[0.9,0.0]" } else { "[0.0,0.0]" });
        }
        rows.push(']');
    }
    rows.push(']');
    let body = format!(
        r#"{{"scheme": {{"builtin": "cgl23"}}, "attack": {{"kraus": [{rows}]}}}}"#
    );
    let scenario = write_scenario("noncptp.json", &body);
    let out = run(&["analyze", scenario.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("not CPTP"), "stderr: {stderr}");
}

#[test]
fn corrupted_encoder_fails_before_solving() {
    // explicit scheme with a non-isometric encoder
    let mut rows = Vec::new();
    for i in 0..27 {
        let mut row = Vec::new();
        for j in 0..3 {
            row.push(if i == j { [0.5, 0.0] } else { [0.0, 0.0] });
        }
        rows.push(row);
    }
    let body = serde_json::json!({
        "scheme": {"threshold": {
            "t": 2, "n": 3, "secret_dim": 3, "share_dim": 3, "encoder": rows
        }},
        "attack": {"family": "identity"}
    });
    let scenario = write_scenario("badenc.json", &serde_json::to_string(&body).unwrap());
    let out = run(&["verify", scenario.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("isometry"), "stderr: {stderr}");
}

#[test]
fn missing_file_exits_one() {
    let out = run(&["analyze", "/nonexistent/scenario.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_emits_csv_rows_and_warns_on_duplicates() {
    let scenario = write_scenario(
        "sweep.json",
        r#"{
  "scheme": {"builtin": "cgl23"},
  "attack": {"family": "depolarizing", "p": 0.1, "shares": [1]},
  "solver": {"restarts": 3, "seed": 42}
}"#,
    );
    let csv_path = workdir().join("sweep.csv");
    let out = run(&[
        "sweep",
        scenario.to_str().unwrap(),
        "--param",
        "p",
        "--grid",
        "0,0.5,0.5",
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("duplicate grid values"));
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = csv.trim().lines().collect();
    assert_eq!(lines[0], "parameter,epsilon,ctilde,c,delta_lower,delta_upper");
    assert_eq!(lines.len(), 3, "header + 2 deduplicated rows: {csv}");
    // eps(0) = 0
    let first: Vec<f64> = lines[1].split(',').map(|t| t.parse().unwrap()).collect();
    assert!(first[1].abs() < 1e-9);
}

#[test]
fn bits_flag_converts_capacities() {
    let scenario = write_scenario(
        "bits.json",
        r#"{
  "scheme": {"builtin": "cgl23"},
  "attack": {"family": "depolarizing", "p": 1.0},
  "solver": {"restarts": 3, "seed": 42}
}"#,
    );
    let out_nats = workdir().join("nats.json");
    let out_bits = workdir().join("bits.json");
    let a = run(&["analyze", scenario.to_str().unwrap(), "--out", out_nats.to_str().unwrap()]);
    let b = run(&[
        "analyze",
        scenario.to_str().unwrap(),
        "--out",
        out_bits.to_str().unwrap(),
        "--bits",
    ]);
    assert!(a.status.success() && b.status.success());
    let nats: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_nats).unwrap()).unwrap();
    let bits: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_bits).unwrap()).unwrap();
    assert_eq!(bits["units"], "bits");
    let cn = nats["analysis"]["strength_c"].as_f64().unwrap();
    let cb = bits["analysis"]["strength_c"].as_f64().unwrap();
    assert!((cb - cn / core::f64::consts::LN_2).abs() < 1e-12);
    // epsilon is unitless and must not change
    let en = nats["analysis"]["epsilon_secrecy"].as_f64().unwrap();
    let eb = bits["analysis"]["epsilon_secrecy"].as_f64().unwrap();
    assert_eq!(en, eb);
}

#[test]
fn explicit_two_of_two_qubit_scheme_verifies() {
    // ((2,2)) qubit scheme: |0> -> (|00>+|11>)/sqrt(2), |1> -> (|01>+|10>)/sqrt(2).
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut rows = vec![vec![[0.0, 0.0], [0.0, 0.0]]; 4];
    rows[0][0] = [r, 0.0];
    rows[3][0] = [r, 0.0];
    rows[1][1] = [r, 0.0];
    rows[2][1] = [r, 0.0];
    let body = serde_json::json!({
        "scheme": {"threshold": {
            "t": 2, "n": 2, "secret_dim": 2, "share_dim": 2, "encoder": rows
        }},
        "attack": {"family": "depolarizing", "p": 0.5, "shares": [1]},
        "solver": {"restarts": 4, "seed": 42}
    });
    let scenario = write_scenario("bell22.json", &serde_json::to_string(&body).unwrap());
    let out_path = workdir().join("bell22-report.json");
    let out =
        run(&["verify", scenario.to_str().unwrap(), "--out", out_path.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let eps = report["analysis"]["epsilon_secrecy"].as_f64().unwrap();
    assert!(eps > 0.01 && eps < 1.0, "depolarized share must leak partially, eps = {eps}");
    assert!(report["verification"]["pass"].as_bool().unwrap());

    // single-share full dephasing is a correctable error for this code:
    // the corrupted subspace is orthogonal to the code space, so the
    // scheme stays perfectly secret and reconstructable.
    let body = serde_json::json!({
        "scheme": {"threshold": {
            "t": 2, "n": 2, "secret_dim": 2, "share_dim": 2, "encoder": rows
        }},
        "attack": {"family": "dephasing", "p": 1.0, "shares": [1]},
        "solver": {"restarts": 4, "seed": 42}
    });
    let scenario = write_scenario("bell22-deph.json", &serde_json::to_string(&body).unwrap());
    let out_path = workdir().join("bell22-deph-report.json");
    let out =
        run(&["verify", scenario.to_str().unwrap(), "--out", out_path.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let eps = report["analysis"]["epsilon_secrecy"].as_f64().unwrap();
    assert!(eps < 1e-6, "dephasing one share is correctable here, eps = {eps}");
}

#[test]
fn sets_all_flag_includes_larger_sets() {
    let scenario = write_scenario("all-sets.json", QUICK_IDENTITY);
    let out_path = workdir().join("all-sets.json.out");
    let out = run(&[
        "analyze",
        scenario.to_str().unwrap(),
        "--sets",
        "all",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let sets = report["analysis"]["sets"].as_array().unwrap();
    assert_eq!(sets.len(), 4, "3 minimal pairs + the full set");
    assert_eq!(sets[3]["set"].as_array().unwrap().len(), 3);
}

#[test]
fn correlated_explicit_attack_verifies() {
    // Non-product attack: with probability p a collective phase unitary
    // CZ (omega^{jk} on shares 1,2) hits the share space.
    let p_noise: f64 = 0.4;
    let omega = 2.0 * std::f64::consts::PI / 3.0;
    let dim = 27;
    let mut k0 = vec![vec![[0.0, 0.0]; dim]; dim];
    let mut k1 = vec![vec![[0.0, 0.0]; dim]; dim];
    let a0 = (1.0 - p_noise).sqrt();
    let a1 = p_noise.sqrt();
    for j in 0..3 {
        for k in 0..3 {
            for l in 0..3 {
                let idx = (j * 3 + k) * 3 + l;
                k0[idx][idx] = [a0, 0.0];
                let phase = omega * (j * k) as f64;
                k1[idx][idx] = [a1 * phase.cos(), a1 * phase.sin()];
            }
        }
    }
    let body = serde_json::json!({
        "scheme": {"builtin": "cgl23"},
        "attack": {"kraus": [k0, k1], "label": "correlated CZ(1,2) p=0.4"},
        "solver": {"restarts": 4, "seed": 42}
    });
    let scenario = write_scenario("correlated.json", &serde_json::to_string(&body).unwrap());
    let out_path = workdir().join("correlated-report.json");
    let out = run(&["verify", scenario.to_str().unwrap(), "--out", out_path.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert!(report["verification"]["pass"].as_bool().unwrap());
    let eps = report["analysis"]["epsilon_secrecy"].as_f64().unwrap();
    assert!(eps > 1e-3 && eps < 1.0, "collective phase noise must leak, eps = {eps}");
}

#[test]
fn sweep_rejects_non_finite_grid() {
    let scenario = write_scenario("nan-grid.json", QUICK_IDENTITY);
    let out = run(&["sweep", scenario.to_str().unwrap(), "--param", "p", "--grid", "0,nan"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not finite"));
}

#[test]
fn verify_reports_pass_lines() {
    let scenario = write_scenario("verify.json", QUICK_IDENTITY);
    let out = run(&["verify", scenario.to_str().unwrap()]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("verify: overall PASS"), "stdout:\n{stdout}");
    assert!(stdout.contains("saddle residual"));
    assert!(stdout.contains("corollary margin"));
}
