//! End-to-end runs of the binary on temporary configs.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_dressed-cascade");

fn config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str], cfg: &Path, out: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .arg("--config")
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .env_remove("DRESSED_CASCADE_OUT")
        .output()
        .unwrap()
}

fn hal(omega_0: f64, rabi: f64, asym: f64, cr: bool, gamma_0: f64, exponent: f64) -> String {
    format!(
        r#"
[hamiltonian]
omega_0 = {omega_0}
rabi = {rabi}
asym = {asym}
counter_rotating = {cr}

[form_factor]
kind = "power_law"
gamma_0 = {gamma_0}
omega_ref = 1.0
exponent = {exponent}
"#
    )
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn mollow_spectrum_has_three_lines() {
    let tmp = TempDir::new().unwrap();
    let cfg = config(tmp.path(), &hal(1.0, 0.2, 0.0, false, 1e-3, 0.0));
    let out = tmp.path().join("out");
    let o = run(&["spectrum"], &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out.join("lines.csv"));
    assert_eq!(header, ["q", "kind", "center", "width", "weight"]);
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[0] == "1"));
    assert!(!rows.iter().any(|r| r[1] == "coherent_delta"));
    let w: Vec<f64> = rows.iter().map(|r| r[4].parse().unwrap()).collect();
    assert!((w[2] / w[0] - 2.0).abs() < 1e-9 && (w[1] / w[0] - 1.0).abs() < 1e-9);
    for f in ["density.csv", "rates.json", "summary.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn permanent_dipole_gives_low_frequency_line_and_consistent_summary() {
    let tmp = TempDir::new().unwrap();
    let cfg = config(tmp.path(), &hal(1.0, 0.2, 0.1, true, 1e-4, 3.0));
    let out = tmp.path().join("out");
    let o = run(&["spectrum"], &cfg, &out);
    assert_eq!(o.status.code(), Some(0));
    let summary = json(&out.join("summary.json"));
    let gap = summary["omega_gap"].as_f64().unwrap();
    let (_, rows) = read_csv(&out.join("lines.csv"));
    let q0: Vec<_> = rows.iter().filter(|r| r[0] == "0").collect();
    assert_eq!(q0.len(), 1);
    assert_eq!(q0[0][1], "sideband_plus");
    assert!((q0[0][2].parse::<f64>().unwrap() - gap).abs() < 1e-15);
    // every float carries 17 significant digits
    assert!(rows.iter().all(|r| r[2].split('e').next().unwrap().len() == 18));
    let total: f64 = rows.iter().map(|r| r[4].parse::<f64>().unwrap()).sum();
    let rate = summary["total_emission_rate"].as_f64().unwrap();
    assert!((total / rate - 1.0).abs() < 1e-9);
    let rates = json(&out.join("rates.json"));
    assert_eq!(rates["hypothesis"]["checks"].as_array().unwrap().len(), 3);
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = config(tmp.path(), &hal(1.0, 0.2, 0.1, true, 1e-4, 3.0));
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run(&["spectrum"], &cfg, &a);
    run(&["spectrum"], &cfg, &b);
    for f in ["lines.csv", "density.csv", "rates.json", "summary.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn huge_detuning_is_refused() {
    let tmp = TempDir::new().unwrap();
    let cfg = config(tmp.path(), &hal(3.0, 0.2, 0.0, true, 1e-4, 3.0));
    let o = run(&["spectrum"], &cfg, &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("dressing"), "{err}");
}

#[test]
fn malformed_config_exits_one() {
    let tmp = TempDir::new().unwrap();
    let cfg = config(tmp.path(), "[hamiltonian]\nomega_0 = 1.0\n");
    let o = run(&["spectrum"], &cfg, &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["sweep"], &config(tmp.path(), &hal(1.0, 0.2, 0.1, true, 1e-4, 3.0)), &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(1), "sweep without a [sweep] block");
}

#[test]
fn env_var_sets_output_directory() {
    let tmp = TempDir::new().unwrap();
    let cfg = config(tmp.path(), &hal(1.0, 0.2, 0.0, false, 1e-3, 0.0));
    let target = tmp.path().join("from_env");
    let o = Command::new(BIN)
        .args(["spectrum", "--config"])
        .arg(&cfg)
        .env("DRESSED_CASCADE_OUT", &target)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(target.join("lines.csv").exists());
}

#[test]
fn asym_sweep_ratio_vanishes_and_gap_shrinks() {
    let tmp = TempDir::new().unwrap();
    let values: Vec<String> = (0..16).map(|k| format!("{}", 0.02 * k as f64)).collect();
    let body = format!(
        "{}\n[sweep]\nparameter = \"hamiltonian.asym\"\nvalues = [{}]\n",
        hal(1.0, 0.2, 0.0, true, 1e-4, 3.0),
        values.join(", ")
    );
    let cfg = config(tmp.path(), &body);
    let out = tmp.path().join("out");
    let o = run(&["sweep"], &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out.join("sweep.csv"));
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    assert_eq!(rows.len(), 16);
    let ratio: Vec<f64> = rows.iter().map(|r| r[col("ratio_true")].parse().unwrap()).collect();
    let flat: Vec<f64> = rows.iter().map(|r| r[col("ratio_flat")].parse().unwrap()).collect();
    let gap: Vec<f64> = rows.iter().map(|r| r[col("gap_ratio")].parse().unwrap()).collect();
    assert_eq!(ratio[0], 0.0);
    assert!(ratio[1] < ratio[2] && ratio[2] < ratio[5]);
    assert!(flat.iter().zip(&ratio).skip(1).all(|(f, r)| f > r));
    assert!(gap.windows(2).all(|w| w[1] <= w[0]));
    assert!(gap.iter().all(|&g| g <= 1.0));
    assert!(rows.iter().all(|r| r[col("errors")].is_empty()));
}

#[test]
fn invalid_sweep_point_is_flagged() {
    let tmp = TempDir::new().unwrap();
    let body = format!(
        "{}\n[sweep]\nparameter = \"hamiltonian.omega_0\"\nvalues = [1.0, 3.0, 1.1]\n",
        hal(1.0, 0.2, 0.05, true, 1e-4, 3.0)
    );
    let out = tmp.path().join("out");
    let o = run(&["sweep"], &config(tmp.path(), &body), &out);
    assert_eq!(o.status.code(), Some(2));
    let (header, rows) = read_csv(&out.join("sweep.csv"));
    let err = header.iter().position(|h| h == "errors").unwrap();
    assert!(rows[0][err].is_empty() && rows[2][err].is_empty());
    assert!(rows[1][err].contains("gap"), "{}", rows[1][err]);
    assert!(rows[1][1].is_empty());
    assert!(!rows[2][1].is_empty());
}

#[test]
fn validate_default_passes_and_reports() {
    let tmp = TempDir::new().unwrap();
    let cfg = config(tmp.path(), &hal(1.0, 0.2, 0.1, true, 1e-4, 3.0));
    let out = tmp.path().join("out");
    let o = run(&["validate"], &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let report = json(&out.join("validate.json"));
    let names: Vec<&str> = report["suites"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["name"].as_str().unwrap())
        .collect();
    assert_eq!(
        names,
        ["mollow_limit", "perturbation_cross_check", "full_gkls", "hypothesis_check", "truncation_sensitivity"]
    );
}

fn suite_status(out: &Path, name: &str) -> String {
    let report = json(&out.join("validate.json"));
    report["suites"]
        .as_array()
        .unwrap()
        .iter()
        .find(|s| s["name"] == name)
        .unwrap()["status"]
        .as_str()
        .unwrap()
        .to_string()
}

#[test]
fn strong_damping_warns() {
    let tmp = TempDir::new().unwrap();
    // Γ_0 = 0.5 Ω with Ω ≈ 0.2
    let cfg = config(tmp.path(), &hal(1.0, 0.2, 0.0, false, 0.1, 0.0));
    let out = tmp.path().join("out");
    let o = run(&["validate"], &cfg, &out);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(suite_status(&out, "hypothesis_check"), "warn");
}

#[test]
fn short_ladder_flags_truncation() {
    let tmp = TempDir::new().unwrap();
    let body = format!("{}\n[numerics]\nn_levels = 8\n", hal(1.0, 0.2, 0.1, true, 1e-4, 3.0));
    let out = tmp.path().join("out");
    let o = run(&["validate"], &config(tmp.path(), &body), &out);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(suite_status(&out, "truncation_sensitivity"), "fail");
}

#[test]
fn mollow_dynamics_fit() {
    let tmp = TempDir::new().unwrap();
    let cfg = config(tmp.path(), &hal(1.0, 0.2, 0.0, false, 1e-3, 0.0));
    let out = tmp.path().join("out");
    let o = run(&["dynamics", "--horizon", "4", "--dt", "0.02"], &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&out.join("dynamics.json"));
    let g = report["fitted"]["gamma_pop"].as_f64().unwrap();
    assert!((g / 1e-3 - 0.5).abs() < 1e-3);
    let (header, rows) = read_csv(&out.join("trajectory.csv"));
    assert_eq!(header, ["t", "pi_1", "pi_2", "abs_sigma_12", "trace_error"]);
    assert_eq!(rows.len(), 201);
}

#[test]
fn dissipation_free_dynamics_is_frozen() {
    let tmp = TempDir::new().unwrap();
    let cfg = config(tmp.path(), &hal(1.0, 0.2, 0.0, false, 0.0, 0.0));
    let out = tmp.path().join("out");
    let o = run(&["dynamics", "--horizon", "100", "--dt", "0.5"], &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, rows) = read_csv(&out.join("trajectory.csv"));
    assert!(rows.iter().all(|r| r[1] == rows[0][1]));
}

#[test]
fn long_horizon_exceeds_photon_budget() {
    let tmp = TempDir::new().unwrap();
    let cfg = config(tmp.path(), &hal(1.0, 0.2, 0.0, false, 1e-3, 0.0));
    let o = run(&["dynamics", "--horizon", "200"], &cfg, &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("budget"), "{err}");
}
