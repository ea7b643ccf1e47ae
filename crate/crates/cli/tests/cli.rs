use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn ffgas(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ffgas"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &TempDir, name: &str, json: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, json).unwrap();
    path
}

fn run_ok(cmd: &str, config: &Path, extra: &[&str]) -> String {
    let mut args = vec![cmd, "--config", config.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = ffgas(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Header plus rows of parsed floats.
fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_owned).collect();
    let rows = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

#[test]
fn levels_table_shape() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", r#"{"sweep": {"samples": 3, "n_max": 5}}"#);
    let (header, rows) = parse_csv(&run_ok("levels", &cfg, &[]));
    assert_eq!(header.join(","), "t,n,E_n,F_n,E_ff");
    assert_eq!(rows.len(), 18);
}

#[test]
fn static_levels_give_the_adiabatic_force() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "c.json",
        r#"{"trajectory": {"L0": 1.3, "v_bar": 0.0, "T_FF": 1.0}, "sweep": {"samples": 4, "n_max": 7}}"#,
    );
    let (header, rows) = parse_csv(&run_ok("levels", &cfg, &[]));
    let (n, f) = (column(&header, "n"), column(&header, "F_n"));
    for row in rows {
        let expected = (2.0 * row[n] + 1.0) / 1.3f64.powi(3);
        assert!((row[f] / expected - 1.0).abs() < 1e-14);
    }
}

#[test]
fn json_and_csv_carry_the_same_numbers() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "c.json",
        r#"{"model": {"kind": "hard"}, "sweep": {"samples": 5, "n_max": 6}}"#,
    );
    let (header, rows) = parse_csv(&run_ok("levels", &cfg, &["--format", "csv"]));
    let json: Value = serde_json::from_str(&run_ok("levels", &cfg, &["--format", "json"])).unwrap();
    let records = json.as_array().unwrap();
    assert_eq!(records.len(), rows.len());
    for (record, row) in records.iter().zip(&rows) {
        for (name, &value) in header.iter().zip(row) {
            assert_eq!(record[name].as_f64().unwrap(), value, "{name}");
        }
    }
}

#[test]
fn soft_zero_temperature_bernoulli_is_exact() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "c.json",
        r#"{"gas": {"N": 60, "T0": 0.0, "regime": "lowT"}, "sweep": {"samples": 41}}"#,
    );
    let (header, rows) = parse_csv(&run_ok("eos", &cfg, &[]));
    let (lhs, res) = (column(&header, "bernoulli_lhs"), column(&header, "residual_bernoulli"));
    let (f, l) = (column(&header, "F_bar"), column(&header, "L"));
    for row in rows {
        // At the sweep ends L̇ = L̈ = 0 and both sides vanish up to rounding.
        let floor = 1e-14 * (row[f] * row[l]).abs();
        assert!(row[res].abs() < (1e-10 * row[lhs].abs()).max(floor), "{row:?}");
    }
}

#[test]
fn hard_zero_temperature_bernoulli_finite_size_term() {
    // The residual is −K/12 − K/(π²N²) + O(N⁻³) with K = 3mLL̈ − 2mL̇²; the
    // part beyond −K/12 follows 1/N².
    let dir = TempDir::new().unwrap();
    for n in [20, 40, 80] {
        let json = format!(
            r#"{{"model": {{"kind": "hard"}}, "gas": {{"N": {n}, "T0": 0.0, "regime": "lowT"}}, "sweep": {{"samples": 11}}}}"#
        );
        let cfg = write_config(&dir, "c.json", &json);
        let (header, rows) = parse_csv(&run_ok("eos", &cfg, &[]));
        let col = |name| column(&header, name);
        for row in rows.iter().filter(|r| r[col("Lddot")].abs() > 0.1) {
            let k = 3.0 * row[col("L")] * row[col("Lddot")] - 2.0 * row[col("Ldot")].powi(2);
            let scaled = (row[col("residual_bernoulli")] + k / 12.0) * -(PI * PI) * f64::from(n * n) / k;
            assert!((scaled - 1.0).abs() < 0.15, "N={n}: {scaled}");
        }
    }
}

#[test]
fn output_file_is_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "c.json",
        r#"{"gas": {"N": 40, "T0": 3.0}, "sweep": {"samples": 17}}"#,
    );
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    run_ok("eos", &cfg, &["--out", a.to_str().unwrap()]);
    run_ok("eos", &cfg, &["--out", b.to_str().unwrap()]);
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn output_section_sets_path_and_format() {
    let dir = TempDir::new().unwrap();
    let target = dir.path().join("levels.json");
    let json = format!(
        r#"{{"output": {{"path": {}, "format": "json"}}, "sweep": {{"samples": 2, "n_max": 1}}}}"#,
        serde_json::to_string(target.to_str().unwrap()).unwrap()
    );
    let cfg = write_config(&dir, "c.json", &json);
    assert!(run_ok("levels", &cfg, &[]).is_empty());
    let v: Value = serde_json::from_slice(&std::fs::read(target).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 4);
}

#[test]
fn verify_report_passes_and_is_stable() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", "{}");
    let first = run_ok("verify", &cfg, &["--format", "json"]);
    let second = run_ok("verify", &cfg, &["--format", "json"]);
    assert_eq!(first, second);
    let report: Value = serde_json::from_str(&first).unwrap();
    assert_eq!(report["passed"], Value::Bool(true));
    let criteria = report["criteria"].as_array().unwrap();
    assert_eq!(criteria.len(), 9);
    for c in criteria {
        let keys: Vec<&str> = c.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys, ["passed", "id", "title", "checks"]);
        for check in c["checks"].as_array().unwrap() {
            let keys: Vec<&str> = check.as_object().unwrap().keys().map(String::as_str).collect();
            assert_eq!(keys, ["name", "passed", "measured", "threshold", "comparison"]);
        }
    }
}

#[test]
fn coarse_time_step_fails_verification() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", r#"{"tdse": {"dt": 0.04}}"#);
    let out = ffgas(&["verify", "--config", cfg.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    let failing: Vec<&str> = text.lines().filter(|l| l.contains(",false,")).collect();
    assert!(
        failing.iter().any(|l| l.contains("tdse_max_fidelity_deficit")),
        "{text}"
    );
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", r#"{"tdse": {"dt": 0.01, "stepper": "rk4"}}"#);
    let out = ffgas(&["levels", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("tdse.stepper"), "{err}");
}

#[test]
fn eos_without_gas_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", "{}");
    let out = ffgas(&["eos", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn odd_particle_number_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", r#"{"gas": {"N": 7, "T0": 1.0}}"#);
    let out = ffgas(&["eos", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unreachable_temperature_is_a_numeric_failure() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", r#"{"gas": {"N": 40, "T0": 1e300}}"#);
    let out = ffgas(&["eos", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
}

#[test]
fn regime_mismatch_warns_but_emits_data() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "c.json",
        r#"{"gas": {"N": 10, "T0": 500.0, "regime": "lowT"}, "sweep": {"samples": 5}}"#,
    );
    let out = ffgas(&["eos", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("warning"));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 6);
}
