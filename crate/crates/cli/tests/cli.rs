use std::path::Path;
use std::process::{Command, Output};

fn nldir(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nldir")).args(args).env_remove("NLDIR_THREADS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn error_json(o: &Output) -> serde_json::Value {
    let stderr = String::from_utf8_lossy(&o.stderr);
    serde_json::from_str(stderr.lines().last().unwrap()).unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("cfg.json");
    std::fs::write(&path, body).unwrap();
    path.display().to_string()
}

#[test]
fn sigma_prints_six_digits() {
    let o = nldir(&["sigma", "--kernel", "quartic", "--p", "2", "--dim", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - 0.152381).abs() <= 1e-6);
    assert_eq!(stdout(&o).trim(), "0.152381");
}

#[test]
fn sigma_json_keeps_full_precision() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.json");
    let o = nldir(&["sigma", "--kernel", "quartic", "--p", "2", "--dim", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    let exact = 16.0 / 105.0;
    assert!((doc["sigma_r"].as_f64().unwrap() - exact).abs() <= 1e-8 * exact);
}

#[test]
fn increasing_tabulated_kernel_fails_k2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "s,value\n0,0.5\n0.5,1\n1,0\n").unwrap();
    let id = format!("tabulated:{}", bad.display());
    let o = nldir(&["validate-kernel", "--kernel", &id]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("(K2)"));
    let err = error_json(&o);
    assert_eq!(err["kind"], "kernel_invalid");
    assert!(err["message"].as_str().unwrap().contains("(K2)"));
}

#[test]
fn no_arguments_is_a_usage_error() {
    let o = nldir(&[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(nldir(&["sigma", "--kernel", "quartic", "--p", "2", "--dim", "1", "--bogus"]).status.code(), Some(2));
    assert_eq!(nldir(&["sweep"]).status.code(), Some(2));
}

#[test]
fn unknown_config_field_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"shape": {"interval": [0, 1]}, "case": "zero", "deltas": [0.1], "detla": 3}"#);
    let o = nldir(&["sweep", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    let err = error_json(&o);
    assert_eq!(err["kind"], "json");
    assert!(err["message"].as_str().unwrap().contains("detla"));
}

#[test]
fn sweep_writes_csv_and_leaves_config_alone() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("report.json");
    let body = format!(
        r#"{{"shape": {{"interval": [0, 1]}}, "case": "linear_x", "deltas": [0.2, 0.1], "output": {{"json": "{}"}}}}"#,
        json.display()
    );
    let cfg = write_config(dir.path(), &body);
    let out = dir.path().join("sweep.csv");
    let o = nldir(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap(), "--threads", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("delta,h,penalty,p,l2_error,trace_norm,energy,sigma_r,seconds\n"));
    assert_eq!(csv.lines().count(), 3);
    let l2: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(4).unwrap().parse().unwrap()).collect();
    assert!(l2[1] < l2[0]);
    // 17 significant digits in machine files.
    assert_eq!(csv.lines().nth(1).unwrap().split(',').nth(4).unwrap().split('e').next().unwrap().len(), 18);
    assert!(json.exists());
    assert_eq!(std::fs::read_to_string(&cfg).unwrap(), body);
}

#[test]
fn eigen_csv_has_fixed_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"shape": {"interval": [0, 1]}, "case": "zero", "deltas": [0.1]}"#);
    let out = dir.path().join("eig.csv");
    let o = nldir(&["eigen", "--config", &cfg, "--modes", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "mode,lambda,residual,mass_model,delta,h");
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "1");
    assert_eq!(first[3], "l2");
    let o = nldir(&["eigen", "--config", &cfg, "--mass", "lumped"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_json(&o)["kind"], "unknown_id");
}

#[test]
fn solve_compare_and_probe_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"shape": {"rect": [[0, 0], [1, 1]]}, "case": "zero", "deltas": [0.2, 0.1]}"#);
    let o = nldir(&["probe-coercivity", "--config", &cfg, "--trials", "20", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("0 violations"));
    let o = nldir(&["compare", "--config", &cfg, "--variants", "product,dirac_diagonal"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("product vs dirac_diagonal"));
    let out = dir.path().join("u.csv");
    let o = nldir(&["solve", "--config", &cfg, "--data", "linear_x", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().next().unwrap(), "x,y,u");
    let dirac = write_config(
        dir.path(),
        r#"{"shape": {"rect": [[0, 0], [1, 1]]}, "case": "zero", "deltas": [0.2], "penalty": {"variant": "dirac_diagonal"}}"#,
    );
    let o = nldir(&["solve", "--config", &dirac, "--data", "linear_x"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_json(&o)["kind"], "penalty_contract");
}
