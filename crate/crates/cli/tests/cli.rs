use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hypsegal"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn hypsegal")
}

fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn symbolic_suite_passes() {
    let out = run(&["suite", "--suite", "symbolic"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["suite"], "symbolic");
    assert!(!v["checks"].as_array().unwrap().is_empty());
}

#[test]
fn isometry_suite_passes_n1() {
    let out = run(&["suite", "--suite", "isometry", "--n", "1", "--t", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn invalid_geometry_exits_nonzero() {
    let out = run(&["--eps", "0", "suite", "--suite", "symbolic"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("eps"));
    let out = run(&["--eps", "0.6", "kernel"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let a = run(&["--seed", "7", "suite", "--suite", "symbolic"]);
    let b = run(&["--seed", "7", "suite", "--suite", "symbolic"]);
    assert_eq!(a.stdout, b.stdout);
    let a = run(&["--sequential", "table", "--kind", "convergence"]);
    let b = run(&["table", "--kind", "convergence"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn convergence_table_reaches_limit() {
    let out = run(&["--n", "1", "--t", "0.5", "table", "--kind", "convergence", "--lambda", "1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# "));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 7);
    let last = rows.last().unwrap();
    let extrapolated: f64 = last[5].parse().unwrap();
    let residual: f64 = last[6].parse().unwrap();
    // e^{t(lambda^2 + n^2)} with t = 1/2, lambda = 1, n = 1
    let exact = std::f64::consts::E;
    assert!(((extrapolated - exact) / exact).abs() < 1e-6);
    assert!(residual < 1e-6);
}

#[test]
fn kernel_table_skips_pole() {
    let out = run(&["--n", "1", "kernel", "--from", "0", "--to", "3.141592653589793", "--points", "5"]);
    assert!(out.status.success());
    let rows = data_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert!(r[1].parse::<f64>().unwrap().is_finite());
    }
    let out = run(&["kernel", "--flavor", "gamma", "--from", "0", "--to", "3.141592653589793", "--points", "5"]);
    assert_eq!(data_rows(&String::from_utf8(out.stdout).unwrap()).len(), 5);
}

#[test]
fn empty_grid_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k.csv");
    let out = run(&["kernel", "--points", "0", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with('#'));
    assert_eq!(lines[1], "r,value");
}

fn write(path: &Path, s: &str) {
    std::fs::write(path, s).unwrap();
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    write(&cfg, "# test run\nn = 2\nt = 1.0\neps = 0.25\n");
    let out = run(&["--config", cfg.to_str().unwrap(), "--n", "3", "kernel", "--points", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.contains("n=3"));
    assert!(header.contains("t=1 "));
    assert!(header.contains("eps=0.25"));

    write(&cfg, "bogus = 1\n");
    let out = run(&["--config", cfg.to_str().unwrap(), "kernel"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
}

#[test]
fn limit_reports_are_json() {
    let out = run(&["--t", "1", "spherheat", "--lambda", "0.5"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["R_sequence"].as_array().unwrap().len(), 7);
    assert!(v["residual"].as_f64().unwrap() < 1e-6);

    let out = run(&["--t", "1", "inversion", "--profile", "heat"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["residual"].as_f64().unwrap() < 1e-4);
}

#[test]
fn transform_inverse_lists_radii() {
    let out = run(&["transform", "--profile", "gaussian", "--inverse", "0,0.5,1"]);
    assert!(out.status.success());
    let rows = data_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), 3);
}

#[test]
fn transform_reads_profile_and_applies_heat() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("f.csv");
    let out = run(&["--n", "2", "transform", "--profile", "gaussian", "--out", src.to_str().unwrap()]);
    assert!(out.status.success());
    let evolved = run(&["transform", "--in", src.to_str().unwrap(), "--t", "1"]);
    assert!(evolved.status.success(), "{}", String::from_utf8_lossy(&evolved.stderr));
    let (a, b) = (std::fs::read_to_string(&src).unwrap(), String::from_utf8(evolved.stdout).unwrap());
    let rows = |s: &str| -> Vec<(f64, f64)> {
        s.lines()
            .skip(3)
            .map(|l| {
                let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
                (v[0], v[1])
            })
            .collect()
    };
    let (ra, rb) = (rows(&a), rows(&b));
    assert_eq!(ra.len(), rb.len());
    for ((l, fa), (_, fb)) in ra.iter().zip(&rb) {
        let want = fa * (-0.5 * (l * l + 4.0)).exp();
        assert!((fb - want).abs() <= 1e-14 * fa.abs().max(1e-300), "lambda={l}");
    }
    let missing = run(&["transform", "--in", dir.path().join("none.csv").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
}
