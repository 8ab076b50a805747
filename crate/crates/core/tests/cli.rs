use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bfn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bfn")).args(args).output().expect("bfn runs")
}

fn run_config(dir: &Path, text: &str) -> Output {
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, text).unwrap();
    let out = dir.join("out");
    bfn(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

fn rate_column(csv: &str) -> Vec<Option<f64>> {
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,w0,wtilde0,rate"));
    lines
        .map(|l| {
            let cell = l.split(',').nth(3).unwrap();
            (!cell.is_empty()).then(|| cell.parse().unwrap())
        })
        .collect()
}

#[test]
fn fixed_point_config_reports_zero_norms() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(
        dir.path(),
        "# u0 equals the observations\nequation = linear\nadvection = 1\nT = 0.5\ngrid_n = 64\nnt = 64\nu0 = sin_2pi 0.3\nuobs0 = sin_2pi 0.3\n",
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/report.json")).unwrap()).unwrap();
    let it = &report["iterations"][0];
    for key in ["w0_norm", "wt_norm", "wtilde0_norm"] {
        assert_eq!(it[key].as_f64(), Some(0.0), "{key}");
    }
    let rates = rate_column(&fs::read_to_string(dir.path().join("out/profile.csv")).unwrap());
    assert_eq!(rates.len(), 64);
    assert!(rates.iter().all(Option::is_none));
}

#[test]
fn half_support_transport_rate_is_one_at_t_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(
        dir.path(),
        "equation = linear\nadvection = 1\nT = 1\ngrid_n = 128\nnt = 256\ngain_support = 0, 0.5\n",
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rates = rate_column(&fs::read_to_string(dir.path().join("out/profile.csv")).unwrap());
    let present: Vec<f64> = rates.into_iter().flatten().collect();
    // sin(2 pi x) vanishes at x = 0 and x = 0.5 only.
    assert_eq!(present.len(), 126);
    for r in present {
        assert!((r - 1.0).abs() <= 1e-6, "{r}");
    }
}

#[test]
fn viscous_burgers_with_gain_exits_two_and_cites_the_result() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(
        dir.path(),
        "equation = burgers\nviscosity = 0.05\nT = 0.5\ngrid_n = 65\ngain_amplitude = 1\n",
    );
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("Theorem 2"), "{stderr}");
    assert!(stderr.contains("bn_sequence"), "{stderr}");
    assert!(!dir.path().join("out/report.json").exists());
}

#[test]
fn bad_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(dir.path(), "equation = linear\nspeed = 3\n");
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("speed"));
}

#[test]
fn mismatched_boundary_condition_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(dir.path(), "equation = linear\nviscosity = 0.01\nadvection = 0\nbc = periodic\n");
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bn_growth_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("bn");
    let out = bfn(&["bn-growth", "--N", "32", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("bn.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,log10_abs_bn,g_n"));
    assert_eq!(lines.count(), 32);
    assert!(!String::from_utf8_lossy(&out.stdout).trim().is_empty());
}

#[test]
fn bn_growth_rejects_large_n() {
    let out = bfn(&["bn-growth", "--N", "100000", "--out", "unused"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn figure1_linear_writes_one_rate_column_per_time() {
    let dir = tempfile::tempdir().unwrap();
    let out = bfn(&[
        "figure1",
        "linear",
        "--T",
        "0.25,1",
        "--grid-n",
        "64",
        "--nt",
        "128",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("figure1_linear.csv")).unwrap();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    assert_eq!(header.len(), 3, "{header:?}");
    assert_eq!(csv.lines().count(), 65);
    assert!(dir.path().join("figure1_linear.plt").exists());
}

#[test]
fn colehopf_check_prints_small_deviation() {
    let out = bfn(&["colehopf-check", "--grid-n", "129"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let dev: f64 = stdout.rsplit(':').next().unwrap().trim().parse().unwrap();
    assert!(dev <= 1e-6, "{stdout}");
}
