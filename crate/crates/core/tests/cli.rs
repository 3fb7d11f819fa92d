use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sublinear_lab::cli::{parse_scenario, parse_sweep, sweep};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{name}.cfg"))
}

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sublinear-lab")).args(args).output().unwrap()
}

fn run_config(config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", "--config", config.to_str().unwrap(), "--out-dir", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    lab(&args)
}

fn floats(col: Vec<&str>) -> Vec<f64> {
    col.iter().map(|v| v.parse().unwrap()).collect()
}

#[test]
fn completed_run_writes_report_and_fields() {
    let out = tempfile::tempdir().unwrap();
    let o = run_config(&scenario("manufactured_1d"), out.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let dir = out.path().join("manufactured_1d");
    let report = fs::read_to_string(dir.join("report.txt")).unwrap();
    let err: f64 = report.lines().find_map(|l| l.strip_prefix("max_error = ")).unwrap().parse().unwrap();
    assert!(err <= 1e-4);
    assert!(report.contains("version = ") && report.contains("solution = fields/solution.csv"));
    assert!(dir.join("fields/solution.csv").exists() && dir.join("timing.txt").exists());
}

#[test]
fn failed_flux_is_data_not_an_error() {
    let out = tempfile::tempdir().unwrap();
    let o = run_config(&scenario("flux_fail"), out.path(), &[]);
    assert_eq!(o.status.code(), Some(0));
    let report = fs::read_to_string(out.path().join("flux_fail/report.txt")).unwrap();
    assert!(report.contains("flux_pass = false"));
    assert!(report.contains("verdict_uses = "));
}

#[test]
fn config_errors_exit_with_two() {
    let out = tempfile::tempdir().unwrap();
    let bad = out.path().join("bad.cfg");
    let text = fs::read_to_string(scenario("interval_basic")).unwrap().replace("p = 0.5", "p = 1.5");
    fs::write(&bad, text).unwrap();
    let o = run_config(&bad, out.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("p must lie in (0,1)"));

    assert_eq!(run_config(&out.path().join("missing.cfg"), out.path(), &[]).status.code(), Some(2));
    assert_eq!(run_config(&scenario("interval_basic"), out.path(), &["--sweep", "kappa=1,2"]).status.code(), Some(2));
    assert_eq!(lab(&["run"]).status.code(), Some(2));
}

#[test]
fn pipeline_errors_exit_with_one() {
    let out = tempfile::tempdir().unwrap();
    let bad = out.path().join("concave.cfg");
    let text = fs::read_to_string(scenario("integral_interval")).unwrap().replace("expr = -1\n", "expr = -1 + 8*x*(0.5 - x)\n");
    fs::write(&bad, text).unwrap();
    let o = run_config(&bad, out.path(), &[]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("convex"));
}

#[test]
fn resolution_override_and_sweep_table() {
    let out = tempfile::tempdir().unwrap();
    let o = run_config(&scenario("poisson_1d"), out.path(), &["--resolution", "32"]);
    assert_eq!(o.status.code(), Some(0));
    let report = fs::read_to_string(out.path().join("poisson_1d/report.txt")).unwrap();
    assert!(report.contains("resolution = 32"));

    let o = run_config(&scenario("poisson_1d"), out.path(), &["--sweep", "resolution=16,32"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(out.path().join("poisson_1d/sweep_resolution.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with("resolution,solution_max,max_error"));
}

#[test]
fn p_sweep_drives_ball_lhs_below_rhs() {
    let s = parse_scenario(&scenario("threshold_above")).unwrap();
    let spec = parse_sweep("p=0.5,0.9,0.99").unwrap();
    let t = sweep(&s, &spec.param, &spec.values).unwrap();
    let lhs = floats(t.column("lhs").unwrap());
    let rhs = floats(t.column("rhs").unwrap());
    assert!(lhs.windows(2).all(|w| w[1] < w[0]), "{lhs:?}");
    assert!(lhs[0] > rhs[0] && lhs[2] < rhs[2]);
    assert_eq!(t.column("verdict").unwrap(), ["nonexistence certified", "no information", "no information"]);
}

#[test]
fn resolution_sweep_has_second_order_error() {
    let s = parse_scenario(&scenario("poisson_square")).unwrap();
    let t = sweep(&s, "resolution", &[64.0, 128.0, 256.0]).unwrap();
    let e = floats(t.column("max_error").unwrap());
    let slope = ((e[0] / e[2]).ln() / 4f64.ln()).abs();
    assert!((1.9..=2.1).contains(&slope), "{e:?} slope {slope}");
}

#[test]
fn weight_scale_sweep_is_homogeneous() {
    // u solves −Δu = m√u  ⇒  c²u solves −Δv = (c m)√v.
    let s = parse_scenario(&scenario("interval_basic")).unwrap();
    let scales = [1.0, 2.0, 5.0];
    let t = sweep(&s, "weight_scale", &scales).unwrap();
    let solution = |k: usize| t.reports[k].fields.iter().find(|(n, _)| n == "solution").unwrap().1.values().to_vec();
    let base = solution(0);
    let peak = base.iter().fold(0.0f64, |a, v| a.max(*v));
    for (k, c) in scales.iter().enumerate().skip(1) {
        let u = solution(k);
        let worst = base.iter().zip(&u).map(|(a, b)| (c * c * a - b).abs()).fold(0.0, f64::max) / (c * c * peak);
        assert!(worst <= 1e-6, "scale {c}: {worst:e}");
    }
}

#[test]
fn sweep_rejects_unknown_parameters() {
    assert!(parse_sweep("kappa=1").is_err());
    assert!(parse_sweep("p=0.5,x").is_err());
    let s = parse_scenario(&scenario("interval_basic")).unwrap();
    assert!(sweep(&s, "p", &[1.5]).is_err());
}
