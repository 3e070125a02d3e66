use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ksim_cli::pipeline::{Report, Status};
use ksim_core::io::read_grid_data;

fn ksim(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ksim")).args(args).arg("--out").arg(out).output().expect("spawn ksim")
}

fn report(dir: &Path) -> Report {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn max_abs(p: &Path) -> f64 {
    let (_, data) = read_grid_data(&mut fs::File::open(p).unwrap()).unwrap();
    data.iter().fold(0.0, |m, v| f64::max(m, v.abs()))
}

#[test]
fn zero_epsilon_gives_zero_data_and_mass() {
    let d = tempfile::tempdir().unwrap();
    let o = ksim(&["diagnose", "--epsilon", "0", "--grid", "12x16"], d.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["tuple/b.bin", "tuple/f_potential.bin", "tuple/phi.bin", "tuple/log_lapse.bin", "seed/b_check.bin"] {
        assert_eq!(max_abs(&d.path().join(f)), 0.0, "{f}");
    }
    let r = report(d.path());
    let run = &r.runs[0];
    assert_eq!(run.constraint.as_ref().unwrap().kappa, 0.0);
    let diag = run.diagnostics.as_ref().unwrap();
    assert!(diag.mass.mass.abs() <= 1e-12);
    assert!(diag.shear.is_none());
    assert_eq!(r.acceptance["C09"].status, Status::Pass);
}

#[test]
fn bad_config_exits_with_code_2() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("bad.toml");
    fs::write(&cfg, "[seed]\nepsilonn = 1e-3\n").unwrap();
    let o = ksim(&["seed", "--config", cfg.to_str().unwrap()], &d.path().join("o"));
    assert_eq!(o.status.code(), Some(2));
    fs::write(&cfg, "[chardata]\nv_min = 2.0\n").unwrap();
    assert_eq!(ksim(&["chardata", "--config", cfg.to_str().unwrap()], &d.path().join("o")).status.code(), Some(2));
    assert_eq!(ksim(&["seed", "--gamma", "0.9"], &d.path().join("o")).status.code(), Some(2));
    assert_eq!(ksim(&["sweep", "--grid", "12x16", "--sweep-epsilon", "1e-3,-1"], &d.path().join("o")).status.code(), Some(2));
}

#[test]
fn missing_config_file_is_a_config_error() {
    let d = tempfile::tempdir().unwrap();
    let o = ksim(&["seed", "--config", "/nonexistent/ksim.toml"], d.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reference_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["constraint", "--grid", "16x32", "--epsilon", "4e-3", "--reference-mode"];
    assert!(ksim(&args, a.path()).status.success());
    assert!(ksim(&args, b.path()).status.success());
    let ra = report(a.path());
    let bins: Vec<&String> = ra.artifacts.iter().filter(|f| f.ends_with(".bin")).collect();
    assert!(bins.len() >= 5);
    for f in bins {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let ja = fs::read_to_string(a.path().join("report.json")).unwrap();
    let jb = fs::read_to_string(b.path().join("report.json")).unwrap();
    assert_eq!(ja.replace(a.path().to_str().unwrap(), ""), jb.replace(b.path().to_str().unwrap(), ""));
}

#[test]
fn report_reload_keeps_identical_floats() {
    let d = tempfile::tempdir().unwrap();
    let o = ksim(&["sweep", "--grid", "16x32", "--reference-mode"], d.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(d.path().join("report.json")).unwrap();
    let r: Report = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string_pretty(&r).unwrap(), text.trim_end());
    let s = r.sweep.as_ref().unwrap();
    assert_eq!(s.rows.len(), 3);
    assert!(s.constraint_seconds.is_none());
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let k = v["sweep"]["rows"][1]["kappa"].as_f64().unwrap();
    assert_eq!(k.to_bits(), s.rows[1].kappa.to_bits());
    assert!(d.path().join("sweep.csv").exists());
}

#[test]
fn single_run_report_has_no_sweep_section() {
    let d = tempfile::tempdir().unwrap();
    assert!(ksim(&["constraint", "--grid", "12x16", "--epsilon", "1e-3"], d.path()).status.success());
    let r = report(d.path());
    assert!(r.sweep.is_none());
    assert_eq!(r.runs.len(), 1);
    assert_eq!(r.acceptance["C01"].status, Status::NotEvaluated);
    assert_eq!(r.acceptance["C02"].status, Status::Pass);
    assert_eq!(r.acceptance.len(), 13);
}

#[test]
fn empty_sweep_reports_a_single_run() {
    let d = tempfile::tempdir().unwrap();
    let o = ksim(&["sweep", "--grid", "12x16", "--epsilon", "2e-3", "--sweep-epsilon", ""], d.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(d.path());
    assert!(r.sweep.is_none());
    assert_eq!(r.runs.len(), 1);
    assert_eq!(r.runs[0].epsilon, 2e-3);
    assert!(r.runs[0].diagnostics.is_some());
    assert!(!d.path().join("sweep.csv").exists());
}

#[test]
fn failed_criterion_shows_measured_and_expected() {
    let d = tempfile::tempdir().unwrap();
    let o = ksim(&["chardata", "--grid", "12x16", "--epsilon", "4e-3", "--check"], d.path());
    let r = report(d.path());
    let c7 = &r.acceptance["C07"];
    if c7.status == Status::Fail {
        assert_eq!(o.status.code(), Some(4));
        let bad = c7.checks.iter().find(|c| !c.pass).unwrap();
        assert!(bad.measured.is_finite() && bad.expected.starts_with("<="));
    } else {
        assert!(o.status.success());
    }
}

#[test]
fn written_fields_reload_on_the_run_grid() {
    let d = tempfile::tempdir().unwrap();
    assert!(ksim(&["constraint", "--grid", "12x16", "--epsilon", "2e-3"], d.path()).status.success());
    let (t, meta) = ksim_core::io::load_tuple(&d.path().join("tuple")).unwrap();
    let r = report(d.path());
    assert_eq!(t.kappa, r.runs[0].constraint.as_ref().unwrap().kappa);
    assert_eq!((meta.n_theta, meta.n_phi), (12, 16));
    let csv = fs::read_to_string(d.path().join("tuple/b.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 12 * 16);
}
