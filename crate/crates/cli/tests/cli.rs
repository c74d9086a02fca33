use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tanksim::gmproc::{parse_record, write_record, GroundMotion, RecordFormat, Units};

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tanksim"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

fn write_motion(dir: &Path, name: &str, gm: &GroundMotion) -> String {
    let path = dir.join(name);
    fs::write(&path, write_record(gm, RecordFormat::TwoColumnCsv, Units::MetersPerSecondSquared, &[])).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn modal_reports_first_convective_period() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let r = run(&out, &["modal", "--spec", "broad", "--method", "en"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let stdout = String::from_utf8_lossy(&r.stdout);
    assert!(stdout.contains("2.100"), "{stdout}");
    assert!(out.join("modal.csv").exists());
    assert!(out.join("modal.json").exists());
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let r = run(&out, &["modal", "--spec", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
    let r = run(&out, &["scale-record", "--record", "nowhere.csv", "--lambda", "0.5"]);
    assert_eq!(r.status.code(), Some(2));
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "this is = = not toml").unwrap();
    let r = run(&out, &["modal", "--spec", bad.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn validate_only_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let r = run(&out, &["--validate-only", "uplift-curve", "--spec", "broad"]);
    assert!(r.status.success());
    assert_eq!(String::from_utf8_lossy(&r.stdout).trim(), "ok");
    assert!(!out.exists() || fs::read_dir(&out).unwrap().next().is_none());
}

#[test]
fn zero_record_gives_zero_response() {
    let dir = tempfile::tempdir().unwrap();
    let rec = write_motion(dir.path(), "zero.csv", &GroundMotion::zeros("zero", 0.01, 500));
    let out = dir.path().join("out");
    let r = run(&out, &["simulate", "--spec", "broad", "--record", &rec, "--uplift"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let mut checked = 0;
    for entry in fs::read_dir(&out).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("csv") {
            continue;
        }
        let text = fs::read_to_string(&path).unwrap();
        for line in text.lines().skip(1) {
            // first column is time
            for cell in line.split(',').skip(1) {
                assert_eq!(cell.parse::<f64>().unwrap(), 0.0, "{}: {line}", path.display());
            }
        }
        checked += 1;
    }
    assert!(checked > 0);
}

#[test]
fn scale_record_shrinks_time_step() {
    let dir = tempfile::tempdir().unwrap();
    let gm = GroundMotion::sine("sine", 1.0, 1.0, 0.01, 2.0);
    let rec = write_motion(dir.path(), "sine.csv", &gm);
    let out = dir.path().join("out");
    let r = run(&out, &["scale-record", "--record", &rec, "--lambda", &(1.0 / 18.0).to_string()]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let scaled = parse_record(&fs::read(out.join("sine_scaled.csv")).unwrap(), RecordFormat::TwoColumnCsv, "s")
        .unwrap()
        .motion;
    assert!((scaled.dt / gm.dt - 0.2357).abs() < 1e-4);
    assert_eq!(scaled.accel.len(), gm.accel.len());
    for (a, b) in scaled.accel.iter().zip(&gm.accel) {
        assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
    }
}

#[test]
fn anchored_spec_refuses_uplift_curve() {
    let dir = tempfile::tempdir().unwrap();
    let r = run(&dir.path().join("out"), &["uplift-curve", "--spec", "slender"]);
    assert_eq!(r.status.code(), Some(2));
}
