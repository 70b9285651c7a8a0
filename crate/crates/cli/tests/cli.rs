use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const LINEAR: &str = "gamma=1\nb=1\nw.kind=constant\nw.coeffs=1\nwindow.e_min=2\nwindow.e_max=3\n";
const FREE: &str = "gamma=1\nb=1\nw.kind=zero\nwindow.e_min=1\nwindow.e_max=4\nstudy.h_list=1e-2\n";

fn swkb(dir: &Path, command: &str, config: &str, extra: &[&str]) -> Output {
    let path = dir.join("study.cfg");
    fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_swkb"))
        .arg(command)
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .output()
        .unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(2).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn validate_prints_gap() {
    let dir = TempDir::new().unwrap();
    let out = swkb(dir.path(), "validate", LINEAR, &[]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.lines().any(|l| l == "delta=1.0"), "{stdout}");
}

#[test]
fn free_eigenvalues_are_exact() {
    let dir = TempDir::new().unwrap();
    let out = swkb(dir.path(), "eigenvalues", FREE, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out/spectral.csv")).unwrap();
    let rows = rows(&csv);
    assert!(!rows.is_empty());
    for r in rows {
        let (h, k, e): (f64, f64, f64) = (r[0].parse().unwrap(), r[2].parse().unwrap(), r[3].parse().unwrap());
        assert!((e - (k * PI * h).powi(2)).abs() <= 1e-10, "{r:?}");
    }
}

#[test]
fn csv_has_header_then_hash() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("{LINEAR}study.h_list=1e-1,5e-2\n");
    assert_eq!(swkb(dir.path(), "transfer", &cfg, &[]).status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("out/transfer.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("h,E,m11,m12,m21,m22,det,imag_defect"));
    let hash = lines.next().unwrap().strip_prefix("# config-hash: ").unwrap();
    assert_eq!(hash.len(), 64);
    assert!(!csv.contains('\r'));
    // 17 significant digits
    let first = lines.next().unwrap().split(',').next().unwrap();
    assert_eq!(first, "1.0000000000000001e-1");
    assert_eq!(first.parse::<f64>().unwrap(), 0.1);
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let cfg = format!("{LINEAR}study.h_list=1e-1,5e-2,2e-2\nstudy.energies=2.2,2.5,2.9\n");
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    assert_eq!(swkb(a.path(), "transfer", &cfg, &["--threads", "1"]).status.code(), Some(0));
    assert_eq!(swkb(b.path(), "transfer", &cfg, &["--threads", "3"]).status.code(), Some(0));
    let x = fs::read(a.path().join("out/transfer.csv")).unwrap();
    let y = fs::read(b.path().join("out/transfer.csv")).unwrap();
    assert_eq!(x, y);
}

#[test]
fn threads_fall_back_to_environment() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("study.cfg");
    fs::write(&path, LINEAR).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_swkb"))
        .args(["validate", "--config"])
        .arg(&path)
        .env("SWKB_THREADS", "not-a-number")
        .output()
        .unwrap();
    // clap reads the variable, so a malformed value is a usage error
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn gap_violation_exits_one() {
    let dir = TempDir::new().unwrap();
    let cfg = "gamma=1\nb=1\nw.kind=constant\nw.coeffs=1\nwindow.e_min=0.5\nwindow.e_max=3\n";
    let out = swkb(dir.path(), "validate", cfg, &[]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert_eq!(stderr.lines().count(), 1, "{stderr}");
}

#[test]
fn malformed_config_exits_sixty_four() {
    let dir = TempDir::new().unwrap();
    for cfg in ["gamma=1\nb=1\n", "gamma=1\ncolour=red\n", "this is not a config\n"] {
        assert_eq!(swkb(dir.path(), "validate", cfg, &[]).status.code(), Some(64), "{cfg}");
    }
}

#[test]
fn tolerance_failure_exits_two() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("{LINEAR}study.h_list=1e-1\ntol.det=1e-30\n");
    let out = swkb(dir.path(), "check", &cfg, &[]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.starts_with("swkb: det"), "{stderr}");
    assert!(dir.path().join("out/check.csv").exists());
}

#[test]
fn check_passes_with_defaults() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("{LINEAR}study.h_list=1e-1,1e-2\n");
    let out = swkb(dir.path(), "check", &cfg, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn study_reports_slopes() {
    let dir = TempDir::new().unwrap();
    let cfg = "gamma=1.5\nb=1\nw.kind=polynomial\nw.coeffs=1,0.5\nwindow.e_min=2\nwindow.e_max=3\n\
               study.h_list=2e-2,1e-2,5e-3\nstudy.methods=bs_leading\n";
    let out = swkb(dir.path(), "study", cfg, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out/study.csv")).unwrap();
    let rows = rows(&csv);
    assert_eq!(rows.len(), 3);
    let slope: f64 = rows[0][3].parse().unwrap();
    assert!((slope - 2.0).abs() <= 0.3, "{slope}");
}

#[test]
fn fit_writes_coefficients() {
    let dir = TempDir::new().unwrap();
    let hs: Vec<String> = (0..20).map(|i| format!("{:e}", 0.1 * 0.01f64.powf(i as f64 / 19.0))).collect();
    let cfg = format!(
        "gamma=0.5\nb=1\nw.kind=polynomial\nw.coeffs=1,0.5\nwindow.e_min=2\nwindow.e_max=3\n\
               study.h_list={}\n",
        hs.join(",")
    );
    let out = swkb(dir.path(), "fit", &cfg, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("smallest_active_exponent="), "{stdout}");
    let csv = fs::read_to_string(dir.path().join("out/fit.csv")).unwrap();
    assert!(csv.starts_with("entry,m,n,a_plus,a_minus\n# config-hash: "));
}
