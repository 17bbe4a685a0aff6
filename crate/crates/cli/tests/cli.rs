//! End-to-end tests of the `infconv` binary: transform output, exit-code
//! contract, and the full default suite (criterion 12: exits 0, runs in
//! minutes, and report.json is byte-identical across consecutive runs).

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_infconv"))
}

fn default_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs/default.json")
        .canonicalize()
        .expect("bundled default config")
}

#[test]
fn transform_moreau_writes_grid_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.json");
    let status = bin()
        .args([
            "transform",
            "moreau",
            "--family",
            "quadratic:a=1",
            "--t",
            "1",
            "--grid",
            "d1-default",
            "-o",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let f = infconv::grid::GridFunction::from_json(&text).unwrap();
    // Hf = x^2/4 at x = 2 (node 160)
    assert!((f.value(160) - 1.0).abs() <= 1e-12);
}

#[test]
fn transform_polar_of_gaussian_is_self_dual() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("polar.json");
    let status = bin()
        .args([
            "transform",
            "polar",
            "--family",
            "gaussian_density:a=1",
            "--grid",
            "d1-default",
            "-o",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let f = infconv::grid::GridFunction::from_json(&std::fs::read_to_string(&out).unwrap())
        .unwrap();
    // F polar = F: at x = 1 (node 140), e^{-1/2}
    assert!((f.value(140) - (-0.5f64).exp()).abs() <= 1e-9);
}

#[test]
fn transform_missing_t_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.json");
    let status = bin()
        .args(["transform", "moreau", "--family", "quadratic:a=1", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn transform_unknown_family_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.json");
    let status = bin()
        .args([
            "transform",
            "moreau",
            "--family",
            "nope:a=1",
            "--t",
            "1",
            "-o",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn transform_grid_json_input_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let spec = infconv::grid::make_grid(1, &[2.0], &[21]).unwrap();
    let f = infconv::grid::sample(&infconv::grid::FunctionFamily::abs(), &spec).unwrap();
    let input = dir.path().join("in.json");
    std::fs::write(&input, f.to_json().unwrap()).unwrap();
    let out = dir.path().join("out.json");
    let status = bin()
        .args(["transform", "legendre", "--input"])
        .arg(&input)
        .arg("-o")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let conj = infconv::grid::GridFunction::from_json(&std::fs::read_to_string(&out).unwrap())
        .unwrap();
    // |x|* = 0 on [-1, 1]
    assert_eq!(conj.value(10), 0.0);
}

#[test]
fn list_prints_families_and_ids() {
    let output = bin().arg("list").output().unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.contains("quadratic:a"));
    assert!(text.contains("symmetric_tau"));
    assert!(text.contains("santalo_volume"));
}

#[test]
fn verify_parity_usage_error_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(
        &cfg,
        r#"{"checks": [{"inequality_id": "symmetric_tau", "family": "linear:b=1", "dim": 1}]}"#,
    )
    .unwrap();
    let status = bin()
        .arg("verify")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn verify_malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"checks": [{"inequality_id": "no_such_check"}]}"#).unwrap();
    let status = bin()
        .arg("verify")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn verify_impossible_tolerance_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tight.json");
    // the discrete product sits strictly above 1 (upward transform bias),
    // so tolerance 0 must fail
    std::fs::write(
        &cfg,
        r#"{"checks": [{"inequality_id": "symmetric_tau", "family": "quadratic:a=1", "dim": 1, "tolerance": 0.0}]}"#,
    )
    .unwrap();
    let output = bin()
        .arg("verify")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.contains("FAIL"));
    // the margin is shown in the summary
    assert!(text.contains("e-") || text.contains("e0"));
}

#[test]
fn c12_default_suite_green_and_deterministic() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("run1");
    let out2 = dir.path().join("run2");
    let cfg = default_config();

    let status1 = bin()
        .arg("verify")
        .arg(&cfg)
        .arg("--out")
        .arg(&out1)
        .status()
        .unwrap();
    assert_eq!(status1.code(), Some(0), "default suite must exit 0");

    let status2 = bin()
        .arg("verify")
        .arg(&cfg)
        .arg("--out")
        .arg(&out2)
        .env("INFCONV_THREADS", "4")
        .status()
        .unwrap();
    assert_eq!(status2.code(), Some(0));

    let json1 = std::fs::read(out1.join("report.json")).unwrap();
    let json2 = std::fs::read(out2.join("report.json")).unwrap();
    assert_eq!(json1, json2, "report.json must be byte-identical across runs");

    let csv = std::fs::read_to_string(out1.join("report.csv")).unwrap();
    assert!(csv.starts_with("id,lhs,rhs,margin,tolerance,pass\n"));
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));

    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 300.0, "two suite runs took {elapsed:.1}s");
    println!(
        "criterion 12: PASS - default suite exits 0, byte-identical reports, two runs in {elapsed:.1}s"
    );
}
