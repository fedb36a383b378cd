use std::f64::consts::{FRAC_PI_2, TAU};
use std::fs::{self, File};
use std::io::BufReader;
use std::path::Path;
use std::process::{Command, Output};

use ectomo::analysis::{classify_strands, find_ridges, DEFAULT_RIDGE_THRESHOLD};
use ectomo::grid_io::{read_csv, read_q_curve};

fn ectomo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ectomo")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("no {key} in\n{text}"))
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn conditional_example_is_double() {
    let out =
        ectomo(&["conditional", "--alpha-sq", "10", "--delta", "0.2", "--h", "0", "--x2", "2.0", "--theta2", "1.7708"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(field(&text, "label"), "double");
    assert!(field(&text, "mandel_q").parse::<f64>().unwrap() > 0.0);

    let out = ectomo(&["conditional", "--alpha-sq", "10", "--h", "1", "--x2", "2.0", "--theta2", "0.5"]);
    assert!(out.status.success());
    assert_eq!(field(&stdout(&out), "label"), "single");
}

#[test]
fn coherent_input_is_single() {
    let out = ectomo(&["conditional", "--alpha-sq", "10", "--coherent", "--x2", "0", "--theta2", "1.7708"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(field(&text, "source"), "separable");
    assert_eq!(field(&text, "label"), "single");
}

#[test]
fn qcurve_peaks_at_quarter_turns() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("q.csv");
    let out = ectomo(&["qcurve", "--alpha-sq", "10", "--x2", "2", "--out", path_str(&csv)]);
    assert!(out.status.success());
    assert!(fs::read_to_string(&csv).unwrap().starts_with("# phi, Q\n"));
    let points = read_q_curve(BufReader::new(File::open(&csv).unwrap())).unwrap();
    assert_eq!(points.len(), 721);

    let step = TAU / 720.0;
    let peak = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    assert!(peak > 0.0);
    for &(phi, q) in &points {
        let near_peak = [FRAC_PI_2, 3.0 * FRAC_PI_2].iter().any(|c| (phi - c).abs() <= step);
        if near_peak {
            assert!(q > 0.9 * peak, "φ={phi} Q={q:e}");
        } else if [FRAC_PI_2, 3.0 * FRAC_PI_2].iter().all(|c| (phi - c).abs() > 0.4) {
            assert!(q < 0.1 * peak && q.abs() < 0.05, "φ={phi} Q={q:e}");
        }
    }
}

#[test]
fn entropy_is_one_bit() {
    let out = ectomo(&["entropy", "--alpha-sq", "10", "--h", "0"]);
    assert!(out.status.success());
    let bits: f64 = field(&stdout(&out), "entropy_bits").parse().unwrap();
    assert!((bits - 1.0).abs() < 1e-3);
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for format in ["csv", "pgm"] {
        let files: Vec<_> = (0..2).map(|k| dir.path().join(format!("g{k}.{format}"))).collect();
        for f in &files {
            let out = ectomo(&[
                "conditional",
                "--alpha-sq",
                "10",
                "--x2",
                "2",
                "--theta2",
                "1.7708",
                "--theta1-steps",
                "64",
                "--format",
                format,
                "--out",
                path_str(f),
            ]);
            assert!(out.status.success());
        }
        let (a, b) = (fs::read(&files[0]).unwrap(), fs::read(&files[1]).unwrap());
        assert!(!a.is_empty());
        assert_eq!(a, b);
    }
}

#[test]
fn csv_round_trip_reproduces_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("grid.csv");
    let out = ectomo(&["conditional", "--alpha-sq", "10", "--x2", "2", "--theta2", "1.7708", "--out", path_str(&csv)]);
    assert!(out.status.success());
    let text = stdout(&out);
    let grid = read_csv(BufReader::new(File::open(&csv).unwrap())).unwrap();
    assert_eq!((grid.theta_axis().len(), grid.x_axis().len()), (128, 321));
    let verdict = classify_strands(&find_ridges(&grid, DEFAULT_RIDGE_THRESHOLD).unwrap());
    assert_eq!(verdict.label.to_string(), field(&text, "label"));
    assert_eq!(format!("{:.6}", verdict.fraction_double), field(&text, "fraction_double"));
}

#[test]
fn tomogram_writes_pgm() {
    let dir = tempfile::tempdir().unwrap();
    let pgm = dir.path().join("t.pgm");
    let out = ectomo(&[
        "tomogram",
        "--alpha-sq",
        "4",
        "--h",
        "1",
        "--theta1-steps",
        "16",
        "--x1-steps",
        "41",
        "--format",
        "pgm",
        "--out",
        path_str(&pgm),
    ]);
    assert!(out.status.success());
    let bytes = fs::read(&pgm).unwrap();
    let header = b"P5\n16 41\n255\n";
    assert!(bytes.starts_with(header));
    assert_eq!(bytes.len(), header.len() + 16 * 41);
    assert!(field(&stdout(&out), "max_column_error").parse::<f64>().unwrap() < 1e-6);
}

#[test]
fn validate_passes_with_default_cutoff() {
    let out = ectomo(&["validate", "--alpha-sq", "2", "--h", "1"]);
    assert!(out.status.success());
    assert_eq!(field(&stdout(&out), "status"), "pass");
}

#[test]
fn usage_errors_exit_two() {
    let cases: [&[&str]; 6] = [
        &["tomogram", "--alpha-sq", "10", "--x1-min", "3", "--x1-max", "-3"],
        &["tomogram", "--alpha-sq", "10", "--x1-steps", "1"],
        &["tomogram", "--alpha-sq", "-1"],
        &["conditional", "--alpha-sq", "10", "--x2", "2"],
        &["entropy", "--alpha-sq", "10", "--h", "2"],
        &["validate", "--alpha-sq", "10", "--dim", "20"],
    ];
    for args in cases {
        let out = ectomo(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    let out = ectomo(&["tomogram", "--alpha-sq", "10", "--x1-min", "3", "--x1-max", "-3"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--x1-min must be below --x1-max"));
}

#[test]
fn degenerate_conditioning_exits_three() {
    let out = ectomo(&["conditional", "--alpha-sq", "10", "--x2", "60", "--theta2", "0.2"]);
    assert_eq!(out.status.code(), Some(3));
    let out = ectomo(&["qcurve", "--alpha-sq", "10", "--x2", "60"]);
    assert_eq!(out.status.code(), Some(3));
}
