//! End-to-end checks of the command-line binary: exit-code contract,
//! byte-identical CSV output, and spec-file error reporting.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bmsymp"))
}

fn spec_path(name: &str) -> String {
    format!("{}/../../specs/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn profile_check_passes_with_exit_zero() {
    let out = run(&["profile", "--spec", &spec_path("darboux-k1.json")]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn coincide_passes_even_and_corrected_odd() {
    for spec in ["darboux-k1.json", "darboux-k1-odd.json"] {
        let out = run(&["coincide", "--spec", &spec_path(spec), "--eps", "0.1"]);
        assert_eq!(code(&out), 0, "{spec}: {}", stderr(&out));
    }
}

#[test]
fn coincide_fails_with_exit_one_on_literal_tail() {
    let out = run(&[
        "coincide",
        "--spec",
        &spec_path("darboux-k1-odd.json"),
        "--eps",
        "0.1",
        "--tail-mode",
        "paper-literal",
    ]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
}

#[test]
fn missing_spec_is_input_error() {
    let out = run(&["validate", "--spec", "/nonexistent/model.json"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).starts_with("error:"), "{}", stderr(&out));
}

#[test]
fn malformed_spec_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");

    fs::write(&path, r#"{ "m": 2, "n": 1, "alphas": [ {"dth1":1}, {}, {} ] }"#).unwrap();
    let out = run(&["validate", "--spec", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("m=2"), "{}", stderr(&out));

    fs::write(&path, "{ not json").unwrap();
    let out = run(&["validate", "--spec", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("syntax"), "{}", stderr(&out));
}

#[test]
fn tail_mode_rejected_for_even_profiles() {
    let out = run(&[
        "profile",
        "--spec",
        &spec_path("darboux-k1.json"),
        "--tail-mode",
        "corrected",
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("odd"), "{}", stderr(&out));
}

#[test]
fn bad_eps_override_is_input_error() {
    let out = run(&["validate", "--spec", &spec_path("darboux-k1.json"), "--eps", "0.7"]);
    assert_eq!(code(&out), 2);
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn volume_csv_is_byte_identical_across_runs() {
    let spec = spec_path("darboux-k1.json");
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    for d in [&d1, &d2] {
        let out = run(&["volume", "--spec", &spec, "--out", d.path().to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    let a = read(d1.path(), "volume.csv");
    assert_eq!(a, read(d2.path(), "volume.csv"));
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("eps,volume_complement,volume_inside,volume_total,predicted_total\n"));
    // 4 ladder entries + header
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn converge_csv_is_byte_identical_across_runs() {
    let spec = spec_path("darboux-k1.json");
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    for d in [&d1, &d2] {
        let out = run(&["converge", "--spec", &spec, "--out", d.path().to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    assert_eq!(read(d1.path(), "converge.csv"), read(d2.path(), "converge.csv"));
    assert_eq!(
        read(d1.path(), "converge_slopes.csv"),
        read(d2.path(), "converge_slopes.csv")
    );
}

#[test]
fn moment_image_csv_schema_and_case_tags() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap().to_owned();

    let out = run(&[
        "moment-image",
        "--spec",
        &spec_path("darboux-k1.json"),
        "--out",
        &out_dir,
        "--lambda",
        "0.5",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8(read(dir.path(), "moment.csv")).unwrap();
    assert!(text.starts_with("eps,lower,upper,case_tag\n"));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",case2")), "{text}");

    let out = run(&[
        "moment-image",
        "--spec",
        &spec_path("fourdim-xdep.json"),
        "--out",
        &out_dir,
        "--leaf",
        "sin:2:1",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8(read(dir.path(), "moment.csv")).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|l| l.ends_with(",case1")), "{text}");
    // image columns identical for every eps row
    let tail = |l: &str| l.splitn(2, ',').nth(1).unwrap().to_owned();
    assert!(rows.iter().all(|l| tail(l) == tail(rows[0])), "{text}");
}

#[test]
fn fold_locus_finds_three_roots_for_odd_model() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "fold-locus",
        "--spec",
        &spec_path("darboux-k1-odd.json"),
        "--eps",
        "0.1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8(read(dir.path(), "fold_locus.csv")).unwrap();
    assert!(text.starts_with("eps,x,slope,transversal\n"));
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3, "{text}");
    assert!(rows.iter().all(|l| l.ends_with(",true")), "{text}");
}

#[test]
fn check_symplectic_passes_on_xdep_beta_model() {
    let out = run(&[
        "check-symplectic",
        "--spec",
        &spec_path("fourdim-xdep.json"),
        "--eps",
        "0.1",
        "--grid",
        "101,8",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn check_folded_rejects_even_model() {
    let out = run(&["check-folded", "--spec", &spec_path("darboux-k1.json"), "--eps", "0.1"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}
