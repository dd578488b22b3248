//! End-to-end runs of the compiled binary: exit codes, report files,
//! determinism, and the text surface other tools scrape.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn wick() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wick"))
}

fn tmp(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.ini");
    fs::write(&path, text).unwrap();
    path
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn same_seed_runs_byte_identical_reports() {
    let dir = tmp("determinism");
    let cfg = write_config(&dir, "[run]\nseed = 42\n");
    for sub in ["r1", "r2"] {
        let out = wick()
            .args(["verify", "--config"])
            .arg(&cfg)
            .args([
                "--suite", "algebra", "--suite", "gelfand", "--suite", "volterra", "--out",
            ])
            .arg(dir.join(sub))
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    }
    let a = fs::read(dir.join("r1/verify.csv")).unwrap();
    let b = fs::read(dir.join("r2/verify.csv")).unwrap();
    assert_eq!(a, b);
    // JSON carries wall times, so only the CSV is reproducible byte for byte
    let json: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.join("r1/verify.json")).unwrap()).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["seed"], 42);
    assert_eq!(json["failed"], 0);
    assert_eq!(json["suites"].as_array().unwrap().len(), 3);
}

#[test]
fn missing_headroom_is_a_clean_error() {
    let dir = tmp("headroom");
    let cfg = write_config(&dir, "[truncation]\nheadroom = 0\n[run]\nseed = 1\n");
    let out = wick()
        .args(["verify", "--config"])
        .arg(&cfg)
        .args(["--suite", "ibp", "--out"])
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_of(&out);
    assert!(err.contains("headroom"), "{err}");
    assert!(
        !dir.join("out/verify.csv").exists(),
        "no report on a failed run"
    );
}

#[test]
fn flat_mollifier_family_fails_the_converge_gate() {
    let dir = tmp("flat");
    // strictly decreasing (a flat schedule is rejected outright) but by so
    // little that the errors cannot contract
    let cfg = write_config(
        &dir,
        "[mollifier]\nshrink = 0.9 0.89999 0.89998\n[run]\nseed = 42\n",
    );
    let out = wick()
        .args(["converge", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", stdout_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("integrator_error_contracts"), "{text}");
    // gate failures still write both reports
    assert!(dir.join("out/converge.csv").exists());
    assert!(dir.join("out/converge.json").exists());
}

#[test]
fn seed_is_mandatory() {
    let dir = tmp("noseed");
    let cfg = write_config(&dir, "[truncation]\nk = 4\n");
    let out = wick()
        .args(["verify", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("seed"), "{}", stderr_of(&out));
}

#[test]
fn pair_reports_the_weighted_inner_product() {
    let dir = tmp("pair");
    let a_text = "1 : 2.0\n1^2 : 0.5\n2^1 : -1.0\n";
    let b_text = "1 : 1.0\n1^2 : 0.25\n";
    let a_path = dir.join("a.txt");
    let b_path = dir.join("b.txt");
    fs::write(&a_path, a_text).unwrap();
    fs::write(&b_path, b_text).unwrap();

    let a = wick_core::ChaosVector::from_text(a_text).unwrap();
    let b = wick_core::ChaosVector::from_text(b_text).unwrap();
    let expected = format!("pairing = {:.16e}", wick_core::pairing(&a, &b));

    let out = wick()
        .arg("pair")
        .arg(&a_path)
        .arg(&b_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(
        text.lines().any(|l| l == expected),
        "wanted {expected:?} in:\n{text}"
    );
    assert!(text.contains("a: 3 terms, degree 2"), "{text}");
}

#[test]
fn unknown_suite_is_rejected_with_the_available_list() {
    let dir = tmp("unknown");
    let cfg = write_config(&dir, "[run]\nseed = 5\n");
    let out = wick()
        .args(["verify", "--config"])
        .arg(&cfg)
        .args(["--suite", "nosuch", "--out"])
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_of(&out);
    assert!(err.contains("unknown suite `nosuch`"), "{err}");
    assert!(err.contains("algebra"), "{err}");
}

#[test]
fn volterra_writes_trajectories() {
    let dir = tmp("volterra");
    let cfg = write_config(
        &dir,
        "[kernel]\nfamily = gamma\nshape = 1.5\ndecay = 1.0\n[run]\nseed = 11\n",
    );
    let out = wick()
        .args(["volterra", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let csv = fs::read_to_string(dir.join("out/volterra.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "config_hash,series,t_index,t,z_id,value"
    );
    assert!(csv.lines().any(|l| l.contains(",ito,")), "{csv}");
    assert!(csv.lines().any(|l| l.contains(",strat,")), "{csv}");
    assert!(csv.lines().any(|l| l.contains(",trace_gap,")), "{csv}");
}

#[test]
fn rough_kernel_demands_the_left_endpoint_rule() {
    let dir = tmp("rough");
    let cfg = write_config(
        &dir,
        "[grid]\nrule = trapezoid\n[kernel]\nfamily = fbm\nhurst = 0.3\n[run]\nseed = 3\n",
    );
    let out = wick()
        .args(["volterra", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr_of(&out).contains("left-endpoint"),
        "{}",
        stderr_of(&out)
    );
}

#[test]
fn config_errors_cite_the_line() {
    let dir = tmp("badkey");
    let cfg = write_config(&dir, "[truncation]\nheadrom = 1\n[run]\nseed = 2\n");
    let out = wick()
        .args(["verify", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_of(&out);
    assert!(err.contains("line 2"), "{err}");
    assert!(err.contains("headrom"), "{err}");
}

#[test]
fn suite_flag_is_verify_only() {
    let dir = tmp("suiteflag");
    let cfg = write_config(&dir, "[run]\nseed = 5\n");
    let out = wick()
        .args(["converge", "--config"])
        .arg(&cfg)
        .args(["--suite", "algebra", "--out"])
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("verify"), "{}", stderr_of(&out));
}
