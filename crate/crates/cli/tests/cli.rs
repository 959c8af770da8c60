//! End-to-end checks of the command-line surface: validation diagnostics,
//! exit codes, report structure, and determinism.

use std::path::{Path, PathBuf};
use std::process::Command;
use vardist_cli::{run, RunFlags, Subcommand};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn flags() -> RunFlags {
    RunFlags {
        no_timing: true,
        ..RunFlags::default()
    }
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vardist"))
}

#[test]
fn validate_circle_reports_bezout_four() {
    let report = run(Subcommand::Validate, &fixtures().join("circle.json"), &flags()).unwrap();
    let json = vardist_cli::report_to_json(&report);
    let value: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(value["payload"]["ok"], true);
    assert_eq!(value["payload"]["bezout"], 4);
    assert_eq!(value["payload"]["formulation"], "l2-minor");
}

#[test]
fn validate_then_solve_never_fails_on_validation() {
    for fixture in [
        "circle.json",
        "ellipse.json",
        "line-l4.json",
        "line-implicit-l4.json",
        "cusp.json",
        "parallel-lines.json",
        "circle-p43.json",
    ] {
        let path = fixtures().join(fixture);
        run(Subcommand::Validate, &path, &flags())
            .unwrap_or_else(|e| panic!("{fixture}: validate failed: {e}"));
        run(Subcommand::Solve, &path, &flags())
            .unwrap_or_else(|e| panic!("{fixture}: solve failed: {e}"));
    }
}

#[test]
fn codim_exceeding_generators_is_rejected() {
    let dir = tempdir();
    let path = dir.join("bad-codim.json");
    std::fs::write(
        &path,
        r#"{"n": 3, "codim": 2, "generators": ["y1^2 + y2^2 + y3^2 - 1"],
            "norm": {"type": "euclidean"}}"#,
    )
    .unwrap();
    let err = run(Subcommand::Validate, &path, &flags()).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn lagrange_formulation_needs_complete_intersection() {
    let dir = tempdir();
    let path = dir.join("bad-formulation.json");
    // Three generators for a codimension-1 curve: minor forms accept this,
    // the Lagrange form must not.
    std::fs::write(
        &path,
        r#"{"n": 2, "codim": 1,
            "generators": ["y1^2 + y2^2 - 1", "2*y1^2 + 2*y2^2 - 2", "3*y1^2 + 3*y2^2 - 3"],
            "norm": {"type": "lp", "m": 2, "l": 0},
            "formulation": "lp-lagrange"}"#,
    )
    .unwrap();
    let err = run(Subcommand::Validate, &path, &flags()).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("#generators = codim"));
}

#[test]
fn malformed_generator_exits_2_with_position() {
    let dir = tempdir();
    let path = dir.join("malformed.json");
    std::fs::write(
        &path,
        r#"{"n": 2, "codim": 1, "generators": ["y1^2 + zz - 1"],
            "norm": {"type": "euclidean"}}"#,
    )
    .unwrap();
    let output = binary().arg("validate").arg(&path).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(err["error"]["kind"], "validation");
    assert_eq!(err["error"]["position"], 7);
}

#[test]
fn solve_circle_seed_7_two_solutions_small_residuals() {
    let output = binary()
        .args(["solve"])
        .arg(fixtures().join("circle.json"))
        .args(["--seed", "7", "--no-timing"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    let solutions = report["payload"]["solutions"].as_array().unwrap();
    assert_eq!(solutions.len(), 2);
    for s in solutions {
        assert!(s["residual"].as_f64().unwrap() < 1e-10);
    }
}

#[test]
fn degree_line_l4_via_cli() {
    let output = binary()
        .arg("degree")
        .arg(fixtures().join("line-l4.json"))
        .args(["--trials", "8", "--no-timing"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(report["payload"]["delta_hat"], 3);
    assert_eq!(report["payload"]["sigma1_degree"], 1);
}

#[test]
fn nonpositive_tolerances_are_rejected() {
    let output = binary()
        .arg("solve")
        .arg(fixtures().join("circle.json"))
        .args(["--tol-residual", "0"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn missing_x_for_solve_is_a_validation_error() {
    let dir = tempdir();
    let path = dir.join("no-x.json");
    std::fs::write(
        &path,
        r#"{"n": 2, "codim": 1, "generators": ["y1^2 + y2^2 - 1"],
            "norm": {"type": "euclidean"}}"#,
    )
    .unwrap();
    let err = run(Subcommand::Solve, &path, &flags()).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn reports_are_byte_identical_under_equal_seeds() {
    for subcommand in ["solve", "degree"] {
        let run_once = || {
            binary()
                .arg(subcommand)
                .arg(fixtures().join("circle.json"))
                .args(["--seed", "3", "--trials", "4", "--no-timing"])
                .output()
                .unwrap()
        };
        let a = run_once();
        let b = run_once();
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout, "{subcommand} reports differ");
    }
}

fn tempdir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "vardist-cli-test-{}-{:?}",
        std::process::id(),
        std::thread::current().id()
    ));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
