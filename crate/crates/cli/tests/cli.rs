//! End-to-end checks of the binary: exit codes, report determinism, and the
//! file outputs.

use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_esa-embed"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn generate_prints_counts() {
    let out = run(&["generate", "--family", "diamond", "--n", "1", "--k", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("vertices=5"), "{text}");
    assert!(text.contains("edges=6"));

    let out = run(&["generate", "--family", "laakso", "--n", "1", "--k", "2"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("vertices=6"));
    assert!(text.contains("edges=6"));
}

#[test]
fn usage_errors_exit_two() {
    // clap rejects a negative recursion depth
    let out = run(&["generate", "--family", "diamond", "--n", "-1", "--k", "3"]);
    assert_eq!(out.status.code(), Some(2));
    // k = 1 is a domain error surfaced as a usage failure
    let out = run(&["generate", "--family", "diamond", "--n", "1", "--k", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn budget_guard_exits_three() {
    let out = run(&["verify", "--family", "diamond", "--n", "3", "--k", "3"]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("M = 39"), "{err}");
}

#[test]
fn verify_small_instances_pass() {
    for args in [
        ["verify", "--family", "diamond", "--n", "2", "--k", "2"],
        ["verify", "--family", "laakso", "--n", "1", "--k", "3"],
    ] {
        let out = run(&args);
        assert!(out.status.success(), "{args:?}");
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(text.contains("PASS"));
        assert!(!text.contains("FAIL"));
    }
}

#[test]
fn axiom_suite_passes() {
    let out = run(&[
        "verify", "--axioms", "--seed", "7", "--vectors", "50", "--spreadings", "5",
    ]);
    assert!(out.status.success());
}

#[test]
fn ramsey_formula() {
    let out = run(&["obstruct", "--check", "ramsey", "--c", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("R_3(2^32, 3)"), "{text}");
}

#[test]
fn factor_reports_critical_constant() {
    let out = run(&[
        "obstruct", "--check", "factor", "--family", "diamond", "--n", "1", "--k", "2",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("critical C = 16"), "{text}");
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = run(&[
            "embed",
            "--family",
            "diamond",
            "--n",
            "1",
            "--k",
            "2",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let dot = dir.path().join("g.dot");
    let json = dir.path().join("g.json");
    let out = run(&[
        "generate",
        "--family",
        "laakso",
        "--n",
        "1",
        "--k",
        "2",
        "--out",
        json.to_str().unwrap(),
        "--dot",
        dot.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let dot_text = fs::read_to_string(&dot).unwrap();
    assert!(dot_text.starts_with("graph laakso_1_2 {"));
    let json_text = fs::read_to_string(&json).unwrap();
    assert!(json_text.contains("\"unit\": \"1/4\""));
}

#[test]
fn triples_search_is_seeded_and_clean() {
    let out = run(&["obstruct", "--check", "triples", "--families", "25", "--seed", "11"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("0 failures"), "{text}");
}
