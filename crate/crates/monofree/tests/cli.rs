//! Integration tests for the `monofree` binary: output shapes, determinism,
//! and the exit-code contract (0 success, 2 verification failure, 3
//! non-stabilized, 4 input error).

use std::process::{Command, Output};

fn monofree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_monofree"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

#[test]
fn reduce_prints_canonical_forms() {
    let cases = [
        (&["reduce", "--algebra", "F0", "q3 X'(1) q2"][..], "X'(1)"),
        (&["reduce", "--algebra", "F0", "q1 X''(3)"][..], "q1 X'(3)"),
        (&["reduce", "--algebra", "H0", "q0 X(1)"][..], "0"),
        (&["reduce", "--algebra", "H0", "q2 q5 X(1) q7"][..], "X(1)"),
    ];
    for (args, want) in cases {
        let out = monofree(args);
        assert!(out.status.success(), "{args:?} failed: {out:?}");
        assert_eq!(stdout(&out).trim(), want, "args {args:?}");
    }
}

#[test]
fn convolve_both_methods_agree_on_the_arcsine_table() {
    let out = monofree(&[
        "convolve", "--a", "two_point", "--b", "two_point", "--order", "6",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let last = text.lines().last().expect("table rows");
    assert!(last.starts_with("6\t20\t"), "unexpected final row: {last}");
    assert!(last.trim_end().ends_with("yes"));
    assert!(!text.contains("NO"));
}

#[test]
fn convolve_json_reports_certificates_and_exact_rationals() {
    let out = monofree(&[
        "convolve", "--a", "two_point:0,1,1/3", "--b", "point:1/2", "--order", "2",
        "--format", "json",
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert_eq!(report["all_equal"], serde_json::Value::Bool(true));
    let m1 = &report["moments"][0];
    // mean of the shifted two-point law: 2/3 + 1/2 = 7/6, printed as a
    // rational, never a float.
    assert_eq!(m1["representation"], "7/6");
    assert_eq!(m1["oracle"], "7/6");
    assert_eq!(m1["stabilized_at"].as_u64().unwrap() + 1, m1["checked_at"].as_u64().unwrap());
}

#[test]
fn verify_output_is_byte_identical_for_a_fixed_seed() {
    let args = [
        "verify", "--suite", "confluence", "--seed", "42", "--size", "50",
        "--format", "json",
    ];
    let first = monofree(&args);
    let second = monofree(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    let report: serde_json::Value = serde_json::from_str(&stdout(&first)).expect("valid json");
    assert_eq!(report["seed"], 42, "seed must be echoed in the report");
    assert_eq!(report["passed"], true);
}

#[test]
fn mixed_moment_of_an_alternating_word_is_zero_with_a_certificate() {
    let out = monofree(&[
        "mixed", "--a", "two_point", "--b", "semicircle", "--word", "a b a b",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with('0'), "centered alternating word: {text}");
    assert!(text.contains("stabilized"));
}

#[test]
fn exit_codes_follow_the_contract() {
    // Input errors: malformed spec, malformed word, unknown flag, order cap.
    assert_eq!(monofree(&["convolve", "--a", "bogus", "--b", "semicircle"]).status.code(), Some(4));
    assert_eq!(monofree(&["reduce", "--algebra", "F0", "q("]).status.code(), Some(4));
    assert_eq!(monofree(&["convolve", "--nonsense"]).status.code(), Some(4));
    assert_eq!(
        monofree(&["convolve", "--a", "semicircle", "--b", "semicircle", "--order", "11"]).status.code(),
        Some(4)
    );
    // Undersized truncation is a hard non-stabilization failure.
    assert_eq!(
        monofree(&[
            "convolve", "--a", "two_point", "--b", "two_point", "--order", "4",
            "--truncation", "1", "--method", "representation",
        ])
        .status
        .code(),
        Some(3)
    );
}
