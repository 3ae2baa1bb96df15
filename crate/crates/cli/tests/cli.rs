use std::process::{Command, Output};

use serde_json::Value;

fn ellis(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ellis"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON report")
}

#[test]
fn crt_example() {
    let out = ellis(&["crt", "--constraints", "3:2,5:4,7:6"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["result"]["outcome"], "progression");
    assert_eq!(v["result"]["modulus"], 105);
    assert_eq!(v["result"]["residue"], 104);
}

#[test]
fn crt_inconsistent_is_reported_not_an_error() {
    let out = ellis(&["crt", "--constraints", "4:1,6:2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(
        text.lines().nth(1).unwrap().starts_with("inconsistent,"),
        "{text}"
    );
}

#[test]
fn orbit_of_d3_descends_to_d() {
    let out = ellis(&["orbit", "--fixture", "example-omega2", "--point", "w*3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["record"]["kind"], "eventually_periodic");
    let listing: Vec<&str> = v["record"]["listing"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p.as_str().unwrap())
        .collect();
    assert_eq!(listing, ["w*3", "w*2", "w", "w^2"]);
}

#[test]
fn omega_limit_of_isolated_point() {
    // d^1_5 = 4 ↦ d^5_5 = w*4+5 ↦ … ↦ d^1_5: a 5-cycle.
    let v = json_of(&ellis(&["omega", "--point", "4"]));
    assert_eq!(v["omega_limit"].as_array().unwrap().len(), 5);
}

#[test]
fn piterate_table_csv_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let out = ellis(&[
        "piterate",
        "--ultrafilter",
        "n-1 on primes",
        "--truncation",
        "3",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("function,point,value\n"));
    assert!(text.contains("p = n-1 on primes,w,w^2\n"), "{text}");
}

#[test]
fn continuity_at_top_is_certified_discontinuous() {
    let v = json_of(&ellis(&[
        "continuity",
        "--ultrafilter",
        "n-1 on primes",
        "--ultrafilter",
        "const 0",
        "--point",
        "w^2",
        "--depth",
        "10",
    ]));
    let statuses: Vec<&str> = v["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x["status"].as_str().unwrap())
        .collect();
    assert_eq!(
        statuses,
        ["discontinuous-certified", "continuous-certified"]
    );
}

#[test]
fn dichotomy_is_deterministic() {
    let args = [
        "dichotomy",
        "--fixture",
        "random-7",
        "--samples",
        "5",
        "--seed",
        "3",
    ];
    let a = ellis(&args);
    let b = ellis(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(json_of(&a)["falsifications"].as_array().unwrap().is_empty());
}

#[test]
fn semigroup_on_small_truncation() {
    let v = json_of(&ellis(&["semigroup", "--truncation", "3"]));
    assert_eq!(v["modulus"], 6);
    assert_eq!(v["closed"], true);
    assert_eq!(v["additive"], true);
}

#[test]
fn map_file_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("down.dynmap");
    std::fs::write(&path, ellis_core::fixtures::shift_down().to_dynmap()).unwrap();
    let v = json_of(&ellis(&[
        "orbit",
        "--map",
        path.to_str().unwrap(),
        "--point",
        "7",
    ]));
    assert_eq!(v["fixture"], "down");
    assert_eq!(v["record"]["listing"][1], "6");
    assert_eq!(v["record"]["transient"], 7);
}

#[test]
fn config_errors_exit_2() {
    for args in [
        vec!["orbit", "--fixture", "no-such-fixture", "--point", "1"],
        vec!["orbit", "--point", "1", "--budget", "0"],
        vec![
            "orbit",
            "--fixture",
            "identity",
            "--map",
            "x.dynmap",
            "--point",
            "1",
        ],
        vec!["orbit", "--point", "w^3"],
        vec!["piterate", "--ultrafilter", "gibberish ((", "--point", "1"],
        vec!["crt", "--constraints", "3:7"],
        vec!["repro", "A10"],
        vec!["frobnicate"],
    ] {
        let out = ellis(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert!(
            err.contains("Usage") || err.contains("--help"),
            "{args:?}: {err}"
        );
    }
}

#[test]
fn repro_single_criterion() {
    let out = ellis(&["repro", "A4"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("PASS A4"));
    assert_eq!(json_of(&out)["passed"], true);
}

#[test]
fn repro_example_suite_reports_failures_with_exit_1() {
    let out = ellis(&["repro", "example-omega2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    let failed: Vec<&str> = text
        .lines()
        .skip(1)
        .filter(|l| l.contains(",false,"))
        .map(|l| &l[..2])
        .collect();
    assert_eq!(failed, ["A3", "A6", "A7"]);
}
