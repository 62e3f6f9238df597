use std::fs;
use std::path::Path;

use costfair_cli::{run, EXIT_CHECK_FAILED, EXIT_INVALID_INPUT, EXIT_OK};
use costfair_core::codec::BUILTIN_NAMES;

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("costfair").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn without_timings(json: &str) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(json).unwrap();
    v.as_object_mut().unwrap().remove("timings");
    v
}

#[test]
fn examples_list_names_every_builtin() {
    let (code, out, _) = cli(&["examples", "list"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().collect::<Vec<_>>(), BUILTIN_NAMES.to_vec());
}

#[test]
fn written_example_validates_and_analyzes_like_the_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("fairswap.xproto");
    let (code, _, _) = cli(&["examples", "write", "fairswap-eth", "-o", path_str(&file)]);
    assert_eq!(code, EXIT_OK);

    let (code, out, _) = cli(&["validate", path_str(&file)]);
    assert_eq!(code, EXIT_OK, "{out}");

    let from_file = cli(&["analyze", path_str(&file), "--report", "json"]);
    let from_builtin = cli(&["analyze", "--builtin", "fairswap-eth", "--report", "json"]);
    assert_eq!(from_file.0, EXIT_CHECK_FAILED);
    assert_eq!(from_file.0, from_builtin.0);
    let mut a = without_timings(&from_file.1);
    let mut b = without_timings(&from_builtin.1);
    a["protocol"].as_object_mut().unwrap().remove("source");
    b["protocol"].as_object_mut().unwrap().remove("source");
    assert_eq!(a, b);
}

#[test]
fn json_report_is_deterministic_apart_from_timings() {
    let args = [
        "analyze",
        "--builtin",
        "deposit-compensated",
        "--method",
        "both",
        "--report",
        "json",
    ];
    let first = cli(&args);
    let second = cli(&args);
    assert_eq!(first.0, second.0);
    assert_eq!(without_timings(&first.1), without_timings(&second.1));
}

#[test]
fn json_like_is_an_alias() {
    let (code, out, _) = cli(&[
        "analyze",
        "--builtin",
        "empty",
        "--check",
        "full-cf",
        "--report",
        "json-like",
    ]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["schema"], "costfair.analysis.v1");
    assert_eq!(v["all_hold"], true);
}

#[test]
fn free_deposit_is_fully_cost_fair() {
    let (code, _, _) = cli(&[
        "analyze",
        "--builtin",
        "free-deposit",
        "--check",
        "full-cf",
        "--method",
        "both",
    ]);
    assert_eq!(code, EXIT_OK);
}

#[test]
fn every_builtin_honours_the_exit_code_contract() {
    for name in BUILTIN_NAMES {
        let (code, out, err) = cli(&[
            "analyze",
            "--builtin",
            name,
            "--method",
            "both",
            "--report",
            "json",
        ]);
        assert!(
            code == EXIT_OK || code == EXIT_CHECK_FAILED,
            "{name}: {code} {err}"
        );
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(
            v["solver_disagreements"].as_array().unwrap().len(),
            0,
            "{name}"
        );
        assert_eq!(v["all_hold"] == true, code == EXIT_OK, "{name}");
    }
}

#[test]
fn payoff_on_the_empty_game() {
    let (code, out, _) = cli(&["payoff", "--builtin", "empty", "--report", "json"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["payoff"], serde_json::json!({"a": "0", "b": "0"}));
}

#[test]
fn payoff_plays_a_named_strategy_pair() {
    let (code, out, err) = cli(&[
        "payoff",
        "--builtin",
        "fairswap-eth",
        "--strategy-a",
        "v0=init",
        "--strategy-b",
        "v1=leave",
        "--report",
        "json",
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["payoff"], serde_json::json!({"a": "-1050000", "b": "0"}));
    assert_eq!(v["path"], serde_json::json!(["v0=init", "v1=leave"]));
}

#[test]
fn invalid_inputs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.xproto");
    fs::write(&bad, "format_version 1\nname x\n[nodes]\nv0 A\n").unwrap();
    assert_eq!(cli(&["validate", path_str(&bad)]).0, EXIT_INVALID_INPUT);
    assert_eq!(cli(&["analyze", path_str(&bad)]).0, EXIT_INVALID_INPUT);
    assert_eq!(
        cli(&["validate", path_str(&dir.path().join("missing.xproto"))]).0,
        EXIT_INVALID_INPUT
    );
    assert_eq!(cli(&["analyze", "--builtin", "nope"]).0, EXIT_INVALID_INPUT);
    assert_eq!(
        cli(&["analyze", "--builtin", "empty", "--check", "bogus"]).0,
        EXIT_INVALID_INPUT
    );
    assert_eq!(
        cli(&[
            "payoff",
            "--builtin",
            "fairswap-eth",
            "--strategy-a",
            "v9=init"
        ])
        .0,
        EXIT_INVALID_INPUT
    );
    assert_eq!(
        cli(&[
            "fee-convert",
            "--gas",
            "1.5",
            "--gas-price",
            "60",
            "--rate",
            "3880"
        ])
        .0,
        EXIT_INVALID_INPUT
    );
    assert_eq!(
        cli(&[
            "generate",
            "--seed",
            "1",
            "--depth",
            "0",
            "--branching",
            "2"
        ])
        .0,
        EXIT_INVALID_INPUT
    );
    let (code, _, err) = cli(&["frobnicate"]);
    assert_eq!(code, EXIT_INVALID_INPUT);
    assert!(!err.is_empty());
}

#[test]
fn generated_protocol_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("g.xproto");
    let args = [
        "generate",
        "--seed",
        "7",
        "--depth",
        "3",
        "--branching",
        "2",
        "--theorem1-premises",
    ];
    let mut with_output = args.to_vec();
    with_output.extend(["-o", path_str(&file)]);
    assert_eq!(cli(&with_output).0, EXIT_OK);
    let written = fs::read_to_string(&file).unwrap();
    assert_eq!(cli(&args).1, written);
    assert_eq!(cli(&["validate", path_str(&file)]).0, EXIT_OK);

    let (code, out, _) = cli(&[
        "analyze",
        path_str(&file),
        "--check",
        "theorems",
        "--report",
        "json",
    ]);
    assert_eq!(code, EXIT_OK, "{out}");
}

#[test]
fn export_dot_writes_a_digraph() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("tree.dot");
    let (code, _, _) = cli(&[
        "export-dot",
        "--builtin",
        "figure2-naive",
        "-o",
        path_str(&file),
    ]);
    assert_eq!(code, EXIT_OK);
    let dot = fs::read_to_string(&file).unwrap();
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains("dashed"));
    let (_, bare, _) = cli(&[
        "export-dot",
        "--builtin",
        "figure2-naive",
        "--no-faithfulness",
        "--no-attributes",
        "--no-payoffs",
    ]);
    assert!(!bare.contains("dashed"));
    assert!(bare.len() < dot.len());
}

#[test]
fn fee_conversion_rounds_half_even() {
    assert_eq!(
        cli(&[
            "fee-convert",
            "--gas",
            "1500000",
            "--gas-price",
            "60",
            "--rate",
            "3880"
        ])
        .1,
        "349.20\n"
    );
    let (_, out, _) = cli(&[
        "fee-convert",
        "--gas",
        "1050000",
        "--gas-price",
        "60",
        "--rate",
        "3880",
        "--exact",
    ]);
    assert_eq!(out, "244.44\nexact: 6111/25\n");
    assert_eq!(
        cli(&[
            "fee-convert",
            "--gas",
            "0",
            "--gas-price",
            "60",
            "--rate",
            "3880"
        ])
        .1,
        "0.00\n"
    );
}
