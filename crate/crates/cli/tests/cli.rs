use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use insider_na::models::example_one;
use insider_na::{int, rat};
use insider_na_cli::analysis::{run_fuzz, run_measure, run_na_check, run_validate_theorems};
use insider_na_cli::{
    parse_model, parse_model_str, render_report, run_analyze, run_examples, AnalysisReport,
    AnalyzeOptions, CliError, ExampleParams, Format, FuzzRequest, MeasureKind, ModelError,
};

fn models_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("models")
}

fn bundled(name: &str) -> PathBuf {
    models_dir().join(name)
}

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_insider-na"))
        .args(args)
        .env_remove("INSIDER_NA_FORMAT")
        .output()
        .expect("binary runs")
}

const TRIVIAL: &str = r#"{
  "horizon": 2,
  "outcomes": [
    {"name": "a", "prob": "1/4"}, {"name": "b", "prob": "1/4"},
    {"name": "c", "prob": "0.25"}, {"name": "d", "prob": ".25"}
  ],
  "filtration": [
    [["a", "b", "c", "d"]],
    [["a", "b"], ["c", "d"]],
    [["a"], ["b"], ["c"], ["d"]]
  ],
  "processes": {
    "X": [
      {"a": "0", "b": "0", "c": "0", "d": "0"},
      {"a": "1", "b": "1", "c": "-1", "d": "-1"},
      {"a": "3", "b": "-1", "c": "1/2", "d": "-5/2"}
    ]
  },
  "random_times": {"end": {"a": 2, "b": 2, "c": 2, "d": 2}}
}"#;

fn semantic(text: &str) -> (String, String) {
    match parse_model_str(text) {
        Err(ModelError::Semantic { path, message }) => (path, message),
        other => panic!("expected a semantic error, got {other:?}"),
    }
}

#[test]
fn bundled_example_parses_to_the_binomial_objects() {
    let parsed = parse_model(&bundled("example1.json")).unwrap();
    let ex = example_one(int(2), rat(1, 2), int(1)).unwrap();
    assert_eq!(parsed.space, ex.model.space);
    assert_eq!(parsed.filtration, ex.model.public);
    assert_eq!(parsed.process("S"), Some(&ex.price));
    assert_eq!(parsed.random_time("tau"), Some(&ex.model.tau));
}

#[test]
fn zero_weight_is_a_located_semantic_error() {
    let text = TRIVIAL.replace(r#""prob": "0.25""#, r#""prob": "0""#);
    let (path, message) = semantic(&text);
    assert_eq!(path, "outcomes[2].prob");
    assert!(message.contains("positive"), "{message}");
}

#[test]
fn non_refining_levels_are_named() {
    let text = TRIVIAL.replace(r#"[["a", "b"], ["c", "d"]]"#, r#"[["a", "c"], ["b", "d"]]"#);
    let (path, message) = semantic(&text);
    assert!(path.starts_with("processes.X[1]") || path == "filtration[1]", "{path}");
    let text = TRIVIAL.replace(r#"[["a"], ["b"], ["c"], ["d"]]"#, r#"[["a", "c"], ["b"], ["d"]]"#);
    let (path, message2) = semantic(&text);
    assert_eq!(path, "filtration[2]");
    assert!(message2.contains("does not refine filtration[1]"), "{message2}");
    let _ = message;
}

#[test]
fn syntax_errors_carry_line_and_column() {
    match parse_model_str("{\n  \"horizon\": 2,\n  \"outcomes\": [,]\n}") {
        Err(ModelError::Syntax { line, column, .. }) => {
            assert_eq!(line, 3);
            assert_eq!(column, 16);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn other_semantic_errors() {
    let (path, _) = semantic(&TRIVIAL.replace(r#""end": {"a": 2"#, r#""end": {"a": 3"#));
    assert_eq!(path, "random_times.end.a");
    let (path, msg) = semantic(&TRIVIAL.replace(r#"{"a": "1", "b": "1""#, r#"{"a": "1", "b": "2""#));
    assert_eq!(path, "processes.X[1]");
    assert!(msg.contains("{a, b}"), "{msg}");
    let (path, _) = semantic(&TRIVIAL.replace(r#"["a"], ["b"], ["c"], ["d"]"#, r#"["a"], ["b"], ["c"], ["e"]"#));
    assert_eq!(path, "filtration[2][3][0]");
    let (path, _) = semantic(&TRIVIAL.replace(r#""prob": "1/4"}, {"name": "b""#, r#""prob": "1/3"}, {"name": "b""#));
    assert_eq!(path, "outcomes");
    let (path, _) = semantic(&TRIVIAL.replace(r#""prob": ".25""#, r#""prob": 0.25"#));
    assert_eq!(path, "outcomes[3].prob");
    let (path, _) = semantic(&TRIVIAL.replace(r#"{"a": "0", "b": "0", "c": "0", "d": "0"}"#, r#"{"a": "0", "b": "0", "c": "0"}"#));
    assert_eq!(path, "processes.X[0]");
    let beyond = TRIVIAL
        .replace(r#""end": {"a": 2"#, r#""end": {"a": 3"#)
        .replace(r#""horizon": 2,"#, r#""horizon": 2, "allow_beyond_horizon": true,"#);
    assert!(parse_model_str(&beyond).is_ok());
}

fn analyze(name: &str) -> AnalysisReport {
    run_analyze(&parse_model(&bundled(name)).unwrap(), &AnalyzeOptions::default()).unwrap()
}

#[test]
fn example_one_report_states_who_can_arbitrage() {
    let r = analyze("example1.json");
    let before = r.before.as_ref().unwrap();
    assert!(!before.verdicts.public.as_ref().unwrap().holds);
    assert!(!before.verdicts.insider.holds);
    assert!(r.full_market.public.as_ref().unwrap().holds);
    assert!(!r.full_market.insider.holds);
    assert!(r.breaches().is_empty());
}

#[test]
fn example_two_report_keeps_no_arbitrage_for_insiders() {
    let r = analyze("example2.json");
    assert!(r.before.as_ref().unwrap().verdicts.insider.holds);
    assert!(r.after.as_ref().unwrap().verdicts.insider.holds);
    assert_eq!(r.azema.z[1], vec!["1", "1", "1/2", "1/2"]);
}

#[test]
fn terminal_time_is_harmless() {
    let parsed = parse_model_str(TRIVIAL).unwrap();
    let r = run_analyze(&parsed, &AnalyzeOptions::default()).unwrap();
    for side in [r.before.as_ref().unwrap(), r.after.as_ref().unwrap()] {
        let c = &side.conditions;
        assert!(c.level_sets && c.hitting_times_aligned && c.predictable && c.density_trivial);
        assert!(side.verdicts.public.as_ref().unwrap().holds && side.verdicts.insider.holds);
    }
    assert!(r.full_market.public.as_ref().unwrap().holds && r.full_market.insider.holds);
}

#[test]
fn after_side_needs_a_strictly_honest_time() {
    let text = TRIVIAL.replace(
        r#""end": {"a": 2, "b": 2, "c": 2, "d": 2}"#,
        r#""end": {"a": 0, "b": 1, "c": 2, "d": 2}"#,
    );
    let parsed = parse_model_str(&text).unwrap();
    let opts = AnalyzeOptions {
        after: true,
        ..Default::default()
    };
    let err = run_analyze(&parsed, &opts).unwrap_err();
    assert_eq!(err.exit_code(), 2, "{err}");
    let r = run_analyze(&parsed, &AnalyzeOptions::default()).unwrap();
    assert!(r.after.is_none());
    assert!(!r.notes.is_empty());
    assert!(r.before.unwrap().verdicts.public.is_none());
}

#[test]
fn unknown_selection_is_a_usage_error() {
    let parsed = parse_model_str(TRIVIAL).unwrap();
    let opts = AnalyzeOptions {
        process: Some("Y".into()),
        ..Default::default()
    };
    assert!(matches!(run_analyze(&parsed, &opts), Err(CliError::Usage(_))));
}

#[test]
fn rendering_is_stable_and_round_trips() {
    let r = analyze("example1.json");
    let json = render_report(&r, Format::Json);
    assert_eq!(json, render_report(&analyze("example1.json"), Format::Json));
    let back: AnalysisReport = serde_json::from_slice(&json).unwrap();
    assert_eq!(back, r);
    let text = String::from_utf8(render_report(&r, Format::Text)).unwrap();
    assert!(text.contains("2/3"));
    assert!(!text.contains("0.6"));
}

#[test]
fn subcommand_reports() {
    let parsed = parse_model(&bundled("example1.json")).unwrap();
    let opts = AnalyzeOptions::default();
    let na = run_na_check(&parsed, &opts).unwrap();
    assert!(!na.before.unwrap().public.unwrap().holds);
    let qe = run_measure(&parsed, &opts, MeasureKind::Qe).unwrap();
    assert_eq!(qe.density, vec!["1", "1", "3/4", "9/8"]);
    assert!(!qe.martingale);
    let q = run_measure(&parsed, &opts, MeasureKind::Q).unwrap();
    assert_eq!(q.density, vec!["1", "1", "1/3", "4/3"]);
    let t = run_validate_theorems(&parsed, &opts).unwrap();
    assert!(t.breaches().is_empty());
    assert_eq!(t.reverse_before, Some(true));
}

#[test]
fn examples_check_their_values() {
    let r = run_examples(2, &ExampleParams::default()).unwrap();
    let g = r.analysis.insider_martingale.unwrap();
    assert_eq!(g[2][2], "1/2");
    assert_eq!(g[2][3], "1/2");
    let custom = ExampleParams {
        u: Some(rat(5, 2)),
        d: Some(rat(1, 3)),
        lambda: Some(rat(1, 5)),
        s0: Some(int(3)),
    };
    assert!(run_examples(2, &custom).is_ok());
    let one = ExampleParams {
        lambda: None,
        ..custom
    };
    assert!(run_examples(1, &one).unwrap().verified_values > 30);
    assert_eq!(run_examples(3, &ExampleParams::default()).unwrap_err().exit_code(), 1);
    let bad = ExampleParams {
        u: Some(int(1)),
        ..Default::default()
    };
    assert_eq!(run_examples(1, &bad).unwrap_err().exit_code(), 1);
}

#[test]
fn fuzz_merges_in_seed_order() {
    let req = FuzzRequest {
        seed: 20,
        count: 20,
        max_outcomes: 6,
        max_horizon: 3,
    };
    assert_eq!(run_fuzz(req).unwrap(), run_fuzz(req).unwrap());
}

#[test]
fn binary_exit_codes() {
    let ex1 = bundled("example1.json");
    let ex1 = ex1.to_str().unwrap();
    assert_eq!(bin(&["analyze", ex1]).status.code(), Some(0));
    assert_eq!(bin(&["analyze"]).status.code(), Some(1));
    assert_eq!(bin(&["measure", ex1, "--which", "nope"]).status.code(), Some(1));
    assert_eq!(bin(&["examples", "--id", "3"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, TRIVIAL.replace(r#""prob": "0.25""#, r#""prob": "0""#)).unwrap();
    let out = bin(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("outcomes[2].prob"));
    let missing = dir.path().join("missing.json");
    assert_eq!(bin(&["na-check", missing.to_str().unwrap()]).status.code(), Some(2));

    // Seed 23 yields an honest instance on which the after-τ conditions split.
    let out = bin(&["fuzz", "--seed", "23", "--count", "1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stdout).contains("after disagreements"));
    assert_eq!(bin(&["fuzz", "--seed", "0", "--count", "20"]).status.code(), Some(0));
}

#[test]
fn binary_output_is_deterministic_and_format_is_configurable() {
    let ex2 = bundled("example2.json");
    let ex2 = ex2.to_str().unwrap();
    for cmd in ["analyze", "na-check", "find-arbitrage", "deflator", "validate-theorems"] {
        let a = bin(&[cmd, ex2]);
        assert_eq!(a.status.code(), Some(0), "{cmd}");
        assert_eq!(a.stdout, bin(&[cmd, ex2]).stdout, "{cmd}");
    }
    let json = Command::new(env!("CARGO_BIN_EXE_insider-na"))
        .args(["examples", "--id", "1"])
        .env("INSIDER_NA_FORMAT", "json")
        .output()
        .unwrap();
    assert_eq!(json.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["analysis"]["full_market"]["insider"]["gains"][2], "1/2");
    let text = bin(&["examples", "--id", "1", "--format", "text"]);
    assert!(String::from_utf8_lossy(&text.stdout).starts_with("== example 1 =="));
}

#[test]
fn grid_search_finds_the_displayed_strategies() {
    let ex1 = bundled("example1.json");
    let out = bin(&["find-arbitrage", ex1.to_str().unwrap(), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let entries = v["entries"].as_array().unwrap();
    let find = |market: &str, f: &str| {
        entries
            .iter()
            .find(|e| e["market"] == market && e["filtration"] == f)
            .unwrap()["result"]
            .clone()
    };
    assert_eq!(find("X^tau", "public")["strategy"][1], serde_json::json!(["0", "0", "-1", "-1"]));
    assert_eq!(find("X", "insider")["strategy"][1], serde_json::json!(["0", "0", "1", "-1"]));
    assert_eq!(find("X", "public")["holds"], true);
}
