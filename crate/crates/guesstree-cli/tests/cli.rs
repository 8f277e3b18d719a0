//! End-to-end checks of the binary: flag handling, exit codes, output
//! determinism, and the JSON mirror.

use std::path::{Path, PathBuf};
use std::process::Output;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_guesstree")
}

fn run(args: &[&str]) -> Output {
    std::process::Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn write_fixture(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).expect("fixture written");
    path
}

const OR_TREE: &str = r#"{
  "arity": 2,
  "alphabet": 2,
  "root": "s0",
  "states": [
    { "id": "s0", "query_index": 0, "blocks": [[0], [1]], "colors": ["black", "red"], "children": ["s1", "s2"] },
    { "id": "s1", "query_index": 1, "blocks": [[0], [1]], "colors": ["black", "red"], "children": ["zero", "one"] },
    { "id": "s2", "query_index": 1, "blocks": [[0, 1]], "colors": ["black"], "children": ["one"] }
  ],
  "leaves": [
    { "id": "zero", "label": 0 },
    { "id": "one", "label": 1 }
  ]
}"#;

const OR_TABLE: &str = r#"{
  "n": 2,
  "alphabet": 2,
  "labels": 2,
  "label_names": ["all_zero", "has_one"],
  "entries": [
    { "input": [0, 0], "label": 0 },
    { "input": [0, 1], "label": 1 },
    { "input": [1, 0], "label": 1 },
    { "input": [1, 1], "label": 1 }
  ]
}"#;

#[test]
fn certify_catalog_problem_passes_and_is_deterministic() {
    let first = run(&["certify", "--problem", "search", "--params", "n=4"]);
    assert_eq!(first.status.code(), Some(0), "stderr: {}", stderr(&first));
    let text = stdout(&first);
    assert!(text.contains("# table: bounds"), "got: {text}");
    assert!(text.contains("12*sqrt(G*T)"));
    assert!(text.contains("residual=0"));
    assert!(text.trim_end().ends_with("pass=pass"));

    let second = run(&["certify", "--problem", "search", "--params", "n=4"]);
    assert_eq!(
        stdout(&second),
        text,
        "two identical runs must match byte-for-byte"
    );
}

#[test]
fn unknown_problem_and_bad_flags_exit_2() {
    let out = run(&["certify", "--problem", "no_such_thing"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("no_such_thing"));

    let out = run(&["certify", "--problem", "search", "--mode", "half"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("half"));

    let out = run(&["certify", "--problem", "search", "--weights", "constant:1"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["certify"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--problem"));

    let out = run(&[
        "certify",
        "--problem",
        "search",
        "--tolerance",
        "feasibility=-1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tree_file_round_trip_with_json_mirror() {
    let dir = std::env::temp_dir().join(format!("guesstree-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let tree = write_fixture(&dir, "or_tree.json", OR_TREE);
    let table = write_fixture(&dir, "or_table.json", OR_TABLE);
    let out_path = dir.join("report.json");

    let out = run(&[
        "certify",
        "--tree",
        tree.to_str().unwrap(),
        "--table",
        table.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("T=2"));

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(json["pass"], serde_json::Value::Bool(true));
    assert_eq!(json["command"], "certify");
    assert_eq!(json["seed"], 17);

    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn wrong_table_fails_with_exit_1() {
    let dir = std::env::temp_dir().join(format!("guesstree-cli-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let tree = write_fixture(&dir, "or_tree.json", OR_TREE);
    let bad_table = write_fixture(
        &dir,
        "or_table_bad.json",
        &OR_TABLE.replace(
            r#"{ "input": [0, 0], "label": 0 }"#,
            r#"{ "input": [0, 0], "label": 1 }"#,
        ),
    );

    let out = run(&[
        "validate",
        "--tree",
        tree.to_str().unwrap(),
        "--table",
        bad_table.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("pass=fail"));
    assert!(
        text.contains("leaf label 0, function value 1"),
        "got: {text}"
    );

    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn two_black_sibling_blocks_are_rejected_at_parse_time() {
    let dir = std::env::temp_dir().join(format!("guesstree-cli-black-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let tree = write_fixture(
        &dir,
        "two_black.json",
        &OR_TREE.replace(
            r#""colors": ["black", "red"], "children": ["s1", "s2"]"#,
            r#""colors": ["black", "black"], "children": ["s1", "s2"]"#,
        ),
    );
    let table = write_fixture(&dir, "or_table.json", OR_TABLE);

    let out = run(&[
        "certify",
        "--tree",
        tree.to_str().unwrap(),
        "--table",
        table.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("more than one black block"),
        "stderr must name the violated invariant, got: {}",
        stderr(&out)
    );

    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn sweeps_and_families_run_from_the_command_line() {
    let out = run(&[
        "sweep",
        "--problem",
        "bipartiteness",
        "--params",
        "n_min=4",
        "n_max=5",
        "samples=16",
        "--seed",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("12*n^(3/2)"));

    let out = run(&[
        "sweep",
        "--problem",
        "min",
        "--params",
        "n_min=3",
        "n_max=4",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("25/12"));

    let out = run(&[
        "ensemble",
        "--problem",
        "min",
        "--params",
        "n=3",
        "ell=3",
        "--mode",
        "sampled:200",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("min_success=1"));
    assert!(stdout(&out).contains("sampled:200@17"));

    let out = run(&["span", "--problem", "two_twos", "--family", "subset"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("axiom_violations=0"));
}
