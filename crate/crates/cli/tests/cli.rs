mod common;

use std::fs;
use std::path::Path;

use common::{assert_success, replay_in, run, run_in, tree_diff};

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn stderr(out: &std::process::Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const FG: &str = "a,b,c\n1,0,2\n0,3,1\n2,1,0\n1,1,5\n";
const BG: &str = "a,b,c\n1,0,0\n0,1,0\n0,0,1\n1,1,1\n";

#[test]
fn bad_flag_is_a_usage_error_before_reading_inputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let out = run(&[
        "ccur",
        "--fg",
        "missing.csv",
        "--bg",
        "missing.csv",
        "--k",
        "0",
        "-o",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    assert!(stderr(&out).contains("--k"));
    assert!(!out_dir.exists());

    let out = run(&[
        "ccur",
        "--fg",
        "x.csv",
        "--bg",
        "y.csv",
        "--epsilon",
        "-1",
        "-o",
        "o",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["cur", "--input", "x.csv", "--k", "1", "--c", "1", "-o", "o"]);
    assert_eq!(out.status.code(), Some(1), "missing --r");
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
    let help = String::from_utf8(run(&["simulate", "--help"]).stdout).unwrap();
    assert!(help.contains("CCUR_SEED"));
}

#[test]
fn unreadable_and_malformed_inputs_are_input_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tmp.path().join("o");
    let o = o.to_str().unwrap();
    let out = run(&[
        "cpca",
        "--fg",
        "/nonexistent/fg.csv",
        "--bg",
        "/nonexistent/bg.csv",
        "-o",
        o,
    ]);
    assert_eq!(out.status.code(), Some(2));

    let nan = write(tmp.path(), "nan.csv", "a,b\n1,2\n3,NaN\n");
    let out = run(&[
        "cur", "--input", &nan, "--k", "1", "--c", "1", "--r", "1", "-o", o,
    ]);
    assert_eq!(out.status.code(), Some(2));
    let msg = stderr(&out);
    assert!(msg.contains("line 3") && msg.contains("column 2"), "{msg}");

    let ragged = write(tmp.path(), "ragged.csv", "a,b\n1,2\n3\n");
    let out = run(&[
        "cur", "--input", &ragged, "--k", "1", "--c", "1", "--r", "1", "-o", o,
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mismatched_labels_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let fg = write(tmp.path(), "fg.csv", FG);
    let bg = write(tmp.path(), "bg.csv", "a,b,z\n1,0,0\n0,1,0\n");
    let out = run(&[
        "ccur", "--fg", &fg, "--bg", &bg, "--k", "1", "--c", "1", "-o", "unused",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("labels"));
}

#[test]
fn degenerate_cpca_is_a_numeric_error() {
    let tmp = tempfile::tempdir().unwrap();
    let fg = write(tmp.path(), "fg.csv", FG);
    let o = tmp.path().join("o");
    let out = run(&[
        "cpca",
        "--fg",
        &fg,
        "--bg",
        &fg,
        "--top",
        "2",
        "-o",
        o.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn oversized_rank_names_the_failing_stage() {
    let tmp = tempfile::tempdir().unwrap();
    let fg = write(tmp.path(), "fg.csv", FG);
    let bg = write(tmp.path(), "bg.csv", BG);
    let o = tmp.path().join("o");
    let out = run(&[
        "ccur",
        "--fg",
        &fg,
        "--bg",
        &bg,
        "--k",
        "5",
        "--c",
        "2",
        "-o",
        o.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("column selection stage"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn ccur_writes_selection_with_labels_and_resolved_config() {
    let tmp = tempfile::tempdir().unwrap();
    let fg = write(tmp.path(), "fg.csv", FG);
    let bg = write(tmp.path(), "bg.csv", BG);
    let o = tmp.path().join("o");
    let out = run(&[
        "ccur",
        "--fg",
        &fg,
        "--bg",
        &bg,
        "--k",
        "2",
        "--c",
        "2",
        "-o",
        o.to_str().unwrap(),
    ]);
    assert_success(&out, "ccur");

    let sel: serde_json::Value =
        serde_json::from_slice(&fs::read(o.join("selection.json")).unwrap()).unwrap();
    assert_eq!(sel["col_indices"].as_array().unwrap().len(), 2);
    assert_eq!(sel["row_indices"].as_array().unwrap().len(), 2);
    assert_eq!(sel["col_scores"].as_array().unwrap().len(), 3);
    assert_eq!(sel["row_scores"].as_array().unwrap().len(), 4);
    let first = sel["col_indices"][0].as_u64().unwrap() as usize;
    assert_eq!(sel["col_labels"][0], ["a", "b", "c"][first]);
    assert_eq!(sel["config"]["r"], 2);

    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(o.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "ccur");
    assert_eq!(manifest["config"]["r"], 2);
    assert_eq!(manifest["inputs"].as_array().unwrap().len(), 2);
    assert_eq!(
        manifest["outputs"],
        serde_json::json!(["selection.json", "scores.csv"])
    );

    let scores = fs::read_to_string(o.join("scores.csv")).unwrap();
    assert_eq!(scores.lines().count(), 1 + 3 + 4);
}

#[test]
fn replay_refuses_changed_inputs() {
    let tmp = tempfile::tempdir().unwrap();
    let fg = write(tmp.path(), "fg.csv", FG);
    let bg = write(tmp.path(), "bg.csv", BG);
    let first = tmp.path().join("first");
    let out = run_in(
        tmp.path(),
        &["ccur", "--fg", &fg, "--bg", &bg, "--k", "1", "--c", "2"],
        &first,
    );
    assert_success(&out, "ccur");

    let again = tmp.path().join("again");
    assert_success(
        &replay_in(tmp.path(), &first.join("manifest.json"), &again),
        "replay",
    );
    assert!(tree_diff(&first, &again).is_empty());

    fs::write(&fg, FG.replace("1,1,5", "1,1,6")).unwrap();
    let out = replay_in(
        tmp.path(),
        &first.join("manifest.json"),
        &tmp.path().join("x"),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("changed"));
}

#[test]
fn seed_comes_from_the_environment_when_not_given() {
    let tmp = tempfile::tempdir().unwrap();
    let x = write(tmp.path(), "x.csv", FG);
    let o = tmp.path().join("o");
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_ccur"))
        .env("CCUR_SEED", "42")
        .args([
            "cur",
            "--input",
            &x,
            "--k",
            "1",
            "--c",
            "2",
            "--r",
            "2",
            "--sampled",
            "-o",
        ])
        .arg(&o)
        .output()
        .unwrap();
    assert_success(&out, "cur");
    let factors: serde_json::Value =
        serde_json::from_slice(&fs::read(o.join("factors.json")).unwrap()).unwrap();
    assert_eq!(factors["seed"], 42);
}

#[test]
fn unknown_simulation_method_is_a_usage_error() {
    let out = run(&["simulate", "--methods", "ccur,cfs", "-o", "unused"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["simulate", "--method-k", "200", "-o", "unused"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn project_flags_selected_rows_from_a_selection_file() {
    let tmp = tempfile::tempdir().unwrap();
    let x = write(tmp.path(), "x.csv", FG);
    let sel = write(tmp.path(), "sel.json", r#"{"row_indices": [2]}"#);
    let o = tmp.path().join("o");
    let out = run(&[
        "project",
        "--input",
        &x,
        "--selected-rows-file",
        &sel,
        "-o",
        o.to_str().unwrap(),
    ]);
    assert_success(&out, "project");
    let text = fs::read_to_string(o.join("projection.csv")).unwrap();
    let flags: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap())
        .collect();
    assert_eq!(flags, ["0", "0", "1", "0"]);

    let bad = write(tmp.path(), "bad.txt", "9");
    let out = run(&[
        "project",
        "--input",
        &x,
        "--selected-rows-file",
        &bad,
        "-o",
        "unused",
    ]);
    assert_eq!(out.status.code(), Some(2));
}
