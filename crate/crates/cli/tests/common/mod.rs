#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

/// Golden cases: directory name under `tests/golden/expected` and the
/// arguments, relative to `tests/golden`, minus `--out-dir`.
pub const GOLDEN_CASES: &[(&str, &[&str])] = &[
    (
        "ccur",
        &[
            "ccur",
            "--fg",
            "inputs/fg.csv",
            "--bg",
            "inputs/bg.csv",
            "--k",
            "3",
            "--c",
            "3",
            "--r",
            "4",
        ],
    ),
    (
        "ccur_centered",
        &[
            "ccur",
            "--fg",
            "inputs/fg.csv",
            "--bg",
            "inputs/bg.csv",
            "--k",
            "2",
            "--c",
            "4",
            "--center",
        ],
    ),
    (
        "cur",
        &[
            "cur",
            "--input",
            "inputs/rank2.csv",
            "--k",
            "2",
            "--c",
            "2",
            "--r",
            "3",
        ],
    ),
    (
        "cur_sampled",
        &[
            "cur",
            "--input",
            "inputs/rank2.csv",
            "--k",
            "2",
            "--c",
            "3",
            "--r",
            "3",
            "--sampled",
            "--seed",
            "5",
        ],
    ),
    (
        "cpca",
        &[
            "cpca",
            "--fg",
            "inputs/fg.csv",
            "--bg",
            "inputs/bg.csv",
            "--top",
            "3",
        ],
    ),
    (
        "simulate",
        &[
            "simulate",
            "--n",
            "40",
            "--m",
            "40",
            "--p",
            "20",
            "--replicates",
            "3",
            "--seed",
            "11",
            "--methods",
            "ccur,cur-fg",
        ],
    ),
    (
        "project",
        &[
            "project",
            "--input",
            "inputs/cells.tsv",
            "--delimiter",
            "tab",
            "--row-labels",
            "--selected-rows-file",
            "inputs/selected_rows.txt",
        ],
    ),
];

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Runs the binary from `cwd` with a clean seed environment.
pub fn run_in(cwd: &Path, args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ccur"))
        .current_dir(cwd)
        .env_remove("CCUR_SEED")
        .args(args)
        .arg("--out-dir")
        .arg(out_dir)
        .output()
        .expect("failed to spawn ccur")
}

pub fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ccur"))
        .env_remove("CCUR_SEED")
        .args(args)
        .output()
        .expect("failed to spawn ccur")
}

pub fn replay_in(cwd: &Path, manifest: &Path, out_dir: &Path) -> Output {
    let manifest = manifest.to_str().unwrap();
    run_in(cwd, &["replay", manifest], out_dir)
}

/// Sorted `(file name, bytes)` for every file in `dir`.
pub fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap_or_else(|e| panic!("reading {}: {e}", dir.display()))
        .map(|entry| {
            let entry = entry.unwrap();
            let name = entry.file_name().into_string().unwrap();
            (name, fs::read(entry.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

/// Names of the files that differ between two directories, if any.
pub fn tree_diff(a: &Path, b: &Path) -> Vec<String> {
    let left = read_tree(a);
    let right = read_tree(b);
    let mut names: Vec<String> = left.iter().chain(&right).map(|(n, _)| n.clone()).collect();
    names.sort();
    names.dedup();
    names
        .into_iter()
        .filter(|n| {
            let l = left.iter().find(|(m, _)| m == n);
            let r = right.iter().find(|(m, _)| m == n);
            l != r
        })
        .collect()
}

pub fn assert_success(out: &Output, what: &str) {
    assert!(
        out.status.success(),
        "{what} failed with {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Runs a golden case fresh and via replay; returns the mismatching files
/// of each against the committed expectation.
pub fn check_golden_case(name: &str, args: &[&str]) -> (Vec<String>, Vec<String>) {
    let root = golden_dir();
    let expected = root.join("expected").join(name);
    let tmp = tempfile::tempdir().unwrap();
    let fresh = tmp.path().join("fresh");
    let out = run_in(&root, args, &fresh);
    assert_success(&out, name);

    let replayed = tmp.path().join("replayed");
    let out = replay_in(&root, &fresh.join("manifest.json"), &replayed);
    assert_success(&out, &format!("replay of {name}"));

    (
        tree_diff(&expected, &fresh),
        tree_diff(&expected, &replayed),
    )
}
