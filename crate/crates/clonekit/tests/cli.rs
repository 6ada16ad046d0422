//! End-to-end tests of the `clonekit` binary: exact serialized outputs,
//! the exit-code contract, and byte-stable JSON.

use std::path::Path;
use std::process::{Command, Output};

fn clonekit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clonekit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(args: &[&str]) -> String {
    let out = clonekit(args);
    assert!(
        out.status.success(),
        "clonekit {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn write_term(dir: &Path, name: &str, args: &[&str]) -> std::path::PathBuf {
    let path = dir.join(name);
    let out = clonekit(&[args, &["--output", path.to_str().unwrap()]].concat());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    path
}

#[test]
fn build_identify_median_exact_output() {
    assert_eq!(
        stdout_of(&["build", "identify-median", "--n", "9", "--k", "3"]),
        "(med9 (v 0) (v 0) (v 0) (v 1) (v 1) (v 1) (v 2) (v 2) (v 2))\n"
    );
}

#[test]
fn build_med3_from_medn_exact_output() {
    assert_eq!(
        stdout_of(&["build", "med3-from-medn", "--n", "5"]),
        "(med5 (v 0) (v 1) (v 1) (v 2) (v 2))\n"
    );
}

#[test]
fn build_maj3_and_even_majority() {
    assert_eq!(
        stdout_of(&["build", "maj3-from-majn", "--n", "5"]),
        "(oracle:maj:5 (v 0) (v 0) (v 1) (v 1) (v 2))\n"
    );
    assert_eq!(
        stdout_of(&["build", "even-majority-from-odd", "--n", "4"]),
        "(oracle:maj:5 (v 0) (v 1) (v 2) (v 3) (v 3))\n"
    );
}

#[test]
fn build_half_median_and_witness() {
    assert_eq!(
        stdout_of(&[
            "build",
            "med3-from-half-median",
            "--n",
            "6",
            "--which",
            "lower"
        ]),
        "(mnk:6:3 (v 0) (v 0) (v 1) (v 1) (v 2) (v 2))\n"
    );
    assert_eq!(
        stdout_of(&["build", "nonminimality-witness", "--n", "4", "--k", "2"]),
        "(mnk:4:2 (v 0) (v 0) (v 1) (v 1))\n"
    );
}

#[test]
fn build_cascade_step_lists_all_selections() {
    let out = stdout_of(&["build", "cascade-step", "--m", "4"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(
        lines,
        vec![
            "(med3 (v 0) (v 1) (v 2))",
            "(med3 (v 0) (v 1) (v 3))",
            "(med3 (v 0) (v 2) (v 3))",
            "(med3 (v 1) (v 2) (v 3))",
        ]
    );
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();

    // 0: a correct identification
    let good = write_term(
        dir.path(),
        "good.sexp",
        &["build", "identify-median", "--n", "9", "--k", "3"],
    );
    let out = clonekit(&["verify", good.to_str().unwrap(), "--reference", "med:3"]);
    assert_eq!(
        exit_code(&out),
        0,
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("PASS"));

    // 1: a wrong claim, with the counterexample on stdout
    let proj = dir.path().join("proj.sexp");
    std::fs::write(&proj, "(v 0)\n").unwrap();
    let out = clonekit(&["verify", proj.to_str().unwrap(), "--reference", "med:3"]);
    assert_eq!(exit_code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("FAIL"));

    // 2: unreadable input
    let out = clonekit(&["verify", "/nonexistent.sexp", "--reference", "med:3"]);
    assert_eq!(exit_code(&out), 2);

    // 2: parse error
    let bad = dir.path().join("bad.sexp");
    std::fs::write(&bad, "(med3 (v 0)").unwrap();
    let out = clonekit(&["verify", bad.to_str().unwrap(), "--reference", "med:3"]);
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));

    // 2: bad reference spec
    let out = clonekit(&["verify", good.to_str().unwrap(), "--reference", "med:4"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn verify_majority_with_oracles() {
    let dir = tempfile::tempdir().unwrap();
    let term = write_term(
        dir.path(),
        "boost.sexp",
        &["build", "boost-majority-by-two", "--n", "5"],
    );
    for oracle in ["true", "adversarial:7"] {
        let out = clonekit(&[
            "verify",
            term.to_str().unwrap(),
            "--reference",
            "majority",
            "--chains",
            "2,3",
            "--oracle",
            oracle,
        ]);
        assert_eq!(
            exit_code(&out),
            0,
            "oracle {oracle}: {}",
            String::from_utf8_lossy(&out.stdout)
        );
    }
}

#[test]
fn bound_table_for_five() {
    let out = stdout_of(&["bound", "--n", "5"]);
    assert!(out.contains("b = 120"), "{out}");
    assert!(out.contains("19/30"), "{out}");
    let degenerate = stdout_of(&["bound", "--n", "3"]);
    assert!(degenerate.contains("b = 1"), "{degenerate}");
    assert!(degenerate.contains("degenerate"), "{degenerate}");
}

#[test]
fn bound_json_is_byte_stable() {
    let a = stdout_of(&["bound", "--n", "7", "--format", "json"]);
    let b = stdout_of(&["bound", "--n", "7", "--format", "json"]);
    assert_eq!(a, b);
    let parsed: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(parsed["n_seq"][0], "7");
    assert_eq!(parsed["r_seq"][1], "9/35");
}

#[test]
fn classify_single_and_table() {
    let out = stdout_of(&["classify", "--n", "5", "--k", "3"]);
    assert_eq!(out, "m^5_3: minimal (median)\n");
    let out = stdout_of(&["classify", "--n", "4", "--k", "2"]);
    assert_eq!(
        out,
        "m^4_2: not minimal; min_2 = (mnk:4:2 (v 0) (v 0) (v 1) (v 1))\n"
    );
    let grid = stdout_of(&["classify", "--table", "4"]);
    assert!(grid.contains("m^2_1: minimal (min)"), "{grid}");
    assert!(grid.contains("m^3_2: minimal (median)"), "{grid}");
    assert!(grid.contains("m^4_3: not minimal"), "{grid}");
}

#[test]
fn cascade_sim_distinct_start() {
    let out = stdout_of(&["cascade-sim", "--n", "5", "--steps", "2"]);
    assert!(out.contains("true median: 2"), "{out}");
    let json = stdout_of(&[
        "cascade-sim",
        "--n",
        "5",
        "--steps",
        "2",
        "--format",
        "json",
    ]);
    let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(parsed["steps"][1]["median_count"], 4);
    assert_eq!(parsed["steps"][2]["width"], 120);
    assert_eq!(parsed["steps"][2]["k_j_lower_bound"], "76");
}

#[test]
fn budgets_are_honoured_from_flags_and_env() {
    let out = clonekit(&[
        "build",
        "majority-any-arity",
        "--n",
        "3",
        "--k",
        "5",
        "--node-budget",
        "10",
    ]);
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));

    let out = Command::new(env!("CARGO_BIN_EXE_clonekit"))
        .args(["build", "majority-any-arity", "--n", "3", "--k", "5"])
        .env("CLONEKIT_NODE_BUDGET", "10")
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn build_json_format_includes_stats() {
    let out = stdout_of(&[
        "build",
        "boost-majority-by-two",
        "--n",
        "5",
        "--format",
        "json",
    ]);
    let parsed: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(parsed["stats"]["arity"], 5);
    assert_eq!(parsed["stats"]["depth"], 3);
}

#[test]
fn plan_json_reports_materializability() {
    let out = stdout_of(&["build", "plan", "--n", "3", "--k", "5"]);
    let parsed: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(parsed["stages"][0]["kind"], "med3-extraction");
    assert_eq!(parsed["stages"][1]["materializable"], false);
    assert_eq!(parsed["bound_sequence"]["bound"], "120");
}
