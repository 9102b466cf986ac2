//! End-to-end tests of the `isolde` binary: exit codes, output formats, the
//! history-file round trip, level DSL files, DIMACS dumping, the external
//! solver hook, and the bench subcommand.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_isolde"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).to_string()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).to_string()
}

fn write_file(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn synth_json_roundtrips_through_check() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(&[
        "synth",
        "--allowed",
        "SI_B",
        "--disallowed",
        "SER_B",
        "--txns",
        "3",
        "--objs",
        "2",
        "--vals",
        "2",
        "--format",
        "json",
    ]);
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr(&output));
    let text = stdout(&output);
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(value["result"], "sat");
    assert_eq!(value["history"]["transactions"].as_array().unwrap().len(), 3);

    // the emitted document is accepted verbatim by check and reproduces
    // both verdicts
    let history_path = write_file(dir.path(), "history.json", &text);
    let allowed = run(&[
        "check",
        "--level",
        "SI_B",
        "--history",
        history_path.to_str().unwrap(),
        "--txns",
        "3",
        "--objs",
        "2",
        "--vals",
        "2",
    ]);
    assert_eq!(allowed.status.code(), Some(0));
    assert!(stdout(&allowed).contains("allowed by SI_B"), "{}", stdout(&allowed));

    let disallowed = run(&[
        "check",
        "--level",
        "SER_B",
        "--history",
        history_path.to_str().unwrap(),
    ]);
    assert_eq!(disallowed.status.code(), Some(0));
    assert!(stdout(&disallowed).contains("disallowed by SER_B"));
}

#[test]
fn unknown_level_is_usage_error() {
    let output = run(&["synth", "--allowed", "NOPE", "--disallowed", "SER_A", "--txns", "2"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains("unknown level NOPE"));
}

#[test]
fn bad_flags_are_usage_errors() {
    let output = run(&["synth", "--allowed", "SI_B", "--txns", "2"]);
    assert_eq!(output.status.code(), Some(2), "missing --disallowed must be a usage error");
    let output = run(&["synth", "--allowed", "SI_B", "--disallowed", "SER_B", "--txns", "0"]);
    assert_eq!(output.status.code(), Some(2), "zero scope must be a usage error");
}

#[test]
fn timeout_exit_code() {
    let output = run(&[
        "synth",
        "--allowed",
        "SI_B",
        "--disallowed",
        "SER_B",
        "--txns",
        "3",
        "--timeout",
        "0",
    ]);
    assert_eq!(output.status.code(), Some(3));
    assert!(stdout(&output).contains("timeout"));
}

#[test]
fn fail_on_unsat_flag() {
    let base = [
        "synth",
        "--allowed",
        "SER_A",
        "--disallowed",
        "RA_A",
        "--txns",
        "2",
        "--objs",
        "2",
        "--vals",
        "2",
    ];
    let output = run(&base);
    assert_eq!(output.status.code(), Some(0), "unsat verdicts exit 0 by default");
    let mut with_flag = base.to_vec();
    with_flag.push("--fail-on-unsat");
    let output = run(&with_flag);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn malformed_history_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_file(dir.path(), "broken.json", "{\"not\": \"a history\"}");
    let output = run(&["check", "--level", "SER_A", "--history", path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));

    // unknown object names are rejected too
    let path = write_file(
        dir.path(),
        "badnames.json",
        r#"{"transactions":[{"id":"t0","session":0,"seq":0,"writes":{"y9":"n0"},"reads":{}}]}"#,
    );
    let output = run(&["check", "--level", "SER_A", "--history", path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn check_bundled_fixture_without_scope_flags() {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/write_skew.json");
    let output = run(&["check", "--level", "PC_A", "--history", fixture.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr(&output));
    assert!(stdout(&output).contains("allowed by PC_A"));
}

#[test]
fn compare_reports_equivalence() {
    let output = run(&[
        "compare", "--a", "SER_A", "--b", "SER_B", "--txns", "3", "--objs", "2", "--vals", "2",
    ]);
    assert_eq!(output.status.code(), Some(0));
    assert!(stdout(&output).contains("equivalent within scope"), "{}", stdout(&output));

    let output = run(&[
        "compare", "--a", "SI_B", "--b", "SER_B", "--txns", "3", "--objs", "2", "--vals", "2",
    ]);
    assert_eq!(output.status.code(), Some(0));
    assert!(stdout(&output).contains("not equivalent"));
}

#[test]
fn levels_list_names_catalog() {
    let output = run(&["levels", "list"]);
    assert_eq!(output.status.code(), Some(0));
    let text = stdout(&output);
    for name in ["SER_A", "PC_A", "CC_A", "RA_A", "SER_B", "SI_B", "PC_B", "CC_B"] {
        assert!(text.contains(name), "missing {} in:\n{}", name, text);
    }
}

#[test]
fn custom_spec_files_extend_the_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_file(
        dir.path(),
        "custom.lvl",
        "level Trivial { framework commit_order; axiom forall t:Txn . !so(t,t) }",
    );
    let output = run(&["levels", "list", "--spec", spec.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(0));
    assert!(stdout(&output).contains("Trivial"));

    // a diagnostics-bearing file is a usage error with locations
    let broken = write_file(
        dir.path(),
        "broken.lvl",
        "level Bad { framework commit_order; axiom so(x0, t0) }",
    );
    let output = run(&["levels", "list", "--spec", broken.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    let err = stderr(&output);
    assert!(err.contains("1:"), "diagnostics carry line/col: {}", err);
}

#[test]
fn dimacs_dir_dumps_every_query() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("queries");
    let output = run(&[
        "synth",
        "--allowed",
        "SI_B",
        "--disallowed",
        "SER_B",
        "--txns",
        "3",
        "--format",
        "json",
        "--dimacs-dir",
        dump.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    let calls = value["stats"]["solver_calls"].as_u64().unwrap();
    let files = std::fs::read_dir(&dump).unwrap().count() as u64;
    assert_eq!(files, calls);
    // every file is a DIMACS header plus 0-terminated clauses
    for entry in std::fs::read_dir(&dump).unwrap() {
        let text = std::fs::read_to_string(entry.unwrap().path()).unwrap();
        assert!(text.starts_with("p cnf "), "bad header: {}", text.lines().next().unwrap());
    }
}

const BRUTE_FORCE_SOLVER: &str = r#"
import itertools, sys
clauses, nvars = [], 0
for line in open(sys.argv[1]):
    parts = line.split()
    if not parts or parts[0] in ("c", "p"):
        if parts and parts[0] == "p":
            nvars = int(parts[2])
        continue
    clauses.append([int(tok) for tok in parts if tok != "0"])
for bits in itertools.product([False, True], repeat=nvars):
    if all(any(bits[abs(l) - 1] == (l > 0) for l in c) for c in clauses):
        print("s SATISFIABLE")
        print("v " + " ".join(str(i + 1 if b else -(i + 1)) for i, b in enumerate(bits)) + " 0")
        sys.exit(10)
print("s UNSATISFIABLE")
sys.exit(20)
"#;

#[test]
fn external_solver_env_var() {
    let dir = tempfile::tempdir().unwrap();
    let script = write_file(dir.path(), "solver.py", BRUTE_FORCE_SOLVER);
    // a query small enough for brute force: check a single write at (1,1,1)
    let history = write_file(
        dir.path(),
        "single.json",
        r#"{"transactions":[{"id":"t0","session":0,"seq":0,"writes":{"x0":"n0"},"reads":{}}]}"#,
    );
    let output = bin()
        .args(["check", "--level", "SER_A", "--history", history.to_str().unwrap()])
        .env("ISOLDE_SAT_CMD", format!("python3 {}", script.display()))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr(&output));
    assert!(stdout(&output).contains("allowed by SER_A"));

    // backend failure is an infrastructure error, not a verdict
    let output = bin()
        .args(["check", "--level", "SER_A", "--history", history.to_str().unwrap()])
        .env("ISOLDE_SAT_CMD", "/nonexistent/solver")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(!stdout(&output).contains("disallowed"));
}

#[test]
fn bench_subcommand_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let suite = write_file(
        dir.path(),
        "suite.json",
        r#"{"problems":[{"id":"demo","allowed":"SI_B","disallowed":"SER_B","scope":[3,2,2],
            "variants":["full","no_learning"],"timeout_secs":60}]}"#,
    );
    let out = dir.path().join("rows.csv");
    let output = run(&[
        "bench",
        "--suite",
        suite.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr(&output));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "problem_id,problem_type,txns,objs,vals,variant,result,wall_ms,candidates,initial_clauses,solver_calls"
    );
    assert_eq!(lines.count(), 2);

    // malformed suites are usage errors
    let broken = write_file(dir.path(), "broken.json", "{oops");
    let output = run(&[
        "bench",
        "--suite",
        broken.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn bench_emit_default_suite() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("default.json");
    let out = dir.path().join("unused.csv");
    let output = run(&[
        "bench",
        "--emit-default-suite",
        path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--max-txns",
        "3",
    ]);
    assert_eq!(output.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let suite: serde_json::Value = serde_json::from_str(&text).unwrap();
    // 8 * 7 ordered pairs, txns 2..=3
    assert_eq!(suite["problems"].as_array().unwrap().len(), 8 * 7 * 2);
}
