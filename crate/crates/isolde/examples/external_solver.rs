//! Route SAT queries to an external DIMACS solver.
//!
//! Builds a tiny brute-force DIMACS solver as a shell-callable Python
//! script, then solves a membership query through it. Any solver that
//! accepts a DIMACS file argument and prints `s SATISFIABLE` /
//! `s UNSATISFIABLE` plus `v` value lines works the same way; the CLI picks
//! one up from the ISOLDE_SAT_CMD environment variable.
//!
//! Run with: cargo run --example external_solver

use isolde::fixtures;
use isolde::levels::builtin_level;
use isolde::prop::{Backend, SolverConfig};
use isolde::synth::check_membership_with;

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

fn main() {
    let dir = std::env::temp_dir();
    let script = dir.join("isolde_bruteforce_solver.py");
    std::fs::write(&script, BRUTE_FORCE_SOLVER).unwrap();

    let config = SolverConfig {
        backend: Backend::External(format!("python3 {}", script.display())),
        ..Default::default()
    };

    // Keep the query small: the brute-force solver enumerates assignments.
    let history = isolde::bounds::History {
        writes: [(0, 0, 0)].into_iter().collect(),
        ..Default::default()
    };
    let scope = isolde::bounds::Scope::new(1, 1, 1).unwrap();
    let level = builtin_level("SER_A").unwrap();
    let (allowed, _) = check_membership_with(&level, &history, scope, &config).unwrap();
    println!("single write under SER_A via external solver: allowed = {}", allowed);

    let embedded = SolverConfig::default();
    let ws = fixtures::write_skew();
    let (allowed, _) =
        check_membership_with(&level, &ws, fixtures::write_skew_scope(), &embedded).unwrap();
    println!("write skew under SER_A via embedded solver: allowed = {}", allowed);
}
