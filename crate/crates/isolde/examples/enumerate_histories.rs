//! Exhaustive enumeration with the brute-force oracle.
//!
//! Counts the well-formed histories at small scopes and cross-checks the
//! oracle's verdict for one level pair against the synthesis engine.
//!
//! Run with: cargo run --release --example enumerate_histories

use isolde::bounds::Scope;
use isolde::levels::builtin_level;
use isolde::oracle::{allowed_oracle, enum_histories, synth_oracle, OracleOutcome};
use isolde::synth::{synth, SynthOptions, SynthProblem};

fn main() {
    for (t, o, v) in [(1, 1, 1), (2, 1, 2), (2, 2, 2), (3, 2, 2)] {
        let scope = Scope::new(t, o, v).unwrap();
        let histories = enum_histories(scope);
        println!("scope {}: {} well-formed histories", scope, histories.len());
    }

    let problem = SynthProblem {
        allowed: builtin_level("SI_B").unwrap(),
        disallowed: builtin_level("SER_B").unwrap(),
        scope: Scope::new(3, 2, 2).unwrap(),
        options: SynthOptions::default(),
    };
    let oracle = synth_oracle(&problem).unwrap();
    let engine = synth(&problem).unwrap();
    println!(
        "SI_B vs SER_B at (3,2,2): oracle={} engine={}",
        if oracle.is_sat() { "SAT" } else { "UNSAT" },
        if engine.is_sat() { "SAT" } else { "UNSAT" },
    );
    if let OracleOutcome::Sat(history) = oracle {
        assert!(allowed_oracle(&problem.allowed, &history));
        assert!(!allowed_oracle(&problem.disallowed, &history));
        println!("first qualifying history in enumeration order: {:?}", history);
    }
}
