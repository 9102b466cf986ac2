//! Dump the solver queries of a synthesis run as DIMACS CNF files.
//!
//! Every candidate-search and verification query lands in ./dimacs_out as
//! query_NNNN.cnf, suitable for replay with any DIMACS solver. Setting
//! ISOLDE_SAT_CMD to such a solver routes the queries there live.
//!
//! Run with: cargo run --example export_dimacs

use isolde::bounds::Scope;
use isolde::levels::builtin_level;
use isolde::prop::DimacsDump;
use isolde::synth::{synth, SynthOptions, SynthProblem};
use std::path::PathBuf;

fn main() {
    let dir = PathBuf::from("dimacs_out");
    std::fs::create_dir_all(&dir).unwrap();

    let options = SynthOptions {
        dimacs_dump: Some(DimacsDump::new(dir.clone())),
        ..Default::default()
    };
    let problem = SynthProblem {
        allowed: builtin_level("SI_B").unwrap(),
        disallowed: builtin_level("SER_B").unwrap(),
        scope: Scope::new(3, 2, 2).unwrap(),
        options,
    };
    let outcome = synth(&problem).unwrap();
    println!(
        "outcome: {}, {} solver queries dumped",
        if outcome.is_sat() { "SAT" } else { "UNSAT" },
        outcome.stats().solver_calls
    );
    let mut names: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    for name in names.iter().take(4) {
        let head = std::fs::read_to_string(dir.join(name)).unwrap();
        let header = head.lines().next().unwrap_or_default().to_string();
        println!("  {}: {}", name, header);
    }
    if names.len() > 4 {
        println!("  ... {} more", names.len() - 4);
    }
}
