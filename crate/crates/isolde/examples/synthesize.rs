//! Synthesize a history that separates two isolation levels.
//!
//! Asks for a history allowed under snapshot isolation but not under
//! serializability at scope (3,2,2); the engine finds a write-skew-shaped
//! execution.
//!
//! Run with: cargo run --example synthesize

use isolde::bounds::{HistoryDoc, Scope};
use isolde::levels::builtin_level;
use isolde::synth::{synth, SynthOptions, SynthOutcome, SynthProblem};

fn main() {
    let problem = SynthProblem {
        allowed: builtin_level("SI_B").expect("built-in level"),
        disallowed: builtin_level("SER_B").expect("built-in level"),
        scope: Scope::new(3, 2, 2).unwrap(),
        options: SynthOptions::default(),
    };

    match synth(&problem).unwrap() {
        SynthOutcome::Sat { history, witness, stats } => {
            println!("found a history allowed by SI_B and disallowed by SER_B:");
            for txn in HistoryDoc::from_history(&history).transactions {
                println!(
                    "  {} session={} seq={} writes={:?} reads={:?}",
                    txn.id, txn.session, txn.seq, txn.writes, txn.reads
                );
            }
            println!("SI_B witness relations:");
            for (name, pairs) in &witness.relations {
                println!("  {}: {:?}", name, pairs);
            }
            println!(
                "candidates={} initial_clauses={} solver_calls={} wall={:?}",
                stats.candidates, stats.initial_clauses, stats.solver_calls, stats.wall_time
            );
        }
        SynthOutcome::Unsat { .. } => println!("no separating history within scope"),
        SynthOutcome::Timeout { .. } => println!("timed out"),
    }
}
