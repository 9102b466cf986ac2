//! Refinement and equivalence checking between level definitions.
//!
//! Shows that the two serializability definitions (commit-order and
//! visibility style) coincide within scope, and that snapshot isolation is
//! strictly weaker than serializability.
//!
//! Run with: cargo run --example compare_levels

use isolde::bounds::Scope;
use isolde::levels::builtin_level;
use isolde::synth::{equivalent, refines, EquivalenceVerdict, RefinesVerdict, SynthOptions};

fn main() {
    let scope = Scope::new(3, 2, 2).unwrap();
    let options = SynthOptions::default();

    let ser_a = builtin_level("SER_A").unwrap();
    let ser_b = builtin_level("SER_B").unwrap();
    let si_b = builtin_level("SI_B").unwrap();

    let (verdict, _) = equivalent(&ser_a, &ser_b, scope, &options).unwrap();
    match verdict {
        EquivalenceVerdict::EquivalentWithinScope => {
            println!("SER_A and SER_B are equivalent within {}", scope)
        }
        other => println!("unexpected: {:?}", other),
    }

    let (verdict, _) = refines(&ser_a, &si_b, scope, &options).unwrap();
    if matches!(verdict, RefinesVerdict::HoldsWithinScope) {
        println!("every SER_A history is SI_B-allowed within {}", scope);
    }

    let (verdict, _) = refines(&si_b, &ser_b, scope, &options).unwrap();
    if let RefinesVerdict::CounterExample(history) = verdict {
        println!("SI_B does not refine SER_B; separating history: {:?}", history);
    }
}
