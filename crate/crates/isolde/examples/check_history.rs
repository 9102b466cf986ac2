//! Check a concrete history against the whole catalog.
//!
//! Loads the bundled write-skew fixture and reports which levels admit it,
//! printing the auxiliary witness when one exists.
//!
//! Run with: cargo run --example check_history

use isolde::fixtures;
use isolde::levels::builtin_catalog;
use isolde::synth::check_membership;

fn main() {
    let history = fixtures::write_skew();
    let scope = fixtures::write_skew_scope();
    println!("write skew: {:?}", history);

    for level in builtin_catalog() {
        let (allowed, witness) = check_membership(&level, &history, scope).unwrap();
        match witness {
            Some(witness) if allowed => {
                let rendered: Vec<String> = witness
                    .relations
                    .iter()
                    .map(|(name, pairs)| format!("{}={:?}", name, pairs))
                    .collect();
                println!("  {:6} allowed   ({})", level.name, rendered.join("  "));
            }
            _ => println!("  {:6} disallowed", level.name),
        }
    }
}
