//! Define a level in the DSL and hunt for its bugs.
//!
//! The level below is a broken serializability: it forgets that a
//! transaction must observe its own session's predecessors. Comparing it
//! against the correct definition synthesizes a two-transaction history
//! that the buggy level wrongly admits.
//!
//! Run with: cargo run --example custom_level

use isolde::bounds::{HistoryDoc, Scope};
use isolde::levels::{builtin_level, parse_level_file};
use isolde::synth::{synth, SynthOptions, SynthOutcome, SynthProblem};

const BUGGY: &str = r#"
// Serializability without the session axiom.
level SER_NoSession {
  framework visibility;
  axiom forall t2:Txn, x:Obj, v:Val . reads(t2,x,v) =>
    (exists t1:Txn . t1 != t2 && vis(t1,t2) && writes(t1,x,v) &&
      (forall t3:Txn . t3 != t1 && vis(t3,t2) && writesx(t3,x) => ar(t3,t1)))
  axiom forall a:Txn, b:Txn . a != b => vis(a,b) || vis(b,a)
}
"#;

fn main() {
    let buggy = parse_level_file(BUGGY).expect("level parses").remove(0);
    let correct = builtin_level("SER_B").unwrap();

    let problem = SynthProblem {
        allowed: buggy,
        disallowed: correct,
        scope: Scope::new(2, 1, 2).unwrap(),
        options: SynthOptions::default(),
    };
    match synth(&problem).unwrap() {
        SynthOutcome::Sat { history, .. } => {
            println!("SER_NoSession admits a history that SER_B rejects:");
            for txn in HistoryDoc::from_history(&history).transactions {
                println!(
                    "  {} session={} seq={} writes={:?} reads={:?}",
                    txn.id, txn.session, txn.seq, txn.writes, txn.reads
                );
            }
            println!("(a transaction reads a value written later in its own session)");
        }
        SynthOutcome::Unsat { .. } => println!("the definitions agree within scope"),
        SynthOutcome::Timeout { .. } => println!("timed out"),
    }
}
