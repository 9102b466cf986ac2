//! Isolde: bounded synthesis of transaction histories that separate
//! isolation-level specifications.
//!
//! Given two isolation levels P ("allowed") and N ("disallowed") written in
//! a sorted first-order constraint language, and a finite scope bounding the
//! number of transactions, objects, and values, [`synth::synth`] produces a
//! history admitted by P but rejected by N, or proves that no such history
//! exists within the scope. The search is a counterexample-guided loop over
//! a SAT backend. Membership checking, refinement and equivalence checking,
//! and a benchmark harness are built on the same primitive.
//!
//! The `examples/` directory walks through each capability; the `isolde`
//! binary exposes them as subcommands.

pub mod bounds;
pub mod cli;
pub mod fixtures;
pub mod fol;
pub mod levels;
pub mod oracle;
pub mod prop;
pub mod synth;
pub mod translate;

pub use bounds::{History, Scope};
