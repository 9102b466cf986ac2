//! Run a small benchmark suite and print the recorded metrics.
//!
//! Compares the full engine against the no-learning baseline on one SAT
//! problem and shows a single-framework UNSAT problem resolving without
//! candidates. The CSV written here has the same schema as `isolde bench`.
//!
//! Run with: cargo run --release --example bench_metrics

use isolde::cli::bench::{run_suite, Suite, SuiteProblem, Variant};
use isolde::prop::Backend;

fn main() {
    let suite = Suite {
        problems: vec![
            SuiteProblem {
                id: "si_vs_ser_t3".into(),
                allowed: "SI_B".into(),
                disallowed: "SER_B".into(),
                scope: [3, 2, 2],
                variants: vec![Variant::Full, Variant::NoLearning],
                timeout_secs: 60,
            },
            SuiteProblem {
                id: "ser_vs_ra_t4".into(),
                allowed: "SER_A".into(),
                disallowed: "RA_A".into(),
                scope: [4, 2, 3],
                variants: vec![Variant::Full, Variant::NoSmartSearch],
                timeout_secs: 60,
            },
        ],
    };
    let out = std::env::temp_dir().join("isolde_bench_example.csv");
    let mut progress = std::io::sink();
    let rows = run_suite(&suite, &[], &out, 1, &Backend::Embedded, 0, &mut progress).unwrap();

    println!("{:14} {:12} {:16} {:8} {:>10} {:>10} {:>8}", "problem", "type", "variant", "result", "candidates", "clauses", "ms");
    for row in &rows {
        println!(
            "{:14} {:12} {:16} {:8} {:>10} {:>10} {:>8}",
            row.problem_id,
            row.problem_type,
            row.variant,
            row.result,
            row.candidates,
            row.initial_clauses,
            row.wall_ms
        );
    }
    println!("csv written to {}", out.display());
}
