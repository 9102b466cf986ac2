//! Command-line front end.
//!
//! Subcommands: `synth` (synthesize a separating history), `check`
//! (membership of a history file), `compare` (both refinement directions),
//! `levels list` (catalog), and `bench` (benchmark harness).
//!
//! Exit codes: 0 when a verdict was produced (SAT and UNSAT alike), 2 for
//! usage or parse errors, 3 for timeouts. `--fail-on-unsat` makes `synth`
//! exit 1 on UNSAT for scripting. Setting `ISOLDE_SAT_CMD` routes SAT
//! queries to an external DIMACS solver.

pub mod bench;

use crate::bounds::{History, HistoryDoc, Scope};
use crate::fol::Sort;
use crate::levels::{builtin_catalog, parse_level_file, LevelSpec};
use crate::prop::{Backend, DimacsDump};
use crate::synth::{
    check_membership_with, equivalent, synth, EquivalenceVerdict, SynthOptions, SynthOutcome,
    SynthProblem, SynthStats, Witness,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL_ON_UNSAT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_TIMEOUT: i32 = 3;

#[derive(Parser)]
#[command(
    name = "isolde",
    version,
    about = "Reason about transactional isolation levels by bounded history synthesis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a history allowed by one level and disallowed by another
    Synth(SynthArgs),
    /// Check whether a history file is allowed by a level
    Check(CheckArgs),
    /// Compare two levels by refinement in both directions
    Compare(CompareArgs),
    /// Inspect the level catalog
    Levels(LevelsArgs),
    /// Run a benchmark suite, writing one CSV row per (problem, variant)
    Bench(BenchArgs),
}

#[derive(Args)]
struct ScopeArgs {
    /// Transaction bound of the scope
    #[arg(long)]
    txns: usize,
    /// Object bound of the scope
    #[arg(long, default_value_t = 2)]
    objs: usize,
    /// Value bound of the scope
    #[arg(long, default_value_t = 2)]
    vals: usize,
}

impl ScopeArgs {
    fn scope(&self) -> Result<Scope, String> {
        Scope::new(self.txns, self.objs, self.vals).map_err(|e| e.to_string())
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Args)]
struct SynthArgs {
    /// Level that must admit the history
    #[arg(long)]
    allowed: String,
    /// Level that must reject the history
    #[arg(long)]
    disallowed: String,
    #[command(flatten)]
    scope: ScopeArgs,
    /// Additional level definitions (DSL files); may be repeated
    #[arg(long = "spec", value_name = "FILE")]
    specs: Vec<PathBuf>,
    /// Disable counterexample learning (block single candidates instead)
    #[arg(long)]
    no_learning: bool,
    /// Disable merging same-framework queries onto one shared assignment
    #[arg(long)]
    no_smart_search: bool,
    /// Disable pinning the guessed violating order to the canonical order
    #[arg(long)]
    no_fixed_co: bool,
    /// Per-run timeout in seconds
    #[arg(long, value_name = "SECS")]
    timeout: Option<u64>,
    /// Solver seed (perturbs the decision order; 0 keeps the natural order)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
    /// Dump every solver query as DIMACS into this directory
    #[arg(long, value_name = "DIR")]
    dimacs_dir: Option<PathBuf>,
    /// Exit 1 instead of 0 when the verdict is UNSAT
    #[arg(long)]
    fail_on_unsat: bool,
}

#[derive(Args)]
struct CheckArgs {
    /// Level to check against
    #[arg(long)]
    level: String,
    /// History file (JSON document with a "transactions" array)
    #[arg(long, value_name = "FILE")]
    history: PathBuf,
    /// Transaction bound; inferred from the file when omitted
    #[arg(long)]
    txns: Option<usize>,
    /// Object bound; inferred from the file when omitted
    #[arg(long)]
    objs: Option<usize>,
    /// Value bound; inferred from the file when omitted
    #[arg(long)]
    vals: Option<usize>,
    /// Additional level definitions (DSL files); may be repeated
    #[arg(long = "spec", value_name = "FILE")]
    specs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
}

#[derive(Args)]
struct CompareArgs {
    /// First level
    #[arg(long)]
    a: String,
    /// Second level
    #[arg(long)]
    b: String,
    #[command(flatten)]
    scope: ScopeArgs,
    /// Additional level definitions (DSL files); may be repeated
    #[arg(long = "spec", value_name = "FILE")]
    specs: Vec<PathBuf>,
    /// Per-direction timeout in seconds
    #[arg(long, value_name = "SECS")]
    timeout: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
}

#[derive(Args)]
struct LevelsArgs {
    #[command(subcommand)]
    command: LevelsCommand,
}

#[derive(Subcommand)]
enum LevelsCommand {
    /// List catalog names and frameworks
    List {
        /// Additional level definitions (DSL files); may be repeated
        #[arg(long = "spec", value_name = "FILE")]
        specs: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct BenchArgs {
    /// Suite file (JSON); the bundled default suite runs when omitted
    #[arg(long, value_name = "FILE")]
    suite: Option<PathBuf>,
    /// Output CSV path
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Parallel worker slots (default 1 for stable timing)
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Cap on the default suite's transaction scopes
    #[arg(long, default_value_t = 7)]
    max_txns: usize,
    /// Write the bundled default suite as JSON to this path and exit
    #[arg(long, value_name = "FILE")]
    emit_default_suite: Option<PathBuf>,
    /// Additional level definitions (DSL files); may be repeated
    #[arg(long = "spec", value_name = "FILE")]
    specs: Vec<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Runs the CLI against explicit argument and output streams; returns the
/// exit code.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // help and version requests are not errors
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    let result = match cli.command {
        Command::Synth(args) => cmd_synth(args, out, err),
        Command::Check(args) => cmd_check(args, out, err),
        Command::Compare(args) => cmd_compare(args, out, err),
        Command::Levels(args) => cmd_levels(args, out, err),
        Command::Bench(args) => cmd_bench(args, out, err),
    };
    match result {
        Ok(code) => code,
        Err(message) => {
            let _ = writeln!(err, "error: {}", message);
            EXIT_USAGE
        }
    }
}

fn backend_from_env() -> Backend {
    match std::env::var("ISOLDE_SAT_CMD") {
        Ok(cmd) if !cmd.trim().is_empty() => Backend::External(cmd),
        _ => Backend::Embedded,
    }
}

/// Builtin catalog extended by level files; later definitions shadow
/// earlier ones by name.
fn load_levels(specs: &[PathBuf]) -> Result<BTreeMap<String, LevelSpec>, String> {
    let mut by_name: BTreeMap<String, LevelSpec> = BTreeMap::new();
    for level in builtin_catalog() {
        by_name.insert(level.name.clone(), level);
    }
    for path in specs {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {}", path.display(), e))?;
        let specs = parse_level_file(&text).map_err(|diags| {
            let mut rendered = format!("in {}:", path.display());
            for d in diags {
                rendered.push_str(&format!("\n  {}", d));
            }
            rendered
        })?;
        for spec in specs {
            by_name.insert(spec.name.clone(), spec);
        }
    }
    Ok(by_name)
}

fn resolve_level(name: &str, levels: &BTreeMap<String, LevelSpec>) -> Result<LevelSpec, String> {
    levels.get(name).cloned().ok_or_else(|| format!("unknown level {}", name))
}

fn witness_json(witness: &Witness) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    for (name, pairs) in &witness.relations {
        let rendered: Vec<serde_json::Value> = pairs
            .iter()
            .map(|&(a, b)| {
                json!([Sort::Txn.element_name(a), Sort::Txn.element_name(b)])
            })
            .collect();
        map.insert(name.clone(), serde_json::Value::Array(rendered));
    }
    serde_json::Value::Object(map)
}

fn stats_json(stats: &SynthStats) -> serde_json::Value {
    json!({
        "candidates": stats.candidates,
        "initial_clauses": stats.initial_clauses,
        "solver_calls": stats.solver_calls,
        "wall_ms": stats.wall_time.as_millis() as u64,
    })
}

fn print_history_text(out: &mut dyn Write, history: &History) {
    let doc = HistoryDoc::from_history(history);
    for txn in &doc.transactions {
        let writes: Vec<String> =
            txn.writes.iter().map(|(x, v)| format!("{}={}", x, v)).collect();
        let reads: Vec<String> = txn.reads.iter().map(|(x, v)| format!("{}={}", x, v)).collect();
        let _ = writeln!(
            out,
            "  {} (session {}, seq {}): writes [{}] reads [{}]",
            txn.id,
            txn.session,
            txn.seq,
            writes.join(", "),
            reads.join(", ")
        );
    }
    if doc.transactions.is_empty() {
        let _ = writeln!(out, "  (empty history)");
    }
}

fn print_witness_text(out: &mut dyn Write, witness: &Witness) {
    for (name, pairs) in &witness.relations {
        let rendered: Vec<String> = pairs
            .iter()
            .map(|&(a, b)| {
                format!("({},{})", Sort::Txn.element_name(a), Sort::Txn.element_name(b))
            })
            .collect();
        let _ = writeln!(out, "  {} = {{{}}}", name, rendered.join(", "));
    }
}

fn print_stats_text(out: &mut dyn Write, stats: &SynthStats) {
    let _ = writeln!(
        out,
        "stats: candidates={} initial_clauses={} solver_calls={} wall_ms={}",
        stats.candidates,
        stats.initial_clauses,
        stats.solver_calls,
        stats.wall_time.as_millis()
    );
}

fn cmd_synth(args: SynthArgs, out: &mut dyn Write, _err: &mut dyn Write) -> Result<i32, String> {
    let levels = load_levels(&args.specs)?;
    let allowed = resolve_level(&args.allowed, &levels)?;
    let disallowed = resolve_level(&args.disallowed, &levels)?;
    let scope = args.scope.scope()?;

    if let Some(dir) = &args.dimacs_dir {
        std::fs::create_dir_all(dir)
            .map_err(|e| format!("cannot create {}: {}", dir.display(), e))?;
    }
    let options = SynthOptions {
        learning: !args.no_learning,
        smart_search: !args.no_smart_search,
        fixed_order: !args.no_fixed_co,
        timeout: args.timeout.map(Duration::from_secs),
        seed: args.seed,
        backend: backend_from_env(),
        dimacs_dump: args.dimacs_dir.clone().map(DimacsDump::new),
    };
    let problem = SynthProblem { allowed, disallowed, scope, options };
    let outcome = synth(&problem).map_err(|e| e.to_string())?;

    match (&outcome, args.format) {
        (SynthOutcome::Sat { history, witness, stats }, OutputFormat::Json) => {
            let doc = HistoryDoc::from_history(history);
            let value = json!({
                "result": "sat",
                "allowed": args.allowed,
                "disallowed": args.disallowed,
                "history": serde_json::to_value(&doc).map_err(|e| e.to_string())?,
                "witness": witness_json(witness),
                "stats": stats_json(stats),
            });
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&value).unwrap());
        }
        (SynthOutcome::Sat { history, witness, stats }, OutputFormat::Text) => {
            let _ = writeln!(
                out,
                "sat: history allowed by {} and disallowed by {}",
                args.allowed, args.disallowed
            );
            print_history_text(out, history);
            let _ = writeln!(out, "witness for {}:", args.allowed);
            print_witness_text(out, witness);
            print_stats_text(out, stats);
        }
        (SynthOutcome::Unsat { stats }, OutputFormat::Json) => {
            let value = json!({
                "result": "unsat",
                "allowed": args.allowed,
                "disallowed": args.disallowed,
                "stats": stats_json(stats),
            });
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&value).unwrap());
        }
        (SynthOutcome::Unsat { stats }, OutputFormat::Text) => {
            let _ = writeln!(
                out,
                "unsat: within scope {}, every history allowed by {} is allowed by {}",
                scope, args.allowed, args.disallowed
            );
            print_stats_text(out, stats);
        }
        (SynthOutcome::Timeout { stats }, OutputFormat::Json) => {
            let value = json!({
                "result": "timeout",
                "allowed": args.allowed,
                "disallowed": args.disallowed,
                "stats": stats_json(stats),
            });
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&value).unwrap());
        }
        (SynthOutcome::Timeout { stats }, OutputFormat::Text) => {
            let _ = writeln!(out, "timeout after {} ms", stats.wall_time.as_millis());
            print_stats_text(out, stats);
        }
    }
    Ok(match outcome {
        SynthOutcome::Timeout { .. } => EXIT_TIMEOUT,
        SynthOutcome::Unsat { .. } if args.fail_on_unsat => EXIT_FAIL_ON_UNSAT,
        _ => EXIT_OK,
    })
}

/// Accepts either a bare history document or a `synth --format json`
/// output object, whose `history` field is the document.
fn parse_history_file(text: &str) -> Result<HistoryDoc, String> {
    if let Ok(doc) = serde_json::from_str::<HistoryDoc>(text) {
        return Ok(doc);
    }
    #[derive(serde::Deserialize)]
    struct Wrapper {
        history: HistoryDoc,
    }
    serde_json::from_str::<Wrapper>(text)
        .map(|w| w.history)
        .map_err(|e| format!("malformed history file: {}", e))
}

/// Smallest scope covering the names in a document, used when no explicit
/// bounds are given.
fn infer_scope(doc: &HistoryDoc) -> Scope {
    let mut txn = 1usize;
    let mut obj = 1usize;
    let mut val = 1usize;
    let bump = |slot: &mut usize, name: &str, prefix: &str| {
        if let Some(digits) = name.strip_prefix(prefix) {
            if let Ok(index) = digits.parse::<usize>() {
                *slot = (*slot).max(index + 1);
            }
        }
    };
    for t in &doc.transactions {
        bump(&mut txn, &t.id, "t");
        for (x, v) in t.writes.iter().chain(t.reads.iter()) {
            bump(&mut obj, x, "x");
            bump(&mut val, v, "n");
        }
    }
    Scope { txn, obj, val }
}

fn cmd_check(args: CheckArgs, out: &mut dyn Write, _err: &mut dyn Write) -> Result<i32, String> {
    let levels = load_levels(&args.specs)?;
    let level = resolve_level(&args.level, &levels)?;
    let text = std::fs::read_to_string(&args.history)
        .map_err(|e| format!("cannot read {}: {}", args.history.display(), e))?;
    let doc = parse_history_file(&text)?;
    let inferred = infer_scope(&doc);
    let scope = Scope::new(
        args.txns.unwrap_or(inferred.txn),
        args.objs.unwrap_or(inferred.obj),
        args.vals.unwrap_or(inferred.val),
    )
    .map_err(|e| e.to_string())?;
    let history = doc.to_history(scope).map_err(|e| e.to_string())?;
    history.check_well_formed().map_err(|e| format!("history is not well-formed: {}", e))?;

    let config = crate::prop::SolverConfig { backend: backend_from_env(), ..Default::default() };
    let (allowed, witness) =
        check_membership_with(&level, &history, scope, &config).map_err(|e| e.to_string())?;

    match args.format {
        OutputFormat::Json => {
            let value = json!({
                "level": args.level,
                "allowed": allowed,
                "witness": witness.as_ref().map(witness_json),
            });
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&value).unwrap());
        }
        OutputFormat::Text => {
            if allowed {
                let _ = writeln!(out, "allowed by {}", args.level);
                if let Some(witness) = &witness {
                    let _ = writeln!(out, "witness:");
                    print_witness_text(out, witness);
                }
            } else {
                let _ = writeln!(out, "disallowed by {}", args.level);
            }
        }
    }
    Ok(EXIT_OK)
}

fn cmd_compare(args: CompareArgs, out: &mut dyn Write, _err: &mut dyn Write) -> Result<i32, String> {
    let levels = load_levels(&args.specs)?;
    let a = resolve_level(&args.a, &levels)?;
    let b = resolve_level(&args.b, &levels)?;
    let scope = args.scope.scope()?;
    let options = SynthOptions {
        timeout: args.timeout.map(Duration::from_secs),
        seed: args.seed,
        backend: backend_from_env(),
        ..Default::default()
    };
    let (verdict, stats) = equivalent(&a, &b, scope, &options).map_err(|e| e.to_string())?;

    let describe_direction = |h: &Option<History>| -> serde_json::Value {
        match h {
            None => json!({"holds": true}),
            Some(h) => json!({
                "holds": false,
                "witness": serde_json::to_value(HistoryDoc::from_history(h)).unwrap(),
            }),
        }
    };

    match (&verdict, args.format) {
        (EquivalenceVerdict::EquivalentWithinScope, OutputFormat::Text) => {
            let _ = writeln!(out, "equivalent within scope {}", scope);
        }
        (EquivalenceVerdict::NotEquivalent { a_not_b, b_not_a }, OutputFormat::Text) => {
            let _ = writeln!(out, "not equivalent within scope {}", scope);
            if let Some(h) = a_not_b {
                let _ = writeln!(out, "history allowed by {} but not {}:", args.a, args.b);
                print_history_text(out, h);
            } else {
                let _ = writeln!(out, "every {}-allowed history is {}-allowed", args.a, args.b);
            }
            if let Some(h) = b_not_a {
                let _ = writeln!(out, "history allowed by {} but not {}:", args.b, args.a);
                print_history_text(out, h);
            } else {
                let _ = writeln!(out, "every {}-allowed history is {}-allowed", args.b, args.a);
            }
        }
        (EquivalenceVerdict::Indeterminate, OutputFormat::Text) => {
            let _ = writeln!(out, "indeterminate: a refinement direction timed out");
        }
        (verdict, OutputFormat::Json) => {
            let result = match verdict {
                EquivalenceVerdict::EquivalentWithinScope => "equivalent",
                EquivalenceVerdict::NotEquivalent { .. } => "not_equivalent",
                EquivalenceVerdict::Indeterminate => "indeterminate",
            };
            let (a_not_b, b_not_a) = match verdict {
                EquivalenceVerdict::NotEquivalent { a_not_b, b_not_a } => {
                    (a_not_b.clone(), b_not_a.clone())
                }
                _ => (None, None),
            };
            let value = json!({
                "result": result,
                "a": args.a,
                "b": args.b,
                "a_refines_b": describe_direction(&a_not_b),
                "b_refines_a": describe_direction(&b_not_a),
                "stats": [stats_json(&stats[0]), stats_json(&stats[1])],
            });
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&value).unwrap());
        }
    }
    Ok(match verdict {
        EquivalenceVerdict::Indeterminate => EXIT_TIMEOUT,
        _ => EXIT_OK,
    })
}

fn cmd_levels(args: LevelsArgs, out: &mut dyn Write, _err: &mut dyn Write) -> Result<i32, String> {
    match args.command {
        LevelsCommand::List { specs } => {
            let levels = load_levels(&specs)?;
            for (name, level) in &levels {
                let _ = writeln!(out, "{:8} framework: {}", name, level.framework.name);
            }
            Ok(EXIT_OK)
        }
    }
}

fn cmd_bench(args: BenchArgs, out: &mut dyn Write, _err: &mut dyn Write) -> Result<i32, String> {
    if let Some(path) = &args.emit_default_suite {
        let suite = bench::default_suite(&builtin_catalog(), args.max_txns);
        let text = serde_json::to_string_pretty(&suite).map_err(|e| e.to_string())?;
        std::fs::write(path, text).map_err(|e| e.to_string())?;
        let _ = writeln!(out, "wrote default suite to {}", path.display());
        return Ok(EXIT_OK);
    }
    let suite = match &args.suite {
        Some(path) => bench::load_suite(path).map_err(|e| e.to_string())?,
        None => bench::default_suite(&builtin_catalog(), args.max_txns),
    };
    let mut sources = Vec::new();
    for path in &args.specs {
        sources.push(
            std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {}", path.display(), e))?,
        );
    }
    let rows = bench::run_suite(
        &suite,
        &sources,
        &args.out,
        args.jobs.max(1),
        &backend_from_env(),
        args.seed,
        out,
    )
    .map_err(|e| e.to_string())?;
    let _ = writeln!(out, "wrote {} rows to {}", rows.len(), args.out.display());
    Ok(EXIT_OK)
}
