//! Solver front end: CNF conversion plus a pluggable SAT backend.
//!
//! The embedded CDCL solver is the default. Setting the `ISOLDE_SAT_CMD`
//! environment variable (resolved by the CLI, not here) selects an external
//! solver invoked on a DIMACS file; it must print an `s SATISFIABLE` /
//! `s UNSATISFIABLE` status line and `v` value lines.

use super::cdcl;
use super::cnf::{dimacs_string, to_cnf};
use super::{simplify, Instance, PropFormula, Solution, VarId};
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

/// Which SAT solver answers queries.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum Backend {
    #[default]
    Embedded,
    /// External command; the DIMACS file path is appended as the last
    /// argument. The command string is split on whitespace.
    External(String),
}

/// Sink that dumps every solver query as a DIMACS file.
#[derive(Debug, Clone)]
pub struct DimacsDump {
    dir: PathBuf,
    counter: Arc<AtomicU64>,
}

impl DimacsDump {
    pub fn new(dir: PathBuf) -> Self {
        DimacsDump { dir, counter: Arc::new(AtomicU64::new(0)) }
    }

    fn next_path(&self) -> PathBuf {
        let n = self.counter.fetch_add(1, Ordering::SeqCst);
        self.dir.join(format!("query_{:04}.cnf", n))
    }
}

/// Solver configuration shared by every query of one synthesis run.
#[derive(Debug, Clone, Default)]
pub struct SolverConfig {
    pub backend: Backend,
    pub seed: u64,
    /// Absolute point after which queries abort with [`SolveError::Timeout`].
    pub deadline: Option<Instant>,
    pub dump: Option<DimacsDump>,
}

impl SolverConfig {
    pub fn deadline_expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

/// Infrastructure failures, kept distinct from UNSAT verdicts.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolveError {
    #[error("solver timed out")]
    Timeout,
    #[error("external solver failed: {0}")]
    Backend(String),
    #[error("i/o error: {0}")]
    Io(String),
}

/// One answered query: the solution plus the CNF size that was solved.
#[derive(Debug, Clone)]
pub struct SolveRun {
    pub solution: Solution,
    pub clauses: usize,
    pub vars: VarId,
}

/// Solves with the default embedded backend; the instance covers exactly the
/// variables of `f`.
pub fn solve(f: &PropFormula) -> Result<Solution, SolveError> {
    solve_with(&SolverConfig::default(), f, &[]).map(|run| run.solution)
}

/// Solves `f`, returning an instance that is total over the variables of `f`
/// plus every id in `queried`. Variables unconstrained by the formula
/// default to false, deterministically.
pub fn solve_with(
    config: &SolverConfig,
    f: &PropFormula,
    queried: &[VarId],
) -> Result<SolveRun, SolveError> {
    if config.deadline_expired() {
        return Err(SolveError::Timeout);
    }
    let simplified = simplify(f);
    let cnf = to_cnf(&simplified);
    if let Some(dump) = &config.dump {
        let path = dump.next_path();
        super::cnf::export_dimacs(&cnf, &path).map_err(|e| SolveError::Io(e.to_string()))?;
    }

    let model = match &config.backend {
        Backend::Embedded => {
            cdcl::solve_cnf(cnf.num_vars as usize, &cnf.clauses, config.seed, config.deadline)
                .map_err(|cdcl::TimedOut| SolveError::Timeout)?
        }
        Backend::External(cmd) => run_external(cmd, &cnf, config.deadline)?,
    };

    let solution = match model {
        None => Solution::Unsat,
        Some(model) => {
            let mut instance = Instance::default();
            for v in f.vars().into_iter().chain(queried.iter().copied()) {
                let value = model.get(v as usize).copied().unwrap_or(false);
                instance.set(v, value);
            }
            debug_assert_eq!(f.eval(&instance), Ok(true), "model does not satisfy the formula");
            Solution::Sat(instance)
        }
    };
    Ok(SolveRun { solution, clauses: cnf.clauses.len(), vars: cnf.num_vars })
}

/// Runs an external DIMACS solver and parses its output.
fn run_external(
    cmd: &str,
    cnf: &super::cnf::Cnf,
    deadline: Option<Instant>,
) -> Result<Option<Vec<bool>>, SolveError> {
    let mut parts = cmd.split_whitespace();
    let program = parts
        .next()
        .ok_or_else(|| SolveError::Backend("empty solver command".to_string()))?;
    let args: Vec<&str> = parts.collect();

    let dir = tempfile::tempdir().map_err(|e| SolveError::Io(e.to_string()))?;
    let input = dir.path().join("problem.cnf");
    std::fs::write(&input, dimacs_string(cnf)).map_err(|e| SolveError::Io(e.to_string()))?;
    let stdout_path = dir.path().join("solver.out");
    let stdout_file =
        std::fs::File::create(&stdout_path).map_err(|e| SolveError::Io(e.to_string()))?;

    let mut child = std::process::Command::new(program)
        .args(&args)
        .arg(&input)
        .stdout(stdout_file)
        .stderr(std::process::Stdio::null())
        .spawn()
        .map_err(|e| SolveError::Backend(format!("failed to launch {:?}: {}", program, e)))?;

    loop {
        match child.try_wait() {
            Ok(Some(_)) => break,
            Ok(None) => {
                if deadline.is_some_and(|d| Instant::now() >= d) {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Err(SolveError::Timeout);
                }
                std::thread::sleep(Duration::from_millis(5));
            }
            Err(e) => return Err(SolveError::Backend(e.to_string())),
        }
    }

    let output = std::fs::read_to_string(&stdout_path).map_err(|e| SolveError::Io(e.to_string()))?;
    parse_solver_output(&output, cnf.num_vars)
}

fn parse_solver_output(output: &str, num_vars: VarId) -> Result<Option<Vec<bool>>, SolveError> {
    let mut status: Option<bool> = None;
    let mut model = vec![false; num_vars as usize + 1];
    for line in output.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("s ") {
            match rest.trim() {
                "SATISFIABLE" => status = Some(true),
                "UNSATISFIABLE" => status = Some(false),
                other => {
                    return Err(SolveError::Backend(format!("unrecognized status line: {}", other)))
                }
            }
        } else if let Some(rest) = line.strip_prefix("v ") {
            for token in rest.split_whitespace() {
                let lit: i64 = token
                    .parse()
                    .map_err(|_| SolveError::Backend(format!("bad v-line token {:?}", token)))?;
                if lit == 0 {
                    continue;
                }
                let var = lit.unsigned_abs() as usize;
                if var < model.len() {
                    model[var] = lit > 0;
                }
            }
        }
    }
    match status {
        Some(true) => Ok(Some(model)),
        Some(false) => Ok(None),
        None => Err(SolveError::Backend("no s-line in solver output".to_string())),
    }
}
