//! Tseitin transformation and DIMACS export.
//!
//! The conversion introduces one fresh variable per distinct internal DAG
//! node, so the clause count is linear in the (shared) formula size. The
//! output is equisatisfiable with the input; models of the CNF restrict to
//! models of the original formula.

use super::{simplify, PropFormula, PropNode, VarId};
use std::collections::HashMap;
use std::io::{self, Write};
use std::path::Path;

/// A clause of DIMACS-style signed literals.
pub type Clause = Vec<i32>;

/// A CNF formula plus its variable bound (highest variable id used).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cnf {
    pub clauses: Vec<Clause>,
    pub num_vars: VarId,
}

impl Cnf {
    pub fn clause_count(&self) -> usize {
        self.clauses.len()
    }
}

struct Tseitin {
    clauses: Vec<Clause>,
    next_var: VarId,
    memo: HashMap<*const PropNode, i32>,
}

impl Tseitin {
    fn fresh(&mut self) -> i32 {
        let v = self.next_var as i32;
        self.next_var += 1;
        v
    }

    /// Returns a literal equivalent to the subformula, defining fresh
    /// variables for internal nodes as needed.
    fn encode(&mut self, f: &PropFormula) -> i32 {
        let key = f.ptr();
        if let Some(&lit) = self.memo.get(&key) {
            return lit;
        }
        let lit = match f.node() {
            PropNode::Var(v) => *v as i32,
            PropNode::True => {
                let v = self.fresh();
                self.clauses.push(vec![v]);
                v
            }
            PropNode::False => {
                let v = self.fresh();
                self.clauses.push(vec![-v]);
                v
            }
            PropNode::Not(a) => -self.encode(a),
            PropNode::And(a, b) => {
                let (la, lb) = (self.encode(a), self.encode(b));
                let v = self.fresh();
                self.clauses.push(vec![-v, la]);
                self.clauses.push(vec![-v, lb]);
                self.clauses.push(vec![-la, -lb, v]);
                v
            }
            PropNode::Or(a, b) => {
                let (la, lb) = (self.encode(a), self.encode(b));
                let v = self.fresh();
                self.clauses.push(vec![-v, la, lb]);
                self.clauses.push(vec![-la, v]);
                self.clauses.push(vec![-lb, v]);
                v
            }
            PropNode::Implies(a, b) => {
                // v <-> (!a | b)
                let (la, lb) = (self.encode(a), self.encode(b));
                let v = self.fresh();
                self.clauses.push(vec![-v, -la, lb]);
                self.clauses.push(vec![la, v]);
                self.clauses.push(vec![-lb, v]);
                v
            }
        };
        self.memo.insert(key, lit);
        lit
    }

    /// Asserts a subformula at the top level. Conjunction spines are
    /// flattened into one unit clause per conjunct instead of defining a
    /// variable for every And node.
    fn assert_top(&mut self, f: &PropFormula) {
        if let PropNode::And(a, b) = f.node() {
            self.assert_top(a);
            self.assert_top(b);
            return;
        }
        match f.node() {
            PropNode::True => {}
            PropNode::False => self.clauses.push(vec![]),
            _ => {
                let lit = self.encode(f);
                self.clauses.push(vec![lit]);
            }
        }
    }
}

/// Converts a formula to an equisatisfiable CNF via the Tseitin encoding.
///
/// Constants are folded first; a formula equivalent to true yields an empty
/// clause list, one equivalent to false yields a single empty clause.
pub fn to_cnf(f: &PropFormula) -> Cnf {
    let f = simplify(f);
    let max_var = f.vars().last().copied().unwrap_or(0);
    let mut t = Tseitin { clauses: Vec::new(), next_var: max_var + 1, memo: HashMap::new() };
    t.assert_top(&f);
    let used = t.next_var - 1;
    Cnf { clauses: t.clauses, num_vars: used.max(max_var) }
}

/// Renders CNF in DIMACS format.
pub fn dimacs_string(cnf: &Cnf) -> String {
    let mut out = String::new();
    let mut max_var: i64 = 0;
    for clause in &cnf.clauses {
        for &lit in clause {
            max_var = max_var.max(lit.unsigned_abs() as i64);
        }
    }
    out.push_str(&format!("p cnf {} {}\n", max_var, cnf.clauses.len()));
    for clause in &cnf.clauses {
        for &lit in clause {
            out.push_str(&format!("{} ", lit));
        }
        out.push_str("0\n");
    }
    out
}

/// Writes DIMACS CNF to a writer.
pub fn write_dimacs(cnf: &Cnf, w: &mut impl Write) -> io::Result<()> {
    w.write_all(dimacs_string(cnf).as_bytes())
}

/// Writes DIMACS CNF to a file.
pub fn export_dimacs(cnf: &Cnf, path: &Path) -> io::Result<()> {
    let mut file = std::fs::File::create(path)?;
    write_dimacs(cnf, &mut file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prop::Instance;

    fn p(id: VarId) -> PropFormula {
        PropFormula::var(id)
    }

    /// Truth-table satisfiability of a formula over its own variables.
    fn tt_sat(f: &PropFormula) -> bool {
        let vars = f.vars();
        assert!(vars.len() <= 16, "truth table oracle limited to small formulas");
        for bits in 0..(1u32 << vars.len()) {
            let inst: Instance =
                vars.iter().enumerate().map(|(i, &v)| (v, bits & (1 << i) != 0)).collect();
            if f.eval(&inst).unwrap() {
                return true;
            }
        }
        vars.is_empty() && f.eval(&Instance::default()).unwrap()
    }

    /// Tiny independent DPLL used to decide CNF satisfiability in tests.
    fn dpll(clauses: &[Clause], assignment: &mut std::collections::BTreeMap<i32, bool>) -> bool {
        let mut clauses: Vec<Clause> = clauses.to_vec();
        // unit propagation
        loop {
            let mut unit = None;
            for c in &clauses {
                let mut unassigned = Vec::new();
                let mut satisfied = false;
                for &lit in c {
                    match assignment.get(&lit.abs()) {
                        Some(&val) if val == (lit > 0) => {
                            satisfied = true;
                            break;
                        }
                        Some(_) => {}
                        None => unassigned.push(lit),
                    }
                }
                if satisfied {
                    continue;
                }
                match unassigned.len() {
                    0 => return false,
                    1 => {
                        unit = Some(unassigned[0]);
                        break;
                    }
                    _ => {}
                }
            }
            match unit {
                Some(lit) => {
                    assignment.insert(lit.abs(), lit > 0);
                }
                None => break,
            }
        }
        clauses.retain(|c| {
            !c.iter().any(|&lit| assignment.get(&lit.abs()) == Some(&(lit > 0)))
        });
        let Some(&lit) = clauses.iter().flatten().find(|l| !assignment.contains_key(&l.abs()))
        else {
            return clauses.is_empty();
        };
        for value in [true, false] {
            let mut trial = assignment.clone();
            trial.insert(lit.abs(), value);
            if dpll(&clauses, &mut trial) {
                *assignment = trial;
                return true;
            }
        }
        false
    }

    fn cnf_sat(cnf: &Cnf) -> bool {
        dpll(&cnf.clauses, &mut std::collections::BTreeMap::new())
    }

    #[test]
    fn single_variable_is_one_unit_clause() {
        let cnf = to_cnf(&p(1));
        assert_eq!(cnf.clauses, vec![vec![1]]);
    }

    #[test]
    fn contradiction_is_unsatisfiable() {
        let f = p(1).and(p(1).not());
        let cnf = to_cnf(&f);
        assert!(!tt_sat(&f));
        assert!(!cnf_sat(&cnf));
    }

    #[test]
    fn forced_assignment_stays_satisfiable() {
        // (p | q) & (!p | q): satisfiable, q true in every model
        let f = p(1).or(p(2)).and(p(1).not().or(p(2)));
        let cnf = to_cnf(&f);
        assert!(tt_sat(&f));
        assert!(cnf_sat(&cnf));
        // every model of f has q = true
        for bits in 0..4u32 {
            let inst: Instance = [(1, bits & 1 != 0), (2, bits & 2 != 0)].into_iter().collect();
            if f.eval(&inst).unwrap() {
                assert_eq!(inst.get(2), Some(true));
            }
        }
    }

    #[test]
    fn equisatisfiable_on_mixed_corpus() {
        let cases = vec![
            p(1).implies(p(2)).and(p(1)).and(p(2).not()),
            p(1).implies(p(2)).and(p(1)),
            p(1).or(p(2)).and(p(3).not()).implies(p(4)),
            p(1).not().not(),
            p(1).and(p(2)).or(p(1).and(p(2).not())).or(p(1).not()),
        ];
        for f in cases {
            assert_eq!(tt_sat(&f), cnf_sat(&to_cnf(&f)), "mismatch for {}", f);
        }
    }

    #[test]
    fn clause_count_linear_in_dag_size() {
        // A shared subtree is encoded once.
        let shared = p(1).or(p(2));
        let f = shared.clone().and(shared.clone()).or(shared.clone().not().and(p(3)));
        let cnf = to_cnf(&f);
        assert!(cnf.clauses.len() <= 3 * f.dag_size() + 2);
    }

    #[test]
    fn dimacs_format() {
        let cnf = Cnf { clauses: vec![vec![1], vec![-1]], num_vars: 1 };
        assert_eq!(dimacs_string(&cnf), "p cnf 1 2\n1 0\n-1 0\n");

        let cnf = Cnf { clauses: vec![], num_vars: 0 };
        assert_eq!(dimacs_string(&cnf), "p cnf 0 0\n");

        let cnf = Cnf { clauses: vec![vec![1, -2]], num_vars: 2 };
        assert_eq!(dimacs_string(&cnf), "p cnf 2 1\n1 -2 0\n");
    }

    #[test]
    fn constant_formulas() {
        assert_eq!(to_cnf(&PropFormula::truth(true)).clauses.len(), 0);
        let cnf = to_cnf(&PropFormula::truth(false));
        assert_eq!(cnf.clauses, vec![Vec::<i32>::new()]);
    }
}
