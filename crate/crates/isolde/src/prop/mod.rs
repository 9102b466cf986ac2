//! Propositional layer: formulas, Tseitin CNF conversion, SAT solving, and
//! DIMACS export.
//!
//! Formulas are reference-counted DAGs. Grounding a first-order formula
//! produces heavily shared subtrees (closure tables, repeated axiom bodies),
//! so every traversal here memoizes on node identity; without that the
//! shared structure would be re-expanded exponentially.

mod cdcl;
mod cnf;
mod solve;

pub use cnf::{dimacs_string, export_dimacs, to_cnf, write_dimacs, Clause, Cnf};
pub use solve::{solve, solve_with, Backend, DimacsDump, SolveError, SolveRun, SolverConfig};

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::rc::Rc;

/// Propositional variable id. Ids are positive; 1-based like DIMACS.
pub type VarId = u32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropFormula(Rc<PropNode>);

#[derive(Debug, PartialEq, Eq)]
pub enum PropNode {
    Var(VarId),
    True,
    False,
    Not(PropFormula),
    And(PropFormula, PropFormula),
    Or(PropFormula, PropFormula),
    Implies(PropFormula, PropFormula),
}

impl PropFormula {
    pub fn var(id: VarId) -> Self {
        debug_assert!(id > 0, "variable ids are positive");
        PropFormula(Rc::new(PropNode::Var(id)))
    }

    pub fn truth(value: bool) -> Self {
        PropFormula(Rc::new(if value { PropNode::True } else { PropNode::False }))
    }

    pub fn node(&self) -> &PropNode {
        &self.0
    }

    pub(crate) fn ptr(&self) -> *const PropNode {
        Rc::as_ptr(&self.0)
    }

    pub fn is_true(&self) -> bool {
        matches!(self.node(), PropNode::True)
    }

    pub fn is_false(&self) -> bool {
        matches!(self.node(), PropNode::False)
    }

    /// Conjunction with constant folding.
    pub fn and(self, other: PropFormula) -> Self {
        match (self.node(), other.node()) {
            (PropNode::False, _) | (_, PropNode::False) => PropFormula::truth(false),
            (PropNode::True, _) => other,
            (_, PropNode::True) => self,
            _ => PropFormula(Rc::new(PropNode::And(self, other))),
        }
    }

    /// Disjunction with constant folding.
    pub fn or(self, other: PropFormula) -> Self {
        match (self.node(), other.node()) {
            (PropNode::True, _) | (_, PropNode::True) => PropFormula::truth(true),
            (PropNode::False, _) => other,
            (_, PropNode::False) => self,
            _ => PropFormula(Rc::new(PropNode::Or(self, other))),
        }
    }

    /// Implication with constant folding.
    pub fn implies(self, other: PropFormula) -> Self {
        match (self.node(), other.node()) {
            (PropNode::False, _) | (_, PropNode::True) => PropFormula::truth(true),
            (PropNode::True, _) => other,
            (_, PropNode::False) => self.not(),
            _ => PropFormula(Rc::new(PropNode::Implies(self, other))),
        }
    }

    /// Negation with constant folding (including double negation).
    pub fn not(self) -> Self {
        match self.node() {
            PropNode::True => PropFormula::truth(false),
            PropNode::False => PropFormula::truth(true),
            PropNode::Not(inner) => inner.clone(),
            _ => PropFormula(Rc::new(PropNode::Not(self))),
        }
    }

    /// Conjunction of a possibly-empty list (empty list is true).
    pub fn and_all(parts: impl IntoIterator<Item = PropFormula>) -> Self {
        parts.into_iter().fold(PropFormula::truth(true), PropFormula::and)
    }

    /// Disjunction of a possibly-empty list (empty list is false).
    pub fn or_all(parts: impl IntoIterator<Item = PropFormula>) -> Self {
        parts.into_iter().fold(PropFormula::truth(false), PropFormula::or)
    }

    /// Variables occurring in the formula, ascending.
    pub fn vars(&self) -> Vec<VarId> {
        let mut seen = std::collections::BTreeSet::new();
        let mut visited = std::collections::HashSet::new();
        fn walk(
            f: &PropFormula,
            seen: &mut std::collections::BTreeSet<VarId>,
            visited: &mut std::collections::HashSet<*const PropNode>,
        ) {
            if !visited.insert(f.ptr()) {
                return;
            }
            match f.node() {
                PropNode::Var(v) => {
                    seen.insert(*v);
                }
                PropNode::True | PropNode::False => {}
                PropNode::Not(a) => walk(a, seen, visited),
                PropNode::And(a, b) | PropNode::Or(a, b) | PropNode::Implies(a, b) => {
                    walk(a, seen, visited);
                    walk(b, seen, visited);
                }
            }
        }
        walk(self, &mut seen, &mut visited);
        seen.into_iter().collect()
    }

    /// Number of distinct DAG nodes.
    pub fn dag_size(&self) -> usize {
        let mut visited = std::collections::HashSet::new();
        fn walk(f: &PropFormula, visited: &mut std::collections::HashSet<*const PropNode>) {
            if !visited.insert(f.ptr()) {
                return;
            }
            match f.node() {
                PropNode::Var(_) | PropNode::True | PropNode::False => {}
                PropNode::Not(a) => walk(a, visited),
                PropNode::And(a, b) | PropNode::Or(a, b) | PropNode::Implies(a, b) => {
                    walk(a, visited);
                    walk(b, visited);
                }
            }
        }
        walk(self, &mut visited);
        visited.len()
    }

    /// Evaluates under a (total enough) assignment.
    pub fn eval(&self, instance: &Instance) -> Result<bool, VarId> {
        let mut memo: HashMap<*const PropNode, bool> = HashMap::new();
        fn walk(
            f: &PropFormula,
            instance: &Instance,
            memo: &mut HashMap<*const PropNode, bool>,
        ) -> Result<bool, VarId> {
            if let Some(&hit) = memo.get(&f.ptr()) {
                return Ok(hit);
            }
            let value = match f.node() {
                PropNode::Var(v) => instance.get(*v).ok_or(*v)?,
                PropNode::True => true,
                PropNode::False => false,
                PropNode::Not(a) => !walk(a, instance, memo)?,
                PropNode::And(a, b) => walk(a, instance, memo)? && walk(b, instance, memo)?,
                PropNode::Or(a, b) => walk(a, instance, memo)? || walk(b, instance, memo)?,
                PropNode::Implies(a, b) => !walk(a, instance, memo)? || walk(b, instance, memo)?,
            };
            memo.insert(f.ptr(), value);
            Ok(value)
        }
        walk(self, instance, &mut memo)
    }

    /// Replaces the listed variables by constants and folds. Unlisted
    /// variables stay symbolic.
    pub fn assign(&self, values: &BTreeMap<VarId, bool>) -> PropFormula {
        let mut memo: HashMap<*const PropNode, PropFormula> = HashMap::new();
        fn walk(
            f: &PropFormula,
            values: &BTreeMap<VarId, bool>,
            memo: &mut HashMap<*const PropNode, PropFormula>,
        ) -> PropFormula {
            if let Some(hit) = memo.get(&f.ptr()) {
                return hit.clone();
            }
            let out = match f.node() {
                PropNode::Var(v) => match values.get(v) {
                    Some(&b) => PropFormula::truth(b),
                    None => f.clone(),
                },
                PropNode::True | PropNode::False => f.clone(),
                PropNode::Not(a) => walk(a, values, memo).not(),
                PropNode::And(a, b) => walk(a, values, memo).and(walk(b, values, memo)),
                PropNode::Or(a, b) => walk(a, values, memo).or(walk(b, values, memo)),
                PropNode::Implies(a, b) => walk(a, values, memo).implies(walk(b, values, memo)),
            };
            memo.insert(f.ptr(), out.clone());
            out
        }
        walk(self, values, &mut memo)
    }
}

impl fmt::Display for PropFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            PropNode::Var(v) => write!(f, "p{}", v),
            PropNode::True => write!(f, "T"),
            PropNode::False => write!(f, "F"),
            PropNode::Not(a) => write!(f, "!{}", a),
            PropNode::And(a, b) => write!(f, "({} & {})", a, b),
            PropNode::Or(a, b) => write!(f, "({} | {})", a, b),
            PropNode::Implies(a, b) => write!(f, "({} => {})", a, b),
        }
    }
}

/// Constant folding: removes every reducible constant and double negation.
/// The result is logically equivalent and never larger.
pub fn simplify(f: &PropFormula) -> PropFormula {
    f.assign(&BTreeMap::new())
}

/// A (partial) assignment of truth values to variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Instance {
    values: BTreeMap<VarId, bool>,
}

impl Instance {
    pub fn get(&self, var: VarId) -> Option<bool> {
        self.values.get(&var).copied()
    }

    pub fn set(&mut self, var: VarId, value: bool) {
        self.values.insert(var, value);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, bool)> + '_ {
        self.values.iter().map(|(&v, &b)| (v, b))
    }

    /// True variables, ascending.
    pub fn true_vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.values.iter().filter(|(_, &b)| b).map(|(&v, _)| v)
    }

    /// Returns a copy where `other`'s assignments take precedence.
    pub fn overlay(&self, other: &Instance) -> Instance {
        let mut merged = self.clone();
        for (v, b) in other.iter() {
            merged.set(v, b);
        }
        merged
    }

    pub fn as_map(&self) -> &BTreeMap<VarId, bool> {
        &self.values
    }

    pub fn from_map(values: BTreeMap<VarId, bool>) -> Instance {
        Instance { values }
    }
}

impl FromIterator<(VarId, bool)> for Instance {
    fn from_iter<T: IntoIterator<Item = (VarId, bool)>>(iter: T) -> Self {
        Instance { values: iter.into_iter().collect() }
    }
}

/// A solver verdict: UNSAT, or an instance covering every queried variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Solution {
    Unsat,
    Sat(Instance),
}

impl Solution {
    pub fn is_sat(&self) -> bool {
        matches!(self, Solution::Sat(_))
    }

    pub fn instance(&self) -> Option<&Instance> {
        match self {
            Solution::Sat(i) => Some(i),
            Solution::Unsat => None,
        }
    }
}
