//! Reference semantics: Tarskian evaluation over finite structures.
//!
//! This is the oracle-facing code path. It shares nothing with the
//! propositional grounding in the `translate` module, which makes agreement
//! between the two a meaningful cross-check.

use super::{Formula, FormulaKind, RelExpr, RelExprKind, RelationSymbol, Sort, Term, Var};
use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

/// A finite interpretation: domain sizes for the three sorts plus a tuple
/// set for each relation symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteStructure {
    domains: [usize; 3],
    relations: HashMap<String, BTreeSet<Vec<usize>>>,
    signatures: HashMap<String, Vec<Sort>>,
}

/// Evaluation failure: an unknown symbol, a free variable, or a malformed
/// tuple.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("unknown relation {0}")]
    UnknownSymbol(String),
    #[error("free variable {0} during evaluation")]
    FreeVariable(String),
    #[error("constant {0} out of domain bounds")]
    ConstantOutOfBounds(String),
    #[error("tuple arity or domain violation for relation {0}")]
    BadTuple(String),
    #[error("domains must be non-empty")]
    EmptyDomain,
}

impl FiniteStructure {
    /// Creates a structure with the given domain sizes and an empty
    /// interpretation for every symbol in `signature`.
    pub fn new(
        txn: usize,
        obj: usize,
        val: usize,
        signature: &[Rc<RelationSymbol>],
    ) -> Result<Self, EvalError> {
        if txn == 0 || obj == 0 || val == 0 {
            return Err(EvalError::EmptyDomain);
        }
        let mut relations = HashMap::new();
        let mut signatures = HashMap::new();
        for sym in signature {
            relations.insert(sym.name.clone(), BTreeSet::new());
            signatures.insert(sym.name.clone(), sym.signature.clone());
        }
        Ok(FiniteStructure { domains: [txn, obj, val], relations, signatures })
    }

    pub fn domain_size(&self, sort: Sort) -> usize {
        match sort {
            Sort::Txn => self.domains[0],
            Sort::Obj => self.domains[1],
            Sort::Val => self.domains[2],
        }
    }

    /// Inserts a tuple, validating arity and domain bounds.
    pub fn insert(&mut self, symbol: &str, tuple: Vec<usize>) -> Result<(), EvalError> {
        let sig = self
            .signatures
            .get(symbol)
            .ok_or_else(|| EvalError::UnknownSymbol(symbol.to_string()))?;
        if tuple.len() != sig.len()
            || tuple.iter().zip(sig.iter()).any(|(&i, &s)| i >= self.domain_size(s))
        {
            return Err(EvalError::BadTuple(symbol.to_string()));
        }
        self.relations.get_mut(symbol).unwrap().insert(tuple);
        Ok(())
    }

    /// Replaces the whole interpretation of one symbol.
    pub fn set_relation(
        &mut self,
        symbol: &str,
        tuples: impl IntoIterator<Item = Vec<usize>>,
    ) -> Result<(), EvalError> {
        if !self.relations.contains_key(symbol) {
            return Err(EvalError::UnknownSymbol(symbol.to_string()));
        }
        self.relations.get_mut(symbol).unwrap().clear();
        for t in tuples {
            self.insert(symbol, t)?;
        }
        Ok(())
    }

    pub fn relation(&self, symbol: &str) -> Result<&BTreeSet<Vec<usize>>, EvalError> {
        self.relations
            .get(symbol)
            .ok_or_else(|| EvalError::UnknownSymbol(symbol.to_string()))
    }

    pub fn contains(&self, symbol: &str, tuple: &[usize]) -> Result<bool, EvalError> {
        Ok(self.relation(symbol)?.contains(tuple))
    }

    fn binary_relation(&self, symbol: &str) -> Result<PairSet, EvalError> {
        let tuples = self.relation(symbol)?;
        Ok(tuples.iter().map(|t| (t[0], t[1])).collect())
    }
}

type PairSet = BTreeSet<(usize, usize)>;

/// Evaluates a binary relation expression to its set of transaction pairs.
///
/// Union and composition are pointwise; closure is the least transitive
/// superset, computed as a fixpoint of compose-and-union.
pub fn rel_evaluate(expr: &RelExpr, structure: &FiniteStructure) -> Result<PairSet, EvalError> {
    let mut memo = HashMap::new();
    rel_eval_memo(expr, structure, &mut memo)
}

fn compose_pairs(a: &PairSet, b: &PairSet) -> PairSet {
    let mut out = PairSet::new();
    for &(x, m) in a {
        for &(m2, y) in b {
            if m == m2 {
                out.insert((x, y));
            }
        }
    }
    out
}

fn rel_eval_memo(
    expr: &RelExpr,
    structure: &FiniteStructure,
    memo: &mut HashMap<*const RelExprKind, PairSet>,
) -> Result<PairSet, EvalError> {
    let key = Rc::as_ptr(&expr.0);
    if let Some(hit) = memo.get(&key) {
        return Ok(hit.clone());
    }
    let result = match expr.kind() {
        RelExprKind::Symbol(sym) => structure.binary_relation(&sym.name)?,
        RelExprKind::WriteRead => {
            // wr(a, b): b reads some (obj, val) that a wrote.
            let writes = structure.relation("writes")?;
            let reads = structure.relation("reads")?;
            let mut out = PairSet::new();
            for w in writes {
                for r in reads {
                    if w[1] == r[1] && w[2] == r[2] {
                        out.insert((w[0], r[0]));
                    }
                }
            }
            out
        }
        RelExprKind::Union(a, b) => {
            let mut out = rel_eval_memo(a, structure, memo)?;
            out.extend(rel_eval_memo(b, structure, memo)?);
            out
        }
        RelExprKind::Compose(a, b) => {
            let a = rel_eval_memo(a, structure, memo)?;
            let b = rel_eval_memo(b, structure, memo)?;
            compose_pairs(&a, &b)
        }
        RelExprKind::Closure(a) => {
            let base = rel_eval_memo(a, structure, memo)?;
            let mut current = base.clone();
            loop {
                let step = compose_pairs(&current, &base);
                let before = current.len();
                current.extend(step);
                if current.len() == before {
                    break;
                }
            }
            current
        }
    };
    memo.insert(key, result.clone());
    Ok(result)
}

struct Evaluator<'a> {
    structure: &'a FiniteStructure,
    rel_memo: HashMap<*const RelExprKind, PairSet>,
}

type Env = Vec<(String, usize)>;

fn resolve(term: &Term, env: &Env) -> Result<usize, EvalError> {
    match term {
        Term::Const { index, .. } => Ok(*index),
        Term::Var(Var { name, .. }) => env
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, i)| *i)
            .ok_or_else(|| EvalError::FreeVariable(name.clone())),
    }
}

impl Evaluator<'_> {
    fn eval(&mut self, f: &Formula, env: &mut Env) -> Result<bool, EvalError> {
        match f.kind() {
            FormulaKind::Atom(sym, args) => {
                let tuple: Vec<usize> =
                    args.iter().map(|t| resolve(t, env)).collect::<Result<_, _>>()?;
                for (t, &sort) in args.iter().zip(&sym.signature) {
                    if let Term::Const { index, .. } = t {
                        if *index >= self.structure.domain_size(sort) {
                            return Err(EvalError::ConstantOutOfBounds(sort.element_name(*index)));
                        }
                    }
                }
                self.structure.contains(&sym.name, &tuple)
            }
            FormulaKind::RelAtom(expr, a, b) => {
                let pair = (resolve(a, env)?, resolve(b, env)?);
                let key = Rc::as_ptr(&expr.0);
                if !self.rel_memo.contains_key(&key) {
                    let set = rel_eval_memo(expr, self.structure, &mut self.rel_memo)?;
                    self.rel_memo.insert(key, set);
                }
                Ok(self.rel_memo[&key].contains(&pair))
            }
            FormulaKind::Eq(a, b) => Ok(resolve(a, env)? == resolve(b, env)?),
            FormulaKind::Not(g) => Ok(!self.eval(g, env)?),
            FormulaKind::And(a, b) => Ok(self.eval(a, env)? && self.eval(b, env)?),
            FormulaKind::Or(a, b) => Ok(self.eval(a, env)? || self.eval(b, env)?),
            FormulaKind::Implies(a, b) => Ok(!self.eval(a, env)? || self.eval(b, env)?),
            FormulaKind::Forall(v, g) => {
                for i in 0..self.structure.domain_size(v.sort) {
                    env.push((v.name.clone(), i));
                    let holds = self.eval(g, env)?;
                    env.pop();
                    if !holds {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            FormulaKind::Exists(v, g) => {
                for i in 0..self.structure.domain_size(v.sort) {
                    env.push((v.name.clone(), i));
                    let holds = self.eval(g, env)?;
                    env.pop();
                    if holds {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }
}

pub(super) fn evaluate(formula: &Formula, structure: &FiniteStructure) -> Result<bool, EvalError> {
    let mut evaluator = Evaluator { structure, rel_memo: HashMap::new() };
    let mut env = Env::new();
    evaluator.eval(formula, &mut env)
}
