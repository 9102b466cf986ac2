//! Grounding: closed first-order formulas to propositional formulas over a
//! variable table, and the variable-substitution shorthands the synthesis
//! loop uses.
//!
//! Quantifiers expand to finite conjunctions and disjunctions, atoms map to
//! table variables, equality between constants folds to a truth constant.
//! Relation expressions ground through per-expression tables of formulas:
//! union pointwise, composition through a finite middle-element disjunction,
//! transitive closure by iterative squaring. The grounded result is a
//! structural DAG; no fresh variables are introduced here (Tseitin handles
//! sharing at CNF time).

use crate::bounds::VarTable;
use crate::fol::{Formula, FormulaKind, RelExpr, RelExprKind, Sort, Term, Var};
use crate::prop::{Instance, PropFormula, VarId};
use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TranslateError {
    #[error("free variable {0}")]
    FreeVariable(String),
    #[error("unknown relation {0}")]
    UnknownSymbol(String),
    #[error("constant {0} exceeds the scope")]
    ConstantOutOfScope(String),
    #[error("equality between different sorts")]
    EqSortMismatch,
    #[error("missing assignment for variable {0} during restriction")]
    MissingAssignment(VarId),
}

/// n-by-n table of grounded pair formulas for one relation expression.
type RelTable = Rc<Vec<Vec<PropFormula>>>;

struct Grounder<'a> {
    table: &'a VarTable,
    rel_cache: HashMap<*const RelExprKind, RelTable>,
}

type Env = Vec<(String, usize)>;

impl<'a> Grounder<'a> {
    fn resolve(&self, term: &Term, env: &Env) -> Result<usize, TranslateError> {
        match term {
            Term::Const { index, sort } => {
                if *index >= self.table.scope().domain_size(*sort) {
                    Err(TranslateError::ConstantOutOfScope(sort.element_name(*index)))
                } else {
                    Ok(*index)
                }
            }
            Term::Var(Var { name, .. }) => env
                .iter()
                .rev()
                .find(|(n, _)| n == name)
                .map(|(_, i)| *i)
                .ok_or_else(|| TranslateError::FreeVariable(name.clone())),
        }
    }

    fn ground(&mut self, f: &Formula, env: &mut Env) -> Result<PropFormula, TranslateError> {
        match f.kind() {
            FormulaKind::Atom(sym, args) => {
                let tuple: Vec<usize> =
                    args.iter().map(|t| self.resolve(t, env)).collect::<Result<_, _>>()?;
                let var = self
                    .table
                    .var(&sym.name, &tuple)
                    .map_err(|_| TranslateError::UnknownSymbol(sym.name.clone()))?;
                Ok(PropFormula::var(var))
            }
            FormulaKind::RelAtom(expr, a, b) => {
                let i = self.resolve(a, env)?;
                let j = self.resolve(b, env)?;
                let table = self.rel_table(expr)?;
                Ok(table[i][j].clone())
            }
            FormulaKind::Eq(a, b) => {
                if a.sort() != b.sort() {
                    return Err(TranslateError::EqSortMismatch);
                }
                Ok(PropFormula::truth(self.resolve(a, env)? == self.resolve(b, env)?))
            }
            FormulaKind::Not(g) => Ok(self.ground(g, env)?.not()),
            FormulaKind::And(a, b) => {
                let left = self.ground(a, env)?;
                if left.is_false() {
                    return Ok(left);
                }
                Ok(left.and(self.ground(b, env)?))
            }
            FormulaKind::Or(a, b) => {
                let left = self.ground(a, env)?;
                if left.is_true() {
                    return Ok(left);
                }
                Ok(left.or(self.ground(b, env)?))
            }
            FormulaKind::Implies(a, b) => {
                let left = self.ground(a, env)?;
                if left.is_false() {
                    return Ok(PropFormula::truth(true));
                }
                Ok(left.implies(self.ground(b, env)?))
            }
            FormulaKind::Forall(v, g) => {
                let size = self.table.scope().domain_size(v.sort);
                let mut out = PropFormula::truth(true);
                for i in 0..size {
                    env.push((v.name.clone(), i));
                    let body = self.ground(g, env);
                    env.pop();
                    out = out.and(body?);
                    if out.is_false() {
                        break;
                    }
                }
                Ok(out)
            }
            FormulaKind::Exists(v, g) => {
                let size = self.table.scope().domain_size(v.sort);
                let mut out = PropFormula::truth(false);
                for i in 0..size {
                    env.push((v.name.clone(), i));
                    let body = self.ground(g, env);
                    env.pop();
                    out = out.or(body?);
                    if out.is_true() {
                        break;
                    }
                }
                Ok(out)
            }
        }
    }

    /// Grounds a relation expression into its pair table, cached per
    /// expression node so repeated atom instantiations share structure.
    fn rel_table(&mut self, expr: &RelExpr) -> Result<RelTable, TranslateError> {
        let key = Rc::as_ptr(&expr.0);
        if let Some(hit) = self.rel_cache.get(&key) {
            return Ok(hit.clone());
        }
        let n = self.table.scope().domain_size(Sort::Txn);
        let result: Vec<Vec<PropFormula>> = match expr.kind() {
            RelExprKind::Symbol(sym) => {
                let mut rows = Vec::with_capacity(n);
                for i in 0..n {
                    let mut row = Vec::with_capacity(n);
                    for j in 0..n {
                        let var = self
                            .table
                            .var(&sym.name, &[i, j])
                            .map_err(|_| TranslateError::UnknownSymbol(sym.name.clone()))?;
                        row.push(PropFormula::var(var));
                    }
                    rows.push(row);
                }
                rows
            }
            RelExprKind::WriteRead => {
                // wr(a, b) = exists x, v. writes(a, x, v) & reads(b, x, v)
                let objs = self.table.scope().domain_size(Sort::Obj);
                let vals = self.table.scope().domain_size(Sort::Val);
                let mut rows = Vec::with_capacity(n);
                for a in 0..n {
                    let mut row = Vec::with_capacity(n);
                    for b in 0..n {
                        let mut disjuncts = Vec::new();
                        for x in 0..objs {
                            for v in 0..vals {
                                let w = self
                                    .table
                                    .var("writes", &[a, x, v])
                                    .map_err(|_| TranslateError::UnknownSymbol("writes".into()))?;
                                let r = self
                                    .table
                                    .var("reads", &[b, x, v])
                                    .map_err(|_| TranslateError::UnknownSymbol("reads".into()))?;
                                disjuncts.push(PropFormula::var(w).and(PropFormula::var(r)));
                            }
                        }
                        row.push(PropFormula::or_all(disjuncts));
                    }
                    rows.push(row);
                }
                rows
            }
            RelExprKind::Union(a, b) => {
                let ta = self.rel_table(a)?;
                let tb = self.rel_table(b)?;
                (0..n)
                    .map(|i| (0..n).map(|j| ta[i][j].clone().or(tb[i][j].clone())).collect())
                    .collect()
            }
            RelExprKind::Compose(a, b) => {
                let ta = self.rel_table(a)?;
                let tb = self.rel_table(b)?;
                compose_tables(&ta, &tb, n)
            }
            RelExprKind::Closure(a) => {
                // Iterative squaring: after k rounds paths of length up to
                // 2^k are covered, so ceil(log2 n) rounds suffice.
                let mut current: Vec<Vec<PropFormula>> = self.rel_table(a)?.as_ref().clone();
                let rounds = usize::BITS - (n.max(1) - 1).leading_zeros();
                for _ in 0..rounds {
                    let squared = compose_tables(&current, &current, n);
                    current = (0..n)
                        .map(|i| {
                            (0..n)
                                .map(|j| current[i][j].clone().or(squared[i][j].clone()))
                                .collect()
                        })
                        .collect();
                }
                current
            }
        };
        let result = Rc::new(result);
        self.rel_cache.insert(key, result.clone());
        Ok(result)
    }
}

fn compose_tables(
    a: &[Vec<PropFormula>],
    b: &[Vec<PropFormula>],
    n: usize,
) -> Vec<Vec<PropFormula>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    PropFormula::or_all(
                        (0..n).map(|m| a[i][m].clone().and(b[m][j].clone())),
                    )
                })
                .collect()
        })
        .collect()
}

/// Grounds a closed, well-formed formula over the table's signature.
pub fn translate(table: &VarTable, formula: &Formula) -> Result<PropFormula, TranslateError> {
    let mut grounder = Grounder { table, rel_cache: HashMap::new() };
    let mut env = Env::new();
    grounder.ground(formula, &mut env)
}

/// Substitutes the variables of the named symbols by their values from
/// `instance`, then folds constants. Variables of other symbols stay free.
///
/// `restrict(f, {co}, I)` realizes the `C[co -> co_I]` shorthand;
/// `restrict(f, {writes, reads, so}, I)` realizes `C[H -> H_I]`.
pub fn restrict(
    f: &PropFormula,
    table: &VarTable,
    symbols: &[&str],
    instance: &Instance,
) -> Result<PropFormula, TranslateError> {
    let mut values: BTreeMap<VarId, bool> = BTreeMap::new();
    for name in symbols {
        let vars = table
            .vars_of(name)
            .map_err(|_| TranslateError::UnknownSymbol(name.to_string()))?;
        for (_, var) in vars {
            let value = instance.get(var).ok_or(TranslateError::MissingAssignment(var))?;
            values.insert(var, value);
        }
    }
    Ok(f.assign(&values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{base_plus, encode, Scope};
    use crate::fol::{so_symbol, writes_symbol, RelationSymbol};
    use std::rc::Rc as StdRc;

    fn co() -> StdRc<RelationSymbol> {
        RelationSymbol::new("co", vec![Sort::Txn, Sort::Txn])
    }

    fn table(txn: usize, obj: usize, val: usize) -> VarTable {
        encode(Scope::new(txn, obj, val).unwrap(), &base_plus(&[co()]))
    }

    #[test]
    fn forall_expands_to_conjunction() {
        // forall t:Txn. !so(t,t) at txn=2 -> !so(t0,t0) & !so(t1,t1)
        let t = Var::new("t", Sort::Txn);
        let f = Formula::forall(
            t.clone(),
            Formula::atom(so_symbol(), vec![Term::Var(t.clone()), Term::Var(t)]).not(),
        );
        let tbl = table(2, 1, 2);
        let g = translate(&tbl, &f).unwrap();
        let v00 = tbl.var("so", &[0, 0]).unwrap();
        let v11 = tbl.var("so", &[1, 1]).unwrap();
        let expected =
            PropFormula::var(v00).not().and(PropFormula::var(v11).not());
        assert_eq!(g, expected);
    }

    #[test]
    fn exists_expands_to_disjunction() {
        // exists x:Obj. writes(t0, x, n0) at obj=2
        let x = Var::new("x", Sort::Obj);
        let f = Formula::exists(
            x.clone(),
            Formula::atom(
                writes_symbol(),
                vec![Term::constant(0, Sort::Txn), Term::Var(x), Term::constant(0, Sort::Val)],
            ),
        );
        let tbl = table(1, 2, 1);
        let g = translate(&tbl, &f).unwrap();
        let w0 = tbl.var("writes", &[0, 0, 0]).unwrap();
        let w1 = tbl.var("writes", &[0, 1, 0]).unwrap();
        assert_eq!(g, PropFormula::var(w0).or(PropFormula::var(w1)));
    }

    #[test]
    fn constant_equality_folds() {
        let tbl = table(2, 1, 1);
        let same = Formula::eq(Term::constant(0, Sort::Txn), Term::constant(0, Sort::Txn));
        assert!(translate(&tbl, &same).unwrap().is_true());
        let diff = Formula::eq(Term::constant(0, Sort::Txn), Term::constant(1, Sort::Txn));
        assert!(translate(&tbl, &diff).unwrap().is_false());
    }

    #[test]
    fn free_variable_rejected() {
        let tbl = table(1, 1, 1);
        let f = Formula::atom(
            so_symbol(),
            vec![Term::var("t", Sort::Txn), Term::constant(0, Sort::Txn)],
        );
        assert!(matches!(translate(&tbl, &f), Err(TranslateError::FreeVariable(_))));
    }

    #[test]
    fn unknown_symbol_rejected() {
        let tbl = encode(Scope::new(1, 1, 1).unwrap(), &base_plus(&[]));
        let f = Formula::atom(
            co(),
            vec![Term::constant(0, Sort::Txn), Term::constant(0, Sort::Txn)],
        );
        assert!(matches!(translate(&tbl, &f), Err(TranslateError::UnknownSymbol(_))));
    }

    #[test]
    fn restrict_folds_constants() {
        let tbl = table(2, 1, 2);
        let co01 = tbl.var("co", &[0, 1]).unwrap();
        let w = tbl.var("writes", &[0, 0, 0]).unwrap();

        // co(t0,t1) | writes(t0,x0,n0) with co(t0,t1)=true -> T
        let f = PropFormula::var(co01).or(PropFormula::var(w));
        let mut inst = Instance::default();
        for (_, v) in tbl.vars_of("co").unwrap() {
            inst.set(v, false);
        }
        inst.set(co01, true);
        let g = restrict(&f, &tbl, &["co"], &inst).unwrap();
        assert!(g.is_true());

        // co(t0,t1) & writes(...) with co(t0,t1)=false -> F
        let f = PropFormula::var(co01).and(PropFormula::var(w));
        let mut inst = Instance::default();
        for (_, v) in tbl.vars_of("co").unwrap() {
            inst.set(v, false);
        }
        let g = restrict(&f, &tbl, &["co"], &inst).unwrap();
        assert!(g.is_false());

        // so(t0,t1) => co(t0,t1) with so(t0,t1)=true -> co(t0,t1)
        let so01 = tbl.var("so", &[0, 1]).unwrap();
        let f = PropFormula::var(so01).implies(PropFormula::var(co01));
        let mut inst = Instance::default();
        for name in ["writes", "reads", "so"] {
            for (_, v) in tbl.vars_of(name).unwrap() {
                inst.set(v, false);
            }
        }
        inst.set(so01, true);
        let g = restrict(&f, &tbl, &["writes", "reads", "so"], &inst).unwrap();
        assert_eq!(g, PropFormula::var(co01));
    }

    #[test]
    fn restrict_missing_assignment_rejected() {
        let tbl = table(1, 1, 1);
        let f = PropFormula::var(tbl.var("co", &[0, 0]).unwrap());
        let err = restrict(&f, &tbl, &["co"], &Instance::default()).unwrap_err();
        assert!(matches!(err, TranslateError::MissingAssignment(_)));
    }

    /// Builds the instance whose bit pattern is `bits` over all table vars.
    fn instance_from_bits(tbl: &VarTable, bits: u64) -> Instance {
        (1..=tbl.var_count()).map(|v| (v, bits & (1 << (v - 1)) != 0)).collect()
    }

    #[test]
    fn closure_grounding_matches_fixpoint_exhaustively() {
        // At txn <= 4, every so-assignment: grounded so+ agrees with the
        // semantic closure from rel_evaluate.
        for txn in 1..=4usize {
            let tbl = encode(Scope::new(txn, 1, 1).unwrap(), &base_plus(&[]));
            let so_plus = crate::fol::RelExpr::symbol(so_symbol()).closure();
            let so_vars: Vec<_> = tbl.vars_of("so").unwrap();
            // grounded atoms are instance-independent; translate them once
            let grounded: Vec<Vec<PropFormula>> = (0..txn)
                .map(|i| {
                    (0..txn)
                        .map(|j| {
                            let f = Formula::rel_atom(
                                so_plus.clone(),
                                Term::constant(i, Sort::Txn),
                                Term::constant(j, Sort::Txn),
                            );
                            translate(&tbl, &f).unwrap()
                        })
                        .collect()
                })
                .collect();
            for bits in 0u64..(1 << so_vars.len()) {
                let mut inst = Instance::default();
                for name in ["writes", "reads"] {
                    for (_, v) in tbl.vars_of(name).unwrap() {
                        inst.set(v, false);
                    }
                }
                for (k, (_, v)) in so_vars.iter().enumerate() {
                    inst.set(*v, bits & (1 << k) != 0);
                }
                let structure = crate::bounds::decode_structure(&tbl, &inst).unwrap();
                let semantic = crate::fol::rel_evaluate(&so_plus, &structure).unwrap();
                for i in 0..txn {
                    for j in 0..txn {
                        let truth = grounded[i][j].eval(&inst).unwrap_or(false);
                        assert_eq!(
                            truth,
                            semantic.contains(&(i, j)),
                            "txn={} bits={:b} pair=({},{})",
                            txn,
                            bits,
                            i,
                            j
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn restrict_commutes_with_evaluation() {
        // evaluating restrict(f, syms, i) under j equals evaluating f under
        // (i on syms, j elsewhere)
        let tbl = table(2, 1, 2);
        let co_vars: Vec<VarId> = tbl.vars_of("co").unwrap().into_iter().map(|(_, v)| v).collect();
        let all_vars: Vec<VarId> = (1..=tbl.var_count()).collect();

        let mut state = 0x9E3779B97F4A7C15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };

        for _ in 0..200 {
            // random small formula over the table vars
            let mut f = PropFormula::truth(next() % 2 == 0);
            for _ in 0..(next() % 6 + 1) {
                let v = PropFormula::var(all_vars[(next() % all_vars.len() as u64) as usize]);
                f = match next() % 4 {
                    0 => f.and(v),
                    1 => f.or(v),
                    2 => f.implies(v),
                    _ => f.or(v.not()),
                };
            }
            let i: Instance = all_vars.iter().map(|&v| (v, next() % 2 == 0)).collect();
            let j: Instance = all_vars.iter().map(|&v| (v, next() % 2 == 0)).collect();

            let restricted = restrict(&f, &tbl, &["co"], &i).unwrap();
            let lhs = restricted.eval(&j).unwrap_or_else(|_| {
                // restricted formula may mention no vars at all
                restricted.is_true()
            });

            let mut merged = j.clone();
            for &v in &co_vars {
                merged.set(v, i.get(v).unwrap());
            }
            let rhs = f.eval(&merged).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn union_and_compose_ground_correctly_on_samples() {
        let tbl = table(3, 2, 2);
        let so = crate::fol::RelExpr::symbol(so_symbol());
        let wr = crate::fol::RelExpr::write_read();
        let exprs = vec![
            so.clone().union(wr.clone()),
            so.clone().compose(wr.clone()),
            so.clone().union(wr.clone()).closure(),
            crate::fol::RelExpr::symbol(co()).compose(so.clone().union(wr).closure()),
        ];
        let mut state = 0xDEADBEEFu64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..60 {
            let inst = instance_from_bits(&tbl, next());
            let structure = crate::bounds::decode_structure(&tbl, &inst).unwrap();
            for expr in &exprs {
                let semantic = crate::fol::rel_evaluate(expr, &structure).unwrap();
                for i in 0..3 {
                    for j in 0..3 {
                        let f = Formula::rel_atom(
                            expr.clone(),
                            Term::constant(i, Sort::Txn),
                            Term::constant(j, Sort::Txn),
                        );
                        let truth = translate(&tbl, &f).unwrap().eval(&inst).unwrap_or(false);
                        assert_eq!(truth, semantic.contains(&(i, j)), "expr={}", expr);
                    }
                }
            }
        }
    }
}
