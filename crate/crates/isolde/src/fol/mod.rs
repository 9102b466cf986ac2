//! Sorted first-order constraint language for isolation-level specifications.
//!
//! Formulas range over three disjoint sorts (`Txn`, `Obj`, `Val`) and a
//! signature of relation symbols. Besides plain relation atoms the language
//! has equality atoms and a small sublanguage of binary relation expressions
//! (union, composition, transitive closure, and the derived read-from
//! relation `wr`), which the built-in level axioms need.

mod eval;

pub use eval::{rel_evaluate, EvalError, FiniteStructure};

use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

/// The three base sorts. Values of different sorts never compare equal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sort {
    Txn,
    Obj,
    Val,
}

impl Sort {
    pub const ALL: [Sort; 3] = [Sort::Txn, Sort::Obj, Sort::Val];

    /// Conventional prefix for domain element names: `t0`, `x0`, `n0`.
    pub fn prefix(self) -> &'static str {
        match self {
            Sort::Txn => "t",
            Sort::Obj => "x",
            Sort::Val => "n",
        }
    }

    /// Renders domain element `index` in the conventional naming scheme.
    pub fn element_name(self, index: usize) -> String {
        format!("{}{}", self.prefix(), index)
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Txn => write!(f, "Txn"),
            Sort::Obj => write!(f, "Obj"),
            Sort::Val => write!(f, "Val"),
        }
    }
}

/// A sorted variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Var {
    pub name: String,
    pub sort: Sort,
}

impl Var {
    pub fn new(name: impl Into<String>, sort: Sort) -> Self {
        Var { name: name.into(), sort }
    }
}

/// A term: either a variable or a constant (an index into the finite domain
/// of its sort, resolved against a scope at grounding time).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Var),
    Const { index: usize, sort: Sort },
}

impl Term {
    pub fn var(name: impl Into<String>, sort: Sort) -> Self {
        Term::Var(Var::new(name, sort))
    }

    pub fn constant(index: usize, sort: Sort) -> Self {
        Term::Const { index, sort }
    }

    pub fn sort(&self) -> Sort {
        match self {
            Term::Var(v) => v.sort,
            Term::Const { sort, .. } => *sort,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{}", v.name),
            Term::Const { index, sort } => write!(f, "{}", sort.element_name(*index)),
        }
    }
}

/// A relation symbol: a name plus an ordered argument signature.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RelationSymbol {
    pub name: String,
    pub signature: Vec<Sort>,
}

impl RelationSymbol {
    pub fn new(name: impl Into<String>, signature: Vec<Sort>) -> Rc<Self> {
        Rc::new(RelationSymbol { name: name.into(), signature })
    }

    pub fn arity(&self) -> usize {
        self.signature.len()
    }

    /// True for symbols of signature `(Txn, Txn)`.
    pub fn is_txn_binary(&self) -> bool {
        self.signature == [Sort::Txn, Sort::Txn]
    }
}

/// The `writes(Txn, Obj, Val)` base symbol.
pub fn writes_symbol() -> Rc<RelationSymbol> {
    RelationSymbol::new("writes", vec![Sort::Txn, Sort::Obj, Sort::Val])
}

/// The `reads(Txn, Obj, Val)` base symbol.
pub fn reads_symbol() -> Rc<RelationSymbol> {
    RelationSymbol::new("reads", vec![Sort::Txn, Sort::Obj, Sort::Val])
}

/// The `so(Txn, Txn)` base symbol.
pub fn so_symbol() -> Rc<RelationSymbol> {
    RelationSymbol::new("so", vec![Sort::Txn, Sort::Txn])
}

/// The base signature shared by every history: writes, reads, so.
pub fn base_signature() -> Vec<Rc<RelationSymbol>> {
    vec![writes_symbol(), reads_symbol(), so_symbol()]
}

/// Binary relation expressions over `Txn x Txn`.
///
/// `WriteRead` is the derived read-from relation: `wr(a, b)` holds when `b`
/// reads some value that `a` wrote. It is well defined on well-formed
/// histories because each `(obj, val)` pair has a unique writer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelExpr(pub Rc<RelExprKind>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RelExprKind {
    Symbol(Rc<RelationSymbol>),
    WriteRead,
    Union(RelExpr, RelExpr),
    Compose(RelExpr, RelExpr),
    Closure(RelExpr),
}

impl RelExpr {
    pub fn symbol(sym: Rc<RelationSymbol>) -> Self {
        RelExpr(Rc::new(RelExprKind::Symbol(sym)))
    }

    pub fn write_read() -> Self {
        RelExpr(Rc::new(RelExprKind::WriteRead))
    }

    pub fn union(self, other: RelExpr) -> Self {
        RelExpr(Rc::new(RelExprKind::Union(self, other)))
    }

    pub fn compose(self, other: RelExpr) -> Self {
        RelExpr(Rc::new(RelExprKind::Compose(self, other)))
    }

    pub fn closure(self) -> Self {
        RelExpr(Rc::new(RelExprKind::Closure(self)))
    }

    pub fn kind(&self) -> &RelExprKind {
        &self.0
    }

    fn for_each_symbol(&self, f: &mut impl FnMut(&Rc<RelationSymbol>)) {
        match self.kind() {
            RelExprKind::Symbol(s) => f(s),
            RelExprKind::WriteRead => {}
            RelExprKind::Union(a, b) | RelExprKind::Compose(a, b) => {
                a.for_each_symbol(f);
                b.for_each_symbol(f);
            }
            RelExprKind::Closure(a) => a.for_each_symbol(f),
        }
    }
}

impl fmt::Display for RelExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            RelExprKind::Symbol(s) => write!(f, "{}", s.name),
            RelExprKind::WriteRead => write!(f, "wr"),
            RelExprKind::Union(a, b) => write!(f, "({} | {})", a, b),
            RelExprKind::Compose(a, b) => write!(f, "({} ; {})", a, b),
            RelExprKind::Closure(a) => write!(f, "{}+", a),
        }
    }
}

/// A first-order formula. Shared subtrees are cheap to clone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formula(pub Rc<FormulaKind>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FormulaKind {
    /// `R(t1, ..., tn)` for a signature symbol.
    Atom(Rc<RelationSymbol>, Vec<Term>),
    /// `E(t1, t2)` for a binary relation expression.
    RelAtom(RelExpr, Term, Term),
    /// `t1 = t2`, both terms of the same sort.
    Eq(Term, Term),
    Not(Formula),
    And(Formula, Formula),
    Or(Formula, Formula),
    Implies(Formula, Formula),
    Forall(Var, Formula),
    Exists(Var, Formula),
}

impl Formula {
    pub fn kind(&self) -> &FormulaKind {
        &self.0
    }

    pub fn atom(sym: Rc<RelationSymbol>, args: Vec<Term>) -> Self {
        Formula(Rc::new(FormulaKind::Atom(sym, args)))
    }

    pub fn rel_atom(expr: RelExpr, a: Term, b: Term) -> Self {
        Formula(Rc::new(FormulaKind::RelAtom(expr, a, b)))
    }

    pub fn eq(a: Term, b: Term) -> Self {
        Formula(Rc::new(FormulaKind::Eq(a, b)))
    }

    pub fn neq(a: Term, b: Term) -> Self {
        Formula::eq(a, b).not()
    }

    pub fn not(self) -> Self {
        Formula(Rc::new(FormulaKind::Not(self)))
    }

    pub fn and(self, other: Formula) -> Self {
        Formula(Rc::new(FormulaKind::And(self, other)))
    }

    pub fn or(self, other: Formula) -> Self {
        Formula(Rc::new(FormulaKind::Or(self, other)))
    }

    pub fn implies(self, other: Formula) -> Self {
        Formula(Rc::new(FormulaKind::Implies(self, other)))
    }

    pub fn forall(var: Var, body: Formula) -> Self {
        Formula(Rc::new(FormulaKind::Forall(var, body)))
    }

    pub fn exists(var: Var, body: Formula) -> Self {
        Formula(Rc::new(FormulaKind::Exists(var, body)))
    }

    /// Left-associated conjunction of a non-empty list.
    pub fn and_all(parts: impl IntoIterator<Item = Formula>) -> Self {
        let mut iter = parts.into_iter();
        let first = iter.next().expect("and_all needs at least one conjunct");
        iter.fold(first, Formula::and)
    }

    /// Left-associated disjunction of a non-empty list.
    pub fn or_all(parts: impl IntoIterator<Item = Formula>) -> Self {
        let mut iter = parts.into_iter();
        let first = iter.next().expect("or_all needs at least one disjunct");
        iter.fold(first, Formula::or)
    }

    /// `forall v1:S1. forall v2:S2. ... body`
    pub fn forall_many(vars: impl IntoIterator<Item = Var>, body: Formula) -> Self {
        let vars: Vec<_> = vars.into_iter().collect();
        vars.into_iter().rev().fold(body, |acc, v| Formula::forall(v, acc))
    }

    /// `exists v1:S1. ... body`
    pub fn exists_many(vars: impl IntoIterator<Item = Var>, body: Formula) -> Self {
        let vars: Vec<_> = vars.into_iter().collect();
        vars.into_iter().rev().fold(body, |acc, v| Formula::exists(v, acc))
    }

    /// Names of free variables, in first-occurrence order.
    pub fn free_vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        collect_free(self, &mut bound, &mut out);
        out
    }

    /// True when the formula has no free variables.
    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// True when no constant terms occur anywhere in the formula.
    pub fn is_constant_free(&self) -> bool {
        fn term_ok(t: &Term) -> bool {
            matches!(t, Term::Var(_))
        }
        fn walk(f: &Formula) -> bool {
            match f.kind() {
                FormulaKind::Atom(_, args) => args.iter().all(term_ok),
                FormulaKind::RelAtom(_, a, b) => term_ok(a) && term_ok(b),
                FormulaKind::Eq(a, b) => term_ok(a) && term_ok(b),
                FormulaKind::Not(g) => walk(g),
                FormulaKind::And(a, b) | FormulaKind::Or(a, b) | FormulaKind::Implies(a, b) => {
                    walk(a) && walk(b)
                }
                FormulaKind::Forall(_, g) | FormulaKind::Exists(_, g) => walk(g),
            }
        }
        walk(self)
    }

    /// Every relation symbol mentioned, including inside relation expressions.
    pub fn symbols(&self) -> Vec<Rc<RelationSymbol>> {
        let mut out: Vec<Rc<RelationSymbol>> = Vec::new();
        let mut push = |s: &Rc<RelationSymbol>| {
            if !out.iter().any(|o| o.name == s.name) {
                out.push(s.clone());
            }
        };
        fn walk(f: &Formula, push: &mut impl FnMut(&Rc<RelationSymbol>)) {
            match f.kind() {
                FormulaKind::Atom(sym, _) => push(sym),
                FormulaKind::RelAtom(expr, _, _) => expr.for_each_symbol(push),
                FormulaKind::Eq(_, _) => {}
                FormulaKind::Not(g) => walk(g, push),
                FormulaKind::And(a, b) | FormulaKind::Or(a, b) | FormulaKind::Implies(a, b) => {
                    walk(a, push);
                    walk(b, push);
                }
                FormulaKind::Forall(_, g) | FormulaKind::Exists(_, g) => walk(g, push),
            }
        }
        walk(self, &mut push);
        out
    }
}

fn collect_free(f: &Formula, bound: &mut Vec<String>, out: &mut Vec<Var>) {
    let term = |t: &Term, bound: &Vec<String>, out: &mut Vec<Var>| {
        if let Term::Var(v) = t {
            if !bound.contains(&v.name) && !out.iter().any(|o| o.name == v.name) {
                out.push(v.clone());
            }
        }
    };
    match f.kind() {
        FormulaKind::Atom(_, args) => {
            for a in args {
                term(a, bound, out);
            }
        }
        FormulaKind::RelAtom(_, a, b) => {
            term(a, bound, out);
            term(b, bound, out);
        }
        FormulaKind::Eq(a, b) => {
            term(a, bound, out);
            term(b, bound, out);
        }
        FormulaKind::Not(g) => collect_free(g, bound, out),
        FormulaKind::And(a, b) | FormulaKind::Or(a, b) | FormulaKind::Implies(a, b) => {
            collect_free(a, bound, out);
            collect_free(b, bound, out);
        }
        FormulaKind::Forall(v, g) | FormulaKind::Exists(v, g) => {
            bound.push(v.name.clone());
            collect_free(g, bound, out);
            bound.pop();
        }
    }
}

/// A well-formedness finding: what is wrong and where.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub message: String,
}

impl Diagnostic {
    fn new(message: impl Into<String>) -> Self {
        Diagnostic { message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

/// Checks that a formula is sort-correct, arity-correct, closed, free of
/// variable shadowing, and uses only symbols from `signature`.
///
/// Returns all findings rather than stopping at the first.
pub fn check_well_formed(
    formula: &Formula,
    signature: &[Rc<RelationSymbol>],
) -> Result<(), Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let mut scope: Vec<Var> = Vec::new();
    check_inner(formula, signature, &mut scope, &mut diags);
    if diags.is_empty() {
        Ok(())
    } else {
        Err(diags)
    }
}

fn lookup<'a>(signature: &'a [Rc<RelationSymbol>], name: &str) -> Option<&'a Rc<RelationSymbol>> {
    signature.iter().find(|s| s.name == name)
}

fn check_term(t: &Term, expected: Sort, context: &str, scope: &[Var], diags: &mut Vec<Diagnostic>) {
    match t {
        Term::Var(v) => {
            match scope.iter().rev().find(|s| s.name == v.name) {
                None => diags.push(Diagnostic::new(format!("unbound variable {} in {}", v.name, context))),
                Some(s) if s.sort != v.sort => diags.push(Diagnostic::new(format!(
                    "variable {} used at sort {} but bound at sort {} in {}",
                    v.name, v.sort, s.sort, context
                ))),
                _ => {}
            }
            if v.sort != expected {
                diags.push(Diagnostic::new(format!(
                    "sort mismatch in {}: expected {}, found {} of sort {}",
                    context, expected, v.name, v.sort
                )));
            }
        }
        Term::Const { index, sort } => {
            if *sort != expected {
                diags.push(Diagnostic::new(format!(
                    "sort mismatch in {}: expected {}, found constant {} of sort {}",
                    context,
                    expected,
                    sort.element_name(*index),
                    sort
                )));
            }
        }
    }
}

fn check_rel_expr(expr: &RelExpr, signature: &[Rc<RelationSymbol>], diags: &mut Vec<Diagnostic>) {
    match expr.kind() {
        RelExprKind::Symbol(sym) => match lookup(signature, &sym.name) {
            None => diags.push(Diagnostic::new(format!("unknown relation {}", sym.name))),
            Some(found) => {
                if found.signature != sym.signature {
                    diags.push(Diagnostic::new(format!(
                        "signature mismatch for relation {}",
                        sym.name
                    )));
                } else if !sym.is_txn_binary() {
                    diags.push(Diagnostic::new(format!(
                        "relation {} is not a binary transaction relation",
                        sym.name
                    )));
                }
            }
        },
        RelExprKind::WriteRead => {
            for name in ["writes", "reads"] {
                if lookup(signature, name).is_none() {
                    diags.push(Diagnostic::new(format!(
                        "derived relation wr needs {} in the signature",
                        name
                    )));
                }
            }
        }
        RelExprKind::Union(a, b) | RelExprKind::Compose(a, b) => {
            check_rel_expr(a, signature, diags);
            check_rel_expr(b, signature, diags);
        }
        RelExprKind::Closure(a) => check_rel_expr(a, signature, diags),
    }
}

fn check_inner(
    f: &Formula,
    signature: &[Rc<RelationSymbol>],
    scope: &mut Vec<Var>,
    diags: &mut Vec<Diagnostic>,
) {
    match f.kind() {
        FormulaKind::Atom(sym, args) => match lookup(signature, &sym.name) {
            None => diags.push(Diagnostic::new(format!("unknown relation {}", sym.name))),
            Some(found) => {
                if found.signature != sym.signature {
                    diags.push(Diagnostic::new(format!(
                        "signature mismatch for relation {}",
                        sym.name
                    )));
                }
                if args.len() != found.arity() {
                    diags.push(Diagnostic::new(format!(
                        "arity mismatch: {} expects {} arguments, got {}",
                        sym.name,
                        found.arity(),
                        args.len()
                    )));
                } else {
                    for (i, (arg, sort)) in args.iter().zip(&found.signature).enumerate() {
                        check_term(
                            arg,
                            *sort,
                            &format!("argument {} of {}", i + 1, sym.name),
                            scope,
                            diags,
                        );
                    }
                }
            }
        },
        FormulaKind::RelAtom(expr, a, b) => {
            check_rel_expr(expr, signature, diags);
            check_term(a, Sort::Txn, "relation expression argument 1", scope, diags);
            check_term(b, Sort::Txn, "relation expression argument 2", scope, diags);
        }
        FormulaKind::Eq(a, b) => {
            if a.sort() != b.sort() {
                diags.push(Diagnostic::new(format!(
                    "equality between different sorts {} and {}",
                    a.sort(),
                    b.sort()
                )));
            } else {
                check_term(a, a.sort(), "equality", scope, diags);
                check_term(b, b.sort(), "equality", scope, diags);
            }
        }
        FormulaKind::Not(g) => check_inner(g, signature, scope, diags),
        FormulaKind::And(a, b) | FormulaKind::Or(a, b) | FormulaKind::Implies(a, b) => {
            check_inner(a, signature, scope, diags);
            check_inner(b, signature, scope, diags);
        }
        FormulaKind::Forall(v, g) | FormulaKind::Exists(v, g) => {
            if scope.iter().any(|s| s.name == v.name) {
                diags.push(Diagnostic::new(format!("variable {} shadows an outer binding", v.name)));
            }
            scope.push(v.clone());
            check_inner(g, signature, scope, diags);
            scope.pop();
        }
    }
}

/// Error returned when a substitution's constant does not match the
/// variable's sort.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot substitute {const_sort} constant for variable {var} of sort {var_sort}")]
pub struct SortMismatch {
    pub var: String,
    pub var_sort: Sort,
    pub const_sort: Sort,
}

/// Replaces every free occurrence of `var` with the constant `index`.
///
/// Bound occurrences are untouched. Capture cannot happen because constants
/// are not variables.
pub fn substitute(formula: &Formula, var: &Var, index: usize) -> Result<Formula, SortMismatch> {
    substitute_term(formula, var, &Term::constant(index, var.sort), var.sort)
}

fn substitute_term(
    formula: &Formula,
    var: &Var,
    replacement: &Term,
    replacement_sort: Sort,
) -> Result<Formula, SortMismatch> {
    if replacement_sort != var.sort {
        return Err(SortMismatch {
            var: var.name.clone(),
            var_sort: var.sort,
            const_sort: replacement_sort,
        });
    }
    Ok(subst_inner(formula, &var.name, replacement))
}

/// Substitutes a term for every free occurrence of a variable, without sort
/// checking. Callers must rule out capture themselves (the DSL expander
/// freshens binders first).
pub(crate) fn substitute_unchecked(formula: &Formula, var: &Var, replacement: &Term) -> Formula {
    subst_inner(formula, &var.name, replacement)
}

fn subst_term(t: &Term, name: &str, replacement: &Term) -> Term {
    match t {
        Term::Var(v) if v.name == name => replacement.clone(),
        other => other.clone(),
    }
}

fn subst_inner(f: &Formula, name: &str, replacement: &Term) -> Formula {
    match f.kind() {
        FormulaKind::Atom(sym, args) => Formula::atom(
            sym.clone(),
            args.iter().map(|a| subst_term(a, name, replacement)).collect(),
        ),
        FormulaKind::RelAtom(expr, a, b) => Formula::rel_atom(
            expr.clone(),
            subst_term(a, name, replacement),
            subst_term(b, name, replacement),
        ),
        FormulaKind::Eq(a, b) => {
            Formula::eq(subst_term(a, name, replacement), subst_term(b, name, replacement))
        }
        FormulaKind::Not(g) => subst_inner(g, name, replacement).not(),
        FormulaKind::And(a, b) => {
            subst_inner(a, name, replacement).and(subst_inner(b, name, replacement))
        }
        FormulaKind::Or(a, b) => {
            subst_inner(a, name, replacement).or(subst_inner(b, name, replacement))
        }
        FormulaKind::Implies(a, b) => {
            subst_inner(a, name, replacement).implies(subst_inner(b, name, replacement))
        }
        FormulaKind::Forall(v, g) => {
            if v.name == name {
                f.clone()
            } else {
                Formula::forall(v.clone(), subst_inner(g, name, replacement))
            }
        }
        FormulaKind::Exists(v, g) => {
            if v.name == name {
                f.clone()
            } else {
                Formula::exists(v.clone(), subst_inner(g, name, replacement))
            }
        }
    }
}

/// Rewrites relation symbols by name, used when a framework's auxiliary
/// vocabulary is duplicated under fresh names.
pub fn rename_symbols(formula: &Formula, map: &HashMap<String, Rc<RelationSymbol>>) -> Formula {
    fn rename_expr(e: &RelExpr, map: &HashMap<String, Rc<RelationSymbol>>) -> RelExpr {
        match e.kind() {
            RelExprKind::Symbol(sym) => match map.get(&sym.name) {
                Some(new_sym) => RelExpr::symbol(new_sym.clone()),
                None => e.clone(),
            },
            RelExprKind::WriteRead => e.clone(),
            RelExprKind::Union(a, b) => rename_expr(a, map).union(rename_expr(b, map)),
            RelExprKind::Compose(a, b) => rename_expr(a, map).compose(rename_expr(b, map)),
            RelExprKind::Closure(a) => rename_expr(a, map).closure(),
        }
    }
    match formula.kind() {
        FormulaKind::Atom(sym, args) => {
            let sym = map.get(&sym.name).cloned().unwrap_or_else(|| sym.clone());
            Formula::atom(sym, args.clone())
        }
        FormulaKind::RelAtom(expr, a, b) => {
            Formula::rel_atom(rename_expr(expr, map), a.clone(), b.clone())
        }
        FormulaKind::Eq(_, _) => formula.clone(),
        FormulaKind::Not(g) => rename_symbols(g, map).not(),
        FormulaKind::And(a, b) => rename_symbols(a, map).and(rename_symbols(b, map)),
        FormulaKind::Or(a, b) => rename_symbols(a, map).or(rename_symbols(b, map)),
        FormulaKind::Implies(a, b) => rename_symbols(a, map).implies(rename_symbols(b, map)),
        FormulaKind::Forall(v, g) => Formula::forall(v.clone(), rename_symbols(g, map)),
        FormulaKind::Exists(v, g) => Formula::exists(v.clone(), rename_symbols(g, map)),
    }
}

/// Evaluates a closed formula against a finite structure.
///
/// Quantifiers range over the structure's finite domains; relation
/// expression atoms are decided by [`rel_evaluate`]; equality atoms compare
/// domain indices.
pub fn evaluate(formula: &Formula, structure: &FiniteStructure) -> Result<bool, EvalError> {
    eval::evaluate(formula, structure)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(name: &str) -> Term {
        Term::var(name, Sort::Txn)
    }

    fn base() -> Vec<Rc<RelationSymbol>> {
        base_signature()
    }

    fn irreflexive_so() -> Formula {
        let v = Var::new("t", Sort::Txn);
        Formula::forall(
            v.clone(),
            Formula::atom(so_symbol(), vec![Term::Var(v)]).not(),
        )
    }

    #[test]
    fn well_sorted_closed_formula_is_ok() {
        // forall t:Txn. !so(t, t)
        let v = Var::new("t", Sort::Txn);
        let f = Formula::forall(
            v.clone(),
            Formula::atom(so_symbol(), vec![Term::Var(v.clone()), Term::Var(v)]).not(),
        );
        assert!(check_well_formed(&f, &base()).is_ok());
    }

    #[test]
    fn sort_mismatch_is_reported() {
        // so(t0, x0) with x0 of sort Obj
        let f = Formula::atom(
            so_symbol(),
            vec![Term::constant(0, Sort::Txn), Term::constant(0, Sort::Obj)],
        );
        let diags = check_well_formed(&f, &base()).unwrap_err();
        assert!(diags.iter().any(|d| d.message.contains("argument 2 of so")));
    }

    #[test]
    fn unbound_variable_is_reported() {
        // writes(t, x0, n0) with free t
        let f = Formula::atom(
            writes_symbol(),
            vec![t("t"), Term::constant(0, Sort::Obj), Term::constant(0, Sort::Val)],
        );
        let diags = check_well_formed(&f, &base()).unwrap_err();
        assert!(diags.iter().any(|d| d.message.contains("unbound variable t")));
        assert!(!f.is_closed());
    }

    #[test]
    fn arity_mismatch_is_reported() {
        let f = Formula::atom(so_symbol(), vec![Term::constant(0, Sort::Txn)]);
        let diags = check_well_formed(&f, &base()).unwrap_err();
        assert!(diags.iter().any(|d| d.message.contains("arity mismatch")));
    }

    #[test]
    fn shadowing_is_rejected() {
        let v = Var::new("t", Sort::Txn);
        let inner = Formula::forall(
            v.clone(),
            Formula::atom(so_symbol(), vec![Term::Var(v.clone()), Term::Var(v.clone())]),
        );
        let f = Formula::forall(v, inner);
        let diags = check_well_formed(&f, &base()).unwrap_err();
        assert!(diags.iter().any(|d| d.message.contains("shadows")));
    }

    #[test]
    fn substitute_replaces_free_occurrences() {
        // writes(t, x0, n0)[t -> t1]
        let f = Formula::atom(
            writes_symbol(),
            vec![t("t"), Term::constant(0, Sort::Obj), Term::constant(0, Sort::Val)],
        );
        let g = substitute(&f, &Var::new("t", Sort::Txn), 1).unwrap();
        let expected = Formula::atom(
            writes_symbol(),
            vec![
                Term::constant(1, Sort::Txn),
                Term::constant(0, Sort::Obj),
                Term::constant(0, Sort::Val),
            ],
        );
        assert_eq!(g, expected);
    }

    #[test]
    fn substitute_skips_bound_occurrences() {
        // forall t:Txn. so(t, u) with u free: only u is replaced
        let v = Var::new("t", Sort::Txn);
        let f = Formula::forall(
            v.clone(),
            Formula::atom(so_symbol(), vec![Term::Var(v.clone()), t("u")]),
        );
        let g = substitute(&f, &Var::new("u", Sort::Txn), 0).unwrap();
        let expected = Formula::forall(
            v.clone(),
            Formula::atom(so_symbol(), vec![Term::Var(v), Term::constant(0, Sort::Txn)]),
        );
        assert_eq!(g, expected);

        // forall t:Txn. so(t, t): substituting t leaves the formula unchanged
        let v = Var::new("t", Sort::Txn);
        let f = Formula::forall(
            v.clone(),
            Formula::atom(so_symbol(), vec![Term::Var(v.clone()), Term::Var(v)]),
        );
        let g = substitute(&f, &Var::new("t", Sort::Txn), 0).unwrap();
        assert_eq!(g, f);
    }

    #[test]
    fn substitute_rejects_sort_mismatch() {
        let f = irreflexive_so();
        let err = substitute_term(
            &f,
            &Var::new("t", Sort::Txn),
            &Term::constant(0, Sort::Obj),
            Sort::Obj,
        )
        .unwrap_err();
        assert_eq!(err.var_sort, Sort::Txn);
        assert_eq!(err.const_sort, Sort::Obj);
    }

    #[test]
    fn free_vars_in_order() {
        let f = Formula::atom(so_symbol(), vec![t("a"), t("b")])
            .and(Formula::atom(so_symbol(), vec![t("b"), t("a")]));
        let names: Vec<_> = f.free_vars().into_iter().map(|v| v.name).collect();
        assert_eq!(names, vec!["a", "b"]);
    }
}
