//! Frameworks, the built-in isolation-level catalog, history
//! well-formedness as a formula, and the level-specification DSL.
//!
//! An isolation level is a framework (auxiliary relations plus structural
//! axioms) together with a closed level formula. The commit-order framework
//! contributes a single strict total order `co` that must contain session
//! order and read-from; the visibility framework contributes a visibility
//! relation `vis` inside a strict total arbitration order `ar`.

mod dsl;

pub use dsl::{parse_formula, parse_level_file, ParseDiagnostic};

use crate::fol::{
    self, reads_symbol, so_symbol, writes_symbol, Formula, RelExpr, RelationSymbol, Sort, Term,
    Var,
};
use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

/// How the oracle may enumerate one auxiliary relation, and which symbols
/// the fixed-order optimization may pin. The structural axioms remain the
/// semantic definition; hints only guide enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AuxHint {
    /// The relation is a strict total order on transactions.
    StrictTotalOrder(String),
    /// The relation is constrained to be a subset of another auxiliary
    /// relation, so only subsets of that relation need enumerating.
    SubsetOf { symbol: String, superset: String },
}

/// An auxiliary vocabulary plus the structural axioms every execution in
/// this framework satisfies.
#[derive(Debug, Clone, PartialEq)]
pub struct Framework {
    pub name: String,
    pub aux: Vec<Rc<RelationSymbol>>,
    pub structural: Formula,
    pub hints: Vec<AuxHint>,
}

impl Framework {
    /// Names of auxiliary symbols that denote strict total orders.
    pub fn total_order_symbols(&self) -> Vec<&str> {
        self.hints
            .iter()
            .filter_map(|h| match h {
                AuxHint::StrictTotalOrder(s) => Some(s.as_str()),
                AuxHint::SubsetOf { .. } => None,
            })
            .collect()
    }

    pub fn aux_names(&self) -> Vec<&str> {
        self.aux.iter().map(|s| s.name.as_str()).collect()
    }

    /// A copy with every auxiliary symbol renamed `name_suffix`, used when
    /// the synthesis problem needs two independent copies of one framework.
    pub fn renamed(&self, suffix: &str) -> Framework {
        let mut map: HashMap<String, Rc<RelationSymbol>> = HashMap::new();
        let aux: Vec<Rc<RelationSymbol>> = self
            .aux
            .iter()
            .map(|sym| {
                let renamed =
                    RelationSymbol::new(format!("{}_{}", sym.name, suffix), sym.signature.clone());
                map.insert(sym.name.clone(), renamed.clone());
                renamed
            })
            .collect();
        let rename = |name: &str| format!("{}_{}", name, suffix);
        Framework {
            name: format!("{}_{}", self.name, suffix),
            aux,
            structural: fol::rename_symbols(&self.structural, &map),
            hints: self
                .hints
                .iter()
                .map(|h| match h {
                    AuxHint::StrictTotalOrder(s) => AuxHint::StrictTotalOrder(rename(s)),
                    AuxHint::SubsetOf { symbol, superset } => {
                        AuxHint::SubsetOf { symbol: rename(symbol), superset: rename(superset) }
                    }
                })
                .collect(),
        }
    }
}

/// An isolation level: a framework plus a closed level formula over the
/// base and auxiliary symbols. Level formulas contain no constants, which
/// makes membership invariant under transaction renaming.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSpec {
    pub name: String,
    pub framework: Rc<Framework>,
    pub formula: Formula,
}

impl LevelSpec {
    /// Base-plus-aux signature this level's formulas live in.
    pub fn signature(&self) -> Vec<Rc<RelationSymbol>> {
        let mut sig = fol::base_signature();
        sig.extend(self.framework.aux.iter().cloned());
        sig
    }
}

fn txn(name: &str) -> Var {
    Var::new(name, Sort::Txn)
}

fn tv(name: &str) -> Term {
    Term::var(name, Sort::Txn)
}

fn ov(name: &str) -> Term {
    Term::var(name, Sort::Obj)
}

fn vv(name: &str) -> Term {
    Term::var(name, Sort::Val)
}

fn irreflexive(sym: &Rc<RelationSymbol>) -> Formula {
    Formula::forall(txn("a"), Formula::atom(sym.clone(), vec![tv("a"), tv("a")]).not())
}

fn transitive(sym: &Rc<RelationSymbol>) -> Formula {
    Formula::forall_many(
        [txn("a"), txn("b"), txn("c")],
        Formula::atom(sym.clone(), vec![tv("a"), tv("b")])
            .and(Formula::atom(sym.clone(), vec![tv("b"), tv("c")]))
            .implies(Formula::atom(sym.clone(), vec![tv("a"), tv("c")])),
    )
}

fn total_on_distinct(sym: &Rc<RelationSymbol>) -> Formula {
    Formula::forall_many(
        [txn("a"), txn("b")],
        Formula::neq(tv("a"), tv("b")).implies(
            Formula::atom(sym.clone(), vec![tv("a"), tv("b")])
                .or(Formula::atom(sym.clone(), vec![tv("b"), tv("a")])),
        ),
    )
}

/// The six history well-formedness rules as one closed formula over the
/// base symbols.
pub fn well_formedness() -> Formula {
    let writes = writes_symbol();
    let reads = reads_symbol();
    let so = so_symbol();

    let writes_functional = Formula::forall_many(
        [txn("t"), Var::new("x", Sort::Obj), Var::new("v1", Sort::Val), Var::new("v2", Sort::Val)],
        Formula::atom(writes.clone(), vec![tv("t"), ov("x"), vv("v1")])
            .and(Formula::atom(writes.clone(), vec![tv("t"), ov("x"), vv("v2")]))
            .implies(Formula::eq(vv("v1"), vv("v2"))),
    );
    let reads_functional = Formula::forall_many(
        [txn("t"), Var::new("x", Sort::Obj), Var::new("v1", Sort::Val), Var::new("v2", Sort::Val)],
        Formula::atom(reads.clone(), vec![tv("t"), ov("x"), vv("v1")])
            .and(Formula::atom(reads.clone(), vec![tv("t"), ov("x"), vv("v2")]))
            .implies(Formula::eq(vv("v1"), vv("v2"))),
    );
    let unique_writers = Formula::forall_many(
        [txn("t1"), txn("t2"), Var::new("x", Sort::Obj), Var::new("v", Sort::Val)],
        Formula::atom(writes.clone(), vec![tv("t1"), ov("x"), vv("v")])
            .and(Formula::atom(writes.clone(), vec![tv("t2"), ov("x"), vv("v")]))
            .implies(Formula::eq(tv("t1"), tv("t2"))),
    );
    let no_self_read = Formula::forall_many(
        [txn("t"), Var::new("x", Sort::Obj), Var::new("v1", Sort::Val), Var::new("v2", Sort::Val)],
        Formula::atom(writes.clone(), vec![tv("t"), ov("x"), vv("v1")])
            .and(Formula::atom(reads.clone(), vec![tv("t"), ov("x"), vv("v2")]))
            .not(),
    );
    let reads_justified = Formula::forall_many(
        [txn("t"), Var::new("x", Sort::Obj), Var::new("v", Sort::Val)],
        Formula::atom(reads.clone(), vec![tv("t"), ov("x"), vv("v")]).implies(Formula::exists(
            txn("u"),
            Formula::neq(tv("u"), tv("t"))
                .and(Formula::atom(writes.clone(), vec![tv("u"), ov("x"), vv("v")])),
        )),
    );
    let successors_linear = Formula::forall_many(
        [txn("a"), txn("b"), txn("c")],
        Formula::atom(so.clone(), vec![tv("a"), tv("b")])
            .and(Formula::atom(so.clone(), vec![tv("a"), tv("c")]))
            .and(Formula::neq(tv("b"), tv("c")))
            .implies(
                Formula::atom(so.clone(), vec![tv("b"), tv("c")])
                    .or(Formula::atom(so.clone(), vec![tv("c"), tv("b")])),
            ),
    );
    let predecessors_linear = Formula::forall_many(
        [txn("a"), txn("b"), txn("c")],
        Formula::atom(so.clone(), vec![tv("b"), tv("a")])
            .and(Formula::atom(so.clone(), vec![tv("c"), tv("a")]))
            .and(Formula::neq(tv("b"), tv("c")))
            .implies(
                Formula::atom(so.clone(), vec![tv("b"), tv("c")])
                    .or(Formula::atom(so.clone(), vec![tv("c"), tv("b")])),
            ),
    );

    Formula::and_all([
        writes_functional,
        reads_functional,
        unique_writers,
        no_self_read,
        reads_justified,
        irreflexive(&so),
        transitive(&so),
        successors_linear,
        predecessors_linear,
    ])
}

pub const COMMIT_ORDER: &str = "commit_order";
pub const VISIBILITY: &str = "visibility";

fn make_commit_order_framework() -> Framework {
    let co = RelationSymbol::new("co", vec![Sort::Txn, Sort::Txn]);
    let so_or_wr = RelExpr::symbol(so_symbol()).union(RelExpr::write_read());
    let respects_history = Formula::forall_many(
        [txn("a"), txn("b")],
        Formula::rel_atom(so_or_wr, tv("a"), tv("b"))
            .implies(Formula::atom(co.clone(), vec![tv("a"), tv("b")])),
    );
    let structural = Formula::and_all([
        irreflexive(&co),
        transitive(&co),
        total_on_distinct(&co),
        respects_history,
    ]);
    Framework {
        name: COMMIT_ORDER.to_string(),
        aux: vec![co],
        structural,
        hints: vec![AuxHint::StrictTotalOrder("co".to_string())],
    }
}

fn make_visibility_framework() -> Framework {
    let vis = RelationSymbol::new("vis", vec![Sort::Txn, Sort::Txn]);
    let ar = RelationSymbol::new("ar", vec![Sort::Txn, Sort::Txn]);
    let vis_in_ar = Formula::forall_many(
        [txn("a"), txn("b")],
        Formula::atom(vis.clone(), vec![tv("a"), tv("b")])
            .implies(Formula::atom(ar.clone(), vec![tv("a"), tv("b")])),
    );
    let structural = Formula::and_all([
        irreflexive(&ar),
        transitive(&ar),
        total_on_distinct(&ar),
        irreflexive(&vis),
        vis_in_ar,
    ]);
    Framework {
        name: VISIBILITY.to_string(),
        aux: vec![vis, ar],
        structural,
        hints: vec![
            AuxHint::StrictTotalOrder("ar".to_string()),
            AuxHint::SubsetOf { symbol: "vis".to_string(), superset: "ar".to_string() },
        ],
    }
}

thread_local! {
    static FRAMEWORKS: RefCell<Option<(Rc<Framework>, Rc<Framework>)>> = const { RefCell::new(None) };
    static CATALOG: RefCell<Option<Vec<LevelSpec>>> = const { RefCell::new(None) };
}

fn frameworks() -> (Rc<Framework>, Rc<Framework>) {
    FRAMEWORKS.with(|cell| {
        cell.borrow_mut()
            .get_or_insert_with(|| {
                (Rc::new(make_commit_order_framework()), Rc::new(make_visibility_framework()))
            })
            .clone()
    })
}

/// The commit-order framework: one auxiliary strict total order `co`
/// containing session order and read-from.
pub fn commit_order_framework() -> Rc<Framework> {
    frameworks().0
}

/// The visibility framework: `vis` (irreflexive, within `ar`) and the
/// strict total arbitration order `ar`.
pub fn visibility_framework() -> Rc<Framework> {
    frameworks().1
}

pub fn framework_by_name(name: &str) -> Option<Rc<Framework>> {
    match name {
        COMMIT_ORDER => Some(commit_order_framework()),
        VISIBILITY => Some(visibility_framework()),
        _ => None,
    }
}

const BUILTIN_LEVELS: &str = include_str!("builtin_levels.lvl");

/// The eight built-in levels: SER, PC, CC, RA in the commit-order framework
/// and SER, SI, PC, CC in the visibility framework.
pub fn builtin_catalog() -> Vec<LevelSpec> {
    CATALOG.with(|cell| {
        cell.borrow_mut()
            .get_or_insert_with(|| {
                parse_level_file(BUILTIN_LEVELS).unwrap_or_else(|diags| {
                    let rendered: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
                    panic!("built-in level catalog failed to parse:\n{}", rendered.join("\n"))
                })
            })
            .clone()
    })
}

/// Looks a built-in level up by name (case-sensitive).
pub fn builtin_level(name: &str) -> Option<LevelSpec> {
    builtin_catalog().into_iter().find(|l| l.name == name)
}

/// The complete membership constraint for a level: history well-formedness,
/// the framework's structural axioms, and the level formula.
pub fn membership_formula(level: &LevelSpec) -> Formula {
    well_formedness().and(level.framework.structural.clone()).and(level.formula.clone())
}
