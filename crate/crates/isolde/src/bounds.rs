//! Finite scopes and the tuple-to-boolean-variable encoding.
//!
//! A scope fixes the sizes of the three sort domains. [`encode`] allocates
//! one propositional variable per potential tuple of every relation symbol,
//! densely and in a deterministic order, so that identical inputs always
//! yield identical variable tables. [`decode_history`] maps a solver
//! instance back to the history it represents.

use crate::fol::{base_signature, RelationSymbol, Sort};
use crate::prop::{Instance, VarId};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::rc::Rc;

/// Upper bounds on the number of transactions, objects, and values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Scope {
    pub txn: usize,
    pub obj: usize,
    pub val: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BoundsError {
    #[error("scope components must all be at least 1")]
    ZeroScope,
    #[error("no variable assignment for {symbol}{tuple:?}")]
    MissingAssignment { symbol: String, tuple: Vec<usize> },
    #[error("unknown symbol {0} in variable table")]
    UnknownSymbol(String),
    #[error("decoded history violates well-formedness: {0}")]
    IllFormed(#[from] WfViolation),
}

impl Scope {
    pub fn new(txn: usize, obj: usize, val: usize) -> Result<Self, BoundsError> {
        if txn == 0 || obj == 0 || val == 0 {
            return Err(BoundsError::ZeroScope);
        }
        Ok(Scope { txn, obj, val })
    }

    pub fn domain_size(&self, sort: Sort) -> usize {
        match sort {
            Sort::Txn => self.txn,
            Sort::Obj => self.obj,
            Sort::Val => self.val,
        }
    }

    /// Componentwise comparison, used to gate the brute-force oracle.
    pub fn fits_within(&self, other: Scope) -> bool {
        self.txn <= other.txn && self.obj <= other.obj && self.val <= other.val
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.txn, self.obj, self.val)
    }
}

/// The variable table produced by [`encode`]: for every symbol and every
/// tuple over the finite domains there is exactly one boolean variable.
///
/// Ids start at 1 and are dense. Symbols are laid out in declaration order
/// and tuples in lexicographic domain order.
#[derive(Debug, Clone)]
pub struct VarTable {
    scope: Scope,
    symbols: Vec<Rc<RelationSymbol>>,
    offsets: Vec<VarId>,
    total: VarId,
}

/// Allocates the dense variable numbering over `signature` for `scope`.
pub fn encode(scope: Scope, signature: &[Rc<RelationSymbol>]) -> VarTable {
    let mut offsets = Vec::with_capacity(signature.len());
    let mut next: VarId = 1;
    for sym in signature {
        offsets.push(next);
        let count: usize = sym.signature.iter().map(|&s| scope.domain_size(s)).product();
        next += count as VarId;
    }
    VarTable { scope, symbols: signature.to_vec(), offsets, total: next - 1 }
}

impl VarTable {
    pub fn scope(&self) -> Scope {
        self.scope
    }

    pub fn symbols(&self) -> &[Rc<RelationSymbol>] {
        &self.symbols
    }

    pub fn symbol(&self, name: &str) -> Option<&Rc<RelationSymbol>> {
        self.symbols.iter().find(|s| s.name == name)
    }

    /// Total number of allocated variables.
    pub fn var_count(&self) -> VarId {
        self.total
    }

    /// The variable for `symbol(tuple)`. Tuples must respect the symbol's
    /// signature and the scope bounds.
    pub fn var(&self, symbol: &str, tuple: &[usize]) -> Result<VarId, BoundsError> {
        let idx = self
            .symbols
            .iter()
            .position(|s| s.name == symbol)
            .ok_or_else(|| BoundsError::UnknownSymbol(symbol.to_string()))?;
        let sym = &self.symbols[idx];
        if tuple.len() != sym.arity() {
            return Err(BoundsError::MissingAssignment {
                symbol: symbol.to_string(),
                tuple: tuple.to_vec(),
            });
        }
        let mut index = 0usize;
        for (&component, &sort) in tuple.iter().zip(&sym.signature) {
            let size = self.scope.domain_size(sort);
            if component >= size {
                return Err(BoundsError::MissingAssignment {
                    symbol: symbol.to_string(),
                    tuple: tuple.to_vec(),
                });
            }
            index = index * size + component;
        }
        Ok(self.offsets[idx] + index as VarId)
    }

    /// All `(tuple, variable)` pairs of one symbol, in allocation order.
    pub fn vars_of(&self, symbol: &str) -> Result<Vec<(Vec<usize>, VarId)>, BoundsError> {
        let idx = self
            .symbols
            .iter()
            .position(|s| s.name == symbol)
            .ok_or_else(|| BoundsError::UnknownSymbol(symbol.to_string()))?;
        let sym = &self.symbols[idx];
        let sizes: Vec<usize> = sym.signature.iter().map(|&s| self.scope.domain_size(s)).collect();
        let mut out = Vec::new();
        let mut tuple = vec![0usize; sizes.len()];
        let mut var = self.offsets[idx];
        loop {
            out.push((tuple.clone(), var));
            var += 1;
            // advance the mixed-radix counter
            let mut pos = sizes.len();
            loop {
                if pos == 0 {
                    return Ok(out);
                }
                pos -= 1;
                tuple[pos] += 1;
                if tuple[pos] < sizes[pos] {
                    break;
                }
                tuple[pos] = 0;
            }
        }
    }

    /// Variable ids of the three base history symbols.
    pub fn base_vars(&self) -> Vec<VarId> {
        let mut out = Vec::new();
        for name in ["writes", "reads", "so"] {
            if let Ok(vars) = self.vars_of(name) {
                out.extend(vars.into_iter().map(|(_, v)| v));
            }
        }
        out
    }
}

/// A transaction history: per-transaction write and read sets plus the
/// session order. Transactions, objects, and values are domain indices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct History {
    pub writes: BTreeSet<(usize, usize, usize)>,
    pub reads: BTreeSet<(usize, usize, usize)>,
    pub so: BTreeSet<(usize, usize)>,
}

/// A violated history well-formedness rule.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WfViolation {
    #[error("transaction t{txn} writes two values to x{obj}")]
    WritesNotFunctional { txn: usize, obj: usize },
    #[error("transaction t{txn} reads two values from x{obj}")]
    ReadsNotFunctional { txn: usize, obj: usize },
    #[error("(x{obj}, n{val}) is written by more than one transaction")]
    DuplicateWriter { obj: usize, val: usize },
    #[error("transaction t{txn} both reads and writes x{obj}")]
    SelfRead { txn: usize, obj: usize },
    #[error("read of (x{obj}, n{val}) by t{txn} has no writer in another transaction")]
    UnjustifiedRead { txn: usize, obj: usize, val: usize },
    #[error("session order is not a disjoint union of chains")]
    SessionOrderNotChains,
}

impl History {
    /// Checks the six well-formedness rules directly on the tuple sets.
    ///
    /// This is a code path independent of the symbolic well-formedness
    /// formula in the levels module; the two are tested to agree.
    pub fn check_well_formed(&self) -> Result<(), WfViolation> {
        let mut write_vals: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for &(t, x, v) in &self.writes {
            if let Some(&prev) = write_vals.get(&(t, x)) {
                if prev != v {
                    return Err(WfViolation::WritesNotFunctional { txn: t, obj: x });
                }
            }
            write_vals.insert((t, x), v);
        }
        let mut read_vals: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for &(t, x, v) in &self.reads {
            if let Some(&prev) = read_vals.get(&(t, x)) {
                if prev != v {
                    return Err(WfViolation::ReadsNotFunctional { txn: t, obj: x });
                }
            }
            read_vals.insert((t, x), v);
        }
        let mut writers: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for &(t, x, v) in &self.writes {
            if let Some(&prev) = writers.get(&(x, v)) {
                if prev != t {
                    return Err(WfViolation::DuplicateWriter { obj: x, val: v });
                }
            }
            writers.insert((x, v), t);
        }
        for &(t, x, _) in &self.reads {
            if self.writes.iter().any(|&(t2, x2, _)| t2 == t && x2 == x) {
                return Err(WfViolation::SelfRead { txn: t, obj: x });
            }
        }
        for &(t, x, v) in &self.reads {
            if !self.writes.iter().any(|&(t2, x2, v2)| t2 != t && x2 == x && v2 == v) {
                return Err(WfViolation::UnjustifiedRead { txn: t, obj: x, val: v });
            }
        }
        self.check_so_chains()
    }

    fn check_so_chains(&self) -> Result<(), WfViolation> {
        let so = &self.so;
        for &(a, b) in so {
            if a == b {
                return Err(WfViolation::SessionOrderNotChains);
            }
            // transitivity
            for &(c, d) in so {
                if b == c && !so.contains(&(a, d)) {
                    return Err(WfViolation::SessionOrderNotChains);
                }
            }
        }
        // successors and predecessors of any element are linearly ordered
        for &(a, b) in so {
            for &(c, d) in so {
                if a == c && b != d && !so.contains(&(b, d)) && !so.contains(&(d, b)) {
                    return Err(WfViolation::SessionOrderNotChains);
                }
                if b == d && a != c && !so.contains(&(a, c)) && !so.contains(&(c, a)) {
                    return Err(WfViolation::SessionOrderNotChains);
                }
            }
        }
        Ok(())
    }

    /// Transactions that perform at least one read or write.
    pub fn active_txns(&self) -> BTreeSet<usize> {
        self.writes
            .iter()
            .map(|&(t, _, _)| t)
            .chain(self.reads.iter().map(|&(t, _, _)| t))
            .collect()
    }

    /// Largest transaction / object / value index in use, if any.
    pub fn max_indices(&self) -> (Option<usize>, Option<usize>, Option<usize>) {
        let mut txn = None;
        let mut obj = None;
        let mut val = None;
        let bump = |slot: &mut Option<usize>, v: usize| {
            *slot = Some(slot.map_or(v, |cur: usize| cur.max(v)));
        };
        for &(t, x, v) in self.writes.iter().chain(self.reads.iter()) {
            bump(&mut txn, t);
            bump(&mut obj, x);
            bump(&mut val, v);
        }
        for &(a, b) in &self.so {
            bump(&mut txn, a);
            bump(&mut txn, b);
        }
        (txn, obj, val)
    }

    /// True when every index fits inside `scope`.
    pub fn fits_scope(&self, scope: Scope) -> bool {
        let (t, x, v) = self.max_indices();
        t.map_or(true, |t| t < scope.txn)
            && x.map_or(true, |x| x < scope.obj)
            && v.map_or(true, |v| v < scope.val)
    }

    /// Removes transactions with no reads and no writes, renumbering the
    /// survivors densely while preserving order. Session-order edges that
    /// touch removed transactions are dropped; transitivity keeps the
    /// remaining chains intact.
    pub fn strip_empty_txns(&self) -> History {
        let active = self.active_txns();
        let renumber: BTreeMap<usize, usize> =
            active.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        History {
            writes: self.writes.iter().map(|&(t, x, v)| (renumber[&t], x, v)).collect(),
            reads: self.reads.iter().map(|&(t, x, v)| (renumber[&t], x, v)).collect(),
            so: self
                .so
                .iter()
                .filter(|(a, b)| renumber.contains_key(a) && renumber.contains_key(b))
                .map(|&(a, b)| (renumber[&a], renumber[&b]))
                .collect(),
        }
    }

    /// Applies a transaction renaming given as old-index -> new-index.
    pub fn rename_txns(&self, perm: &[usize]) -> History {
        History {
            writes: self.writes.iter().map(|&(t, x, v)| (perm[t], x, v)).collect(),
            reads: self.reads.iter().map(|&(t, x, v)| (perm[t], x, v)).collect(),
            so: self.so.iter().map(|&(a, b)| (perm[a], perm[b])).collect(),
        }
    }
}

/// Decodes the base-symbol assignment of `instance` into a history.
///
/// Auxiliary symbols are ignored. Every base variable must be assigned.
/// The result is re-checked against the well-formedness rules.
pub fn decode_history(table: &VarTable, instance: &Instance) -> Result<History, BoundsError> {
    let mut history = History::default();
    for (name, target) in [("writes", 0usize), ("reads", 1), ("so", 2)] {
        for (tuple, var) in table.vars_of(name)? {
            let value = instance.get(var).ok_or_else(|| BoundsError::MissingAssignment {
                symbol: name.to_string(),
                tuple: tuple.clone(),
            })?;
            if value {
                match target {
                    0 => history.writes.insert((tuple[0], tuple[1], tuple[2])),
                    1 => history.reads.insert((tuple[0], tuple[1], tuple[2])),
                    _ => history.so.insert((tuple[0], tuple[1])),
                };
            }
        }
    }
    Ok(history)
}

/// The set of tuples of one symbol that are true in `instance`.
pub fn decode_relation(
    table: &VarTable,
    instance: &Instance,
    symbol: &str,
) -> Result<BTreeSet<Vec<usize>>, BoundsError> {
    let mut out = BTreeSet::new();
    for (tuple, var) in table.vars_of(symbol)? {
        let value = instance.get(var).ok_or_else(|| BoundsError::MissingAssignment {
            symbol: symbol.to_string(),
            tuple: tuple.clone(),
        })?;
        if value {
            out.insert(tuple);
        }
    }
    Ok(out)
}

/// Decodes a total instance into a finite structure interpreting every
/// symbol of the table.
pub fn decode_structure(
    table: &VarTable,
    instance: &Instance,
) -> Result<crate::fol::FiniteStructure, BoundsError> {
    let scope = table.scope();
    let mut structure = crate::fol::FiniteStructure::new(
        scope.txn,
        scope.obj,
        scope.val,
        table.symbols(),
    )
    .expect("scope components are positive");
    for sym in table.symbols() {
        let tuples = decode_relation(table, instance, &sym.name)?;
        structure.set_relation(&sym.name, tuples).expect("tuples come from the table");
    }
    Ok(structure)
}

/// Encodes a history as an instance over the table's base variables
/// (auxiliary variables are left unassigned).
pub fn history_instance(table: &VarTable, history: &History) -> Result<Instance, BoundsError> {
    let mut instance = Instance::default();
    for (tuple, var) in table.vars_of("writes")? {
        instance.set(var, history.writes.contains(&(tuple[0], tuple[1], tuple[2])));
    }
    for (tuple, var) in table.vars_of("reads")? {
        instance.set(var, history.reads.contains(&(tuple[0], tuple[1], tuple[2])));
    }
    for (tuple, var) in table.vars_of("so")? {
        instance.set(var, history.so.contains(&(tuple[0], tuple[1])));
    }
    Ok(instance)
}

// ---------------------------------------------------------------------------
// History file format
// ---------------------------------------------------------------------------

/// One transaction in the on-disk history document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TxnDoc {
    pub id: String,
    pub session: usize,
    pub seq: usize,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub writes: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub reads: BTreeMap<String, String>,
}

/// The on-disk history document. Session order is derived: `(a, b)` is in
/// `so` exactly when both transactions share a session and `seq(a) < seq(b)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HistoryDoc {
    pub transactions: Vec<TxnDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HistoryFormatError {
    #[error("invalid {kind} name {name:?}: expected {prefix}0..{prefix}{max}")]
    BadName { kind: &'static str, name: String, prefix: &'static str, max: usize },
    #[error("duplicate transaction id {0}")]
    DuplicateTxn(String),
    #[error("duplicate (session, seq) position for transaction {0}")]
    DuplicatePosition(String),
    #[error("history does not fit the declared scope {0}")]
    ScopeExceeded(Scope),
}

fn parse_indexed_name(
    kind: &'static str,
    prefix: &'static str,
    name: &str,
    bound: usize,
) -> Result<usize, HistoryFormatError> {
    let bad = || HistoryFormatError::BadName {
        kind,
        name: name.to_string(),
        prefix,
        max: bound.saturating_sub(1),
    };
    let rest = name.strip_prefix(prefix).ok_or_else(bad)?;
    if rest.is_empty() || rest.len() > 1 && rest.starts_with('0') {
        return Err(bad());
    }
    let index: usize = rest.parse().map_err(|_| bad())?;
    if index >= bound {
        return Err(bad());
    }
    Ok(index)
}

impl HistoryDoc {
    /// Validates names against `scope` and derives the session order.
    pub fn to_history(&self, scope: Scope) -> Result<History, HistoryFormatError> {
        let mut history = History::default();
        let mut seen_ids = BTreeSet::new();
        let mut positions = BTreeSet::new();
        let mut placed: Vec<(usize, usize, usize)> = Vec::new(); // (session, seq, txn)
        for txn in &self.transactions {
            let t = parse_indexed_name("transaction", "t", &txn.id, scope.txn)?;
            if !seen_ids.insert(t) {
                return Err(HistoryFormatError::DuplicateTxn(txn.id.clone()));
            }
            if !positions.insert((txn.session, txn.seq)) {
                return Err(HistoryFormatError::DuplicatePosition(txn.id.clone()));
            }
            for (obj, val) in &txn.writes {
                let x = parse_indexed_name("object", "x", obj, scope.obj)?;
                let v = parse_indexed_name("value", "n", val, scope.val)?;
                history.writes.insert((t, x, v));
            }
            for (obj, val) in &txn.reads {
                let x = parse_indexed_name("object", "x", obj, scope.obj)?;
                let v = parse_indexed_name("value", "n", val, scope.val)?;
                history.reads.insert((t, x, v));
            }
            placed.push((txn.session, txn.seq, t));
        }
        placed.sort();
        for (i, &(s1, q1, t1)) in placed.iter().enumerate() {
            for &(s2, q2, t2) in &placed[i + 1..] {
                if s1 == s2 && q1 < q2 {
                    history.so.insert((t1, t2));
                }
            }
        }
        Ok(history)
    }

    /// Renders a history back into the document form, splitting the session
    /// order into per-session sequences.
    pub fn from_history(history: &History) -> HistoryDoc {
        // Transactions mentioned anywhere, including so-only participants.
        let mut txns: BTreeSet<usize> = history.active_txns();
        for &(a, b) in &history.so {
            txns.insert(a);
            txns.insert(b);
        }

        // Group into sessions: chains of the so relation. Every transaction
        // with no so edges forms a singleton session.
        let mut session_of: BTreeMap<usize, usize> = BTreeMap::new();
        let mut next_session = 0usize;
        for &t in &txns {
            if session_of.contains_key(&t) {
                continue;
            }
            // Gather the whole chain through t.
            let mut chain: Vec<usize> = txns
                .iter()
                .copied()
                .filter(|&u| {
                    u == t || history.so.contains(&(t, u)) || history.so.contains(&(u, t))
                })
                .collect();
            chain.sort_by(|&a, &b| {
                if history.so.contains(&(a, b)) {
                    std::cmp::Ordering::Less
                } else if history.so.contains(&(b, a)) {
                    std::cmp::Ordering::Greater
                } else {
                    a.cmp(&b)
                }
            });
            for u in chain {
                session_of.entry(u).or_insert(next_session);
            }
            next_session += 1;
        }

        let mut seq_counter: BTreeMap<usize, usize> = BTreeMap::new();
        let mut docs = Vec::new();
        // Emit in session-chain order so seq numbers follow so.
        let mut by_session: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (&t, &s) in &session_of {
            by_session.entry(s).or_default().push(t);
        }
        for (_, mut members) in by_session {
            members.sort_by(|&a, &b| {
                if history.so.contains(&(a, b)) {
                    std::cmp::Ordering::Less
                } else if history.so.contains(&(b, a)) {
                    std::cmp::Ordering::Greater
                } else {
                    a.cmp(&b)
                }
            });
            for t in members {
                let session = session_of[&t];
                let seq = *seq_counter.entry(session).and_modify(|s| *s += 1).or_insert(0);
                let writes = history
                    .writes
                    .iter()
                    .filter(|&&(t2, _, _)| t2 == t)
                    .map(|&(_, x, v)| (Sort::Obj.element_name(x), Sort::Val.element_name(v)))
                    .collect();
                let reads = history
                    .reads
                    .iter()
                    .filter(|&&(t2, _, _)| t2 == t)
                    .map(|&(_, x, v)| (Sort::Obj.element_name(x), Sort::Val.element_name(v)))
                    .collect();
                docs.push(TxnDoc {
                    id: Sort::Txn.element_name(t),
                    session,
                    seq,
                    writes,
                    reads,
                });
            }
        }
        HistoryDoc { transactions: docs }
    }
}

/// Signature used by most single-framework problems: base plus `co`.
pub fn base_plus(aux: &[Rc<RelationSymbol>]) -> Vec<Rc<RelationSymbol>> {
    let mut sig = base_signature();
    sig.extend(aux.iter().cloned());
    sig
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fol::RelationSymbol;

    fn co() -> Rc<RelationSymbol> {
        RelationSymbol::new("co", vec![Sort::Txn, Sort::Txn])
    }

    #[test]
    fn encode_var_counts() {
        let sig = base_plus(&[co()]);
        let table = encode(Scope::new(2, 1, 2).unwrap(), &sig);
        assert_eq!(table.var_count(), 16);
        let table = encode(Scope::new(1, 1, 1).unwrap(), &sig);
        assert_eq!(table.var_count(), 4);
        let table = encode(Scope::new(3, 2, 2).unwrap(), &sig);
        assert_eq!(table.var_count(), 42);
    }

    #[test]
    fn encode_is_deterministic_and_dense() {
        let sig = base_plus(&[co()]);
        let scope = Scope::new(2, 2, 2).unwrap();
        let a = encode(scope, &sig);
        let b = encode(scope, &sig);
        let mut seen = BTreeSet::new();
        for sym in ["writes", "reads", "so", "co"] {
            for ((ta, va), (tb, vb)) in
                a.vars_of(sym).unwrap().into_iter().zip(b.vars_of(sym).unwrap())
            {
                assert_eq!((ta, va), (tb, vb));
                assert!(seen.insert(va), "duplicate id {}", va);
            }
        }
        assert_eq!(seen.len() as VarId, a.var_count());
        assert_eq!(*seen.iter().next().unwrap(), 1);
        assert_eq!(*seen.iter().last().unwrap(), a.var_count());
    }

    #[test]
    fn zero_scope_rejected() {
        assert_eq!(Scope::new(0, 1, 1), Err(BoundsError::ZeroScope));
    }

    #[test]
    fn decode_history_examples() {
        let sig = base_plus(&[co()]);
        let table = encode(Scope::new(2, 1, 2).unwrap(), &sig);

        // only writes(t0, x0, n0) true
        let mut inst = Instance::default();
        for v in table.base_vars() {
            inst.set(v, false);
        }
        inst.set(table.var("writes", &[0, 0, 0]).unwrap(), true);
        let h = decode_history(&table, &inst).unwrap();
        assert_eq!(h.writes, [(0, 0, 0)].into_iter().collect());
        assert!(h.reads.is_empty() && h.so.is_empty());

        // all-false instance decodes to the empty history
        let mut inst = Instance::default();
        for v in table.base_vars() {
            inst.set(v, false);
        }
        assert_eq!(decode_history(&table, &inst).unwrap(), History::default());

        // so(t0,t1) and writes(t1,x0,n1)
        let mut inst = Instance::default();
        for v in table.base_vars() {
            inst.set(v, false);
        }
        inst.set(table.var("so", &[0, 1]).unwrap(), true);
        inst.set(table.var("writes", &[1, 0, 1]).unwrap(), true);
        let h = decode_history(&table, &inst).unwrap();
        assert_eq!(h.writes, [(1, 0, 1)].into_iter().collect());
        assert_eq!(h.so, [(0, 1)].into_iter().collect());
    }

    #[test]
    fn decode_relation_examples() {
        let sig = base_plus(&[co()]);
        let table = encode(Scope::new(2, 1, 2).unwrap(), &sig);

        let mut inst = Instance::default();
        for (_, v) in table.vars_of("co").unwrap() {
            inst.set(v, false);
        }
        inst.set(table.var("co", &[0, 1]).unwrap(), true);
        let rel = decode_relation(&table, &inst, "co").unwrap();
        assert_eq!(rel, [vec![0, 1]].into_iter().collect());

        let mut all = Instance::default();
        for (_, v) in table.vars_of("co").unwrap() {
            all.set(v, true);
        }
        let rel = decode_relation(&table, &all, "co").unwrap();
        assert_eq!(rel.len(), 4);

        let empty = Instance::default();
        assert!(decode_relation(&table, &empty, "co").is_err());
        assert!(decode_relation(&table, &all, "vis").is_err());
    }

    #[test]
    fn missing_assignment_rejected() {
        let sig = base_plus(&[]);
        let table = encode(Scope::new(1, 1, 1).unwrap(), &sig);
        let inst = Instance::default();
        assert!(matches!(
            decode_history(&table, &inst),
            Err(BoundsError::MissingAssignment { .. })
        ));
    }

    #[test]
    fn encode_then_decode_roundtrips() {
        let sig = base_plus(&[co()]);
        let table = encode(Scope::new(3, 2, 2).unwrap(), &sig);
        let h = History {
            writes: [(0, 0, 0), (1, 1, 1)].into_iter().collect(),
            reads: [(2, 0, 0)].into_iter().collect(),
            so: [(0, 1)].into_iter().collect(),
        };
        let inst = history_instance(&table, &h).unwrap();
        assert_eq!(decode_history(&table, &inst).unwrap(), h);
    }

    #[test]
    fn wf_rules() {
        let ok = History {
            writes: [(0, 0, 0)].into_iter().collect(),
            ..Default::default()
        };
        assert!(ok.check_well_formed().is_ok());

        let double_write = History {
            writes: [(0, 0, 0), (0, 0, 1)].into_iter().collect(),
            ..Default::default()
        };
        assert!(matches!(
            double_write.check_well_formed(),
            Err(WfViolation::WritesNotFunctional { .. })
        ));

        let dup_writer = History {
            writes: [(0, 0, 0), (1, 0, 0)].into_iter().collect(),
            ..Default::default()
        };
        assert!(matches!(
            dup_writer.check_well_formed(),
            Err(WfViolation::DuplicateWriter { .. })
        ));

        let self_read = History {
            writes: [(0, 0, 0), (1, 0, 1)].into_iter().collect(),
            reads: [(0, 0, 1)].into_iter().collect(),
            ..Default::default()
        };
        assert!(matches!(self_read.check_well_formed(), Err(WfViolation::SelfRead { .. })));

        let unjustified = History {
            reads: [(0, 0, 0)].into_iter().collect(),
            ..Default::default()
        };
        assert!(matches!(
            unjustified.check_well_formed(),
            Err(WfViolation::UnjustifiedRead { .. })
        ));

        let bad_so = History {
            so: [(0, 1), (1, 2)].into_iter().collect(), // missing (0,2)
            ..Default::default()
        };
        assert!(matches!(bad_so.check_well_formed(), Err(WfViolation::SessionOrderNotChains)));

        let good_so = History {
            so: [(0, 1), (1, 2), (0, 2)].into_iter().collect(),
            ..Default::default()
        };
        assert!(good_so.check_well_formed().is_ok());

        let forked_so = History {
            so: [(0, 1), (0, 2)].into_iter().collect(), // 1 and 2 unordered
            ..Default::default()
        };
        assert!(matches!(forked_so.check_well_formed(), Err(WfViolation::SessionOrderNotChains)));
    }

    #[test]
    fn strip_renumbers_and_keeps_chains() {
        let h = History {
            writes: [(0, 0, 0), (3, 1, 0)].into_iter().collect(),
            reads: BTreeSet::new(),
            so: [(0, 1), (1, 3), (0, 3)].into_iter().collect(),
        };
        let stripped = h.strip_empty_txns();
        assert_eq!(stripped.writes, [(0, 0, 0), (1, 1, 0)].into_iter().collect());
        assert_eq!(stripped.so, [(0, 1)].into_iter().collect());
        assert!(stripped.check_well_formed().is_ok());
    }

    #[test]
    fn history_doc_roundtrip() {
        let scope = Scope::new(3, 2, 2).unwrap();
        let h = History {
            writes: [(0, 0, 0), (0, 1, 0), (1, 1, 1)].into_iter().collect(),
            reads: [(2, 1, 0)].into_iter().collect(),
            so: [(0, 1)].into_iter().collect(),
        };
        let doc = HistoryDoc::from_history(&h);
        let back = doc.to_history(scope).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn history_doc_rejects_unknown_names() {
        let scope = Scope::new(1, 1, 1).unwrap();
        let doc = HistoryDoc {
            transactions: vec![TxnDoc {
                id: "t7".into(),
                session: 0,
                seq: 0,
                writes: BTreeMap::new(),
                reads: BTreeMap::new(),
            }],
        };
        assert!(matches!(doc.to_history(scope), Err(HistoryFormatError::BadName { .. })));

        let doc = HistoryDoc {
            transactions: vec![TxnDoc {
                id: "t0".into(),
                session: 0,
                seq: 0,
                writes: [("y0".to_string(), "n0".to_string())].into_iter().collect(),
                reads: BTreeMap::new(),
            }],
        };
        assert!(matches!(doc.to_history(scope), Err(HistoryFormatError::BadName { .. })));
    }
}
