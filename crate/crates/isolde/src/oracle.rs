//! Brute-force finite-model reference implementation.
//!
//! Enumerates every well-formed history within a (small) scope and decides
//! level membership by exhaustive auxiliary-assignment search, evaluating
//! formulas with the reference semantics in `fol`. This code path shares
//! nothing with the grounding/SAT pipeline, which makes agreement between
//! the two a genuine cross-check. Scopes are capped at (3,2,2); the
//! enumeration is exponential.

use crate::bounds::{History, Scope};
use crate::fixtures::history_structure;
use crate::fol::evaluate;
use crate::levels::{well_formedness, AuxHint, Framework, LevelSpec};
use crate::synth::SynthProblem;
use std::collections::{BTreeMap, BTreeSet};

/// The largest scope the oracle accepts.
pub const ORACLE_SCOPE_CAP: Scope = Scope { txn: 3, obj: 2, val: 2 };

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("scope {0} exceeds the oracle cap {cap}", cap = ORACLE_SCOPE_CAP)]
    ScopeTooLarge(Scope),
}

/// Enumerates exactly the well-formed histories within `scope`,
/// deterministically ordered by ascending transaction count.
///
/// Histories use a dense prefix of transaction ids: every enumerated
/// transaction performs at least one read or write. Histories with trailing
/// empty transactions are therefore represented once, in stripped form.
pub fn enum_histories(scope: Scope) -> Vec<History> {
    let mut out = Vec::new();
    for k in 0..=scope.txn {
        enum_at_txn_count(k, scope, &mut out);
    }
    out
}

fn enum_at_txn_count(k: usize, scope: Scope, out: &mut Vec<History>) {
    if k == 0 {
        out.push(History::default());
        return;
    }
    let chain_sets = chain_partitions(k);
    for writes in write_configs(k, scope.obj, scope.val) {
        for reads in read_configs(k, scope.obj, &writes) {
            // every transaction must be active at this size
            let active: BTreeSet<usize> = writes
                .iter()
                .map(|&(t, _, _)| t)
                .chain(reads.iter().map(|&(t, _, _)| t))
                .collect();
            if active.len() != k {
                continue;
            }
            for sessions in &chain_sets {
                let mut so = BTreeSet::new();
                for chain in sessions {
                    for (i, &a) in chain.iter().enumerate() {
                        for &b in &chain[i + 1..] {
                            so.insert((a, b));
                        }
                    }
                }
                out.push(History { writes: writes.clone(), reads: reads.clone(), so });
            }
        }
    }
}

/// Per object, writers form a partial matching between transactions and
/// values: writes are functional per transaction and every (object, value)
/// pair has at most one writer.
fn write_configs(txns: usize, objs: usize, vals: usize) -> Vec<BTreeSet<(usize, usize, usize)>> {
    fn per_object(txns: usize, vals: usize) -> Vec<Vec<(usize, usize)>> {
        // assignments txn -> val, injective on values
        let mut out = vec![Vec::new()];
        for t in 0..txns {
            let mut next = Vec::new();
            for partial in out {
                next.push(partial.clone()); // t writes nothing
                for v in 0..vals {
                    if !partial.iter().any(|&(_, pv)| pv == v) {
                        let mut extended = partial.clone();
                        extended.push((t, v));
                        next.push(extended);
                    }
                }
            }
            out = next;
        }
        out
    }
    let per_obj = per_object(txns, vals);
    let mut out = vec![BTreeSet::new()];
    for x in 0..objs {
        let mut next = Vec::new();
        for config in &out {
            for obj_writes in &per_obj {
                let mut extended = config.clone();
                extended.extend(obj_writes.iter().map(|&(t, v)| (t, x, v)));
                next.push(extended);
            }
        }
        out = next;
    }
    out
}

/// Reads per (transaction, object): nothing, or a value some other
/// transaction wrote to that object; transactions never read objects they
/// write.
fn read_configs(
    txns: usize,
    objs: usize,
    writes: &BTreeSet<(usize, usize, usize)>,
) -> Vec<BTreeSet<(usize, usize, usize)>> {
    let mut out = vec![BTreeSet::new()];
    for t in 0..txns {
        for x in 0..objs {
            if writes.iter().any(|&(wt, wx, _)| wt == t && wx == x) {
                continue;
            }
            let options: Vec<usize> = writes
                .iter()
                .filter(|&&(wt, wx, _)| wt != t && wx == x)
                .map(|&(_, _, v)| v)
                .collect();
            if options.is_empty() {
                continue;
            }
            let mut next = Vec::new();
            for config in &out {
                next.push(config.clone());
                for &v in &options {
                    let mut extended = config.clone();
                    extended.insert((t, x, v));
                    next.push(extended);
                }
            }
            out = next;
        }
    }
    out
}

/// All partitions of `0..k` into disjoint ordered chains (sessions),
/// generated by inserting each transaction at every position of every
/// existing chain or as a new chain.
fn chain_partitions(k: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out: Vec<Vec<Vec<usize>>> = vec![vec![]];
    for t in 0..k {
        let mut next = Vec::new();
        for partition in &out {
            // new singleton session
            let mut with_new = partition.clone();
            with_new.push(vec![t]);
            next.push(with_new);
            // insert into an existing session at any position
            for (s, chain) in partition.iter().enumerate() {
                for pos in 0..=chain.len() {
                    let mut inserted = partition.clone();
                    inserted[s].insert(pos, t);
                    next.push(inserted);
                }
            }
        }
        out = next;
    }
    out
}

/// The smallest scope covering a history.
pub fn minimal_scope(history: &History) -> Scope {
    let (t, x, v) = history.max_indices();
    Scope::new(
        t.map_or(1, |t| t + 1),
        x.map_or(1, |x| x + 1),
        v.map_or(1, |v| v + 1),
    )
    .expect("indices + 1 are positive")
}

type PairSet = BTreeSet<(usize, usize)>;

/// All strict total orders on `0..n` as pair sets, deterministic order.
fn total_orders(n: usize) -> Vec<PairSet> {
    fn positions(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for smaller in positions(n - 1) {
            for pos in 0..n {
                let mut perm: Vec<usize> =
                    smaller.iter().map(|&p| if p >= pos { p + 1 } else { p }).collect();
                perm.push(pos);
                out.push(perm);
            }
        }
        out
    }
    positions(n)
        .into_iter()
        .map(|perm| {
            let mut pairs = PairSet::new();
            for a in 0..n {
                for b in 0..n {
                    if perm[a] < perm[b] {
                        pairs.insert((a, b));
                    }
                }
            }
            pairs
        })
        .collect()
}

fn subsets(pairs: &PairSet) -> Vec<PairSet> {
    let items: Vec<(usize, usize)> = pairs.iter().copied().collect();
    (0u64..(1 << items.len()))
        .map(|bits| {
            items
                .iter()
                .enumerate()
                .filter(|(i, _)| bits & (1 << i) != 0)
                .map(|(_, &p)| p)
                .collect()
        })
        .collect()
}

fn all_irreflexive_pairs(n: usize) -> PairSet {
    let mut out = PairSet::new();
    for a in 0..n {
        for b in 0..n {
            if a != b {
                out.insert((a, b));
            }
        }
    }
    out
}

/// Every auxiliary assignment the framework's enumeration hints allow.
/// Candidates pruned here (a non-order assignment for an order symbol, a
/// non-subset for a subset-constrained symbol) would fail the structural
/// axioms anyway; the axioms are still evaluated in full afterwards.
fn aux_assignments(framework: &Framework, txns: usize) -> Vec<BTreeMap<String, PairSet>> {
    let mut assignments: Vec<BTreeMap<String, PairSet>> = vec![BTreeMap::new()];
    let mut covered: Vec<&str> = Vec::new();
    for hint in &framework.hints {
        match hint {
            AuxHint::StrictTotalOrder(name) => {
                covered.push(name);
                let orders = total_orders(txns);
                assignments = assignments
                    .into_iter()
                    .flat_map(|base| {
                        orders.iter().map(move |order| {
                            let mut extended = base.clone();
                            extended.insert(name.clone(), order.clone());
                            extended
                        })
                    })
                    .collect();
            }
            AuxHint::SubsetOf { symbol, superset } => {
                covered.push(symbol);
                assignments = assignments
                    .into_iter()
                    .flat_map(|base| {
                        let bound = base
                            .get(superset)
                            .cloned()
                            .unwrap_or_else(|| all_irreflexive_pairs(txns));
                        subsets(&bound).into_iter().map(move |subset| {
                            let mut extended = base.clone();
                            extended.insert(symbol.clone(), subset);
                            extended
                        })
                    })
                    .collect();
            }
        }
    }
    // any aux symbol without a hint: all subsets of Txn x Txn
    for sym in &framework.aux {
        if covered.contains(&sym.name.as_str()) {
            continue;
        }
        let mut universe = all_irreflexive_pairs(txns);
        for a in 0..txns {
            universe.insert((a, a));
        }
        assignments = assignments
            .into_iter()
            .flat_map(|base| {
                subsets(&universe).into_iter().map(move |subset| {
                    let mut extended = base.clone();
                    extended.insert(sym.name.clone(), subset);
                    extended
                })
            })
            .collect();
    }
    assignments
}

/// True when some auxiliary assignment satisfies the level's membership
/// formula on this history, by exhaustive enumeration.
pub fn allowed_oracle(level: &LevelSpec, history: &History) -> bool {
    let scope = minimal_scope(history);
    // The well-formedness part of the membership formula does not mention
    // auxiliary symbols; evaluate it once.
    let base = history_structure(history, scope, &[]);
    if !evaluate(&well_formedness(), &base).expect("well-formedness evaluates") {
        return false;
    }
    let constraint = level.framework.structural.clone().and(level.formula.clone());
    for assignment in aux_assignments(&level.framework, scope.txn) {
        let mut structure = history_structure(history, scope, &level.framework.aux);
        for (name, pairs) in &assignment {
            structure
                .set_relation(name, pairs.iter().map(|&(a, b)| vec![a, b]))
                .expect("aux pairs are in range");
        }
        if evaluate(&constraint, &structure).expect("membership evaluates") {
            return true;
        }
    }
    false
}

/// Oracle analogue of the synthesis outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleOutcome {
    Sat(History),
    Unsat,
}

impl OracleOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, OracleOutcome::Sat(_))
    }
}

/// Scans the enumeration for the first history allowed by the problem's
/// allowed level and disallowed by its disallowed level. Options are
/// ignored; the oracle has no optimizations to toggle.
pub fn synth_oracle(problem: &SynthProblem) -> Result<OracleOutcome, OracleError> {
    if !problem.scope.fits_within(ORACLE_SCOPE_CAP) {
        return Err(OracleError::ScopeTooLarge(problem.scope));
    }
    for history in enum_histories(problem.scope) {
        if allowed_oracle(&problem.allowed, &history)
            && !allowed_oracle(&problem.disallowed, &history)
        {
            return Ok(OracleOutcome::Sat(history));
        }
    }
    Ok(OracleOutcome::Unsat)
}

/// Batch form of [`synth_oracle`]: resolves every ordered pair of `levels`
/// in one enumeration pass, memoizing membership per history. Pair `(i, j)`
/// of the result is the first history allowed by `levels[i]` and disallowed
/// by `levels[j]`, or `Unsat` if none exists within scope.
pub fn verdict_table(
    levels: &[LevelSpec],
    scope: Scope,
) -> Result<Vec<Vec<OracleOutcome>>, OracleError> {
    if !scope.fits_within(ORACLE_SCOPE_CAP) {
        return Err(OracleError::ScopeTooLarge(scope));
    }
    let n = levels.len();
    let mut table: Vec<Vec<Option<History>>> = vec![vec![None; n]; n];
    let mut unresolved: BTreeSet<(usize, usize)> =
        (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).collect();

    for history in enum_histories(scope) {
        if unresolved.is_empty() {
            break;
        }
        let mut allowed: Vec<Option<bool>> = vec![None; n];
        let level_allowed = |idx: usize, allowed: &mut Vec<Option<bool>>| -> bool {
            if allowed[idx].is_none() {
                allowed[idx] = Some(allowed_oracle(&levels[idx], &history));
            }
            allowed[idx].unwrap()
        };
        let pending: Vec<(usize, usize)> = unresolved.iter().copied().collect();
        for (i, j) in pending {
            if level_allowed(i, &mut allowed) && !level_allowed(j, &mut allowed) {
                table[i][j] = Some(history.clone());
                unresolved.remove(&(i, j));
            }
        }
    }

    Ok(table
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|cell| match cell {
                    Some(h) => OracleOutcome::Sat(h),
                    None => OracleOutcome::Unsat,
                })
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::levels::{builtin_catalog, builtin_level};
    use crate::synth::SynthOptions;

    #[test]
    fn enumeration_count_at_minimal_scope() {
        let histories = enum_histories(Scope::new(1, 1, 1).unwrap());
        // the empty history and the single write
        assert_eq!(histories.len(), 2);
        assert!(histories.iter().all(|h| h.reads.is_empty()));
    }

    #[test]
    fn enumerated_histories_are_well_formed_and_unique() {
        let scope = Scope::new(2, 2, 2).unwrap();
        let histories = enum_histories(scope);
        let mut seen = BTreeSet::new();
        for h in &histories {
            assert!(h.check_well_formed().is_ok(), "ill-formed: {:?}", h);
            assert!(h.fits_scope(scope));
            assert!(
                seen.insert((h.writes.clone(), h.reads.clone(), h.so.clone())),
                "duplicate: {:?}",
                h
            );
        }
        // deterministic order
        assert_eq!(histories, enum_histories(scope));
    }

    #[test]
    fn chain_partition_counts() {
        // A000262: partitions of n elements into ordered chains
        assert_eq!(chain_partitions(0).len(), 1);
        assert_eq!(chain_partitions(1).len(), 1);
        assert_eq!(chain_partitions(2).len(), 3);
        assert_eq!(chain_partitions(3).len(), 13);
    }

    #[test]
    fn allowed_oracle_on_fixtures() {
        let ser_a = builtin_level("SER_A").unwrap();
        let ra_a = builtin_level("RA_A").unwrap();
        let si_b = builtin_level("SI_B").unwrap();

        assert!(!allowed_oracle(&ser_a, &fixtures::write_skew()));
        assert!(allowed_oracle(&si_b, &fixtures::write_skew()));
        assert!(allowed_oracle(&ra_a, &fixtures::causality_violation()));
        for level in builtin_catalog() {
            assert!(allowed_oracle(&level, &History::default()));
        }
    }

    #[test]
    fn oracle_scope_cap_enforced() {
        let problem = SynthProblem {
            allowed: builtin_level("SI_B").unwrap(),
            disallowed: builtin_level("SER_B").unwrap(),
            scope: Scope::new(4, 2, 2).unwrap(),
            options: SynthOptions::default(),
        };
        assert!(matches!(synth_oracle(&problem), Err(OracleError::ScopeTooLarge(_))));
    }

    #[test]
    fn synth_oracle_finds_write_skew_separation() {
        let problem = SynthProblem {
            allowed: builtin_level("SI_B").unwrap(),
            disallowed: builtin_level("SER_B").unwrap(),
            scope: Scope::new(3, 2, 2).unwrap(),
            options: SynthOptions::default(),
        };
        let outcome = synth_oracle(&problem).unwrap();
        match outcome {
            OracleOutcome::Sat(h) => {
                assert!(allowed_oracle(&problem.allowed, &h));
                assert!(!allowed_oracle(&problem.disallowed, &h));
            }
            OracleOutcome::Unsat => panic!("expected a separating history"),
        }
    }

    #[test]
    fn synth_oracle_reflexive_is_unsat() {
        let level = builtin_level("CC_A").unwrap();
        let problem = SynthProblem {
            allowed: level.clone(),
            disallowed: level,
            scope: Scope::new(2, 1, 2).unwrap(),
            options: SynthOptions::default(),
        };
        assert_eq!(synth_oracle(&problem).unwrap(), OracleOutcome::Unsat);
    }

    #[test]
    fn verdict_table_matches_per_pair_oracle_at_tiny_scope() {
        let catalog = builtin_catalog();
        let pick = [0usize, 2, 5]; // SER_A, CC_A, SI_B
        let levels: Vec<_> = pick.iter().map(|&i| catalog[i].clone()).collect();
        let scope = Scope::new(2, 1, 2).unwrap();
        let table = verdict_table(&levels, scope).unwrap();
        for (i, a) in levels.iter().enumerate() {
            for (j, b) in levels.iter().enumerate() {
                if i == j {
                    continue;
                }
                let problem = SynthProblem {
                    allowed: a.clone(),
                    disallowed: b.clone(),
                    scope,
                    options: SynthOptions::default(),
                };
                let single = synth_oracle(&problem).unwrap();
                assert_eq!(
                    table[i][j].is_sat(),
                    single.is_sat(),
                    "pair {} vs {}",
                    a.name,
                    b.name
                );
            }
        }
    }
}
