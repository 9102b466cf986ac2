//! Classic anomaly histories that separate adjacent isolation levels.
//!
//! Each fixture uses disjoint sessions unless stated. They are used across
//! the test suite and by the runnable examples.

use crate::bounds::{History, Scope};
use crate::fol::{base_signature, FiniteStructure, RelationSymbol};
use std::rc::Rc;

/// Write skew, scope (3,2,2): t0 initializes x0 and x1 to n0; t1 reads x0
/// and writes x1 = n1; t2 reads x1 and writes x0 = n1. Serializable under
/// no commit order, but each of t1 and t2 can run against the initial
/// snapshot.
pub fn write_skew() -> History {
    History {
        writes: [(0, 0, 0), (0, 1, 0), (1, 1, 1), (2, 0, 1)].into_iter().collect(),
        reads: [(1, 0, 0), (2, 1, 0)].into_iter().collect(),
        so: Default::default(),
    }
}

/// The scope write skew fits in.
pub fn write_skew_scope() -> Scope {
    Scope::new(3, 2, 2).unwrap()
}

/// Long fork, scope (5,2,2): after t0 initializes both objects, t1 and t2
/// write x0 and x1 independently; t3 observes t1 but not t2, while t4
/// observes t2 but not t1. The two readers see the forks in opposite
/// orders.
pub fn long_fork() -> History {
    History {
        writes: [(0, 0, 0), (0, 1, 0), (1, 0, 1), (2, 1, 1)].into_iter().collect(),
        reads: [(3, 0, 1), (3, 1, 0), (4, 1, 1), (4, 0, 0)].into_iter().collect(),
        so: Default::default(),
    }
}

pub fn long_fork_scope() -> Scope {
    Scope::new(5, 2, 2).unwrap()
}

/// Causality violation, scope (4,2,2): t1 overwrites x0 in the same session
/// as t0; t2 reads t1's write and writes x1; t3 reads t2's x1 yet still
/// sees t0's original x0.
pub fn causality_violation() -> History {
    History {
        writes: [(0, 0, 0), (0, 1, 0), (1, 0, 1), (2, 1, 1)].into_iter().collect(),
        reads: [(2, 0, 1), (3, 1, 1), (3, 0, 0)].into_iter().collect(),
        so: [(0, 1)].into_iter().collect(),
    }
}

pub fn causality_violation_scope() -> Scope {
    Scope::new(4, 2, 2).unwrap()
}

/// Fractured read, scope (3,2,2): t2 sees t1's write of x0 but t0's
/// overwritten value of x1, splitting t1's transaction in half.
pub fn fractured_read() -> History {
    History {
        writes: [(0, 0, 0), (0, 1, 0), (1, 0, 1), (1, 1, 1)].into_iter().collect(),
        reads: [(2, 0, 1), (2, 1, 0)].into_iter().collect(),
        so: Default::default(),
    }
}

pub fn fractured_read_scope() -> Scope {
    Scope::new(3, 2, 2).unwrap()
}

/// All four fixtures with their scopes and names.
pub fn all() -> Vec<(&'static str, History, Scope)> {
    vec![
        ("write_skew", write_skew(), write_skew_scope()),
        ("long_fork", long_fork(), long_fork_scope()),
        ("causality_violation", causality_violation(), causality_violation_scope()),
        ("fractured_read", fractured_read(), fractured_read_scope()),
    ]
}

/// Builds a finite structure interpreting the base symbols by `history`,
/// with empty interpretations for the auxiliary symbols in `aux`.
pub fn history_structure(
    history: &History,
    scope: Scope,
    aux: &[Rc<RelationSymbol>],
) -> FiniteStructure {
    let mut signature = base_signature();
    signature.extend(aux.iter().cloned());
    let mut structure = FiniteStructure::new(scope.txn, scope.obj, scope.val, &signature)
        .expect("scope components are positive");
    structure
        .set_relation("writes", history.writes.iter().map(|&(t, x, v)| vec![t, x, v]))
        .unwrap();
    structure
        .set_relation("reads", history.reads.iter().map(|&(t, x, v)| vec![t, x, v]))
        .unwrap();
    structure.set_relation("so", history.so.iter().map(|&(a, b)| vec![a, b])).unwrap();
    structure
}
