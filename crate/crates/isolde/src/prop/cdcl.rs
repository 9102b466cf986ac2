//! Embedded CDCL SAT solver.
//!
//! Two-watched-literal propagation, 1UIP conflict analysis, VSIDS decisions
//! with deterministic tie-breaking, phase saving, Luby restarts, and
//! periodic learned-clause reduction. Runs are fully deterministic for a
//! fixed seed; the seed only perturbs the initial activity ordering.

use std::time::Instant;

/// Raised when a deadline expires mid-search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimedOut;

/// Literal encoding: variable v (1-based) maps to 2*v (positive) or 2*v+1
/// (negative). Index 0/1 are unused.
type Lit = u32;

fn lit_from_dimacs(l: i32) -> Lit {
    let v = l.unsigned_abs();
    if l > 0 {
        2 * v
    } else {
        2 * v + 1
    }
}

fn lit_var(l: Lit) -> u32 {
    l >> 1
}

fn lit_neg(l: Lit) -> Lit {
    l ^ 1
}

fn lit_is_pos(l: Lit) -> bool {
    l & 1 == 0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Assign {
    Unset,
    True,
    False,
}

struct ClauseData {
    lits: Vec<Lit>,
    learned: bool,
    activity: f64,
}

pub struct Solver {
    num_vars: usize,
    clauses: Vec<ClauseData>,
    watches: Vec<Vec<usize>>, // indexed by literal
    assign: Vec<Assign>,      // indexed by var
    level: Vec<u32>,
    reason: Vec<Option<usize>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    prop_head: usize,
    activity: Vec<f64>,
    var_inc: f64,
    clause_inc: f64,
    heap: Vec<u32>,      // binary max-heap of vars
    heap_pos: Vec<usize>, // var -> heap index, usize::MAX when absent
    phase: Vec<bool>,
    seen: Vec<bool>,
    conflicts: u64,
    learned_count: usize,
    max_learned: usize,
    ok: bool,
}

const VAR_DECAY: f64 = 1.0 / 0.95;
const CLAUSE_DECAY: f64 = 1.0 / 0.999;
const RESCALE_LIMIT: f64 = 1e100;

impl Solver {
    pub fn new(num_vars: usize, seed: u64) -> Self {
        let vars = num_vars + 1;
        let mut solver = Solver {
            num_vars,
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * vars + 2],
            assign: vec![Assign::Unset; vars],
            level: vec![0; vars],
            reason: vec![None; vars],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            prop_head: 0,
            activity: vec![0.0; vars],
            var_inc: 1.0,
            clause_inc: 1.0,
            heap: Vec::new(),
            heap_pos: vec![usize::MAX; vars],
            phase: vec![false; vars],
            seen: vec![false; vars],
            conflicts: 0,
            learned_count: 0,
            max_learned: 4000,
            ok: true,
        };
        if seed != 0 {
            // Seeded perturbation of the initial decision order.
            let mut state = seed;
            for v in 1..vars {
                state = splitmix64(state);
                solver.activity[v] = (state % 1024) as f64 * 1e-9;
            }
        }
        for v in 1..=num_vars {
            solver.heap_insert(v as u32);
        }
        solver
    }

    // --- decision heap -----------------------------------------------------

    fn heap_less(&self, a: u32, b: u32) -> bool {
        // max-heap: higher activity first, lower index breaks ties
        let (aa, ab) = (self.activity[a as usize], self.activity[b as usize]);
        aa > ab || (aa == ab && a < b)
    }

    fn heap_insert(&mut self, v: u32) {
        if self.heap_pos[v as usize] != usize::MAX {
            return;
        }
        self.heap.push(v);
        let i = self.heap.len() - 1;
        self.heap_pos[v as usize] = i;
        self.heap_up(i);
    }

    fn heap_up(&mut self, mut i: usize) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if self.heap_less(self.heap[i], self.heap[parent]) {
                self.heap.swap(i, parent);
                self.heap_pos[self.heap[i] as usize] = i;
                self.heap_pos[self.heap[parent] as usize] = parent;
                i = parent;
            } else {
                break;
            }
        }
    }

    fn heap_down(&mut self, mut i: usize) {
        loop {
            let l = 2 * i + 1;
            let r = 2 * i + 2;
            let mut best = i;
            if l < self.heap.len() && self.heap_less(self.heap[l], self.heap[best]) {
                best = l;
            }
            if r < self.heap.len() && self.heap_less(self.heap[r], self.heap[best]) {
                best = r;
            }
            if best == i {
                break;
            }
            self.heap.swap(i, best);
            self.heap_pos[self.heap[i] as usize] = i;
            self.heap_pos[self.heap[best] as usize] = best;
            i = best;
        }
    }

    fn heap_pop(&mut self) -> Option<u32> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().unwrap();
        self.heap_pos[top as usize] = usize::MAX;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.heap_pos[last as usize] = 0;
            self.heap_down(0);
        }
        Some(top)
    }

    fn bump_var(&mut self, v: u32) {
        self.activity[v as usize] += self.var_inc;
        if self.activity[v as usize] > RESCALE_LIMIT {
            for a in self.activity.iter_mut() {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        let pos = self.heap_pos[v as usize];
        if pos != usize::MAX {
            self.heap_up(pos);
        }
    }

    // --- clause management -------------------------------------------------

    /// Adds a problem clause. Returns false if the instance is already
    /// unsatisfiable at level 0.
    pub fn add_clause(&mut self, clause: &[i32]) -> bool {
        if !self.ok {
            return false;
        }
        debug_assert!(self.trail_lim.is_empty());
        let mut lits: Vec<Lit> = clause.iter().map(|&l| lit_from_dimacs(l)).collect();
        lits.sort_unstable();
        lits.dedup();
        // tautology or satisfied/falsified at level 0
        let mut filtered = Vec::with_capacity(lits.len());
        for &l in &lits {
            if lits.binary_search(&lit_neg(l)).is_ok() {
                return true; // tautology
            }
            match self.value(l) {
                Assign::True => return true,
                Assign::False => {}
                Assign::Unset => filtered.push(l),
            }
        }
        match filtered.len() {
            0 => {
                self.ok = false;
                false
            }
            1 => {
                self.enqueue(filtered[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
                self.ok
            }
            _ => {
                self.attach(filtered, false);
                true
            }
        }
    }

    fn attach(&mut self, lits: Vec<Lit>, learned: bool) -> usize {
        let idx = self.clauses.len();
        self.watches[lits[0] as usize].push(idx);
        self.watches[lits[1] as usize].push(idx);
        if learned {
            self.learned_count += 1;
        }
        self.clauses.push(ClauseData { lits, learned, activity: 0.0 });
        idx
    }

    fn bump_clause(&mut self, idx: usize) {
        let c = &mut self.clauses[idx];
        c.activity += self.clause_inc;
        if c.activity > RESCALE_LIMIT {
            for c in self.clauses.iter_mut() {
                c.activity *= 1e-100;
            }
            self.clause_inc *= 1e-100;
        }
    }

    fn reduce_learned(&mut self) {
        let mut candidates: Vec<usize> = (0..self.clauses.len())
            .filter(|&i| {
                self.clauses[i].learned
                    && self.clauses[i].lits.len() > 2
                    && !self.is_reason(i)
            })
            .collect();
        candidates.sort_by(|&a, &b| {
            self.clauses[a]
                .activity
                .partial_cmp(&self.clauses[b].activity)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(b.cmp(&a))
        });
        let remove: std::collections::HashSet<usize> =
            candidates.iter().take(candidates.len() / 2).copied().collect();
        if remove.is_empty() {
            self.max_learned += 1000;
            return;
        }
        // Rebuild with holes compacted; remap watches and reasons.
        let mut remap = vec![usize::MAX; self.clauses.len()];
        let mut kept = Vec::with_capacity(self.clauses.len() - remove.len());
        for (i, c) in self.clauses.drain(..).enumerate() {
            if remove.contains(&i) {
                continue;
            }
            remap[i] = kept.len();
            kept.push(c);
        }
        self.clauses = kept;
        self.learned_count = self.clauses.iter().filter(|c| c.learned).count();
        for w in self.watches.iter_mut() {
            w.retain(|&idx| remap[idx] != usize::MAX);
            for idx in w.iter_mut() {
                *idx = remap[*idx];
            }
        }
        for r in self.reason.iter_mut() {
            if let Some(idx) = r {
                debug_assert!(remap[*idx] != usize::MAX);
                *idx = remap[*idx];
            }
        }
        self.max_learned += 500;
    }

    fn is_reason(&self, idx: usize) -> bool {
        let lit = self.clauses[idx].lits[0];
        self.reason[lit_var(lit) as usize] == Some(idx) && self.value(lit) == Assign::True
    }

    // --- assignment and propagation ----------------------------------------

    fn value(&self, l: Lit) -> Assign {
        match self.assign[lit_var(l) as usize] {
            Assign::Unset => Assign::Unset,
            Assign::True => {
                if lit_is_pos(l) {
                    Assign::True
                } else {
                    Assign::False
                }
            }
            Assign::False => {
                if lit_is_pos(l) {
                    Assign::False
                } else {
                    Assign::True
                }
            }
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, l: Lit, reason: Option<usize>) {
        let v = lit_var(l) as usize;
        debug_assert_eq!(self.assign[v], Assign::Unset);
        self.assign[v] = if lit_is_pos(l) { Assign::True } else { Assign::False };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.phase[v] = lit_is_pos(l);
        self.trail.push(l);
    }

    /// Propagates until fixpoint; returns the conflicting clause if any.
    fn propagate(&mut self) -> Option<usize> {
        while self.prop_head < self.trail.len() {
            let l = self.trail[self.prop_head];
            self.prop_head += 1;
            let falsified = lit_neg(l);
            let mut watch_list = std::mem::take(&mut self.watches[falsified as usize]);
            let mut i = 0;
            while i < watch_list.len() {
                let idx = watch_list[i];
                // make sure the falsified literal is at position 1
                let (w0, w1) = {
                    let lits = &mut self.clauses[idx].lits;
                    if lits[0] == falsified {
                        lits.swap(0, 1);
                    }
                    (lits[0], lits[1])
                };
                debug_assert_eq!(w1, falsified);
                if self.value(w0) == Assign::True {
                    i += 1;
                    continue;
                }
                // look for a replacement watch
                let mut replaced = false;
                {
                    let len = self.clauses[idx].lits.len();
                    for k in 2..len {
                        let cand = self.clauses[idx].lits[k];
                        if self.value(cand) != Assign::False {
                            self.clauses[idx].lits.swap(1, k);
                            self.watches[cand as usize].push(idx);
                            watch_list.swap_remove(i);
                            replaced = true;
                            break;
                        }
                    }
                }
                if replaced {
                    continue;
                }
                // clause is unit or conflicting
                if self.value(w0) == Assign::False {
                    self.watches[falsified as usize] = watch_list;
                    // re-register remaining watches we had taken out
                    return Some(idx);
                }
                self.enqueue(w0, Some(idx));
                i += 1;
            }
            self.watches[falsified as usize] = watch_list;
        }
        None
    }

    // --- conflict analysis ---------------------------------------------------

    /// 1UIP analysis. Returns the learned clause (asserting literal first)
    /// and the backjump level.
    fn analyze(&mut self, conflict: usize) -> (Vec<Lit>, u32) {
        let mut learned: Vec<Lit> = vec![0]; // slot 0 for the asserting literal
        let mut counter = 0usize;
        let mut lit: Option<Lit> = None;
        let mut index = self.trail.len();
        let mut clause = conflict;
        let current_level = self.decision_level();

        loop {
            self.bump_clause(clause);
            let start = if lit.is_none() { 0 } else { 1 };
            for k in start..self.clauses[clause].lits.len() {
                let q = self.clauses[clause].lits[k];
                let v = lit_var(q) as usize;
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump_var(v as u32);
                    if self.level[v] >= current_level {
                        counter += 1;
                    } else {
                        learned.push(q);
                    }
                }
            }
            // pick the next trail literal at the current level
            loop {
                index -= 1;
                let l = self.trail[index];
                if self.seen[lit_var(l) as usize] {
                    lit = Some(l);
                    break;
                }
            }
            let v = lit_var(lit.unwrap()) as usize;
            self.seen[v] = false;
            counter -= 1;
            if counter == 0 {
                break;
            }
            clause = self.reason[v].expect("non-decision literal has a reason");
        }
        learned[0] = lit_neg(lit.unwrap());

        // clause minimization: drop literals implied by the rest
        let keep: Vec<Lit> = learned[1..]
            .iter()
            .copied()
            .filter(|&q| !self.redundant(q, &learned))
            .collect();
        let mut result = vec![learned[0]];
        result.extend(keep);

        for &q in &result {
            self.seen[lit_var(q) as usize] = false;
        }
        // also clear any remaining seen flags from minimization bookkeeping
        for &q in &learned {
            self.seen[lit_var(q) as usize] = false;
        }

        let backjump = if result.len() == 1 {
            0
        } else {
            // second-highest level in the clause
            let mut max_i = 1;
            for i in 2..result.len() {
                if self.level[lit_var(result[i]) as usize]
                    > self.level[lit_var(result[max_i]) as usize]
                {
                    max_i = i;
                }
            }
            result.swap(1, max_i);
            self.level[lit_var(result[1]) as usize]
        };
        (result, backjump)
    }

    /// A literal is redundant if its reason clause is fully covered by the
    /// learned clause's other literals (one-step self-subsumption).
    fn redundant(&self, q: Lit, learned: &[Lit]) -> bool {
        let v = lit_var(q) as usize;
        match self.reason[v] {
            None => false,
            Some(r) => self.clauses[r].lits.iter().all(|&l| {
                l == lit_neg(q)
                    || learned.contains(&l)
                    || self.level[lit_var(l) as usize] == 0
            }),
        }
    }

    fn backtrack(&mut self, target: u32) {
        while self.decision_level() > target {
            let limit = self.trail_lim.pop().unwrap();
            while self.trail.len() > limit {
                let l = self.trail.pop().unwrap();
                let v = lit_var(l);
                self.assign[v as usize] = Assign::Unset;
                self.reason[v as usize] = None;
                self.heap_insert(v);
            }
        }
        self.prop_head = self.trail.len();
    }

    // --- main loop -----------------------------------------------------------

    /// Runs the search. `deadline`, when given, bounds the wall time;
    /// expiry raises [`TimedOut`].
    pub fn solve(&mut self, deadline: Option<Instant>) -> Result<Option<Vec<bool>>, TimedOut> {
        if !self.ok {
            return Ok(None);
        }
        if self.propagate().is_some() {
            self.ok = false;
            return Ok(None);
        }
        let mut restart_count = 0u32;
        let mut conflicts_until_restart = 100 * luby(restart_count);
        loop {
            match self.propagate() {
                Some(conflict) => {
                    self.conflicts += 1;
                    if self.decision_level() == 0 {
                        self.ok = false;
                        return Ok(None);
                    }
                    let (learned, backjump) = self.analyze(conflict);
                    self.backtrack(backjump);
                    if learned.len() == 1 {
                        self.enqueue(learned[0], None);
                    } else {
                        let idx = self.attach(learned.clone(), true);
                        self.bump_clause(idx);
                        self.enqueue(learned[0], Some(idx));
                    }
                    self.var_inc *= VAR_DECAY;
                    self.clause_inc *= CLAUSE_DECAY;

                    if self.conflicts % 2048 == 0 {
                        if let Some(d) = deadline {
                            if Instant::now() >= d {
                                return Err(TimedOut);
                            }
                        }
                    }
                    conflicts_until_restart = conflicts_until_restart.saturating_sub(1);
                    if self.learned_count > self.max_learned {
                        self.reduce_learned();
                    }
                }
                None => {
                    if conflicts_until_restart == 0 {
                        restart_count += 1;
                        conflicts_until_restart = 100 * luby(restart_count);
                        self.backtrack(0);
                    }
                    // pick a decision variable
                    let mut decision = None;
                    while let Some(v) = self.heap_pop() {
                        if self.assign[v as usize] == Assign::Unset {
                            decision = Some(v);
                            break;
                        }
                    }
                    match decision {
                        None => {
                            let model = (0..=self.num_vars)
                                .map(|v| self.assign[v] == Assign::True)
                                .collect();
                            return Ok(Some(model));
                        }
                        Some(v) => {
                            self.trail_lim.push(self.trail.len());
                            let lit = if self.phase[v as usize] { 2 * v } else { 2 * v + 1 };
                            self.enqueue(lit, None);
                        }
                    }
                }
            }
        }
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn luby(i: u32) -> u64 {
    // Luby sequence: 1 1 2 1 1 2 4 1 1 2 1 1 2 4 8 ...
    let mut k = 1u32;
    loop {
        if i + 1 == (1 << k) - 1 {
            return 1 << (k - 1);
        }
        if i + 1 < (1 << k) - 1 {
            return luby(i + 1 - (1 << (k - 1)));
        }
        k += 1;
    }
}

/// Solves a CNF. Returns `None` for UNSAT, or a model indexed by variable
/// (positions `1..=num_vars`; index 0 is padding).
pub fn solve_cnf(
    num_vars: usize,
    clauses: &[Vec<i32>],
    seed: u64,
    deadline: Option<Instant>,
) -> Result<Option<Vec<bool>>, TimedOut> {
    let mut solver = Solver::new(num_vars, seed);
    for clause in clauses {
        if !solver.add_clause(clause) {
            return Ok(None);
        }
    }
    solver.solve(deadline)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_model(clauses: &[Vec<i32>], model: &[bool]) {
        for clause in clauses {
            assert!(
                clause.iter().any(|&l| model[l.unsigned_abs() as usize] == (l > 0)),
                "clause {:?} not satisfied",
                clause
            );
        }
    }

    #[test]
    fn trivial_sat_and_unsat() {
        assert!(solve_cnf(1, &[vec![1]], 0, None).unwrap().is_some());
        assert!(solve_cnf(1, &[vec![1], vec![-1]], 0, None).unwrap().is_none());
        assert!(solve_cnf(0, &[], 0, None).unwrap().is_some());
        assert!(solve_cnf(1, &[vec![]], 0, None).unwrap().is_none());
    }

    #[test]
    fn forced_chain() {
        // 1 -> 2 -> 3, 1 asserted, !3 gives UNSAT
        let clauses = vec![vec![-1, 2], vec![-2, 3], vec![1], vec![-3]];
        assert!(solve_cnf(3, &clauses, 0, None).unwrap().is_none());
        let clauses = vec![vec![-1, 2], vec![-2, 3], vec![1]];
        let model = solve_cnf(3, &clauses, 0, None).unwrap().unwrap();
        check_model(&clauses, &model);
        assert!(model[1] && model[2] && model[3]);
    }

    #[test]
    fn pigeonhole_3_into_2_unsat() {
        // p[i][j]: pigeon i in hole j; 3 pigeons, 2 holes
        let var = |i: i32, j: i32| i * 2 + j + 1;
        let mut clauses = Vec::new();
        for i in 0..3 {
            clauses.push(vec![var(i, 0), var(i, 1)]);
        }
        for j in 0..2 {
            for a in 0..3 {
                for b in (a + 1)..3 {
                    clauses.push(vec![-var(a, j), -var(b, j)]);
                }
            }
        }
        assert!(solve_cnf(6, &clauses, 0, None).unwrap().is_none());
    }

    #[test]
    fn random_3sat_agrees_with_brute_force() {
        // deterministic xorshift corpus
        let mut state = 0x2545F4914F6CDD1Du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for round in 0..200 {
            let num_vars = 4 + (next() % 5) as usize; // 4..8
            let num_clauses = 3 + (next() % 25) as usize;
            let clauses: Vec<Vec<i32>> = (0..num_clauses)
                .map(|_| {
                    (0..3)
                        .map(|_| {
                            let v = (next() % num_vars as u64) as i32 + 1;
                            if next() % 2 == 0 {
                                v
                            } else {
                                -v
                            }
                        })
                        .collect()
                })
                .collect();
            // brute force
            let mut brute_sat = false;
            'outer: for bits in 0..(1u32 << num_vars) {
                for clause in &clauses {
                    let ok = clause.iter().any(|&l| {
                        let val = bits & (1 << (l.unsigned_abs() - 1)) != 0;
                        val == (l > 0)
                    });
                    if !ok {
                        continue 'outer;
                    }
                }
                brute_sat = true;
                break;
            }
            let result = solve_cnf(num_vars, &clauses, 0, None).unwrap();
            assert_eq!(result.is_some(), brute_sat, "round {} clauses {:?}", round, clauses);
            if let Some(model) = result {
                check_model(&clauses, &model);
            }
        }
    }

    #[test]
    fn deterministic_across_runs() {
        let clauses = vec![vec![1, 2, 3], vec![-1, -2], vec![-2, -3], vec![2, 3]];
        let a = solve_cnf(3, &clauses, 7, None).unwrap();
        let b = solve_cnf(3, &clauses, 7, None).unwrap();
        assert_eq!(a, b);
    }
}
