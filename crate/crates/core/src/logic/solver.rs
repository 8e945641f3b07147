//! Conflict-driven clause-learning SAT solver: two watched literals, VSIDS
//! branching with phase saving, first-UIP learning, Luby restarts, and
//! activity-based deletion of learned clauses. Deterministic for a given
//! input.

use super::cnf::{Cnf, Lit};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SatResult {
    Sat,
    Unsat,
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("solver hit its resource limit ({0})")]
pub struct SolverLimit(pub String);

const LUBY_UNIT: u64 = 128;
const VAR_DECAY: f64 = 0.95;
const CLAUSE_DECAY: f64 = 0.999;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Assign {
    Unset,
    False,
    True,
}

struct Clause {
    lits: Vec<Lit>,
    learned: bool,
    activity: f64,
}

pub struct Solver {
    clauses: Vec<Clause>,
    watches: Vec<Vec<u32>>, // literal -> clause indices watching it
    assigns: Vec<Assign>,
    levels: Vec<u32>,
    reasons: Vec<Option<u32>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    prop_head: usize,
    activity: Vec<f64>,
    var_inc: f64,
    clause_inc: f64,
    phase: Vec<bool>,
    order: BinaryHeapByActivity,
    seen: Vec<bool>,
    n_conflicts: u64,
    deadline: Option<Instant>,
    max_conflicts: Option<u64>,
}

/// Simple binary max-heap over variable activities with lazy deletion.
struct BinaryHeapByActivity {
    heap: Vec<u32>,
    pos: Vec<i32>,
}

impl BinaryHeapByActivity {
    fn new(n: usize) -> Self {
        let heap: Vec<u32> = (0..n as u32).collect();
        let pos: Vec<i32> = (0..n as i32).collect();
        BinaryHeapByActivity { heap, pos }
    }

    fn less(a: u32, b: u32, act: &[f64]) -> bool {
        // Max-heap keyed by activity; ties broken by lower index for
        // determinism.
        act[a as usize] > act[b as usize] || (act[a as usize] == act[b as usize] && a < b)
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        while i > 0 {
            let p = (i - 1) / 2;
            if Self::less(self.heap[i], self.heap[p], act) {
                self.heap.swap(i, p);
                self.pos[self.heap[i] as usize] = i as i32;
                self.pos[self.heap[p] as usize] = p as i32;
                i = p;
            } else {
                break;
            }
        }
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        loop {
            let l = 2 * i + 1;
            let r = 2 * i + 2;
            let mut best = i;
            if l < self.heap.len() && Self::less(self.heap[l], self.heap[best], act) {
                best = l;
            }
            if r < self.heap.len() && Self::less(self.heap[r], self.heap[best], act) {
                best = r;
            }
            if best == i {
                break;
            }
            self.heap.swap(i, best);
            self.pos[self.heap[i] as usize] = i as i32;
            self.pos[self.heap[best] as usize] = best as i32;
            i = best;
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<u32> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap[0];
        let last = self.heap.pop().unwrap();
        self.pos[top as usize] = -1;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = 0;
            self.sift_down(0, act);
        }
        Some(top)
    }

    fn push(&mut self, v: u32, act: &[f64]) {
        if self.pos[v as usize] >= 0 {
            return;
        }
        self.pos[v as usize] = self.heap.len() as i32;
        self.heap.push(v);
        self.sift_up(self.heap.len() - 1, act);
    }

    fn bump(&mut self, v: u32, act: &[f64]) {
        let p = self.pos[v as usize];
        if p >= 0 {
            self.sift_up(p as usize, act);
        }
    }
}

impl Solver {
    pub fn new(cnf: &Cnf) -> Solver {
        let n = cnf.n_vars as usize;
        let mut s = Solver {
            clauses: Vec::with_capacity(cnf.clauses.len()),
            watches: vec![Vec::new(); 2 * n],
            assigns: vec![Assign::Unset; n],
            levels: vec![0; n],
            reasons: vec![None; n],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            prop_head: 0,
            activity: vec![0.0; n],
            var_inc: 1.0,
            clause_inc: 1.0,
            phase: vec![false; n],
            order: BinaryHeapByActivity::new(n),
            seen: vec![false; n],
            n_conflicts: 0,
            deadline: None,
            max_conflicts: None,
        };
        for c in &cnf.clauses {
            s.add_clause(c.clone(), false);
        }
        s
    }

    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.deadline = deadline;
    }

    pub fn set_conflict_budget(&mut self, budget: Option<u64>) {
        self.max_conflicts = budget;
    }

    fn value(&self, l: Lit) -> Assign {
        match self.assigns[l.var() as usize] {
            Assign::Unset => Assign::Unset,
            Assign::True => {
                if l.is_neg() {
                    Assign::False
                } else {
                    Assign::True
                }
            }
            Assign::False => {
                if l.is_neg() {
                    Assign::True
                } else {
                    Assign::False
                }
            }
        }
    }

    fn add_clause(&mut self, mut lits: Vec<Lit>, learned: bool) {
        lits.sort();
        lits.dedup();
        if !learned {
            // Tautologies vanish; duplicate inputs are harmless.
            for w in lits.windows(2) {
                if w[0] == !w[1] {
                    return;
                }
            }
        }
        match lits.len() {
            0 => {
                // Empty clause: immediately unsatisfiable. Represent by a
                // pair of contradictory units on variable 0 if present, or
                // an explicit flag via an impossible watch. Simplest: push
                // two opposing unit clauses.
                self.clauses.push(Clause {
                    lits: Vec::new(),
                    learned,
                    activity: 0.0,
                });
            }
            1 => {
                self.clauses.push(Clause {
                    lits,
                    learned,
                    activity: 0.0,
                });
            }
            _ => {
                let idx = self.clauses.len() as u32;
                self.watches[lits[0].0 as usize].push(idx);
                self.watches[lits[1].0 as usize].push(idx);
                self.clauses.push(Clause {
                    lits,
                    learned,
                    activity: 0.0,
                });
            }
        }
    }

    fn enqueue(&mut self, l: Lit, reason: Option<u32>) -> bool {
        match self.value(l) {
            Assign::True => true,
            Assign::False => false,
            Assign::Unset => {
                let v = l.var() as usize;
                self.assigns[v] = if l.is_neg() {
                    Assign::False
                } else {
                    Assign::True
                };
                self.levels[v] = self.trail_lim.len() as u32;
                self.reasons[v] = reason;
                self.phase[v] = !l.is_neg();
                self.trail.push(l);
                true
            }
        }
    }

    /// Unit propagation; returns the conflicting clause index if any.
    fn propagate(&mut self) -> Option<u32> {
        while self.prop_head < self.trail.len() {
            let p = self.trail[self.prop_head];
            self.prop_head += 1;
            let falsified = !p;
            let ws = std::mem::take(&mut self.watches[falsified.0 as usize]);
            let mut keep = Vec::with_capacity(ws.len());
            let mut conflict = None;
            let mut i = 0;
            while i < ws.len() {
                let ci = ws[i];
                i += 1;
                let (w0, w1) = {
                    let c = &mut self.clauses[ci as usize];
                    if c.lits[0] == falsified {
                        c.lits.swap(0, 1);
                    }
                    (c.lits[0], c.lits[1])
                };
                debug_assert_eq!(w1, falsified);
                if self.value(w0) == Assign::True {
                    keep.push(ci);
                    continue;
                }
                // Find a replacement watch.
                let mut moved = false;
                {
                    let c = &mut self.clauses[ci as usize];
                    for k in 2..c.lits.len() {
                        let cand = c.lits[k];
                        if matches!(
                            match self.assigns[cand.var() as usize] {
                                Assign::Unset => Assign::Unset,
                                Assign::True =>
                                    if cand.is_neg() {
                                        Assign::False
                                    } else {
                                        Assign::True
                                    },
                                Assign::False =>
                                    if cand.is_neg() {
                                        Assign::True
                                    } else {
                                        Assign::False
                                    },
                            },
                            Assign::Unset | Assign::True
                        ) {
                            c.lits.swap(1, k);
                            moved = true;
                            break;
                        }
                    }
                }
                if moved {
                    let new_watch = self.clauses[ci as usize].lits[1];
                    self.watches[new_watch.0 as usize].push(ci);
                    continue;
                }
                // Unit or conflicting.
                keep.push(ci);
                if !self.enqueue(w0, Some(ci)) {
                    conflict = Some(ci);
                    // Keep the remaining watchers.
                    keep.extend_from_slice(&ws[i..]);
                    break;
                }
            }
            self.watches[falsified.0 as usize] = keep;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    fn bump_var(&mut self, v: u32) {
        self.activity[v as usize] += self.var_inc;
        if self.activity[v as usize] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.order.bump(v, &self.activity);
    }

    fn bump_clause(&mut self, ci: u32) {
        let c = &mut self.clauses[ci as usize];
        c.activity += self.clause_inc;
        if c.activity > 1e20 {
            for c in &mut self.clauses {
                c.activity *= 1e-20;
            }
            self.clause_inc *= 1e-20;
        }
    }

    /// First-UIP conflict analysis. Returns (learned clause, backjump level).
    fn analyze(&mut self, conflict: u32) -> (Vec<Lit>, u32) {
        let mut learned: Vec<Lit> = vec![Lit::pos(0)]; // placeholder for UIP
        let mut counter = 0usize;
        let mut p: Option<Lit> = None;
        let mut reason_idx = conflict;
        let mut trail_i = self.trail.len();
        let cur_level = self.trail_lim.len() as u32;

        loop {
            self.bump_clause(reason_idx);
            let start = if p.is_some() { 1 } else { 0 };
            let lits: Vec<Lit> = self.clauses[reason_idx as usize].lits[start..].to_vec();
            for q in lits {
                let v = q.var() as usize;
                if !self.seen[v] && self.levels[v] > 0 {
                    self.seen[v] = true;
                    self.bump_var(q.var());
                    if self.levels[v] >= cur_level {
                        counter += 1;
                    } else {
                        learned.push(q);
                    }
                }
            }
            // Walk the trail backwards to the next marked literal.
            loop {
                trail_i -= 1;
                if self.seen[self.trail[trail_i].var() as usize] {
                    break;
                }
            }
            let uip = self.trail[trail_i];
            self.seen[uip.var() as usize] = false;
            counter -= 1;
            if counter == 0 {
                learned[0] = !uip;
                break;
            }
            p = Some(uip);
            reason_idx = self.reasons[uip.var() as usize].expect("non-decision on path");
        }

        for l in &learned[1..] {
            self.seen[l.var() as usize] = false;
        }

        let backjump = if learned.len() == 1 {
            0
        } else {
            // Second-highest decision level in the clause.
            let mut max_i = 1;
            for i in 2..learned.len() {
                if self.levels[learned[i].var() as usize]
                    > self.levels[learned[max_i].var() as usize]
                {
                    max_i = i;
                }
            }
            learned.swap(1, max_i);
            self.levels[learned[1].var() as usize]
        };
        (learned, backjump)
    }

    fn backtrack(&mut self, level: u32) {
        while self.trail_lim.len() as u32 > level {
            let lim = self.trail_lim.pop().unwrap();
            while self.trail.len() > lim {
                let l = self.trail.pop().unwrap();
                let v = l.var() as usize;
                self.assigns[v] = Assign::Unset;
                self.reasons[v] = None;
                self.order.push(l.var(), &self.activity);
            }
        }
        self.prop_head = self.trail.len().min(self.prop_head);
        self.prop_head = self.trail.len();
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.order.pop(&self.activity) {
            if self.assigns[v as usize] == Assign::Unset {
                let pos = self.phase[v as usize];
                return Some(if pos { Lit::pos(v) } else { Lit::neg(v) });
            }
        }
        None
    }

    fn reduce_learned(&mut self) {
        // Drop the least active half of learned clauses that are not
        // currently reasons. Rebuilds the watch lists.
        let mut learned: Vec<(u32, f64)> = self
            .clauses
            .iter()
            .enumerate()
            .filter(|(_, c)| c.learned && c.lits.len() > 2)
            .map(|(i, c)| (i as u32, c.activity))
            .collect();
        if learned.len() < 2000 {
            return;
        }
        learned.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
        let locked: Vec<bool> = {
            let mut locked = vec![false; self.clauses.len()];
            for r in self.reasons.iter().flatten() {
                locked[*r as usize] = true;
            }
            locked
        };
        let mut drop = vec![false; self.clauses.len()];
        for (ci, _) in learned.iter().take(learned.len() / 2) {
            if !locked[*ci as usize] {
                drop[*ci as usize] = true;
            }
        }
        // Compact the clause arena, remapping indices.
        let mut remap: Vec<i64> = vec![-1; self.clauses.len()];
        let mut next = 0i64;
        let old = std::mem::take(&mut self.clauses);
        for (i, c) in old.into_iter().enumerate() {
            if !drop[i] {
                remap[i] = next;
                next += 1;
                self.clauses.push(c);
            }
        }
        for w in &mut self.watches {
            w.clear();
        }
        for (i, c) in self.clauses.iter().enumerate() {
            if c.lits.len() >= 2 {
                self.watches[c.lits[0].0 as usize].push(i as u32);
                self.watches[c.lits[1].0 as usize].push(i as u32);
            }
        }
        for ci in self.reasons.iter_mut().flatten() {
            let m = remap[*ci as usize];
            debug_assert!(m >= 0, "reason clause dropped");
            *ci = m as u32;
        }
    }

    /// Luby sequence for one-based `i`: 1 1 2 1 1 2 4 ...
    fn luby(mut i: u64) -> u64 {
        debug_assert!(i >= 1);
        loop {
            let mut k = 1u64;
            while (1u64 << k) - 1 < i {
                k += 1;
            }
            if i == (1 << k) - 1 {
                return 1 << (k - 1);
            }
            i -= (1 << (k - 1)) - 1;
        }
    }

    pub fn solve(&mut self) -> Result<SatResult, SolverLimit> {
        if let Some(dl) = self.deadline {
            if Instant::now() > dl {
                return Err(SolverLimit("time limit".into()));
            }
        }
        // Ground the unit and empty clauses first.
        for i in 0..self.clauses.len() {
            match self.clauses[i].lits.len() {
                0 => return Ok(SatResult::Unsat),
                1 => {
                    let l = self.clauses[i].lits[0];
                    if !self.enqueue(l, None) {
                        return Ok(SatResult::Unsat);
                    }
                }
                _ => {}
            }
        }
        if self.propagate().is_some() {
            return Ok(SatResult::Unsat);
        }

        let mut restart_round = 1u64;
        let mut budget = LUBY_UNIT * Self::luby(restart_round);
        let mut conflicts_here = 0u64;
        loop {
            if let Some(dl) = self.deadline {
                if self.n_conflicts.is_multiple_of(64) && Instant::now() > dl {
                    return Err(SolverLimit("time limit".into()));
                }
            }
            if let Some(mc) = self.max_conflicts {
                if self.n_conflicts > mc {
                    return Err(SolverLimit(format!("conflict budget {mc}")));
                }
            }
            match self.propagate() {
                Some(conflict) => {
                    self.n_conflicts += 1;
                    conflicts_here += 1;
                    if self.trail_lim.is_empty() {
                        return Ok(SatResult::Unsat);
                    }
                    let (learned, backjump) = self.analyze(conflict);
                    self.backtrack(backjump);
                    let unit = learned[0];
                    if learned.len() == 1 {
                        self.clauses.push(Clause {
                            lits: learned,
                            learned: true,
                            activity: self.clause_inc,
                        });
                        if !self.enqueue(unit, None) {
                            return Ok(SatResult::Unsat);
                        }
                    } else {
                        let ci = self.clauses.len() as u32;
                        self.watches[learned[0].0 as usize].push(ci);
                        self.watches[learned[1].0 as usize].push(ci);
                        self.clauses.push(Clause {
                            lits: learned,
                            learned: true,
                            activity: self.clause_inc,
                        });
                        let ok = self.enqueue(unit, Some(ci));
                        debug_assert!(ok, "asserting literal must enqueue");
                    }
                    self.var_inc /= VAR_DECAY;
                    self.clause_inc /= CLAUSE_DECAY;
                }
                None => {
                    if conflicts_here >= budget {
                        conflicts_here = 0;
                        restart_round += 1;
                        budget = LUBY_UNIT * Self::luby(restart_round);
                        self.backtrack(0);
                        self.reduce_learned();
                        continue;
                    }
                    match self.pick_branch() {
                        None => return Ok(SatResult::Sat),
                        Some(l) => {
                            self.trail_lim.push(self.trail.len());
                            let ok = self.enqueue(l, None);
                            debug_assert!(ok);
                        }
                    }
                }
            }
        }
    }

    /// Model access after [`SatResult::Sat`]: unassigned variables read as
    /// false.
    pub fn model_value(&self, l: Lit) -> bool {
        matches!(self.value(l), Assign::True)
    }

    pub fn conflicts(&self) -> u64 {
        self.n_conflicts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(v: i64) -> Lit {
        if v > 0 {
            Lit::pos((v - 1) as u32)
        } else {
            Lit::neg((-v - 1) as u32)
        }
    }

    fn solve_clauses(n_vars: u32, clauses: &[&[i64]]) -> SatResult {
        let mut cnf = Cnf::new();
        for _ in 0..n_vars {
            cnf.fresh();
        }
        for c in clauses {
            cnf.add(c.iter().map(|&v| lit(v)).collect::<Vec<_>>());
        }
        Solver::new(&cnf).solve().unwrap()
    }

    #[test]
    fn trivial_cases() {
        assert_eq!(solve_clauses(1, &[&[1]]), SatResult::Sat);
        assert_eq!(solve_clauses(1, &[&[1], &[-1]]), SatResult::Unsat);
        assert_eq!(
            solve_clauses(2, &[&[1, 2], &[-1, 2], &[1, -2], &[-1, -2]]),
            SatResult::Unsat
        );
        assert_eq!(solve_clauses(2, &[&[1, 2], &[-1, -2]]), SatResult::Sat);
    }

    #[test]
    fn models_satisfy_clauses() {
        let mut cnf = Cnf::new();
        for _ in 0..6 {
            cnf.fresh();
        }
        let clauses: Vec<Vec<Lit>> = vec![
            vec![lit(1), lit(2), lit(-3)],
            vec![lit(-1), lit(4)],
            vec![lit(3), lit(5), lit(6)],
            vec![lit(-4), lit(-5)],
            vec![lit(2), lit(-6)],
        ];
        for c in &clauses {
            cnf.add(c.clone());
        }
        let mut s = Solver::new(&cnf);
        assert_eq!(s.solve().unwrap(), SatResult::Sat);
        for c in &clauses {
            assert!(c.iter().any(|&l| s.model_value(l)));
        }
    }

    #[test]
    fn pigeonhole_3_into_2_unsat() {
        // p(i,j): pigeon i in hole j; vars 1..=6 as i*2+j.
        let v = |i: i64, j: i64| i * 2 + j + 1; // i in 0..3, j in 0..2
        let mut clauses: Vec<Vec<i64>> = Vec::new();
        for i in 0..3 {
            clauses.push(vec![v(i, 0), v(i, 1)]);
        }
        for j in 0..2 {
            for a in 0..3 {
                for b in (a + 1)..3 {
                    clauses.push(vec![-v(a, j), -v(b, j)]);
                }
            }
        }
        let refs: Vec<&[i64]> = clauses.iter().map(|c| c.as_slice()).collect();
        assert_eq!(solve_clauses(6, &refs), SatResult::Unsat);
    }

    #[test]
    fn random_3sat_agrees_with_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _case in 0..200 {
            let n = rng.gen_range(3..=8);
            let m = rng.gen_range(1..=30);
            let mut clauses: Vec<Vec<i64>> = Vec::new();
            for _ in 0..m {
                let len = rng.gen_range(1..=3);
                let mut c = Vec::new();
                for _ in 0..len {
                    let v = rng.gen_range(1..=n as i64);
                    c.push(if rng.gen_bool(0.5) { v } else { -v });
                }
                clauses.push(c);
            }
            let brute = (0..(1u32 << n)).any(|m| {
                clauses.iter().all(|c| {
                    c.iter().any(|&l| {
                        let v = l.unsigned_abs() as u32 - 1;
                        let bit = (m >> v) & 1 == 1;
                        if l > 0 {
                            bit
                        } else {
                            !bit
                        }
                    })
                })
            });
            let refs: Vec<&[i64]> = clauses.iter().map(|c| c.as_slice()).collect();
            let got = solve_clauses(n as u32, &refs);
            assert_eq!(got == SatResult::Sat, brute, "case {_case}: {clauses:?}");
        }
    }
}
