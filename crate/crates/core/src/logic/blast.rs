//! Bit-blasting of circuit unrollings and temporal formulas to CNF.
//!
//! Every value is a vector of literals at the circuit width plus one
//! "defined" literal; the undefined value has the defined literal false and
//! unconstrained payload bits. Strict propagation mirrors the simulator
//! clause for clause: any undefined operand makes a result undefined, a
//! zero divisor or an out-of-range bit select or array read is undefined,
//! and a write under a false or undefined guard or index commits nothing.
//! Cycle-0 registers are fresh, defined, and constrained to the domain
//! bounds; later cycles are functional images of cycle 0.

use std::sync::Arc;

use super::bounds::DomainBounds;
use super::cnf::{Cnf, Lit};
use super::TemporalFormula;
use crate::ir::{self, BinOp, Circuit, Expr, UnOp, Value};
use crate::sim::{Layout, Slot, Valuation};

#[derive(Debug, Clone)]
pub struct BitVec {
    pub bits: Vec<Lit>,
    pub defined: Lit,
}

#[derive(Clone)]
struct SymState {
    scalars: Vec<BitVec>,
    /// Per array, per cell.
    arrays: Vec<Vec<BitVec>>,
    /// Wire values at this cycle, indexed like `circuit.wires`.
    wires: Vec<BitVec>,
}

/// A circuit unrolled for `depth` transitions: symbolic states for cycles
/// `0..=depth` over one shared clause set.
pub struct Unrolling<'c> {
    pub cnf: Cnf,
    circuit: &'c Circuit,
    layout: Arc<Layout>,
    states: Vec<SymState>,
    width: u32,
}

impl<'c> Unrolling<'c> {
    pub fn build(circuit: &'c Circuit, depth: u64, bounds: &DomainBounds) -> Unrolling<'c> {
        let layout = Layout::of(circuit);
        let mut u = Unrolling {
            cnf: Cnf::new(),
            circuit,
            layout,
            states: Vec::new(),
            width: circuit.width,
        };
        u.push_initial_state(bounds);
        for _ in 0..depth {
            u.push_transition();
        }
        u
    }

    pub fn depth(&self) -> u64 {
        self.states.len() as u64 - 1
    }

    fn fresh_vec(&mut self, width: u32) -> Vec<Lit> {
        (0..width).map(|_| self.cnf.fresh()).collect()
    }

    fn push_initial_state(&mut self, bounds: &DomainBounds) {
        let t = self.cnf.lit_true();
        let mut scalars = Vec::new();
        let layout = self.layout.clone();
        for (name, width) in &layout.scalars {
            let bits = self.fresh_vec(*width);
            if let Some(r) = bounds.scalars.get(name) {
                self.constrain_range(&bits, r.clone());
            }
            scalars.push(BitVec { bits, defined: t });
        }
        let mut arrays = Vec::new();
        for (name, len, width) in &layout.arrays {
            let mut cells = Vec::new();
            let b = bounds.arrays.get(name);
            for k in 0..*len {
                let enumerated = b.is_none_or(|ab| (k as usize) < ab.enumerated);
                if enumerated {
                    let bits = self.fresh_vec(*width);
                    if let Some(ab) = b {
                        self.constrain_range(&bits, ab.range.clone());
                    }
                    cells.push(BitVec { bits, defined: t });
                } else {
                    let fill = b.map(|ab| ab.fill).unwrap_or(0);
                    let bits = self.cnf.const_vec(fill, *width as usize);
                    cells.push(BitVec { bits, defined: t });
                }
            }
            arrays.push(cells);
        }
        let mut st = SymState {
            scalars,
            arrays,
            wires: Vec::new(),
        };
        st.wires = self.blast_wires(&st);
        self.states.push(st);
    }

    fn constrain_range(&mut self, bits: &[Lit], range: std::ops::RangeInclusive<u64>) {
        let (lo, hi) = (*range.start(), *range.end());
        let max = if bits.len() >= 64 {
            u64::MAX
        } else {
            (1u64 << bits.len()) - 1
        };
        if lo > 0 {
            let lo_bits = self.cnf.const_vec(lo, bits.len());
            let lt = self.cnf.ult_vec(bits, &lo_bits);
            self.cnf.add(vec![!lt]);
        }
        if hi < max {
            let hi_bits = self.cnf.const_vec(hi, bits.len());
            let gt = self.cnf.ult_vec(&hi_bits, bits);
            self.cnf.add(vec![!gt]);
        }
    }

    fn blast_wires(&mut self, st: &SymState) -> Vec<BitVec> {
        let mut wires: Vec<Option<BitVec>> = vec![None; self.circuit.wires.len()];
        for i in ir::wires_in_dependency_order(self.circuit) {
            let expr = self.circuit.wires[i].expr.clone();
            let bv = self.blast_expr_in(&expr, st, &wires);
            wires[i] = Some(bv);
        }
        wires.into_iter().map(|w| w.unwrap()).collect()
    }

    fn push_transition(&mut self) {
        let cur = self.states.last().unwrap().clone();
        let mut next_scalars = cur.scalars.clone();
        let mut next_arrays = cur.arrays.clone();
        let assigns = self.circuit.assigns.clone();
        for a in &assigns {
            let rhs = self.blast_expr_at_state(&a.rhs, &cur);
            let enable = match &a.guard {
                None => self.cnf.lit_true(),
                Some(g) => {
                    let gv = self.blast_expr_at_state(g, &cur);
                    let nz = self.nonzero(&gv);
                    self.cnf.and2(gv.defined, nz)
                }
            };
            match self.layout.slot(&a.target).expect("validated") {
                Slot::Scalar(i) => {
                    let w = self.layout.scalars[i].1 as usize;
                    let committed = BitVec {
                        bits: rhs.bits[..w].to_vec(),
                        defined: rhs.defined,
                    };
                    next_scalars[i] = self.mux_bv(enable, &committed, &cur.scalars[i]);
                }
                Slot::Array(j) => {
                    let ix = self.blast_expr_at_state(a.index.as_ref().unwrap(), &cur);
                    let w = self.layout.arrays[j].2 as usize;
                    let committed = BitVec {
                        bits: rhs.bits[..w].to_vec(),
                        defined: rhs.defined,
                    };
                    let write = self.cnf.and2(enable, ix.defined);
                    for k in 0..next_arrays[j].len() {
                        let kc = self.cnf.const_vec(k as u64, ix.bits.len());
                        let at_k = self.cnf.eq_vec(&ix.bits, &kc);
                        let hit = self.cnf.and2(write, at_k);
                        next_arrays[j][k] = self.mux_bv(hit, &committed, &cur.arrays[j][k]);
                    }
                }
            }
        }
        let mut st = SymState {
            scalars: next_scalars,
            arrays: next_arrays,
            wires: Vec::new(),
        };
        st.wires = self.blast_wires(&st);
        self.states.push(st);
    }

    fn mux_bv(&mut self, c: Lit, t: &BitVec, e: &BitVec) -> BitVec {
        BitVec {
            bits: self.cnf.mux_vec(c, &t.bits, &e.bits),
            defined: self.cnf.mux(c, t.defined, e.defined),
        }
    }

    fn nonzero(&mut self, v: &BitVec) -> Lit {
        self.cnf.or_many(&v.bits)
    }

    /// Defined and nonzero: predicate truth of a value.
    pub fn truthy(&mut self, v: &BitVec) -> Lit {
        let nz = self.nonzero(v);
        self.cnf.and2(v.defined, nz)
    }

    fn extend(&mut self, v: &BitVec) -> BitVec {
        let mut bits = v.bits.clone();
        let f = self.cnf.lit_false();
        while bits.len() < self.width as usize {
            bits.push(f);
        }
        BitVec {
            bits,
            defined: v.defined,
        }
    }

    /// Blasts an expression against the state at cycle `at`.
    pub fn blast_expr(&mut self, e: &Expr, at: u64) -> BitVec {
        let st = self.states[at as usize].clone();
        self.blast_expr_at_state(e, &st)
    }

    fn blast_expr_at_state(&mut self, e: &Expr, st: &SymState) -> BitVec {
        let wires: Vec<Option<BitVec>> = st.wires.iter().cloned().map(Some).collect();
        self.blast_expr_in(e, st, &wires)
    }

    fn blast_expr_in(&mut self, e: &Expr, st: &SymState, wires: &[Option<BitVec>]) -> BitVec {
        let w = self.width as usize;
        match e {
            Expr::Const(Value::Num(n)) => {
                let mask = if w >= 64 { u64::MAX } else { (1u64 << w) - 1 };
                let bits = self.cnf.const_vec(n & mask, w);
                BitVec {
                    bits,
                    defined: self.cnf.lit_true(),
                }
            }
            Expr::Const(Value::Bot) => {
                let bits = self.cnf.const_vec(0, w);
                BitVec {
                    bits,
                    defined: self.cnf.lit_false(),
                }
            }
            Expr::Ref(n) => match self.layout.slot(n) {
                Some(Slot::Scalar(i)) => {
                    let v = st.scalars[i].clone();
                    self.extend(&v)
                }
                Some(Slot::Array(_)) => unreachable!("validated: bare array ref"),
                None => {
                    let wi = self
                        .circuit
                        .wires
                        .iter()
                        .position(|x| x.name == *n)
                        .expect("validated: wire exists");
                    wires[wi].clone().expect("wire order")
                }
            },
            Expr::Unary(op, a) => {
                let av = self.blast_expr_in(a, st, wires);
                let bits = match op {
                    UnOp::Not => {
                        let nz = self.nonzero(&av);
                        let mut bits = self.cnf.const_vec(0, w);
                        bits[0] = !nz;
                        bits
                    }
                    UnOp::BitNot => self.cnf.not_vec(&av.bits),
                    UnOp::Neg => self.cnf.neg_vec(&av.bits),
                };
                BitVec {
                    bits,
                    defined: av.defined,
                }
            }
            Expr::Binary(op, a, b) => {
                let av = self.blast_expr_in(a, st, wires);
                let bv = self.blast_expr_in(b, st, wires);
                self.blast_binop(*op, &av, &bv)
            }
            Expr::Ite(c, t, f) => {
                let cv = self.blast_expr_in(c, st, wires);
                let tv = self.blast_expr_in(t, st, wires);
                let fv = self.blast_expr_in(f, st, wires);
                let cnz = self.nonzero(&cv);
                let bits = self.cnf.mux_vec(cnz, &tv.bits, &fv.bits);
                let d1 = self.cnf.and2(cv.defined, tv.defined);
                let defined = self.cnf.and2(d1, fv.defined);
                BitVec { bits, defined }
            }
            Expr::BitSel(e, h, l) => {
                let ev = self.blast_expr_in(e, st, wires);
                let hv = self.blast_expr_in(h, st, wires);
                let lv = self.blast_expr_in(l, st, wires);
                // (e >> l) & ((1 << (h - l + 1)) - 1), undefined unless
                // l <= h < width.
                let shifted = self.cnf.shift_vec(&ev.bits, &lv.bits, false);
                let span = {
                    let diff = self.cnf.sub_vec(&hv.bits, &lv.bits);
                    let one = self.cnf.const_vec(1, w);
                    self.cnf.add_vec(&diff, &one)
                };
                let one = self.cnf.const_vec(1, w);
                let pow = self.cnf.shift_vec(&one, &span, true);
                let mask = self.cnf.sub_vec(&pow, &one);
                let bits: Vec<Lit> = (0..w).map(|i| self.cnf.and2(shifted[i], mask[i])).collect();
                let h_lt_l = self.cnf.ult_vec(&hv.bits, &lv.bits);
                let wconst = self.cnf.const_vec(self.width as u64, w);
                let h_lt_w = self.cnf.ult_vec(&hv.bits, &wconst);
                let in_range = self.cnf.and2(!h_lt_l, h_lt_w);
                let d1 = self.cnf.and2(ev.defined, hv.defined);
                let d2 = self.cnf.and2(d1, lv.defined);
                let defined = self.cnf.and2(d2, in_range);
                BitVec { bits, defined }
            }
            Expr::ArrayRead(arr, ix) => {
                let Some(Slot::Array(j)) = self.layout.slot(arr) else {
                    unreachable!("validated: array read target")
                };
                let ixv = self.blast_expr_in(ix, st, wires);
                let f = self.cnf.lit_false();
                let zero = self.cnf.const_vec(0, w);
                let mut acc = BitVec {
                    bits: zero,
                    defined: f,
                };
                let cells = st.arrays[j].clone();
                for (k, cell) in cells.iter().enumerate() {
                    let kc = self.cnf.const_vec(k as u64, ixv.bits.len());
                    let at_k = self.cnf.eq_vec(&ixv.bits, &kc);
                    let cell_ext = self.extend(cell);
                    acc = self.mux_bv(at_k, &cell_ext, &acc);
                }
                let defined = self.cnf.and2(ixv.defined, acc.defined);
                BitVec {
                    bits: acc.bits,
                    defined,
                }
            }
        }
    }

    fn bool_result(&mut self, bit: Lit, defined: Lit) -> BitVec {
        let mut bits = self.cnf.const_vec(0, self.width as usize);
        bits[0] = bit;
        BitVec { bits, defined }
    }

    fn blast_binop(&mut self, op: BinOp, a: &BitVec, b: &BitVec) -> BitVec {
        let both = self.cnf.and2(a.defined, b.defined);
        match op {
            BinOp::Add => BitVec {
                bits: self.cnf.add_vec(&a.bits, &b.bits),
                defined: both,
            },
            BinOp::Sub => BitVec {
                bits: self.cnf.sub_vec(&a.bits, &b.bits),
                defined: both,
            },
            BinOp::Mul => BitVec {
                bits: self.cnf.mul_vec(&a.bits, &b.bits),
                defined: both,
            },
            BinOp::Div | BinOp::Mod => {
                let (q, r) = self.cnf.divmod_vec(&a.bits, &b.bits);
                let bnz = self.cnf.or_many(&b.bits);
                let defined = self.cnf.and2(both, bnz);
                BitVec {
                    bits: if op == BinOp::Div { q } else { r },
                    defined,
                }
            }
            BinOp::Eq => {
                let e = self.cnf.eq_vec(&a.bits, &b.bits);
                self.bool_result(e, both)
            }
            BinOp::Ne => {
                let e = self.cnf.eq_vec(&a.bits, &b.bits);
                self.bool_result(!e, both)
            }
            BinOp::Lt => {
                let lt = self.cnf.ult_vec(&a.bits, &b.bits);
                self.bool_result(lt, both)
            }
            BinOp::Gt => {
                let gt = self.cnf.ult_vec(&b.bits, &a.bits);
                self.bool_result(gt, both)
            }
            BinOp::Le => {
                let gt = self.cnf.ult_vec(&b.bits, &a.bits);
                self.bool_result(!gt, both)
            }
            BinOp::Ge => {
                let lt = self.cnf.ult_vec(&a.bits, &b.bits);
                self.bool_result(!lt, both)
            }
            BinOp::And | BinOp::Or | BinOp::Imp | BinOp::Iff => {
                let an = self.cnf.or_many(&a.bits);
                let bn = self.cnf.or_many(&b.bits);
                let bit = match op {
                    BinOp::And => self.cnf.and2(an, bn),
                    BinOp::Or => self.cnf.or2(an, bn),
                    BinOp::Imp => self.cnf.or2(!an, bn),
                    _ => self.cnf.iff2(an, bn),
                };
                self.bool_result(bit, both)
            }
            BinOp::BitAnd => {
                let bits = (0..a.bits.len())
                    .map(|i| self.cnf.and2(a.bits[i], b.bits[i]))
                    .collect();
                BitVec {
                    bits,
                    defined: both,
                }
            }
            BinOp::BitOr => {
                let bits = (0..a.bits.len())
                    .map(|i| self.cnf.or2(a.bits[i], b.bits[i]))
                    .collect();
                BitVec {
                    bits,
                    defined: both,
                }
            }
            BinOp::BitXor => {
                let bits = (0..a.bits.len())
                    .map(|i| self.cnf.xor2(a.bits[i], b.bits[i]))
                    .collect();
                BitVec {
                    bits,
                    defined: both,
                }
            }
            BinOp::Shl => BitVec {
                bits: self.cnf.shift_vec(&a.bits, &b.bits, true),
                defined: both,
            },
            BinOp::Shr => BitVec {
                bits: self.cnf.shift_vec(&a.bits, &b.bits, false),
                defined: both,
            },
        }
    }

    /// One literal that is true exactly when the formula holds at cycle
    /// `at` of the unrolling. The formula's reach from `at` must fit the
    /// built depth; `Always` is not blast-able.
    pub fn blast_formula(&mut self, f: &TemporalFormula, at: u64) -> Lit {
        use TemporalFormula::*;
        match f {
            Atom(e) => {
                let v = self.blast_expr(e, at);
                self.truthy(&v)
            }
            Next(g) => self.blast_formula(g, at + 1),
            Future(k, g) => {
                let lits: Vec<Lit> = (0..*k as u64)
                    .map(|j| self.blast_formula(g, at + j))
                    .collect();
                self.cnf.and_many(&lits)
            }
            Always(_) => panic!("unbounded always cannot be unrolled"),
            Not(g) => !self.blast_formula(g, at),
            And(x, y) => {
                let a = self.blast_formula(x, at);
                let b = self.blast_formula(y, at);
                self.cnf.and2(a, b)
            }
            Or(x, y) => {
                let a = self.blast_formula(x, at);
                let b = self.blast_formula(y, at);
                self.cnf.or2(a, b)
            }
            Implies(x, y) => {
                let a = self.blast_formula(x, at);
                let b = self.blast_formula(y, at);
                self.cnf.or2(!a, b)
            }
            Iff(x, y) => {
                let a = self.blast_formula(x, at);
                let b = self.blast_formula(y, at);
                self.cnf.iff2(a, b)
            }
        }
    }

    /// Number of distinct symbolic instances of a scalar register across
    /// the unrolling (one per cycle).
    pub fn instance_count(&self, name: &str) -> usize {
        match self.layout.slot(name) {
            Some(Slot::Scalar(_)) => self.states.len(),
            _ => 0,
        }
    }

    /// Pins a scalar register at one cycle to a concrete value.
    pub fn pin(&mut self, name: &str, cycle: u64, value: u64) {
        let Some(Slot::Scalar(i)) = self.layout.slot(name) else {
            panic!("pin target {name} is not a scalar");
        };
        let bv = self.states[cycle as usize].scalars[i].clone();
        let kc = self.cnf.const_vec(value, bv.bits.len());
        let eq = self.cnf.eq_vec(&bv.bits, &kc);
        let both = self.cnf.and2(eq, bv.defined);
        self.cnf.add(vec![both]);
    }

    /// Reads one cycle's state out of a satisfying assignment.
    pub fn decode_state(&self, model: &impl Fn(Lit) -> bool, cycle: u64) -> Valuation {
        let st = &self.states[cycle as usize];
        let mut mu = Valuation::zeroed(&self.layout);
        let read = |bv: &BitVec| -> Value {
            if !model(bv.defined) {
                return Value::Bot;
            }
            let mut v = 0u64;
            for (i, &l) in bv.bits.iter().enumerate() {
                if model(l) {
                    v |= 1 << i;
                }
            }
            Value::Num(v)
        };
        for (i, (name, _)) in self.layout.scalars.clone().iter().enumerate() {
            mu.try_set(name, read(&st.scalars[i])).unwrap();
        }
        for (j, (name, len, _)) in self.layout.arrays.clone().iter().enumerate() {
            for k in 0..*len {
                mu.try_set_cell(name, k, read(&st.arrays[j][k as usize]))
                    .unwrap();
            }
        }
        mu
    }
}
