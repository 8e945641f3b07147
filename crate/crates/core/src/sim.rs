//! Executable circuit semantics: expression evaluation, one-cycle stepping,
//! n-step runs, and output-projected (optionally filtered) trace prefixes.
//!
//! All assignment right-hand sides are evaluated against the pre-state and
//! committed atomically, so assignment order never matters. Wires are
//! evaluated at most once per cycle, in dependency order.

use std::collections::HashMap;
use std::sync::Arc;

use crate::ir::{self, Assign, BinOp, Circuit, Expr, UnOp, Value};
use crate::textio::{TraceDump, TraceKind, TraceRow};

/// Where a name lives in a [`Layout`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Scalar(usize),
    Array(usize),
}

/// Register storage layout for one circuit: scalars in declaration order,
/// then arrays in declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub scalars: Vec<(String, u32)>,
    pub arrays: Vec<(String, u64, u32)>,
    index: HashMap<String, Slot>,
}

impl Layout {
    pub fn of(c: &Circuit) -> Arc<Layout> {
        let mut scalars = Vec::new();
        let mut arrays = Vec::new();
        let mut index = HashMap::new();
        for d in &c.decls {
            match d.array_len {
                None => {
                    index.insert(d.name.clone(), Slot::Scalar(scalars.len()));
                    scalars.push((d.name.clone(), d.width));
                }
                Some(len) => {
                    index.insert(d.name.clone(), Slot::Array(arrays.len()));
                    arrays.push((d.name.clone(), len, d.width));
                }
            }
        }
        Arc::new(Layout {
            scalars,
            arrays,
            index,
        })
    }

    pub fn slot(&self, name: &str) -> Option<Slot> {
        self.index.get(name).copied()
    }
}

/// One simulation state: a total map from declared registers to values.
#[derive(Debug, Clone)]
pub struct Valuation {
    layout: Arc<Layout>,
    scalars: Vec<Value>,
    arrays: Vec<Vec<Value>>,
}

impl PartialEq for Valuation {
    fn eq(&self, other: &Self) -> bool {
        self.layout == other.layout && self.scalars == other.scalars && self.arrays == other.arrays
    }
}
impl Eq for Valuation {}

impl Valuation {
    /// All registers defined and zero.
    pub fn zeroed(layout: &Arc<Layout>) -> Valuation {
        Valuation {
            layout: layout.clone(),
            scalars: vec![Value::Num(0); layout.scalars.len()],
            arrays: layout
                .arrays
                .iter()
                .map(|(_, len, _)| vec![Value::Num(0); *len as usize])
                .collect(),
        }
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    pub fn get(&self, name: &str) -> Option<Value> {
        match self.layout.slot(name)? {
            Slot::Scalar(i) => Some(self.scalars[i]),
            Slot::Array(_) => None,
        }
    }

    pub fn get_cell(&self, name: &str, idx: u64) -> Option<Value> {
        match self.layout.slot(name)? {
            Slot::Array(i) => self.arrays[i].get(idx as usize).copied(),
            Slot::Scalar(_) => None,
        }
    }

    pub fn cells(&self, name: &str) -> Option<&[Value]> {
        match self.layout.slot(name)? {
            Slot::Array(i) => Some(&self.arrays[i]),
            Slot::Scalar(_) => None,
        }
    }

    pub fn try_set(&mut self, name: &str, v: Value) -> Result<(), String> {
        match self.layout.slot(name) {
            Some(Slot::Scalar(i)) => {
                if let Value::Num(n) = v {
                    let w = self.layout.scalars[i].1;
                    if n >= (1u64 << w) {
                        return Err(format!("value {n} does not fit register {name} ({w} bits)"));
                    }
                }
                self.scalars[i] = v;
                Ok(())
            }
            Some(Slot::Array(_)) => Err(format!("{name} is an array, use try_set_cell")),
            None => Err(format!("unknown register {name}")),
        }
    }

    pub fn try_set_cell(&mut self, name: &str, idx: u64, v: Value) -> Result<(), String> {
        match self.layout.slot(name) {
            Some(Slot::Array(i)) => {
                let (_, len, w) = self.layout.arrays[i];
                if idx >= len {
                    return Err(format!("index {idx} out of range for {name}[{len}]"));
                }
                if let Value::Num(n) = v {
                    if n >= (1u64 << w) {
                        return Err(format!("value {n} does not fit {name} cells ({w} bits)"));
                    }
                }
                self.arrays[i][idx as usize] = v;
                Ok(())
            }
            Some(Slot::Scalar(_)) => Err(format!("{name} is a scalar")),
            None => Err(format!("unknown register {name}")),
        }
    }

    pub fn set(&mut self, name: &str, v: u64) -> &mut Self {
        self.try_set(name, Value::Num(v)).unwrap();
        self
    }

    pub fn set_cell(&mut self, name: &str, idx: u64, v: u64) -> &mut Self {
        self.try_set_cell(name, idx, Value::Num(v)).unwrap();
        self
    }

    pub fn set_value(&mut self, name: &str, v: Value) -> &mut Self {
        self.try_set(name, v).unwrap();
        self
    }

    /// Do the two valuations agree on every register in `names`? Arrays are
    /// compared cell-wise.
    pub fn agrees_on<'a>(
        &self,
        other: &Valuation,
        names: impl IntoIterator<Item = &'a str>,
    ) -> bool {
        names.into_iter().all(|n| match self.layout.slot(n) {
            Some(Slot::Scalar(i)) => self.scalars[i] == other.scalars[i],
            Some(Slot::Array(i)) => self.arrays[i] == other.arrays[i],
            None => false,
        })
    }
}

/// Compiled expression over layout slots. Wire references index into the
/// per-cycle scratch table.
#[derive(Debug, Clone)]
enum CExpr {
    Const(Value),
    Reg(usize),
    Wire(usize),
    Unary(UnOp, Box<CExpr>),
    Binary(BinOp, Box<CExpr>, Box<CExpr>),
    Ite(Box<CExpr>, Box<CExpr>, Box<CExpr>),
    BitSel(Box<CExpr>, Box<CExpr>, Box<CExpr>),
    ArrayRead(usize, Box<CExpr>),
}

#[derive(Debug, Clone)]
struct CAssign {
    slot: Slot,
    index: Option<CExpr>,
    rhs: CExpr,
    guard: Option<CExpr>,
    mask: u64,
}

#[derive(Debug, Clone)]
enum OutSrc {
    Scalar(usize),
    Wire(usize),
}

/// A circuit prepared for simulation. Construction validates the circuit
/// (copy-tagged names are permitted so product circuits simulate too).
pub struct Sim<'c> {
    pub circuit: &'c Circuit,
    layout: Arc<Layout>,
    wire_slots: HashMap<String, usize>,
    wires_topo: Vec<(usize, CExpr)>,
    assigns: Vec<CAssign>,
    outputs: Vec<(String, OutSrc)>,
    mask: u64,
}

impl<'c> Sim<'c> {
    pub fn try_new(circuit: &'c Circuit) -> Result<Sim<'c>, ir::Diagnostics> {
        let diags = ir::validate_allowing_copy_tags(circuit);
        if !diags.is_empty() {
            return Err(diags);
        }
        let layout = Layout::of(circuit);

        // Wire slots in topological (dependency-first) order.
        let wire_slots: HashMap<String, usize> = {
            let mut slots = HashMap::new();
            let mut order: Vec<&str> = Vec::new();
            let wire_map: HashMap<&str, &Expr> = circuit
                .wires
                .iter()
                .map(|w| (w.name.as_str(), &w.expr))
                .collect();
            fn visit<'a>(
                n: &'a str,
                wire_map: &HashMap<&'a str, &'a Expr>,
                order: &mut Vec<&'a str>,
                done: &mut HashMap<&'a str, bool>,
            ) {
                if done.contains_key(n) {
                    return;
                }
                done.insert(n, true);
                let mut refs = std::collections::BTreeSet::new();
                wire_map[n].idents(&mut refs);
                for r in &refs {
                    if let Some((k, _)) = wire_map.get_key_value(r.as_str()) {
                        visit(k, wire_map, order, done);
                    }
                }
                order.push(n);
            }
            let mut done = HashMap::new();
            for w in &circuit.wires {
                visit(w.name.as_str(), &wire_map, &mut order, &mut done);
            }
            for (i, n) in order.iter().enumerate() {
                slots.insert(n.to_string(), i);
            }
            slots
        };

        let mut sim = Sim {
            circuit,
            layout,
            wire_slots,
            wires_topo: Vec::new(),
            assigns: Vec::new(),
            outputs: Vec::new(),
            mask: mask_of(circuit.width),
        };

        let mut wires_topo: Vec<(usize, CExpr)> =
            vec![(0, CExpr::Const(Value::Bot)); circuit.wires.len()];
        for w in &circuit.wires {
            let slot = sim.wire_slots[&w.name];
            wires_topo[slot] = (slot, sim.compile(&w.expr));
        }
        sim.wires_topo = wires_topo;

        sim.assigns = circuit
            .assigns
            .iter()
            .map(|a| sim.compile_assign(a))
            .collect();

        sim.outputs = circuit
            .outputs
            .iter()
            .map(|o| {
                let src = match sim.layout.slot(o) {
                    Some(Slot::Scalar(i)) => OutSrc::Scalar(i),
                    _ => OutSrc::Wire(sim.wire_slots[o]),
                };
                (o.clone(), src)
            })
            .collect();

        Ok(sim)
    }

    pub fn new(circuit: &'c Circuit) -> Sim<'c> {
        Sim::try_new(circuit).unwrap_or_else(|d| panic!("circuit {} invalid:\n{d}", circuit.name))
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    pub fn zeroed(&self) -> Valuation {
        Valuation::zeroed(&self.layout)
    }

    fn compile(&self, e: &Expr) -> CExpr {
        match e {
            // Constants live in the circuit's value domain.
            Expr::Const(Value::Num(n)) => CExpr::Const(Value::Num(n & self.mask)),
            Expr::Const(Value::Bot) => CExpr::Const(Value::Bot),
            Expr::Ref(n) => match self.layout.slot(n) {
                Some(Slot::Scalar(i)) => CExpr::Reg(i),
                Some(Slot::Array(_)) => unreachable!("validated: bare array ref"),
                None => CExpr::Wire(self.wire_slots[n]),
            },
            Expr::Unary(op, a) => CExpr::Unary(*op, Box::new(self.compile(a))),
            Expr::Binary(op, a, b) => {
                CExpr::Binary(*op, Box::new(self.compile(a)), Box::new(self.compile(b)))
            }
            Expr::Ite(c, t, f) => CExpr::Ite(
                Box::new(self.compile(c)),
                Box::new(self.compile(t)),
                Box::new(self.compile(f)),
            ),
            Expr::BitSel(e, h, l) => CExpr::BitSel(
                Box::new(self.compile(e)),
                Box::new(self.compile(h)),
                Box::new(self.compile(l)),
            ),
            Expr::ArrayRead(a, ix) => {
                let Slot::Array(slot) = self.layout.slot(a).expect("validated") else {
                    unreachable!("validated: indexed scalar")
                };
                CExpr::ArrayRead(slot, Box::new(self.compile(ix)))
            }
        }
    }

    fn compile_assign(&self, a: &Assign) -> CAssign {
        let slot = self.layout.slot(&a.target).expect("validated");
        let width = match slot {
            Slot::Scalar(i) => self.layout.scalars[i].1,
            Slot::Array(i) => self.layout.arrays[i].2,
        };
        CAssign {
            slot,
            index: a.index.as_ref().map(|e| self.compile(e)),
            rhs: self.compile(&a.rhs),
            guard: a.guard.as_ref().map(|e| self.compile(e)),
            mask: mask_of(width),
        }
    }

    fn eval_wires(&self, mu: &Valuation) -> Vec<Value> {
        let mut scratch = vec![Value::Bot; self.wires_topo.len()];
        for (slot, e) in &self.wires_topo {
            scratch[*slot] = self.eval_c(e, mu, &scratch);
        }
        scratch
    }

    fn eval_c(&self, e: &CExpr, mu: &Valuation, wires: &[Value]) -> Value {
        match e {
            CExpr::Const(v) => *v,
            CExpr::Reg(i) => mu.scalars[*i],
            CExpr::Wire(i) => wires[*i],
            CExpr::Unary(op, a) => {
                let Value::Num(a) = self.eval_c(a, mu, wires) else {
                    return Value::Bot;
                };
                Value::Num(match op {
                    UnOp::Not => (a == 0) as u64,
                    UnOp::BitNot => !a & self.mask,
                    UnOp::Neg => a.wrapping_neg() & self.mask,
                })
            }
            CExpr::Binary(op, a, b) => {
                let Value::Num(a) = self.eval_c(a, mu, wires) else {
                    return Value::Bot;
                };
                let Value::Num(b) = self.eval_c(b, mu, wires) else {
                    return Value::Bot;
                };
                apply_bin(*op, a, b, self.mask)
            }
            CExpr::Ite(c, t, f) => {
                // Strict in all three operands: any undefined input poisons
                // the result, untaken branch included.
                let c = self.eval_c(c, mu, wires);
                let t = self.eval_c(t, mu, wires);
                let f = self.eval_c(f, mu, wires);
                match (c, t, f) {
                    (Value::Num(c), Value::Num(t), Value::Num(f)) => {
                        Value::Num(if c != 0 { t } else { f })
                    }
                    _ => Value::Bot,
                }
            }
            CExpr::BitSel(e, h, l) => {
                let (Value::Num(v), Value::Num(h), Value::Num(l)) = (
                    self.eval_c(e, mu, wires),
                    self.eval_c(h, mu, wires),
                    self.eval_c(l, mu, wires),
                ) else {
                    return Value::Bot;
                };
                if h < l || h >= self.circuit.width as u64 {
                    return Value::Bot;
                }
                Value::Num((v >> l) & mask_of((h - l + 1) as u32))
            }
            CExpr::ArrayRead(slot, ix) => {
                let Value::Num(i) = self.eval_c(ix, mu, wires) else {
                    return Value::Bot;
                };
                mu.arrays[*slot]
                    .get(i as usize)
                    .copied()
                    .unwrap_or(Value::Bot)
            }
        }
    }

    /// Evaluates an arbitrary expression over this circuit in state `mu`.
    pub fn eval(&self, e: &Expr, mu: &Valuation) -> Value {
        let wires = self.eval_wires(mu);
        self.eval_c(&self.compile(e), mu, &wires)
    }

    /// Predicate satisfaction: defined and nonzero.
    pub fn satisfies(&self, mu: &Valuation, phi: &Expr) -> bool {
        self.eval(phi, mu).truthy()
    }

    /// One synchronous cycle. Every right-hand side sees the pre-state;
    /// unassigned registers keep their values; an array write updates
    /// exactly one cell. A guarded assignment with a false (or undefined)
    /// guard, or an array write with an undefined or out-of-range index,
    /// leaves the target untouched.
    pub fn step(&self, mu: &Valuation) -> Valuation {
        let wires = self.eval_wires(mu);
        let mut next = mu.clone();
        for a in &self.assigns {
            if let Some(g) = &a.guard {
                if !self.eval_c(g, mu, &wires).truthy() {
                    continue;
                }
            }
            let v = match self.eval_c(&a.rhs, mu, &wires) {
                Value::Num(n) => Value::Num(n & a.mask),
                Value::Bot => Value::Bot,
            };
            match (a.slot, &a.index) {
                (Slot::Scalar(i), None) => next.scalars[i] = v,
                (Slot::Array(arr), Some(ix)) => {
                    if let Value::Num(i) = self.eval_c(ix, mu, &wires) {
                        if let Some(cell) = next.arrays[arr].get_mut(i as usize) {
                            *cell = v;
                        }
                    }
                }
                _ => unreachable!("validated"),
            }
        }
        next
    }

    /// `n`-fold iteration of [`Sim::step`]; `run(mu, 0)` is `mu`.
    pub fn run(&self, mu: &Valuation, n: u64) -> Valuation {
        let mut cur = mu.clone();
        for _ in 0..n {
            cur = self.step(&cur);
        }
        cur
    }

    /// The first `n` states, starting with `mu` itself.
    pub fn states(&self, mu: &Valuation, n: u64) -> Vec<Valuation> {
        let mut out = Vec::with_capacity(n as usize);
        let mut cur = mu.clone();
        for i in 0..n {
            if i > 0 {
                cur = self.step(&cur);
            }
            out.push(cur.clone());
        }
        out
    }

    /// Projects a state onto the circuit's outputs, in declared order.
    /// Wire outputs are evaluated; non-outputs are omitted.
    pub fn project(&self, mu: &Valuation) -> Vec<(String, Value)> {
        let wires = self.eval_wires(mu);
        self.outputs
            .iter()
            .map(|(name, src)| {
                let v = match src {
                    OutSrc::Scalar(i) => mu.scalars[*i],
                    OutSrc::Wire(i) => wires[*i],
                };
                (name.clone(), v)
            })
            .collect()
    }

    /// Output-projected trace of the first `n` cycles.
    pub fn trace_prefix(&self, mu: &Valuation, n: u64) -> TraceDump {
        let mut rows = Vec::new();
        let mut cur = mu.clone();
        for i in 0..n {
            if i > 0 {
                cur = self.step(&cur);
            }
            rows.push(TraceRow {
                cycle: i,
                values: self.project(&cur),
            });
        }
        TraceDump {
            kind: TraceKind::Full,
            rows,
        }
    }

    /// Like [`Sim::trace_prefix`] but keeps only the cycles whose state
    /// satisfies `phi`, preserving original cycle indices.
    pub fn filtered_trace_prefix(&self, mu: &Valuation, phi: &Expr, n: u64) -> TraceDump {
        let cphi = self.compile(phi);
        let mut rows = Vec::new();
        let mut cur = mu.clone();
        for i in 0..n {
            if i > 0 {
                cur = self.step(&cur);
            }
            let wires = self.eval_wires(&cur);
            if self.eval_c(&cphi, &cur, &wires).truthy() {
                rows.push(TraceRow {
                    cycle: i,
                    values: self.project(&cur),
                });
            }
        }
        TraceDump {
            kind: TraceKind::Filtered(crate::textio::print_expr_compact(phi)),
            rows,
        }
    }
}

fn mask_of(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

fn apply_bin(op: BinOp, a: u64, b: u64, mask: u64) -> Value {
    let v = match op {
        BinOp::Add => a.wrapping_add(b) & mask,
        BinOp::Sub => a.wrapping_sub(b) & mask,
        BinOp::Mul => a.wrapping_mul(b) & mask,
        BinOp::Div => {
            if b == 0 {
                return Value::Bot;
            }
            a / b
        }
        BinOp::Mod => {
            if b == 0 {
                return Value::Bot;
            }
            a % b
        }
        BinOp::Eq => (a == b) as u64,
        BinOp::Ne => (a != b) as u64,
        BinOp::Lt => (a < b) as u64,
        BinOp::Le => (a <= b) as u64,
        BinOp::Gt => (a > b) as u64,
        BinOp::Ge => (a >= b) as u64,
        BinOp::And => (a != 0 && b != 0) as u64,
        BinOp::Or => (a != 0 || b != 0) as u64,
        BinOp::Imp => (a == 0 || b != 0) as u64,
        BinOp::Iff => ((a != 0) == (b != 0)) as u64,
        BinOp::BitAnd => a & b,
        BinOp::BitOr => (a | b) & mask,
        BinOp::BitXor => (a ^ b) & mask,
        BinOp::Shl => {
            if b >= 64 {
                0
            } else {
                (a << b) & mask
            }
        }
        BinOp::Shr => {
            if b >= 64 {
                0
            } else {
                a >> b
            }
        }
    };
    Value::Num(v)
}

// Free-function forms over an ad-hoc Sim; loops should hold a Sim instead.

pub fn eval_expr(e: &Expr, mu: &Valuation, c: &Circuit) -> Value {
    Sim::new(c).eval(e, mu)
}

pub fn step(c: &Circuit, mu: &Valuation) -> Valuation {
    Sim::new(c).step(mu)
}

pub fn run(c: &Circuit, mu: &Valuation, n: u64) -> Valuation {
    Sim::new(c).run(mu, n)
}

pub fn trace_prefix(c: &Circuit, mu: &Valuation, n: u64) -> TraceDump {
    Sim::new(c).trace_prefix(mu, n)
}

pub fn filtered_trace_prefix(c: &Circuit, mu: &Valuation, phi: &Expr, n: u64) -> TraceDump {
    Sim::new(c).filtered_trace_prefix(mu, phi, n)
}

pub fn satisfies(mu: &Valuation, phi: &Expr, c: &Circuit) -> bool {
    Sim::new(c).satisfies(mu, phi)
}
