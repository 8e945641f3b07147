//! Circuit IR: values, expressions, declarations, and well-formedness checks.
//!
//! A circuit is a set of register assignments, a set of wires (named
//! combinational expressions), an ordered output list, and an initial-state
//! predicate. All state lives in registers; wires are evaluated fresh each
//! cycle. Values are fixed-width unsigned integers plus a distinguished
//! undefined value `bot` that propagates strictly through every operator.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

/// Widest register the IR supports, in bits. Keeps all arithmetic in `u64`.
pub const MAX_WIDTH: u32 = 32;

/// A runtime value: either a defined unsigned integer or `bot` (undefined).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Value {
    Bot,
    Num(u64),
}

impl Value {
    pub fn is_bot(self) -> bool {
        matches!(self, Value::Bot)
    }

    /// Predicate reading: defined and nonzero. `bot` is never true.
    pub fn truthy(self) -> bool {
        matches!(self, Value::Num(n) if n != 0)
    }

    pub fn num(self) -> Option<u64> {
        match self {
            Value::Bot => None,
            Value::Num(n) => Some(n),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bot => write!(f, "bot"),
            Value::Num(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IdentKind {
    Register,
    Wire,
}

/// A named identifier together with how it was declared.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ident {
    pub name: String,
    pub kind: IdentKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    /// Logical negation: 0 -> 1, nonzero -> 0.
    Not,
    /// Bitwise complement within the circuit width.
    BitNot,
    /// Two's-complement negation modulo 2^W.
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Imp,
    Iff,
    BitAnd,
    BitOr,
    BitXor,
    Shl,
    Shr,
}

/// Expression tree. `Ref` names a register or wire; `ArrayRead` targets an
/// array-declared register.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(Value),
    Ref(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Ite(Box<Expr>, Box<Expr>, Box<Expr>),
    /// `e[h:l]` selects bits h down to l of e's value.
    BitSel(Box<Expr>, Box<Expr>, Box<Expr>),
    ArrayRead(String, Box<Expr>),
}

impl Expr {
    pub fn num(n: u64) -> Expr {
        Expr::Const(Value::Num(n))
    }

    pub fn var(name: &str) -> Expr {
        Expr::Ref(name.to_string())
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn eq(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Eq, a, b)
    }

    pub fn and(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::And, a, b)
    }

    pub fn ite(c: Expr, t: Expr, e: Expr) -> Expr {
        Expr::Ite(Box::new(c), Box::new(t), Box::new(e))
    }

    /// Left-folded conjunction; the empty conjunction is the constant 1.
    pub fn conj(parts: impl IntoIterator<Item = Expr>) -> Expr {
        let mut it = parts.into_iter();
        match it.next() {
            None => Expr::num(1),
            Some(first) => it.fold(first, Expr::and),
        }
    }

    /// All identifiers referenced by this expression, wires included.
    pub fn idents(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Ref(n) => {
                out.insert(n.clone());
            }
            Expr::Unary(_, e) => e.idents(out),
            Expr::Binary(_, a, b) => {
                a.idents(out);
                b.idents(out);
            }
            Expr::Ite(c, t, e) => {
                c.idents(out);
                t.idents(out);
                e.idents(out);
            }
            Expr::BitSel(e, h, l) => {
                e.idents(out);
                h.idents(out);
                l.idents(out);
            }
            Expr::ArrayRead(a, i) => {
                out.insert(a.clone());
                i.idents(out);
            }
        }
    }

    /// Rewrites every identifier (refs and array targets) through `f`.
    pub fn rename(&self, f: &impl Fn(&str) -> String) -> Expr {
        match self {
            Expr::Const(v) => Expr::Const(*v),
            Expr::Ref(n) => Expr::Ref(f(n)),
            Expr::Unary(op, e) => Expr::Unary(*op, Box::new(e.rename(f))),
            Expr::Binary(op, a, b) => {
                Expr::Binary(*op, Box::new(a.rename(f)), Box::new(b.rename(f)))
            }
            Expr::Ite(c, t, e) => Expr::Ite(
                Box::new(c.rename(f)),
                Box::new(t.rename(f)),
                Box::new(e.rename(f)),
            ),
            Expr::BitSel(e, h, l) => Expr::BitSel(
                Box::new(e.rename(f)),
                Box::new(h.rename(f)),
                Box::new(l.rename(f)),
            ),
            Expr::ArrayRead(a, i) => Expr::ArrayRead(f(a), Box::new(i.rename(f))),
        }
    }
}

/// A register declaration. `array_len` present means an addressable array
/// ("memory") of that many cells, each `width` bits wide.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterDecl {
    pub name: String,
    pub width: u32,
    pub array_len: Option<u64>,
}

impl RegisterDecl {
    pub fn scalar(name: &str, width: u32) -> Self {
        RegisterDecl {
            name: name.to_string(),
            width,
            array_len: None,
        }
    }

    pub fn array(name: &str, len: u64, width: u32) -> Self {
        RegisterDecl {
            name: name.to_string(),
            width,
            array_len: Some(len),
        }
    }
}

/// A named combinational expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireDef {
    pub name: String,
    pub expr: Expr,
}

/// A register assignment `target <= rhs`, with an optional array index for
/// per-cell writes and an optional write-enable guard. A guarded assignment
/// commits only when the guard is defined and nonzero; the stuttering
/// product uses this to suppress array writes entirely while one copy waits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assign {
    pub target: String,
    pub index: Option<Expr>,
    pub rhs: Expr,
    pub guard: Option<Expr>,
}

impl Assign {
    pub fn new(target: &str, rhs: Expr) -> Self {
        Assign {
            target: target.to_string(),
            index: None,
            rhs,
            guard: None,
        }
    }

    pub fn array(target: &str, index: Expr, rhs: Expr) -> Self {
        Assign {
            target: target.to_string(),
            index: Some(index),
            rhs,
            guard: None,
        }
    }
}

/// A synchronous circuit. Declaration, wire, assignment, and output order is
/// preserved so printing is deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    pub name: String,
    pub width: u32,
    pub decls: Vec<RegisterDecl>,
    pub wires: Vec<WireDef>,
    pub assigns: Vec<Assign>,
    pub outputs: Vec<String>,
    /// Initial-state predicate; the constant 1 when unconstrained.
    pub init: Expr,
}

impl Circuit {
    pub fn new(name: &str, width: u32) -> Self {
        Circuit {
            name: name.to_string(),
            width,
            decls: Vec::new(),
            wires: Vec::new(),
            assigns: Vec::new(),
            outputs: Vec::new(),
            init: Expr::num(1),
        }
    }

    pub fn decl(&self, name: &str) -> Option<&RegisterDecl> {
        self.decls.iter().find(|d| d.name == name)
    }

    pub fn wire(&self, name: &str) -> Option<&WireDef> {
        self.wires.iter().find(|w| w.name == name)
    }

    pub fn is_array(&self, name: &str) -> bool {
        self.decl(name).is_some_and(|d| d.array_len.is_some())
    }

    /// Register names read anywhere in assignment or wire right-hand sides,
    /// chased transitively through wire definitions.
    pub fn reads(&self) -> BTreeSet<String> {
        let wire_map: HashMap<&str, &Expr> = self
            .wires
            .iter()
            .map(|w| (w.name.as_str(), &w.expr))
            .collect();
        let mut regs = BTreeSet::new();
        let mut seen_wires = HashSet::new();
        let mut roots = BTreeSet::new();
        for a in &self.assigns {
            a.rhs.idents(&mut roots);
            if let Some(ix) = &a.index {
                ix.idents(&mut roots);
            }
            if let Some(g) = &a.guard {
                g.idents(&mut roots);
            }
        }
        for w in &self.wires {
            w.expr.idents(&mut roots);
        }
        let mut stack: Vec<String> = roots.into_iter().collect();
        while let Some(n) = stack.pop() {
            if let Some(e) = wire_map.get(n.as_str()) {
                if seen_wires.insert(n.clone()) {
                    let mut sub = BTreeSet::new();
                    e.idents(&mut sub);
                    stack.extend(sub);
                }
            } else if self.decl(&n).is_some() {
                regs.insert(n);
            }
        }
        regs
    }

    /// Register names targeted by assignments.
    pub fn writes(&self) -> BTreeSet<String> {
        self.assigns.iter().map(|a| a.target.clone()).collect()
    }

    /// `reads ∪ writes`.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut v = self.reads();
        v.extend(self.writes());
        v
    }
}

/// Identifier names that read and written registers, as a pair.
pub fn read_write_sets(c: &Circuit) -> (BTreeSet<String>, BTreeSet<String>) {
    (c.reads(), c.writes())
}

pub fn vars(c: &Circuit) -> BTreeSet<String> {
    c.vars()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// One well-formedness finding. `location` names the offending identifier or
/// construct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub location: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Diagnostics(pub Vec<Diagnostic>);

impl Diagnostics {
    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|d| d.severity != Severity::Error)
    }

    fn error(&mut self, location: &str, message: String) {
        self.0.push(Diagnostic {
            severity: Severity::Error,
            location: location.to_string(),
            message,
        });
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.0 {
            let sev = match d.severity {
                Severity::Error => "error",
                Severity::Warning => "warning",
            };
            writeln!(f, "{sev}: {}: {}", d.location, d.message)?;
        }
        Ok(())
    }
}

/// Checks every circuit invariant: unique declarations, single writer per
/// identifier, declared references, array/scalar usage, output legality,
/// and wire acyclicity. Empty diagnostics means the circuit is well-formed.
pub fn validate(c: &Circuit) -> Diagnostics {
    validate_with(c, false)
}

/// Like [`validate`] but permits the `.1`/`.2`-style copy suffixes that
/// product constructions introduce. User-facing validation rejects them.
pub fn validate_allowing_copy_tags(c: &Circuit) -> Diagnostics {
    validate_with(c, true)
}

fn is_copy_tagged(name: &str) -> bool {
    name.contains('.')
}

fn validate_with(c: &Circuit, allow_tags: bool) -> Diagnostics {
    let mut diags = Diagnostics::default();

    if c.width == 0 || c.width > MAX_WIDTH {
        diags.error(
            &c.name,
            format!("circuit width {} outside 1..={}", c.width, MAX_WIDTH),
        );
    }

    let mut reg_names = HashSet::new();
    for d in &c.decls {
        if !allow_tags && is_copy_tagged(&d.name) {
            diags.error(&d.name, "identifier uses the reserved copy suffix".into());
        }
        if !reg_names.insert(d.name.clone()) {
            diags.error(
                &d.name,
                format!("duplicate register declaration {}", d.name),
            );
        }
        if d.width == 0 || d.width > c.width {
            diags.error(
                &d.name,
                format!("register width {} outside 1..={}", d.width, c.width),
            );
        }
        if let Some(len) = d.array_len {
            if len == 0 {
                diags.error(&d.name, "array length must be positive".into());
            }
        }
    }

    let mut wire_names = HashSet::new();
    for w in &c.wires {
        if !allow_tags && is_copy_tagged(&w.name) {
            diags.error(&w.name, "identifier uses the reserved copy suffix".into());
        }
        if reg_names.contains(&w.name) {
            diags.error(
                &w.name,
                format!("{} declared as both register and wire", w.name),
            );
        }
        if !wire_names.insert(w.name.clone()) {
            diags.error(&w.name, format!("duplicate left-hand side {}", w.name));
        }
    }

    // Single writer per register.
    let mut assigned = HashSet::new();
    for a in &c.assigns {
        match c.decl(&a.target) {
            None => {
                if wire_names.contains(&a.target) {
                    diags.error(&a.target, format!("assignment to wire {}", a.target));
                } else {
                    diags.error(&a.target, format!("assignment to undeclared {}", a.target));
                }
            }
            Some(d) => {
                if d.array_len.is_some() && a.index.is_none() {
                    diags.error(
                        &a.target,
                        format!("array {} assigned without index", a.target),
                    );
                }
                if d.array_len.is_none() && a.index.is_some() {
                    diags.error(
                        &a.target,
                        format!("scalar {} assigned with index", a.target),
                    );
                }
            }
        }
        if !assigned.insert(a.target.clone()) {
            diags.error(&a.target, format!("duplicate left-hand side {}", a.target));
        }
    }

    // Every referenced identifier resolves; arrays are only read via indexing.
    let check_expr = |e: &Expr, ctx: &str, diags: &mut Diagnostics| {
        check_expr_refs(c, e, ctx, &reg_names, &wire_names, diags);
    };
    for w in &c.wires {
        check_expr(&w.expr, &w.name, &mut diags);
    }
    for a in &c.assigns {
        check_expr(&a.rhs, &a.target, &mut diags);
        if let Some(ix) = &a.index {
            check_expr(ix, &a.target, &mut diags);
        }
        if let Some(g) = &a.guard {
            check_expr(g, &a.target, &mut diags);
        }
    }
    check_expr(&c.init, "init", &mut diags);

    // Outputs name declared scalars or wires.
    let mut seen_out = HashSet::new();
    for o in &c.outputs {
        if !seen_out.insert(o.clone()) {
            diags.error(o, format!("duplicate output {o}"));
        }
        match c.decl(o) {
            Some(d) if d.array_len.is_some() => {
                diags.error(o, format!("array register {o} cannot be an output"));
            }
            Some(_) => {}
            None if wire_names.contains(o) => {}
            None => diags.error(o, format!("output {o} is not declared")),
        }
    }

    // Wire dependency graph must be acyclic.
    if let Some(cycle) = find_wire_cycle(c) {
        diags.error(
            &cycle[0],
            format!("combinational cycle {}", cycle.join("\u{2192}")),
        );
    }

    diags
}

fn check_expr_refs(
    c: &Circuit,
    e: &Expr,
    ctx: &str,
    regs: &HashSet<String>,
    wires: &HashSet<String>,
    diags: &mut Diagnostics,
) {
    match e {
        Expr::Const(_) => {}
        Expr::Ref(n) => {
            if !regs.contains(n) && !wires.contains(n) {
                diags.error(ctx, format!("undeclared identifier {n}"));
            } else if c.is_array(n) {
                diags.error(ctx, format!("array register {n} used without index"));
            }
        }
        Expr::Unary(_, a) => check_expr_refs(c, a, ctx, regs, wires, diags),
        Expr::Binary(_, a, b) => {
            check_expr_refs(c, a, ctx, regs, wires, diags);
            check_expr_refs(c, b, ctx, regs, wires, diags);
        }
        Expr::Ite(a, b, d) => {
            check_expr_refs(c, a, ctx, regs, wires, diags);
            check_expr_refs(c, b, ctx, regs, wires, diags);
            check_expr_refs(c, d, ctx, regs, wires, diags);
        }
        Expr::BitSel(a, b, d) => {
            check_expr_refs(c, a, ctx, regs, wires, diags);
            check_expr_refs(c, b, ctx, regs, wires, diags);
            check_expr_refs(c, d, ctx, regs, wires, diags);
        }
        Expr::ArrayRead(a, ix) => {
            if !regs.contains(a) {
                diags.error(ctx, format!("undeclared identifier {a}"));
            } else if !c.is_array(a) {
                diags.error(ctx, format!("scalar register {a} read with index"));
            }
            check_expr_refs(c, ix, ctx, regs, wires, diags);
        }
    }
}

/// Depth-first cycle search over wire-to-wire references. Returns the cycle
/// path, e.g. `[a, b, a]`.
fn find_wire_cycle(c: &Circuit) -> Option<Vec<String>> {
    let wire_map: HashMap<&str, &Expr> =
        c.wires.iter().map(|w| (w.name.as_str(), &w.expr)).collect();

    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Visiting,
        Done,
    }
    let mut marks: HashMap<String, Mark> = HashMap::new();

    fn visit(
        name: &str,
        wire_map: &HashMap<&str, &Expr>,
        marks: &mut HashMap<String, Mark>,
        path: &mut Vec<String>,
    ) -> Option<Vec<String>> {
        match marks.get(name) {
            Some(Mark::Done) => return None,
            Some(Mark::Visiting) => {
                let start = path.iter().position(|p| p == name).unwrap_or(0);
                let mut cycle: Vec<String> = path[start..].to_vec();
                cycle.push(name.to_string());
                return Some(cycle);
            }
            None => {}
        }
        marks.insert(name.to_string(), Mark::Visiting);
        path.push(name.to_string());
        if let Some(e) = wire_map.get(name) {
            let mut refs = BTreeSet::new();
            e.idents(&mut refs);
            for r in refs {
                if wire_map.contains_key(r.as_str()) {
                    if let Some(cycle) = visit(&r, wire_map, marks, path) {
                        return Some(cycle);
                    }
                }
            }
        }
        path.pop();
        marks.insert(name.to_string(), Mark::Done);
        None
    }

    let mut path = Vec::new();
    for w in &c.wires {
        if let Some(cycle) = visit(&w.name, &wire_map, &mut marks, &mut path) {
            return Some(cycle);
        }
    }
    None
}

/// Indices into `c.wires` in dependency-first order: every wire appears
/// after the wires its expression references. Assumes acyclicity.
pub fn wires_in_dependency_order(c: &Circuit) -> Vec<usize> {
    let by_name: HashMap<&str, usize> = c
        .wires
        .iter()
        .enumerate()
        .map(|(i, w)| (w.name.as_str(), i))
        .collect();
    let mut order = Vec::with_capacity(c.wires.len());
    let mut done = vec![false; c.wires.len()];
    fn visit(
        i: usize,
        c: &Circuit,
        by_name: &HashMap<&str, usize>,
        done: &mut [bool],
        order: &mut Vec<usize>,
    ) {
        if done[i] {
            return;
        }
        done[i] = true;
        let mut refs = BTreeSet::new();
        c.wires[i].expr.idents(&mut refs);
        for r in refs {
            if let Some(&j) = by_name.get(r.as_str()) {
                visit(j, c, by_name, done, order);
            }
        }
        order.push(i);
    }
    for i in 0..c.wires.len() {
        visit(i, c, &by_name, &mut done, &mut order);
    }
    order
}

/// Checks one expression's references against a circuit: every identifier
/// declared, arrays only read through an index, scalars never indexed.
pub fn check_expr_over(c: &Circuit, e: &Expr) -> Result<(), String> {
    let regs: HashSet<String> = c.decls.iter().map(|d| d.name.clone()).collect();
    let wires: HashSet<String> = c.wires.iter().map(|w| w.name.clone()).collect();
    let mut diags = Diagnostics::default();
    check_expr_refs(c, e, "expression", &regs, &wires, &mut diags);
    match diags.0.into_iter().next() {
        None => Ok(()),
        Some(d) => Err(d.message),
    }
}

/// Checks an architectural/microarchitectural register partition: the two
/// sets must be disjoint and together cover every declared register.
pub fn check_partition(
    c: &Circuit,
    arch: &BTreeSet<String>,
    uarch: &BTreeSet<String>,
) -> Result<(), String> {
    if let Some(x) = arch.intersection(uarch).next() {
        return Err(format!("register {x} is in both partitions"));
    }
    for d in &c.decls {
        if !arch.contains(&d.name) && !uarch.contains(&d.name) {
            return Err(format!("register {} is in neither partition", d.name));
        }
    }
    Ok(())
}
