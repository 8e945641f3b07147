//! Monitor legality and composition, plus the self-composition transforms:
//! the plain product circuit, the retirement-synchronized stuttering
//! product, and the four-copy product used for contract-level checks.

use std::collections::BTreeSet;

use crate::ir::{self, Assign, Circuit, Expr, WireDef};

/// A circuit that observes another circuit. The body's name is the
/// monitor's name; `base` names the circuit it was written against.
/// Monitors with their own registers and assignments are representable,
/// but the verification engine accepts only combinatorial ones.
#[derive(Debug, Clone, PartialEq)]
pub struct Monitor {
    pub base: String,
    pub body: Circuit,
}

impl Monitor {
    pub fn name(&self) -> &str {
        &self.body.name
    }
}

/// Result of [`check_monitor`].
#[derive(Debug, Clone)]
pub struct MonitorCheck {
    /// Writes nothing the monitored circuit reads or writes.
    pub is_monitoring: bool,
    /// Reads only the monitored circuit's registers and has no state of
    /// its own.
    pub is_combinatorial: bool,
    pub diagnostics: ir::Diagnostics,
}

/// Checks the monitoring conditions of `m` against `c`: the two write sets
/// are disjoint, and `m` writes nothing in `vars(c)`. Additionally flags
/// whether `m` is combinatorial (reads only `vars(c)`, no assignments) and
/// reports name collisions that would make the composition ill-formed.
pub fn check_monitor(m: &Monitor, c: &Circuit) -> MonitorCheck {
    let mut diagnostics = ir::Diagnostics::default();
    let mut err = |loc: &str, msg: String| {
        diagnostics.0.push(ir::Diagnostic {
            severity: ir::Severity::Error,
            location: loc.to_string(),
            message: msg,
        });
    };

    let m_writes = m.body.writes();
    let c_writes = c.writes();
    let c_vars = c.vars();

    let mut is_monitoring = true;
    for x in m_writes.intersection(&c_writes) {
        is_monitoring = false;
        err(
            x,
            format!("monitor writes {x}, which the base circuit writes"),
        );
    }
    for x in m_writes.intersection(&c_vars) {
        if !c_writes.contains(x) {
            is_monitoring = false;
            err(
                x,
                format!("monitor writes {x}, which the base circuit uses"),
            );
        }
    }

    // Name collisions: shared wire names or register declarations break the
    // one-writer-per-identifier rule of the composed circuit.
    for w in &m.body.wires {
        if c.wire(&w.name).is_some() || c.decl(&w.name).is_some() {
            is_monitoring = false;
            err(
                &w.name,
                format!("monitor wire {} collides with a base identifier", w.name),
            );
        }
    }
    for d in &m.body.decls {
        if c.decl(&d.name).is_some() || c.wire(&d.name).is_some() {
            is_monitoring = false;
            err(
                &d.name,
                format!(
                    "monitor register {} collides with a base identifier",
                    d.name
                ),
            );
        }
    }

    // reads(M): registers reachable from the monitor's expressions, chasing
    // both the monitor's own wires and the base circuit's.
    let reads = monitor_reads(m, c);
    let is_combinatorial = m.body.assigns.is_empty() && reads.is_subset(&c_vars);

    MonitorCheck {
        is_monitoring,
        is_combinatorial,
        diagnostics,
    }
}

fn monitor_reads(m: &Monitor, c: &Circuit) -> BTreeSet<String> {
    // Reuse Circuit::reads on a scratch circuit holding the monitor's items
    // plus the base's wires and declarations for resolution.
    let mut scratch = c.clone();
    scratch.assigns.clear();
    scratch.wires.extend(m.body.wires.iter().cloned());
    scratch.decls.extend(m.body.decls.iter().cloned());
    scratch.assigns.extend(m.body.assigns.iter().cloned());
    // Outputs of the monitor count as reads even without an assignment.
    let mut roots = scratch.reads();
    let mut q: Vec<String> = m.body.outputs.clone();
    let mut seen = BTreeSet::new();
    while let Some(n) = q.pop() {
        if !seen.insert(n.clone()) {
            continue;
        }
        if let Some(w) = scratch.wire(&n) {
            let mut s = BTreeSet::new();
            w.expr.idents(&mut s);
            q.extend(s);
        } else if scratch.decl(&n).is_some() {
            roots.insert(n);
        }
    }
    roots
}

/// Composition `M[C]`: the base circuit's state machinery with the
/// monitor's logic layered on top, outputs replaced by the monitor's.
pub fn compose(m: &Monitor, c: &Circuit) -> Result<Circuit, ir::Diagnostics> {
    let check = check_monitor(m, c);
    if !check.is_monitoring {
        return Err(check.diagnostics);
    }
    let mut out = Circuit::new(&format!("{}_on_{}", m.name(), c.name), c.width);
    out.decls = c
        .decls
        .iter()
        .cloned()
        .chain(m.body.decls.iter().cloned())
        .collect();
    out.wires = c
        .wires
        .iter()
        .cloned()
        .chain(m.body.wires.iter().cloned())
        .collect();
    out.assigns = c
        .assigns
        .iter()
        .cloned()
        .chain(m.body.assigns.iter().cloned())
        .collect();
    out.outputs = m.body.outputs.clone();
    out.init = c.init.clone();
    let diags = ir::validate_allowing_copy_tags(&out);
    if diags.is_empty() {
        Ok(out)
    } else {
        Err(diags)
    }
}

/// How a paired circuit was built.
#[derive(Debug, Clone, PartialEq)]
pub enum PairKind {
    Plain,
    /// Stuttering product over this synchronization predicate (expressed
    /// over the underlying single-copy circuit).
    Stuttering(Expr),
}

/// Two renamed copies of one circuit running in parallel. Copy `k`'s
/// identifiers carry the suffix `.k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedCircuit {
    pub circuit: Circuit,
    pub kind: PairKind,
}

pub fn tag(name: &str, copy: u8) -> String {
    format!("{name}.{copy}")
}

/// Renames every identifier of an expression into copy `copy`.
pub fn tag_expr(e: &Expr, copy: u8) -> Expr {
    e.rename(&|n| tag(n, copy))
}

fn tag_circuit_items(c: &Circuit, copy: u8, out: &mut Circuit) {
    let f = |n: &str| tag(n, copy);
    for d in &c.decls {
        let mut d2 = d.clone();
        d2.name = f(&d.name);
        out.decls.push(d2);
    }
    for w in &c.wires {
        out.wires.push(WireDef {
            name: f(&w.name),
            expr: w.expr.rename(&f),
        });
    }
    for a in &c.assigns {
        out.assigns.push(Assign {
            target: f(&a.target),
            index: a.index.as_ref().map(|e| e.rename(&f)),
            rhs: a.rhs.rename(&f),
            guard: a.guard.as_ref().map(|e| e.rename(&f)),
        });
    }
    for o in &c.outputs {
        out.outputs.push(f(o));
    }
}

fn reject_tagged(c: &Circuit) -> Result<(), ir::Diagnostics> {
    let mut diags = ir::Diagnostics::default();
    for d in &c.decls {
        if d.name.contains('.') {
            diags.0.push(ir::Diagnostic {
                severity: ir::Severity::Error,
                location: d.name.clone(),
                message: "circuit already uses the reserved copy suffix".into(),
            });
        }
    }
    if diags.is_empty() {
        Ok(())
    } else {
        Err(diags)
    }
}

/// Product circuit `C × C`: every assignment, wire, and output duplicated
/// with copy tags, the init predicate conjoined over both copies.
pub fn product(c: &Circuit) -> Result<PairedCircuit, ir::Diagnostics> {
    reject_tagged(c)?;
    let mut out = Circuit::new(&format!("{}x{}", c.name, c.name), c.width);
    tag_circuit_items(c, 1, &mut out);
    tag_circuit_items(c, 2, &mut out);
    out.init = Expr::and(tag_expr(&c.init, 1), tag_expr(&c.init, 2));
    Ok(PairedCircuit {
        circuit: out,
        kind: PairKind::Plain,
    })
}

/// Stuttering product `C ⋈φ C`: the product circuit with every assignment
/// of copy `k` guarded so that the copy holds its state on cycles where its
/// own φ fires and the other copy's does not. Scalar assignments become
/// `x.k <= ite(φ.k && !φ.j, x.k, e.k)`; array assignments suppress the
/// write through the write-enable guard so neither index nor data commits.
pub fn stuttering_product(c: &Circuit, phi: &Expr) -> Result<PairedCircuit, ir::Diagnostics> {
    ir::check_expr_over(c, phi).map_err(|msg| {
        ir::Diagnostics(vec![ir::Diagnostic {
            severity: ir::Severity::Error,
            location: "phi".into(),
            message: msg,
        }])
    })?;
    let mut paired = product(c)?;
    let stutter = |copy: u8| {
        let other = 3 - copy;
        Expr::and(
            tag_expr(phi, copy),
            Expr::Unary(crate::ir::UnOp::Not, Box::new(tag_expr(phi, other))),
        )
    };
    for a in &mut paired.circuit.assigns {
        let copy = if a.target.ends_with(".1") { 1 } else { 2 };
        let guard = stutter(copy);
        match &a.index {
            None => {
                a.rhs = Expr::ite(
                    guard,
                    Expr::Ref(a.target.clone()),
                    std::mem::replace(&mut a.rhs, Expr::num(0)),
                );
            }
            Some(_) => {
                let enable = Expr::Unary(crate::ir::UnOp::Not, Box::new(guard));
                a.guard = Some(match a.guard.take() {
                    None => enable,
                    Some(g) => Expr::and(enable, g),
                });
            }
        }
    }
    paired.kind = PairKind::Stuttering(phi.clone());
    Ok(paired)
}

/// Four-copy product: two tagged copies of `first` (copies 1 and 2) running
/// beside two tagged copies of `second` (copies 3 and 4). Both circuits
/// must share the same width.
pub fn four_way_product(first: &Circuit, second: &Circuit) -> Result<Circuit, ir::Diagnostics> {
    reject_tagged(first)?;
    reject_tagged(second)?;
    let mut out = Circuit::new(
        &format!("{0}x{0}x{1}x{1}", first.name, second.name),
        first.width.max(second.width),
    );
    tag_circuit_items(first, 1, &mut out);
    tag_circuit_items(first, 2, &mut out);
    tag_circuit_items(second, 3, &mut out);
    tag_circuit_items(second, 4, &mut out);
    out.init = Expr::conj([
        tag_expr(&first.init, 1),
        tag_expr(&first.init, 2),
        tag_expr(&second.init, 3),
        tag_expr(&second.init, 4),
    ]);
    let diags = ir::validate_allowing_copy_tags(&out);
    if diags.is_empty() {
        Ok(out)
    } else {
        Err(diags)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::ir::{BinOp, Value};
    use crate::sim::Sim;

    #[test]
    fn slm_is_combinatorial_monitor() {
        let c = fixtures::sisa();
        let m = fixtures::slm("sISA");
        let check = check_monitor(&m, &c);
        assert!(check.is_monitoring);
        assert!(check.is_combinatorial);
        assert!(check.diagnostics.is_empty());
    }

    #[test]
    fn writing_monitor_rejected() {
        let c = fixtures::sisa();
        let mut body = Circuit::new("bad", 8);
        body.assigns.push(Assign::new("reg", Expr::num(0)));
        let m = Monitor {
            base: "sISA".into(),
            body,
        };
        let check = check_monitor(&m, &c);
        assert!(!check.is_monitoring);
        assert!(compose(&m, &c).is_err());
    }

    #[test]
    fn stateful_monitor_is_monitoring_but_not_combinatorial() {
        let c = fixtures::sisa();
        let mut body = Circuit::new("counter", 8);
        body.decls.push(crate::ir::RegisterDecl::scalar("seen", 8));
        body.assigns.push(Assign::new(
            "seen",
            Expr::bin(BinOp::Add, Expr::var("seen"), Expr::var("reg")),
        ));
        body.outputs.push("seen".into());
        let m = Monitor {
            base: "sISA".into(),
            body,
        };
        let check = check_monitor(&m, &c);
        assert!(check.is_monitoring);
        assert!(!check.is_combinatorial);
    }

    #[test]
    fn slm_over_sisa_trace() {
        // The first instruction is zero, so the leak bit starts high; it
        // goes high again once pc passes the programmed region, because the
        // memory is zero there.
        let c = fixtures::sisa();
        let m = fixtures::slm("sISA");
        let composed = compose(&m, &c).unwrap();
        let sim = Sim::new(&composed);
        let mut mu = sim.zeroed();
        fixtures::load_ramp(&mut mu);
        let t = sim.trace_prefix(&mu, 14);
        let leaks: Vec<u64> = t.column("leak").iter().map(|v| v.num().unwrap()).collect();
        assert_eq!(leaks, [1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1]);
    }

    #[test]
    fn sat_over_simp_trace() {
        let c = fixtures::simp();
        let m = fixtures::sat("sIMP");
        let composed = compose(&m, &c).unwrap();
        let sim = Sim::new(&composed);
        let mut mu = sim.zeroed();
        fixtures::load_ramp(&mut mu);
        mu.set("ret", 1);
        let t = sim.trace_prefix(&mu, 7);
        let pcs: Vec<u64> = t.column("pc").iter().map(|v| v.num().unwrap()).collect();
        assert_eq!(pcs, [0, 1, 1, 2, 2, 3, 3]);
    }

    #[test]
    fn compose_preserves_base_trajectory() {
        let c = fixtures::simp();
        let m = fixtures::sat("sIMP");
        let composed = compose(&m, &c).unwrap();
        let base = Sim::new(&c);
        let comp = Sim::new(&composed);
        let mut mu = base.zeroed();
        fixtures::load_ramp(&mut mu);
        mu.set("ret", 1);
        let mut mu_c = comp.zeroed();
        fixtures::load_ramp(&mut mu_c);
        mu_c.set("ret", 1);
        for n in 0..16 {
            let a = base.run(&mu, n);
            let b = comp.run(&mu_c, n);
            for d in &c.decls {
                assert!(
                    b.agrees_on(&a, [d.name.as_str()]),
                    "cycle {n} register {}",
                    d.name
                );
            }
        }
    }

    #[test]
    fn empty_monitor_compose() {
        let c = fixtures::sisa();
        let m = Monitor {
            base: "sISA".into(),
            body: Circuit::new("nil", 8),
        };
        let composed = compose(&m, &c).unwrap();
        assert_eq!(composed.assigns, c.assigns);
        assert!(composed.outputs.is_empty());
    }

    #[test]
    fn product_of_counter() {
        let n = fixtures::counter();
        let p = product(&n).unwrap();
        assert_eq!(p.circuit.assigns.len(), 2);
        assert_eq!(
            p.circuit.outputs,
            vec!["i.1".to_string(), "i.2".to_string()]
        );
        let a1 = &p.circuit.assigns[0];
        assert_eq!(a1.target, "i.1");
        assert_eq!(
            a1.rhs,
            Expr::bin(BinOp::Add, Expr::var("i.1"), Expr::num(1))
        );
    }

    #[test]
    fn product_copies_run_independently() {
        let c = fixtures::sisa();
        let p = product(&c).unwrap();
        let base = Sim::new(&c);
        let pair = Sim::new(&p.circuit);
        let mut mu = base.zeroed();
        fixtures::load_ramp(&mut mu);
        let mut mu2 = pair.zeroed();
        for (name, _) in [("pc", 0), ("reg", 0)] {
            let v = mu.get(name).unwrap();
            mu2.set_value(&tag(name, 1), v);
            mu2.set_value(&tag(name, 2), v);
        }
        for i in 0..16u64 {
            mu2.try_set_cell("m.1", i, mu.get_cell("m", i).unwrap())
                .unwrap();
            // Copy 2 gets a different memory to show independence.
            mu2.try_set_cell("m.2", i, Value::Num(0)).unwrap();
        }
        let t_base = base.trace_prefix(&mu, 10);
        let t_pair = pair.trace_prefix(&mu2, 10);
        assert_eq!(t_base.column("reg"), t_pair.column("reg.1"));
    }

    #[test]
    fn product_of_empty_circuit() {
        let c = Circuit::new("empty", 8);
        let p = product(&c).unwrap();
        assert!(p.circuit.assigns.is_empty() && p.circuit.outputs.is_empty());
    }

    #[test]
    fn product_rejects_tagged_input() {
        let n = fixtures::counter();
        let p = product(&n).unwrap();
        assert!(product(&p.circuit).is_err());
    }

    #[test]
    fn stuttering_counter_synchronizes() {
        // With phi = (i mod 2 == 0) and starts 0 and 1, only the odd copy
        // advances on the first cycle, then the two run in lockstep with
        // i.2 == i.1 + 2 whenever both are even.
        let n = fixtures::counter();
        let phi = crate::textio::parse_expr("i mod 2 == 0").unwrap();
        let sp = stuttering_product(&n, &phi).unwrap();
        let sim = Sim::new(&sp.circuit);
        let mut mu = sim.zeroed();
        mu.set("i.1", 0).set("i.2", 1);
        let phi1 = tag_expr(&phi, 1);
        let phi2 = tag_expr(&phi, 2);
        let states = sim.states(&mu, 20);
        for s in &states {
            if sim.satisfies(s, &phi1) && sim.satisfies(s, &phi2) {
                let i1 = s.get("i.1").unwrap().num().unwrap();
                let i2 = s.get("i.2").unwrap().num().unwrap();
                assert_eq!(i2, (i1 + 2) & 0xff);
            }
        }
        // In no cycle do both copies stutter at once.
        for s in &states {
            let s1 = sim.satisfies(s, &phi1) && !sim.satisfies(s, &phi2);
            let s2 = sim.satisfies(s, &phi2) && !sim.satisfies(s, &phi1);
            assert!(!(s1 && s2));
        }
    }

    #[test]
    fn stuttering_counter_satisfies_bounded_always() {
        let n = fixtures::counter();
        let phi = crate::textio::parse_expr("i mod 2 == 0").unwrap();
        let sp = stuttering_product(&n, &phi).unwrap();
        let sim = Sim::new(&sp.circuit);
        let mut mu = sim.zeroed();
        mu.set("i.1", 0).set("i.2", 1);
        let f = crate::textio::parse_formula(
            "G (i.1 mod 2 == 0 && i.2 mod 2 == 0 -> i.2 == i.1 + 2)",
            &sp.circuit,
        )
        .unwrap();
        let v = crate::logic::holds_at(&sim, &mu, 0, &f, 20).unwrap();
        assert!(v.holds && !v.exact);
    }

    #[test]
    fn plain_product_counter_stays_out_of_phase() {
        let n = fixtures::counter();
        let phi = crate::textio::parse_expr("i mod 2 == 0").unwrap();
        let p = product(&n).unwrap();
        let sim = Sim::new(&p.circuit);
        let mut mu = sim.zeroed();
        mu.set("i.1", 0).set("i.2", 1);
        let phi1 = tag_expr(&phi, 1);
        let phi2 = tag_expr(&phi, 2);
        for s in sim.states(&mu, 20) {
            assert_eq!(sim.satisfies(&s, &phi1), !sim.satisfies(&s, &phi2));
        }
    }

    #[test]
    fn stuttering_equals_product_when_in_phase() {
        let n = fixtures::counter();
        let phi = crate::textio::parse_expr("i mod 2 == 0").unwrap();
        let p = product(&n).unwrap();
        let sp = stuttering_product(&n, &phi).unwrap();
        let sim_p = Sim::new(&p.circuit);
        let sim_sp = Sim::new(&sp.circuit);
        let mut mu = sim_p.zeroed();
        mu.set("i.1", 5).set("i.2", 5);
        let mut mu_sp = sim_sp.zeroed();
        mu_sp.set("i.1", 5).set("i.2", 5);
        for n in 0..20 {
            let a = sim_p.run(&mu, n);
            let b = sim_sp.run(&mu_sp, n);
            assert_eq!(a.get("i.1"), b.get("i.1"));
            assert_eq!(a.get("i.2"), b.get("i.2"));
        }
    }

    #[test]
    fn four_way_product_builds() {
        let fw = four_way_product(&fixtures::sisa(), &fixtures::simp()).unwrap();
        for name in ["pc.1", "pc.2", "pc.3", "pc.4", "st.3", "st.4"] {
            assert!(fw.decl(name).is_some(), "{name} missing");
        }
        assert!(fw.decl("st.1").is_none());
    }

    #[test]
    fn paired_circuit_prints_and_reparses() {
        let c = fixtures::simp();
        let phi = fixtures::retire();
        let sp = stuttering_product(&c, &phi).unwrap();
        let printed = crate::textio::print_circuit(&sp.circuit);
        let back = crate::textio::parse_circuit(&printed).unwrap();
        assert_eq!(back, sp.circuit);
    }
}
