//! The two verification drivers: `verify` learns invariants over the
//! retirement-synchronized stuttering product of the implementation and
//! checks that they force equal attacker observations with synchronized
//! retirement; `verify_4way` runs the same learning loop over the plain
//! four-copy product with the reference model carrying the contract.

use std::time::Instant;

use crate::ir::{Circuit, Expr};
use crate::logic::{check_validity, Backend, DomainBounds, LogicError, Outcome, TemporalFormula};
use crate::transform::{
    check_monitor, four_way_product, stuttering_product, tag, tag_expr, Monitor,
};

use super::candidates::{candidates_for_four_way, candidates_for_pair, register_equality};
use super::learn::learn_inv;
use super::problem::{EngineError, Verdict, VerificationProblem, VerificationReport};

/// Layers monitor wires onto a circuit so their outputs become part of the
/// state visible to product constructions. The base circuit's behavior is
/// untouched; outputs list every monitor output after the base's.
pub fn instrument(c: &Circuit, monitors: &[&Monitor]) -> Result<Circuit, EngineError> {
    let mut out = c.clone();
    for m in monitors {
        let check = check_monitor(m, &out);
        if !check.is_monitoring {
            return Err(EngineError::NotMonitoring(m.name().to_string()));
        }
        if !check.is_combinatorial {
            return Err(EngineError::NotCombinatorial(m.name().to_string()));
        }
        out.name = format!("{}_{}", out.name, m.name());
        out.wires.extend(m.body.wires.iter().cloned());
        for o in &m.body.outputs {
            if !out.outputs.contains(o) {
                out.outputs.push(o.clone());
            }
        }
    }
    let diags = crate::ir::validate(&out);
    if !diags.is_empty() {
        return Err(EngineError::Invalid(format!(
            "instrumented circuit does not validate:\n{diags}"
        )));
    }
    Ok(out)
}

/// Equality of every listed register between two copies, arrays cell-wise,
/// in declaration order.
fn registers_equiv(c: &Circuit, names: impl Iterator<Item = String>, a: u8, b: u8) -> Expr {
    let set: std::collections::BTreeSet<String> = names.collect();
    Expr::conj(
        c.decls
            .iter()
            .filter(|d| set.contains(&d.name))
            .map(|d| register_equality(d, a, b)),
    )
}

/// Equality of a monitor's outputs between two copies.
fn outputs_equiv(m: &Monitor, a: u8, b: u8) -> Expr {
    Expr::conj(
        m.body
            .outputs
            .iter()
            .map(|o| Expr::eq(Expr::Ref(tag(o, a)), Expr::Ref(tag(o, b)))),
    )
}

/// Checks microarchitectural contract satisfaction by invariant learning
/// over the stuttering product. `Satisfied` is sound: equal filtered
/// contract observations imply equal attacker observations from any pair
/// of initial states agreeing on the microarchitectural registers.
pub fn verify(p: &VerificationProblem) -> Result<VerificationReport, EngineError> {
    let started = Instant::now();
    p.validate()?;
    let inst = instrument(&p.impl_circuit, &[&p.leakage, &p.attacker])?;
    let paired =
        stuttering_product(&inst, &p.retire).map_err(|d| EngineError::Invalid(d.to_string()))?;
    let product = &paired.circuit;

    let phi1 = tag_expr(&p.retire, 1);
    let phi2 = tag_expr(&p.retire, 2);
    let phi_initial = TemporalFormula::atom(Expr::conj([
        tag_expr(&p.impl_circuit.init, 1),
        tag_expr(&p.impl_circuit.init, 2),
        registers_equiv(&p.impl_circuit, p.uarch.iter().cloned(), 1, 2),
    ]));
    let phi_ctr_equiv = TemporalFormula::implies(
        TemporalFormula::and(
            TemporalFormula::atom(phi1.clone()),
            TemporalFormula::atom(phi2.clone()),
        ),
        TemporalFormula::atom(outputs_equiv(&p.leakage, 1, 2)),
    );

    let candidates = candidates_for_pair(p, &paired)?;
    let (learned, stats) = match learn_inv(
        product,
        &phi_initial,
        &phi_ctr_equiv,
        p.lookahead,
        candidates,
    ) {
        Ok(r) => r,
        Err(EngineError::Logic(LogicError::ResourceLimit(why))) => {
            return Ok(VerificationReport {
                verdict: Verdict::NotProved(format!("resource limit: {why}")),
                learned: Vec::new(),
                iterations_base: 0,
                iterations_inductive: 0,
                solver_queries: 0,
                lookahead: p.lookahead,
                cex: None,
                elapsed: started.elapsed(),
            });
        }
        Err(e) => return Err(e),
    };

    // Line-5 check: the learned invariants must force equal attacker
    // observations and synchronized retirement, over all states.
    let goal = TemporalFormula::implies(
        TemporalFormula::conj(
            learned
                .iter()
                .map(|ci| TemporalFormula::atom(ci.expr.clone())),
        ),
        TemporalFormula::atom(Expr::and(
            outputs_equiv(&p.attacker, 1, 2),
            Expr::bin(crate::ir::BinOp::Iff, phi1, phi2),
        )),
    );
    let bounds = DomainBounds::full(product);
    let solver_queries = stats.solver_queries + 1;
    let (verdict, cex) = match check_validity(product, &goal, Backend::Symbolic, &bounds) {
        Ok(Outcome::Valid) => (Verdict::Satisfied, None),
        Ok(Outcome::Counterexample(cex)) => (
            Verdict::NotProved("learned invariants do not force attacker equality".to_string()),
            Some(cex),
        ),
        Err(LogicError::ResourceLimit(why)) => {
            (Verdict::NotProved(format!("resource limit: {why}")), None)
        }
        Err(e) => return Err(e.into()),
    };

    Ok(VerificationReport {
        verdict,
        learned,
        iterations_base: stats.iterations_base,
        iterations_inductive: stats.iterations_inductive,
        solver_queries,
        lookahead: p.lookahead,
        cex,
        elapsed: started.elapsed(),
    })
}

/// Contract-satisfaction check over the plain four-copy product: copies 1
/// and 2 run the reference model carrying the leakage monitor, copies 3
/// and 4 run the implementation carrying the attacker. `Satisfied` proves
/// the contract-level property directly, without the decoupling step.
pub fn verify_4way(
    arch: &Circuit,
    p: &VerificationProblem,
) -> Result<VerificationReport, EngineError> {
    let started = Instant::now();
    p.validate()?;
    let diags = crate::ir::validate(arch);
    if !diags.is_empty() {
        return Err(EngineError::Invalid(format!(
            "reference model does not validate:\n{diags}"
        )));
    }
    let arch_regs: std::collections::BTreeSet<String> =
        arch.decls.iter().map(|d| d.name.clone()).collect();
    if arch_regs != p.arch_registers() {
        return Err(EngineError::Invalid(format!(
            "reference registers {:?} do not match the architectural set {:?}",
            arch_regs,
            p.arch_registers()
        )));
    }
    for d in &arch.decls {
        let id = p.impl_circuit.decl(&d.name).expect("checked above");
        if id.width != d.width || id.array_len != d.array_len {
            return Err(EngineError::Invalid(format!(
                "register {} has different shapes in the two models",
                d.name
            )));
        }
    }

    let arch_inst = instrument(arch, &[&p.leakage])?;
    let impl_inst = instrument(&p.impl_circuit, &[&p.attacker])?;
    let product = four_way_product(&arch_inst, &impl_inst)
        .map_err(|d| EngineError::Invalid(d.to_string()))?;

    // Initial formula: all four copies in initial states, the architectural
    // registers tied 1-3 and 2-4, and the microarchitectural registers of
    // the implementation copies equal.
    let arch_equiv = Expr::and(
        registers_equiv(arch, arch_regs.iter().cloned(), 1, 3),
        registers_equiv(arch, arch_regs.iter().cloned(), 2, 4),
    );
    let phi_initial = TemporalFormula::atom(Expr::conj([
        product.init.clone(),
        arch_equiv,
        registers_equiv(&p.impl_circuit, p.uarch.iter().cloned(), 3, 4),
    ]));
    // Contract equivalence is unguarded here: the reference copies expose
    // their observations every cycle.
    let phi_ctr_equiv = TemporalFormula::atom(outputs_equiv(&p.leakage, 1, 2));

    let candidates = candidates_for_four_way(arch, p, &product)?;
    let (learned, stats) = match learn_inv(
        &product,
        &phi_initial,
        &phi_ctr_equiv,
        p.lookahead,
        candidates,
    ) {
        Ok(r) => r,
        Err(EngineError::Logic(LogicError::ResourceLimit(why))) => {
            return Ok(VerificationReport {
                verdict: Verdict::NotProved(format!("resource limit: {why}")),
                learned: Vec::new(),
                iterations_base: 0,
                iterations_inductive: 0,
                solver_queries: 0,
                lookahead: p.lookahead,
                cex: None,
                elapsed: started.elapsed(),
            });
        }
        Err(e) => return Err(e),
    };

    let goal = TemporalFormula::implies(
        TemporalFormula::conj(
            learned
                .iter()
                .map(|ci| TemporalFormula::atom(ci.expr.clone())),
        ),
        TemporalFormula::atom(outputs_equiv(&p.attacker, 3, 4)),
    );
    let bounds = DomainBounds::full(&product);
    let solver_queries = stats.solver_queries + 1;
    let (verdict, cex) = match check_validity(&product, &goal, Backend::Symbolic, &bounds) {
        Ok(Outcome::Valid) => (Verdict::Satisfied, None),
        Ok(Outcome::Counterexample(cex)) => (
            Verdict::NotProved("learned invariants do not force attacker equality".to_string()),
            Some(cex),
        ),
        Err(LogicError::ResourceLimit(why)) => {
            (Verdict::NotProved(format!("resource limit: {why}")), None)
        }
        Err(e) => return Err(e.into()),
    };

    Ok(VerificationReport {
        verdict,
        learned,
        iterations_base: stats.iterations_base,
        iterations_inductive: stats.iterations_inductive,
        solver_queries,
        lookahead: p.lookahead,
        cex,
        elapsed: started.elapsed(),
    })
}
