//! Bounded testing of reference-model compliance: over every initial state
//! in a finite domain, the implementation's retirement-filtered
//! architectural states must replay the reference model's run, and the
//! architectural registers must hold still on non-retiring cycles. This is
//! testing within bounds and a horizon, not proof.

use std::collections::BTreeSet;

use crate::ir::{Circuit, Expr};
use crate::logic::DomainBounds;
use crate::sim::{Sim, Valuation};

use super::problem::EngineError;

#[derive(Debug, Clone)]
pub struct IsaViolation {
    pub init: Valuation,
    pub cycle: u64,
    /// 1: a witnessed architectural state disagrees with the reference
    /// run; 2: an architectural register changed on a non-retiring cycle.
    pub condition: u8,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub enum IsaVerdict {
    Pass { states_checked: u64 },
    Violation(Box<IsaViolation>),
}

pub fn check_isa_compliance(
    impl_circuit: &Circuit,
    arch: &Circuit,
    retire: &Expr,
    bounds: &DomainBounds,
    horizon: u64,
) -> Result<IsaVerdict, EngineError> {
    let arch_regs: Vec<String> = arch.decls.iter().map(|d| d.name.clone()).collect();
    for r in &arch_regs {
        let (Some(di), Some(da)) = (impl_circuit.decl(r), arch.decl(r)) else {
            return Err(EngineError::Invalid(format!(
                "architectural register {r} is not declared by the implementation"
            )));
        };
        if di.width != da.width || di.array_len != da.array_len {
            return Err(EngineError::Invalid(format!(
                "register {r} has different shapes in the two models"
            )));
        }
    }
    let count = bounds.state_count();
    if count > bounds.max_states as u128 {
        return Err(EngineError::Logic(
            crate::logic::LogicError::DomainTooLarge(count, bounds.max_states),
        ));
    }

    let impl_sim = Sim::new(impl_circuit);
    let arch_sim = Sim::new(arch);
    let arch_names: BTreeSet<&str> = arch_regs.iter().map(String::as_str).collect();
    let mut states_checked = 0u64;

    for mu in bounds.enumerate(impl_sim.layout()) {
        if !impl_sim.satisfies(&mu, &impl_circuit.init) {
            continue;
        }
        states_checked += 1;
        let impl_states = impl_sim.states(&mu, horizon);

        // Condition 2 first: architectural frame stability off retirement.
        for i in 1..impl_states.len() {
            if !impl_sim.satisfies(&impl_states[i], retire)
                && !impl_states[i].agrees_on(&impl_states[i - 1], arch_names.iter().copied())
            {
                return Ok(IsaVerdict::Violation(Box::new(IsaViolation {
                    init: mu,
                    cycle: i as u64,
                    condition: 2,
                    detail: "architectural state changed on a non-retiring cycle".into(),
                })));
            }
        }

        // Condition 1: witnessed architectural states replay the reference
        // model.
        let arch_init = restrict_to_arch(&mu, &arch_sim, &arch_regs);
        let witnessed: Vec<&Valuation> = impl_states
            .iter()
            .filter(|s| impl_sim.satisfies(s, retire))
            .collect();
        let arch_states = arch_sim.states(&arch_init, witnessed.len() as u64);
        for (j, (w, a)) in witnessed.iter().zip(arch_states.iter()).enumerate() {
            for r in &arch_regs {
                let same = match w.get(r) {
                    Some(v) => a.get(r) == Some(v),
                    None => w.cells(r) == a.cells(r),
                };
                if !same {
                    return Ok(IsaVerdict::Violation(Box::new(IsaViolation {
                        init: mu,
                        cycle: j as u64,
                        condition: 1,
                        detail: format!(
                            "witnessed architectural state {j} disagrees with the reference on {r}"
                        ),
                    })));
                }
            }
        }
    }
    Ok(IsaVerdict::Pass { states_checked })
}

/// Builds a reference-model state from the architectural part of an
/// implementation state.
pub fn restrict_to_arch(mu: &Valuation, arch_sim: &Sim, arch_regs: &[String]) -> Valuation {
    let mut out = arch_sim.zeroed();
    for r in arch_regs {
        match mu.get(r) {
            Some(v) => {
                out.try_set(r, v).unwrap();
            }
            None => {
                let cells = mu.cells(r).expect("register shape checked");
                for (k, v) in cells.iter().enumerate() {
                    out.try_set_cell(r, k as u64, *v).unwrap();
                }
            }
        }
    }
    out
}
