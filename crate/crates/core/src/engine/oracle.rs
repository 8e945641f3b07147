//! Exhaustive-enumeration oracles for the two leakage properties.
//!
//! `oracle_leak_order` checks the two-trace property over the
//! implementation alone: among initial states agreeing on the
//! microarchitectural registers, equal retirement-filtered leakage-monitor
//! traces must give equal attacker traces. `oracle_contract_satisfaction`
//! checks the contract-level property: the hypothesis instead compares
//! unfiltered leakage traces on the reference model started from each
//! state's architectural part. Both scan every initial state within the
//! bounds up to a horizon and report the first violating pair in
//! enumeration order.

use std::collections::{BTreeSet, HashMap};

use crate::ir::{Circuit, Expr, Value};
use crate::logic::DomainBounds;
use crate::sim::{Sim, Valuation};
use crate::transform::Monitor;

use super::isa::restrict_to_arch;
use super::problem::EngineError;
use super::verify::instrument;

#[derive(Debug, Clone)]
pub enum OracleVerdict {
    Holds { states: u64, classes: u64 },
    Violation(Box<(Valuation, Valuation)>),
}

impl OracleVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, OracleVerdict::Holds { .. })
    }
}

type Record = Vec<Value>;
/// Per-equivalence-class bookkeeping: (microarchitectural key, contract
/// trace) maps to the first state seen and its attacker trace.
type ClassMap = HashMap<(Vec<Value>, Vec<Record>), (Valuation, Vec<Record>)>;

fn project_named(sim: &Sim, mu: &Valuation, names: &[String]) -> Record {
    let all = sim.project(mu);
    names
        .iter()
        .map(|n| {
            all.iter()
                .find(|(o, _)| o == n)
                .map(|(_, v)| *v)
                .expect("output present")
        })
        .collect()
}

fn uarch_key(mu: &Valuation, uarch: &BTreeSet<String>) -> Vec<Value> {
    let mut key = Vec::new();
    for r in uarch {
        match mu.get(r) {
            Some(v) => key.push(v),
            None => key.extend(mu.cells(r).expect("declared").iter().copied()),
        }
    }
    key
}

/// Microarchitectural leakage ordering, exhaustively within bounds.
pub fn oracle_leak_order(
    impl_circuit: &Circuit,
    leakage: &Monitor,
    attacker: &Monitor,
    uarch: &BTreeSet<String>,
    retire: &Expr,
    bounds: &DomainBounds,
    horizon: u64,
) -> Result<OracleVerdict, EngineError> {
    let count = bounds.state_count();
    if count > bounds.max_states as u128 {
        return Err(EngineError::Logic(
            crate::logic::LogicError::DomainTooLarge(count, bounds.max_states),
        ));
    }
    let inst = instrument(impl_circuit, &[leakage, attacker])?;
    let sim = Sim::new(&inst);
    let mut states = 0u64;
    let mut classes: ClassMap = HashMap::new();

    for mu in bounds.enumerate(sim.layout()) {
        if !sim.satisfies(&mu, &impl_circuit.init) {
            continue;
        }
        states += 1;
        let mut contract: Vec<Record> = Vec::new();
        let mut atk: Vec<Record> = Vec::new();
        let mut cur = mu.clone();
        for i in 0..horizon {
            if i > 0 {
                cur = sim.step(&cur);
            }
            if sim.satisfies(&cur, retire) {
                contract.push(project_named(&sim, &cur, &leakage.body.outputs));
            }
            atk.push(project_named(&sim, &cur, &attacker.body.outputs));
        }
        let key = (uarch_key(&mu, uarch), contract);
        match classes.get(&key) {
            None => {
                classes.insert(key, (mu, atk));
            }
            Some((witness, first_atk)) => {
                if *first_atk != atk {
                    return Ok(OracleVerdict::Violation(Box::new((witness.clone(), mu))));
                }
            }
        }
    }
    Ok(OracleVerdict::Holds {
        states,
        classes: classes.len() as u64,
    })
}

/// Contract satisfaction against the reference model, exhaustively within
/// bounds. Hypothesis traces are unfiltered leakage observations of the
/// reference model started from each state's architectural part.
pub fn oracle_contract_satisfaction(
    arch: &Circuit,
    impl_circuit: &Circuit,
    leakage: &Monitor,
    attacker: &Monitor,
    uarch: &BTreeSet<String>,
    bounds: &DomainBounds,
    horizon: u64,
) -> Result<OracleVerdict, EngineError> {
    let count = bounds.state_count();
    if count > bounds.max_states as u128 {
        return Err(EngineError::Logic(
            crate::logic::LogicError::DomainTooLarge(count, bounds.max_states),
        ));
    }
    let arch_inst = instrument(arch, &[leakage])?;
    let impl_inst = instrument(impl_circuit, &[attacker])?;
    let arch_sim = Sim::new(&arch_inst);
    let impl_sim = Sim::new(&impl_inst);
    let arch_regs: Vec<String> = arch.decls.iter().map(|d| d.name.clone()).collect();

    let mut states = 0u64;
    let mut classes: ClassMap = HashMap::new();

    for mu in bounds.enumerate(impl_sim.layout()) {
        if !impl_sim.satisfies(&mu, &impl_circuit.init) {
            continue;
        }
        states += 1;
        let arch_init = restrict_to_arch(&mu, &arch_sim, &arch_regs);
        let mut contract: Vec<Record> = Vec::new();
        let mut cur = arch_init;
        for i in 0..horizon {
            if i > 0 {
                cur = arch_sim.step(&cur);
            }
            contract.push(project_named(&arch_sim, &cur, &leakage.body.outputs));
        }
        let mut atk: Vec<Record> = Vec::new();
        let mut cur = mu.clone();
        for i in 0..horizon {
            if i > 0 {
                cur = impl_sim.step(&cur);
            }
            atk.push(project_named(&impl_sim, &cur, &attacker.body.outputs));
        }
        let key = (uarch_key(&mu, uarch), contract);
        match classes.get(&key) {
            None => {
                classes.insert(key, (mu, atk));
            }
            Some((witness, first_atk)) => {
                if *first_atk != atk {
                    return Ok(OracleVerdict::Violation(Box::new((witness.clone(), mu))));
                }
            }
        }
    }
    Ok(OracleVerdict::Holds {
        states,
        classes: classes.len() as u64,
    })
}
