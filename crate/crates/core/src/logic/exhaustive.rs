//! Enumeration backend: checks a bounded-depth formula against every
//! initial state a domain bound describes, by direct simulation.

use super::bounds::DomainBounds;
use super::{LogicError, TemporalFormula};
use crate::ir::Circuit;
use crate::sim::{Sim, Valuation};

/// Returns the first refuting initial state, or `None` when the formula
/// holds at cycle 0 of every state in the domain.
pub fn find_refutation(
    c: &Circuit,
    f: &TemporalFormula,
    bounds: &DomainBounds,
) -> Result<Option<Valuation>, LogicError> {
    let depth = f.depth().ok_or(LogicError::AlwaysInValidity)? as u64;
    let count = bounds.state_count();
    if count > bounds.max_states as u128 {
        return Err(LogicError::DomainTooLarge(count, bounds.max_states));
    }
    let sim = Sim::new(c);
    for mu in bounds.enumerate(sim.layout()) {
        let states = sim.states(&mu, depth + 1);
        if !eval(&sim, &states, 0, f) {
            return Ok(Some(mu));
        }
    }
    Ok(None)
}

pub(super) fn eval(sim: &Sim, states: &[Valuation], i: usize, f: &TemporalFormula) -> bool {
    use TemporalFormula::*;
    match f {
        Atom(e) => sim.satisfies(&states[i], e),
        Next(g) => eval(sim, states, i + 1, g),
        Future(k, g) => (0..*k as usize).all(|j| eval(sim, states, i + j, g)),
        Always(_) => unreachable!("rejected by depth check"),
        Not(g) => !eval(sim, states, i, g),
        And(a, b) => eval(sim, states, i, a) && eval(sim, states, i, b),
        Or(a, b) => eval(sim, states, i, a) || eval(sim, states, i, b),
        Implies(a, b) => !eval(sim, states, i, a) || eval(sim, states, i, b),
        Iff(a, b) => eval(sim, states, i, a) == eval(sim, states, i, b),
    }
}
