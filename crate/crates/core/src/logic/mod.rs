//! Temporal logic over circuits and two validity backends: exhaustive
//! enumeration over bounded domains and bounded unrolling to propositional
//! SAT.

mod formula;

pub use formula::TemporalFormula;

use crate::ir::Expr;
use crate::sim::{Sim, Valuation};

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum LogicError {
    #[error("formula contains an unbounded always; horizon {0} gives only a bounded verdict")]
    HorizonExceeded(u64),
    #[error("formula depth {needed} exceeds horizon {horizon}")]
    DepthExceedsHorizon { needed: u64, horizon: u64 },
    #[error("validity checking rejects unbounded always")]
    AlwaysInValidity,
    #[error("bounded domain too large: {0} initial states exceed limit {1}")]
    DomainTooLarge(u128, u64),
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("external solver failure: {0}")]
    ExternalSolver(String),
    #[error("internal: {0}")]
    Internal(String),
}

/// Truth of a formula at one cycle of one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Verdict {
    pub holds: bool,
    /// False when an `Always` was only checked up to the horizon.
    pub exact: bool,
}

/// Evaluates `f` at cycle `i` of the run starting from `mu`, simulating as
/// many cycles as the formula inspects. `Always` ranges over the cycles up
/// to `horizon` (their inner bounded operators may look further) and makes
/// the verdict inexact. Bounded operators whose reach from `i` exceeds the
/// horizon are an error.
pub fn holds_at(
    sim: &Sim,
    mu: &Valuation,
    i: u64,
    f: &TemporalFormula,
    horizon: u64,
) -> Result<Verdict, LogicError> {
    if let Some(d) = f.depth() {
        let needed = i + d as u64;
        if needed >= horizon.max(1) {
            return Err(LogicError::DepthExceedsHorizon {
                needed: needed + 1,
                horizon,
            });
        }
    }
    // Simulate far enough that operators nested under an always never run
    // off the end of the window.
    let states = sim.states(mu, horizon.max(i + 1) + shallow_depth(f) as u64);
    let mut exact = true;
    let holds = eval_at(sim, &states, i as usize, horizon as usize, f, &mut exact);
    Ok(Verdict { holds, exact })
}

/// Furthest offset the formula inspects beyond an enclosing always window.
fn shallow_depth(f: &TemporalFormula) -> u32 {
    use TemporalFormula::*;
    match f {
        Atom(_) => 0,
        Next(g) => shallow_depth(g) + 1,
        Future(k, g) => shallow_depth(g) + k.saturating_sub(1),
        Always(g) => shallow_depth(g),
        Not(g) => shallow_depth(g),
        And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) => shallow_depth(a).max(shallow_depth(b)),
    }
}

/// Like [`holds_at`] but refuses formulas containing `Always` instead of
/// reporting a bounded verdict.
pub fn holds_at_exact(
    sim: &Sim,
    mu: &Valuation,
    i: u64,
    f: &TemporalFormula,
    horizon: u64,
) -> Result<bool, LogicError> {
    if f.depth().is_none() {
        return Err(LogicError::HorizonExceeded(horizon));
    }
    holds_at(sim, mu, i, f, horizon).map(|v| v.holds)
}

fn eval_at(
    sim: &Sim,
    states: &[Valuation],
    i: usize,
    horizon: usize,
    f: &TemporalFormula,
    exact: &mut bool,
) -> bool {
    use TemporalFormula::*;
    match f {
        Atom(e) => sim.satisfies(&states[i], e),
        Next(g) => eval_at(sim, states, i + 1, horizon, g, exact),
        Future(k, g) => (0..*k as usize).all(|j| eval_at(sim, states, i + j, horizon, g, exact)),
        Always(g) => {
            *exact = false;
            (i..horizon.max(i)).all(|j| eval_at(sim, states, j, horizon, g, exact))
        }
        Not(g) => !eval_at(sim, states, i, horizon, g, exact),
        And(a, b) => {
            eval_at(sim, states, i, horizon, a, exact) && eval_at(sim, states, i, horizon, b, exact)
        }
        Or(a, b) => {
            eval_at(sim, states, i, horizon, a, exact) || eval_at(sim, states, i, horizon, b, exact)
        }
        Implies(a, b) => {
            !eval_at(sim, states, i, horizon, a, exact)
                || eval_at(sim, states, i, horizon, b, exact)
        }
        Iff(a, b) => {
            eval_at(sim, states, i, horizon, a, exact) == eval_at(sim, states, i, horizon, b, exact)
        }
    }
}

/// Convenience wrapper for a formula-level expression atom.
pub fn atom(e: Expr) -> TemporalFormula {
    TemporalFormula::Atom(e)
}

mod blast;
pub mod bounds;
pub mod check;
pub mod cnf;
mod dimacs;
mod exhaustive;
pub mod solver;

pub use bounds::DomainBounds;
pub use check::{check_validity, unroll, Backend, CexTrace, Outcome, UnrolledQuery};
