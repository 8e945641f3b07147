//! Validity checking for bounded-depth temporal formulas over all initial
//! states in a domain, with an exhaustive-enumeration backend and a
//! SAT-based symbolic backend. Symbolic counterexamples are decoded and
//! re-simulated before being returned, so a reported trace always refutes
//! the formula under the reference semantics.

use std::time::{Duration, Instant};

use super::blast::Unrolling;
use super::bounds::DomainBounds;
use super::dimacs::{run_external, ExternalResult};
use super::solver::{SatResult, Solver};
use super::{exhaustive, LogicError, TemporalFormula};
use crate::ir::Circuit;
use crate::sim::{Sim, Valuation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Exhaustive,
    Symbolic,
}

/// A concrete refutation: the initial state plus the simulated states the
/// formula inspects (cycles `0..=depth`).
#[derive(Debug, Clone, PartialEq)]
pub struct CexTrace {
    pub init: Valuation,
    pub states: Vec<Valuation>,
}

impl CexTrace {
    pub fn state_at(&self, cycle: u64) -> &Valuation {
        &self.states[cycle as usize]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Valid,
    Counterexample(CexTrace),
}

/// Reads the per-process solve deadline from `UVLEAK_LIMIT_SECS`.
pub fn solve_deadline() -> Option<Instant> {
    let secs: f64 = std::env::var("UVLEAK_LIMIT_SECS").ok()?.parse().ok()?;
    Some(Instant::now() + Duration::from_secs_f64(secs))
}

/// Decides whether `f` holds at cycle 0 for every initial state within
/// `bounds`. The formula must be `Always`-free. The symbolic backend honors
/// `UVLEAK_SOLVER` (external solver path) and `UVLEAK_LIMIT_SECS`.
pub fn check_validity(
    c: &Circuit,
    f: &TemporalFormula,
    backend: Backend,
    bounds: &DomainBounds,
) -> Result<Outcome, LogicError> {
    let depth = f.depth().ok_or(LogicError::AlwaysInValidity)? as u64;
    match backend {
        Backend::Exhaustive => {
            let sim = Sim::new(c);
            match exhaustive::find_refutation(c, f, bounds)? {
                None => Ok(Outcome::Valid),
                Some(init) => {
                    let states = sim.states(&init, depth + 1);
                    Ok(Outcome::Counterexample(CexTrace { init, states }))
                }
            }
        }
        Backend::Symbolic => {
            let mut unrolling = Unrolling::build(c, depth, bounds);
            let root = unrolling.blast_formula(f, 0);
            unrolling.cnf.add(vec![!root]);
            let deadline = solve_deadline();
            let model: Option<Vec<bool>> = match std::env::var("UVLEAK_SOLVER") {
                Ok(path) if !path.is_empty() => {
                    match run_external(&path, &unrolling.cnf, deadline)? {
                        ExternalResult::Unsat => None,
                        ExternalResult::Sat(assign) => Some(assign),
                    }
                }
                _ => {
                    let mut solver = Solver::new(&unrolling.cnf);
                    solver.set_deadline(deadline);
                    match solver.solve().map_err(|e| LogicError::ResourceLimit(e.0))? {
                        SatResult::Unsat => None,
                        SatResult::Sat => {
                            let n = unrolling.cnf.n_vars;
                            Some(
                                (0..n)
                                    .map(|v| solver.model_value(super::cnf::Lit::pos(v)))
                                    .collect(),
                            )
                        }
                    }
                }
            };
            match model {
                None => Ok(Outcome::Valid),
                Some(assign) => {
                    let read = |l: super::cnf::Lit| {
                        let v = assign[l.var() as usize];
                        if l.is_neg() {
                            !v
                        } else {
                            v
                        }
                    };
                    let init = unrolling.decode_state(&read, 0);
                    let sim = Sim::new(c);
                    let states = sim.states(&init, depth + 1);
                    // Decoded models must refute under the reference
                    // semantics; anything else is an encoding defect.
                    if exhaustive::eval(&sim, &states, 0, f) {
                        return Err(LogicError::Internal(
                            "decoded counterexample does not refute the formula".into(),
                        ));
                    }
                    Ok(Outcome::Counterexample(CexTrace { init, states }))
                }
            }
        }
    }
}

/// A symbolic unrolling scaffold: per-cycle register instances related by
/// the transition function, with helpers to pin values and decode models.
pub struct UnrolledQuery<'c> {
    circuit: &'c Circuit,
    unrolling: Unrolling<'c>,
}

pub fn unroll(c: &Circuit, depth: u64) -> UnrolledQuery<'_> {
    let bounds = DomainBounds::full(c);
    UnrolledQuery {
        circuit: c,
        unrolling: Unrolling::build(c, depth, &bounds),
    }
}

impl<'c> UnrolledQuery<'c> {
    pub fn depth(&self) -> u64 {
        self.unrolling.depth()
    }

    pub fn instance_count(&self, name: &str) -> usize {
        self.unrolling.instance_count(name)
    }

    pub fn pin(&mut self, name: &str, cycle: u64, value: u64) {
        self.unrolling.pin(name, cycle, value);
    }

    /// Solves the accumulated constraints; a model decodes to one state per
    /// cycle.
    pub fn solve(&mut self) -> Result<Option<Vec<Valuation>>, LogicError> {
        let mut solver = Solver::new(&self.unrolling.cnf);
        solver.set_deadline(solve_deadline());
        match solver.solve().map_err(|e| LogicError::ResourceLimit(e.0))? {
            SatResult::Unsat => Ok(None),
            SatResult::Sat => {
                let read = |l: super::cnf::Lit| solver.model_value(l);
                let states: Vec<Valuation> = (0..=self.unrolling.depth())
                    .map(|t| self.unrolling.decode_state(&read, t))
                    .collect();
                Ok(Some(states))
            }
        }
    }

    pub fn circuit(&self) -> &Circuit {
        self.circuit
    }
}
