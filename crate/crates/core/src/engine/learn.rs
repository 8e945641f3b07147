//! Inductive pruning of candidate invariants.
//!
//! Starting from the full pool, the base phase checks that the candidates
//! hold at cycle 0 of every run whose initial condition and unrolled
//! assumption hold; the inductive phase checks that they survive one
//! transition. Each failed check yields a counterexample state, and every
//! candidate false at the evaluation state is discarded (base: cycle 0,
//! inductive: cycle 1). The surviving set `LI` satisfies
//! `(initial && always assumption) -> always LI` over the circuit.

use crate::ir::Circuit;
use crate::logic::{check_validity, Backend, DomainBounds, Outcome, TemporalFormula};
use crate::sim::Sim;

use super::candidates::CandidateInvariant;
use super::problem::EngineError;

#[derive(Debug, Clone, Copy, Default)]
pub struct LearnStats {
    pub iterations_base: u32,
    pub iterations_inductive: u32,
    pub solver_queries: u32,
}

pub fn learn_inv(
    circuit: &Circuit,
    phi_initial: &TemporalFormula,
    phi_assumption: &TemporalFormula,
    lookahead: u32,
    mut candidates: Vec<CandidateInvariant>,
) -> Result<(Vec<CandidateInvariant>, LearnStats), EngineError> {
    assert!(lookahead >= 1, "lookahead must be positive");
    let mut stats = LearnStats::default();
    let bounds = DomainBounds::full(circuit);
    let sim = Sim::new(circuit);
    let conj = |cis: &[CandidateInvariant]| {
        TemporalFormula::conj(cis.iter().map(|ci| TemporalFormula::atom(ci.expr.clone())))
    };

    // Base phase: (initial && F<=b assumption) -> all candidates at cycle 0.
    loop {
        stats.iterations_base += 1;
        stats.solver_queries += 1;
        let psi = TemporalFormula::implies(
            TemporalFormula::and(
                phi_initial.clone(),
                TemporalFormula::future(lookahead, phi_assumption.clone()),
            ),
            conj(&candidates),
        );
        match check_validity(circuit, &psi, Backend::Symbolic, &bounds)? {
            Outcome::Valid => break,
            Outcome::Counterexample(cex) => {
                let state = cex.state_at(0);
                let before = candidates.len();
                candidates.retain(|ci| sim.satisfies(state, &ci.expr));
                if candidates.len() == before {
                    return Err(EngineError::Logic(crate::logic::LogicError::Internal(
                        "base counterexample falsified no candidate".into(),
                    )));
                }
            }
        }
    }

    // Inductive phase: (all candidates && F<=b assumption) -> next(all).
    loop {
        stats.iterations_inductive += 1;
        stats.solver_queries += 1;
        let psi = TemporalFormula::implies(
            TemporalFormula::and(
                conj(&candidates),
                TemporalFormula::future(lookahead, phi_assumption.clone()),
            ),
            TemporalFormula::next(conj(&candidates)),
        );
        match check_validity(circuit, &psi, Backend::Symbolic, &bounds)? {
            Outcome::Valid => break,
            Outcome::Counterexample(cex) => {
                let state = cex.state_at(1);
                let before = candidates.len();
                candidates.retain(|ci| sim.satisfies(state, &ci.expr));
                if candidates.len() == before {
                    return Err(EngineError::Logic(crate::logic::LogicError::Internal(
                        "inductive counterexample falsified no candidate".into(),
                    )));
                }
            }
        }
    }

    Ok((candidates, stats))
}
