//! Verification problem statement and report types.

use std::collections::BTreeSet;
use std::time::Duration;

use crate::ir::{self, Circuit, Expr};
use crate::logic::{CexTrace, LogicError};
use crate::sim::Valuation;
use crate::textio::{self, KvReport};
use crate::transform::{check_monitor, Monitor};

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error("monitor {0} is not a monitoring circuit for the target")]
    NotMonitoring(String),
    #[error("monitor {0} is not combinatorial")]
    NotCombinatorial(String),
    #[error("parse error in {what}: {err}")]
    Parse {
        what: String,
        err: textio::ParseError,
    },
    #[error(transparent)]
    Logic(#[from] LogicError),
}

/// One microarchitectural contract-satisfaction query: implementation,
/// leakage monitor, attacker, retirement predicate, lookahead, and the
/// microarchitectural register set. The architectural set is everything
/// else.
#[derive(Debug, Clone)]
pub struct VerificationProblem {
    pub impl_circuit: Circuit,
    pub leakage: Monitor,
    pub attacker: Monitor,
    pub retire: Expr,
    pub lookahead: u32,
    pub uarch: BTreeSet<String>,
    /// Extra candidate invariants, as `(label, predicate source)` pairs
    /// parsed over the product circuit (`.1`/`.2` suffixes name the copies,
    /// `.3`/`.4` in the four-copy variant).
    pub user_candidates: Vec<(String, String)>,
}

impl VerificationProblem {
    pub fn arch_registers(&self) -> BTreeSet<String> {
        self.impl_circuit
            .decls
            .iter()
            .map(|d| d.name.clone())
            .filter(|n| !self.uarch.contains(n))
            .collect()
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let diags = ir::validate(&self.impl_circuit);
        if !diags.is_empty() {
            return Err(EngineError::Invalid(format!(
                "implementation does not validate:\n{diags}"
            )));
        }
        if self.lookahead < 1 {
            return Err(EngineError::Invalid("lookahead must be at least 1".into()));
        }
        for m in [&self.leakage, &self.attacker] {
            let check = check_monitor(m, &self.impl_circuit);
            if !check.is_monitoring {
                return Err(EngineError::NotMonitoring(m.name().to_string()));
            }
            if !check.is_combinatorial {
                return Err(EngineError::NotCombinatorial(m.name().to_string()));
            }
        }
        ir::check_expr_over(&self.impl_circuit, &self.retire).map_err(EngineError::Invalid)?;
        for r in &self.uarch {
            if self.impl_circuit.decl(r).is_none() {
                return Err(EngineError::Invalid(format!(
                    "microarchitectural register {r} is not declared"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    /// The learned invariants prove attacker-output equality (and, for the
    /// stuttering engine, retirement synchrony).
    Satisfied,
    /// Proof failed for the stated reason; nothing is claimed either way.
    NotProved(String),
    /// A failure witnessed by a concrete distinguishing pair of runs.
    CounterexampleFound,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Satisfied => "Satisfied",
            Verdict::NotProved(_) => "NotProved",
            Verdict::CounterexampleFound => "CounterexampleFound",
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub verdict: Verdict,
    pub learned: Vec<super::candidates::CandidateInvariant>,
    pub iterations_base: u32,
    pub iterations_inductive: u32,
    pub solver_queries: u32,
    pub lookahead: u32,
    /// Product-circuit trace refuting the final implication; the two runs
    /// are the `.1`- and `.2`-suffixed projections.
    pub cex: Option<CexTrace>,
    pub elapsed: Duration,
}

impl VerificationReport {
    /// Stable `key=value` form; field order is fixed.
    pub fn machine_format(&self) -> String {
        let mut kv = KvReport::new();
        kv.push("result", self.verdict.as_str());
        if let Verdict::NotProved(reason) = &self.verdict {
            kv.push("reason", reason);
        }
        kv.push("invariants_learned", self.learned.len());
        kv.push("iterations_base", self.iterations_base);
        kv.push("iterations_inductive", self.iterations_inductive);
        kv.push("solver_queries", self.solver_queries);
        kv.push("lookahead", self.lookahead);
        for ci in &self.learned {
            kv.push("invariant", textio::print_expr_compact(&ci.expr));
        }
        if let Some(cex) = &self.cex {
            kv.push("counterexample", "below");
            kv.push_block(&dump_states(&cex.states));
        }
        kv.to_string()
    }
}

/// Full-state dump (every register, arrays cell by cell) of a short run;
/// used for counterexample attachments where output projection would hide
/// the interesting registers.
pub fn dump_states(states: &[Valuation]) -> String {
    let mut out = String::new();
    out.push_str("trace=full\n");
    for (i, s) in states.iter().enumerate() {
        out.push_str(&format!("cycle={i}"));
        let layout = s.layout().clone();
        for (name, _) in &layout.scalars {
            out.push_str(&format!(" {name}={}", s.get(name).unwrap()));
        }
        for (name, len, _) in &layout.arrays {
            for k in 0..*len {
                out.push_str(&format!(" {name}[{k}]={}", s.get_cell(name, k).unwrap()));
            }
        }
        out.push('\n');
    }
    out
}
