//! Candidate relational invariants: automatically generated equalities over
//! the two copies of a product circuit, plus user-supplied predicates taken
//! verbatim.

use crate::ir::{Circuit, Expr, RegisterDecl};
use crate::textio;
use crate::transform::{tag, tag_expr, PairedCircuit};

use super::problem::{EngineError, VerificationProblem};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    /// `x.a == x.b` for a register of the underlying circuit.
    RegEq(String),
    /// `v.a == v.b` for a wire.
    WireEq(String),
    /// Equality of one attacker output across the observed copies.
    AttackerEq(String),
    /// The retirement predicate fires in both copies or neither.
    RetSync,
    User(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateInvariant {
    pub expr: Expr,
    pub provenance: Provenance,
}

impl CandidateInvariant {
    pub fn label(&self) -> String {
        match &self.provenance {
            Provenance::RegEq(n) => format!("reg-eq {n}"),
            Provenance::WireEq(n) => format!("wire-eq {n}"),
            Provenance::AttackerEq(n) => format!("attacker-eq {n}"),
            Provenance::RetSync => "retire-sync".into(),
            Provenance::User(l) => format!("user {l}"),
        }
    }
}

/// Cell-wise equality for arrays, plain equality for scalars, between
/// copies `a` and `b`.
pub fn register_equality(d: &RegisterDecl, a: u8, b: u8) -> Expr {
    match d.array_len {
        None => Expr::eq(Expr::Ref(tag(&d.name, a)), Expr::Ref(tag(&d.name, b))),
        Some(len) => Expr::conj((0..len).map(|k| {
            Expr::eq(
                Expr::ArrayRead(tag(&d.name, a), Box::new(Expr::num(k))),
                Expr::ArrayRead(tag(&d.name, b), Box::new(Expr::num(k))),
            )
        })),
    }
}

fn push_unique(out: &mut Vec<CandidateInvariant>, ci: CandidateInvariant) {
    if !out.iter().any(|c| c.expr == ci.expr) {
        out.push(ci);
    }
}

/// The candidate pool for a two-copy problem, in deterministic order:
/// register equalities (declaration order), wire equalities, attacker
/// output equalities, retirement synchrony, then user candidates verbatim.
pub fn candidates_for_pair(
    p: &VerificationProblem,
    paired: &PairedCircuit,
) -> Result<Vec<CandidateInvariant>, EngineError> {
    let mut out: Vec<CandidateInvariant> = Vec::new();
    for d in &p.impl_circuit.decls {
        push_unique(
            &mut out,
            CandidateInvariant {
                expr: register_equality(d, 1, 2),
                provenance: Provenance::RegEq(d.name.clone()),
            },
        );
    }
    for w in &p.impl_circuit.wires {
        push_unique(
            &mut out,
            CandidateInvariant {
                expr: Expr::eq(Expr::Ref(tag(&w.name, 1)), Expr::Ref(tag(&w.name, 2))),
                provenance: Provenance::WireEq(w.name.clone()),
            },
        );
    }
    for o in &p.attacker.body.outputs {
        push_unique(
            &mut out,
            CandidateInvariant {
                expr: Expr::eq(Expr::Ref(tag(o, 1)), Expr::Ref(tag(o, 2))),
                provenance: Provenance::AttackerEq(o.clone()),
            },
        );
    }
    push_unique(
        &mut out,
        CandidateInvariant {
            expr: Expr::bin(
                crate::ir::BinOp::Iff,
                tag_expr(&p.retire, 1),
                tag_expr(&p.retire, 2),
            ),
            provenance: Provenance::RetSync,
        },
    );
    for (label, src) in &p.user_candidates {
        let expr =
            textio::parse_expr_over(src, &paired.circuit).map_err(|err| EngineError::Parse {
                what: format!("user candidate {label}"),
                err,
            })?;
        out.push(CandidateInvariant {
            expr,
            provenance: Provenance::User(label.clone()),
        });
    }
    Ok(out)
}

/// Standalone form that builds the stuttering product itself.
pub fn generate_candidates(
    p: &VerificationProblem,
) -> Result<Vec<CandidateInvariant>, EngineError> {
    p.validate()?;
    let inst = super::verify::instrument(&p.impl_circuit, &[&p.leakage, &p.attacker])?;
    let paired = crate::transform::stuttering_product(&inst, &p.retire)
        .map_err(|d| EngineError::Invalid(d.to_string()))?;
    candidates_for_pair(p, &paired)
}

/// The candidate pool for the four-copy product: equalities between the
/// two reference copies (1, 2), between the two implementation copies
/// (3, 4), the cross-copy architectural ties (1-3 and 2-4), attacker
/// output equalities on the implementation copies, then user candidates.
pub fn candidates_for_four_way(
    arch: &Circuit,
    p: &VerificationProblem,
    product: &Circuit,
) -> Result<Vec<CandidateInvariant>, EngineError> {
    let mut out: Vec<CandidateInvariant> = Vec::new();
    for d in &arch.decls {
        push_unique(
            &mut out,
            CandidateInvariant {
                expr: register_equality(d, 1, 2),
                provenance: Provenance::RegEq(format!("{}'", d.name)),
            },
        );
    }
    for d in &p.impl_circuit.decls {
        push_unique(
            &mut out,
            CandidateInvariant {
                expr: register_equality(d, 3, 4),
                provenance: Provenance::RegEq(d.name.clone()),
            },
        );
    }
    for d in &arch.decls {
        for (a, b) in [(1u8, 3u8), (2, 4)] {
            push_unique(
                &mut out,
                CandidateInvariant {
                    expr: register_equality(d, a, b),
                    provenance: Provenance::RegEq(format!("{}:{a}-{b}", d.name)),
                },
            );
        }
    }
    for w in &p.impl_circuit.wires {
        push_unique(
            &mut out,
            CandidateInvariant {
                expr: Expr::eq(Expr::Ref(tag(&w.name, 3)), Expr::Ref(tag(&w.name, 4))),
                provenance: Provenance::WireEq(w.name.clone()),
            },
        );
    }
    for o in &p.attacker.body.outputs {
        push_unique(
            &mut out,
            CandidateInvariant {
                expr: Expr::eq(Expr::Ref(tag(o, 3)), Expr::Ref(tag(o, 4))),
                provenance: Provenance::AttackerEq(o.clone()),
            },
        );
    }
    for (label, src) in &p.user_candidates {
        let expr = textio::parse_expr_over(src, product).map_err(|err| EngineError::Parse {
            what: format!("user candidate {label}"),
            err,
        })?;
        out.push(CandidateInvariant {
            expr,
            provenance: Provenance::User(label.clone()),
        });
    }
    Ok(out)
}
