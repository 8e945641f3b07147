//! Cross-module engine checks beyond the acceptance gate: reference-model
//! mutants, precondition errors, lookahead monotonicity, and agreement
//! between the concrete formula evaluator and the symbolic backend.

use uvleak_core::engine::*;
use uvleak_core::fixtures;
use uvleak_core::logic::{
    check_validity, holds_at, Backend, DomainBounds, Outcome, TemporalFormula,
};
use uvleak_core::sim::Sim;
use uvleak_core::textio::{parse_expr_over, parse_file, SourceFile};

fn corpus(name: &str) -> SourceFile {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(name);
    parse_file(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn simp_bounds() -> DomainBounds {
    DomainBounds::pinned_zero(&fixtures::simp())
        .scalar("ret", 1..=1)
        .scalar("res", 0..=3)
        .array("m", 4, 0..=3)
}

#[test]
fn skip_pc_mutant_fails_condition_one() {
    let file = corpus("mutants/simp_skip_pc.uv");
    let mutant = file.circuit("sIMPskip").unwrap().clone();
    let verdict = check_isa_compliance(
        &mutant,
        &fixtures::sisa(),
        &fixtures::retire(),
        &simp_bounds(),
        16,
    )
    .unwrap();
    let IsaVerdict::Violation(v) = verdict else {
        panic!("mutant must fail compliance")
    };
    assert_eq!(v.condition, 1);
    // With the equivalence hypothesis unmet, no claim ties the two oracles
    // together; compliance failure is all that is asserted here.
}

#[test]
fn early_writeback_mutant_fails_condition_two() {
    let file = corpus("mutants/simp_wb_early.uv");
    let mutant = file.circuit("sIMPwb").unwrap().clone();
    let verdict = check_isa_compliance(
        &mutant,
        &fixtures::sisa(),
        &fixtures::retire(),
        &simp_bounds(),
        16,
    )
    .unwrap();
    let IsaVerdict::Violation(v) = verdict else {
        panic!("mutant must fail compliance")
    };
    assert_eq!(v.condition, 2);
}

fn simp_problem(b: u32) -> VerificationProblem {
    VerificationProblem {
        impl_circuit: fixtures::simp(),
        leakage: fixtures::slm("sIMP"),
        attacker: fixtures::sat("sIMP"),
        retire: fixtures::retire(),
        lookahead: b,
        uarch: ["st", "res", "ret"].iter().map(|s| s.to_string()).collect(),
        user_candidates: vec![("s0".into(), "st.1 == 0 -> ret.1 == 1".into())],
    }
}

#[test]
fn lookahead_monotone_on_corpus() {
    // Larger lookaheads strengthen the assumption, so an accepted problem
    // stays accepted.
    for b in [1, 2, 3] {
        let r = verify(&simp_problem(b)).unwrap();
        assert_eq!(r.verdict, Verdict::Satisfied, "lookahead {b}");
    }
}

#[test]
fn four_way_register_set_must_match() {
    let p = simp_problem(1);
    // The counter's registers are not the architectural set of sIMP.
    let err = verify_4way(&fixtures::counter(), &p).unwrap_err();
    assert!(matches!(err, EngineError::Invalid(_)));
}

#[test]
fn attacker_exposing_result_register_not_proved() {
    let mut p = simp_problem(1);
    let mut atk = fixtures::sat("sIMP");
    atk.body.outputs.push("res".into());
    p.attacker = atk.clone();
    let r = verify(&p).unwrap();
    assert!(matches!(r.verdict, Verdict::NotProved(_)));

    // The exhaustive oracle confirms with a concrete distinguishing pair.
    let v = oracle_leak_order(
        &p.impl_circuit,
        &p.leakage,
        &atk,
        &p.uarch,
        &p.retire,
        &simp_bounds(),
        16,
    )
    .unwrap();
    assert!(matches!(v, OracleVerdict::Violation(_)));
}

#[test]
fn empty_attacker_always_satisfied() {
    let mut p = simp_problem(1);
    p.attacker = uvleak_core::transform::Monitor {
        base: "sIMP".into(),
        body: uvleak_core::ir::Circuit::new("sANone", 8),
    };
    let r = verify(&p).unwrap();
    assert_eq!(r.verdict, Verdict::Satisfied);
}

#[test]
fn engine_built_products_print_and_reparse() {
    let p = simp_problem(1);
    let inst = instrument(&p.impl_circuit, &[&p.leakage, &p.attacker]).unwrap();
    let sp = uvleak_core::transform::stuttering_product(&inst, &p.retire).unwrap();
    for c in [&inst, &sp.circuit] {
        let printed = uvleak_core::textio::print_circuit(c);
        let back = uvleak_core::textio::parse_circuit(&printed).unwrap();
        assert_eq!(&back, c);
    }
}

#[test]
fn four_way_rejects_leaky_mutant() {
    let file = corpus("mutants/simp_leaky.uv");
    let leaky = file.circuit("sIMPleak").unwrap().clone();
    let mut user: Vec<(String, String)> = Vec::new();
    for k in 0..16 {
        user.push((
            format!("z{k}"),
            format!("(m.1[{k}] == 0) <-> (m.2[{k}] == 0)"),
        ));
    }
    let p = VerificationProblem {
        leakage: file.monitor("sLM").unwrap().clone(),
        attacker: file.monitor("sAT").unwrap().clone(),
        retire: parse_expr_over("ret == 1", &leaky).unwrap(),
        lookahead: 4,
        uarch: ["st", "res", "ret"].iter().map(|s| s.to_string()).collect(),
        user_candidates: user,
        impl_circuit: leaky,
    };
    // The reference model is clean; only the implementation leaks.
    let r = verify_4way(&fixtures::sisa(), &p).unwrap();
    assert_ne!(r.verdict, Verdict::Satisfied);
}

#[test]
fn satisfied_reports_keep_attacker_and_sync_invariants() {
    use uvleak_core::ir::Expr;
    let r = verify(&simp_problem(1)).unwrap();
    assert_eq!(r.verdict, Verdict::Satisfied);
    let attacker_eq = Expr::eq(Expr::var("pc.1"), Expr::var("pc.2"));
    let retsync = Expr::bin(
        uvleak_core::ir::BinOp::Iff,
        uvleak_core::transform::tag_expr(&fixtures::retire(), 1),
        uvleak_core::transform::tag_expr(&fixtures::retire(), 2),
    );
    assert!(r.learned.iter().any(|ci| ci.expr == attacker_eq));
    assert!(r.learned.iter().any(|ci| ci.expr == retsync));
}

#[test]
fn concrete_and_symbolic_semantics_agree() {
    // Direct evaluation of a formula at one concrete state must coincide
    // with symbolic validity of (state == mu) -> formula over the full
    // domain.
    use rand::{Rng, SeedableRng};
    use uvleak_core::ir::Expr;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    let c = fixtures::simp();
    let sim = Sim::new(&c);
    for round in 0..15 {
        let mut mu = sim.zeroed();
        mu.set("pc", rng.gen_range(0..16));
        mu.set("st", rng.gen_range(0..2));
        mu.set("ret", rng.gen_range(0..2));
        mu.set("res", rng.gen_range(0..256));
        mu.set("reg", rng.gen_range(0..256));
        for i in 0..16 {
            mu.set_cell("m", i, rng.gen_range(0..4));
        }
        let f = TemporalFormula::and(
            TemporalFormula::implies(
                TemporalFormula::atom(parse_expr_over("st == 0", &c).unwrap()),
                TemporalFormula::future(
                    2,
                    TemporalFormula::atom(parse_expr_over("pc < 16", &c).unwrap()),
                ),
            ),
            TemporalFormula::next(TemporalFormula::atom(
                parse_expr_over("ret == 1 || st == 1", &c).unwrap(),
            )),
        );
        let direct = holds_at(&sim, &mu, 0, &f, 4).unwrap().holds;
        let mut pins: Vec<Expr> = Vec::new();
        for name in ["pc", "reg", "st", "res", "ret"] {
            let v = mu.get(name).unwrap().num().unwrap();
            pins.push(Expr::eq(Expr::var(name), Expr::num(v)));
        }
        for k in 0..16u64 {
            let v = mu.get_cell("m", k).unwrap().num().unwrap();
            pins.push(Expr::eq(
                Expr::ArrayRead("m".into(), Box::new(Expr::num(k))),
                Expr::num(v),
            ));
        }
        let g = TemporalFormula::implies(TemporalFormula::atom(Expr::conj(pins)), f.clone());
        let out = check_validity(&c, &g, Backend::Symbolic, &DomainBounds::full(&c)).unwrap();
        assert_eq!(
            matches!(out, Outcome::Valid),
            direct,
            "round {round}: symbolic disagrees with direct evaluation"
        );
    }
}
