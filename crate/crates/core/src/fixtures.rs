//! Hand-built copies of the bundled example circuits, shared by unit tests.
//! The `corpus/` files at the repository root mirror these constructions.

use crate::ir::{Assign, BinOp, Circuit, Expr, RegisterDecl};
use crate::sim::{Sim, Valuation};
use crate::transform::Monitor;

/// One-instruction-per-cycle reference machine: `pc <= pc + 1`,
/// `reg <= reg + m[pc]`, output `reg`.
pub fn sisa() -> Circuit {
    let mut c = Circuit::new("sISA", 8);
    c.decls.push(RegisterDecl::scalar("pc", 4));
    c.decls.push(RegisterDecl::scalar("reg", 8));
    c.decls.push(RegisterDecl::array("m", 16, 8));
    c.assigns.push(Assign::new(
        "pc",
        Expr::bin(BinOp::Add, Expr::var("pc"), Expr::num(1)),
    ));
    c.assigns.push(Assign::new(
        "reg",
        Expr::bin(BinOp::Add, Expr::var("reg"), m_at_pc()),
    ));
    c.outputs.push("reg".into());
    c.init = Expr::and(
        Expr::eq(Expr::var("pc"), Expr::num(0)),
        Expr::eq(Expr::var("reg"), Expr::num(0)),
    );
    c
}

fn m_at_pc() -> Expr {
    Expr::ArrayRead("m".into(), Box::new(Expr::var("pc")))
}

fn imm_is_zero() -> Expr {
    Expr::eq(m_at_pc(), Expr::num(0))
}

/// Two-phase pipelined implementation of [`sisa`]: execute state computes
/// `res = m[pc] + reg`, write-back state commits it; zero immediates take a
/// single-cycle fast path. `ret` marks retiring states.
pub fn simp() -> Circuit {
    let mut c = Circuit::new("sIMP", 8);
    c.decls.push(RegisterDecl::scalar("pc", 4));
    c.decls.push(RegisterDecl::scalar("reg", 8));
    c.decls.push(RegisterDecl::scalar("st", 1));
    c.decls.push(RegisterDecl::scalar("res", 8));
    c.decls.push(RegisterDecl::scalar("ret", 1));
    c.decls.push(RegisterDecl::array("m", 16, 8));
    let exec = Expr::eq(Expr::var("st"), Expr::num(0));
    c.assigns.push(Assign::new(
        "pc",
        Expr::ite(
            exec.clone(),
            Expr::ite(
                imm_is_zero(),
                Expr::bin(BinOp::Add, Expr::var("pc"), Expr::num(1)),
                Expr::var("pc"),
            ),
            Expr::bin(BinOp::Add, Expr::var("pc"), Expr::num(1)),
        ),
    ));
    c.assigns.push(Assign::new(
        "reg",
        Expr::ite(exec.clone(), Expr::var("reg"), Expr::var("res")),
    ));
    c.assigns.push(Assign::new(
        "st",
        Expr::ite(
            exec.clone(),
            Expr::ite(imm_is_zero(), Expr::num(0), Expr::num(1)),
            Expr::num(0),
        ),
    ));
    c.assigns.push(Assign::new(
        "res",
        Expr::ite(
            exec.clone(),
            Expr::ite(
                imm_is_zero(),
                Expr::var("res"),
                Expr::bin(BinOp::Add, m_at_pc(), Expr::var("reg")),
            ),
            Expr::var("res"),
        ),
    ));
    c.assigns.push(Assign::new(
        "ret",
        Expr::ite(
            exec,
            Expr::ite(imm_is_zero(), Expr::num(1), Expr::num(0)),
            Expr::num(1),
        ),
    ));
    c.outputs.push("reg".into());
    c.init = Expr::conj([
        Expr::eq(Expr::var("pc"), Expr::num(0)),
        Expr::eq(Expr::var("reg"), Expr::num(0)),
        Expr::eq(Expr::var("st"), Expr::num(0)),
        Expr::eq(Expr::var("ret"), Expr::num(1)),
    ]);
    c
}

/// The free-running counter `N = { i <= i + 1 } : { i }`.
pub fn counter() -> Circuit {
    let mut c = Circuit::new("N", 8);
    c.decls.push(RegisterDecl::scalar("i", 8));
    c.assigns.push(Assign::new(
        "i",
        Expr::bin(BinOp::Add, Expr::var("i"), Expr::num(1)),
    ));
    c.outputs.push("i".into());
    c
}

/// Leakage monitor exposing whether the current instruction is zero.
/// Monitor bodies carry no width of their own; composition adopts the
/// base circuit's.
pub fn slm(base: &str) -> Monitor {
    let mut body = Circuit::new("sLM", 0);
    body.wires.push(crate::ir::WireDef {
        name: "leak".into(),
        expr: imm_is_zero(),
    });
    body.outputs.push("leak".into());
    Monitor {
        base: base.to_string(),
        body,
    }
}

/// Attacker monitor exposing the program counter each cycle.
pub fn sat(base: &str) -> Monitor {
    let mut body = Circuit::new("sAT", 0);
    body.outputs.push("pc".into());
    Monitor {
        base: base.to_string(),
        body,
    }
}

/// The retirement predicate `ret == 1`.
pub fn retire() -> Expr {
    Expr::eq(Expr::var("ret"), Expr::num(1))
}

/// Fills memory with `m[i] = i` for `i <= 10` and zero elsewhere.
pub fn load_ramp(mu: &mut Valuation) {
    for i in 0..=10 {
        mu.set_cell("m", i, i);
    }
}

/// The worked-example initial state for [`sisa`]: `pc = 0`, `reg = 0`, ramp
/// memory.
pub fn mu_ramp(sim: &Sim) -> Valuation {
    let mut mu = sim.zeroed();
    load_ramp(&mut mu);
    mu
}

/// Same memory for [`simp`], with the pipeline idle and marked retiring.
pub fn mu_ramp_simp(sim: &Sim) -> Valuation {
    let mut mu = sim.zeroed();
    load_ramp(&mut mu);
    mu.set("ret", 1);
    mu
}
