//! Deterministic printing. `parse(print(c))` is structurally equal to `c`
//! for well-formed circuits, and two prints of the same IR are byte-equal.

use crate::ir::{BinOp, Circuit, Expr, UnOp};
use crate::transform::Monitor;
use std::fmt::Write;

fn bin_info(op: BinOp) -> (u8, &'static str, bool) {
    // (precedence, spelling, right-assoc)
    match op {
        BinOp::Iff => (1, "<->", false),
        BinOp::Imp => (2, "->", true),
        BinOp::Or => (4, "||", false),
        BinOp::And => (5, "&&", false),
        BinOp::BitOr => (6, "|", false),
        BinOp::BitXor => (7, "^", false),
        BinOp::BitAnd => (8, "&", false),
        BinOp::Eq => (9, "==", false),
        BinOp::Ne => (9, "!=", false),
        BinOp::Lt => (10, "<", false),
        BinOp::Le => (10, "<=", false),
        BinOp::Gt => (10, ">", false),
        BinOp::Ge => (10, ">=", false),
        BinOp::Shl => (11, "<<", false),
        BinOp::Shr => (11, ">>", false),
        BinOp::Add => (12, "+", false),
        BinOp::Sub => (12, "-", false),
        BinOp::Mul => (13, "*", false),
        BinOp::Div => (13, "/", false),
        BinOp::Mod => (13, "%", false),
    }
}

fn prec_of(e: &Expr) -> u8 {
    match e {
        Expr::Const(_) | Expr::Ref(_) => 16,
        Expr::ArrayRead(..) | Expr::BitSel(..) => 15,
        Expr::Unary(..) => 14,
        Expr::Ite(..) => 3,
        Expr::Binary(op, ..) => bin_info(*op).0,
    }
}

fn write_expr(out: &mut String, e: &Expr, min_prec: u8, spaced: bool) {
    let p = prec_of(e);
    let parens = p < min_prec;
    if parens {
        out.push('(');
    }
    match e {
        Expr::Const(v) => {
            let _ = write!(out, "{v}");
        }
        Expr::Ref(n) => out.push_str(n),
        Expr::Unary(op, a) => {
            out.push_str(match op {
                UnOp::Not => "!",
                UnOp::BitNot => "~",
                UnOp::Neg => "-",
            });
            write_expr(out, a, 14, spaced);
        }
        Expr::Binary(op, a, b) => {
            let (prec, sym, right) = bin_info(*op);
            let (lp, rp) = if right {
                (prec + 1, prec)
            } else {
                (prec, prec + 1)
            };
            write_expr(out, a, lp, spaced);
            if spaced {
                let _ = write!(out, " {sym} ");
            } else {
                out.push_str(sym);
            }
            write_expr(out, b, rp, spaced);
        }
        Expr::Ite(c, t, f) => {
            write_expr(out, c, 4, spaced);
            out.push_str(if spaced { " ? " } else { "?" });
            write_expr(out, t, 0, spaced);
            out.push_str(if spaced { " : " } else { ":" });
            write_expr(out, f, 3, spaced);
        }
        Expr::BitSel(e, h, l) => {
            write_expr(out, e, 15, spaced);
            out.push('[');
            write_expr(out, h, 0, spaced);
            out.push(':');
            write_expr(out, l, 0, spaced);
            out.push(']');
        }
        Expr::ArrayRead(a, ix) => {
            out.push_str(a);
            out.push('[');
            write_expr(out, ix, 0, spaced);
            out.push(']');
        }
    }
    if parens {
        out.push(')');
    }
}

pub fn print_expr(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, 0, true);
    s
}

/// Space-free form, used where an expression rides inside a `key=value`
/// field.
pub fn print_expr_compact(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, 0, false);
    s
}

pub fn print_circuit(c: &Circuit) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "circuit {} width {} {{", c.name, c.width);
    write_items(&mut s, c, true);
    s.push_str("}\n");
    s
}

pub fn print_monitor(m: &Monitor) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "monitor {} on {} {{", m.name(), m.base);
    write_items(&mut s, &m.body, false);
    s.push_str("}\n");
    s
}

fn write_items(s: &mut String, c: &Circuit, with_init: bool) {
    for d in &c.decls {
        match d.array_len {
            None => {
                let _ = writeln!(s, "  reg {}[{}];", d.name, d.width);
            }
            Some(len) => {
                let _ = writeln!(s, "  mem {}[{}] width {};", d.name, len, d.width);
            }
        }
    }
    for w in &c.wires {
        let _ = writeln!(s, "  wire {} = {};", w.name, print_expr(&w.expr));
    }
    for a in &c.assigns {
        s.push_str("  ");
        s.push_str(&a.target);
        if let Some(ix) = &a.index {
            let _ = write!(s, "[{}]", print_expr(ix));
        }
        let _ = write!(s, " <= {}", print_expr(&a.rhs));
        if let Some(g) = &a.guard {
            let _ = write!(s, " when {}", print_expr(g));
        }
        s.push_str(";\n");
    }
    if c.outputs.is_empty() {
        s.push_str("  output;\n");
    } else {
        let _ = writeln!(s, "  output {};", c.outputs.join(", "));
    }
    if with_init && c.init != Expr::num(1) {
        let _ = writeln!(s, "  init {};", print_expr(&c.init));
    }
}

pub fn print_file(circuits: &[Circuit], monitors: &[Monitor]) -> String {
    let mut s = String::new();
    for c in circuits {
        s.push_str(&print_circuit(c));
        s.push('\n');
    }
    for m in monitors {
        s.push_str(&print_monitor(m));
        s.push('\n');
    }
    if s.ends_with("\n\n") {
        s.pop();
    }
    s
}
