//! Seeded random generation of small circuits, bounded-depth formulas, and
//! matching enumeration domains for the backend-agreement suite. Shapes are
//! skewed toward the awkward corners: dynamic bit selects, zero divisors,
//! out-of-range array reads, guarded writes.

use rand::Rng;
use uvleak_core::ir::{Assign, BinOp, Circuit, Expr, RegisterDecl, UnOp, WireDef};
use uvleak_core::logic::{DomainBounds, TemporalFormula};

const BINOPS: &[BinOp] = &[
    BinOp::Add,
    BinOp::Sub,
    BinOp::Mul,
    BinOp::Div,
    BinOp::Mod,
    BinOp::Eq,
    BinOp::Ne,
    BinOp::Lt,
    BinOp::Le,
    BinOp::Gt,
    BinOp::Ge,
    BinOp::And,
    BinOp::Or,
    BinOp::Imp,
    BinOp::Iff,
    BinOp::BitAnd,
    BinOp::BitOr,
    BinOp::BitXor,
    BinOp::Shl,
    BinOp::Shr,
];

struct Ctx {
    scalars: Vec<String>,
    wires: Vec<String>,
    array: Option<(String, u64)>,
    width: u32,
}

fn expr(rng: &mut impl Rng, ctx: &Ctx, depth: u32) -> Expr {
    let leaf = depth == 0 || rng.gen_bool(0.3);
    if leaf {
        let mut choices = 2 + ctx.wires.len().min(1);
        if ctx.array.is_some() {
            choices += 1;
        }
        match rng.gen_range(0..choices) {
            0 => Expr::num(rng.gen_range(0..(1u64 << ctx.width))),
            1 => {
                let i = rng.gen_range(0..ctx.scalars.len());
                Expr::var(&ctx.scalars[i])
            }
            2 if !ctx.wires.is_empty() => {
                let i = rng.gen_range(0..ctx.wires.len());
                Expr::var(&ctx.wires[i])
            }
            _ => {
                let (name, len) = ctx.array.clone().unwrap();
                // Mostly in range, sometimes deliberately out.
                let ix = if rng.gen_bool(0.8) {
                    Expr::num(rng.gen_range(0..len))
                } else {
                    expr(rng, ctx, 0)
                };
                Expr::ArrayRead(name, Box::new(ix))
            }
        }
    } else {
        match rng.gen_range(0..8) {
            0 => {
                let op = [UnOp::Not, UnOp::BitNot, UnOp::Neg][rng.gen_range(0..3)];
                Expr::Unary(op, Box::new(expr(rng, ctx, depth - 1)))
            }
            1 => Expr::ite(
                expr(rng, ctx, depth - 1),
                expr(rng, ctx, depth - 1),
                expr(rng, ctx, depth - 1),
            ),
            2 => {
                // Bit select, usually with sane constant positions.
                let h = rng.gen_range(0..=ctx.width);
                let l = rng.gen_range(0..=h.max(1));
                let (h, l) = if rng.gen_bool(0.8) {
                    (Expr::num(h as u64), Expr::num(l as u64))
                } else {
                    (expr(rng, ctx, 0), expr(rng, ctx, 0))
                };
                Expr::BitSel(
                    Box::new(expr(rng, ctx, depth - 1)),
                    Box::new(h),
                    Box::new(l),
                )
            }
            _ => {
                let op = BINOPS[rng.gen_range(0..BINOPS.len())];
                Expr::bin(op, expr(rng, ctx, depth - 1), expr(rng, ctx, depth - 1))
            }
        }
    }
}

fn formula(rng: &mut impl Rng, ctx: &Ctx, depth: u32) -> TemporalFormula {
    if depth == 0 || rng.gen_bool(0.35) {
        return TemporalFormula::atom(expr(rng, ctx, 2));
    }
    match rng.gen_range(0..7) {
        0 => TemporalFormula::next(formula(rng, ctx, depth - 1)),
        1 => TemporalFormula::future(rng.gen_range(1..=3), formula(rng, ctx, depth - 1)),
        2 => TemporalFormula::not(formula(rng, ctx, depth - 1)),
        3 => TemporalFormula::and(formula(rng, ctx, depth - 1), formula(rng, ctx, depth - 1)),
        4 => TemporalFormula::or(formula(rng, ctx, depth - 1), formula(rng, ctx, depth - 1)),
        5 => TemporalFormula::implies(formula(rng, ctx, depth - 1), formula(rng, ctx, depth - 1)),
        _ => TemporalFormula::iff(formula(rng, ctx, depth - 1), formula(rng, ctx, depth - 1)),
    }
}

pub fn generate(rng: &mut impl Rng) -> (Circuit, TemporalFormula, DomainBounds) {
    let width = rng.gen_range(2..=4);
    let mut c = Circuit::new("rnd", width);
    let n_regs = rng.gen_range(1..=3);
    for i in 0..n_regs {
        let w = rng.gen_range(1..=2u32);
        c.decls.push(RegisterDecl::scalar(&format!("r{i}"), w));
    }
    let array = if rng.gen_bool(0.4) {
        let len = rng.gen_range(2..=3u64);
        c.decls.push(RegisterDecl::array("a", len, 2));
        Some(("a".to_string(), len))
    } else {
        None
    };
    let mut ctx = Ctx {
        scalars: (0..n_regs).map(|i| format!("r{i}")).collect(),
        wires: Vec::new(),
        array,
        width,
    };
    for i in 0..rng.gen_range(0..=2) {
        let name = format!("w{i}");
        let e = expr(rng, &ctx, 2);
        c.wires.push(WireDef {
            name: name.clone(),
            expr: e,
        });
        ctx.wires.push(name);
    }
    for i in 0..n_regs {
        if rng.gen_bool(0.85) {
            let mut a = Assign::new(&format!("r{i}"), expr(rng, &ctx, 3));
            if rng.gen_bool(0.2) {
                a.guard = Some(expr(rng, &ctx, 1));
            }
            c.assigns.push(a);
        }
    }
    if let Some((name, len)) = &ctx.array {
        if rng.gen_bool(0.6) {
            let ix = if rng.gen_bool(0.7) {
                Expr::num(rng.gen_range(0..*len))
            } else {
                expr(rng, &ctx, 1)
            };
            let mut a = Assign::array(name, ix, expr(rng, &ctx, 2));
            if rng.gen_bool(0.3) {
                a.guard = Some(expr(rng, &ctx, 1));
            }
            c.assigns.push(a);
        }
    }
    for i in 0..n_regs {
        c.outputs.push(format!("r{i}"));
    }
    assert!(
        uvleak_core::ir::validate(&c).is_empty(),
        "generator built an invalid circuit:\n{}",
        uvleak_core::textio::print_circuit(&c)
    );

    let f = formula(rng, &ctx, 2);
    let bounds = DomainBounds::full(&c);
    debug_assert!(bounds.state_count() <= 1 << 13);
    (c, f, bounds)
}
