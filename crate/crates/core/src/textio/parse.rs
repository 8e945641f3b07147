//! Recursive-descent parsers for circuit files, expressions, predicates,
//! and temporal formulas.
//!
//! Expression precedence is C-like, extended with `->`/`<->` at the bottom
//! and `mod` as a spelling of `%`. Circuit items follow a fixed order:
//! declarations, wires, assignments, `output`, optional `init`.

use super::lex::{lex, Pos, Tok};
use super::ParseError;
use crate::ir::{Assign, BinOp, Circuit, Expr, RegisterDecl, UnOp, Value, WireDef};
use crate::logic::TemporalFormula;
use crate::transform::Monitor;

/// Everything one source file defines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SourceFile {
    pub circuits: Vec<Circuit>,
    pub monitors: Vec<Monitor>,
}

impl SourceFile {
    pub fn circuit(&self, name: &str) -> Option<&Circuit> {
        self.circuits.iter().find(|c| c.name == name)
    }

    pub fn monitor(&self, name: &str) -> Option<&Monitor> {
        self.monitors.iter().find(|m| m.name() == name)
    }

    pub fn merge(&mut self, other: SourceFile) {
        self.circuits.extend(other.circuits);
        self.monitors.extend(other.monitors);
    }
}

pub struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    pub fn new(src: &str) -> Result<Parser, ParseError> {
        Ok(Parser {
            toks: lex(src)?.toks,
            at: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if matches!(self.peek(), Tok::Punct(q) if *q == p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), ParseError> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.err(format!("expected {p:?}, found {}", show(self.peek()))))
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Tok::Ident(s) if s == kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.err(format!("expected {kw:?}, found {}", show(self.peek()))))
        }
    }

    fn expect_name(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            t => Err(self.err(format!("expected identifier, found {}", show(&t)))),
        }
    }

    fn expect_int(&mut self) -> Result<u64, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(n)
            }
            t => Err(self.err(format!("expected integer, found {}", show(&t)))),
        }
    }

    fn err(&self, msg: String) -> ParseError {
        ParseError::at(self.pos(), msg)
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    // ---- files -----------------------------------------------------------

    pub fn file(&mut self) -> Result<SourceFile, ParseError> {
        let mut out = SourceFile::default();
        while !self.at_eof() {
            if self.eat_kw("circuit") {
                out.circuits.push(self.circuit_body()?);
            } else if self.eat_kw("monitor") {
                out.monitors.push(self.monitor_body()?);
            } else {
                return Err(self.err(format!(
                    "expected \"circuit\" or \"monitor\", found {}",
                    show(self.peek())
                )));
            }
        }
        Ok(out)
    }

    fn circuit_body(&mut self) -> Result<Circuit, ParseError> {
        let name = self.expect_name()?;
        let width = if self.eat_kw("width") {
            self.expect_int()? as u32
        } else {
            8
        };
        let mut c = Circuit::new(&name, width);
        self.expect_punct("{")?;

        // Declarations. `reg`/`mem` only open a declaration when followed by
        // a name; otherwise they are ordinary identifiers being assigned.
        let mut decl_inits: Vec<(String, u64)> = Vec::new();
        loop {
            if matches!(self.peek(), Tok::Ident(s) if s == "reg")
                && matches!(self.peek2(), Tok::Ident(_))
            {
                self.bump();
                let rname = self.expect_name()?;
                let rwidth = if self.eat_punct("[") {
                    let w = self.expect_int()? as u32;
                    self.expect_punct("]")?;
                    w
                } else {
                    width
                };
                if self.eat_punct("=") {
                    decl_inits.push((rname.clone(), self.expect_int()?));
                }
                self.expect_punct(";")?;
                c.decls.push(RegisterDecl::scalar(&rname, rwidth));
            } else if matches!(self.peek(), Tok::Ident(s) if s == "mem")
                && matches!(self.peek2(), Tok::Ident(_))
            {
                self.bump();
                let mname = self.expect_name()?;
                self.expect_punct("[")?;
                let len = self.expect_int()?;
                self.expect_punct("]")?;
                let mwidth = if self.eat_kw("width") {
                    self.expect_int()? as u32
                } else {
                    width
                };
                self.expect_punct(";")?;
                c.decls.push(RegisterDecl::array(&mname, len, mwidth));
            } else {
                break;
            }
        }

        // Wires.
        while matches!(self.peek(), Tok::Ident(s) if s == "wire")
            && matches!(self.peek2(), Tok::Ident(_))
        {
            self.bump();
            let wname = self.expect_name()?;
            self.expect_punct("=")?;
            let expr = self.expr()?;
            self.expect_punct(";")?;
            c.wires.push(WireDef { name: wname, expr });
        }

        // Assignments until the output list.
        loop {
            if matches!(self.peek(), Tok::Ident(s) if s == "output")
                && !matches!(self.peek2(), Tok::Punct("<=") | Tok::Punct("["))
            {
                break;
            }
            let target = self.expect_name()?;
            let index = if self.eat_punct("[") {
                let ix = self.expr()?;
                self.expect_punct("]")?;
                Some(ix)
            } else {
                None
            };
            self.expect_punct("<=")?;
            let rhs = self.expr()?;
            let guard = if self.eat_kw("when") {
                Some(self.expr()?)
            } else {
                None
            };
            self.expect_punct(";")?;
            c.assigns.push(Assign {
                target,
                index,
                rhs,
                guard,
            });
        }

        self.expect_kw("output")?;
        if !self.eat_punct(";") {
            loop {
                c.outputs.push(self.expect_name()?);
                if !self.eat_punct(",") {
                    break;
                }
            }
            self.expect_punct(";")?;
        }

        let explicit_init = if matches!(self.peek(), Tok::Ident(s) if s == "init") {
            self.bump();
            let e = self.expr()?;
            self.expect_punct(";")?;
            Some(e)
        } else {
            None
        };
        self.expect_punct("}")?;

        // Per-declaration initial values fold into the init predicate, in
        // declaration order, with any explicit clause conjoined last.
        let mut conjuncts: Vec<Expr> = decl_inits
            .into_iter()
            .map(|(n, v)| Expr::eq(Expr::Ref(n), Expr::num(v)))
            .collect();
        conjuncts.extend(explicit_init);
        if !conjuncts.is_empty() {
            c.init = Expr::conj(conjuncts);
        }
        Ok(c)
    }

    fn monitor_body(&mut self) -> Result<Monitor, ParseError> {
        let name = self.expect_name()?;
        self.expect_kw("on")?;
        let base = self.expect_name()?;
        self.expect_punct("{")?;
        let mut body = Circuit::new(&name, 0);
        while matches!(self.peek(), Tok::Ident(s) if s == "wire")
            && matches!(self.peek2(), Tok::Ident(_))
        {
            self.bump();
            let wname = self.expect_name()?;
            self.expect_punct("=")?;
            let expr = self.expr()?;
            self.expect_punct(";")?;
            body.wires.push(WireDef { name: wname, expr });
        }
        self.expect_kw("output")?;
        if !self.eat_punct(";") {
            loop {
                body.outputs.push(self.expect_name()?);
                if !self.eat_punct(",") {
                    break;
                }
            }
            self.expect_punct(";")?;
        }
        self.expect_punct("}")?;
        Ok(Monitor { base, body })
    }

    // ---- expressions -----------------------------------------------------

    pub fn expr(&mut self) -> Result<Expr, ParseError> {
        self.iff_expr()
    }

    fn iff_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.imp_expr()?;
        while self.eat_punct("<->") {
            e = Expr::bin(BinOp::Iff, e, self.imp_expr()?);
        }
        Ok(e)
    }

    fn imp_expr(&mut self) -> Result<Expr, ParseError> {
        let e = self.cond_expr()?;
        if self.eat_punct("->") {
            return Ok(Expr::bin(BinOp::Imp, e, self.imp_expr()?));
        }
        Ok(e)
    }

    fn cond_expr(&mut self) -> Result<Expr, ParseError> {
        let c = self.or_expr()?;
        if self.eat_punct("?") {
            let t = self.expr()?;
            self.expect_punct(":")?;
            let f = self.cond_expr()?;
            return Ok(Expr::ite(c, t, f));
        }
        Ok(c)
    }

    fn or_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.and_expr()?;
        while self.eat_punct("||") {
            e = Expr::bin(BinOp::Or, e, self.and_expr()?);
        }
        Ok(e)
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.bitor_expr()?;
        while self.eat_punct("&&") {
            e = Expr::bin(BinOp::And, e, self.bitor_expr()?);
        }
        Ok(e)
    }

    fn bitor_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.bitxor_expr()?;
        while self.eat_punct("|") {
            e = Expr::bin(BinOp::BitOr, e, self.bitxor_expr()?);
        }
        Ok(e)
    }

    fn bitxor_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.bitand_expr()?;
        while self.eat_punct("^") {
            e = Expr::bin(BinOp::BitXor, e, self.bitand_expr()?);
        }
        Ok(e)
    }

    fn bitand_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.eq_expr()?;
        while self.eat_punct("&") {
            e = Expr::bin(BinOp::BitAnd, e, self.eq_expr()?);
        }
        Ok(e)
    }

    fn eq_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.rel_expr()?;
        loop {
            if self.eat_punct("==") {
                e = Expr::bin(BinOp::Eq, e, self.rel_expr()?);
            } else if self.eat_punct("!=") {
                e = Expr::bin(BinOp::Ne, e, self.rel_expr()?);
            } else {
                return Ok(e);
            }
        }
    }

    fn rel_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.shift_expr()?;
        loop {
            let op = if self.eat_punct("<=") {
                BinOp::Le
            } else if self.eat_punct(">=") {
                BinOp::Ge
            } else if self.eat_punct("<") {
                BinOp::Lt
            } else if self.eat_punct(">") {
                BinOp::Gt
            } else {
                return Ok(e);
            };
            e = Expr::bin(op, e, self.shift_expr()?);
        }
    }

    fn shift_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.add_expr()?;
        loop {
            let op = if self.eat_punct("<<") {
                BinOp::Shl
            } else if self.eat_punct(">>") {
                BinOp::Shr
            } else {
                return Ok(e);
            };
            e = Expr::bin(op, e, self.add_expr()?);
        }
    }

    fn add_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.mul_expr()?;
        loop {
            let op = if self.eat_punct("+") {
                BinOp::Add
            } else if self.eat_punct("-") {
                BinOp::Sub
            } else {
                return Ok(e);
            };
            e = Expr::bin(op, e, self.mul_expr()?);
        }
    }

    fn mul_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.unary_expr()?;
        loop {
            let op = if self.eat_punct("*") {
                BinOp::Mul
            } else if self.eat_punct("/") {
                BinOp::Div
            } else if self.eat_punct("%") || self.eat_kw("mod") {
                BinOp::Mod
            } else {
                return Ok(e);
            };
            e = Expr::bin(op, e, self.unary_expr()?);
        }
    }

    fn unary_expr(&mut self) -> Result<Expr, ParseError> {
        if self.eat_punct("!") {
            return Ok(Expr::Unary(UnOp::Not, Box::new(self.unary_expr()?)));
        }
        if self.eat_punct("~") {
            return Ok(Expr::Unary(UnOp::BitNot, Box::new(self.unary_expr()?)));
        }
        if self.eat_punct("-") {
            return Ok(Expr::Unary(UnOp::Neg, Box::new(self.unary_expr()?)));
        }
        self.postfix_expr()
    }

    fn postfix_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.primary_expr()?;
        while self.eat_punct("[") {
            let first = self.expr()?;
            if self.eat_punct(":") {
                let low = self.expr()?;
                self.expect_punct("]")?;
                e = Expr::BitSel(Box::new(e), Box::new(first), Box::new(low));
            } else {
                self.expect_punct("]")?;
                match e {
                    Expr::Ref(name) => e = Expr::ArrayRead(name, Box::new(first)),
                    _ => {
                        return Err(self.err("single-index selection needs a register name".into()))
                    }
                }
            }
        }
        Ok(e)
    }

    fn primary_expr(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::num(n))
            }
            Tok::Ident(s) if s == "bot" => {
                self.bump();
                Ok(Expr::Const(Value::Bot))
            }
            Tok::Ident(s) => {
                self.bump();
                Ok(Expr::Ref(s))
            }
            Tok::Punct("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            t => Err(self.err(format!("expected expression, found {}", show(&t)))),
        }
    }

    // ---- temporal formulas -------------------------------------------------

    pub fn formula(&mut self) -> Result<TemporalFormula, ParseError> {
        let mut f = self.formula_imp()?;
        while self.eat_punct("<->") {
            f = TemporalFormula::iff(f, self.formula_imp()?);
        }
        Ok(f)
    }

    fn formula_imp(&mut self) -> Result<TemporalFormula, ParseError> {
        let f = self.formula_or()?;
        if self.eat_punct("->") {
            return Ok(TemporalFormula::implies(f, self.formula_imp()?));
        }
        Ok(f)
    }

    fn formula_or(&mut self) -> Result<TemporalFormula, ParseError> {
        let mut f = self.formula_and()?;
        while self.eat_punct("||") {
            f = TemporalFormula::or(f, self.formula_and()?);
        }
        Ok(f)
    }

    fn formula_and(&mut self) -> Result<TemporalFormula, ParseError> {
        let mut f = self.formula_unary()?;
        while self.eat_punct("&&") {
            f = TemporalFormula::and(f, self.formula_unary()?);
        }
        Ok(f)
    }

    fn starts_formula(&self) -> bool {
        matches!(self.peek(), Tok::Ident(_) | Tok::Int(_))
            || matches!(
                self.peek(),
                Tok::Punct("(") | Tok::Punct("!") | Tok::Punct("~") | Tok::Punct("-")
            )
    }

    fn formula_unary(&mut self) -> Result<TemporalFormula, ParseError> {
        if self.eat_punct("!") {
            return Ok(TemporalFormula::not(self.formula_unary()?));
        }
        if let Tok::Ident(s) = self.peek().clone() {
            // G/X/F are temporal operators only where a formula can follow;
            // otherwise they are ordinary identifiers.
            if s == "G" || s == "X" {
                let save = self.at;
                self.bump();
                if self.starts_formula() {
                    let inner = self.formula_unary()?;
                    return Ok(if s == "G" {
                        TemporalFormula::Always(Box::new(inner))
                    } else {
                        TemporalFormula::next(inner)
                    });
                }
                self.at = save;
            } else if s == "F" && matches!(self.peek2(), Tok::Punct("<=")) {
                self.bump();
                self.bump();
                let k = self.expect_int()? as u32;
                if k == 0 {
                    return Err(self.err("bounded-future bound must be at least 1".into()));
                }
                let inner = self.formula_unary()?;
                return Ok(TemporalFormula::future(k, inner));
            }
        }
        if matches!(self.peek(), Tok::Punct("(")) {
            // Try a parenthesized formula first; if what follows the closing
            // paren continues an expression, re-parse the whole thing as an
            // expression atom instead.
            let save = self.at;
            self.bump();
            if let Ok(f) = self.formula() {
                if self.eat_punct(")") && !self.continues_expression() {
                    return Ok(f);
                }
            }
            self.at = save;
        }
        let e = self.atom_expr()?;
        Ok(TemporalFormula::atom(e))
    }

    /// Expression atoms inside formulas stop below `&&`/`||`/`->`, which
    /// belong to the formula level; parenthesized subexpressions may still
    /// use the full grammar.
    fn atom_expr(&mut self) -> Result<Expr, ParseError> {
        let c = self.bitor_expr()?;
        if self.eat_punct("?") {
            let t = self.expr()?;
            self.expect_punct(":")?;
            let f = self.atom_expr()?;
            return Ok(Expr::ite(c, t, f));
        }
        Ok(c)
    }

    fn continues_expression(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Punct("==")
                | Tok::Punct("!=")
                | Tok::Punct("<")
                | Tok::Punct("<=")
                | Tok::Punct(">")
                | Tok::Punct(">=")
                | Tok::Punct("+")
                | Tok::Punct("-")
                | Tok::Punct("*")
                | Tok::Punct("/")
                | Tok::Punct("%")
                | Tok::Punct("<<")
                | Tok::Punct(">>")
                | Tok::Punct("&")
                | Tok::Punct("|")
                | Tok::Punct("^")
                | Tok::Punct("?")
                | Tok::Punct("[")
        ) || matches!(self.peek(), Tok::Ident(s) if s == "mod")
    }

    pub fn finish(&self) -> Result<(), ParseError> {
        if self.at_eof() {
            Ok(())
        } else {
            Err(self.err(format!("trailing input {}", show(self.peek()))))
        }
    }
}

fn show(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("{s:?}"),
        Tok::Int(n) => format!("{n}"),
        Tok::Punct(p) => format!("{p:?}"),
        Tok::Eof => "end of input".to_string(),
    }
}
