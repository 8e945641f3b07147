//! Linear temporal formulas over circuit predicates.
//!
//! Atoms are circuit expressions read as predicates (defined and nonzero).
//! `Next` shifts evaluation one cycle, `Future(k, f)` requires `f` for the
//! next `k` cycles (offsets 0..k), and `Always` requires `f` at every future
//! cycle. Bounded checkers reject `Always`; [`depth`](TemporalFormula::depth)
//! returns `None` for it.

use crate::ir::Expr;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TemporalFormula {
    Atom(Expr),
    Next(Box<TemporalFormula>),
    /// `F<=k f`: f holds at every offset `j < k` from the evaluation cycle.
    Future(u32, Box<TemporalFormula>),
    Always(Box<TemporalFormula>),
    Not(Box<TemporalFormula>),
    And(Box<TemporalFormula>, Box<TemporalFormula>),
    Or(Box<TemporalFormula>, Box<TemporalFormula>),
    Implies(Box<TemporalFormula>, Box<TemporalFormula>),
    Iff(Box<TemporalFormula>, Box<TemporalFormula>),
}

impl TemporalFormula {
    pub fn atom(e: Expr) -> Self {
        TemporalFormula::Atom(e)
    }

    pub fn next(f: TemporalFormula) -> Self {
        TemporalFormula::Next(Box::new(f))
    }

    pub fn future(k: u32, f: TemporalFormula) -> Self {
        TemporalFormula::Future(k, Box::new(f))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: TemporalFormula) -> Self {
        TemporalFormula::Not(Box::new(f))
    }

    pub fn and(a: TemporalFormula, b: TemporalFormula) -> Self {
        TemporalFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: TemporalFormula, b: TemporalFormula) -> Self {
        TemporalFormula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: TemporalFormula, b: TemporalFormula) -> Self {
        TemporalFormula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: TemporalFormula, b: TemporalFormula) -> Self {
        TemporalFormula::Iff(Box::new(a), Box::new(b))
    }

    /// Conjunction of atoms; the empty conjunction is the true atom.
    pub fn conj(parts: impl IntoIterator<Item = TemporalFormula>) -> Self {
        let mut it = parts.into_iter();
        match it.next() {
            None => TemporalFormula::Atom(Expr::num(1)),
            Some(first) => it.fold(first, TemporalFormula::and),
        }
    }

    /// Furthest cycle offset the formula inspects, or `None` if unbounded
    /// (`Always` anywhere in the tree).
    pub fn depth(&self) -> Option<u32> {
        use TemporalFormula::*;
        match self {
            Atom(_) => Some(0),
            Next(f) => f.depth().map(|d| d + 1),
            Future(k, f) => f.depth().map(|d| d + k.saturating_sub(1)),
            Always(_) => None,
            Not(f) => f.depth(),
            And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) => Some(a.depth()?.max(b.depth()?)),
        }
    }

    /// Every expression atom, with the cycle offset it is evaluated at when
    /// the formula itself is evaluated at offset 0. `Always` atoms report
    /// their minimum offset.
    pub fn atoms_with_offsets(&self) -> Vec<(u32, &Expr)> {
        fn go<'a>(f: &'a TemporalFormula, off: u32, out: &mut Vec<(u32, &'a Expr)>) {
            use TemporalFormula::*;
            match f {
                Atom(e) => out.push((off, e)),
                Next(f) => go(f, off + 1, out),
                Future(k, f) => {
                    for j in 0..*k {
                        go(f, off + j, out);
                    }
                }
                Always(f) => go(f, off, out),
                Not(f) => go(f, off, out),
                And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) => {
                    go(a, off, out);
                    go(b, off, out);
                }
            }
        }
        let mut out = Vec::new();
        go(self, 0, &mut out);
        out
    }
}
