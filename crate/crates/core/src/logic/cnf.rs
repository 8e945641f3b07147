//! Propositional clause database with Tseitin-style gate helpers used by
//! the bit blaster.

/// A literal: variable index shifted left once, low bit = negated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(pub u32);

impl Lit {
    pub fn pos(var: u32) -> Lit {
        Lit(var << 1)
    }

    pub fn neg(var: u32) -> Lit {
        Lit((var << 1) | 1)
    }

    pub fn var(self) -> u32 {
        self.0 >> 1
    }

    pub fn is_neg(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn to_dimacs(self) -> i64 {
        let v = (self.var() + 1) as i64;
        if self.is_neg() {
            -v
        } else {
            v
        }
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

/// Clause set under construction plus fresh-variable allocation.
#[derive(Debug, Default, Clone)]
pub struct Cnf {
    pub n_vars: u32,
    pub clauses: Vec<Vec<Lit>>,
    /// Literal forced true; gates reuse it for constant folding.
    true_lit: Option<Lit>,
}

impl Cnf {
    pub fn new() -> Cnf {
        Cnf::default()
    }

    pub fn fresh(&mut self) -> Lit {
        let v = self.n_vars;
        self.n_vars += 1;
        Lit::pos(v)
    }

    pub fn add(&mut self, clause: impl Into<Vec<Lit>>) {
        self.clauses.push(clause.into());
    }

    /// The canonical always-true literal.
    pub fn lit_true(&mut self) -> Lit {
        match self.true_lit {
            Some(l) => l,
            None => {
                let l = self.fresh();
                self.add(vec![l]);
                self.true_lit = Some(l);
                l
            }
        }
    }

    pub fn lit_false(&mut self) -> Lit {
        !self.lit_true()
    }

    pub fn lit_const(&mut self, b: bool) -> Lit {
        if b {
            self.lit_true()
        } else {
            self.lit_false()
        }
    }

    fn is_const(&self, l: Lit) -> Option<bool> {
        self.true_lit.map(|t| {
            if l == t {
                Some(true)
            } else if l == !t {
                Some(false)
            } else {
                None
            }
        })?
    }

    /// out <-> a & b
    pub fn and2(&mut self, a: Lit, b: Lit) -> Lit {
        match (self.is_const(a), self.is_const(b)) {
            (Some(false), _) | (_, Some(false)) => return self.lit_false(),
            (Some(true), _) => return b,
            (_, Some(true)) => return a,
            _ => {}
        }
        if a == b {
            return a;
        }
        if a == !b {
            return self.lit_false();
        }
        let out = self.fresh();
        self.add(vec![!out, a]);
        self.add(vec![!out, b]);
        self.add(vec![out, !a, !b]);
        out
    }

    /// out <-> a | b
    pub fn or2(&mut self, a: Lit, b: Lit) -> Lit {
        !self.and2(!a, !b)
    }

    /// out <-> a ^ b
    pub fn xor2(&mut self, a: Lit, b: Lit) -> Lit {
        match (self.is_const(a), self.is_const(b)) {
            (Some(false), _) => return b,
            (_, Some(false)) => return a,
            (Some(true), _) => return !b,
            (_, Some(true)) => return !a,
            _ => {}
        }
        if a == b {
            return self.lit_false();
        }
        if a == !b {
            return self.lit_true();
        }
        let out = self.fresh();
        self.add(vec![!out, a, b]);
        self.add(vec![!out, !a, !b]);
        self.add(vec![out, !a, b]);
        self.add(vec![out, a, !b]);
        out
    }

    /// out <-> (a == b)
    pub fn iff2(&mut self, a: Lit, b: Lit) -> Lit {
        !self.xor2(a, b)
    }

    /// out <-> if c then t else e
    pub fn mux(&mut self, c: Lit, t: Lit, e: Lit) -> Lit {
        match self.is_const(c) {
            Some(true) => return t,
            Some(false) => return e,
            None => {}
        }
        if t == e {
            return t;
        }
        let out = self.fresh();
        self.add(vec![!out, !c, t]);
        self.add(vec![!out, c, e]);
        self.add(vec![out, !c, !t]);
        self.add(vec![out, c, !e]);
        out
    }

    pub fn and_many(&mut self, lits: &[Lit]) -> Lit {
        match lits {
            [] => self.lit_true(),
            [l] => *l,
            _ => {
                let mut acc = lits[0];
                for &l in &lits[1..] {
                    acc = self.and2(acc, l);
                }
                acc
            }
        }
    }

    pub fn or_many(&mut self, lits: &[Lit]) -> Lit {
        match lits {
            [] => self.lit_false(),
            [l] => *l,
            _ => {
                let mut acc = lits[0];
                for &l in &lits[1..] {
                    acc = self.or2(acc, l);
                }
                acc
            }
        }
    }

    /// Half/full-adder chain: sum bits of a + b (modulo 2^n, n = a.len()).
    pub fn add_vec(&mut self, a: &[Lit], b: &[Lit]) -> Vec<Lit> {
        debug_assert_eq!(a.len(), b.len());
        let mut carry = self.lit_false();
        let mut out = Vec::with_capacity(a.len());
        for i in 0..a.len() {
            let axb = self.xor2(a[i], b[i]);
            let sum = self.xor2(axb, carry);
            let c1 = self.and2(a[i], b[i]);
            let c2 = self.and2(axb, carry);
            carry = self.or2(c1, c2);
            out.push(sum);
        }
        out
    }

    pub fn not_vec(&mut self, a: &[Lit]) -> Vec<Lit> {
        a.iter().map(|&l| !l).collect()
    }

    /// Two's-complement negation.
    pub fn neg_vec(&mut self, a: &[Lit]) -> Vec<Lit> {
        let inv = self.not_vec(a);
        let one = self.const_vec(1, a.len());
        self.add_vec(&inv, &one)
    }

    pub fn sub_vec(&mut self, a: &[Lit], b: &[Lit]) -> Vec<Lit> {
        let nb = self.neg_vec(b);
        self.add_vec(a, &nb)
    }

    pub fn const_vec(&mut self, value: u64, n: usize) -> Vec<Lit> {
        (0..n)
            .map(|i| {
                let bit = i < 64 && (value >> i) & 1 == 1;
                self.lit_const(bit)
            })
            .collect()
    }

    /// Bitwise equality of two vectors.
    pub fn eq_vec(&mut self, a: &[Lit], b: &[Lit]) -> Lit {
        debug_assert_eq!(a.len(), b.len());
        let bits: Vec<Lit> = (0..a.len()).map(|i| self.iff2(a[i], b[i])).collect();
        self.and_many(&bits)
    }

    /// a < b, unsigned.
    pub fn ult_vec(&mut self, a: &[Lit], b: &[Lit]) -> Lit {
        debug_assert_eq!(a.len(), b.len());
        let mut lt = self.lit_false();
        for i in 0..a.len() {
            // Scan from LSB up: higher bits dominate.
            let gt_bit = self.and2(a[i], !b[i]);
            let lt_bit = self.and2(!a[i], b[i]);
            let keep = self.and2(!gt_bit, !lt_bit);
            let carry = self.and2(keep, lt);
            lt = self.or2(lt_bit, carry);
        }
        lt
    }

    pub fn mux_vec(&mut self, c: Lit, t: &[Lit], e: &[Lit]) -> Vec<Lit> {
        debug_assert_eq!(t.len(), e.len());
        (0..t.len()).map(|i| self.mux(c, t[i], e[i])).collect()
    }

    /// Shift-and-add multiplier, result modulo 2^n.
    pub fn mul_vec(&mut self, a: &[Lit], b: &[Lit]) -> Vec<Lit> {
        let n = a.len();
        let mut acc = self.const_vec(0, n);
        for i in 0..n {
            // (a << i) gated by b[i].
            let mut shifted = vec![self.lit_false(); n];
            for j in 0..n - i {
                shifted[i + j] = self.and2(a[j], b[i]);
            }
            acc = self.add_vec(&acc, &shifted);
        }
        acc
    }

    /// Restoring division; returns (quotient, remainder). The working
    /// remainder carries one extra bit so the shift-in never overflows.
    /// The caller guards against zero divisors separately.
    pub fn divmod_vec(&mut self, a: &[Lit], b: &[Lit]) -> (Vec<Lit>, Vec<Lit>) {
        let n = a.len();
        let f = self.lit_false();
        let mut bx: Vec<Lit> = b.to_vec();
        bx.push(f);
        let mut rem = self.const_vec(0, n + 1);
        let mut quo = vec![f; n];
        for i in (0..n).rev() {
            for j in (1..=n).rev() {
                rem[j] = rem[j - 1];
            }
            rem[0] = a[i];
            let lt = self.ult_vec(&rem, &bx);
            let ge = !lt;
            let diff = self.sub_vec(&rem, &bx);
            rem = self.mux_vec(ge, &diff, &rem);
            quo[i] = ge;
        }
        rem.truncate(n);
        (quo, rem)
    }

    /// Barrel shifter. `left` selects direction; shift amounts >= 2^k with
    /// k = sh.len() saturate naturally because each stage is muxed.
    pub fn shift_vec(&mut self, a: &[Lit], sh: &[Lit], left: bool) -> Vec<Lit> {
        let n = a.len();
        let mut cur: Vec<Lit> = a.to_vec();
        for (stage, &s) in sh.iter().enumerate() {
            let amount = 1usize << stage;
            if amount >= n {
                // Any set bit at or above log2(n) clears everything.
                let zeros = self.const_vec(0, n);
                cur = self.mux_vec(s, &zeros, &cur);
                continue;
            }
            let mut shifted = vec![self.lit_false(); n];
            if left {
                shifted[amount..n].copy_from_slice(&cur[..n - amount]);
            } else {
                shifted[..n - amount].copy_from_slice(&cur[amount..n]);
            }
            cur = self.mux_vec(s, &shifted, &cur);
        }
        cur
    }
}
