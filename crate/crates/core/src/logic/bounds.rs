//! Finite initial-state domains for validity checking and the exhaustive
//! oracles. A bound gives every scalar register an inclusive value range
//! and every array register a prefix of enumerated cells (the rest pinned
//! to a fill value). Both backends consume the same bounds, so their state
//! spaces match exactly.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use crate::ir::{Circuit, Value};
use crate::sim::{Layout, Valuation};
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrayBound {
    /// Cells `0..enumerated` range over `range`; later cells hold `fill`.
    pub enumerated: usize,
    pub range: RangeInclusive<u64>,
    pub fill: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainBounds {
    pub scalars: BTreeMap<String, RangeInclusive<u64>>,
    pub arrays: BTreeMap<String, ArrayBound>,
    /// Enumeration refuses domains larger than this many states.
    pub max_states: u64,
}

impl DomainBounds {
    /// Full declared ranges for every register and cell; suitable for the
    /// symbolic backend, usually far too large to enumerate.
    pub fn full(c: &Circuit) -> DomainBounds {
        let mut scalars = BTreeMap::new();
        let mut arrays = BTreeMap::new();
        for d in &c.decls {
            let hi = if d.width >= 64 {
                u64::MAX
            } else {
                (1u64 << d.width) - 1
            };
            match d.array_len {
                None => {
                    scalars.insert(d.name.clone(), 0..=hi);
                }
                Some(len) => {
                    arrays.insert(
                        d.name.clone(),
                        ArrayBound {
                            enumerated: len as usize,
                            range: 0..=hi,
                            fill: 0,
                        },
                    );
                }
            }
        }
        DomainBounds {
            scalars,
            arrays,
            max_states: 200_000_000,
        }
    }

    /// Everything pinned to zero; widen selectively from here.
    pub fn pinned_zero(c: &Circuit) -> DomainBounds {
        let mut b = DomainBounds::full(c);
        for r in b.scalars.values_mut() {
            *r = 0..=0;
        }
        for a in b.arrays.values_mut() {
            a.enumerated = 0;
            a.fill = 0;
        }
        b
    }

    pub fn scalar(mut self, name: &str, range: RangeInclusive<u64>) -> Self {
        assert!(self.scalars.contains_key(name), "unknown scalar {name}");
        self.scalars.insert(name.to_string(), range);
        self
    }

    pub fn array(mut self, name: &str, cells: usize, range: RangeInclusive<u64>) -> Self {
        let a = self
            .arrays
            .get_mut(name)
            .unwrap_or_else(|| panic!("unknown array {name}"));
        a.enumerated = cells;
        a.range = range;
        self
    }

    pub fn limit(mut self, max_states: u64) -> Self {
        self.max_states = max_states;
        self
    }

    fn span(r: &RangeInclusive<u64>) -> u128 {
        (*r.end() as u128) - (*r.start() as u128) + 1
    }

    /// Number of initial states the bound describes.
    pub fn state_count(&self) -> u128 {
        let mut n: u128 = 1;
        for r in self.scalars.values() {
            n = n.saturating_mul(Self::span(r));
        }
        for a in self.arrays.values() {
            let per = Self::span(&a.range);
            for _ in 0..a.enumerated {
                n = n.saturating_mul(per);
            }
        }
        n
    }

    /// All initial valuations in the domain, in a fixed lexicographic order
    /// (scalars by name, then array cells by name and index).
    pub fn enumerate(&self, layout: &Arc<Layout>) -> DomainIter {
        let mut dims: Vec<Dim> = Vec::new();
        for (name, r) in &self.scalars {
            dims.push(Dim {
                target: Target::Scalar(name.clone()),
                lo: *r.start(),
                hi: *r.end(),
            });
        }
        for (name, a) in &self.arrays {
            for i in 0..a.enumerated {
                dims.push(Dim {
                    target: Target::Cell(name.clone(), i as u64),
                    lo: *a.range.start(),
                    hi: *a.range.end(),
                });
            }
        }
        let mut base = Valuation::zeroed(layout);
        for (name, a) in &self.arrays {
            if let Some(cells) = base.cells(name) {
                let len = cells.len() as u64;
                for i in 0..len {
                    base.try_set_cell(name, i, Value::Num(a.fill)).unwrap();
                }
            }
        }
        DomainIter {
            dims,
            counters: None,
            base,
        }
    }
}

#[derive(Debug, Clone)]
enum Target {
    Scalar(String),
    Cell(String, u64),
}

#[derive(Debug, Clone)]
struct Dim {
    target: Target,
    lo: u64,
    hi: u64,
}

pub struct DomainIter {
    dims: Vec<Dim>,
    counters: Option<Vec<u64>>,
    base: Valuation,
}

impl Iterator for DomainIter {
    type Item = Valuation;

    fn next(&mut self) -> Option<Valuation> {
        match &mut self.counters {
            None => {
                self.counters = Some(self.dims.iter().map(|d| d.lo).collect());
            }
            Some(cs) => {
                // Odometer increment, last dimension fastest.
                let mut i = self.dims.len();
                loop {
                    if i == 0 {
                        return None;
                    }
                    i -= 1;
                    if cs[i] < self.dims[i].hi {
                        cs[i] += 1;
                        for (j, c) in cs.iter_mut().enumerate().skip(i + 1) {
                            *c = self.dims[j].lo;
                        }
                        break;
                    }
                }
            }
        }
        let cs = self.counters.as_ref().unwrap();
        let mut mu = self.base.clone();
        for (d, &v) in self.dims.iter().zip(cs.iter()) {
            match &d.target {
                Target::Scalar(n) => mu.try_set(n, Value::Num(v)).unwrap(),
                Target::Cell(n, i) => mu.try_set_cell(n, *i, Value::Num(v)).unwrap(),
            }
        }
        Some(mu)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::sim::Sim;

    #[test]
    fn state_count_and_enumeration_agree() {
        let c = fixtures::sisa();
        let sim = Sim::new(&c);
        let b = DomainBounds::pinned_zero(&c)
            .scalar("pc", 0..=3)
            .array("m", 2, 0..=1);
        assert_eq!(b.state_count(), 4 * 2 * 2);
        let all: Vec<_> = b.enumerate(sim.layout()).collect();
        assert_eq!(all.len(), 16);
        // Distinct states, fixed order.
        for w in all.windows(2) {
            assert_ne!(w[0], w[1]);
        }
        assert_eq!(all[0].get("pc"), Some(Value::Num(0)));
        assert_eq!(all.last().unwrap().get("pc"), Some(Value::Num(3)));
    }

    #[test]
    fn fill_applies_outside_enumerated_prefix() {
        let c = fixtures::sisa();
        let sim = Sim::new(&c);
        let mut b = DomainBounds::pinned_zero(&c).array("m", 1, 0..=1);
        b.arrays.get_mut("m").unwrap().fill = 7;
        let first = b.enumerate(sim.layout()).next().unwrap();
        assert_eq!(first.get_cell("m", 0), Some(Value::Num(0)));
        assert_eq!(first.get_cell("m", 15), Some(Value::Num(7)));
    }
}
