//! Piecewise-constant vectors indexed by (possibly astronomically large)
//! non-negative integers.
//!
//! Vertex sets of the resonant diagrams are integer ranges whose ends can have
//! thousands of bits, but the vectors living on them are constant on a handful
//! of runs. A `RunVector` stores only the breakpoints.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::rational::{rat_from_uint, Rational};

/// Step function `N -> Q` with finitely many breakpoints and zero far out.
///
/// Each key `k` maps to the value taken on `[k, next key)`. The last key
/// always carries zero.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunVector {
    steps: BTreeMap<BigUint, Rational>,
}

/// One maximal constant run `[lo, hi]` with its value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub lo: BigUint,
    pub hi: BigUint,
    pub value: Rational,
}

impl RunVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn unit(at: &BigUint) -> Self {
        let mut v = Self::new();
        v.add_run(at, at, &Rational::one());
        v
    }

    pub fn is_zero(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn get(&self, idx: &BigUint) -> Rational {
        self.steps
            .range(..=idx.clone())
            .next_back()
            .map(|(_, v)| v.clone())
            .unwrap_or_else(Rational::zero)
    }

    fn split_at(&mut self, at: &BigUint) {
        if !self.steps.contains_key(at) {
            let v = self.get(at);
            self.steps.insert(at.clone(), v);
        }
    }

    /// Adds `value` on every index of `[lo, hi]`.
    pub fn add_run(&mut self, lo: &BigUint, hi: &BigUint, value: &Rational) {
        if lo > hi || value.is_zero() {
            return;
        }
        let end = hi + 1u32;
        self.split_at(lo);
        self.split_at(&end);
        for (_, v) in self.steps.range_mut(lo.clone()..end) {
            *v += value;
        }
        self.normalize();
    }

    pub fn add_point(&mut self, at: &BigUint, value: &Rational) {
        self.add_run(at, at, value);
    }

    pub fn add_scaled(&mut self, other: &RunVector, scale: &Rational) {
        for run in other.runs() {
            self.add_run(&run.lo, &run.hi, &(&run.value * scale));
        }
    }

    fn normalize(&mut self) {
        let mut prev = Rational::zero();
        let mut redundant = Vec::new();
        for (k, v) in &self.steps {
            if *v == prev {
                redundant.push(k.clone());
            }
            prev = v.clone();
        }
        for k in redundant {
            self.steps.remove(&k);
        }
    }

    /// Non-zero maximal runs in increasing order.
    pub fn runs(&self) -> Vec<Run> {
        let keys: Vec<_> = self.steps.iter().collect();
        keys.windows(2)
            .filter(|w| !w[0].1.is_zero())
            .map(|w| Run {
                lo: w[0].0.clone(),
                hi: w[1].0 - 1u32,
                value: w[0].1.clone(),
            })
            .collect()
    }

    /// All breakpoints, useful for common refinements.
    pub fn breakpoints(&self) -> impl Iterator<Item = &BigUint> {
        self.steps.keys()
    }

    /// Sum of the entries on `[lo, hi]`.
    pub fn range_sum(&self, lo: &BigUint, hi: &BigUint) -> Rational {
        let mut total = Rational::zero();
        if lo > hi {
            return total;
        }
        for run in self.runs() {
            let a = if run.lo > *lo { &run.lo } else { lo };
            let b = if run.hi < *hi { &run.hi } else { hi };
            if a <= b {
                total += &run.value * rat_from_uint(&(b - a + 1u32));
            }
        }
        total
    }

    pub fn total(&self) -> Rational {
        self.runs().iter().fold(Rational::zero(), |acc, r| {
            acc + &r.value * rat_from_uint(&(&r.hi - &r.lo + 1u32))
        })
    }

    /// Entries with index `>= from` only.
    pub fn restrict_from(&self, from: &BigUint) -> RunVector {
        let mut out = RunVector::new();
        for run in self.runs() {
            if run.hi >= *from {
                let lo = if run.lo > *from { run.lo } else { from.clone() };
                out.add_run(&lo, &run.hi, &run.value);
            }
        }
        out
    }

    pub fn min_index(&self) -> Option<BigUint> {
        self.runs().first().map(|r| r.lo.clone())
    }

    pub fn max_index(&self) -> Option<BigUint> {
        self.runs().last().map(|r| r.hi.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(n: u64) -> BigUint {
        BigUint::from(n)
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn overlapping_runs_add_and_merge() {
        let mut v = RunVector::new();
        v.add_run(&b(3), &b(10), &q(1, 2));
        v.add_run(&b(5), &b(12), &q(1, 2));
        assert_eq!(v.get(&b(4)), q(1, 2));
        assert_eq!(v.get(&b(7)), q(1, 1));
        assert_eq!(v.get(&b(12)), q(1, 2));
        assert_eq!(v.get(&b(13)), q(0, 1));
        assert_eq!(v.runs().len(), 3);
        assert_eq!(v.total(), q(8, 1));
        assert_eq!(v.range_sum(&b(0), &b(5)), q(2, 1));
    }

    #[test]
    fn cancellation_removes_runs() {
        let mut v = RunVector::unit(&b(7));
        v.add_point(&b(7), &q(-1, 1));
        assert!(v.is_zero());
    }

    #[test]
    fn huge_indices() {
        let lo = BigUint::one() << 300u32;
        let hi = (BigUint::one() << 301u32) - 1u32;
        let mut v = RunVector::new();
        v.add_run(&lo, &hi, &q(1, 3));
        assert_eq!(v.total(), rat_from_uint(&lo) * q(1, 3));
        assert_eq!(v.restrict_from(&hi).total(), q(1, 3));
    }
}
