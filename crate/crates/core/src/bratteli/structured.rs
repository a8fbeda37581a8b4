//! Range-compressed products of transition matrices.
//!
//! Between two insertion levels (levels `j` with `j - 2` in the image of `Q`)
//! every `M_j` is the identity except for column `j`, which splits its mass
//! between `j - 1` and `j`. A vector living on `V_b` meets such a stretch
//! `a..=b` only through its coordinate `b`, so the whole stretch collapses to
//!
//! `M_a .. M_b e_b = (S_{a-2} e_{a-1} + sum_{t=a}^{b} S_{Q(t-1)} e_t) / S_{b-1}`,
//!
//! whose sum is constant along the blocks of `Q`. Columns of a product fall
//! into a few classes (the column of the smallest vertex, vertices created
//! at each insertion level, untouched vertices), so a product over
//! astronomically many levels is a short list of run vectors.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use super::Levels;
use crate::error::{Error, Result};
use crate::rational::{rat_from_uint, ratio, Rational, RationalMatrix};
use crate::runs::RunVector;

fn two() -> BigUint {
    BigUint::from(2u32)
}

/// `M_j x` for a vector `x` on `V_j`.
pub fn apply_level(levels: &Levels, j: &BigUint, x: &RunVector) -> Result<RunVector> {
    if j.is_zero() {
        return Err(Error::Domain("levels start at 1".into()));
    }
    if j.is_one() {
        return Ok({
            let mut y = RunVector::new();
            y.add_point(&BigUint::zero(), &x.total());
            y
        });
    }
    let below = j - 1u32;
    let prev_top = levels.top(&below)?;
    let mut y = x.restrict_from(&(j + 1u32));
    let mut carried = Rational::zero();
    if let Some((a, b)) = levels.new_vertices(j)? {
        let a = a.max(j + 1u32);
        if a <= b {
            y = {
                let mut keep = RunVector::new();
                for run in y.runs() {
                    let hi = run.hi.clone().min(prev_top.clone());
                    if run.lo <= hi {
                        keep.add_run(&run.lo, &hi, &run.value);
                    }
                }
                keep
            };
            carried += x.range_sum(&a, &b);
        }
    }
    let xj = x.get(j);
    if *j <= prev_top {
        let s = levels.s(&(j - 1u32))?;
        carried += &xj * ratio(&levels.s(&(j - 2u32))?, &s);
        let stay = &xj * ratio(&levels.s(&levels.kneading().value_big(&below)?)?, &s);
        y.add_point(j, &stay);
    } else {
        carried += xj;
    }
    y.add_point(&below, &carried);
    Ok(y)
}

/// `M_a .. M_b x` for non-insertion levels `3 <= a <= b` and `x` on `V_b`.
fn apply_segment(levels: &Levels, a: &BigUint, b: &BigUint, x: &RunVector) -> Result<RunVector> {
    let xb = x.get(b);
    let mut y = x.restrict_from(&(b + 1u32));
    if xb.is_zero() {
        return Ok(y);
    }
    let scale = xb / rat_from_uint(&levels.s(&(b - 1u32))?);
    y.add_point(
        &(a - 1u32),
        &(&scale * rat_from_uint(&levels.s(&(a - 2u32))?)),
    );
    for block in levels.kneading().blocks_between(&(a - 1u32), &(b - 1u32))? {
        let w = &scale * rat_from_uint(&levels.s(&block.value)?);
        y.add_run(&(&block.lo + 1u32), &(&block.hi + 1u32), &w);
    }
    Ok(y)
}

/// `M_lo .. M_hi x` for `x` on `V_hi`.
pub fn apply_chain(
    levels: &Levels,
    lo: &BigUint,
    hi: &BigUint,
    x: &RunVector,
) -> Result<RunVector> {
    if lo.is_zero() {
        return Err(Error::Domain("levels start at 1".into()));
    }
    let mut x = x.clone();
    if lo > hi {
        return Ok(x);
    }
    let mut marks = levels.insertion_levels(lo, hi)?;
    if *lo == BigUint::one() {
        marks.insert(0, BigUint::one());
    }
    let mut top = hi.clone();
    while top >= *lo {
        let mark = marks.iter().rev().find(|m| **m <= top).cloned();
        match mark {
            Some(m) if m == top => {
                x = apply_level(levels, &top, &x)?;
                if top.is_zero() {
                    break;
                }
                top -= 1u32;
            }
            other => {
                let floor = match other {
                    Some(m) => (m + 1u32).max(lo.clone()),
                    None => lo.clone(),
                };
                if floor < BigUint::from(3u32) {
                    return Err(Error::Inconsistent(
                        "levels 1 and 2 must be insertion levels".into(),
                    ));
                }
                x = apply_segment(levels, &floor, &top, &x)?;
                top = floor - 1u32;
            }
        }
        if top.is_zero() {
            break;
        }
    }
    Ok(x)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Vector(RunVector),
    /// Column `v` is `e_v`.
    Identity,
}

/// Columns `lo..=hi` of a product share one description.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnClass {
    pub lo: BigUint,
    pub hi: BigUint,
    pub column: Column,
}

/// `M_lo .. M_hi` as column classes over `V_hi`, rows on `V_{lo-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredProduct {
    pub rows: (BigUint, BigUint),
    pub cols: (BigUint, BigUint),
    pub classes: Vec<ColumnClass>,
}

pub fn product(levels: &Levels, lo: &BigUint, hi: &BigUint) -> Result<StructuredProduct> {
    if lo.is_zero() || lo > hi {
        return Err(Error::Domain("product needs 1 <= lo <= hi".into()));
    }
    let rows = levels.vertices(&(lo - 1u32))?;
    let cols = levels.vertices(hi)?;
    let mut classes = vec![ColumnClass {
        lo: hi.clone(),
        hi: hi.clone(),
        column: Column::Vector(apply_chain(levels, lo, hi, &RunVector::unit(hi))?),
    }];
    let first = hi + 1u32;
    if *lo >= two() {
        let old_top = levels.top(&(lo - 1u32))?;
        if first <= old_top {
            classes.push(ColumnClass {
                lo: first.clone(),
                hi: old_top,
                column: Column::Identity,
            });
        }
    }
    for j in levels.insertion_levels(lo, hi)? {
        if let Some((a, b)) = levels.new_vertices(&j)? {
            let a = a.max(first.clone());
            if a > b {
                continue;
            }
            let column = if j == *lo {
                RunVector::unit(&(&j - 1u32))
            } else {
                apply_chain(levels, lo, &(&j - 1u32), &RunVector::unit(&(&j - 1u32)))?
            };
            classes.push(ColumnClass {
                lo: a,
                hi: b,
                column: Column::Vector(column),
            });
        }
    }
    if lo.is_one() {
        let survivors = levels.top(lo)?;
        if first <= survivors {
            let root = RunVector::unit(&BigUint::zero());
            classes.push(ColumnClass {
                lo: first,
                hi: survivors,
                column: Column::Vector(root),
            });
        }
    }
    classes.sort_by(|x, y| x.lo.cmp(&y.lo));
    Ok(StructuredProduct {
        rows,
        cols,
        classes,
    })
}

impl StructuredProduct {
    /// Every vector column sums to one and identity columns sit on rows.
    pub fn is_stochastic(&self) -> bool {
        self.classes.iter().all(|c| match &c.column {
            Column::Vector(v) => v.total() == Rational::one(),
            Column::Identity => c.lo >= self.rows.0 && c.hi <= self.rows.1,
        })
    }

    /// Total number of columns, checked against the column range.
    pub fn covers_columns(&self) -> bool {
        let mut next = self.cols.0.clone();
        for c in &self.classes {
            if c.lo != next {
                return false;
            }
            next = &c.hi + 1u32;
        }
        next == &self.cols.1 + 1u32
    }

    /// Exact rank: identity columns are independent unit vectors, the rest
    /// is eliminated on the common refinement of the vector columns' runs.
    pub fn rank(&self) -> BigUint {
        let mut rank = BigUint::zero();
        let mut identity = Vec::new();
        for c in &self.classes {
            if let Column::Identity = c.column {
                rank += &c.hi - &c.lo + 1u32;
                identity.push((c.lo.clone(), c.hi.clone()));
            }
        }
        let mut vectors: Vec<RunVector> = Vec::new();
        for c in &self.classes {
            if let Column::Vector(v) = &c.column {
                let mut w = v.clone();
                for (a, b) in &identity {
                    for run in v.runs() {
                        let lo = run.lo.clone().max(a.clone());
                        let hi = run.hi.clone().min(b.clone());
                        if lo <= hi {
                            w.add_run(&lo, &hi, &-run.value.clone());
                        }
                    }
                }
                if !vectors.contains(&w) {
                    vectors.push(w);
                }
            }
        }
        rank + BigUint::from(dense_rank_of_runs(&vectors))
    }

    /// Entry `(row, col)`.
    pub fn entry(&self, row: &BigUint, col: &BigUint) -> Rational {
        for c in &self.classes {
            if c.lo <= *col && *col <= c.hi {
                return match &c.column {
                    Column::Vector(v) => v.get(row),
                    Column::Identity => {
                        if row == col {
                            Rational::one()
                        } else {
                            Rational::zero()
                        }
                    }
                };
            }
        }
        Rational::zero()
    }

    /// Dense form for small ranges.
    pub fn to_dense(&self) -> Result<RationalMatrix> {
        let labels = |(a, b): &(BigUint, BigUint)| -> Result<Vec<u64>> {
            let a = a
                .to_u64()
                .ok_or_else(|| Error::TooLarge("row range".into()))?;
            let b = b
                .to_u64()
                .filter(|b| b - a < super::DENSE_LIMIT)
                .ok_or_else(|| Error::TooLarge("dense product".into()))?;
            Ok((a..=b).collect())
        };
        let rows = labels(&self.rows)?;
        let cols = labels(&self.cols)?;
        let mut m = RationalMatrix::zeros(rows.clone(), cols.clone());
        for (j, c) in cols.iter().enumerate() {
            for (i, r) in rows.iter().enumerate() {
                let v = self.entry(&BigUint::from(*r), &BigUint::from(*c));
                if !v.is_zero() {
                    m.set(i, j, v);
                }
            }
        }
        Ok(m)
    }

    /// `P x` for the left projection `P` given as pieces of its domain.
    pub fn project(&self, pieces: &RangeProjection) -> Result<ReducedMatrix> {
        let n = pieces.size();
        let mut runs = Vec::new();
        for c in &self.classes {
            match &c.column {
                Column::Vector(v) => runs.push((c.lo.clone(), c.hi.clone(), pieces.apply(v))),
                Column::Identity => {
                    let mut at = c.lo.clone();
                    for (lo, hi, idx) in &pieces.pieces {
                        let a = lo.clone().max(at.clone());
                        let b = hi.clone().min(c.hi.clone());
                        if a <= b {
                            if a > at {
                                runs.push((at.clone(), &a - 1u32, vec![Rational::zero(); n]));
                            }
                            let mut e = vec![Rational::zero(); n];
                            e[*idx] = Rational::one();
                            runs.push((a, b.clone(), e));
                            at = b + 1u32;
                        }
                    }
                    if at <= c.hi {
                        runs.push((at, c.hi.clone(), vec![Rational::zero(); n]));
                    }
                }
            }
        }
        Ok(ReducedMatrix::new(n, runs))
    }
}

fn dense_rank_of_runs(vectors: &[RunVector]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let mut cuts: Vec<BigUint> = vectors
        .iter()
        .flat_map(|v| v.breakpoints().cloned())
        .collect();
    cuts.sort();
    cuts.dedup();
    let rows: Vec<u64> = (0..cuts.len() as u64).collect();
    let cols: Vec<u64> = (0..vectors.len() as u64).collect();
    let mut m = RationalMatrix::zeros(rows, cols);
    for (i, cut) in cuts.iter().enumerate() {
        for (j, v) in vectors.iter().enumerate() {
            m.set(i, j, v.get(cut));
        }
    }
    m.rank()
}

/// A stochastic map onto `R^n` summing each piece `(lo, hi)` of an integer
/// range into coordinate `idx`.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeProjection {
    pub pieces: Vec<(BigUint, BigUint, usize)>,
    pub n: usize,
}

impl RangeProjection {
    pub fn new(mut pieces: Vec<(BigUint, BigUint, usize)>, n: usize) -> Self {
        pieces.sort_by(|a, b| a.0.cmp(&b.0));
        RangeProjection { pieces, n }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn apply(&self, v: &RunVector) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.n];
        for (lo, hi, idx) in &self.pieces {
            out[*idx] += v.range_sum(lo, hi);
        }
        out
    }

    /// Matrix form `(P A)` where `A` sends the pieces of `other` to columns
    /// of the small matrix `a` (`n x other.n`): used for `A Theta Pi`.
    pub fn compose_small(a: &RationalMatrix, other: &RangeProjection) -> ReducedMatrix {
        let runs = other
            .pieces
            .iter()
            .map(|(lo, hi, idx)| (lo.clone(), hi.clone(), a.column(*idx)))
            .collect();
        ReducedMatrix::new(a.rows(), runs)
    }
}

/// A matrix with `n` rows whose columns are constant on runs of an integer
/// range; canonical after merging equal neighbours.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedMatrix {
    pub n: usize,
    pub runs: Vec<(BigUint, BigUint, Vec<Rational>)>,
}

impl ReducedMatrix {
    pub fn new(n: usize, mut runs: Vec<(BigUint, BigUint, Vec<Rational>)>) -> Self {
        runs.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(BigUint, BigUint, Vec<Rational>)> = Vec::new();
        for r in runs {
            match merged.last_mut() {
                Some(last) if last.2 == r.2 && &last.1 + 1u32 == r.0 => last.1 = r.1,
                _ => merged.push(r),
            }
        }
        ReducedMatrix { n, runs: merged }
    }

    pub fn column_count(&self) -> BigUint {
        self.runs.iter().map(|(a, b, _)| b - a + 1u32).sum()
    }

    pub fn is_stochastic(&self) -> bool {
        self.runs.iter().all(|(_, _, c)| {
            c.iter().all(|x| *x >= Rational::zero())
                && c.iter().sum::<Rational>() == Rational::one()
        })
    }
}
