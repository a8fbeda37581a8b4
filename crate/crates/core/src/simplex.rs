//! Finite stages of the inverse limits describing invariant measures of a
//! resonant system.
//!
//! With `I_r = {0, .., b(r) - r}` the maps are:
//! - `Xi_r : R^{I_{r+1}} -> R^{I_r}`, `e_i -> e_{i+1}` for `i < b(r) - r`, all
//!   other `e_i -> e_0`;
//! - `Theta_r`, which keeps the first `b(r) - r` coordinates and sums the rest;
//! - `A_r` with column 0 equal to `alpha e_0 + beta e_1`, where
//!   `alpha = S_{q_r}/S_{q_{r+1}}` and `beta = 1 - alpha`, column `s` equal to
//!   `e_{s+1}` and the last column equal to `e_0`;
//! - `A'_r`, the cyclic shift, so that `A'_r Theta_r = Xi_r`;
//! - `Pi_r` on `V_{q_r + 1}`, summing vertex blocks cut at `q_{r+i} + 1`.
//!
//! A level with `b(r) = r` is a singleton and every map on it is `[1]`.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::bratteli::structured::{
    self, Column, RangeProjection, ReducedMatrix, StructuredProduct,
};
use crate::bratteli::Levels;
use crate::error::{Error, Result};
use crate::kneading::{check_norma, KneadingMap, QSeq, ResonantSpec};
use crate::rational::{l1_distance, rat_from_uint, ratio, Rational, RationalMatrix};
use crate::runs::RunVector;

fn spec_of(q: &KneadingMap) -> Result<&ResonantSpec> {
    q.spec()
        .ok_or_else(|| Error::Domain("simplex maps need a resonant kneading map".into()))
}

pub fn index_size(spec: &ResonantSpec, r: usize) -> Result<usize> {
    spec.index_size(r)
}

/// `xi_r(i)` for `i` in `I_{r+1}`.
pub fn xi(spec: &ResonantSpec, r: usize, i: usize) -> Result<usize> {
    let top = spec.b(r)? - r;
    if i >= spec.index_size(r + 1)? {
        return Err(Error::Domain(format!("{i} is not in I_{}", r + 1)));
    }
    Ok(if i < top { i + 1 } else { 0 })
}

pub fn xi_map(spec: &ResonantSpec, r: usize) -> Result<RationalMatrix> {
    let (n0, n1) = (spec.index_size(r)?, spec.index_size(r + 1)?);
    let mut m = RationalMatrix::indexed(n0, n1);
    for i in 0..n1 {
        m.set(xi(spec, r, i)?, i, Rational::one());
    }
    Ok(m)
}

pub fn theta_map(spec: &ResonantSpec, r: usize) -> Result<RationalMatrix> {
    let (n0, n1) = (spec.index_size(r)?, spec.index_size(r + 1)?);
    let mut m = RationalMatrix::indexed(n0, n1);
    for i in 0..n1 {
        m.set(i.min(n0 - 1), i, Rational::one());
    }
    Ok(m)
}

/// `(alpha_r, beta_r)` with `alpha_r = S_{q_r}/S_{q_{r+1}}` and
/// `beta_r = (q_{r+1} - q_r) S_{Q(q_{r+1})} / S_{q_{r+1}}`.
pub fn a_weights(q: &KneadingMap, r: usize) -> Result<(Rational, Rational)> {
    let spec = spec_of(q)?;
    let top = q.s_level(r + 1)?;
    let alpha = ratio(&q.s_level(r)?, &top);
    let q1 = spec.q(r + 1)?;
    let gap = &q1 - spec.q(r)?;
    let beta = ratio(&(gap * q.cutting_time_big(&q.value_big(&q1)?)?), &top);
    Ok((alpha, beta))
}

pub fn a_matrix(q: &KneadingMap, r: usize) -> Result<RationalMatrix> {
    let n = spec_of(q)?.index_size(r)?;
    if n == 1 {
        return Ok(RationalMatrix::identity(vec![0]));
    }
    let (alpha, beta) = a_weights(q, r)?;
    let mut m = RationalMatrix::indexed(n, n);
    m.set(0, 0, alpha);
    m.set(1, 0, beta);
    for s in 1..n - 1 {
        m.set(s + 1, s, Rational::one());
    }
    m.set(0, n - 1, Rational::one());
    Ok(m)
}

pub fn a_prime(spec: &ResonantSpec, r: usize) -> Result<RationalMatrix> {
    let n = spec.index_size(r)?;
    let mut m = RationalMatrix::indexed(n, n);
    for s in 0..n {
        m.set((s + 1) % n, s, Rational::one());
    }
    Ok(m)
}

/// `Pi_r` as pieces of `V_{q_r + 1}`; `Pi_0` sums all of `V_1`.
pub fn pi_map(q: &KneadingMap, r: usize) -> Result<RangeProjection> {
    let spec = spec_of(q)?;
    if r == 0 {
        let top = Levels::new(q)?.top(&BigUint::one())?;
        return Ok(RangeProjection::new(vec![(BigUint::one(), top, 0)], 1));
    }
    let n = spec.index_size(r)?;
    let base = spec.q(r)? + 1u32;
    let mut pieces = vec![(base.clone(), base, 0)];
    for i in 1..n {
        pieces.push((spec.q(r + i - 1)? + 2u32, spec.q(r + i)? + 1u32, i));
    }
    Ok(RangeProjection::new(pieces, n))
}

/// Dense `Pi_r` when `V_{q_r + 1}` is small.
pub fn pi_matrix(q: &KneadingMap, r: usize) -> Result<RationalMatrix> {
    let p = pi_map(q, r)?;
    let lo = p.pieces.first().unwrap().0.to_u64();
    let hi = p.pieces.last().unwrap().1.to_u64();
    let (lo, hi) = match (lo, hi) {
        (Some(lo), Some(hi)) if hi - lo < crate::bratteli::DENSE_LIMIT => (lo, hi),
        _ => {
            return Err(Error::TooLarge(format!(
                "V_{{q_{r}+1}} is too wide for a dense Pi_{r}"
            )))
        }
    };
    let mut m = RationalMatrix::zeros((0..p.n as u64).collect(), (lo..=hi).collect());
    for (a, b, idx) in &p.pieces {
        for v in a.to_u64().unwrap()..=b.to_u64().unwrap() {
            m.set(*idx, (v - lo) as usize, Rational::one());
        }
    }
    Ok(m)
}

/// Determinant of `A_r` by elimination next to the two closed forms
/// `beta_r` and `1 - alpha_r`. The elimination carries the sign
/// `(-1)^{|I_r| - 1}` of the cyclic part.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetReport {
    pub r: usize,
    pub size: usize,
    #[serde(with = "rat_serde")]
    pub determinant: Rational,
    #[serde(with = "rat_serde")]
    pub product_form: Rational,
    #[serde(with = "rat_serde")]
    pub ratio_form: Rational,
    pub warning: Option<String>,
}

impl DetReport {
    pub fn sign(&self) -> i32 {
        if self.size % 2 == 1 {
            1
        } else {
            -1
        }
    }

    /// `det = (-1)^{|I_r| - 1} beta_r` and `beta_r = 1 - alpha_r`.
    pub fn signed_identity_holds(&self) -> bool {
        let signed = if self.sign() == 1 {
            self.ratio_form.clone()
        } else {
            -self.ratio_form.clone()
        };
        self.product_form == self.ratio_form && self.determinant == signed
    }

    /// `|det| = 1 - alpha_r`.
    pub fn magnitude_identity_holds(&self) -> bool {
        self.determinant.abs() == self.ratio_form && self.product_form == self.ratio_form
    }

    /// `det = 1 - alpha_r` with no sign.
    pub fn unsigned_identity_holds(&self) -> bool {
        self.determinant == self.ratio_form && self.product_form == self.ratio_form
    }
}

pub(crate) mod rat_serde {
    use crate::rational::{parse_rational, rat_to_string, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&rat_to_string(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

pub fn det_a(q: &KneadingMap, r: usize) -> Result<DetReport> {
    let size = spec_of(q)?.index_size(r)?;
    let determinant = a_matrix(q, r)?.determinant()?;
    if size == 1 {
        return Ok(DetReport {
            r,
            size,
            determinant,
            product_form: Rational::one(),
            ratio_form: Rational::one(),
            warning: Some(format!("I_{r} is a singleton, A_{r} = [1] by convention")),
        });
    }
    let (alpha, beta) = a_weights(q, r)?;
    Ok(DetReport {
        r,
        size,
        determinant,
        product_form: beta,
        ratio_form: Rational::one() - alpha,
        warning: None,
    })
}

/// `1 - det(A_s)` in the sense used by the contraction estimate: `alpha_s`,
/// or zero on a singleton level.
pub fn defect(q: &KneadingMap, s: usize) -> Result<Rational> {
    if spec_of(q)?.index_size(s)? == 1 {
        return Ok(Rational::zero());
    }
    Ok(a_weights(q, s)?.0)
}

#[derive(Debug, Clone)]
pub struct IntertwineReport {
    pub r: usize,
    pub lhs: ReducedMatrix,
    pub rhs: ReducedMatrix,
}

impl IntertwineReport {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

/// `Pi_r M_{q_r+2} .. M_{q_{r+1}+1}` against `A_r Theta_r Pi_{r+1}`, both as
/// canonical column runs over `V_{q_{r+1}+1}`.
pub fn intertwine_check(q: &KneadingMap, r: usize) -> Result<IntertwineReport> {
    let spec = spec_of(q)?;
    let levels = Levels::new(q)?;
    let lo = spec.q(r)? + 2u32;
    let hi = spec.q(r + 1)? + 1u32;
    let pi_r = pi_map(q, r)?;
    let pi_next = pi_map(q, r + 1)?;
    let prod = structured::product(&levels, &lo, &hi)?;
    if !covers(&pi_r, &prod.rows) || !covers(&pi_next, &prod.cols) {
        return Err(Error::Inconsistent(format!(
            "Pi pieces do not tile the vertex sets at r = {r}"
        )));
    }
    let lhs = prod.project(&pi_r)?;
    let at = a_matrix(q, r)?.mul(&theta_map(spec, r)?)?;
    let rhs = RangeProjection::compose_small(&at, &pi_next);
    Ok(IntertwineReport { r, lhs, rhs })
}

fn covers(p: &RangeProjection, range: &(BigUint, BigUint)) -> bool {
    let mut next = range.0.clone();
    for (a, b, _) in &p.pieces {
        if *a != next {
            return false;
        }
        next = b + 1u32;
    }
    next == &range.1 + 1u32
}

/// `M_{q_r+2} .. M_{k_r}` with its exact rank, `r >= 1`.
pub fn product_and_rank(q: &KneadingMap, r: usize) -> Result<(StructuredProduct, BigUint)> {
    if r == 0 {
        return Err(Error::Domain("the product lemma starts at r = 1".into()));
    }
    let spec = spec_of(q)?;
    let levels = Levels::new(q)?;
    let prod = structured::product(&levels, &(spec.q(r)? + 2u32), &spec.k(r)?)?;
    let rank = prod.rank();
    Ok((prod, rank))
}

/// `v(n) = (S_{q_r} e_{q_r+1} + sum_{t=q_r+1}^{n} S_{Q(t)} e_{t+1}) / S_n`.
pub fn product_lemma_vector(q: &KneadingMap, r: usize, n: &BigUint) -> Result<RunVector> {
    let spec = spec_of(q)?;
    let qr = spec.q(r)?;
    let scale = Rational::one() / rat_from_uint(&q.cutting_time_big(n)?);
    let mut v = RunVector::new();
    v.add_point(&(&qr + 1u32), &(&scale * rat_from_uint(&q.s_level(r)?)));
    if *n > qr {
        for block in q.blocks_between(&(&qr + 1u32), n)? {
            let w = &scale * rat_from_uint(&q.cutting_time_big(&block.value)?);
            v.add_run(&(&block.lo + 1u32), &(&block.hi + 1u32), &w);
        }
    }
    Ok(v)
}

/// Column runs of the closed form: `v(k_r - 1)` on column `k_r`, then
/// `v(q_s)` on columns `k_s + 1 ..= k_{s+1}` for `s = r .. b(r) - 1`.
pub fn product_lemma_form(q: &KneadingMap, r: usize) -> Result<Vec<(BigUint, BigUint, RunVector)>> {
    let spec = spec_of(q)?;
    let kr = spec.k(r)?;
    let mut out = vec![(
        kr.clone(),
        kr.clone(),
        product_lemma_vector(q, r, &(&kr - 1u32))?,
    )];
    for s in r..spec.b(r)? {
        out.push((
            spec.k(s)? + 1u32,
            spec.k(s + 1)?,
            product_lemma_vector(q, r, &spec.q(s)?)?,
        ));
    }
    Ok(merge_column_runs(out))
}

fn merge_column_runs(
    runs: Vec<(BigUint, BigUint, RunVector)>,
) -> Vec<(BigUint, BigUint, RunVector)> {
    let mut out: Vec<(BigUint, BigUint, RunVector)> = Vec::new();
    for (lo, hi, v) in runs {
        match out.last_mut() {
            Some(last) if last.2 == v && &last.1 + 1u32 == lo => last.1 = hi,
            _ => out.push((lo, hi, v)),
        }
    }
    out
}

/// Column runs of a product without identity classes, merged canonically.
pub fn column_runs(prod: &StructuredProduct) -> Option<Vec<(BigUint, BigUint, RunVector)>> {
    let mut runs = Vec::new();
    for c in &prod.classes {
        match &c.column {
            Column::Vector(v) => runs.push((c.lo.clone(), c.hi.clone(), v.clone())),
            Column::Identity => return None,
        }
    }
    Some(merge_column_runs(runs))
}

/// Threads `(i_0, .., i_R)` with `i_r = xi_r(i_{r+1})`, one per `i_R`.
pub fn extreme_threads(spec: &ResonantSpec, depth: usize) -> Result<Vec<Vec<usize>>> {
    let n = spec.index_size(depth)?;
    let mut out = Vec::with_capacity(n);
    for top in 0..n {
        let mut thread = vec![0; depth + 1];
        thread[depth] = top;
        for r in (0..depth).rev() {
            thread[r] = xi(spec, r, thread[r + 1])?;
        }
        out.push(thread);
    }
    Ok(out)
}

/// The two mixed compositions of the contraction estimate and its bound.
#[derive(Debug, Clone)]
pub struct ContractionReport {
    pub swap_to_prime: Rational,
    pub swap_to_plain: Rational,
    pub bound: Rational,
}

impl ContractionReport {
    pub fn holds(&self) -> bool {
        self.swap_to_prime <= self.bound && self.swap_to_plain <= self.bound
    }
}

fn chain(q: &KneadingMap, from: usize, to: usize, prime: bool) -> Result<RationalMatrix> {
    let spec = spec_of(q)?;
    let mut acc = RationalMatrix::identity((0..spec.index_size(from)? as u64).collect());
    for s in from..to {
        let a = if prime {
            a_prime(spec, s)?
        } else {
            a_matrix(q, s)?
        };
        acc = acc.mul(&a.mul(&theta_map(spec, s)?)?)?;
    }
    Ok(acc)
}

/// `(A_r Theta_r .. A_{r'-1} Theta_{r'-1})` from `Delta_{I_to}` to `Delta_{I_from}`.
pub fn a_chain(q: &KneadingMap, from: usize, to: usize) -> Result<RationalMatrix> {
    chain(q, from, to, false)
}

pub fn contraction_bound(
    q: &KneadingMap,
    r: usize,
    r1: usize,
    r2: usize,
    v: &[Rational],
) -> Result<ContractionReport> {
    if !(r <= r1 && r1 <= r2) {
        return Err(Error::Domain("need r <= r' <= r''".into()));
    }
    let spec = spec_of(q)?;
    if v.len() != spec.index_size(r2)?
        || v.iter().any(|x| x.is_negative())
        || v.iter().sum::<Rational>() != Rational::one()
    {
        return Err(Error::Domain(format!(
            "test vector must lie in the simplex on I_{r2}"
        )));
    }
    let plain_head = chain(q, r, r1, false)?;
    let prime_head = chain(q, r, r1, true)?;
    let plain_tail = chain(q, r1, r2, false)?;
    let prime_tail = chain(q, r1, r2, true)?;
    let all_plain = plain_head.mul(&plain_tail)?.apply(v)?;
    let all_prime = prime_head.mul(&prime_tail)?.apply(v)?;
    let mixed_a = plain_head.mul(&prime_tail)?.apply(v)?;
    let mixed_b = prime_head.mul(&plain_tail)?.apply(v)?;
    let mut bound = Rational::zero();
    for s in r1..r2 {
        bound += defect(q, s)?;
    }
    bound *= Rational::from_integer(2.into());
    Ok(ContractionReport {
        swap_to_prime: l1_distance(&mixed_a, &all_plain),
        swap_to_plain: l1_distance(&mixed_b, &all_prime),
        bound,
    })
}

/// Depth-`R` approximation: the composed map `Delta_{I_R} -> Delta_{I_0}`
/// and the images of the vertices.
#[derive(Debug, Clone)]
pub struct SimplexApprox {
    pub depth: usize,
    pub map: RationalMatrix,
    pub vertex_images: Vec<Vec<Rational>>,
}

pub fn simplex_approx(q: &KneadingMap, depth: usize) -> Result<SimplexApprox> {
    let map = a_chain(q, 0, depth)?;
    let vertex_images = (0..map.cols()).map(|j| map.column(j)).collect();
    Ok(SimplexApprox {
        depth,
        map,
        vertex_images,
    })
}

/// Outcome of a separation certificate.
#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    /// Distinct depth-`R` threads have limit images at least `delta` apart.
    Separated {
        delta: Rational,
        tail: Rational,
        closest: Rational,
    },
    /// A single thread: nothing to separate.
    Vacuous,
    Insufficient(String),
}

/// Number of levels past `D` summed exactly before the `1/(H-1)` majorant.
pub const CERTIFICATE_EXACT_LEVELS: usize = 6;

/// Each depth-`R` thread is extended to depth `D` through the smallest
/// preimages and pushed back to `Delta_{I_R}` by the `A Theta` chain. Its
/// limit image lies within `tau = 2 sum_{s >= D} alpha_s` of that point; the
/// tail past `H = D + 6` is bounded by `1/(H-1)`, valid when the growth
/// condition holds from `H` on.
pub fn separation_certificate(q: &KneadingMap, depth: usize, deep: usize) -> Result<Certificate> {
    if deep < depth {
        return Err(Error::Domain("certificate depth D must be >= R".into()));
    }
    let spec = spec_of(q)?;
    let n = spec.index_size(depth)?;
    if n == 1 {
        return Ok(Certificate::Vacuous);
    }
    let h = deep + CERTIFICATE_EXACT_LEVELS;
    if !matches!(spec.q, QSeq::Pow3Tower) {
        return Ok(Certificate::Insufficient(
            "no growth guarantee for an explicit q list".into(),
        ));
    }
    for s in h..h + 3 {
        match check_norma(spec, s) {
            Ok(true) => {}
            Ok(false) => {
                return Ok(Certificate::Insufficient(format!(
                    "growth condition fails at r = {s}"
                )))
            }
            Err(e) => {
                return Ok(Certificate::Insufficient(format!(
                    "growth condition not checkable at r = {s}: {e}"
                )))
            }
        }
    }
    let mut tail = Rational::new(1.into(), ((h - 1) as i64).into());
    for s in deep..h {
        tail += defect(q, s)?;
    }
    tail *= Rational::from_integer(2.into());
    let map = a_chain(q, depth, deep)?;
    let mut images = Vec::with_capacity(n);
    for top in 0..n {
        let mut i = top;
        for r in depth..deep {
            i = if i == 0 { spec.b(r)? - r } else { i - 1 };
        }
        images.push(map.column(i));
    }
    let mut closest: Option<Rational> = None;
    for a in 0..n {
        for b in a + 1..n {
            let d = l1_distance(&images[a], &images[b]);
            if closest.as_ref().is_none_or(|c| d < *c) {
                closest = Some(d);
            }
        }
    }
    let closest = closest.unwrap();
    let delta = &closest - &tail * Rational::from_integer(2.into());
    if delta.is_positive() {
        Ok(Certificate::Separated {
            delta,
            tail,
            closest,
        })
    } else {
        Ok(Certificate::Insufficient(format!(
            "closest pair {closest} does not beat twice the tail {tail}"
        )))
    }
}

/// Nested partitions: `cells[j]` cells at level `j + 1`, and `parent[j][c]`
/// the cell of level `j` containing cell `c` of level `j + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionTree {
    pub levels: Vec<TreeLevel>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeLevel {
    pub cells: usize,
    #[serde(default)]
    pub parent: Vec<usize>,
}

impl PartitionTree {
    pub fn from_json(text: &str) -> Result<Self> {
        let t: PartitionTree =
            serde_json::from_str(text).map_err(|e| Error::Invalid(format!("tree JSON: {e}")))?;
        t.validate()?;
        Ok(t)
    }

    /// Each refinement map must be onto.
    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() || self.levels[0].cells == 0 {
            return Err(Error::Invalid("tree needs a non-empty first level".into()));
        }
        for j in 1..self.levels.len() {
            let (prev, cur) = (&self.levels[j - 1], &self.levels[j]);
            if cur.parent.len() != cur.cells {
                return Err(Error::Invalid(format!(
                    "level {} needs one parent per cell",
                    j + 1
                )));
            }
            let mut hit = vec![false; prev.cells];
            for p in &cur.parent {
                *hit.get_mut(*p)
                    .ok_or_else(|| Error::Invalid(format!("parent {p} out of range")))? = true;
            }
            if hit.iter().any(|h| !h) {
                return Err(Error::Invalid(format!(
                    "refinement onto level {j} is not onto"
                )));
            }
        }
        Ok(())
    }

    /// Constant tree with `m` cells and bijective refinements.
    pub fn constant(m: usize, levels: usize) -> Self {
        let mut out = vec![TreeLevel {
            cells: m,
            parent: Vec::new(),
        }];
        for _ in 1..levels {
            out.push(TreeLevel {
                cells: m,
                parent: (0..m).collect(),
            });
        }
        PartitionTree { levels: out }
    }

    /// `2^j` cells at level `j`, each splitting in two.
    pub fn binary(levels: usize) -> Self {
        let mut out = vec![TreeLevel {
            cells: 2,
            parent: Vec::new(),
        }];
        for j in 1..levels {
            let cells = 2usize << j;
            out.push(TreeLevel {
                cells,
                parent: (0..cells).map(|c| c / 2).collect(),
            });
        }
        PartitionTree { levels: out }
    }
}

/// A realized `b` prefix with the bijections `gamma_j` used to build it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Realization {
    pub b: Vec<u64>,
    /// `r(j)` for `j = 1..=J+1`.
    pub r_of: Vec<usize>,
    /// `gamma[j-1][cell]` indexes `I_{r(j)}`.
    pub gamma: Vec<Vec<usize>>,
}

/// `b(0..=r(J+1))` from the first `J + 1` levels of a partition tree.
pub fn realize_space(tree: &PartitionTree, depth: usize) -> Result<Realization> {
    tree.validate()?;
    if depth == 0 || tree.levels.len() < depth + 1 {
        return Err(Error::Domain(format!(
            "depth {depth} needs {} tree levels",
            depth + 1
        )));
    }
    let mut r_of = vec![1usize];
    for j in 0..depth {
        r_of.push(r_of[j] + tree.levels[j].cells);
    }
    let mut b = vec![0u64; r_of[depth]];
    let mut gamma = vec![(0..tree.levels[0].cells).collect::<Vec<_>>()];
    for j in 0..depth {
        let next = &tree.levels[j + 1];
        let g = &gamma[j];
        let mut by_index: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (cell, parent) in next.parent.iter().enumerate() {
            by_index.entry(g[*parent]).or_default().push(cell);
        }
        let base = (r_of[j + 1] - 1) as u64;
        b[r_of[j]] = base;
        let mut g_next = vec![0usize; next.cells];
        let mut below = 0usize;
        for i in 0..tree.levels[j].cells {
            if i >= 1 {
                b[r_of[j] + i] = base + below as u64;
            }
            for cell in by_index.get(&i).into_iter().flatten() {
                g_next[*cell] = below;
                below += 1;
            }
        }
        gamma.push(g_next);
    }
    b.push((r_of[depth] + tree.levels[depth].cells - 1) as u64);
    Ok(Realization { b, r_of, gamma })
}

/// `gamma_j(parent(P)) = (xi_{r(j)} .. xi_{r(j+1)-1})(gamma_{j+1}(P))` for
/// every cell `P`, using a spec carrying the realized `b`.
pub fn realization_round_trip(tree: &PartitionTree, real: &Realization) -> Result<bool> {
    let spec = ResonantSpec::new(
        QSeq::Pow3Tower,
        crate::kneading::BSeq::Explicit(real.b.clone()),
    )?;
    for j in 0..real.gamma.len() - 1 {
        for (cell, parent) in tree.levels[j + 1].parent.iter().enumerate() {
            let mut i = real.gamma[j + 1][cell];
            for r in (real.r_of[j]..real.r_of[j + 1]).rev() {
                i = xi(&spec, r, i)?;
            }
            if i != real.gamma[j][*parent] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
