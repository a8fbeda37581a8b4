//! The ordered Bratteli diagram `B_Q` of a non-decreasing diverging kneading
//! map.
//!
//! Level `j` has the integer interval of vertices `V_1 = [1, K(1)]` and
//! `V_j = [j, K(j)]` for `j >= 2`, where `K(1) = max Q^{-1}(0)` and
//! `K(j) = 1 + max { m : Q(m) <= j - 2 }`. Edges from level `j-1` to `j`:
//! the minimal edge `j-1 -> j`, a second edge into `j` which is the loop
//! `j -> j` when `j` is in `V_{j-1}` and a parallel copy of `j-1 -> j`
//! otherwise, one edge `j-1 -> k` for each new vertex `k`, and the loop
//! `k -> k` for each other surviving vertex.
//!
//! Vertex sets of resonant maps can have thousands of bits, so vertices are
//! `BigUint` and dense objects are only built on request for small levels.

pub mod structured;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::kneading::KneadingMap;
use crate::rational::{ratio, Rational, RationalMatrix};

/// Dense objects refuse vertex sets larger than this.
pub const DENSE_LIMIT: u64 = 4096;

/// Level bookkeeping of `B_Q`.
#[derive(Debug, Clone)]
pub struct Levels {
    q: KneadingMap,
}

impl Levels {
    pub fn new(q: &KneadingMap) -> Result<Self> {
        if !q.is_structurally_monotone() {
            return Err(Error::Domain(
                "the diagram is built for non-decreasing Q only".into(),
            ));
        }
        q.max_preimage_at_most(&BigUint::zero())?;
        Ok(Levels { q: q.clone() })
    }

    pub fn kneading(&self) -> &KneadingMap {
        &self.q
    }

    /// `K(j)`, the largest vertex of level `j >= 1`.
    pub fn top(&self, j: &BigUint) -> Result<BigUint> {
        if j.is_zero() {
            return Ok(BigUint::zero());
        }
        if j.is_one() {
            return self.q.max_preimage_at_most(&BigUint::zero());
        }
        Ok(self.q.max_preimage_at_most(&(j - 2u32))? + 1u32)
    }

    /// `V_j` as `(min, max)`; level 0 is the root `{0}`.
    pub fn vertices(&self, j: &BigUint) -> Result<(BigUint, BigUint)> {
        if j.is_zero() {
            return Ok((BigUint::zero(), BigUint::zero()));
        }
        let lo = j.clone();
        Ok((lo, self.top(j)?))
    }

    /// Levels `j` in `lo..=hi` that receive new vertices.
    pub fn insertion_levels(&self, lo: &BigUint, hi: &BigUint) -> Result<Vec<BigUint>> {
        let lo = lo.max(&BigUint::from(2u32)).clone();
        if lo > *hi {
            return Ok(Vec::new());
        }
        Ok(self
            .q
            .image_between(&(&lo - 2u32), &(hi - 2u32))?
            .into_iter()
            .map(|v| v + 2u32)
            .collect())
    }

    /// `[min, max]` of `V_j \ V_{j-1}`, if non-empty (`j >= 2`).
    pub fn new_vertices(&self, j: &BigUint) -> Result<Option<(BigUint, BigUint)>> {
        let prev = self.top(&(j - 1u32))?;
        let cur = self.top(j)?;
        let lo = (&prev + 1u32).max(j.clone());
        Ok(if lo <= cur { Some((lo, cur)) } else { None })
    }

    /// Whether `j` already belongs to `V_{j-1}`.
    pub fn carries_loop_at_min(&self, j: &BigUint) -> Result<bool> {
        Ok(*j <= self.top(&(j - 1u32))?)
    }

    pub fn s(&self, k: &BigUint) -> Result<BigUint> {
        self.q.cutting_time_big(k)
    }

    fn dense_vertices(&self, j: u64) -> Result<Vec<u64>> {
        let (lo, hi) = self.vertices(&BigUint::from(j))?;
        let lo = lo.to_u64().unwrap();
        let hi = hi
            .to_u64()
            .filter(|h| h - lo < DENSE_LIMIT)
            .ok_or_else(|| {
                Error::TooLarge(format!("V_{j} has more than {DENSE_LIMIT} vertices"))
            })?;
        Ok((lo..=hi).collect())
    }
}

/// One edge between consecutive levels, with its rank among the edges
/// sharing its target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub source: u64,
    pub target: u64,
    pub rank: u32,
}

/// Explicit level `j` of `B_Q`: the vertex sets of levels `j-1` and `j`,
/// the edges between them and the heights on both sides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BratteliStage {
    pub level: u64,
    pub prev_vertices: Vec<u64>,
    pub vertices: Vec<u64>,
    pub edges: Vec<Edge>,
    pub prev_heights: Vec<BigUint>,
    pub heights: Vec<BigUint>,
}

impl BratteliStage {
    pub fn height(&self, v: u64) -> Option<&BigUint> {
        self.vertices
            .iter()
            .position(|x| *x == v)
            .map(|i| &self.heights[i])
    }

    pub fn edges_into(&self, v: u64) -> Vec<&Edge> {
        let mut e: Vec<_> = self.edges.iter().filter(|e| e.target == v).collect();
        e.sort_by_key(|e| e.rank);
        e
    }

    /// `N_j`: rows `V_{j-1}`, columns `V_j`, entries count edges.
    pub fn incidence(&self) -> RationalMatrix {
        let mut n = RationalMatrix::zeros(self.prev_vertices.clone(), self.vertices.clone());
        for e in &self.edges {
            let i = n.row_index(e.source).unwrap();
            let j = n.col_index(e.target).unwrap();
            let v = n.get(i, j) + Rational::one();
            n.set(i, j, v);
        }
        n
    }

    /// `M_j = B_{j-1} N_j B_j^{-1}` with `B` the diagonal height matrices.
    pub fn transition(&self) -> RationalMatrix {
        let n = self.incidence();
        let mut m = n.clone();
        for i in 0..n.rows() {
            for j in 0..n.cols() {
                if !n.get(i, j).is_zero() {
                    let v = n.get(i, j) * ratio(&self.prev_heights[i], &self.heights[j]);
                    m.set(i, j, v);
                }
            }
        }
        m
    }
}

fn level_edges(levels: &Levels, j: u64, prev: &[u64], cur: &[u64]) -> Result<Vec<Edge>> {
    if j == 1 {
        return Ok(cur
            .iter()
            .map(|v| Edge {
                source: 0,
                target: *v,
                rank: 0,
            })
            .collect());
    }
    let jb = BigUint::from(j);
    let new = levels
        .new_vertices(&jb)?
        .map(|(a, b)| (a.to_u64().unwrap(), b.to_u64().unwrap()));
    let mut edges = vec![Edge {
        source: j - 1,
        target: j,
        rank: 0,
    }];
    let second = if prev.contains(&j) { j } else { j - 1 };
    edges.push(Edge {
        source: second,
        target: j,
        rank: 1,
    });
    for v in cur.iter().copied().filter(|v| *v > j) {
        let is_new = new.is_some_and(|(a, b)| v >= a && v <= b);
        let source = if is_new { j - 1 } else { v };
        edges.push(Edge {
            source,
            target: v,
            rank: 0,
        });
    }
    Ok(edges)
}

/// Level `j >= 1` of `B_Q`, heights computed by the path-count recursion.
pub fn build_stage(q: &KneadingMap, j: u64) -> Result<BratteliStage> {
    if j == 0 {
        return Err(Error::Domain("stages start at level 1".into()));
    }
    let levels = Levels::new(q)?;
    let mut prev = vec![0u64];
    let mut prev_h = vec![BigUint::one()];
    for level in 1..=j {
        let cur = levels.dense_vertices(level)?;
        let edges = level_edges(&levels, level, &prev, &cur)?;
        let mut h = vec![BigUint::zero(); cur.len()];
        for e in &edges {
            let i = prev.iter().position(|v| *v == e.source).unwrap();
            let t = (e.target - cur[0]) as usize;
            h[t] += &prev_h[i];
        }
        if level == j {
            return Ok(BratteliStage {
                level: j,
                prev_vertices: prev,
                vertices: cur,
                edges,
                prev_heights: prev_h,
                heights: h,
            });
        }
        prev = cur;
        prev_h = h;
    }
    unreachable!()
}

/// Heights `s_j` as maximal constant runs `(lo, hi, value)`, by the
/// path-count recursion on runs; works for astronomically wide levels.
pub fn height_runs(q: &KneadingMap, j: u64) -> Result<Vec<(BigUint, BigUint, BigUint)>> {
    if j == 0 {
        return Err(Error::Domain("heights start at level 1".into()));
    }
    let levels = Levels::new(q)?;
    let (lo, hi) = levels.vertices(&BigUint::one())?;
    let mut runs = vec![(lo, hi, BigUint::one())];
    for level in 2..=j {
        let jb = BigUint::from(level);
        let prev_top = levels.top(&(&jb - 1u32))?;
        let at = |runs: &[(BigUint, BigUint, BigUint)], v: &BigUint| -> BigUint {
            runs.iter()
                .find(|(a, b, _)| a <= v && v <= b)
                .map(|r| r.2.clone())
                .unwrap_or_default()
        };
        let below = at(&runs, &(&jb - 1u32));
        let second = if jb <= prev_top {
            at(&runs, &jb)
        } else {
            below.clone()
        };
        let mut next = vec![(jb.clone(), jb.clone(), &below + second)];
        for (a, b, v) in &runs {
            let a = a.max(&(&jb + 1u32)).clone();
            if a <= *b {
                next.push((a, b.clone(), v.clone()));
            }
        }
        if let Some((a, b)) = levels.new_vertices(&jb)? {
            let a = a.max(&jb + 1u32);
            if a <= b {
                next.push((a, b, below.clone()));
            }
        }
        next.sort_by(|x, y| x.0.cmp(&y.0));
        let mut merged: Vec<(BigUint, BigUint, BigUint)> = Vec::new();
        for r in next {
            match merged.last_mut() {
                Some(last) if last.2 == r.2 && last.1.clone() + 1u32 == r.0 => last.1 = r.1,
                _ => merged.push(r),
            }
        }
        runs = merged;
    }
    Ok(runs)
}

/// `s_j(v)` read from the run form.
pub fn height_at(runs: &[(BigUint, BigUint, BigUint)], v: &BigUint) -> Option<BigUint> {
    runs.iter()
        .find(|(a, b, _)| a <= v && v <= b)
        .map(|r| r.2.clone())
}

/// Dense `M_j` and `N_j` for a small level.
pub fn transition_matrix(q: &KneadingMap, j: u64) -> Result<(RationalMatrix, RationalMatrix)> {
    let stage = build_stage(q, j)?;
    Ok((stage.transition(), stage.incidence()))
}

/// A finite path prefix from the root: for each level, the target vertex
/// and the rank of the edge used.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PathPrefix {
    pub steps: Vec<(u64, u32)>,
}

/// Explicit stages `1..=j`, for walking finite paths.
#[derive(Debug, Clone)]
pub struct Diagram {
    pub stages: Vec<BratteliStage>,
}

impl Diagram {
    pub fn build(q: &KneadingMap, j: u64) -> Result<Self> {
        let mut stages = Vec::new();
        for level in 1..=j {
            stages.push(build_stage(q, level)?);
        }
        Ok(Diagram { stages })
    }

    fn edge(&self, level: usize, target: u64, rank: u32) -> Option<&Edge> {
        self.stages[level - 1]
            .edges
            .iter()
            .find(|e| e.target == target && e.rank == rank)
    }

    /// The minimal path from the root to `v` at level `j`.
    pub fn minimal_path(&self, j: usize, v: u64) -> Result<PathPrefix> {
        let mut steps = vec![(0u64, 0u32); j];
        let mut t = v;
        for level in (1..=j).rev() {
            let e = self
                .edge(level, t, 0)
                .ok_or_else(|| Error::Invalid(format!("vertex {t} is not on level {level}")))?;
            steps[level - 1] = (t, 0);
            t = e.source;
        }
        Ok(PathPrefix { steps })
    }

    pub fn is_valid(&self, p: &PathPrefix) -> bool {
        let mut at = 0u64;
        for (i, (t, r)) in p.steps.iter().enumerate() {
            match self.edge(i + 1, *t, *r) {
                Some(e) if e.source == at => at = *t,
                _ => return false,
            }
        }
        true
    }

    /// Vershik successor: the first non-maximal edge moves to its order
    /// successor and everything below resets to the minimal path.
    pub fn vershik_successor(&self, p: &PathPrefix) -> Result<PathPrefix> {
        if !self.is_valid(p) {
            return Err(Error::Invalid("not a path of the diagram".into()));
        }
        for (i, (t, r)) in p.steps.iter().enumerate() {
            let level = i + 1;
            if let Some(next) = self.edge(level, *t, r + 1) {
                let mut out = if level == 1 {
                    PathPrefix { steps: Vec::new() }
                } else {
                    self.minimal_path(level - 1, next.source)?
                };
                out.steps.push((*t, r + 1));
                out.steps.extend_from_slice(&p.steps[level..]);
                return Ok(out);
            }
        }
        Err(Error::Unresolved {
            window: p.steps.len(),
            detail: "every edge of the prefix is maximal".into(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kneading::ClosedForm;

    #[test]
    fn fibonacci_level_five() {
        let q = KneadingMap::fibonacci();
        let st = build_stage(&q, 5).unwrap();
        assert_eq!(st.vertices, vec![5, 6]);
        let mut pairs: Vec<_> = st.edges.iter().map(|e| (e.source, e.target)).collect();
        pairs.sort();
        assert_eq!(pairs, vec![(4, 5), (4, 6), (5, 5)]);
        assert_eq!(st.heights, vec![BigUint::from(8u32), BigUint::from(5u32)]);
        let m = st.transition();
        assert_eq!(m.at(4, 5), Rational::new(5.into(), 8.into()));
        assert_eq!(m.at(5, 5), Rational::new(3.into(), 8.into()));
        assert!(m.is_stochastic());
    }

    #[test]
    fn doubling_singletons() {
        let q = KneadingMap::closed(ClosedForm::Doubling);
        for j in 1..8 {
            let st = build_stage(&q, j).unwrap();
            assert_eq!(st.vertices, vec![j]);
            assert_eq!(st.heights[0], BigUint::one() << (j - 1));
        }
    }

    #[test]
    fn runs_agree_with_dense() {
        let q = KneadingMap::fibonacci();
        for j in 1..12 {
            let st = build_stage(&q, j).unwrap();
            let runs = height_runs(&q, j).unwrap();
            for (v, h) in st.vertices.iter().zip(&st.heights) {
                assert_eq!(height_at(&runs, &BigUint::from(*v)).as_ref(), Some(h));
            }
        }
    }

    #[test]
    fn vershik_cycle_counts_paths() {
        let q = KneadingMap::fibonacci();
        let d = Diagram::build(&q, 4).unwrap();
        for (v, h) in d.stages[3].vertices.iter().zip(&d.stages[3].heights) {
            let mut p = d.minimal_path(4, *v).unwrap();
            let mut count = 1u64;
            while let Ok(n) = d.vershik_successor(&p) {
                p = n;
                count += 1;
            }
            assert_eq!(BigUint::from(count), *h);
        }
    }

    #[test]
    fn zero_map_is_rejected() {
        assert!(Levels::new(&KneadingMap::closed(ClosedForm::Zero)).is_err());
    }
}
