//! The generalized odometer `(Omega_Q, T_Q)`.
//!
//! A point is a 0/1 word `x_0 x_1 ..` (lowest index first) such that
//! `x_k = 1` forces `x_j = 0` for `Q(k+1) <= j <= k-1`. Finite-support
//! points are the expansions `<n>` of integers in the base `(S_k)`, and
//! `T_Q` maps `<n>` to `<n+1>`.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::kneading::KneadingMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointKind {
    /// Every bit past the stored word is zero.
    Finite,
    /// Bits past the stored word are unknown.
    Truncated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdometerPoint {
    bits: Vec<bool>,
    kind: PointKind,
    /// Number of leading bits that are trustworthy.
    resolved: usize,
    q: KneadingMap,
}

impl OdometerPoint {
    /// Builds a point after checking the `Omega_Q` constraint on the word.
    pub fn new(bits: Vec<bool>, kind: PointKind, q: &KneadingMap) -> Result<Self> {
        if !membership(&bits, q)? {
            return Err(Error::Invalid(format!(
                "word {} violates the odometer constraint",
                word_string(&bits)
            )));
        }
        Ok(Self::unchecked(bits, kind, q))
    }

    fn unchecked(mut bits: Vec<bool>, kind: PointKind, q: &KneadingMap) -> Self {
        if kind == PointKind::Finite {
            while bits.last() == Some(&false) {
                bits.pop();
            }
        }
        let resolved = bits.len();
        OdometerPoint {
            bits,
            kind,
            resolved,
            q: q.clone(),
        }
    }

    pub fn parse(word: &str, kind: PointKind, q: &KneadingMap) -> Result<Self> {
        Self::new(parse_word(word)?, kind, q)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn kind(&self) -> PointKind {
        self.kind
    }

    pub fn resolved(&self) -> usize {
        self.resolved
    }

    pub fn kneading(&self) -> &KneadingMap {
        &self.q
    }

    pub fn bit(&self, k: usize) -> Option<bool> {
        match self.bits.get(k) {
            Some(b) => Some(*b),
            None if self.kind == PointKind::Finite => Some(false),
            None => None,
        }
    }

    /// `sigma(x|n) = sum_{k <= n} x_k S_k`; `None` means every stored bit.
    pub fn sigma_upto(&self, n: Option<usize>) -> Result<BigUint> {
        let top = n.map_or(self.bits.len(), |n| (n + 1).min(self.bits.len()));
        let mut s = BigUint::zero();
        for (k, b) in self.bits[..top].iter().enumerate() {
            if *b {
                s += self.q.cutting_time(k as u64)?;
            }
        }
        Ok(s)
    }

    /// `sigma(x)` for finite-support points.
    pub fn sigma(&self) -> Result<BigUint> {
        if self.kind != PointKind::Finite {
            return Err(Error::Domain(
                "sigma of a truncated point is not finite".into(),
            ));
        }
        self.sigma_upto(None)
    }

    /// `q(x)`, the least index carrying a one.
    pub fn first_one(&self) -> Option<usize> {
        self.bits.iter().position(|b| *b)
    }

    pub fn is_zero(&self) -> bool {
        self.kind == PointKind::Finite && self.bits.is_empty()
    }
}

impl fmt::Display for OdometerPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&word_string(&self.bits))
    }
}

pub fn parse_word(word: &str) -> Result<Vec<bool>> {
    word.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::Invalid(format!(
                "word character {other:?} is not 0 or 1"
            ))),
        })
        .collect()
}

/// Lowest index first; the empty word prints as `0`.
pub fn word_string(bits: &[bool]) -> String {
    if bits.is_empty() {
        return "0".into();
    }
    bits.iter().map(|b| if *b { '1' } else { '0' }).collect()
}

/// The `Omega_Q` constraint on a finite window.
pub fn membership(bits: &[bool], q: &KneadingMap) -> Result<bool> {
    for (k, b) in bits.iter().enumerate() {
        if *b {
            let lo = q.value(k as u64 + 1)? as usize;
            if bits[lo.min(k)..k].iter().any(|x| *x) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `<n>`, built greedily from the largest cutting time not exceeding the
/// remainder.
pub fn expand(n: &BigUint, q: &KneadingMap) -> Result<OdometerPoint> {
    let mut top = 0u64;
    while q.cutting_time(top + 1)? <= *n {
        top += 1;
    }
    let mut bits = vec![false; top as usize + 1];
    let mut rest = n.clone();
    for k in (0..=top).rev() {
        let s = q.cutting_time(k)?;
        if s <= rest {
            rest -= s;
            bits[k as usize] = true;
        }
    }
    debug_assert!(rest.is_zero());
    Ok(OdometerPoint::unchecked(bits, PointKind::Finite, q))
}

pub fn expand_u64(n: u64, q: &KneadingMap) -> Result<OdometerPoint> {
    expand(&BigUint::from(n), q)
}

/// `true` when no bit above `m` (known or not) can forbid setting bit `m`.
fn carry_target_clear(x: &OdometerPoint, m: usize) -> Result<Option<bool>> {
    for (k, b) in x.bits.iter().enumerate().skip(m + 1) {
        if *b && x.q.value(k as u64 + 1)? as usize <= m {
            return Ok(Some(false));
        }
    }
    if x.kind == PointKind::Truncated {
        // An unknown one at k >= len forbids m when Q(k+1) <= m.
        let len = x.bits.len() as u64;
        if !x.q.is_structurally_monotone() || x.q.value(len + 1)? as usize <= m {
            return Ok(None);
        }
    }
    Ok(Some(true))
}

/// `T_Q` by the carry rule: the target is the unique `m` with `x_m = 0`,
/// `sigma(x|m-1) = S_m - 1` and bit `m` compatible with the higher bits.
pub fn successor(x: &OdometerPoint) -> Result<OdometerPoint> {
    let limit = match x.kind {
        PointKind::Finite => x.bits.len() + 1,
        PointKind::Truncated => x.bits.len(),
    };
    let mut below = BigUint::zero();
    for m in 0..limit {
        let s_m = x.q.cutting_time(m as u64)?;
        let bit = x.bit(m).unwrap_or(false);
        if !bit && below == &s_m - 1u32 {
            match carry_target_clear(x, m)? {
                Some(true) => {
                    let mut bits = x.bits.clone();
                    if bits.len() <= m {
                        bits.resize(m + 1, false);
                    }
                    bits[..m].iter_mut().for_each(|b| *b = false);
                    bits[m] = true;
                    let mut out = OdometerPoint::unchecked(bits, x.kind, &x.q);
                    if x.kind == PointKind::Truncated {
                        out.resolved = x.resolved;
                    }
                    return Ok(out);
                }
                Some(false) => {}
                None => {
                    return Err(Error::Unresolved {
                        window: x.bits.len(),
                        detail: format!("carry target {m} may be blocked by bits past the window"),
                    })
                }
            }
        }
        if bit {
            below += s_m;
        }
    }
    Err(Error::Unresolved {
        window: x.bits.len(),
        detail: "carry propagates past the window".into(),
    })
}

/// `T_Q` on a finite-support point as `<sigma(x) + 1>`.
pub fn successor_by_expansion(x: &OdometerPoint) -> Result<OdometerPoint> {
    expand(&(x.sigma()? + 1u32), &x.q)
}

/// `T_Q^{-1}`: with `m = q(y)`, the bits below `m` become `<S_m - 1>` and
/// bit `m` is cleared.
pub fn predecessor(y: &OdometerPoint) -> Result<OdometerPoint> {
    let m = match y.first_one() {
        Some(m) => m,
        None if y.kind == PointKind::Finite => {
            return Err(Error::Domain("the zero point has no predecessor".into()))
        }
        None => {
            return Err(Error::Unresolved {
                window: y.bits.len(),
                detail: "no one inside the window, borrow position unknown".into(),
            })
        }
    };
    let low = expand(&(y.q.cutting_time(m as u64)? - 1u32), &y.q)?;
    let mut bits = y.bits.clone();
    bits[m] = false;
    for (k, b) in low.bits.iter().enumerate() {
        bits[k] = *b;
    }
    let mut out = OdometerPoint::unchecked(bits, y.kind, &y.q);
    if y.kind == PointKind::Truncated {
        out.resolved = y.resolved;
    }
    Ok(out)
}

/// `pi_j(x) = sum_{i < k_j} x_i S_i mod S_{k_j}` for an index `k_j` with
/// `Q(k_j + 1) = k_j`.
pub fn classical_projection(x: &OdometerPoint, kj: u64) -> Result<BigUint> {
    let q = &x.q;
    if q.value(kj + 1)? != kj {
        return Err(Error::Domain(format!(
            "Q({}) != {kj}, not a classical level",
            kj + 1
        )));
    }
    if x.kind == PointKind::Truncated && (x.bits.len() as u64) < kj {
        return Err(Error::Unresolved {
            window: x.bits.len(),
            detail: format!("projection needs {kj} bits"),
        });
    }
    let modulus = q.cutting_time(kj)?;
    let s = if kj == 0 {
        BigUint::zero()
    } else {
        x.sigma_upto(Some(kj as usize - 1))?
    };
    Ok(s.mod_floor(&modulus))
}

/// Classical levels `k <= limit` with `Q(k + 1) = k`.
pub fn classical_levels(q: &KneadingMap, limit: u64) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for k in 0..=limit {
        if q.value(k + 1)? == k {
            out.push(k);
        }
    }
    Ok(out)
}

/// `S_{k_j}` divides `S_{k_{j+1}}` along consecutive classical levels.
pub fn classical_divisibility(q: &KneadingMap, levels: &[u64]) -> Result<bool> {
    for w in levels.windows(2) {
        let a = q.cutting_time(w[0])?;
        let b = q.cutting_time(w[1])?;
        if !(b.mod_floor(&a)).is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Helper for callers holding machine integers.
pub fn sigma_u64(x: &OdometerPoint) -> Result<u64> {
    x.sigma()?
        .to_u64()
        .ok_or_else(|| Error::TooLarge("sigma exceeds a machine word".into()))
}
