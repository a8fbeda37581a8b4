//! Kneading maps and their cutting times.
//!
//! A kneading map `Q` satisfies `Q(0) = 0`, `Q(k) <= k - 1`, and determines
//! the cutting times through `S_0 = 1`, `S_k = S_{k-1} + S_{Q(k)}`.
//!
//! Resonant maps are described by two strictly increasing sequences `q` and
//! `b`: `Q` vanishes on `0..=q_{b(1)}` and equals `q_r` on the block
//! `q_{b(r)}+1 ..= q_{b(r+1)}`. The default `q_r = 2^(3^r) - 2` makes those
//! blocks astronomically long, so every resonant quantity is evaluated at
//! `BigUint` indices from the block structure instead of by recursion.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigUint;
use num_integer::Roots;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::rational::{ratio, Rational};

/// Highest `q` level evaluated unless the caller raises it.
pub const DEFAULT_LEVEL_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QSeq {
    /// `q_r = 2^(3^r) - 2`.
    Pow3Tower,
    Explicit(Vec<BigUint>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BSeq {
    /// `b(r) = r - 1 + m` for `r >= 1`.
    Finite(u64),
    /// `b(r) = r + floor((sqrt(8r + 1) - 1) / 2)`.
    Countable,
    /// `b(r) = 2r`.
    Cantor,
    Explicit(Vec<u64>),
}

/// The pair of sequences `(q_r)`, `(b(r))` defining a resonant kneading map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResonantSpec {
    pub q: QSeq,
    pub b: BSeq,
    /// Levels `r > level_cap` of `q` are refused with a horizon error.
    pub level_cap: usize,
}

impl ResonantSpec {
    pub fn new(q: QSeq, b: BSeq) -> Result<Self> {
        let spec = ResonantSpec {
            q,
            b,
            level_cap: DEFAULT_LEVEL_CAP,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_level_cap(mut self, cap: usize) -> Result<Self> {
        self.level_cap = cap;
        self.validate()?;
        Ok(self)
    }

    pub fn tower(b: BSeq) -> Result<Self> {
        Self::new(QSeq::Pow3Tower, b)
    }

    /// Checks `q_0 = b(0) = 0` and strict increase on every stored or
    /// capped index.
    pub fn validate(&self) -> Result<()> {
        if let BSeq::Finite(0) = self.b {
            return Err(Error::Invalid("finite(m) needs m >= 1".into()));
        }
        match &self.q {
            QSeq::Pow3Tower => {}
            QSeq::Explicit(v) => {
                if v.first().is_none_or(|x| !x.is_zero()) {
                    return Err(Error::Invalid("q must start with q_0 = 0".into()));
                }
                if v.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Invalid("q must be strictly increasing".into()));
                }
            }
        }
        if let BSeq::Explicit(v) = &self.b {
            if v.first() != Some(&0) {
                return Err(Error::Invalid("b must start with b(0) = 0".into()));
            }
            if v.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Invalid("b must be strictly increasing".into()));
            }
        }
        Ok(())
    }

    /// Number of `q` levels available, `q_0..q_{n-1}`.
    pub fn q_levels(&self) -> usize {
        match &self.q {
            QSeq::Pow3Tower => self.level_cap + 1,
            QSeq::Explicit(v) => v.len().min(self.level_cap + 1),
        }
    }

    pub fn q(&self, r: usize) -> Result<BigUint> {
        if r >= self.q_levels() {
            return Err(Error::horizon("q level", r, self.q_levels() - 1));
        }
        Ok(match &self.q {
            QSeq::Pow3Tower => {
                let e = 3u64.pow(r as u32);
                (BigUint::one() << e) - 2u32
            }
            QSeq::Explicit(v) => v[r].clone(),
        })
    }

    pub fn b(&self, r: usize) -> Result<usize> {
        let v = match &self.b {
            BSeq::Finite(m) => {
                if r == 0 {
                    0
                } else {
                    r as u64 - 1 + m
                }
            }
            BSeq::Countable => {
                let r = r as u64;
                r + ((8 * r + 1).sqrt() - 1) / 2
            }
            BSeq::Cantor => 2 * r as u64,
            BSeq::Explicit(v) => match v.get(r) {
                Some(x) => *x,
                None => return Err(Error::horizon("b index", r, v.len().saturating_sub(1))),
            },
        };
        Ok(v as usize)
    }

    /// Size of `I_r = {0, .., b(r) - r}`.
    pub fn index_size(&self, r: usize) -> Result<usize> {
        Ok(self.b(r)? - r + 1)
    }

    /// `k_r = q_{b(r)} + 1`.
    pub fn k(&self, r: usize) -> Result<BigUint> {
        Ok(self.q(self.b(r)?)? + 1u32)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value =
            serde_json::from_str(text).map_err(|e| Error::Invalid(format!("spec JSON: {e}")))?;
        Self::from_value(&v)
    }

    pub fn from_value(v: &Value) -> Result<Self> {
        let q = match v.get("q") {
            Some(Value::String(s)) if s == "pow3tower" => QSeq::Pow3Tower,
            Some(Value::Array(items)) => {
                QSeq::Explicit(items.iter().map(json_uint).collect::<Result<_>>()?)
            }
            _ => {
                return Err(Error::Invalid(
                    "spec needs \"q\": \"pow3tower\" or a list".into(),
                ))
            }
        };
        let b = match v.get("b") {
            Some(Value::Array(items)) => BSeq::Explicit(
                items
                    .iter()
                    .map(|x| {
                        json_uint(x).and_then(|n| {
                            n.to_u64()
                                .ok_or_else(|| Error::Invalid("b entry too large".into()))
                        })
                    })
                    .collect::<Result<_>>()?,
            ),
            Some(Value::Object(o)) => match o.get("builtin").and_then(Value::as_str) {
                Some("finite") => {
                    let m = o
                        .get("m")
                        .map(json_uint)
                        .transpose()?
                        .and_then(|m| m.to_u64());
                    BSeq::Finite(
                        m.ok_or_else(|| Error::Invalid("finite builtin needs \"m\"".into()))?,
                    )
                }
                Some("countable") => BSeq::Countable,
                Some("cantor") => BSeq::Cantor,
                other => return Err(Error::Invalid(format!("unknown b builtin {other:?}"))),
            },
            _ => return Err(Error::Invalid("spec needs \"b\"".into())),
        };
        let mut spec = ResonantSpec {
            q,
            b,
            level_cap: DEFAULT_LEVEL_CAP,
        };
        if let Some(cap) = v.get("level_cap") {
            spec.level_cap = json_uint(cap)?
                .to_usize()
                .ok_or_else(|| Error::Invalid("level_cap".into()))?;
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_value(&self) -> Value {
        let q = match &self.q {
            QSeq::Pow3Tower => json!("pow3tower"),
            QSeq::Explicit(v) => json!(v.iter().map(|x| x.to_string()).collect::<Vec<_>>()),
        };
        let b = match &self.b {
            BSeq::Finite(m) => json!({"builtin": "finite", "m": m}),
            BSeq::Countable => json!({"builtin": "countable"}),
            BSeq::Cantor => json!({"builtin": "cantor"}),
            BSeq::Explicit(v) => json!(v),
        };
        json!({"q": q, "b": b, "level_cap": self.level_cap})
    }
}

fn json_uint(v: &Value) -> Result<BigUint> {
    match v {
        Value::Number(n) => n
            .as_u64()
            .map(BigUint::from)
            .ok_or_else(|| Error::Invalid(format!("expected a non-negative integer, got {n}"))),
        Value::String(s) => s
            .parse::<BigUint>()
            .map_err(|_| Error::Invalid(format!("expected a decimal integer, got {s:?}"))),
        other => Err(Error::Invalid(format!("expected an integer, got {other}"))),
    }
}

/// Named kneading maps with closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedForm {
    /// `Q(k) = max(0, k - 2)`, cutting times are Fibonacci numbers.
    Fibonacci,
    /// `Q = 0`, `S_k = k + 1`.
    Zero,
    /// `Q(k) = k - 1`, `S_k = 2^k`.
    Doubling,
}

impl ClosedForm {
    pub fn name(&self) -> &'static str {
        match self {
            ClosedForm::Fibonacci => "fibonacci",
            ClosedForm::Zero => "zero",
            ClosedForm::Doubling => "doubling",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rule {
    Resonant(ResonantSpec),
    Table(Vec<u64>),
    Closed(ClosedForm),
}

/// Maximal run `lo..=hi` of indices on which `Q` takes `value`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub lo: BigUint,
    pub hi: BigUint,
    pub value: BigUint,
}

#[derive(Debug, Default)]
struct Caches {
    /// `S_0, S_1, ..` computed by the recursion.
    times: Vec<BigUint>,
    /// `S_{q_i}` keyed by `i` for resonant rules.
    at_level: HashMap<usize, BigUint>,
}

/// A kneading map with memoized cutting times. Clones share the memo.
#[derive(Debug, Clone)]
pub struct KneadingMap {
    rule: Rule,
    caches: Arc<Mutex<Caches>>,
}

impl PartialEq for KneadingMap {
    fn eq(&self, other: &Self) -> bool {
        self.rule == other.rule
    }
}

fn big(n: u64) -> BigUint {
    BigUint::from(n)
}

fn small(n: &BigUint, what: &str) -> Result<u64> {
    n.to_u64()
        .ok_or_else(|| Error::TooLarge(format!("{what} index {n} does not fit a machine word")))
}

impl KneadingMap {
    pub fn new(rule: Rule) -> Self {
        KneadingMap {
            rule,
            caches: Arc::new(Mutex::new(Caches::default())),
        }
    }

    /// A table `Q(0..len)`; structural conditions are checked here,
    /// admissibility is not.
    pub fn table(values: Vec<u64>) -> Result<Self> {
        if values.first() != Some(&0) {
            return Err(Error::Invalid(
                "kneading table must start with Q(0) = 0".into(),
            ));
        }
        if let Some((k, v)) = values
            .iter()
            .enumerate()
            .skip(1)
            .find(|(k, v)| **v >= *k as u64)
        {
            return Err(Error::Invalid(format!(
                "Q({k}) = {v} violates Q(k) <= k - 1"
            )));
        }
        Ok(Self::new(Rule::Table(values)))
    }

    pub fn closed(form: ClosedForm) -> Self {
        Self::new(Rule::Closed(form))
    }

    pub fn fibonacci() -> Self {
        Self::closed(ClosedForm::Fibonacci)
    }

    pub fn resonant(spec: ResonantSpec) -> Self {
        Self::new(Rule::Resonant(spec))
    }

    pub fn rule(&self) -> &Rule {
        &self.rule
    }

    pub fn spec(&self) -> Option<&ResonantSpec> {
        match &self.rule {
            Rule::Resonant(s) => Some(s),
            _ => None,
        }
    }

    /// Largest index at which `Q` is guaranteed evaluable; `None` when
    /// unbounded.
    pub fn horizon(&self) -> Option<BigUint> {
        match &self.rule {
            Rule::Table(v) => Some(big(v.len() as u64 - 1)),
            Rule::Closed(_) => None,
            Rule::Resonant(spec) => {
                let top = spec.q_levels() - 1;
                let mut r = 0;
                while spec.b(r + 1).is_ok_and(|b| b <= top) {
                    r += 1;
                }
                spec.b(r).ok().and_then(|b| spec.q(b).ok())
            }
        }
    }

    /// True when `Q` is known to be non-decreasing on its whole domain.
    pub fn is_structurally_monotone(&self) -> bool {
        match &self.rule {
            Rule::Resonant(_) | Rule::Closed(_) => true,
            Rule::Table(v) => v.windows(2).all(|w| w[0] <= w[1]),
        }
    }

    pub fn value(&self, k: u64) -> Result<u64> {
        match &self.rule {
            Rule::Table(v) => v
                .get(k as usize)
                .copied()
                .ok_or_else(|| Error::horizon("kneading table", k, v.len() - 1)),
            Rule::Closed(ClosedForm::Fibonacci) => Ok(k.saturating_sub(2)),
            Rule::Closed(ClosedForm::Zero) => Ok(0),
            Rule::Closed(ClosedForm::Doubling) => Ok(k.saturating_sub(1)),
            Rule::Resonant(_) => small(&self.value_big(&big(k))?, "Q value"),
        }
    }

    pub fn value_big(&self, k: &BigUint) -> Result<BigUint> {
        match &self.rule {
            Rule::Resonant(spec) => {
                if k.is_zero() {
                    return Ok(BigUint::zero());
                }
                let r = resonant_block(spec, k)?;
                spec.q(r)
            }
            _ => Ok(big(self.value(small(k, "kneading")?)?)),
        }
    }

    /// Maximal block of constancy containing `k`.
    pub fn block_containing(&self, k: &BigUint) -> Result<Block> {
        match &self.rule {
            Rule::Resonant(spec) => {
                let r = if k.is_zero() {
                    0
                } else {
                    resonant_block(spec, k)?
                };
                let lo = if r == 0 {
                    BigUint::zero()
                } else {
                    spec.q(spec.b(r)?)? + 1u32
                };
                Ok(Block {
                    lo,
                    hi: spec.q(spec.b(r + 1)?)?,
                    value: spec.q(r)?,
                })
            }
            Rule::Closed(ClosedForm::Zero) => {
                Err(Error::Domain("Q = 0 has a single unbounded block".into()))
            }
            Rule::Closed(ClosedForm::Fibonacci) => {
                let k = small(k, "kneading")?;
                Ok(if k <= 2 {
                    Block {
                        lo: big(0),
                        hi: big(2),
                        value: big(0),
                    }
                } else {
                    Block {
                        lo: big(k),
                        hi: big(k),
                        value: big(k - 2),
                    }
                })
            }
            Rule::Closed(ClosedForm::Doubling) => {
                let k = small(k, "kneading")?;
                Ok(if k <= 1 {
                    Block {
                        lo: big(0),
                        hi: big(1),
                        value: big(0),
                    }
                } else {
                    Block {
                        lo: big(k),
                        hi: big(k),
                        value: big(k - 1),
                    }
                })
            }
            Rule::Table(v) => {
                let ks = small(k, "kneading")? as usize;
                let value = *v
                    .get(ks)
                    .ok_or_else(|| Error::horizon("kneading table", ks, v.len() - 1))?;
                let mut lo = ks;
                while lo > 0 && v[lo - 1] == value {
                    lo -= 1;
                }
                let mut hi = ks;
                while hi + 1 < v.len() && v[hi + 1] == value {
                    hi += 1;
                }
                if hi + 1 == v.len() {
                    return Err(Error::horizon("kneading block end", hi + 1, v.len() - 1));
                }
                Ok(Block {
                    lo: big(lo as u64),
                    hi: big(hi as u64),
                    value: big(value),
                })
            }
        }
    }

    /// Blocks of constancy covering `lo..=hi`, clipped to that range.
    pub fn blocks_between(&self, lo: &BigUint, hi: &BigUint) -> Result<Vec<Block>> {
        let mut out = Vec::new();
        let mut at = lo.clone();
        while at <= *hi {
            let mut b = self.block_containing(&at)?;
            if b.lo < at {
                b.lo = at.clone();
            }
            if b.hi > *hi {
                b.hi = hi.clone();
            }
            at = &b.hi + 1u32;
            out.push(b);
        }
        Ok(out)
    }

    /// `max { m : Q(m) <= v }` for a non-decreasing diverging map.
    pub fn max_preimage_at_most(&self, v: &BigUint) -> Result<BigUint> {
        if !self.is_structurally_monotone() {
            return Err(Error::Domain(
                "preimage bounds need a non-decreasing Q".into(),
            ));
        }
        match &self.rule {
            Rule::Resonant(spec) => {
                let mut r = 0;
                while spec.q(r + 1)? <= *v {
                    r += 1;
                }
                spec.q(spec.b(r + 1)?)
            }
            Rule::Closed(ClosedForm::Zero) => Err(Error::Domain("Q = 0 does not diverge".into())),
            Rule::Closed(ClosedForm::Fibonacci) => Ok(v + 2u32),
            Rule::Closed(ClosedForm::Doubling) => Ok(v + 1u32),
            Rule::Table(t) => {
                let v = small(v, "kneading")?;
                match t.iter().position(|x| *x > v) {
                    Some(p) => Ok(big(p as u64 - 1)),
                    None => Err(Error::horizon(
                        "kneading table preimage",
                        t.len(),
                        t.len() - 1,
                    )),
                }
            }
        }
    }

    /// Values of `Q` lying in `lo..=hi`, in increasing order.
    pub fn image_between(&self, lo: &BigUint, hi: &BigUint) -> Result<Vec<BigUint>> {
        if !self.is_structurally_monotone() {
            return Err(Error::Domain(
                "image enumeration needs a non-decreasing Q".into(),
            ));
        }
        let mut out = Vec::new();
        match &self.rule {
            Rule::Resonant(spec) => {
                let mut r = 0;
                loop {
                    let q = spec.q(r)?;
                    if q > *hi {
                        break;
                    }
                    if q >= *lo {
                        out.push(q);
                    }
                    r += 1;
                }
            }
            Rule::Closed(ClosedForm::Zero) => {
                if lo.is_zero() {
                    out.push(BigUint::zero());
                }
            }
            Rule::Closed(_) => {
                let mut v = lo.clone();
                while v <= *hi {
                    out.push(v.clone());
                    v += 1u32;
                }
            }
            Rule::Table(t) => {
                let last = *t.last().unwrap();
                if *hi > big(last) {
                    return Err(Error::horizon("kneading table image", hi, last));
                }
                let mut seen: Vec<u64> = t.clone();
                seen.dedup();
                out.extend(seen.into_iter().map(big).filter(|x| x >= lo && x <= hi));
            }
        }
        Ok(out)
    }

    /// Cutting time `S_k` at a machine-word index.
    pub fn cutting_time(&self, k: u64) -> Result<BigUint> {
        match &self.rule {
            Rule::Closed(ClosedForm::Zero) => Ok(big(k + 1)),
            Rule::Closed(ClosedForm::Doubling) => Ok(BigUint::one() << k),
            Rule::Resonant(_) => self.cutting_time_big(&big(k)),
            _ => {
                self.extend_times(k)?;
                Ok(self.caches.lock().unwrap().times[k as usize].clone())
            }
        }
    }

    /// Cutting time at an arbitrary index; resonant rules use the block
    /// formula `S_k = S_{lo-1} + (k - lo + 1) S_{Q(k)}`.
    pub fn cutting_time_big(&self, k: &BigUint) -> Result<BigUint> {
        match &self.rule {
            Rule::Resonant(spec) => {
                let first = spec.q(spec.b(1)?)?;
                if *k <= first {
                    return Ok(k + 1u32);
                }
                let r = resonant_block(spec, k)?;
                let base = spec.q(spec.b(r)?)?;
                Ok(self.s_level(spec.b(r)?)? + (k - &base) * self.s_level(r)?)
            }
            _ => self.cutting_time(small(k, "cutting time")?),
        }
    }

    /// `S_{q_i}` for resonant rules.
    pub fn s_level(&self, i: usize) -> Result<BigUint> {
        let spec = self
            .spec()
            .ok_or_else(|| Error::Domain("level cutting times need a resonant rule".into()))?;
        if let Some(s) = self.caches.lock().unwrap().at_level.get(&i) {
            return Ok(s.clone());
        }
        let qi = spec.q(i)?;
        let s = if i <= spec.b(1)? {
            &qi + 1u32
        } else {
            let mut r = 1;
            while spec.b(r + 1)? < i {
                r += 1;
            }
            let base_level = spec.b(r)?;
            self.s_level(base_level)? + (&qi - spec.q(base_level)?) * self.s_level(r)?
        };
        self.caches.lock().unwrap().at_level.insert(i, s.clone());
        Ok(s)
    }

    fn extend_times(&self, k: u64) -> Result<()> {
        let have = self.caches.lock().unwrap().times.len() as u64;
        if have > k {
            return Ok(());
        }
        let mut fresh = Vec::new();
        let mut known = self.caches.lock().unwrap().times.clone();
        for i in have..=k {
            let s = if i == 0 {
                BigUint::one()
            } else {
                let qi = self.value(i)? as usize;
                &known[i as usize - 1] + &known[qi]
            };
            known.push(s.clone());
            fresh.push(s);
        }
        let mut c = self.caches.lock().unwrap();
        if c.times.len() as u64 == have {
            c.times.extend(fresh);
        }
        Ok(())
    }
}

/// Smallest `r` with `q_{b(r+1)} >= k`, for `k >= 1`.
fn resonant_block(spec: &ResonantSpec, k: &BigUint) -> Result<usize> {
    let mut r = 0;
    loop {
        let end = spec.q(spec.b(r + 1)?)?;
        if end >= *k {
            return Ok(r);
        }
        r += 1;
    }
}

/// `S_0..=S_K` by the defining recursion.
pub fn cutting_times(q: &KneadingMap, k: u64) -> Result<Vec<BigUint>> {
    let mut out: Vec<BigUint> = Vec::with_capacity(k as usize + 1);
    out.push(BigUint::one());
    for i in 1..=k {
        let qi = q.value(i)?;
        if qi >= i {
            return Err(Error::Invalid(format!(
                "Q({i}) = {qi} violates Q(k) <= k - 1"
            )));
        }
        let s = &out[i as usize - 1] + &out[qi as usize];
        out.push(s);
    }
    Ok(out)
}

/// Three-valued admissibility verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Admissibility {
    /// Admissible up to the checked horizon. `monotone` marks a verdict
    /// obtained from the non-decreasing criterion.
    Admissible {
        horizon: u64,
        monotone: bool,
    },
    Violated {
        at: u64,
        reason: String,
    },
    /// Some comparison could not be decided inside the window.
    Indeterminate {
        at: u64,
        window: u64,
    },
}

impl Admissibility {
    pub fn is_admissible(&self) -> bool {
        matches!(self, Admissibility::Admissible { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Admissibility::Admissible { .. } => "admissible",
            Admissibility::Violated { .. } => "violated",
            Admissibility::Indeterminate { .. } => "indeterminate",
        }
    }
}

/// Checks `Q(0) = 0`, `Q(k) <= k - 1` and the lexicographic condition
/// `{Q(k+j)}_j >= {Q(Q(Q(k))+j)}_j` for `1 <= k <= horizon`.
///
/// Comparisons only read indices up to `window` (default `horizon`). A map
/// non-decreasing on everything it can evaluate is admissible outright.
pub fn is_admissible(q: &KneadingMap, horizon: u64, window: Option<u64>) -> Result<Admissibility> {
    let window = window.unwrap_or(horizon).max(horizon);
    if q.value(0)? != 0 {
        return Ok(Admissibility::Violated {
            at: 0,
            reason: "Q(0) != 0".into(),
        });
    }
    for k in 1..=horizon {
        let v = q.value(k)?;
        if v >= k {
            return Ok(Admissibility::Violated {
                at: k,
                reason: format!("Q({k}) = {v} > k - 1"),
            });
        }
    }
    if q.is_structurally_monotone() {
        return Ok(Admissibility::Admissible {
            horizon,
            monotone: true,
        });
    }
    let mut undecided = None;
    for k in 1..=horizon {
        let other = q.value(q.value(k)?)?;
        match compare_tails(q, k, other, window)? {
            Some(std::cmp::Ordering::Less) => {
                return Ok(Admissibility::Violated {
                    at: k,
                    reason: format!("tail after {k} is lexicographically below tail after {other}"),
                })
            }
            Some(_) => {}
            None => {
                undecided.get_or_insert(k);
            }
        }
    }
    Ok(match undecided {
        Some(at) => Admissibility::Indeterminate { at, window },
        None => Admissibility::Admissible {
            horizon,
            monotone: false,
        },
    })
}

fn compare_tails(
    q: &KneadingMap,
    k: u64,
    other: u64,
    window: u64,
) -> Result<Option<std::cmp::Ordering>> {
    let mut j = 1;
    while k + j <= window {
        let a = q.value(k + j)?;
        let b = q.value(other + j)?;
        if a != b {
            return Ok(Some(a.cmp(&b)));
        }
        j += 1;
    }
    Ok(None)
}

/// The resonant kneading map of `spec`.
pub fn resonant_kneading(spec: ResonantSpec) -> Result<KneadingMap> {
    spec.validate()?;
    Ok(KneadingMap::resonant(spec))
}

/// Partial products `prod_{r < R} (1 - S_{q_r} / S_{q_{r+1}})` for
/// `R = 1..=depth`.
pub fn divergence_products(spec: &ResonantSpec, depth: usize) -> Result<Vec<Rational>> {
    if depth == 0 {
        return Err(Error::Domain("divergence product needs R >= 1".into()));
    }
    let q = KneadingMap::resonant(spec.clone());
    let mut acc = Rational::one();
    let mut out = Vec::with_capacity(depth);
    for r in 0..depth {
        let a = q.s_level(r)?;
        let b = q.s_level(r + 1)?;
        acc *= Rational::one() - ratio(&a, &b);
        out.push(acc.clone());
    }
    Ok(out)
}

pub fn divergence_product(spec: &ResonantSpec, depth: usize) -> Result<Rational> {
    Ok(divergence_products(spec, depth)?.pop().unwrap())
}

/// `prod_{s < r} (1 + q_{s+1} - q_s)`, which bounds `S_{q_r}` from above.
pub fn norma_product(spec: &ResonantSpec, r: usize) -> Result<BigUint> {
    let mut p = BigUint::one();
    for s in 0..r {
        p *= spec.q(s + 1)? + 1u32 - spec.q(s)?;
    }
    Ok(p)
}

/// `q_{r+1} >= q_r + r^2 prod_{s < r} (1 + q_{s+1} - q_s)`.
pub fn check_norma(spec: &ResonantSpec, r: usize) -> Result<bool> {
    if r == 0 {
        return Err(Error::Domain(
            "growth condition is stated for r >= 1".into(),
        ));
    }
    let rhs = spec.q(r)? + big((r * r) as u64) * norma_product(spec, r)?;
    Ok(spec.q(r + 1)? >= rhs)
}

/// Built-in maps: resonant specs over the tower `q`, or a closed form.
#[derive(Debug, Clone)]
pub enum Builtin {
    Spec(ResonantSpec),
    Map(KneadingMap),
}

impl Builtin {
    pub fn into_map(self) -> KneadingMap {
        match self {
            Builtin::Spec(s) => KneadingMap::resonant(s),
            Builtin::Map(m) => m,
        }
    }
}

/// Accepts `finite(m)`, `finite:m`, `countable`, `cantor`, `fibonacci`,
/// `zero`, `doubling`.
pub fn builtin_spec(name: &str) -> Result<Builtin> {
    let name = name.trim().to_ascii_lowercase();
    let finite_arg = name
        .strip_prefix("finite(")
        .and_then(|s| s.strip_suffix(')'))
        .or_else(|| name.strip_prefix("finite:"));
    if let Some(m) = finite_arg {
        let m: u64 = m
            .trim()
            .parse()
            .map_err(|_| Error::Invalid(format!("bad finite size {m:?}")))?;
        if m == 0 {
            return Err(Error::Invalid(
                "finite(0) has no ergodic measures to realize".into(),
            ));
        }
        return Ok(Builtin::Spec(ResonantSpec::tower(BSeq::Finite(m))?));
    }
    Ok(match name.as_str() {
        "countable" => Builtin::Spec(ResonantSpec::tower(BSeq::Countable)?),
        "cantor" => Builtin::Spec(ResonantSpec::tower(BSeq::Cantor)?),
        "fibonacci" => Builtin::Map(KneadingMap::fibonacci()),
        "zero" => Builtin::Map(KneadingMap::closed(ClosedForm::Zero)),
        "doubling" => Builtin::Map(KneadingMap::closed(ClosedForm::Doubling)),
        _ => return Err(Error::Invalid(format!("unknown builtin {name:?}"))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn times(q: &KneadingMap, k: u64) -> Vec<u64> {
        cutting_times(q, k)
            .unwrap()
            .iter()
            .map(|s| s.to_u64().unwrap())
            .collect()
    }

    #[test]
    fn closed_form_times() {
        assert_eq!(
            times(&KneadingMap::fibonacci(), 6),
            vec![1, 2, 3, 5, 8, 13, 21]
        );
        assert_eq!(
            times(&KneadingMap::closed(ClosedForm::Zero), 5),
            vec![1, 2, 3, 4, 5, 6]
        );
        assert_eq!(
            times(&KneadingMap::closed(ClosedForm::Doubling), 5),
            vec![1, 2, 4, 8, 16, 32]
        );
    }

    #[test]
    fn tower_values() {
        let spec = ResonantSpec::tower(BSeq::Cantor).unwrap();
        assert_eq!(spec.q(1).unwrap(), big(6));
        assert_eq!(spec.q(2).unwrap(), big(510));
        assert_eq!(spec.q(3).unwrap(), big(134217726));
        let q = KneadingMap::resonant(spec);
        assert_eq!(q.value(510).unwrap(), 0);
        assert_eq!(q.value(511).unwrap(), 6);
        assert_eq!(q.cutting_time(6).unwrap(), big(7));
        assert_eq!(q.cutting_time(510).unwrap(), big(511));
    }

    #[test]
    fn countable_b_prefix() {
        let spec = ResonantSpec::tower(BSeq::Countable).unwrap();
        let b: Vec<_> = (0..10).map(|r| spec.b(r).unwrap()).collect();
        assert_eq!(b, vec![0, 2, 3, 5, 6, 7, 9, 10, 11, 12]);
    }

    #[test]
    fn block_formula_matches_recursion() {
        let spec = ResonantSpec::new(
            QSeq::Explicit(
                [0u64, 2, 5, 9, 14, 20, 27, 35, 44]
                    .iter()
                    .map(|x| big(*x))
                    .collect(),
            ),
            BSeq::Explicit(vec![0, 2, 3, 5, 6, 7]),
        )
        .unwrap();
        let q = KneadingMap::resonant(spec);
        let h = q.horizon().unwrap().to_u64().unwrap();
        let rec = cutting_times(&q, h).unwrap();
        for (k, s) in rec.iter().enumerate() {
            assert_eq!(&q.cutting_time_big(&big(k as u64)).unwrap(), s, "k = {k}");
        }
    }

    #[test]
    fn admissibility_verdicts() {
        assert!(is_admissible(&KneadingMap::fibonacci(), 20, None)
            .unwrap()
            .is_admissible());
        assert!(KneadingMap::table(vec![0, 1]).is_err());
        let t = KneadingMap::table(vec![0, 0, 1, 0, 0, 0]).unwrap();
        assert_eq!(is_admissible(&t, 5, None).unwrap().label(), "violated");
        let flat = KneadingMap::table(vec![0, 0, 0, 0]).unwrap();
        assert!(is_admissible(&flat, 3, None).unwrap().is_admissible());
    }

    #[test]
    fn products_and_norma() {
        let spec = ResonantSpec::tower(BSeq::Cantor).unwrap();
        let p = divergence_products(&spec, 2).unwrap();
        let r = |a: i64, b: i64| Rational::new(a.into(), b.into());
        assert_eq!(p[0], r(6, 7));
        assert_eq!(p[1], r(6, 7) * r(504, 511));
        assert!(check_norma(&spec, 2).unwrap());
        let lin =
            ResonantSpec::new(QSeq::Explicit((0..10).map(big).collect()), BSeq::Cantor).unwrap();
        assert!(!check_norma(&lin, 3).unwrap());
    }

    #[test]
    fn spec_json_round_trip() {
        let text = r#"{"q":"pow3tower","b":{"builtin":"finite","m":3}}"#;
        let spec = ResonantSpec::from_json(text).unwrap();
        assert_eq!(spec.b, BSeq::Finite(3));
        assert_eq!(ResonantSpec::from_value(&spec.to_value()).unwrap(), spec);
        let explicit = ResonantSpec::from_json(r#"{"q":[0,"6",510],"b":[0,2,4]}"#).unwrap();
        assert_eq!(explicit.q(1).unwrap(), big(6));
        assert!(ResonantSpec::from_json(r#"{"q":[0,5,5],"b":[0,1]}"#).is_err());
    }
}
