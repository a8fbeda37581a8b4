//! Numerical lab for actual unimodal maps on `[0, 1]`.
//!
//! Orbits are computed in binary fixed point at a configurable precision.
//! Every membership decision `c ∈ D_n` is a sign test on two orbit points,
//! and is marked fragile when either point lies within the tolerance of `c`.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_traits::ToPrimitive;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fixed::{Fixed, DEFAULT_PRECISION};
use crate::kneading::{cutting_times, is_admissible, Admissibility, KneadingMap};
use crate::odometer::{OdometerPoint, PointKind};
use crate::rational::Rational;

/// Longest orbit the lab will compute by default.
pub const DEFAULT_HORIZON: u64 = 1 << 22;
/// Longest target itinerary accepted by the parameter search.
pub const MAX_ITINERARY: u64 = 1 << 26;
pub const DEFAULT_FRAGILE_BUDGET: usize = 4;

pub type MapFn = Arc<dyn Fn(&Fixed) -> Fixed + Send + Sync>;
pub type DerivFn = Arc<dyn Fn(&Fixed) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Family {
    Logistic(Fixed),
    Tent(Fixed),
    /// `abs_deriv` returns `|f'(x)|`; without it no Lyapunov exponent.
    Custom {
        name: String,
        f: MapFn,
        abs_deriv: Option<DerivFn>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Logistic,
    Tent,
}

impl FamilyKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "logistic" => Ok(FamilyKind::Logistic),
            "tent" => Ok(FamilyKind::Tent),
            _ => Err(Error::Invalid(format!(
                "unknown family {s:?} (logistic | tent)"
            ))),
        }
    }

    pub fn build(self, param: Fixed) -> Result<UnimodalMap> {
        match self {
            FamilyKind::Logistic => UnimodalMap::logistic(param),
            FamilyKind::Tent => UnimodalMap::tent(param),
        }
    }

    /// Parameter range on which `f(c) >= c`.
    pub fn default_range(self, prec: u32) -> (Fixed, Fixed) {
        match self {
            FamilyKind::Logistic => (Fixed::from_int(2, prec), Fixed::from_int(4, prec)),
            FamilyKind::Tent => (Fixed::from_int(1, prec), Fixed::from_int(2, prec)),
        }
    }
}

#[derive(Clone)]
pub struct UnimodalMap {
    family: Family,
    c: Fixed,
    prec: u32,
}

impl fmt::Debug for UnimodalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UnimodalMap({}, prec={})", self.describe(), self.prec)
    }
}

fn check_prec(prec: u32) -> Result<()> {
    if !(16..=1024).contains(&prec) {
        return Err(Error::Domain(format!(
            "precision {prec} outside 16..=1024 bits"
        )));
    }
    Ok(())
}

impl UnimodalMap {
    /// `x -> λ x (1 - x)` with `λ ∈ (0, 4]`.
    pub fn logistic(lambda: Fixed) -> Result<Self> {
        let prec = lambda.precision();
        check_prec(prec)?;
        if lambda <= Fixed::zero(prec) || lambda > Fixed::from_int(4, prec) {
            return Err(Error::Domain(format!(
                "logistic parameter {lambda} outside (0, 4]"
            )));
        }
        Ok(UnimodalMap {
            family: Family::Logistic(lambda),
            c: Fixed::pow2_neg(1, prec),
            prec,
        })
    }

    /// `x -> s min(x, 1 - x)` with `s ∈ (0, 2]`.
    pub fn tent(s: Fixed) -> Result<Self> {
        let prec = s.precision();
        check_prec(prec)?;
        if s <= Fixed::zero(prec) || s > Fixed::from_int(2, prec) {
            return Err(Error::Domain(format!("tent slope {s} outside (0, 2]")));
        }
        Ok(UnimodalMap {
            family: Family::Tent(s),
            c: Fixed::pow2_neg(1, prec),
            prec,
        })
    }

    /// A caller-supplied map with declared turning point `c`. The shape is
    /// spot-checked on a grid.
    pub fn custom(
        name: impl Into<String>,
        f: MapFn,
        abs_deriv: Option<DerivFn>,
        c: Fixed,
    ) -> Result<Self> {
        let prec = c.precision();
        check_prec(prec)?;
        let map = UnimodalMap {
            family: Family::Custom {
                name: name.into(),
                f,
                abs_deriv,
            },
            c,
            prec,
        };
        map.check_shape(64)?;
        Ok(map)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn kind(&self) -> Option<FamilyKind> {
        match self.family {
            Family::Logistic(_) => Some(FamilyKind::Logistic),
            Family::Tent(_) => Some(FamilyKind::Tent),
            Family::Custom { .. } => None,
        }
    }

    pub fn parameter(&self) -> Option<&Fixed> {
        match &self.family {
            Family::Logistic(p) | Family::Tent(p) => Some(p),
            Family::Custom { .. } => None,
        }
    }

    pub fn critical(&self) -> &Fixed {
        &self.c
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn describe(&self) -> String {
        match &self.family {
            Family::Logistic(p) => format!("logistic({})", p.to_decimal(12)),
            Family::Tent(p) => format!("tent({})", p.to_decimal(12)),
            Family::Custom { name, .. } => format!("custom({name})"),
        }
    }

    pub fn apply(&self, x: &Fixed) -> Fixed {
        match &self.family {
            Family::Logistic(l) => {
                let one = Fixed::one(self.prec);
                l.mul(x).mul(&one.sub(x))
            }
            Family::Tent(s) => {
                if *x <= self.c {
                    s.mul(x)
                } else {
                    s.mul(&Fixed::one(self.prec).sub(x))
                }
            }
            Family::Custom { f, .. } => f(x),
        }
    }

    /// `|f'(x)|`, `None` when no derivative is available.
    pub fn abs_derivative(&self, x: &Fixed) -> Option<f64> {
        match &self.family {
            Family::Logistic(l) => {
                let one = Fixed::one(self.prec);
                Some(l.mul(&one.sub(&x.mul_int(2))).to_f64().abs())
            }
            Family::Tent(s) => Some(s.to_f64()),
            Family::Custom { abs_deriv, .. } => abs_deriv.as_ref().map(|d| d(x)),
        }
    }

    /// `f(0) = f(1) = 0` within half the working precision, increasing left
    /// of `c` and decreasing right of it on a grid of `points` nodes.
    pub fn check_shape(&self, points: u32) -> Result<()> {
        let tol = Fixed::pow2_neg(self.prec / 2, self.prec);
        for x in [Fixed::zero(self.prec), Fixed::one(self.prec)] {
            if self.apply(&x).abs() > tol {
                return Err(Error::Domain(format!(
                    "{}: f({x}) is not 0",
                    self.describe()
                )));
            }
        }
        let points = points.max(2);
        let mut prev: Option<(Fixed, Fixed)> = None;
        for i in 0..=points {
            let x = Fixed::from_rational(&Rational::new(i.into(), points.into()), self.prec);
            let y = self.apply(&x);
            if let Some((px, py)) = &prev {
                let rising = *px < self.c && x <= self.c;
                let falling = *px >= self.c;
                if (rising && y < *py) || (falling && y > *py) {
                    return Err(Error::Domain(format!(
                        "{}: not unimodal near {x}",
                        self.describe()
                    )));
                }
            }
            prev = Some((x, y));
        }
        Ok(())
    }

    /// `f^2(c) < c < f(c)`.
    pub fn check_kneading_precondition(&self) -> Result<()> {
        let c1 = self.apply(&self.c);
        let c2 = self.apply(&c1);
        if c2 < self.c && self.c < c1 {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "{} needs f^2(c) < c < f(c); got f(c) = {c1}, f^2(c) = {c2}",
                self.describe()
            )))
        }
    }

    /// `c_0 = c, c_1, .., c_n`.
    pub fn critical_orbit(&self, n: u64) -> Vec<Fixed> {
        let mut out = Vec::with_capacity(n as usize + 1);
        out.push(self.c.clone());
        for i in 0..n as usize {
            let next = self.apply(&out[i]);
            out.push(next);
        }
        out
    }

    /// Default tolerance `2^-(prec/4)`, that is `2^-64` at 256 bits.
    pub fn default_tolerance(&self) -> Fixed {
        Fixed::pow2_neg(self.prec / 4, self.prec)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    In,
    Out,
    /// Decided by sign, but an endpoint lies within the tolerance of `c`.
    Fragile {
        inside: bool,
    },
}

impl Verdict {
    pub fn inside(self) -> bool {
        matches!(self, Verdict::In | Verdict::Fragile { inside: true })
    }

    pub fn label(self) -> &'static str {
        match self {
            Verdict::In => "in",
            Verdict::Out => "out",
            Verdict::Fragile { .. } => "fragile",
        }
    }
}

/// `D_n` is the hull of the orbit points `c_a` and `c_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DnInterval {
    pub n: u64,
    pub a: u64,
    pub verdict: Verdict,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DegeneracyKind {
    /// The critical orbit landed exactly on a fixed point.
    FixedPoint,
    /// The critical orbit returned exactly to `c`.
    CriticalReturn,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Degeneracy {
    pub at: u64,
    pub kind: DegeneracyKind,
}

#[derive(Clone, Debug)]
pub struct DnOptions {
    pub tolerance: Option<Fixed>,
    /// Longest run of consecutive fragile verdicts tolerated.
    pub fragile_budget: usize,
    pub horizon: u64,
}

impl Default for DnOptions {
    fn default() -> Self {
        DnOptions {
            tolerance: None,
            fragile_budget: DEFAULT_FRAGILE_BUDGET,
            horizon: DEFAULT_HORIZON,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DnSequence {
    map: UnimodalMap,
    tolerance: Fixed,
    orbit: Vec<Fixed>,
    intervals: Vec<DnInterval>,
    cutting: Vec<u64>,
    fragile: Vec<u64>,
    degenerate: Option<Degeneracy>,
}

impl DnSequence {
    fn start(map: &UnimodalMap, tolerance: Fixed) -> Result<Self> {
        map.check_kneading_precondition()?;
        let c1 = map.apply(map.critical());
        Ok(DnSequence {
            map: map.clone(),
            tolerance,
            orbit: vec![map.critical().clone(), c1],
            intervals: vec![DnInterval {
                n: 1,
                a: 0,
                verdict: Verdict::In,
            }],
            cutting: vec![1],
            fragile: Vec::new(),
            degenerate: None,
        })
    }

    fn step(&mut self) {
        let last = *self.intervals.last().expect("D_1 present");
        let n = last.n + 1;
        let a = if last.verdict.inside() { 1 } else { last.a + 1 };
        let next = self.map.apply(&self.orbit[n as usize - 1]);
        if self.degenerate.is_none() {
            if next == self.orbit[n as usize - 1] {
                self.degenerate = Some(Degeneracy {
                    at: n,
                    kind: DegeneracyKind::FixedPoint,
                });
            } else if next == *self.map.critical() {
                self.degenerate = Some(Degeneracy {
                    at: n,
                    kind: DegeneracyKind::CriticalReturn,
                });
            }
        }
        self.orbit.push(next);
        let c = self.map.critical();
        let da = self.orbit[a as usize].sub(c);
        let dn = self.orbit[n as usize].sub(c);
        let inside = da.is_zero() || dn.is_zero() || da.is_negative() != dn.is_negative();
        let near = da.abs().min(dn.abs()) < self.tolerance;
        let verdict = if near {
            self.fragile.push(n);
            Verdict::Fragile { inside }
        } else if inside {
            Verdict::In
        } else {
            Verdict::Out
        };
        if inside {
            self.cutting.push(n);
        }
        self.intervals.push(DnInterval { n, a, verdict });
    }

    pub fn map(&self) -> &UnimodalMap {
        &self.map
    }

    pub fn len(&self) -> u64 {
        self.intervals.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn tolerance(&self) -> &Fixed {
        &self.tolerance
    }

    pub fn intervals(&self) -> &[DnInterval] {
        &self.intervals
    }

    pub fn interval(&self, n: u64) -> Option<DnInterval> {
        n.checked_sub(1)
            .and_then(|i| self.intervals.get(i as usize))
            .copied()
    }

    /// Ordered endpoints of `D_n`.
    pub fn endpoints(&self, n: u64) -> Option<(Fixed, Fixed)> {
        let d = self.interval(n)?;
        let (x, y) = (&self.orbit[d.a as usize], &self.orbit[d.n as usize]);
        Some(if x <= y {
            (x.clone(), y.clone())
        } else {
            (y.clone(), x.clone())
        })
    }

    /// `c_k`.
    pub fn orbit_point(&self, k: u64) -> Option<&Fixed> {
        self.orbit.get(k as usize)
    }

    pub fn cutting_times(&self) -> &[u64] {
        &self.cutting
    }

    pub fn is_cutting(&self, n: u64) -> bool {
        self.interval(n).is_some_and(|d| d.verdict.inside())
    }

    pub fn fragile(&self) -> &[u64] {
        &self.fragile
    }

    pub fn degenerate(&self) -> Option<Degeneracy> {
        self.degenerate
    }

    /// Length of the run of consecutive fragile verdicts ending at `D_N`.
    pub fn fragile_chain(&self) -> usize {
        let n = self.len();
        self.fragile
            .iter()
            .rev()
            .enumerate()
            .take_while(|(i, m)| **m + *i as u64 == n)
            .count()
    }

    fn check_budget(&self, budget: usize) -> Result<()> {
        let chain = self.fragile_chain();
        if chain > budget {
            let n = self.len();
            let (lo, hi) = self.endpoints(n).expect("current interval");
            let c = self.map.critical();
            let dist = lo.sub(c).abs().min(hi.sub(c).abs());
            return Err(Error::Precision(format!(
                "{chain} consecutive fragile verdicts exceed budget {budget} at n = {n}, \
                 endpoint distance to c about {:e} (raise --prec)",
                dist.to_f64()
            )));
        }
        Ok(())
    }

    fn extend_until(
        &mut self,
        opts: &DnOptions,
        mut done: impl FnMut(&DnSequence) -> bool,
    ) -> Result<()> {
        while !done(self) {
            if self.len() >= opts.horizon {
                return Err(Error::horizon(
                    "interval recursion",
                    self.len() + 1,
                    opts.horizon,
                ));
            }
            self.step();
            self.check_budget(opts.fragile_budget)?;
        }
        Ok(())
    }
}

fn start_with(map: &UnimodalMap, opts: &DnOptions) -> Result<DnSequence> {
    let tol = opts
        .tolerance
        .clone()
        .unwrap_or_else(|| map.default_tolerance());
    if tol.precision() != map.precision() {
        return Err(Error::Domain(
            "tolerance precision differs from the map precision".into(),
        ));
    }
    DnSequence::start(map, tol)
}

/// `D_1 .. D_N` with cutting flags.
pub fn d_intervals(map: &UnimodalMap, n: u64, opts: &DnOptions) -> Result<DnSequence> {
    if n == 0 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    let mut seq = start_with(map, opts)?;
    let opts = DnOptions {
        horizon: opts.horizon.max(n),
        ..opts.clone()
    };
    seq.extend_until(&opts, |s| s.len() >= n)?;
    Ok(seq)
}

#[derive(Clone, Debug)]
pub struct Extraction {
    /// `Q(0..=K)`.
    pub q: Vec<u64>,
    /// `S_0..=S_K`.
    pub cutting_times: Vec<u64>,
    pub admissibility: Admissibility,
    pub fragile: Vec<u64>,
    pub degenerate: Option<Degeneracy>,
    pub orbit_length: u64,
}

/// Kneading map prefix `Q(0..=K)` read off the first `K + 1` cutting times.
pub fn kneading_from_map(map: &UnimodalMap, k: u64, opts: &DnOptions) -> Result<Extraction> {
    let mut seq = start_with(map, opts)?;
    seq.extend_until(opts, |s| s.cutting.len() as u64 > k)?;
    let s = &seq.cutting[..=k as usize];
    let mut q = vec![0u64];
    for i in 1..s.len() {
        let diff = s[i] - s[i - 1];
        match s[..i].binary_search(&diff) {
            Ok(j) => q.push(j as u64),
            Err(_) => {
                return Err(Error::Inconsistent(format!(
                    "S_{i} - S_{} = {diff} is not an earlier cutting time (numerical breakdown or periodic attractor)",
                    i - 1
                )))
            }
        }
    }
    let table = KneadingMap::table(q.clone())?;
    let admissibility = is_admissible(&table, k, None)?;
    Ok(Extraction {
        q,
        cutting_times: s.to_vec(),
        admissibility,
        fragile: seq.fragile.clone(),
        degenerate: seq.degenerate,
        orbit_length: seq.len(),
    })
}

/// Itinerary `ν_1 .. ν_{S_K}` of `c_1` determined by `Q(1..=K)`, with
/// 0 for the left branch and 2 for the right one.
pub fn kneading_sequence(q: &KneadingMap, k: u64) -> Result<Vec<u8>> {
    let s: Vec<u64> = cutting_times(q, k)?
        .iter()
        .map(|v| v.to_u64().filter(|v| *v <= MAX_ITINERARY))
        .collect::<Option<_>>()
        .ok_or_else(|| Error::TooLarge(format!("S_{k} exceeds {MAX_ITINERARY}")))?;
    let mut nu = vec![2u8];
    for i in 1..=k {
        let len = s[q.value(i)? as usize] as usize;
        let start = nu.len();
        nu.extend_from_within(..len);
        let last = nu.len() - 1;
        nu[last] = 2 - nu[last];
        debug_assert_eq!(
            nu.len() as u64,
            s[i as usize],
            "block ends at S_k (start {start})"
        );
    }
    Ok(nu)
}

fn symbol(x: &Fixed, c: &Fixed) -> u8 {
    match x.cmp(c) {
        Ordering::Less => 0,
        Ordering::Equal => 1,
        Ordering::Greater => 2,
    }
}

/// Itinerary of `c_1` against `target` in the unimodal order, stopping at
/// the first difference. Returns the order and the number of orbit steps.
pub fn compare_itinerary(map: &UnimodalMap, target: &[u8]) -> (Ordering, u64) {
    let c = map.critical();
    let mut x = c.clone();
    let mut odd = false;
    for (i, t) in target.iter().enumerate() {
        x = map.apply(&x);
        let s = symbol(&x, c);
        if s != *t {
            let ord = s.cmp(t);
            return (if odd { ord.reverse() } else { ord }, i as u64 + 1);
        }
        odd ^= s == 2;
    }
    (Ordering::Equal, target.len() as u64)
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub prec: u32,
    /// Give up once the bracket is narrower than `2^-tol_bits`.
    pub tol_bits: u32,
    pub range: Option<(Fixed, Fixed)>,
    pub dn: DnOptions,
}

impl SearchOptions {
    pub fn new(prec: u32) -> Self {
        SearchOptions {
            prec,
            tol_bits: prec.saturating_sub(8),
            range: None,
            dn: DnOptions::default(),
        }
    }
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions::new(DEFAULT_PRECISION)
    }
}

#[derive(Clone, Debug)]
pub struct ParameterFit {
    pub parameter: Fixed,
    pub bracket: (Fixed, Fixed),
    pub iterations: u32,
    pub orbit_steps: u64,
    pub extraction: Extraction,
}

impl ParameterFit {
    pub fn width(&self) -> Fixed {
        self.bracket.1.sub(&self.bracket.0)
    }
}

/// Bisection on the unimodal order of the itinerary of `c_1`. The kneading
/// invariant is assumed monotone along the family; the returned parameter
/// is validated by re-extraction.
pub fn find_parameter(
    family: FamilyKind,
    target: &KneadingMap,
    k: u64,
    opts: &SearchOptions,
) -> Result<ParameterFit> {
    if let Admissibility::Violated { at, reason } = is_admissible(target, k, None)? {
        return Err(Error::Invalid(format!(
            "target prefix is not admissible at {at}: {reason}"
        )));
    }
    let nu = kneading_sequence(target, k)?;
    let (mut lo, mut hi) = opts
        .range
        .clone()
        .unwrap_or_else(|| family.default_range(opts.prec));
    if lo.precision() != opts.prec || hi.precision() != opts.prec || lo >= hi {
        return Err(Error::Domain(
            "search range must be an increasing pair at the search precision".into(),
        ));
    }
    let tol = Fixed::pow2_neg(opts.tol_bits, opts.prec);
    let mut steps = 0u64;
    let eval = |p: &Fixed, steps: &mut u64| -> Result<Ordering> {
        let (ord, n) = compare_itinerary(&family.build(p.clone())?, &nu);
        *steps += n;
        Ok(ord)
    };
    let finish = |p: Fixed,
                  bracket: (Fixed, Fixed),
                  iterations: u32,
                  orbit_steps: u64|
     -> Result<ParameterFit> {
        let map = family.build(p.clone())?;
        let extraction = kneading_from_map(&map, k, &opts.dn)?;
        let want: Vec<u64> = (0..=k).map(|i| target.value(i)).collect::<Result<_>>()?;
        if extraction.q != want {
            return Err(Error::Inconsistent(format!(
                "itinerary matched at {} but re-extraction gives {:?}",
                p.to_decimal(20),
                extraction.q
            )));
        }
        Ok(ParameterFit {
            parameter: p,
            bracket,
            iterations,
            orbit_steps,
            extraction,
        })
    };
    let at_lo = eval(&lo, &mut steps)?;
    if at_lo == Ordering::Equal {
        return finish(lo.clone(), (lo.clone(), lo), 0, steps);
    }
    let at_hi = eval(&hi, &mut steps)?;
    if at_hi == Ordering::Equal {
        return finish(hi.clone(), (hi.clone(), hi), 0, steps);
    }
    if at_lo == at_hi {
        return Err(Error::NotFound(format!(
            "target kneading prefix is not bracketed by [{}, {}]",
            lo.to_decimal(12),
            hi.to_decimal(12)
        )));
    }
    let mut it = 0u32;
    while hi.sub(&lo) > tol {
        it += 1;
        let mid = lo.midpoint(&hi);
        let ord = eval(&mid, &mut steps)?;
        if ord == Ordering::Equal {
            return finish(mid, (lo, hi), it, steps);
        }
        if ord == at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NotFound(format!(
        "bracket shrank below 2^-{} after {it} bisections without matching the target",
        opts.tol_bits
    )))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectionStep {
    /// Bit index with `x_n = 1`.
    pub n: usize,
    pub sigma: u64,
    pub lo: Fixed,
    pub hi: Fixed,
}

impl ProjectionStep {
    pub fn length(&self) -> Fixed {
        self.hi.sub(&self.lo)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Projected {
    /// `π(⟨m⟩) = c_m`.
    Point { sigma: u64, value: Fixed },
    /// Deepest resolvable `D_{σ(x|n)}`.
    Interval {
        n: usize,
        sigma: u64,
        lo: Fixed,
        hi: Fixed,
    },
}

#[derive(Clone, Debug)]
pub struct Projection {
    pub result: Projected,
    pub trace: Vec<ProjectionStep>,
}

/// Nested intervals `D_{σ(x|n)}` for `n >= q(x)` over the first `depth`
/// bits of `x`.
pub fn project_point(
    map: &UnimodalMap,
    q: &KneadingMap,
    x: &OdometerPoint,
    depth: usize,
    opts: &DnOptions,
) -> Result<Projection> {
    let bits = &x.bits()[..x.bits().len().min(depth)];
    let finite = x.kind() == PointKind::Finite && bits.len() == x.bits().len();
    let mut sig = 0u64;
    let mut targets: Vec<(usize, u64)> = Vec::new();
    for (k, b) in bits.iter().enumerate() {
        if *b {
            let s = q.cutting_time(k as u64)?.to_u64().unwrap_or(u64::MAX);
            match sig.checked_add(s).filter(|v| *v <= opts.horizon) {
                Some(v) => sig = v,
                None if finite => {
                    return Err(Error::horizon(
                        "projection orbit",
                        "beyond u64",
                        opts.horizon,
                    ))
                }
                None => break,
            }
            targets.push((k, sig));
        }
    }
    let mut seq = start_with(map, opts)?;
    let need = sig.max(1);
    let want_k = targets.last().map_or(0, |(k, _)| *k as u64);
    seq.extend_until(opts, |s| s.len() >= need)?;
    for (k, s) in seq.cutting.iter().enumerate().take(want_k as usize + 1) {
        let expect = q.cutting_time(k as u64)?;
        if expect.to_u64() != Some(*s) {
            return Err(Error::Inconsistent(format!(
                "map cutting time S_{k} = {s} differs from the kneading map ({expect})"
            )));
        }
    }
    let mut trace: Vec<ProjectionStep> = Vec::new();
    let tol = seq.tolerance.clone();
    for (n, sigma) in targets {
        let (lo, hi) = seq.endpoints(sigma).expect("extended far enough");
        if let Some(prev) = trace.last() {
            let inside = lo >= prev.lo.sub(&tol) && hi <= prev.hi.add(&tol);
            if !inside {
                return Err(Error::Precision(format!(
                    "D_{sigma} is not nested in D_{} (raise --prec)",
                    prev.sigma
                )));
            }
        }
        trace.push(ProjectionStep { n, sigma, lo, hi });
    }
    let result = if finite {
        Projected::Point {
            sigma: sig,
            value: seq.orbit[sig as usize].clone(),
        }
    } else {
        match trace.last() {
            Some(t) => Projected::Interval {
                n: t.n,
                sigma: t.sigma,
                lo: t.lo.clone(),
                hi: t.hi.clone(),
            },
            None => return Err(Error::Domain("no ones within the requested depth".into())),
        }
    };
    Ok(Projection { result, trace })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LyapunovReport {
    pub n: u64,
    /// `-inf` when the orbit hits `c`.
    pub average: f64,
    pub hit_critical: Option<u64>,
    /// Running averages at the checkpoints reached.
    pub trace: Vec<(u64, f64)>,
}

/// Decades `10, 100, ..` up to `n`, and `n` itself.
pub fn decade_checkpoints(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 10u64;
    while d < n {
        out.push(d);
        d = d.saturating_mul(10);
    }
    out.push(n);
    out
}

/// Birkhoff average of `ln|f'|` along `x0, f(x0), .., f^{n-1}(x0)`.
pub fn lyapunov(
    map: &UnimodalMap,
    x0: &Fixed,
    n: u64,
    checkpoints: &[u64],
) -> Result<LyapunovReport> {
    let prec = map.precision();
    if x0.precision() != prec {
        return Err(Error::Domain(
            "x0 precision differs from the map precision".into(),
        ));
    }
    if *x0 <= Fixed::zero(prec) || *x0 >= Fixed::one(prec) {
        return Err(Error::Domain(format!("x0 = {x0} outside (0, 1)")));
    }
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    if map.abs_derivative(x0).is_none() {
        return Err(Error::Domain(format!(
            "{} has no derivative",
            map.describe()
        )));
    }
    let mut x = x0.clone();
    let mut mean = 0.0f64;
    let mut trace = Vec::new();
    let mut next_cp = checkpoints.iter().copied().filter(|c| *c <= n).peekable();
    for i in 1..=n {
        if x == *map.critical() {
            return Ok(LyapunovReport {
                n,
                average: f64::NEG_INFINITY,
                hit_critical: Some(i - 1),
                trace,
            });
        }
        let d = map.abs_derivative(&x).expect("checked above");
        // incremental mean: a constant summand reproduces itself exactly
        mean += (d.ln() - mean) / i as f64;
        while next_cp.peek() == Some(&i) {
            trace.push((i, mean));
            next_cp.next();
        }
        x = map.apply(&x);
    }
    Ok(LyapunovReport {
        n,
        average: mean,
        hit_critical: None,
        trace,
    })
}
