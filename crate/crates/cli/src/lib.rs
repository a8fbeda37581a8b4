//! `kneadlab`: batch front end over `kneading_core`.
//!
//! Every report is a JSON object whose numbers are strings: `"p/q"` for
//! rationals, decimal for big integers, `0x..p-N` for fixed-point values.

use std::fmt;
use std::path::Path;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kneading_core::bratteli::{self, structured, Levels};
use kneading_core::fixed::Fixed;
use kneading_core::interval::{self, FamilyKind, Projected, SearchOptions, UnimodalMap};
use kneading_core::kneading::{self, Admissibility, Builtin, KneadingMap, ResonantSpec};
use kneading_core::odometer::{self, OdometerPoint, PointKind};
use kneading_core::rational::{l1_distance, rat_to_string, Rational};
use kneading_core::simplex::{self, Certificate, PartitionTree};
use kneading_core::Error;
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

#[derive(Debug, Parser)]
#[command(
    name = "kneadlab",
    version,
    about = "Kneading maps, odometers, Bratteli diagrams and measure simplices"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Resonant spec: a JSON file or a builtin (finite:m, countable, cantor).
    #[arg(long, global = true)]
    pub spec: Option<String>,
    /// Kneading map: a builtin (fibonacci, zero, doubling, ...) or a list `0,0,1,..`.
    #[arg(long, global = true)]
    pub map: Option<String>,
    #[arg(long, global = true)]
    pub depth: Option<u64>,
    #[arg(long, global = true)]
    pub horizon: Option<u64>,
    #[arg(long, global = true)]
    pub level: Option<u64>,
    /// Upper level for products.
    #[arg(long, global = true)]
    pub to: Option<u64>,
    #[arg(long, global = true, default_value_t = kneading_core::fixed::DEFAULT_PRECISION)]
    pub prec: u32,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Odometer word, lowest index first.
    #[arg(long, global = true)]
    pub word: Option<String>,
    /// A non-negative integer (odometer expand).
    #[arg(long, global = true)]
    pub n: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = WordKind::Finite)]
    pub kind: WordKind,
    #[arg(long, global = true, default_value = "logistic")]
    pub family: String,
    /// Family parameter (decimal, fraction or hex float).
    #[arg(long, global = true)]
    pub param: Option<String>,
    /// Starting point for Lyapunov averages; defaults to f(c).
    #[arg(long, global = true)]
    pub x0: Option<String>,
    /// Partition tree JSON file for `simplex realize`.
    #[arg(long, global = true)]
    pub tree: Option<String>,
    /// Accepted for scripting symmetry; output is always JSON unless `--format text`.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WordKind {
    Finite,
    Truncated,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Kneading maps and cutting times.
    #[command(subcommand)]
    Knead(KneadCmd),
    /// The generalized odometer.
    #[command(subcommand)]
    Odometer(OdometerCmd),
    /// The Bratteli diagram of a non-decreasing kneading map.
    #[command(subcommand)]
    Bratteli(BratteliCmd),
    /// Finite-stage simplices of a resonant spec.
    #[command(subcommand)]
    Simplex(SimplexCmd),
    /// Real unimodal maps at fixed precision.
    #[command(subcommand)]
    Interval(IntervalCmd),
}

#[derive(Debug, Subcommand)]
pub enum KneadCmd {
    Times,
    Admissible,
    Product,
    Norma,
}

#[derive(Debug, Subcommand)]
pub enum OdometerCmd {
    Expand,
    Succ,
    Pred,
    Member,
    Classical,
}

#[derive(Debug, Subcommand)]
pub enum BratteliCmd {
    Stage,
    Heights,
    Matrix,
    ProductRank,
}

#[derive(Debug, Subcommand)]
pub enum SimplexCmd {
    Dets,
    Intertwine,
    Threads,
    Realize,
    Certify,
}

#[derive(Debug, Subcommand)]
pub enum IntervalCmd {
    Knead,
    Find,
    Project,
    Lyapunov,
}

/// Why a run stopped: bad input (exit 1) or a domain condition (exit 2).
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Domain(Error),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "{m}"),
            Failure::Domain(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Domain(_) => 2,
        }
    }

    pub fn to_json(&self) -> Value {
        let (kind, message) = match self {
            Failure::Usage(m) => ("usage", m.clone()),
            Failure::Domain(e) => (e.kind(), e.to_string()),
        };
        json!({"error": {"kind": kind, "message": message}})
    }
}

type Outcome = Result<Value, Failure>;

/// Finished run: exit code and the text for standard output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub code: i32,
    pub output: String,
}

pub fn run(cli: &Cli) -> Report {
    let outcome = dispatch(cli);
    let format = cli.global.format;
    match outcome {
        Ok(v) => Report {
            code: 0,
            output: render(&v, format),
        },
        Err(f) => Report {
            code: f.exit_code(),
            output: render(&f.to_json(), format),
        },
    }
}

fn dispatch(cli: &Cli) -> Outcome {
    let g = &cli.global;
    match &cli.command {
        Command::Knead(c) => knead(c, g),
        Command::Odometer(c) => odometer_cmd(c, g),
        Command::Bratteli(c) => bratteli_cmd(c, g),
        Command::Simplex(c) => simplex_cmd(c, g),
        Command::Interval(c) => interval_cmd(c, g),
    }
}

// ---- rendering

pub fn render(v: &Value, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(v).expect("values are serializable") + "\n",
        Format::Text => {
            let mut out = String::new();
            text_lines(v, "", &mut out);
            out
        }
    }
}

fn text_lines(v: &Value, prefix: &str, out: &mut String) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                text_lines(x, &key, out);
            }
        }
        Value::Array(items) if items.iter().all(|x| !x.is_object() && !x.is_array()) => {
            let parts: Vec<String> = items.iter().map(scalar).collect();
            out.push_str(&format!("{prefix}: [{}]\n", parts.join(", ")));
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                text_lines(x, &format!("{prefix}[{i}]"), out);
            }
        }
        other => out.push_str(&format!("{prefix}: {}\n", scalar(other))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn s<T: ToString>(x: T) -> Value {
    Value::String(x.to_string())
}

fn strings<T: ToString>(xs: impl IntoIterator<Item = T>) -> Value {
    Value::Array(xs.into_iter().map(s).collect())
}

fn rat(r: &Rational) -> Value {
    Value::String(rat_to_string(r))
}

fn fixed(x: &Fixed) -> Value {
    json!({"hex": x.to_hex(), "decimal": x.to_decimal(30)})
}

fn float(x: f64) -> Value {
    s(x)
}

// ---- inputs

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn read_file(path: &str) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {path}: {e}")))
}

fn looks_like_path(arg: &str) -> bool {
    arg.contains('/') || arg.contains('\\') || arg.ends_with(".json") || Path::new(arg).exists()
}

fn parse_spec_arg(arg: &str) -> Result<Builtin, Failure> {
    if looks_like_path(arg) {
        let text = read_file(arg)?;
        return ResonantSpec::from_json(&text)
            .map(Builtin::Spec)
            .map_err(|e| usage(e.to_string()));
    }
    kneading::builtin_spec(arg).map_err(|e| usage(e.to_string()))
}

fn parse_map_arg(arg: &str) -> Result<KneadingMap, Failure> {
    if arg.contains(',') || arg.chars().all(|c| c.is_ascii_digit()) {
        let values = arg
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u64>()
                    .map_err(|_| usage(format!("bad table entry {t:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        return KneadingMap::table(values).map_err(|e| usage(e.to_string()));
    }
    Ok(parse_spec_arg(arg)?.into_map())
}

/// The kneading map named by `--map`, or else by `--spec`.
fn kneading_map(g: &Global) -> Result<KneadingMap, Failure> {
    match (&g.map, &g.spec) {
        (Some(m), _) => parse_map_arg(m),
        (None, Some(sp)) => Ok(parse_spec_arg(sp)?.into_map()),
        (None, None) => Err(usage("need --map or --spec")),
    }
}

fn resonant_map(g: &Global) -> Result<KneadingMap, Failure> {
    let q = kneading_map(g)?;
    if q.spec().is_none() {
        return Err(Failure::Domain(Error::Domain(
            "this command needs a resonant spec (--spec)".into(),
        )));
    }
    Ok(q)
}

fn need<T: Copy>(v: Option<T>, flag: &str) -> Result<T, Failure> {
    v.ok_or_else(|| usage(format!("missing --{flag}")))
}

fn to_usize(v: u64, flag: &str) -> Result<usize, Failure> {
    usize::try_from(v).map_err(|_| usage(format!("--{flag} is too large")))
}

fn word_point(g: &Global, q: &KneadingMap) -> Result<OdometerPoint, Failure> {
    let w = g.word.as_deref().ok_or_else(|| usage("missing --word"))?;
    let kind = match g.kind {
        WordKind::Finite => PointKind::Finite,
        WordKind::Truncated => PointKind::Truncated,
    };
    let bits = odometer::parse_word(w).map_err(|e| usage(e.to_string()))?;
    Ok(OdometerPoint::new(bits, kind, q)?)
}

fn point_json(x: &OdometerPoint) -> Value {
    let mut v = json!({"word": x.to_string(), "kind": kind_label(x.kind())});
    if x.kind() == PointKind::Finite {
        if let Ok(n) = x.sigma() {
            v["value"] = s(n);
        }
    }
    v
}

fn kind_label(k: PointKind) -> &'static str {
    match k {
        PointKind::Finite => "finite",
        PointKind::Truncated => "truncated",
    }
}

fn fixed_arg(text: &str, prec: u32, flag: &str) -> Result<Fixed, Failure> {
    Fixed::parse(text, prec).map_err(|e| usage(format!("--{flag}: {e}")))
}

fn check_prec(g: &Global) -> Result<u32, Failure> {
    if g.prec < 53 {
        return Err(usage("--prec must be at least 53"));
    }
    Ok(g.prec)
}

fn unimodal(g: &Global) -> Result<UnimodalMap, Failure> {
    let prec = check_prec(g)?;
    let family = FamilyKind::parse(&g.family).map_err(|e| usage(e.to_string()))?;
    let param = g.param.as_deref().ok_or_else(|| usage("missing --param"))?;
    Ok(family.build(fixed_arg(param, prec, "param")?)?)
}

fn dn_options(g: &Global) -> interval::DnOptions {
    let mut o = interval::DnOptions::default();
    if let Some(h) = g.horizon {
        o.horizon = h;
    }
    o
}

// ---- knead

fn knead(c: &KneadCmd, g: &Global) -> Outcome {
    match c {
        KneadCmd::Times => {
            let q = kneading_map(g)?;
            let k = g.depth.unwrap_or(12);
            let times = kneading::cutting_times(&q, k)?;
            let values = (0..=k).map(|i| q.value(i)).collect::<Result<Vec<_>, _>>()?;
            Ok(json!({"k": s(k), "q": strings(values), "cutting_times": strings(times)}))
        }
        KneadCmd::Admissible => {
            let q = kneading_map(g)?;
            let h = g.horizon.or(g.depth).unwrap_or(64);
            let verdict = kneading::is_admissible(&q, h, g.level)?;
            Ok(admissibility_json(&verdict))
        }
        KneadCmd::Product => {
            let q = resonant_map(g)?;
            let depth = to_usize(g.depth.unwrap_or(4), "depth")?;
            let prods = kneading::divergence_products(q.spec().unwrap(), depth)?;
            Ok(
                json!({"depth": s(depth), "partial_products": Value::Array(prods.iter().map(rat).collect())}),
            )
        }
        KneadCmd::Norma => {
            let q = resonant_map(g)?;
            let spec = q.spec().unwrap();
            let depth = to_usize(g.depth.unwrap_or(3), "depth")?;
            let mut rows = Vec::new();
            for r in 1..=depth {
                rows.push(json!({
                    "r": s(r),
                    "holds": kneading::check_norma(spec, r)?,
                    "product": s(kneading::norma_product(spec, r)?),
                }));
            }
            Ok(json!({"levels": rows}))
        }
    }
}

fn admissibility_json(a: &Admissibility) -> Value {
    match a {
        Admissibility::Admissible { horizon, monotone } => {
            json!({"verdict": a.label(), "horizon": s(horizon), "monotone": monotone})
        }
        Admissibility::Violated { at, reason } => {
            json!({"verdict": a.label(), "at": s(at), "reason": reason})
        }
        Admissibility::Indeterminate { at, window } => {
            json!({"verdict": a.label(), "at": s(at), "window": s(window)})
        }
    }
}

// ---- odometer

fn odometer_cmd(c: &OdometerCmd, g: &Global) -> Outcome {
    let q = kneading_map(g)?;
    match c {
        OdometerCmd::Expand => {
            let text = g.n.as_deref().ok_or_else(|| usage("missing --n"))?;
            let n: BigUint = text
                .parse()
                .map_err(|_| usage(format!("--n: not a non-negative integer: {text:?}")))?;
            Ok(point_json(&odometer::expand(&n, &q)?))
        }
        OdometerCmd::Succ => Ok(point_json(&odometer::successor(&word_point(g, &q)?)?)),
        OdometerCmd::Pred => Ok(point_json(&odometer::predecessor(&word_point(g, &q)?)?)),
        OdometerCmd::Member => {
            let w = g.word.as_deref().ok_or_else(|| usage("missing --word"))?;
            let bits = odometer::parse_word(w).map_err(|e| usage(e.to_string()))?;
            Ok(
                json!({"word": odometer::word_string(&bits), "member": odometer::membership(&bits, &q)?}),
            )
        }
        OdometerCmd::Classical => {
            let limit = g.depth.unwrap_or(10);
            let levels = odometer::classical_levels(&q, limit)?;
            let divisible = odometer::classical_divisibility(&q, &levels)?;
            let mut out = json!({"levels": strings(&levels), "divisibility": divisible});
            if g.word.is_some() {
                let x = word_point(g, &q)?;
                let proj = levels
                    .iter()
                    .map(|k| odometer::classical_projection(&x, *k).map(s))
                    .collect::<Result<Vec<_>, _>>()?;
                out["projections"] = Value::Array(proj);
            }
            Ok(out)
        }
    }
}

// ---- bratteli

fn bratteli_cmd(c: &BratteliCmd, g: &Global) -> Outcome {
    let q = kneading_map(g)?;
    match c {
        BratteliCmd::Stage => {
            let st = bratteli::build_stage(&q, need(g.level, "level")?)?;
            let edges: Vec<Value> = st
                .edges
                .iter()
                .map(|e| json!({"source": s(e.source), "target": s(e.target), "rank": s(e.rank)}))
                .collect();
            Ok(json!({
                "level": s(st.level),
                "prev_vertices": strings(&st.prev_vertices),
                "vertices": strings(&st.vertices),
                "prev_heights": strings(&st.prev_heights),
                "heights": strings(&st.heights),
                "edges": edges,
            }))
        }
        BratteliCmd::Heights => {
            let j = need(g.level, "level")?;
            let runs = bratteli::height_runs(&q, j)?;
            let runs: Vec<Value> = runs
                .iter()
                .map(|(a, b, h)| json!({"from": s(a), "to": s(b), "height": s(h)}))
                .collect();
            Ok(json!({"level": s(j), "runs": runs}))
        }
        BratteliCmd::Matrix => {
            let j = need(g.level, "level")?;
            let (m, n) = bratteli::transition_matrix(&q, j)?;
            let pairs = 100;
            let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
            let mut worst = Rational::from_integer(0.into());
            for _ in 0..pairs {
                let a = random_simplex_point(&mut rng, m.cols());
                let b = random_simplex_point(&mut rng, m.cols());
                let d0 = l1_distance(&a, &b);
                if d0 > Rational::from_integer(0.into()) {
                    let ratio = l1_distance(&m.apply(&a)?, &m.apply(&b)?) / d0;
                    worst = worst.max(ratio);
                }
            }
            Ok(json!({
                "level": s(j),
                "transition": serde_json::to_value(m.to_serial()).expect("serializable"),
                "incidence": serde_json::to_value(n.to_serial()).expect("serializable"),
                "stochastic": m.is_stochastic(),
                "l1_check": {"seed": s(g.seed), "pairs": s(pairs), "max_ratio": rat(&worst)},
            }))
        }
        BratteliCmd::ProductRank => {
            if let (Some(r), true, None) = (g.depth, q.spec().is_some(), g.level) {
                let r = to_usize(r, "depth")?;
                let (prod, rank) = simplex::product_and_rank(&q, r)?;
                return Ok(product_json(&prod, &rank));
            }
            let lo = BigUint::from(need(g.level, "level")?);
            let hi = BigUint::from(need(g.to, "to")?);
            let levels = Levels::new(&q)?;
            let prod = structured::product(&levels, &lo, &hi)?;
            let rank = prod.rank();
            Ok(product_json(&prod, &rank))
        }
    }
}

fn product_json(p: &structured::StructuredProduct, rank: &BigUint) -> Value {
    json!({
        "rows": [s(&p.rows.0), s(&p.rows.1)],
        "cols": [s(&p.cols.0), s(&p.cols.1)],
        "column_classes": s(p.classes.len()),
        "stochastic": p.is_stochastic(),
        "rank": s(rank),
    })
}

fn random_simplex_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    loop {
        let w: Vec<i64> = (0..n).map(|_| rng.gen_range(0..1000)).collect();
        let total: i64 = w.iter().sum();
        if total > 0 {
            return w
                .iter()
                .map(|x| Rational::new((*x).into(), total.into()))
                .collect();
        }
    }
}

// ---- simplex

fn simplex_cmd(c: &SimplexCmd, g: &Global) -> Outcome {
    if let SimplexCmd::Realize = c {
        let path = g.tree.as_deref().ok_or_else(|| usage("missing --tree"))?;
        let tree = PartitionTree::from_json(&read_file(path)?).map_err(|e| usage(e.to_string()))?;
        let depth = to_usize(g.depth.unwrap_or(tree.levels.len() as u64 - 1), "depth")?;
        let real = simplex::realize_space(&tree, depth)?;
        let round_trip = simplex::realization_round_trip(&tree, &real)?;
        let gamma: Vec<Value> = real.gamma.iter().map(strings).collect();
        return Ok(json!({
            "b": strings(&real.b),
            "r_of": strings(&real.r_of),
            "gamma": gamma,
            "round_trip": round_trip,
        }));
    }
    let q = resonant_map(g)?;
    let spec = q.spec().unwrap();
    let depth = to_usize(need(g.depth, "depth")?, "depth")?;
    match c {
        SimplexCmd::Dets => {
            let mut levels = Vec::new();
            for r in 0..=depth {
                let d = simplex::det_a(&q, r)?;
                let mut v = json!({
                    "r": s(r),
                    "size": s(d.size),
                    "det": rat(&d.determinant),
                    "one_minus_alpha": rat(&d.ratio_form),
                    "beta": rat(&d.product_form),
                });
                if let Some(w) = &d.warning {
                    v["warning"] = json!(w);
                }
                levels.push(v);
            }
            let dets: Vec<Value> = levels.iter().map(|v| v["det"].clone()).collect();
            Ok(json!({"dets": dets, "levels": levels}))
        }
        SimplexCmd::Intertwine => {
            let mut rows = Vec::new();
            for r in 0..=depth {
                let rep = simplex::intertwine_check(&q, r)?;
                rows.push(
                    json!({"r": s(r), "holds": rep.holds(), "column_runs": s(rep.lhs.runs.len())}),
                );
            }
            Ok(json!({"levels": rows}))
        }
        SimplexCmd::Threads => {
            let threads = simplex::extreme_threads(spec, depth)?;
            let list: Vec<Value> = threads.iter().map(strings).collect();
            Ok(json!({"depth": s(depth), "count": s(threads.len()), "threads": list}))
        }
        SimplexCmd::Certify => {
            let deep = to_usize(g.horizon.unwrap_or(depth as u64), "horizon")?;
            Ok(match simplex::separation_certificate(&q, depth, deep)? {
                Certificate::Separated {
                    delta,
                    tail,
                    closest,
                } => json!({
                    "verdict": "separated",
                    "delta": rat(&delta),
                    "tail": rat(&tail),
                    "closest": rat(&closest),
                }),
                Certificate::Vacuous => json!({"verdict": "vacuous"}),
                Certificate::Insufficient(why) => json!({"verdict": "insufficient", "reason": why}),
            })
        }
        SimplexCmd::Realize => unreachable!(),
    }
}

// ---- interval

fn interval_cmd(c: &IntervalCmd, g: &Global) -> Outcome {
    match c {
        IntervalCmd::Knead => {
            let map = unimodal(g)?;
            let k = g.depth.unwrap_or(10);
            let ex = interval::kneading_from_map(&map, k, &dn_options(g))?;
            Ok(json!({
                "map": map.describe(),
                "q": strings(&ex.q),
                "cutting_times": strings(&ex.cutting_times),
                "admissibility": admissibility_json(&ex.admissibility),
                "fragile": strings(&ex.fragile),
                "degenerate": ex.degenerate.map(|d| json!({"at": s(d.at), "kind": d.kind})),
                "orbit_length": s(ex.orbit_length),
            }))
        }
        IntervalCmd::Find => {
            let prec = check_prec(g)?;
            let family = FamilyKind::parse(&g.family).map_err(|e| usage(e.to_string()))?;
            let target = match (&g.map, &g.spec) {
                (None, None) => KneadingMap::fibonacci(),
                _ => kneading_map(g)?,
            };
            let k = g.depth.unwrap_or(10);
            let mut opts = SearchOptions::new(prec);
            opts.dn = dn_options(g);
            let fit = interval::find_parameter(family, &target, k, &opts)?;
            Ok(json!({
                "family": family,
                "k": s(k),
                "parameter": fixed(&fit.parameter),
                "bracket": [fixed(&fit.bracket.0), fixed(&fit.bracket.1)],
                "width": fixed(&fit.width()),
                "iterations": s(fit.iterations),
                "orbit_steps": s(fit.orbit_steps),
                "q": strings(&fit.extraction.q),
                "cutting_times": strings(&fit.extraction.cutting_times),
            }))
        }
        IntervalCmd::Project => {
            let map = unimodal(g)?;
            let q = kneading_map(g)?;
            let x = word_point(g, &q)?;
            let depth = to_usize(g.depth.unwrap_or(x.bits().len() as u64), "depth")?;
            let p = interval::project_point(&map, &q, &x, depth, &dn_options(g))?;
            let trace: Vec<Value> = p
                .trace
                .iter()
                .map(|t| json!({"n": s(t.n), "sigma": s(t.sigma), "lo": fixed(&t.lo), "hi": fixed(&t.hi)}))
                .collect();
            let result = match &p.result {
                Projected::Point { sigma, value } => {
                    json!({"point": {"sigma": s(sigma), "value": fixed(value)}})
                }
                Projected::Interval { n, sigma, lo, hi } => {
                    json!({"interval": {"n": s(n), "sigma": s(sigma), "lo": fixed(lo), "hi": fixed(hi)}})
                }
            };
            Ok(json!({"result": result, "trace": trace}))
        }
        IntervalCmd::Lyapunov => {
            let map = unimodal(g)?;
            let x0 = match &g.x0 {
                Some(t) => fixed_arg(t, g.prec, "x0")?,
                None => map.apply(map.critical()),
            };
            let n = g.horizon.unwrap_or(100_000);
            let rep = interval::lyapunov(&map, &x0, n, &interval::decade_checkpoints(n))?;
            let trace: Vec<Value> = rep
                .trace
                .iter()
                .map(|(i, a)| json!({"n": s(i), "average": float(*a)}))
                .collect();
            Ok(json!({
                "map": map.describe(),
                "x0": fixed(&x0),
                "n": s(rep.n),
                "average": float(rep.average),
                "hit_critical": rep.hit_critical.map(s),
                "trace": trace,
            }))
        }
    }
}
