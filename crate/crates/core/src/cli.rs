//! Batch experiment driver: a mini-language for describing test functions,
//! a reproducible generator, and sweep/target runs that emit convergence
//! tables as CSV or JSON.
//!
//! The spec mini-language, one form per kind:
//!
//! ```text
//! indicator:center=1/2,level=-1
//! character_lift:a=1,k=2,rep=1/2       (rep optional)
//! random:level=4,window=1,seed=42      (seed optional)
//! sum(<spec>; <spec>; ...)             (nesting allowed, sum() is the zero function)
//! ```
//!
//! Centers and coset representatives are rationals `a` or `a/b` with `b` a
//! power of the run's prime. Random values are drawn by the documented
//! [`SplitMix64`] generator so fixtures reproduce across languages.

use std::fmt;
use std::io::Write as _;
use std::path::PathBuf;

use num_complex::Complex64;
use serde::Serialize;

use crate::approx::{approximate, approximate_at_level, ApproxReport};
use crate::character::Character;
use crate::error::{Error, Result};
use crate::padic::{Ball, PAdicApprox, Prime};
use crate::step::StepFunction;

/// splitmix64 (Vigna's public-domain mixer). Chosen over a platform RNG so
/// random fixtures can be regenerated byte-identically from any language:
/// state advances by the golden-ratio increment 0x9E3779B97F4A7C15 and each
/// output is finalized with the xor-shift/multiply constants
/// 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> SplitMix64 {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [-1, 1): the top 53 bits scaled to width 2.
    pub fn next_unit(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64) * (2.0 / (1u64 << 53) as f64) - 1.0
    }
}

/// A test function description. Parses from and prints to the
/// mini-language; printing is canonical (single spaces after sum
/// separators, fields in declaration order).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FunctionSpec {
    /// Indicator of the ball center + p^level Z_p.
    Indicator { center: String, level: i32 },
    /// Lift of the character a/p^k, optionally translated to rep + Z_p.
    CharacterLift { a: u64, k: u32, rep: Option<String> },
    /// Independent uniform values on every level-`level` ball inside
    /// p^(-window) Z_p, drawn from SplitMix64.
    Random {
        level: i32,
        window: u32,
        seed: Option<u64>,
    },
    /// Pointwise sum of sub-specs; empty means the zero function.
    Sum(Vec<FunctionSpec>),
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSpec::Indicator { center, level } => {
                write!(out, "indicator:center={center},level={level}")
            }
            FunctionSpec::CharacterLift { a, k, rep } => {
                write!(out, "character_lift:a={a},k={k}")?;
                if let Some(rep) = rep {
                    write!(out, ",rep={rep}")?;
                }
                Ok(())
            }
            FunctionSpec::Random {
                level,
                window,
                seed,
            } => {
                write!(out, "random:level={level},window={window}")?;
                if let Some(seed) = seed {
                    write!(out, ",seed={seed}")?;
                }
                Ok(())
            }
            FunctionSpec::Sum(parts) => {
                write!(out, "sum(")?;
                for (i, part) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(out, "; ")?;
                    }
                    write!(out, "{part}")?;
                }
                write!(out, ")")
            }
        }
    }
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        while self.rest().starts_with(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn eat(&mut self, ch: char) -> Result<()> {
        if self.peek() == Some(ch) {
            self.pos += ch.len_utf8();
            Ok(())
        } else {
            Err(Error::parse(
                self.pos,
                format!("expected '{ch}', found {}", describe(self.peek())),
            ))
        }
    }

    /// Longest run of identifier characters (kind and key names).
    fn ident(&mut self) -> Result<(usize, &'a str)> {
        let start = self.pos;
        let end = self
            .rest()
            .find(|c: char| !c.is_ascii_alphanumeric() && c != '_')
            .map(|o| start + o)
            .unwrap_or(self.text.len());
        if end == start {
            return Err(Error::parse(
                start,
                format!("expected a name, found {}", describe(self.peek())),
            ));
        }
        self.pos = end;
        Ok((start, &self.text[start..end]))
    }

    /// Value text: everything up to the next , ; ) whitespace or end.
    fn value(&mut self) -> Result<(usize, &'a str)> {
        let start = self.pos;
        let end = self
            .rest()
            .find(|c: char| matches!(c, ',' | ';' | ')') || c.is_whitespace())
            .map(|o| start + o)
            .unwrap_or(self.text.len());
        let raw = &self.text[start..end];
        if raw.is_empty() {
            return Err(Error::parse(start, "expected a value"));
        }
        self.pos = end;
        Ok((start, raw))
    }
}

fn describe(ch: Option<char>) -> String {
    match ch {
        Some(c) => format!("'{c}'"),
        None => "end of input".into(),
    }
}

struct Field<'a> {
    pos: usize,
    key: &'a str,
    value_pos: usize,
    value: &'a str,
}

fn parse_fields<'a>(cur: &mut Cursor<'a>) -> Result<Vec<Field<'a>>> {
    let mut fields: Vec<Field<'a>> = Vec::new();
    loop {
        cur.skip_ws();
        let (pos, key) = cur.ident()?;
        if fields.iter().any(|f| f.key == key) {
            return Err(Error::parse(pos, format!("duplicate key '{key}'")));
        }
        cur.eat('=')?;
        cur.skip_ws();
        let (value_pos, value) = cur.value()?;
        fields.push(Field {
            pos,
            key,
            value_pos,
            value,
        });
        cur.skip_ws();
        if cur.peek() == Some(',') {
            cur.eat(',')?;
        } else {
            return Ok(fields);
        }
    }
}

struct FieldSet<'a> {
    kind_pos: usize,
    kind: &'a str,
    fields: Vec<Field<'a>>,
}

impl<'a> FieldSet<'a> {
    fn take(&mut self, key: &str) -> Option<Field<'a>> {
        self.fields
            .iter()
            .position(|f| f.key == key)
            .map(|i| self.fields.remove(i))
    }
}

fn missing(set: &FieldSet<'_>, key: &str) -> Error {
    Error::parse(
        set.kind_pos,
        format!("kind '{}' is missing required key '{key}'", set.kind),
    )
}

fn parse_int<T: std::str::FromStr>(field: &Field<'_>, what: &str) -> Result<T> {
    field.value.parse().map_err(|_| {
        Error::parse(
            field.value_pos,
            format!(
                "expected {what} for key '{}', found '{}'",
                field.key, field.value
            ),
        )
    })
}

/// Syntax check for center/rep values; the prime-specific denominator
/// check happens at generation time when the prime is known.
fn check_rational(field: &Field<'_>) -> Result<String> {
    let text = field.value;
    let body = text.strip_prefix('-').unwrap_or(text);
    let (numer, denom) = match body.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (body, None),
    };
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    if digits(numer) && denom.is_none_or(digits) {
        Ok(text.to_string())
    } else {
        Err(Error::parse(
            field.value_pos,
            format!(
                "expected a rational 'a' or 'a/b' for key '{}', found '{text}'",
                field.key
            ),
        ))
    }
}

fn parse_one(cur: &mut Cursor<'_>) -> Result<FunctionSpec> {
    cur.skip_ws();
    let (kind_pos, kind) = cur.ident()?;
    if kind == "sum" {
        cur.eat('(')?;
        let mut parts = Vec::new();
        cur.skip_ws();
        if cur.peek() == Some(')') {
            cur.eat(')')?;
            return Ok(FunctionSpec::Sum(parts));
        }
        loop {
            parts.push(parse_one(cur)?);
            cur.skip_ws();
            match cur.peek() {
                Some(';') => cur.eat(';')?,
                Some(')') => {
                    cur.eat(')')?;
                    return Ok(FunctionSpec::Sum(parts));
                }
                other => {
                    return Err(Error::parse(
                        cur.pos,
                        format!("expected ';' or ')' in sum, found {}", describe(other)),
                    ))
                }
            }
        }
    }
    let allowed: &[&str] = match kind {
        "indicator" => &["center", "level"],
        "character_lift" => &["a", "k", "rep"],
        "random" => &["level", "window", "seed"],
        other => {
            return Err(Error::parse(
                kind_pos,
                format!(
                    "unknown kind '{other}' (expected indicator, character_lift, random, or sum)"
                ),
            ))
        }
    };
    cur.eat(':')?;
    let mut set = FieldSet {
        kind_pos,
        kind,
        fields: parse_fields(cur)?,
    };
    if let Some(f) = set.fields.iter().find(|f| !allowed.contains(&f.key)) {
        return Err(Error::parse(
            f.pos,
            format!("unknown key '{}' for kind '{kind}'", f.key),
        ));
    }
    let spec = match kind {
        "indicator" => {
            let center_field = set.take("center").ok_or_else(|| missing(&set, "center"))?;
            let level_field = set.take("level").ok_or_else(|| missing(&set, "level"))?;
            FunctionSpec::Indicator {
                center: check_rational(&center_field)?,
                level: parse_int(&level_field, "an integer")?,
            }
        }
        "character_lift" => {
            let a_field = set.take("a").ok_or_else(|| missing(&set, "a"))?;
            let k_field = set.take("k").ok_or_else(|| missing(&set, "k"))?;
            let rep = set.take("rep").map(|f| check_rational(&f)).transpose()?;
            FunctionSpec::CharacterLift {
                a: parse_int(&a_field, "a nonnegative integer")?,
                k: parse_int(&k_field, "a nonnegative integer")?,
                rep,
            }
        }
        "random" => {
            let level_field = set.take("level").ok_or_else(|| missing(&set, "level"))?;
            let window_field = set.take("window").ok_or_else(|| missing(&set, "window"))?;
            let seed = set
                .take("seed")
                .map(|f| parse_int(&f, "a nonnegative integer"))
                .transpose()?;
            let level: i32 = parse_int(&level_field, "an integer")?;
            let window: u32 = parse_int(&window_field, "a nonnegative integer")?;
            if (level as i64) < -(window as i64) {
                return Err(Error::parse(
                    level_field.value_pos,
                    format!("level {level} is coarser than the window ball at level -{window}"),
                ));
            }
            FunctionSpec::Random {
                level,
                window,
                seed,
            }
        }
        _ => unreachable!("kind was validated against the allowed list"),
    };
    Ok(spec)
}

/// Parses one spec from the mini-language. Errors carry the byte offset
/// of the offending token.
pub fn parse_spec(text: &str) -> Result<FunctionSpec> {
    let mut cur = Cursor { text, pos: 0 };
    let spec = parse_one(&mut cur)?;
    cur.skip_ws();
    if cur.pos != text.len() {
        return Err(Error::parse(
            cur.pos,
            format!("trailing input starting at {}", describe(cur.peek())),
        ));
    }
    Ok(spec)
}

/// Realizes a spec over a prime with the default seed 0 for random specs
/// that carry none.
pub fn generate(spec: &FunctionSpec, prime: Prime) -> Result<StepFunction> {
    generate_seeded(spec, prime, 0)
}

/// Realizes a spec over a prime. `default_seed` feeds random specs
/// without an explicit seed; an in-spec seed always wins. Random values
/// are drawn in ascending ball-center order, real part before imaginary.
pub fn generate_seeded(
    spec: &FunctionSpec,
    prime: Prime,
    default_seed: u64,
) -> Result<StepFunction> {
    match spec {
        FunctionSpec::Indicator { center, level } => {
            let center = PAdicApprox::parse_rational(center, prime, *level)?;
            Ok(StepFunction::indicator(&Ball::new(*level, &center)?))
        }
        FunctionSpec::CharacterLift { a, k, rep } => {
            let chi = Character::new(prime, *k, *a)?;
            let base = chi.to_step(*k as i32)?;
            match rep {
                None => Ok(base),
                Some(rep) => {
                    let g = PAdicApprox::parse_rational(rep, prime, 0)?;
                    base.shift(&g.zero_extend(base.level()).negate())
                }
            }
        }
        FunctionSpec::Random {
            level,
            window,
            seed,
        } => {
            let mut rng = SplitMix64::new(seed.unwrap_or(default_seed));
            let support = Ball::zero_centered(prime, -(*window as i32));
            let mut pieces = Vec::new();
            for ball in support.split(*level)? {
                let re = rng.next_unit();
                let im = rng.next_unit();
                pieces.push((ball.center().clone(), Complex64::new(re, im)));
            }
            StepFunction::new(prime, *level, pieces)
        }
        FunctionSpec::Sum(parts) => {
            let mut total = StepFunction::zero(prime, 0);
            for part in parts {
                total = total.add(&generate_seeded(part, prime, default_seed)?)?;
            }
            Ok(total)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Which experiment to run over the generated function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mode {
    /// One row per truncation level k = 0..=k_max.
    SweepLevels { k_max: i32 },
    /// One row per target N, each with the bound t/N.
    TargetN { n_list: Vec<u64> },
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub prime: Prime,
    pub spec: FunctionSpec,
    pub mode: Mode,
    /// Output file; stdout when absent.
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    /// Default seed for random specs without one.
    pub seed: u64,
    /// Report wall-clock times. Off by default so that re-running a
    /// config reproduces the output byte-for-byte.
    pub timings: bool,
}

/// One output row: the sweep/target parameter plus the full report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub p: u32,
    pub spec: String,
    pub mode_param: u64,
    pub report: ApproxReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Passed,
    BoundViolation,
}

/// Computes all rows, then runs the bound checks over them.
pub fn execute(config: &ExperimentConfig) -> Result<(Vec<Row>, Vec<String>)> {
    let f = generate_seeded(&config.spec, config.prime, config.seed)?;
    let spec_text = config.spec.to_string();
    let mut rows = Vec::new();
    match &config.mode {
        Mode::SweepLevels { k_max } => {
            if *k_max < 0 {
                return Err(Error::Negative {
                    name: "k_max",
                    value: *k_max as i64,
                });
            }
            for k in 0..=*k_max {
                let (_, report) = approximate_at_level(&f, k)?;
                rows.push(Row {
                    p: config.prime.value(),
                    spec: spec_text.clone(),
                    mode_param: k as u64,
                    report,
                });
            }
        }
        Mode::TargetN { n_list } => {
            if n_list.is_empty() {
                return Err(Error::Invalid("target mode needs at least one N".into()));
            }
            let mut targets = n_list.clone();
            targets.sort_unstable();
            targets.dedup();
            for n in targets {
                let (_, report) = approximate(&f, n)?;
                rows.push(Row {
                    p: config.prime.value(),
                    spec: spec_text.clone(),
                    mode_param: n,
                    report,
                });
            }
        }
    }
    if !config.timings {
        for row in &mut rows {
            row.report.runtime_ms = 0.0;
        }
    }
    let violations = check_violations(&rows, &config.mode);
    Ok((rows, violations))
}

/// Bound checks over finished rows: every target row must satisfy its t/N
/// bound, and sweep errors must be non-increasing in k within 1e-12. The
/// selection loop meets any positive target by construction (truncating at
/// the piece's own level reproduces it exactly), so a nonempty result
/// signals a numeric regression rather than an expected outcome.
pub fn check_violations(rows: &[Row], mode: &Mode) -> Vec<String> {
    let mut violations = Vec::new();
    match mode {
        Mode::SweepLevels { .. } => {
            for pair in rows.windows(2) {
                let (lo, hi) = (&pair[0], &pair[1]);
                if hi.report.total_error > lo.report.total_error + 1e-12 {
                    violations.push(format!(
                        "sweep error grew from {} at k={} to {} at k={}",
                        lo.report.total_error, lo.mode_param, hi.report.total_error, hi.mode_param,
                    ));
                }
            }
        }
        Mode::TargetN { .. } => {
            for row in rows {
                if !row.report.bound_satisfied() {
                    violations.push(format!(
                        "total error {} missed the bound {} at N={}",
                        row.report.total_error,
                        row.report.bound.unwrap_or(f64::NAN),
                        row.mode_param,
                    ));
                }
            }
        }
    }
    violations
}

fn csv_field(text: &str) -> String {
    if text.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

pub const CSV_HEADER: &str = "p,spec,mode_param,t,l2_error,bound,sup_error,runtime_ms";

/// Renders rows in the requested format. CSV flattens each report onto
/// the fixed columns (a row without a bound leaves the cell empty); JSON
/// keeps the full report per row.
pub fn render(rows: &[Row], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => {
            let mut out = String::from(CSV_HEADER);
            out.push('\n');
            for row in rows {
                let bound = row.report.bound.map(|b| b.to_string()).unwrap_or_default();
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    row.p,
                    csv_field(&row.spec),
                    row.mode_param,
                    row.report.t,
                    row.report.total_error,
                    bound,
                    row.report.sup_error,
                    row.report.runtime_ms,
                ));
            }
            out
        }
        OutputFormat::Json => {
            let mut out =
                serde_json::to_string_pretty(rows).expect("row serialization cannot fail");
            out.push('\n');
            out
        }
    }
}

/// Runs a config end to end: generate, measure, render, write. Bound
/// violations are summarized on stderr and reported in the status; config
/// problems and I/O failures surface as errors.
pub fn run(config: &ExperimentConfig) -> Result<RunStatus> {
    let (rows, violations) = execute(config)?;
    let rendered = render(&rows, config.format);
    match &config.out {
        Some(path) => std::fs::write(path, rendered)?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(rendered.as_bytes())?;
            lock.flush()?;
        }
    }
    if violations.is_empty() {
        Ok(RunStatus::Passed)
    } else {
        for v in &violations {
            eprintln!("bound check failed: {v}");
        }
        Ok(RunStatus::BoundViolation)
    }
}

/// Process exit code for a finished run: 0 success, 1 bound violation,
/// 2 config error, 3 I/O error.
pub fn exit_code(result: &Result<RunStatus>) -> i32 {
    match result {
        Ok(RunStatus::Passed) => 0,
        Ok(RunStatus::BoundViolation) => 1,
        Err(Error::Io(_)) => 3,
        Err(_) => 2,
    }
}
