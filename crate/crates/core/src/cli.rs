//! Command implementations behind the `demi` binary: single evaluations,
//! the tables, and replay of the constants corpus.
//!
//! Arguments and corpus names share one grammar: a decimal literal, `e`,
//! `e-1`, `e^<decimal>`, or `<function>(<argument>)`, e.g. `A-prime(xi(1))`.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::abel::{Abel, AbelSeriesConfig};
use crate::conj;
use crate::error::{Error, Result};
use crate::halfexp::{HalfExp, SpecialCell};
use crate::numerics::{BigReal, PrecisionContext};
use crate::quad;

/// The corpus shipped with the crate.
pub const BUILTIN_CORPUS: &str = include_str!("../data/constants.tsv");

pub const EVAL_DIGITS: std::ops::RangeInclusive<u32> = 10..=200;
pub const TABLE_DIGITS: std::ops::RangeInclusive<u32> = 10..=120;
pub const VERIFY_DIGITS: std::ops::RangeInclusive<u32> = 10..=200;

/// Environment variable overriding the exponent ceiling.
pub const MAX_EXPONENT_VAR: &str = "DEMI_MAX_EXPONENT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Function {
    Psi,
    LnHalf,
    Xi,
    XiPrime,
    F,
    FPrime,
    FDeriv2,
    FDeriv4,
    P,
    Q,
    H,
    HPrime,
    HInverse,
    GhPrime,
    AbelShift,
    HPsi,
    A,
    AInverse,
    APrime,
    C,
}

impl Function {
    pub const ALL: [Function; 20] = [
        Function::Psi,
        Function::LnHalf,
        Function::Xi,
        Function::XiPrime,
        Function::F,
        Function::FPrime,
        Function::FDeriv2,
        Function::FDeriv4,
        Function::P,
        Function::Q,
        Function::H,
        Function::HPrime,
        Function::HInverse,
        Function::GhPrime,
        Function::AbelShift,
        Function::HPsi,
        Function::A,
        Function::AInverse,
        Function::APrime,
        Function::C,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Function::Psi => "psi",
            Function::LnHalf => "ln-half",
            Function::Xi => "xi",
            Function::XiPrime => "xi-prime",
            Function::F => "f",
            Function::FPrime => "f-prime",
            Function::FDeriv2 => "f-deriv2",
            Function::FDeriv4 => "f-deriv4",
            Function::P => "p",
            Function::Q => "q",
            Function::H => "h",
            Function::HPrime => "h-prime",
            Function::HInverse => "h-inverse",
            Function::GhPrime => "gh-prime",
            Function::AbelShift => "abel-shift",
            Function::HPsi => "h-psi",
            Function::A => "A",
            Function::AInverse => "A-inverse",
            Function::APrime => "A-prime",
            Function::C => "C",
        }
    }

    /// Whether the value depends on the Abel series configuration.
    pub fn uses_abel(self) -> bool {
        matches!(
            self,
            Function::Psi
                | Function::LnHalf
                | Function::Xi
                | Function::XiPrime
                | Function::GhPrime
                | Function::AbelShift
                | Function::HPsi
                | Function::A
                | Function::AInverse
                | Function::APrime
                | Function::C
        )
    }
}

impl fmt::Display for Function {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Function {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Function::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown function '{s}'")))
    }
}

/// A parsed argument or corpus name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Quantity {
    Decimal(String),
    E,
    EMinusOne,
    /// `e^<decimal>`.
    EPow(String),
    Call(Function, Box<Quantity>),
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "e" => return Ok(Quantity::E),
            "e-1" => return Ok(Quantity::EMinusOne),
            _ => {}
        }
        if let Some(exp) = s.strip_prefix("e^") {
            BigReal::parse(exp, 64)?;
            return Ok(Quantity::EPow(exp.to_string()));
        }
        if let (Some(open), true) = (s.find('('), s.ends_with(')')) {
            let func: Function = s[..open].parse()?;
            let inner: Quantity = s[open + 1..s.len() - 1].parse()?;
            return Ok(Quantity::Call(func, Box::new(inner)));
        }
        BigReal::parse(s, 64).map_err(|_| Error::Parse(format!("cannot read '{s}' as a number")))?;
        Ok(Quantity::Decimal(s.to_string()))
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::Decimal(s) => f.write_str(s),
            Quantity::E => f.write_str("e"),
            Quantity::EMinusOne => f.write_str("e-1"),
            Quantity::EPow(s) => write!(f, "e^{s}"),
            Quantity::Call(func, arg) => write!(f, "{func}({arg})"),
        }
    }
}

/// Evaluates functions at one precision with one shared Abel function.
#[derive(Debug)]
pub struct Evaluator {
    half: HalfExp,
}

impl Evaluator {
    pub fn new(ctx: PrecisionContext) -> Result<Self> {
        Ok(Evaluator {
            half: HalfExp::new(ctx)?,
        })
    }

    pub fn with_config(config: AbelSeriesConfig) -> Self {
        Evaluator {
            half: HalfExp::with_abel(Abel::with_config(config)),
        }
    }

    pub fn ctx(&self) -> &PrecisionContext {
        self.half.ctx()
    }

    pub fn abel_config(&self) -> &AbelSeriesConfig {
        self.half.abel().config()
    }

    pub fn half_exp(&self) -> &HalfExp {
        &self.half
    }

    pub fn value(&self, q: &Quantity) -> Result<BigReal> {
        let ctx = self.ctx();
        match q {
            Quantity::Decimal(s) => ctx.parse(s),
            Quantity::E => Ok(ctx.e()),
            Quantity::EMinusOne => Ok(ctx.one().exp_m1()),
            Quantity::EPow(s) => Ok(ctx.parse(s)?.exp()),
            Quantity::Call(func, arg) => self.apply(*func, &self.value(arg)?),
        }
    }

    pub fn apply(&self, func: Function, x: &BigReal) -> Result<BigReal> {
        let ctx = self.ctx();
        let abel = self.half.abel();
        match func {
            Function::Psi => self.half.psi(x),
            Function::LnHalf => self.half.ln_half(x),
            Function::Xi => self.half.xi(x),
            Function::XiPrime => self.half.xi_prime(x),
            Function::F => quad::f_limit(x, ctx),
            Function::FPrime => quad::f_prime(x, ctx),
            Function::FDeriv2 | Function::FDeriv4 => {
                if !x.is_zero() {
                    return Err(Error::Domain(format!("{func} is only available at 0")));
                }
                quad::f_deriv_origin(if func == Function::FDeriv2 { 2 } else { 4 }, ctx)
            }
            Function::P => Ok(quad::pq_limits(x, ctx)?.p),
            Function::Q => Ok(quad::pq_limits(x, ctx)?.q),
            Function::H => conj::h(x, ctx),
            Function::HPrime => conj::h_prime(x, ctx),
            Function::HInverse => conj::h_inverse(x, ctx),
            Function::GhPrime => self.half.gh_prime(x),
            Function::AbelShift => self.half.abel_shift(x),
            Function::HPsi => self.half.h_psi(x),
            Function::A => abel.a(x),
            Function::AInverse => abel.a_inverse(x),
            Function::APrime => abel.a_prime(x),
            // C(x) = C(1) - A(x)
            Function::C => Ok(abel.c_one()? - abel.a(x)?),
        }
    }
}

/// Precision context for `digits`, honouring an exponent-ceiling override.
pub fn context(digits: u32, max_exponent: Option<&str>) -> Result<PrecisionContext> {
    let ctx = PrecisionContext::new(digits)?;
    match max_exponent {
        None => Ok(ctx),
        Some(raw) => {
            let e: i64 = raw
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("{MAX_EXPONENT_VAR} must be an integer, got '{raw}'")))?;
            ctx.with_max_exponent(e)
        }
    }
}

pub fn check_digits(digits: u32, range: &std::ops::RangeInclusive<u32>) -> Result<()> {
    if range.contains(&digits) {
        Ok(())
    } else {
        Err(Error::Parse(format!(
            "--digits must lie in {}..={}, got {digits}",
            range.start(),
            range.end()
        )))
    }
}

/// Process exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse(_) | Error::InvalidConfig(_) => 2,
        Error::Domain(_) | Error::Overflow(_) | Error::OutOfRange { .. } => 3,
        Error::NoConvergence(_) | Error::NoSignChange { .. } | Error::Depth(_) | Error::NegativeRadicand(_) => 4,
        Error::Corpus(_) => 5,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(Error::Parse(format!("unknown format '{s}' (text, json, csv)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConfigEcho {
    pub k: usize,
    #[serde(rename = "N")]
    pub n: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputRecord {
    pub function: String,
    pub input: String,
    pub value: String,
    pub digits: u32,
    pub config: ConfigEcho,
    pub ms: u64,
}

impl OutputRecord {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => format!("{}\n", self.value),
            Format::Json => format!("{}\n", serde_json::to_string(self).expect("record serializes")),
            Format::Csv => format!(
                "function,input,value,digits,k,N\n{},{},{},{},{},{}\n",
                csv_field(&self.function),
                csv_field(&self.input),
                self.value,
                self.digits,
                self.config.k,
                self.config.n
            ),
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Options for `eval`.
#[derive(Debug, Clone, Default)]
pub struct EvalOptions {
    pub digits: u32,
    pub k: Option<usize>,
    pub n: Option<u64>,
    pub max_exponent: Option<String>,
}

fn abel_config(ctx: PrecisionContext, k: Option<usize>, n: Option<u64>) -> Result<AbelSeriesConfig> {
    match (k, n) {
        (None, None) => AbelSeriesConfig::new(ctx),
        (k, n) => {
            let k = k.unwrap_or_else(|| AbelSeriesConfig::default_k(&ctx));
            let n = n.unwrap_or_else(|| AbelSeriesConfig::adaptive_n(k, &ctx));
            AbelSeriesConfig::with_params(k, n, ctx)
        }
    }
}

pub fn cmd_eval(function: &str, x: &str, opts: &EvalOptions) -> Result<OutputRecord> {
    check_digits(opts.digits, &EVAL_DIGITS)?;
    let func: Function = function.parse()?;
    let arg: Quantity = x.parse()?;
    let ctx = context(opts.digits, opts.max_exponent.as_deref())?;
    let config = abel_config(ctx, opts.k, opts.n)?;
    let start = Instant::now();
    let ev = Evaluator::with_config(config);
    let value = ev.apply(func, &ev.value(&arg)?)?;
    Ok(OutputRecord {
        function: func.name().to_string(),
        input: x.to_string(),
        value: value.to_decimal(opts.digits as usize),
        digits: opts.digits,
        config: ConfigEcho {
            k: config.k(),
            n: config.n(),
        },
        ms: start.elapsed().as_millis() as u64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Table {
    PsiPositive,
    PsiNegative,
    Special,
    LnHalf,
}

impl FromStr for Table {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "psi-positive" => Ok(Table::PsiPositive),
            "psi-negative" => Ok(Table::PsiNegative),
            "special" => Ok(Table::Special),
            "ln-half" => Ok(Table::LnHalf),
            _ => Err(Error::Parse(format!(
                "unknown table '{s}' (psi-positive, psi-negative, special, ln-half)"
            ))),
        }
    }
}

/// One table row: the argument label followed by the value columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableRow {
    pub x: String,
    pub values: Vec<String>,
}

fn render_cell(cell: &SpecialCell, digits: usize) -> String {
    match cell {
        SpecialCell::Value(v) => v.to_decimal(digits),
        SpecialCell::NegInfinity => "-inf".to_string(),
        SpecialCell::Undefined => ".".to_string(),
    }
}

pub fn cmd_table(which: &str, digits: u32, max_exponent: Option<&str>) -> Result<Vec<TableRow>> {
    check_digits(digits, &TABLE_DIGITS)?;
    let table: Table = which.parse()?;
    let ctx = context(digits, max_exponent)?;
    let ev = Evaluator::new(ctx)?;
    let d = digits as usize;
    let column = |func: Function, xs: &[i32]| -> Result<Vec<TableRow>> {
        xs.par_iter()
            .map(|&x| {
                let v = ev.apply(func, &ctx.real(x))?;
                Ok(TableRow {
                    x: x.to_string(),
                    values: vec![v.to_decimal(d)],
                })
            })
            .collect()
    };
    match table {
        Table::PsiPositive => column(Function::Psi, &[3, 4, 5, 6, 7, 8, 9, 10]),
        Table::PsiNegative => column(Function::Psi, &[-3, -4, -5, -6, -7, -8, -9, -10]),
        Table::LnHalf => column(Function::LnHalf, &[2, 3]),
        Table::Special => Ok(ev
            .half_exp()
            .special_values()?
            .iter()
            .map(|row| TableRow {
                x: row.label.to_string(),
                values: vec![
                    render_cell(&row.x, d),
                    render_cell(&row.exp_half, d),
                    render_cell(&row.ln_half, d),
                ],
            })
            .collect()),
    }
}

pub fn render_table(rows: &[TableRow], format: Format) -> String {
    match format {
        Format::Json => format!("{}\n", serde_json::to_string(rows).expect("rows serialize")),
        Format::Text | Format::Csv => {
            let sep = if format == Format::Csv { "," } else { "\t" };
            rows.iter()
                .map(|r| {
                    let mut line = csv_field(&r.x);
                    for v in &r.values {
                        line.push_str(sep);
                        line.push_str(v);
                    }
                    line.push('\n');
                    line
                })
                .collect()
        }
    }
}

/// One line of the constants corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstantRecord {
    pub name: String,
    pub quantity: Quantity,
    pub section: String,
    pub min_match_digits: u32,
    pub digits: String,
}

/// Parse a corpus: tab-separated `name section min_match_digits digits`,
/// `#` comments and blank lines ignored.
pub fn parse_corpus(text: &str) -> Result<Vec<ConstantRecord>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split('\t').map(str::trim).collect();
        let [name, section, min_match, digits] = fields[..] else {
            return Err(Error::Corpus(format!("line {line_no}: expected 4 tab-separated fields")));
        };
        let quantity: Quantity = name
            .parse()
            .map_err(|e: Error| Error::Corpus(format!("line {line_no}: bad name '{name}': {e}")))?;
        let min_match_digits: u32 = min_match
            .parse()
            .map_err(|_| Error::Corpus(format!("line {line_no}: bad min_match_digits '{min_match}'")))?;
        BigReal::parse(digits, 64).map_err(|_| Error::Corpus(format!("line {line_no}: bad digits '{digits}'")))?;
        let significant = significant_digits(digits);
        if min_match_digits as usize > significant {
            return Err(Error::Corpus(format!(
                "line {line_no}: min_match_digits {min_match_digits} exceeds the {significant} digits given"
            )));
        }
        out.push(ConstantRecord {
            name: name.to_string(),
            quantity,
            section: section.to_string(),
            min_match_digits,
            digits: digits.to_string(),
        });
    }
    Ok(out)
}

fn significant_digits(s: &str) -> usize {
    let mantissa = s.split(['e', 'E']).next().unwrap_or("");
    mantissa
        .chars()
        .filter(char::is_ascii_digit)
        .skip_while(|&c| c == '0')
        .count()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyRecord {
    pub name: String,
    pub section: String,
    pub min_match_digits: u32,
    /// Digits required at this precision: `min(min_match_digits, digits)`.
    pub threshold: u32,
    /// `None` when the computation failed.
    pub matched_digits: Option<i64>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub digits: u32,
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub records: Vec<VerifyRecord>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

/// Options for `verify`.
#[derive(Debug, Clone, Default)]
pub struct VerifyOptions {
    pub digits: u32,
    /// Glob matched against record names and sections.
    pub only: Option<String>,
    /// Corpus text; the built-in corpus when absent.
    pub corpus: Option<String>,
    pub max_exponent: Option<String>,
}

pub fn cmd_verify(opts: &VerifyOptions) -> Result<VerifyReport> {
    check_digits(opts.digits, &VERIFY_DIGITS)?;
    let records = parse_corpus(opts.corpus.as_deref().unwrap_or(BUILTIN_CORPUS))?;
    let pattern = opts
        .only
        .as_deref()
        .map(glob::Pattern::new)
        .transpose()
        .map_err(|e| Error::Parse(format!("bad --only pattern: {e}")))?;
    let selected: Vec<&ConstantRecord> = records
        .iter()
        .filter(|r| pattern.as_ref().is_none_or(|p| p.matches(&r.name) || p.matches(&r.section)))
        .collect();

    let ctx = context(opts.digits, opts.max_exponent.as_deref())?;
    let ev = Evaluator::new(ctx)?;
    // C(1) is shared by almost every Abel-side record
    if selected.iter().any(|r| quantity_uses_abel(&r.quantity)) {
        ev.half_exp().abel().c_one()?;
    }
    let results: Vec<VerifyRecord> = selected.par_iter().map(|r| verify_one(&ev, r, opts.digits)).collect();
    let passed = results.iter().filter(|r| r.pass).count();
    Ok(VerifyReport {
        digits: opts.digits,
        total: results.len(),
        passed,
        failed: results.len() - passed,
        records: results,
    })
}

fn quantity_uses_abel(q: &Quantity) -> bool {
    match q {
        Quantity::Call(f, arg) => f.uses_abel() || quantity_uses_abel(arg),
        _ => false,
    }
}

fn verify_one(ev: &Evaluator, record: &ConstantRecord, digits: u32) -> VerifyRecord {
    let start = Instant::now();
    let threshold = record.min_match_digits.min(digits);
    let outcome = ev.value(&record.quantity).and_then(|v| {
        let reference = ev.ctx().parse(&record.digits)?;
        Ok(v.agreement_digits(&reference).unwrap_or(i64::from(ev.ctx().working_digits())))
    });
    let ms = start.elapsed().as_millis() as u64;
    let (matched_digits, error) = match outcome {
        Ok(m) => (Some(m), None),
        Err(e) => (None, Some(format!("{}: {}", e.name(), e.detail()))),
    };
    VerifyRecord {
        name: record.name.clone(),
        section: record.section.clone(),
        min_match_digits: record.min_match_digits,
        threshold,
        pass: matched_digits.is_some_and(|m| m >= i64::from(threshold)),
        matched_digits,
        error,
        ms,
    }
}
