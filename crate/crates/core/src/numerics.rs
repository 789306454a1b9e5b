//! Precision contexts, the `BigReal` scalar, decimal I/O, a bracketed root
//! finder for monotone functions and central finite differences.
//!
//! Every public operation in the crate takes an explicit [`PrecisionContext`];
//! there is no ambient precision. `BigReal` wraps an MPFR float, so basic
//! arithmetic and the elementary functions are correctly rounded at the
//! precision of the operands.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::float::{Constant, Round};
use rug::ops::Pow;
use rug::{Assign, Float};

use crate::error::{Error, Result};

const LOG2_10: f64 = std::f64::consts::LOG2_10;

/// Precision bookkeeping for one computation.
///
/// The working precision is `ceil((decimal_digits + guard_digits) * log2(10))`
/// bits, never below 64. `max_exponent` is the binary-exponent ceiling used
/// by the tower evaluators: a value whose binary exponent would exceed it is
/// treated as an overflow and replaced by its asymptotic form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrecisionContext {
    decimal_digits: u32,
    guard_digits: u32,
    max_exponent: i64,
}

impl PrecisionContext {
    /// Context with the default guard, `ceil(0.2 * decimal_digits) + 15`.
    pub fn new(decimal_digits: u32) -> Result<Self> {
        let guard = (decimal_digits as f64 * 0.2).ceil() as u32 + 15;
        Self::with_guard(decimal_digits, guard)
    }

    pub fn with_guard(decimal_digits: u32, guard_digits: u32) -> Result<Self> {
        if decimal_digits == 0 {
            return Err(Error::InvalidConfig("decimal_digits must be positive".into()));
        }
        if guard_digits < 10 {
            return Err(Error::InvalidConfig(format!(
                "guard_digits must be at least 10, got {guard_digits}"
            )));
        }
        Ok(PrecisionContext {
            decimal_digits,
            guard_digits,
            max_exponent: default_max_exponent(),
        })
    }

    /// Override the binary-exponent ceiling (must be at least 8).
    pub fn with_max_exponent(mut self, max_exponent: i64) -> Result<Self> {
        if max_exponent < 8 {
            return Err(Error::InvalidConfig(format!(
                "max_exponent must be at least 8, got {max_exponent}"
            )));
        }
        self.max_exponent = max_exponent.min(backend_max_exponent());
        Ok(self)
    }

    pub fn decimal_digits(&self) -> u32 {
        self.decimal_digits
    }

    pub fn guard_digits(&self) -> u32 {
        self.guard_digits
    }

    pub fn working_digits(&self) -> u32 {
        self.decimal_digits + self.guard_digits
    }

    /// Working precision in bits.
    pub fn bits(&self) -> u32 {
        ((self.working_digits() as f64 * LOG2_10).ceil() as u32).max(64)
    }

    pub fn max_exponent(&self) -> i64 {
        self.max_exponent
    }

    /// The same context asking for `extra` more output digits.
    pub fn boosted(&self, extra: u32) -> Self {
        let mut ctx = PrecisionContext::new(self.decimal_digits + extra)
            .expect("boosting a valid context stays valid");
        ctx.max_exponent = self.max_exponent;
        ctx
    }

    pub fn real<T>(&self, value: T) -> BigReal
    where
        Float: Assign<T>,
    {
        BigReal(Float::with_val(self.bits(), value))
    }

    pub fn zero(&self) -> BigReal {
        self.real(0)
    }

    pub fn one(&self) -> BigReal {
        self.real(1)
    }

    /// e = exp(1).
    pub fn e(&self) -> BigReal {
        self.one().exp()
    }

    pub fn ln2(&self) -> BigReal {
        BigReal(Float::with_val(self.bits(), Constant::Log2))
    }

    /// `10^(-digits)`.
    pub fn ten_pow_neg(&self, digits: i64) -> BigReal {
        let ten = Float::with_val(self.bits(), 10);
        BigReal(ten.pow(-digits.clamp(i32::MIN as i64, i32::MAX as i64) as i32))
    }

    /// Stage tolerance shared by the solvers: `10^-(decimal_digits + guard/2)`,
    /// which is tighter than the `10^-(decimal_digits + 5)` budget each
    /// composed stage needs.
    pub fn solver_tolerance(&self) -> BigReal {
        self.ten_pow_neg(i64::from(self.decimal_digits + (self.guard_digits / 2).max(5)))
    }

    /// Parse a decimal string at working precision.
    pub fn parse(&self, s: &str) -> Result<BigReal> {
        BigReal::parse(s, self.bits())
    }
}

fn backend_max_exponent() -> i64 {
    i64::from(rug::float::exp_max())
}

/// Half of the backend exponent range.
pub fn default_max_exponent() -> i64 {
    backend_max_exponent() / 2
}

/// Arbitrary-precision real number. Its precision is the working precision
/// of the context that produced it.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct BigReal(Float);

impl BigReal {
    pub fn from_float(value: Float) -> Self {
        BigReal(value)
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    pub fn into_float(self) -> Float {
        self.0
    }

    pub fn prec(&self) -> u32 {
        self.0.prec()
    }

    /// Parse `[+-]digits[.digits][e[+-]digits]` at `bits` of precision.
    pub fn parse(s: &str, bits: u32) -> Result<Self> {
        let trimmed = s.trim();
        if !is_decimal_literal(trimmed) {
            return Err(Error::Parse(format!("not a decimal number: {s:?}")));
        }
        let parsed = Float::parse(trimmed).map_err(|e| Error::Parse(format!("{s:?}: {e}")))?;
        Ok(BigReal(Float::with_val(bits, parsed)))
    }

    fn unary(&self, op: impl FnOnce(Float) -> Float) -> Self {
        BigReal(op(self.0.clone()))
    }

    pub fn exp(&self) -> Self {
        self.unary(Float::exp)
    }

    pub fn exp_m1(&self) -> Self {
        self.unary(Float::exp_m1)
    }

    pub fn ln(&self) -> Self {
        self.unary(Float::ln)
    }

    pub fn ln_1p(&self) -> Self {
        self.unary(Float::ln_1p)
    }

    pub fn sqrt(&self) -> Self {
        self.unary(Float::sqrt)
    }

    pub fn abs(&self) -> Self {
        self.unary(Float::abs)
    }

    pub fn recip(&self) -> Self {
        self.unary(Float::recip)
    }

    pub fn square(&self) -> Self {
        self.unary(Float::square)
    }

    pub fn powf(&self, exponent: &BigReal) -> Self {
        let prec = self.prec().max(exponent.prec());
        BigReal(Float::with_val(prec, (&self.0).pow(&exponent.0)))
    }

    pub fn powi(&self, exponent: i32) -> Self {
        BigReal(self.0.clone().pow(exponent))
    }

    pub fn floor(&self) -> Self {
        self.unary(Float::floor)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    pub fn is_sign_negative(&self) -> bool {
        self.0.is_sign_negative()
    }

    /// Sign as -1, 0 or 1 (NaN maps to 0).
    pub fn signum_i(&self) -> i32 {
        match self.0.cmp0() {
            Some(Ordering::Less) => -1,
            Some(Ordering::Greater) => 1,
            _ => 0,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    /// Binary exponent `e` with `2^(e-1) <= |x| < 2^e`; `None` for zero.
    pub fn binary_exponent(&self) -> Option<i32> {
        self.0.get_exp()
    }

    pub fn max(self, other: BigReal) -> BigReal {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Number of leading significant decimal digits on which `self` and
    /// `reference` agree, measured as `floor(-log10(|self - ref| / |ref|))`.
    /// Returns `None` when the two are exactly equal.
    pub fn agreement_digits(&self, reference: &BigReal) -> Option<i64> {
        let prec = self.prec().max(reference.prec());
        let diff = Float::with_val(prec, &self.0 - &reference.0);
        if diff.is_zero() {
            return None;
        }
        let scale = if reference.is_zero() {
            Float::with_val(prec, 1)
        } else {
            Float::with_val(prec, reference.0.abs_ref())
        };
        let rel = Float::with_val(prec, diff.abs() / scale);
        let digits = -rel.log10().to_f64();
        Some(digits.floor() as i64)
    }

    /// Render with exactly `digits` significant decimal digits.
    ///
    /// Positional notation is used while the decimal exponent stays in
    /// `(-25, digits]`; otherwise `d.ddd…e±x`. Zero renders as `0.` followed
    /// by `digits` zeros.
    pub fn to_decimal(&self, digits: usize) -> String {
        let digits = digits.max(1);
        if self.0.is_zero() {
            return format!("0.{}", "0".repeat(digits));
        }
        if !self.0.is_finite() {
            return self.0.to_string();
        }
        let (negative, mantissa, exp) = self.0.to_sign_string_exp_round(10, Some(digits), Round::Nearest);
        let exp = i64::from(exp.unwrap_or(0));
        let sign = if negative { "-" } else { "" };
        let len = mantissa.len() as i64;
        if exp > -25 && exp <= 0 {
            format!("{sign}0.{}{mantissa}", "0".repeat((-exp) as usize))
        } else if exp > 0 && exp < len {
            let (int, frac) = mantissa.split_at(exp as usize);
            format!("{sign}{int}.{frac}")
        } else if exp == len {
            format!("{sign}{mantissa}")
        } else {
            let (first, rest) = mantissa.split_at(1);
            let e = exp - 1;
            let esign = if e < 0 { '-' } else { '+' };
            if rest.is_empty() {
                format!("{sign}{first}e{esign}{}", e.abs())
            } else {
                format!("{sign}{first}.{rest}e{esign}{}", e.abs())
            }
        }
    }
}

fn is_decimal_literal(s: &str) -> bool {
    let bytes = s.as_bytes();
    let mut i = 0;
    if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
        i += 1;
    }
    let int_start = i;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    let mut mantissa_digits = i - int_start;
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        let frac_start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        mantissa_digits += i - frac_start;
    }
    if mantissa_digits == 0 {
        return false;
    }
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        i += 1;
        if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
            i += 1;
        }
        let exp_start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        if i == exp_start {
            return false;
        }
    }
    i == bytes.len()
}

impl fmt::Debug for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BigReal({})", self.to_decimal(25))
    }
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f
            .precision()
            .unwrap_or(((self.prec() as f64) / LOG2_10).floor() as usize);
        f.write_str(&self.to_decimal(digits))
    }
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&BigReal> for &BigReal {
            type Output = BigReal;
            fn $method(self, rhs: &BigReal) -> BigReal {
                let prec = self.prec().max(rhs.prec());
                BigReal(Float::with_val(prec, (&self.0).$method(&rhs.0)))
            }
        }
        impl $trait<BigReal> for BigReal {
            type Output = BigReal;
            fn $method(self, rhs: BigReal) -> BigReal {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&BigReal> for BigReal {
            type Output = BigReal;
            fn $method(self, rhs: &BigReal) -> BigReal {
                (&self).$method(rhs)
            }
        }
        impl $trait<BigReal> for &BigReal {
            type Output = BigReal;
            fn $method(self, rhs: BigReal) -> BigReal {
                self.$method(&rhs)
            }
        }
        impl $trait<i32> for &BigReal {
            type Output = BigReal;
            fn $method(self, rhs: i32) -> BigReal {
                BigReal(Float::with_val(self.prec(), (&self.0).$method(rhs)))
            }
        }
        impl $trait<i32> for BigReal {
            type Output = BigReal;
            fn $method(self, rhs: i32) -> BigReal {
                BigReal(self.0.$method(rhs))
            }
        }
        impl $trait<f64> for &BigReal {
            type Output = BigReal;
            fn $method(self, rhs: f64) -> BigReal {
                BigReal(Float::with_val(self.prec(), (&self.0).$method(rhs)))
            }
        }
        impl $trait<f64> for BigReal {
            type Output = BigReal;
            fn $method(self, rhs: f64) -> BigReal {
                BigReal(self.0.$method(rhs))
            }
        }
    };
}

impl_binop!(Add, add);
impl_binop!(Sub, sub);
impl_binop!(Mul, mul);
impl_binop!(Div, div);

impl Neg for BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        BigReal(-self.0)
    }
}

impl Neg for &BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        BigReal(-self.0.clone())
    }
}

impl PartialEq<i32> for BigReal {
    fn eq(&self, other: &i32) -> bool {
        self.0 == *other
    }
}

impl PartialOrd<i32> for BigReal {
    fn partial_cmp(&self, other: &i32) -> Option<Ordering> {
        self.0.partial_cmp(other)
    }
}

impl PartialEq<f64> for BigReal {
    fn eq(&self, other: &f64) -> bool {
        self.0 == *other
    }
}

impl PartialOrd<f64> for BigReal {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        self.0.partial_cmp(other)
    }
}

/// An interval `[lo, hi]` on which a function changes sign. The function
/// values at the endpoints are kept so the solver does not re-evaluate them.
#[derive(Debug, Clone)]
pub struct Bracket {
    lo: BigReal,
    hi: BigReal,
    f_lo: BigReal,
    f_hi: BigReal,
}

impl Bracket {
    /// Evaluate `f` at both endpoints and check for a sign change.
    pub fn new<F>(lo: BigReal, hi: BigReal, f: &mut F) -> Result<Self>
    where
        F: FnMut(&BigReal) -> Result<BigReal>,
    {
        let f_lo = f(&lo)?;
        let f_hi = f(&hi)?;
        Self::from_values(lo, hi, f_lo, f_hi)
    }

    pub fn from_values(lo: BigReal, hi: BigReal, f_lo: BigReal, f_hi: BigReal) -> Result<Self> {
        if lo > hi {
            return Self::from_values(hi, lo, f_hi, f_lo);
        }
        if !(lo < hi) || f_lo.signum_i() * f_hi.signum_i() > 0 || !f_lo.is_finite() || !f_hi.is_finite()
        {
            return Err(Error::NoSignChange {
                lo: lo.to_decimal(20),
                hi: hi.to_decimal(20),
            });
        }
        Ok(Bracket { lo, hi, f_lo, f_hi })
    }

    pub fn lo(&self) -> &BigReal {
        &self.lo
    }

    pub fn hi(&self) -> &BigReal {
        &self.hi
    }

    pub fn f_lo_sign(&self) -> i32 {
        self.f_lo.signum_i()
    }

    pub fn f_hi_sign(&self) -> i32 {
        self.f_hi.signum_i()
    }
}

/// Find the root of a continuous monotone `f` inside `bracket` until the
/// enclosing interval is narrower than `tol`.
///
/// Regula falsi with the Illinois modification, falling back to bisection
/// whenever the bracket fails to halve over three steps. The iteration cap
/// is ten steps per decimal digit of the bracket's precision.
pub fn solve_monotone<F>(mut f: F, bracket: Bracket, tol: &BigReal) -> Result<BigReal>
where
    F: FnMut(&BigReal) -> Result<BigReal>,
{
    let Bracket {
        mut lo,
        mut hi,
        mut f_lo,
        mut f_hi,
    } = bracket;
    if f_lo.is_zero() {
        return Ok(lo);
    }
    if f_hi.is_zero() {
        return Ok(hi);
    }
    let digits = (f64::from(lo.prec().max(hi.prec())) / LOG2_10).ceil() as usize;
    let max_iter = 10 * digits.max(1);
    let half_tol = tol / 2;

    let mut side = 0i8;
    let mut checkpoint = &hi - &lo;
    let mut force_bisect = false;
    for iter in 1..=max_iter {
        let width = &hi - &lo;
        if width < *tol {
            return Ok((&lo + &hi) / 2);
        }
        let mid = (&lo + &hi) / 2;
        let mut c = if force_bisect {
            mid.clone()
        } else {
            (&lo * &f_hi - &hi * &f_lo) / (&f_hi - &f_lo)
        };
        if !(c > lo && c < hi) {
            c = mid;
        }
        if &c - &lo < half_tol {
            c = &lo + &half_tol;
        } else if &hi - &c < half_tol {
            c = &hi - &half_tol;
        }
        let fc = f(&c)?;
        if fc.is_zero() {
            return Ok(c);
        }
        if fc.signum_i() == f_lo.signum_i() {
            lo = c;
            f_lo = fc;
            if side == -1 {
                f_hi = f_hi / 2;
            }
            side = -1;
        } else {
            hi = c;
            f_hi = fc;
            if side == 1 {
                f_lo = f_lo / 2;
            }
            side = 1;
        }
        force_bisect = false;
        if iter % 3 == 0 {
            let width = &hi - &lo;
            if width > &checkpoint / 2 {
                force_bisect = true;
            }
            checkpoint = width;
        }
    }
    Err(Error::NoConvergence(format!(
        "bracket [{}, {}] still wider than tolerance after {max_iter} steps",
        lo.to_decimal(20),
        hi.to_decimal(20)
    )))
}

/// Grow `[lo, hi]` geometrically until `f` changes sign, then return the
/// bracket. `lo` moves down while `f(lo)` has the sign of `f(hi)` and vice
/// versa; `expand_lo`/`expand_hi` choose which ends may move.
pub fn expand_bracket<F>(
    mut lo: BigReal,
    mut hi: BigReal,
    f: &mut F,
    increasing: bool,
    max_steps: usize,
) -> Result<Bracket>
where
    F: FnMut(&BigReal) -> Result<BigReal>,
{
    let mut f_lo = f(&lo)?;
    let mut f_hi = f(&hi)?;
    let mut step = &hi - &lo;
    let want_lo = if increasing { -1 } else { 1 };
    for _ in 0..max_steps {
        let lo_ok = f_lo.signum_i() == want_lo || f_lo.is_zero();
        let hi_ok = f_hi.signum_i() == -want_lo || f_hi.is_zero();
        if lo_ok && hi_ok {
            return Bracket::from_values(lo, hi, f_lo, f_hi);
        }
        if !lo_ok {
            // the root lies below lo; lo becomes the new hi
            hi = lo.clone();
            f_hi = f_lo.clone();
            lo = &lo - &step;
            f_lo = f(&lo)?;
        } else {
            lo = hi.clone();
            f_lo = f_hi.clone();
            hi = &hi + &step;
            f_hi = f(&hi)?;
        }
        step = step * 2;
    }
    Err(Error::NoSignChange {
        lo: lo.to_decimal(20),
        hi: hi.to_decimal(20),
    })
}

/// The `order`-th derivative of `f` at `x` (order 1, 2 or 4) from a
/// symmetric central-difference stencil with step `10^(-d/(order+2))` and one
/// level of Richardson extrapolation (steps `h` and `h/2`).
pub fn central_derivative<F>(mut f: F, x: &BigReal, order: u32, ctx: &PrecisionContext) -> Result<BigReal>
where
    F: FnMut(&BigReal) -> Result<BigReal>,
{
    if !matches!(order, 1 | 2 | 4) {
        return Err(Error::Domain(format!("derivative order {order} not in {{1, 2, 4}}")));
    }
    let exponent = f64::from(ctx.decimal_digits()) / f64::from(order + 2);
    let h = ctx.real(10).powf(&ctx.real(-exponent));
    let x = ctx.real(x.as_float());

    let mut stencil = |h: &BigReal| -> Result<BigReal> {
        match order {
            1 => {
                let plus = f(&(&x + h))?;
                let minus = f(&(&x - h))?;
                Ok((plus - minus) / (h * 2))
            }
            2 => {
                let plus = f(&(&x + h))?;
                let centre = f(&x)?;
                let minus = f(&(&x - h))?;
                Ok((plus - centre * 2 + minus) / h.square())
            }
            _ => {
                let h2 = h * 2;
                let p2 = f(&(&x + &h2))?;
                let p1 = f(&(&x + h))?;
                let c = f(&x)?;
                let m1 = f(&(&x - h))?;
                let m2 = f(&(&x - &h2))?;
                Ok((p2 - p1 * 4 + c * 6 - m1 * 4 + m2) / h.powi(4))
            }
        }
    };
    let coarse = stencil(&h)?;
    let fine = stencil(&(&h / 2))?;
    Ok((fine * 4 - coarse) / 3)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(d: u32) -> PrecisionContext {
        PrecisionContext::new(d).unwrap()
    }

    #[test]
    fn context_invariants() {
        let c = ctx(30);
        assert_eq!(c.guard_digits(), 21);
        assert_eq!(c.bits(), (51.0 * LOG2_10).ceil() as u32);
        assert!(ctx(1).bits() >= 64);
        assert!(PrecisionContext::with_guard(30, 9).is_err());
        assert!(PrecisionContext::with_guard(0, 20).is_err());
        assert!(c.with_max_exponent(2).is_err());
        assert_eq!(c.with_max_exponent(64).unwrap().max_exponent(), 64);
    }

    #[test]
    fn rendering() {
        let c = ctx(30);
        assert_eq!(c.parse("2").unwrap().to_decimal(5), "2.0000");
        assert_eq!(c.parse("-0.001234567").unwrap().to_decimal(4), "-0.001235");
        assert_eq!(c.zero().to_decimal(20), "0.00000000000000000000");
        assert_eq!(c.parse("12345").unwrap().to_decimal(5), "12345");
        assert_eq!(c.parse("1.5e40").unwrap().to_decimal(3), "1.50e+40");
        assert_eq!(c.parse("1.5e-40").unwrap().to_decimal(3), "1.50e-40");
        assert_eq!(c.parse("61.4").unwrap().to_decimal(4), "61.40");
    }

    #[test]
    fn parse_rejects_garbage() {
        let c = ctx(30);
        for bad in ["", "abc", "1.2.3", "e5", "1e", "--1", "inf", "nan", "1_000"] {
            assert!(matches!(c.parse(bad), Err(Error::Parse(_))), "{bad}");
        }
        for good in ["1", "-1.5", "+.5", "5.", "1e-3", "2.5E+10"] {
            assert!(c.parse(good).is_ok(), "{good}");
        }
    }

    #[test]
    fn agreement_digits() {
        let c = ctx(40);
        let a = c.parse("1.23456789").unwrap();
        let b = c.parse("1.23456780").unwrap();
        assert_eq!(a.agreement_digits(&b), Some(7));
        assert_eq!(a.agreement_digits(&a), None);
    }

    #[test]
    fn solve_linear_root() {
        let c = ctx(30);
        let mut f = |x: &BigReal| Ok(x - 2);
        let bracket = Bracket::new(c.real(0), c.real(5), &mut f).unwrap();
        let root = solve_monotone(f, bracket, &c.ten_pow_neg(30)).unwrap();
        assert!((root - 2).abs() < c.ten_pow_neg(30));
    }

    #[test]
    fn solve_log_root() {
        let c = ctx(30);
        let mut f = |x: &BigReal| Ok(x.ln());
        let bracket = Bracket::new(c.parse("0.5").unwrap(), c.real(2), &mut f).unwrap();
        let root = solve_monotone(f, bracket, &c.ten_pow_neg(30)).unwrap();
        assert!((root - 1).abs() < c.ten_pow_neg(30));
    }

    #[test]
    fn solve_exp_root_matches_ln2() {
        let c = ctx(40);
        let mut f = |x: &BigReal| Ok(x.exp() - 2);
        let bracket = Bracket::new(c.real(0), c.real(1), &mut f).unwrap();
        let root = solve_monotone(f, bracket, &c.ten_pow_neg(40)).unwrap();
        assert!((&root - c.ln2()).abs() < c.ten_pow_neg(40));
        assert!(root.to_decimal(40).starts_with("0.6931471805599453094172321214581765680755"));
    }

    #[test]
    fn solve_rejects_missing_sign_change() {
        let c = ctx(30);
        let mut f = |x: &BigReal| Ok(x.square() + 1);
        assert!(matches!(
            Bracket::new(c.real(-1), c.real(1), &mut f),
            Err(Error::NoSignChange { .. })
        ));
    }

    #[test]
    fn expand_bracket_finds_distant_root() {
        let c = ctx(30);
        let mut f = |x: &BigReal| Ok(x + 1000);
        let bracket = expand_bracket(c.real(0), c.real(1), &mut f, true, 60).unwrap();
        assert!(*bracket.lo() <= -1000 && *bracket.hi() >= -1000);
        assert_eq!(bracket.f_lo_sign(), -1);
        assert_eq!(bracket.f_hi_sign(), 1);
    }

    #[test]
    fn derivative_examples() {
        let c = ctx(40);
        let d1 = central_derivative(|x: &BigReal| Ok(x.exp()), &c.zero(), 1, &c).unwrap();
        assert!((d1 - 1).abs() < c.ten_pow_neg(20));
        let d2 = central_derivative(|x: &BigReal| Ok(x.square()), &c.real(3), 2, &c).unwrap();
        assert!((d2 - 2).abs() < c.ten_pow_neg(20));
        let d4 = central_derivative(|x: &BigReal| Ok(x.powi(4)), &c.real(1), 4, &c).unwrap();
        assert!((d4 - 24).abs() < c.ten_pow_neg(20));
        assert!(central_derivative(|x: &BigReal| Ok(x.clone()), &c.zero(), 3, &c).is_err());
    }

    #[test]
    fn derivative_of_sextic_is_half_precision_exact() {
        // p(x) = x^6 - 3x^4 + x; p'(1.5) = 6*1.5^5 - 12*1.5^3 + 1
        let c = ctx(40);
        let p = |x: &BigReal| Ok(x.powi(6) - x.powi(4) * 3 + x);
        let got = central_derivative(p, &c.parse("1.5").unwrap(), 1, &c).unwrap();
        let x = c.parse("1.5").unwrap();
        let want = x.powi(5) * 6 - x.powi(3) * 12 + 1;
        assert!((got - want).abs() < c.ten_pow_neg(20));
    }
}
