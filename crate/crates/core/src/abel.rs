//! The iterated-logarithm orbit `y_n = ln(1 + y_{n-1})`, its Abel constant
//! `C(y0)` and the Abel function `A` of `e^x - 1`.
//!
//! `C(y0)` is the constant in the power-logarithmic expansion of the orbit of
//! `y0`; it is found by running the orbit exactly for `N` steps and solving
//! the truncated series for `C`. Since `C(ln(1 + y)) = C(y) + 1`,
//! `A(x) = C(1) - C(x)` satisfies `A(e^x - 1) = A(x) + 1` with `A(1) = 0`.

use std::sync::{Arc, OnceLock};

use rug::Float;

use crate::asympoly::{generate_p_shared, generate_t, RationalPolynomial, SeriesTruncation};
use crate::error::{Error, Result};
use crate::numerics::{central_derivative, expand_bracket, solve_monotone, BigReal, PrecisionContext};

/// Default number of series terms at desk precision.
pub const DEFAULT_K: usize = 13;

/// Upper bound on the number of `e^x - 1` / `ln(1 + x)` steps taken to move
/// an argument into the reference interval `[1, e - 1)`.
pub const MAX_SHIFT_STEPS: u64 = 1_000_000;

/// Truncation `k`, orbit depth `N` and precision for Abel-constant solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AbelSeriesConfig {
    k: SeriesTruncation,
    n: u64,
    ctx: PrecisionContext,
}

impl AbelSeriesConfig {
    /// Default `k` and the smallest power-of-ten `N` with
    /// `(ln N)^k / N^(k+1) < 10^-(d+10)`.
    pub fn new(ctx: PrecisionContext) -> Result<Self> {
        let k = Self::default_k(&ctx);
        let n = Self::adaptive_n(k, &ctx);
        Self::with_params(k, n, ctx)
    }

    /// `k = 13` up to 50 digits, then `ceil(0.4 d)` so `N` stays near `10^4`.
    pub fn default_k(ctx: &PrecisionContext) -> usize {
        let d = ctx.decimal_digits() as usize;
        if d <= 50 {
            DEFAULT_K
        } else {
            (2 * d).div_ceil(5)
        }
    }

    pub fn adaptive_n(k: usize, ctx: &PrecisionContext) -> u64 {
        let target = -(f64::from(ctx.decimal_digits()) + 10.0);
        let mut n: u64 = 100;
        while n < 10u64.pow(12) && log10_truncation_term(k, n) >= target {
            n *= 10;
        }
        n
    }

    /// Explicit `(k, N)`; rejected unless `10 (ln N)^k / N^(k+1) < 10^-d`.
    pub fn with_params(k: usize, n: u64, ctx: PrecisionContext) -> Result<Self> {
        let k = SeriesTruncation::new(k)?;
        if n < 2 {
            return Err(Error::InvalidConfig(format!("orbit depth N must be at least 2, got {n}")));
        }
        let bound = 1.0 + log10_truncation_term(k.get(), n);
        if bound >= -f64::from(ctx.decimal_digits()) {
            return Err(Error::InvalidConfig(format!(
                "k = {}, N = {n} leaves a truncation bound of 10^{bound:.1}, \
                 above 10^-{} (raise k or N)",
                k.get(),
                ctx.decimal_digits()
            )));
        }
        Ok(AbelSeriesConfig { k, n, ctx })
    }

    pub fn k(&self) -> usize {
        self.k.get()
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn ctx(&self) -> &PrecisionContext {
        &self.ctx
    }
}

/// `log10((ln N)^k / N^(k+1))`.
fn log10_truncation_term(k: usize, n: u64) -> f64 {
    let n = n as f64;
    k as f64 * n.ln().log10() - (k as f64 + 1.0) * n.log10()
}

/// A solved Abel constant `C(y0)` together with the configuration used.
#[derive(Debug, Clone)]
pub struct AbelConstant {
    pub y0: BigReal,
    pub c: BigReal,
    pub k: usize,
    pub n: u64,
}

/// `y_n` by direct recursion.
pub fn iterate_log(y0: &BigReal, n: u64, ctx: &PrecisionContext) -> Result<BigReal> {
    if !(*y0 > 0) {
        return Err(Error::Domain(format!(
            "orbit start must be positive, got {}",
            y0.to_decimal(20)
        )));
    }
    let mut y = Float::with_val(ctx.bits(), y0.as_float());
    for _ in 0..n {
        y.ln_1p_mut();
    }
    Ok(BigReal::from_float(y))
}

/// Float coefficients of `P_0 … P_{k-1}` at one precision.
#[derive(Debug, Clone)]
struct PSeries {
    coeffs: Vec<Vec<Float>>,
    prec: u32,
}

impl PSeries {
    fn new(polys: &[RationalPolynomial], prec: u32) -> Self {
        let coeffs = polys
            .iter()
            .map(|p| p.coeffs().iter().map(|c| Float::with_val(prec, c)).collect())
            .collect();
        PSeries { coeffs, prec }
    }

    /// `sum_m P_m(u) 2 / n^(m+1)` with `u = ln(n)/3 - C`.
    fn eval(&self, c: &Float, ln_n_third: &Float, inv_n: &Float) -> Float {
        let u = Float::with_val(self.prec, ln_n_third - c);
        let mut acc = Float::with_val(self.prec, 0);
        for poly in self.coeffs.iter().rev() {
            acc *= inv_n;
            let mut pm = Float::with_val(self.prec, 0);
            for coeff in poly.iter().rev() {
                pm *= &u;
                pm += coeff;
            }
            acc += pm;
        }
        acc * inv_n * 2u32
    }
}

fn ln_n_third(n: u64, prec: u32) -> Float {
    Float::with_val(prec, n).ln() / 3u32
}

/// Truncated series `sum_{m<k} P_m(ln(n)/3 - C) 2 / n^(m+1)`.
pub fn series_y(c: &BigReal, n: u64, k: usize, ctx: &PrecisionContext) -> Result<BigReal> {
    if n < 2 {
        return Err(Error::Domain(format!("series index must be at least 2, got {n}")));
    }
    let k = SeriesTruncation::new(k)?.get();
    let prec = ctx.bits();
    let series = PSeries::new(&generate_p_shared(k), prec);
    let inv_n = Float::with_val(prec, n).recip();
    let c = Float::with_val(prec, c.as_float());
    Ok(BigReal::from_float(series.eval(&c, &ln_n_third(n, prec), &inv_n)))
}

/// Truncated reciprocal series `n + sum_{m<k} T_{m+1}(-ln(n)/3 + C) / n^m`.
///
/// In terms of `W = 3g + ln(n) = ln(n) - 3C` the `k = 3` case reads
/// `n - W/3 + (W - 1/2)/(9n) + (W^2 - 3W + 7/5)/(54 n^2)`.
pub fn series_recip(c: &BigReal, n: u64, k: usize, ctx: &PrecisionContext) -> Result<BigReal> {
    if n < 2 {
        return Err(Error::Domain(format!("series index must be at least 2, got {n}")));
    }
    let k = SeriesTruncation::new(k)?.get();
    let prec = ctx.bits();
    let t = generate_t(k);
    let y = Float::with_val(prec, c.as_float()) - ln_n_third(n, prec);
    let inv_n = Float::with_val(prec, n).recip();
    let mut acc = Float::with_val(prec, 0);
    for poly in t.iter().rev() {
        acc *= &inv_n;
        acc += poly.eval(&y, prec);
    }
    Ok(BigReal::from_float(acc + n))
}

/// Solve the truncated series at index `N` for `C(y0)`.
pub fn solve_c(y0: &BigReal, config: &AbelSeriesConfig) -> Result<AbelConstant> {
    let ctx = config.ctx();
    let prec = ctx.bits();
    let series = PSeries::new(&generate_p_shared(config.k()), prec);
    let y_n = iterate_log(y0, config.n(), ctx)?;
    let c = solve_series_for_c(&series, &y_n, config)?;
    Ok(AbelConstant {
        y0: y0.clone(),
        c,
        k: config.k(),
        n: config.n(),
    })
}

fn solve_series_for_c(series: &PSeries, y_n: &BigReal, config: &AbelSeriesConfig) -> Result<BigReal> {
    let ctx = config.ctx();
    let prec = ctx.bits();
    let n = config.n();
    let ln_third = ln_n_third(n, prec);
    let inv_n = Float::with_val(prec, n).recip();
    let target = y_n.as_float().clone();
    // decreasing in C: the P_1 term contributes -2C/N^2
    let mut residual =
        |c: &BigReal| -> Result<BigReal> { Ok(BigReal::from_float(series.eval(c.as_float(), &ln_third, &inv_n) - &target)) };
    let hi = BigReal::from_float(ln_third.clone() * 3u32);
    let bracket = expand_bracket(ctx.zero(), hi, &mut residual, false, 200)?;
    // the orbit carries ~log10(N^2) digits of amplified rounding; asking for more is wasted work
    let noise_digits = 2.0 * (n as f64).log10();
    let tol_digits = (f64::from(ctx.working_digits()) - noise_digits).max(f64::from(ctx.decimal_digits()) + 5.0);
    let tol = ctx.ten_pow_neg(tol_digits.floor() as i64);
    solve_monotone(residual, bracket, &tol)
}

/// Abel function of `e^x - 1` normalized by `A(1) = 0`.
///
/// Arguments are first moved into `[1, e - 1)` with the exact shifts
/// `A(x) = A(ln(1 + x)) + 1` and `A(x) = A(e^x - 1) - 1`, so every Abel
/// constant is solved for a start value in the same small interval. `C(1)`
/// is computed once and memoized.
#[derive(Debug)]
pub struct Abel {
    config: AbelSeriesConfig,
    series: Arc<PSeries>,
    c_one: OnceLock<BigReal>,
}

impl Abel {
    pub fn new(ctx: PrecisionContext) -> Result<Self> {
        Ok(Self::with_config(AbelSeriesConfig::new(ctx)?))
    }

    pub fn with_config(config: AbelSeriesConfig) -> Self {
        let series = PSeries::new(&generate_p_shared(config.k()), config.ctx().bits());
        Abel {
            config,
            series: Arc::new(series),
            c_one: OnceLock::new(),
        }
    }

    pub fn config(&self) -> &AbelSeriesConfig {
        &self.config
    }

    pub fn ctx(&self) -> &PrecisionContext {
        self.config.ctx()
    }

    /// `C(y0) = -g(y0)`.
    pub fn abel_constant(&self, y0: &BigReal) -> Result<BigReal> {
        let y_n = iterate_log(y0, self.config.n(), self.ctx())?;
        solve_series_for_c(&self.series, &y_n, &self.config)
    }

    /// `C(1) = -g(1)`, memoized.
    pub fn c_one(&self) -> Result<BigReal> {
        if let Some(c) = self.c_one.get() {
            return Ok(c.clone());
        }
        let c = self.abel_constant(&self.ctx().one())?;
        Ok(self.c_one.get_or_init(|| c).clone())
    }

    /// Move `x > 0` into `[1, e - 1)`; returns the moved value and the
    /// integer `s` with `A(x) = A(moved) + s`.
    fn normalize(&self, x: &BigReal) -> Result<(BigReal, i64)> {
        let ctx = self.ctx();
        let upper = ctx.one().exp_m1();
        let mut v = ctx.real(x.as_float());
        let mut shift = 0i64;
        let mut steps = 0u64;
        while v >= upper {
            v = v.ln_1p();
            shift += 1;
            steps += 1;
        }
        while v < 1 {
            v = v.exp_m1();
            shift -= 1;
            steps += 1;
            if steps > MAX_SHIFT_STEPS {
                return Err(Error::Domain(format!(
                    "argument {} too close to 0 (more than {MAX_SHIFT_STEPS} shifts)",
                    x.to_decimal(10)
                )));
            }
        }
        Ok((v, shift))
    }

    /// `A(x)` for `x > 0`.
    pub fn a(&self, x: &BigReal) -> Result<BigReal> {
        if !(*x > 0) {
            return Err(Error::Domain(format!("A(x) needs x > 0, got {}", x.to_decimal(20))));
        }
        let (v, shift) = self.normalize(x)?;
        let c_one = self.c_one()?;
        let c_v = if v == 1 { c_one.clone() } else { self.abel_constant(&v)? };
        Ok(c_one - c_v + self.ctx().real(shift))
    }

    /// Inverse of `A`.
    ///
    /// The fractional part of `a` fixes `C = C(1) - frac(a)`; the series gives
    /// `y_N`, and `N` steps of `e^y - 1` recover the start value in
    /// `[1, e - 1)`. The integer part is applied as `e^x - 1` or `ln(1 + x)` steps.
    pub fn a_inverse(&self, a: &BigReal) -> Result<BigReal> {
        let ctx = self.ctx();
        let prec = ctx.bits();
        let a = ctx.real(a.as_float());
        let whole = a.floor();
        let frac = &a - &whole;
        let shift = whole.to_f64();
        if shift.abs() > MAX_SHIFT_STEPS as f64 {
            return Err(Error::Domain(format!("A^-1 argument {} out of reach", a.to_decimal(12))));
        }
        let shift = shift as i64;

        let c = self.c_one()? - frac;
        let n = self.config.n();
        let mut y = self.series.eval(c.as_float(), &ln_n_third(n, prec), &Float::with_val(prec, n).recip());
        if !(y > 0) {
            return Err(Error::NoConvergence("series value for the orbit is not positive".into()));
        }
        for _ in 0..n {
            y.exp_m1_mut();
        }
        let log2_e = std::f64::consts::LOG2_E;
        for _ in 0..shift.max(0) {
            if y.to_f64() * log2_e > ctx.max_exponent() as f64 {
                return Err(Error::Overflow(format!(
                    "A^-1({}) exceeds the exponent ceiling 2^{}",
                    a.to_decimal(12),
                    ctx.max_exponent()
                )));
            }
            y.exp_m1_mut();
        }
        for _ in 0..(-shift).max(0) {
            y.ln_1p_mut();
        }
        Ok(BigReal::from_float(y))
    }

    /// `A'(x)` by central differences.
    pub fn a_prime(&self, x: &BigReal) -> Result<BigReal> {
        central_derivative(|t: &BigReal| self.a(t), x, 1, self.ctx())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(d: u32) -> PrecisionContext {
        PrecisionContext::new(d).unwrap()
    }

    #[test]
    fn config_defaults() {
        let c30 = AbelSeriesConfig::new(ctx(30)).unwrap();
        assert_eq!((c30.k(), c30.n()), (13, 10_000));
        let c40 = AbelSeriesConfig::new(ctx(40)).unwrap();
        assert_eq!((c40.k(), c40.n()), (13, 100_000));
        let c100 = AbelSeriesConfig::new(ctx(100)).unwrap();
        assert_eq!(c100.k(), 40);
        assert!(AbelSeriesConfig::with_params(3, 100, ctx(30)).is_err());
        assert!(AbelSeriesConfig::with_params(0, 100, ctx(30)).is_err());
        assert!(AbelSeriesConfig::with_params(7, 1_000_000, ctx(30)).is_ok());
    }

    #[test]
    fn iterate_log_examples() {
        let c = ctx(40);
        assert_eq!(iterate_log(&c.one(), 0, &c).unwrap(), c.one());
        let e_minus_1 = c.one().exp_m1();
        assert!((iterate_log(&e_minus_1, 1, &c).unwrap() - 1).abs() < c.ten_pow_neg(45));
        let y3 = iterate_log(&c.one(), 3, &c).unwrap();
        assert!(y3.to_decimal(30).starts_with("0.42303585716440204862269029640"));
        assert!(matches!(iterate_log(&c.zero(), 1, &c), Err(Error::Domain(_))));
    }

    #[test]
    fn series_leading_term() {
        let c = ctx(30);
        let n = 1_000_000u64;
        let got = series_y(&c.real(5), n, 1, &c).unwrap();
        assert_eq!(got, c.real(2) / c.real(n));
        assert!(series_y(&c.real(5), 1, 3, &c).is_err());
    }

    #[test]
    fn series_truncation_difference_is_next_term() {
        let c = ctx(30);
        let n = 1000u64;
        let cc = c.parse("2.25696115887251231897468847275855670396572224402525").unwrap();
        let s7 = series_y(&cc, n, 7, &c).unwrap();
        let s6 = series_y(&cc, n, 6, &c).unwrap();
        let u = c.real(n).ln() / 3 - &cc;
        let p6 = crate::asympoly::p_table(6).unwrap();
        let term = BigReal::from_float(p6.eval(u.as_float(), c.bits())) * 2 / c.real(n).powi(7);
        assert!(((s7 - s6) - term).abs() < c.ten_pow_neg(45));
    }

    #[test]
    fn recip_series_k1_and_walker_form() {
        let c = ctx(30);
        let cc = c.parse("2.2569611588725123").unwrap();
        let n = 5000u64;
        let ln_n = c.real(n).ln();
        let got = series_recip(&cc, n, 1, &c).unwrap();
        let want = c.real(n) - &ln_n / 3 + &cc;
        assert!((got - want).abs() < c.ten_pow_neg(40));

        let w = &ln_n - &cc * 3;
        let nn = c.real(n);
        let walker = &nn - &w / 3 + (&w - 0.5) / (&nn * 9) + (w.square() - &w * 3 + c.parse("1.4").unwrap()) / (nn.square() * 54);
        let got3 = series_recip(&cc, n, 3, &c).unwrap();
        assert!((got3 - walker).abs() < c.ten_pow_neg(40));
    }

    #[test]
    fn abel_equation_at_known_points() {
        let abel = Abel::new(ctx(30)).unwrap();
        let c = *abel.ctx();
        let tol = c.ten_pow_neg(30);
        assert_eq!(abel.a(&c.one()).unwrap(), c.zero());
        assert!((abel.a(&c.one().exp_m1()).unwrap() - 1).abs() < tol);
        assert!((abel.a(&c.ln2()).unwrap() + 1).abs() < tol);
        assert!(matches!(abel.a(&c.zero()), Err(Error::Domain(_))));
        assert!(matches!(abel.a(&c.real(-1)), Err(Error::Domain(_))));
    }

    #[test]
    fn constant_at_one_and_half_step() {
        let abel = Abel::new(ctx(30)).unwrap();
        let c = *abel.ctx();
        let c1 = abel.c_one().unwrap();
        let want = c.parse("2.25696115887251231897468847275855670396572224402525").unwrap();
        assert!(c1.agreement_digits(&want).unwrap() >= 30);
        let half = abel.a_inverse(&c.parse("0.5").unwrap()).unwrap();
        let want = c.parse("1.2710274138899515214246518").unwrap();
        assert!(half.agreement_digits(&want).unwrap() >= 24);
        assert!((abel.a(&half).unwrap() - 0.5).abs() < c.ten_pow_neg(30));
        // the shift identities hold exactly at the constant level
        let c_em1 = abel.abel_constant(&c.one().exp_m1()).unwrap();
        assert!((c_em1 - &c1 + 1).abs() < c.ten_pow_neg(30));
    }

    #[test]
    fn inverse_small_cases() {
        let abel = Abel::new(ctx(30)).unwrap();
        let c = *abel.ctx();
        let tol = c.ten_pow_neg(30);
        assert!((abel.a_inverse(&c.zero()).unwrap() - 1).abs() < tol);
        assert!((abel.a_inverse(&c.one()).unwrap() - c.one().exp_m1()).abs() < tol);
        assert!(matches!(abel.a_inverse(&c.real(7)), Err(Error::Overflow(_))));
    }
}
