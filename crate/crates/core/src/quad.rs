//! The half-iterate `f` of `1 + x^2`: `f = lim f_n` with
//! `f_n(x) = sqrt(f_{n-1}(1 + x^2) - 1)` and `f_0(x) = |x|^sqrt2`.
//!
//! Along the orbit `x_0 = |x|`, `x_j = 1 + x_{j-1}^2`, the nest is the chain
//! `z_n = x_n^sqrt2`, `z_j = sqrt(z_{j+1} - 1)`, and `z_j = f_{n-j}(x_j)`.
//! The innermost step is taken as `sqrt(expm1(sqrt2 * ln1p(x_{n-1}^2)))` so
//! small arguments keep their digits.

use rug::Rational;

use crate::asympoly::RationalPolynomial;
use crate::error::{Error, Result};
use crate::numerics::{central_derivative, BigReal, PrecisionContext};

/// The orbit `x_0 = |x|`, `x_j = 1 + x_{j-1}^2` up to `depth`.
#[derive(Debug, Clone)]
pub struct QuadOrbit {
    pub x0: BigReal,
    /// `x_0 … x_depth`.
    pub values: Vec<BigReal>,
    pub depth: usize,
    /// Set when the exponent ceiling stopped the orbit before the requested depth.
    pub capped: bool,
}

impl QuadOrbit {
    pub fn build(x: &BigReal, depth: usize, ctx: &PrecisionContext) -> Self {
        let x0 = ctx.real(x.as_float()).abs();
        let mut values = vec![x0.clone()];
        let mut capped = false;
        for _ in 0..depth {
            let last = values.last().expect("orbit is never empty");
            let exp = i64::from(last.binary_exponent().unwrap_or(0));
            // x_j^sqrt2 must stay representable as well as x_j
            if 3 * exp + 2 > ctx.max_exponent() {
                capped = true;
                break;
            }
            let next = last.square() + 1;
            values.push(next);
        }
        let depth = values.len() - 1;
        QuadOrbit { x0, values, depth, capped }
    }

    /// `z_0 … z_n`, where `z_j = f_{n-j}(x_j)`.
    fn chain(&self, n: usize, ctx: &PrecisionContext) -> Result<Vec<BigReal>> {
        debug_assert!(n <= self.depth);
        let sqrt2 = ctx.real(2).sqrt();
        let x = &self.values;
        let mut z = vec![ctx.zero(); n + 1];
        z[n] = x[n].powf(&sqrt2);
        if n == 0 {
            return Ok(z);
        }
        z[n - 1] = (x[n - 1].square().ln_1p() * &sqrt2).exp_m1().sqrt();
        for j in (0..n - 1).rev() {
            let radicand = &z[j + 1] - 1;
            if radicand.is_sign_negative() && !radicand.is_zero() {
                return Err(Error::NegativeRadicand(j));
            }
            z[j] = radicand.sqrt();
        }
        Ok(z)
    }
}

/// `f_n(x)`.
pub fn f_iter(x: &BigReal, n: usize, ctx: &PrecisionContext) -> Result<BigReal> {
    if !x.is_finite() {
        return Err(Error::Domain("f needs a finite argument".into()));
    }
    let orbit = QuadOrbit::build(x, n, ctx);
    if orbit.depth < n {
        return Err(Error::Overflow(format!(
            "orbit of {} passes the exponent ceiling before depth {n}",
            x.to_decimal(12)
        )));
    }
    Ok(orbit.chain(n, ctx)?.swap_remove(0))
}

fn depth_cap(ctx: &PrecisionContext) -> usize {
    4 * ctx.decimal_digits() as usize
}

/// `f(x)`, deepening until successive iterates differ by less than the
/// solver tolerance. An orbit stopped by the exponent ceiling returns its
/// deepest iterate.
pub fn f_limit(x: &BigReal, ctx: &PrecisionContext) -> Result<BigReal> {
    if !x.is_finite() {
        return Err(Error::Domain("f needs a finite argument".into()));
    }
    let tol = ctx.solver_tolerance();
    let orbit = QuadOrbit::build(x, depth_cap(ctx), ctx);
    let mut prev = orbit.chain(0, ctx)?.swap_remove(0);
    // f_0 and f_1 agree at 0, so one small gap is not enough
    let mut settled = false;
    for n in 1..=orbit.depth {
        let cur = orbit.chain(n, ctx)?.swap_remove(0);
        let scale = cur.abs().max(ctx.one());
        let small = (&cur - &prev).abs() < &tol * &scale;
        if (small && settled) || (orbit.capped && n == orbit.depth) {
            return Ok(cur);
        }
        settled = small;
        prev = cur;
    }
    if orbit.depth == 0 {
        return Ok(prev);
    }
    Err(Error::NoConvergence(format!(
        "f({}) did not settle within {} levels",
        x.to_decimal(12),
        orbit.depth
    )))
}

/// How `f_{n-j}(x_j)` inside `q` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PqMode {
    /// The chain values at the common depth `n`; one pass per `n`.
    #[default]
    Literal,
    /// `f(x_j)` to full precision at every level.
    Adaptive,
}

#[derive(Debug, Clone)]
pub struct PqResult {
    pub p: BigReal,
    pub q: BigReal,
    pub depth: usize,
    /// Largest relative change in `p` or `q` at the final step.
    pub tail_bound: BigReal,
}

/// `p(x) = lim prod_{j<n} x_j / x_n` and
/// `q(x) = lim prod_{j<n} f_{n-j}(x_j) / f_0(x_n)`.
pub fn pq_limits(x: &BigReal, ctx: &PrecisionContext) -> Result<PqResult> {
    pq_limits_with(x, PqMode::Literal, ctx)
}

pub fn pq_limits_with(x: &BigReal, mode: PqMode, ctx: &PrecisionContext) -> Result<PqResult> {
    if !(*x > 0) {
        return Err(Error::Domain(format!("p and q need x > 0, got {}", x.to_decimal(20))));
    }
    let tol = ctx.solver_tolerance();
    let orbit = QuadOrbit::build(x, depth_cap(ctx), ctx);
    let sqrt2 = ctx.real(2).sqrt();
    let xs = &orbit.values;
    let adaptive: Vec<BigReal> = match mode {
        PqMode::Literal => Vec::new(),
        PqMode::Adaptive => xs.iter().map(|v| f_limit(v, ctx)).collect::<Result<_>>()?,
    };

    let mut prev: Option<(BigReal, BigReal)> = None;
    // p_n carried by p_{n+1} = p_n / (1 + x_n^-2)
    let mut p = ctx.one();
    for n in 1..=orbit.depth {
        p = if n == 1 {
            &xs[0] / &xs[1]
        } else {
            p / (xs[n - 1].square().recip() + 1)
        };
        let q = match mode {
            PqMode::Literal => {
                let z = orbit.chain(n, ctx)?;
                let mut prod = ctx.one();
                for zj in &z[..n] {
                    prod = prod * zj;
                }
                prod / &z[n]
            }
            PqMode::Adaptive => {
                let mut prod = ctx.one();
                for fj in &adaptive[..n] {
                    prod = prod * fj;
                }
                prod / xs[n].powf(&sqrt2)
            }
        };
        if let Some((p_prev, q_prev)) = &prev {
            let dp = ((&p - p_prev) / &p).abs();
            let dq = ((&q - q_prev) / &q).abs();
            let tail = dp.max(dq);
            if tail < tol || (orbit.capped && n == orbit.depth) {
                return Ok(PqResult {
                    p,
                    q,
                    depth: n,
                    tail_bound: tail,
                });
            }
        }
        prev = Some((p.clone(), q));
    }
    Err(Error::NoConvergence(format!(
        "p, q at {} did not settle within {} levels",
        x.to_decimal(12),
        orbit.depth
    )))
}

/// `f'(x) = sqrt2 * p(x) / q(x)` for `x > 0`, odd extension for `x < 0`,
/// and a central difference at 0 (which vanishes by symmetry).
pub fn f_prime(x: &BigReal, ctx: &PrecisionContext) -> Result<BigReal> {
    if x.is_zero() {
        return central_derivative(|t: &BigReal| f_limit(t, ctx), x, 1, ctx);
    }
    if x.is_sign_negative() {
        return Ok(-f_prime(&-x, ctx)?);
    }
    let pq = pq_limits(x, ctx)?;
    Ok(ctx.real(2).sqrt() * pq.p / pq.q)
}

/// Number of sample points past the origin for the origin derivatives.
const ORIGIN_NODES: usize = 20;

/// Taylor coefficients `[t^1]` and `[t^2]` of the degree-`m` interpolant
/// through `(i, y_i)`, `i = 0..=m`, as weights on `y_i`.
fn interpolant_weights(m: usize, power: usize) -> Vec<Rational> {
    (0..=m)
        .map(|i| {
            let mut basis = RationalPolynomial::constant(Rational::from(1));
            for k in (0..=m).filter(|&k| k != i) {
                let denom = Rational::from(i as i64 - k as i64);
                let factor = RationalPolynomial::new(vec![Rational::from(-(k as i64)), Rational::from(1)]);
                basis = basis.mul(&factor.scale(&denom.recip()));
            }
            basis.coeff(power)
        })
        .collect()
}

/// `f''(0)` or `f''''(0)`.
///
/// `f` is even, so `f(t) = g(t^2)` with `g` smooth, and
/// `f''(0) = 2 g'(0)`, `f''''(0) = 12 g''(0)`. The Taylor coefficients of
/// `g` come from an exact-weight interpolant on `s = 0, H, …, 20H`, sampled
/// only on the nonnegative side and evaluated with extra digits to absorb
/// the `H^-2` amplification.
pub fn f_deriv_origin(order: u32, ctx: &PrecisionContext) -> Result<BigReal> {
    let (power, factor) = match order {
        2 => (1, 2),
        4 => (2, 24),
        _ => return Err(Error::Domain(format!("origin derivative order must be 2 or 4, got {order}"))),
    };
    let m = ORIGIN_NODES;
    let d = f64::from(ctx.decimal_digits());
    // g has its nearest singularity about 0.08 from the origin; the
    // interpolation error behaves like (12 H)^(m - power)
    let step_digits = 1.5 + (d + 8.0) / (m as f64 - 3.0);
    let boost = (2.0 * step_digits).ceil() as u32 + 20;
    let fine = ctx.boosted(boost);
    let big_h = fine.real(10).powf(&fine.real(-step_digits));

    let weights = interpolant_weights(m, power);
    let mut acc = fine.zero();
    for (i, w) in weights.iter().enumerate() {
        let s = &big_h * fine.real(i as u32);
        let y = f_limit(&s.sqrt(), &fine)?;
        acc = acc + y * fine.real(w);
    }
    let coeff = acc / big_h.powi(power as i32);
    Ok(ctx.real((coeff * factor).as_float()))
}
