//! The conjugating function `h = lim h_n`, `h_n(x) = ln(1 + h_{n-1}(e^x))`,
//! its derivative and its inverse.
//!
//! `h_n(x)` unrolls to `ln(1 + ln(1 + … ln(1 + x_n)))` over the tower
//! `x_0 = x`, `x_j = e^{x_{j-1}}`. Evaluating that nest directly loses every
//! digit once `x_n` is large, so the chain is carried as offsets
//! `d_j = h_{n-j}(x_j) - x_j`, which obey
//! `d_j = ln(1 + (1 + d_{j+1}) / x_{j+1})`, `d_n = 0`.
//!
//! A tower level whose exponent would pass the context ceiling is never
//! formed. Its `ln(1 + x_L)` is `x_{L-1} + ln(1 + 1/x_L)` and the tail is
//! expanded in `t = e^{-x_{L-1}} = 1/x_L`; once `t` underflows the
//! correction is exactly zero at working precision.

use rug::Float;

use crate::error::{Error, Result};
use crate::numerics::{solve_monotone, BigReal, Bracket, PrecisionContext};

/// Default cap on the nesting depth.
pub const MAX_DEPTH: usize = 64;

/// One level of the exponential tower.
#[derive(Debug, Clone)]
pub struct TowerValue {
    pub level: usize,
    /// `x_level`, absent when it would overflow.
    pub value: Option<BigReal>,
    pub overflow: bool,
    /// `x_{level-1}`; equal to `value` at level 0.
    pub predecessor_value: BigReal,
}

#[derive(Debug, Clone)]
pub struct HLimitResult {
    pub value: BigReal,
    pub depth_used: usize,
    /// `|h_n - h_{n-1}|`, or zero once the tower has overflowed (the
    /// neglected tail is then below `e^{-x_L}`).
    pub error_estimate: BigReal,
    pub converged: bool,
}

fn overflows(pred: &BigReal, ctx: &PrecisionContext) -> bool {
    let v = pred.to_f64();
    v.is_nan() || v * std::f64::consts::LOG2_E > ctx.max_exponent() as f64
}

/// Tower levels `x_0 … x_m`, stopping at `depth` or just before the first
/// level that would overflow.
#[derive(Debug, Clone)]
struct Tower {
    xs: Vec<BigReal>,
    overflow_level: Option<usize>,
}

impl Tower {
    fn build(x: &BigReal, depth: usize, ctx: &PrecisionContext) -> Self {
        let mut xs = vec![ctx.real(x.as_float())];
        let mut overflow_level = None;
        for j in 1..=depth {
            let pred = &xs[j - 1];
            if overflows(pred, ctx) {
                overflow_level = Some(j);
                break;
            }
            let next = pred.exp();
            xs.push(next);
        }
        Tower { xs, overflow_level }
    }

    /// Offsets `d_1 … d_top` and the value `h_n(x_0)`, plus `d_0` for the
    /// derivative product.
    fn chain(&self, n: usize, ctx: &PrecisionContext) -> Chain {
        let x = &self.xs;
        if n == 0 {
            return Chain {
                value: x[0].clone(),
                offsets: vec![ctx.zero()],
            };
        }
        let (top, d_top) = match self.overflow_level {
            Some(l) if l <= n => (l - 1, overflow_offset(&x[l - 1], ctx)),
            _ => (n, ctx.zero()),
        };
        let mut offsets = vec![ctx.zero(); top + 1];
        offsets[top] = d_top;
        for j in (0..top).rev() {
            offsets[j] = ((&offsets[j + 1] + 1) / &x[j + 1]).ln_1p();
        }
        let value = if top == 0 {
            &x[0] + &offsets[0]
        } else {
            (&x[1] + &offsets[1]).ln_1p()
        };
        Chain { value, offsets }
    }
}

struct Chain {
    value: BigReal,
    offsets: Vec<BigReal>,
}

/// `ln(1 + 1/x_L)` with `1/x_L = e^{-x_{L-1}}`, to third order.
fn overflow_offset(pred: &BigReal, ctx: &PrecisionContext) -> BigReal {
    let t = BigReal::from_float(Float::with_val(ctx.bits(), -pred.as_float()).exp());
    if t.is_zero() {
        return ctx.zero();
    }
    let t2 = t.square();
    let t3 = &t2 * &t;
    t - t2 / 2 + t3 / 3
}

/// Levels `0 … n` of the tower over `x`, marking the first one that
/// overflows (levels past it are not reported).
pub fn tower(x: &BigReal, n: usize, ctx: &PrecisionContext) -> Vec<TowerValue> {
    let t = Tower::build(x, n, ctx);
    let mut out: Vec<TowerValue> = t
        .xs
        .iter()
        .enumerate()
        .map(|(level, v)| TowerValue {
            level,
            value: Some(v.clone()),
            overflow: false,
            predecessor_value: if level == 0 { v.clone() } else { t.xs[level - 1].clone() },
        })
        .collect();
    if let Some(l) = t.overflow_level {
        out.push(TowerValue {
            level: l,
            value: None,
            overflow: true,
            predecessor_value: t.xs[l - 1].clone(),
        });
    }
    out
}

/// `h_n(x)`.
pub fn h_iter(x: &BigReal, n: usize, ctx: &PrecisionContext) -> Result<BigReal> {
    if !x.is_finite() {
        return Err(Error::Domain("h needs a finite argument".into()));
    }
    Ok(Tower::build(x, n, ctx).chain(n, ctx).value)
}

fn h_tolerance(ctx: &PrecisionContext) -> BigReal {
    ctx.solver_tolerance()
}

/// `h(x)`: deepen until successive iterates agree or the tower overflows.
pub fn h_limit(x: &BigReal, ctx: &PrecisionContext) -> Result<HLimitResult> {
    h_limit_capped(x, MAX_DEPTH, ctx)
}

pub fn h_limit_capped(x: &BigReal, cap: usize, ctx: &PrecisionContext) -> Result<HLimitResult> {
    if !x.is_finite() {
        return Err(Error::Domain("h needs a finite argument".into()));
    }
    let tol = h_tolerance(ctx);
    let tower = Tower::build(x, cap, ctx);
    let mut prev = tower.chain(0, ctx).value;
    for n in 1..=cap {
        let cur = tower.chain(n, ctx).value;
        if tower.overflow_level.is_some_and(|l| l <= n) {
            return Ok(HLimitResult {
                value: cur,
                depth_used: n,
                error_estimate: ctx.zero(),
                converged: true,
            });
        }
        let diff = (&cur - &prev).abs();
        if diff < tol {
            return Ok(HLimitResult {
                value: cur,
                depth_used: n,
                error_estimate: diff,
                converged: true,
            });
        }
        prev = cur;
    }
    Err(Error::NoConvergence(format!(
        "h({}) did not settle within {cap} levels",
        x.to_decimal(12)
    )))
}

/// `h(x)` value only.
pub fn h(x: &BigReal, ctx: &PrecisionContext) -> Result<BigReal> {
    Ok(h_limit(x, ctx)?.value)
}

/// `h'(x) = prod_j exp(x_j - h(x_j)) = exp(-sum_j d_j)`, carried to the
/// overflow level so every neglected offset is below `e^{-x_L}`.
pub fn h_prime(x: &BigReal, ctx: &PrecisionContext) -> Result<BigReal> {
    if !x.is_finite() {
        return Err(Error::Domain("h needs a finite argument".into()));
    }
    let tower = Tower::build(x, MAX_DEPTH, ctx);
    let Some(l) = tower.overflow_level else {
        return Err(Error::NoConvergence(format!(
            "tower over {} did not reach the exponent ceiling within {MAX_DEPTH} levels",
            x.to_decimal(12)
        )));
    };
    let chain = tower.chain(l, ctx);
    let mut sum = ctx.zero();
    for d in &chain.offsets {
        sum = sum + d;
    }
    Ok((-sum).exp())
}

/// Infimum of `h`: `ln(1 + h(0))`, approached as `x -> -inf`.
pub fn h_infimum(ctx: &PrecisionContext) -> Result<BigReal> {
    Ok(h(&ctx.zero(), ctx)?.ln_1p())
}

/// `x` with `h(x) = y`, for `y > ln(1 + h(0))`.
pub fn h_inverse(y: &BigReal, ctx: &PrecisionContext) -> Result<BigReal> {
    let floor = h_infimum(ctx)?;
    if !(*y > floor) {
        return Err(Error::Domain(format!(
            "h^-1 needs y > ln(1 + h(0)) = {}, got {}",
            floor.to_decimal(20),
            y.to_decimal(20)
        )));
    }
    let y = ctx.real(y.as_float());
    let f = |x: &BigReal| -> Result<BigReal> { Ok(h(x, ctx)? - &y) };

    // h(x) - x lies in (0, 1) for x >= 0, so [y - 2, y + 1] is nearly tight
    // above the asymptote; below it lo walks down geometrically.
    let hi = &y + 1;
    let f_hi = f(&hi)?;
    let mut lo = &y - 2;
    let mut f_lo = f(&lo)?;
    let mut step = ctx.real(2);
    let mut walked = 0;
    while !f_lo.is_sign_negative() {
        walked += 1;
        if walked > 200 {
            return Err(Error::NoConvergence(format!(
                "no lower bracket for h^-1({})",
                y.to_decimal(20)
            )));
        }
        lo = &lo - &step;
        step = step * 2;
        f_lo = f(&lo)?;
    }
    let bracket = Bracket::from_values(lo, hi, f_lo, f_hi)?;
    let scale = y.abs().max(ctx.one());
    let tol = ctx.solver_tolerance() * scale;
    solve_monotone(f, bracket, &tol)
}
