//! Half-iterates built from `A` and `h`: `psi = exp^[1/2]`, its inverse
//! `ln^[1/2]`, and `xi`, the half-iterate of `e^x - 1`.
//!
//! `h` carries `exp` to `e^x - 1` and `A` turns `e^x - 1` into a unit shift, so
//! `A(h(psi(x))) = A(h(e^x)) - 1/2` and `A(h(ln^[1/2](x))) = A(h(x)) - 1/2`.

use std::sync::OnceLock;

use serde::Serialize;

use crate::abel::Abel;
use crate::conj::{h, h_inverse, h_prime};
use crate::error::{Error, Result};
use crate::numerics::{BigReal, PrecisionContext};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    ExpHalf,
    LnHalf,
    Xi,
}

/// A half-iterate value with the quantities it was assembled from.
#[derive(Debug, Clone)]
pub struct HalfIterateValue {
    pub x: BigReal,
    pub value: BigReal,
    pub branch: Branch,
    /// `h(e^x)` for `psi`, `h(x)` for `ln^[1/2]`, `x` for `xi`.
    pub conjugated: BigReal,
    /// The shifted Abel value handed to `A^-1`.
    pub shifted_abel: BigReal,
}

/// One cell of the special-values table.
#[derive(Debug, Clone, PartialEq)]
pub enum SpecialCell {
    Value(BigReal),
    NegInfinity,
    Undefined,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpecialRow {
    /// Symbolic form of the argument, e.g. `ln(kappa)`.
    pub label: &'static str,
    pub x: SpecialCell,
    pub exp_half: SpecialCell,
    pub ln_half: SpecialCell,
}

/// Evaluator sharing one Abel function (and its memoized `C(1)`) and a
/// memoized `kappa = psi(0)`.
#[derive(Debug)]
pub struct HalfExp {
    abel: Abel,
    kappa: OnceLock<BigReal>,
}

impl HalfExp {
    pub fn new(ctx: PrecisionContext) -> Result<Self> {
        Ok(Self::with_abel(Abel::new(ctx)?))
    }

    pub fn with_abel(abel: Abel) -> Self {
        HalfExp {
            abel,
            kappa: OnceLock::new(),
        }
    }

    pub fn abel(&self) -> &Abel {
        &self.abel
    }

    pub fn ctx(&self) -> &PrecisionContext {
        self.abel.ctx()
    }

    fn half(&self) -> BigReal {
        self.ctx().real(0.5)
    }

    fn checked_exp(&self, x: &BigReal) -> Result<BigReal> {
        let ctx = self.ctx();
        if x.to_f64() * std::f64::consts::LOG2_E > ctx.max_exponent() as f64 {
            return Err(Error::Overflow(format!(
                "e^{} exceeds the exponent ceiling 2^{}",
                x.to_decimal(12),
                ctx.max_exponent()
            )));
        }
        Ok(ctx.real(x.as_float()).exp())
    }

    /// `A(h(e^x)) - 1/2`.
    pub fn abel_shift(&self, x: &BigReal) -> Result<BigReal> {
        Ok(self.abel.a(&h(&self.checked_exp(x)?, self.ctx())?)? - self.half())
    }

    /// `h(psi(x)) = A^-1(A(h(e^x)) - 1/2)`.
    pub fn h_psi(&self, x: &BigReal) -> Result<BigReal> {
        self.abel.a_inverse(&self.abel_shift(x)?)
    }

    pub fn psi_detailed(&self, x: &BigReal) -> Result<HalfIterateValue> {
        let ctx = self.ctx();
        let conjugated = h(&self.checked_exp(x)?, ctx)?;
        let shifted_abel = self.abel.a(&conjugated)? - self.half();
        let value = h_inverse(&self.abel.a_inverse(&shifted_abel)?, ctx)?;
        Ok(HalfIterateValue {
            x: x.clone(),
            value,
            branch: Branch::ExpHalf,
            conjugated,
            shifted_abel,
        })
    }

    /// `psi(x) = exp^[1/2](x)`.
    pub fn psi(&self, x: &BigReal) -> Result<BigReal> {
        Ok(self.psi_detailed(x)?.value)
    }

    /// `kappa = psi(0)`, memoized.
    pub fn kappa(&self) -> Result<BigReal> {
        if let Some(k) = self.kappa.get() {
            return Ok(k.clone());
        }
        let k = self.psi(&self.ctx().zero())?;
        Ok(self.kappa.get_or_init(|| k).clone())
    }

    /// `ln(kappa)`, the infimum of `psi`.
    pub fn ln_kappa(&self) -> Result<BigReal> {
        Ok(self.kappa()?.ln())
    }

    pub fn ln_half_detailed(&self, x: &BigReal) -> Result<HalfIterateValue> {
        let ctx = self.ctx();
        let floor = self.ln_kappa()?;
        if !(*x > floor) {
            return Err(Error::Domain(format!(
                "ln^[1/2] needs x > ln(kappa) = {}, got {}",
                floor.to_decimal(20),
                x.to_decimal(20)
            )));
        }
        let conjugated = h(x, ctx)?;
        let shifted_abel = self.abel.a(&conjugated)? - self.half();
        let value = h_inverse(&self.abel.a_inverse(&shifted_abel)?, ctx)?;
        Ok(HalfIterateValue {
            x: x.clone(),
            value,
            branch: Branch::LnHalf,
            conjugated,
            shifted_abel,
        })
    }

    /// `ln^[1/2](x)`, the inverse of `psi`, for `x > ln(kappa)`.
    pub fn ln_half(&self, x: &BigReal) -> Result<BigReal> {
        Ok(self.ln_half_detailed(x)?.value)
    }

    pub fn xi_detailed(&self, x: &BigReal) -> Result<HalfIterateValue> {
        let shifted_abel = self.abel.a(x)? + self.half();
        let value = self.abel.a_inverse(&shifted_abel)?;
        Ok(HalfIterateValue {
            x: x.clone(),
            value,
            branch: Branch::Xi,
            conjugated: x.clone(),
            shifted_abel,
        })
    }

    /// `xi(x) = A^-1(A(x) + 1/2)`, so `xi(xi(x)) = e^x - 1`.
    pub fn xi(&self, x: &BigReal) -> Result<BigReal> {
        Ok(self.xi_detailed(x)?.value)
    }

    /// `xi'(x) = A'(x) / A'(xi(x))`.
    pub fn xi_prime(&self, x: &BigReal) -> Result<BigReal> {
        let num = self.abel.a_prime(x)?;
        let den = self.abel.a_prime(&self.xi(x)?)?;
        Ok(num / den)
    }

    /// `(A o h)'(x) = A'(h(x)) h'(x)`.
    pub fn gh_prime(&self, x: &BigReal) -> Result<BigReal> {
        let ctx = self.ctx();
        Ok(self.abel.a_prime(&h(x, ctx)?)? * h_prime(x, ctx)?)
    }

    /// The seven rows `-inf, ln(kappa), 0, kappa, 1, exp(kappa), e` with
    /// `psi` and `ln^[1/2]` at each. Each cell follows from `psi(0) = kappa`
    /// and `psi(psi(x)) = e^x`.
    pub fn special_values(&self) -> Result<Vec<SpecialRow>> {
        use SpecialCell::{NegInfinity, Undefined, Value};
        let ctx = self.ctx();
        let k = self.kappa()?;
        let ln_k = k.ln();
        let e_k = k.exp();
        let e_e_k = e_k.exp();
        Ok(vec![
            SpecialRow {
                label: "-inf",
                x: NegInfinity,
                exp_half: Value(ln_k.clone()),
                ln_half: Undefined,
            },
            SpecialRow {
                label: "ln(kappa)",
                x: Value(ln_k.clone()),
                exp_half: Value(ctx.zero()),
                ln_half: NegInfinity,
            },
            SpecialRow {
                label: "0",
                x: Value(ctx.zero()),
                exp_half: Value(k.clone()),
                ln_half: Value(ln_k),
            },
            SpecialRow {
                label: "kappa",
                x: Value(k.clone()),
                exp_half: Value(ctx.one()),
                ln_half: Value(ctx.zero()),
            },
            SpecialRow {
                label: "1",
                x: Value(ctx.one()),
                exp_half: Value(e_k.clone()),
                ln_half: Value(k),
            },
            SpecialRow {
                label: "exp(kappa)",
                x: Value(e_k.clone()),
                exp_half: Value(ctx.e()),
                ln_half: Value(ctx.one()),
            },
            SpecialRow {
                label: "e",
                x: Value(ctx.e()),
                exp_half: Value(e_e_k),
                ln_half: Value(e_k),
            },
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn agree(a: &BigReal, b: &str, digits: i64, c: &PrecisionContext) {
        let b = c.parse(b).unwrap();
        let got = a.agreement_digits(&b).unwrap_or(i64::MAX);
        assert!(got >= digits, "{} vs {} agree to {got} digits", a.to_decimal(40), b.to_decimal(40));
    }

    fn half_exp() -> HalfExp {
        HalfExp::new(PrecisionContext::new(30).unwrap()).unwrap()
    }

    #[test]
    fn psi_values() {
        let he = half_exp();
        let c = *he.ctx();
        agree(&he.kappa().unwrap(), "0.49783205633271704965233602445630390782921904427386", 30, &c);
        agree(&he.psi(&c.one()).unwrap(), "1.64515080754212070699721442598", 29, &c);
        agree(&he.psi(&c.real(-2)).unwrap(), "-0.47627409408367607737485701379126", 30, &c);
        let detail = he.psi_detailed(&c.zero()).unwrap();
        assert_eq!(detail.branch, Branch::ExpHalf);
        agree(&detail.conjugated, "1.33030160653615252706823883108", 29, &c);
    }

    #[test]
    fn ln_half_values_and_domain() {
        let he = half_exp();
        let c = *he.ctx();
        agree(&he.ln_half(&c.one()).unwrap(), "0.49783205633271704965233602445630390782921904427386", 29, &c);
        let kappa = he.kappa().unwrap();
        assert!((he.ln_half(&kappa.exp()).unwrap() - 1).abs() < c.ten_pow_neg(28));
        assert!((he.ln_half(&c.e()).unwrap() - kappa.exp()).abs() < c.ten_pow_neg(28));
        agree(&he.ln_half(&c.real(2)).unwrap(), "1.23347294727533348464410093103465477555387622396914", 29, &c);
        let floor = he.ln_kappa().unwrap();
        assert!(matches!(he.ln_half(&floor), Err(Error::Domain(_))));
        assert!(matches!(he.ln_half(&c.real(-1)), Err(Error::Domain(_))));
    }

    #[test]
    fn xi_values() {
        let he = half_exp();
        let c = *he.ctx();
        let one = c.one();
        let x1 = he.xi(&one).unwrap();
        agree(&x1, "1.2710274138899515214246518", 24, &c);
        let twice = he.xi(&x1).unwrap();
        assert!((twice - one.exp_m1()).abs() < c.ten_pow_neg(25));
        let shifted = he.abel().a_inverse(&c.real(1.5)).unwrap();
        assert!((x1.exp_m1() - shifted).abs() < c.ten_pow_neg(25));
        agree(&he.xi_prime(&one).unwrap(), "1.5634166713051621990659414", 15, &c);
    }

    #[test]
    fn special_table_relations() {
        let he = half_exp();
        let c = *he.ctx();
        let rows = he.special_values().unwrap();
        assert_eq!(rows.len(), 7);
        assert_eq!(rows[0].ln_half, SpecialCell::Undefined);
        assert_eq!(rows[1].ln_half, SpecialCell::NegInfinity);
        for row in &rows[1..] {
            let (SpecialCell::Value(x), SpecialCell::Value(want)) = (&row.x, &row.exp_half) else {
                panic!("row {} has a symbolic psi cell", row.label);
            };
            let got = he.psi(x).unwrap();
            let scale = want.abs().max(c.one());
            assert!((got - want).abs() < c.ten_pow_neg(25) * scale, "row {}", row.label);
        }
    }
}
