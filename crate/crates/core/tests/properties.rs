use std::sync::OnceLock;

use proptest::prelude::*;
use rug::Rational;

use demi::abel::Abel;
use demi::asympoly::RationalPolynomial;
use demi::conj::h;
use demi::halfexp::HalfExp;
use demi::numerics::{solve_monotone, Bracket};
use demi::quad::f_limit;
use demi::{BigReal, PrecisionContext};

fn ctx(d: u32) -> PrecisionContext {
    PrecisionContext::new(d).unwrap()
}

fn shared_half_exp() -> &'static HalfExp {
    static HE: OnceLock<HalfExp> = OnceLock::new();
    HE.get_or_init(|| HalfExp::new(ctx(25)).unwrap())
}

fn shared_abel() -> &'static Abel {
    shared_half_exp().abel()
}

fn poly() -> impl Strategy<Value = RationalPolynomial> {
    prop::collection::vec((-50i64..50, 1i64..20), 0..6).prop_map(|pairs| RationalPolynomial::from_ratios(&pairs))
}

fn rational() -> impl Strategy<Value = Rational> {
    (-30i64..30, 1i64..12).prop_map(|(n, d)| Rational::from((n, d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decimal_round_trip(mantissa in 1u64..u64::MAX, exp in -40i32..40, digits in prop::sample::select(vec![50u32, 120])) {
        let c = ctx(digits);
        let text = format!("{mantissa}e{exp}");
        let x = c.parse(&text).unwrap();
        let back = c.parse(&x.to_decimal(digits as usize + 5)).unwrap();
        let rel = ((&back - &x) / &x).abs();
        prop_assert!(rel < c.ten_pow_neg(i64::from(digits)));
    }

    #[test]
    fn polynomial_ring_laws(a in poly(), b in poly(), q in poly(), y in rational()) {
        prop_assert_eq!(a.add(&b), b.add(&a));
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b.add(&q)), a.mul(&b).add(&a.mul(&q)));
        prop_assert_eq!(a.add(&b).sub(&b), a.clone());
        let lhs = a.mul(&b).eval_rational(&y);
        let rhs = a.eval_rational(&y) * b.eval_rational(&y);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn derivative_undoes_integral(a in poly()) {
        prop_assert_eq!(a.integral().derivative(), a.clone());
        prop_assert_eq!(a.reflect().reflect(), a.clone());
        prop_assert_eq!(RationalPolynomial::from_strings(&a.to_strings()).unwrap(), a);
    }

    #[test]
    fn product_rule(a in poly(), b in poly()) {
        let lhs = a.mul(&b).derivative();
        let rhs = a.derivative().mul(&b).add(&a.mul(&b.derivative()));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn solver_finds_linear_roots(slope in 0.1f64..100.0, root in -50.0f64..50.0) {
        let c = ctx(40);
        let slope = c.real(slope);
        let root = c.real(root);
        let mut f = |x: &BigReal| Ok(&slope * (x - &root));
        let bracket = Bracket::new(c.real(-60), c.real(60), &mut f).unwrap();
        let found = solve_monotone(f, bracket, &c.solver_tolerance()).unwrap();
        prop_assert!((found - &root).abs() < c.ten_pow_neg(35));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn abel_increasing(a in 0.01f64..20.0, b in 0.01f64..20.0) {
        prop_assume!((a - b).abs() > 1e-6);
        let abel = shared_abel();
        let c = abel.ctx();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(abel.a(&c.real(lo)).unwrap() < abel.a(&c.real(hi)).unwrap());
    }

    #[test]
    fn abel_shift_by_one(x in 0.05f64..3.0) {
        let abel = shared_abel();
        let c = abel.ctx();
        let x = c.real(x);
        let r = abel.a(&x.exp_m1()).unwrap() - abel.a(&x).unwrap() - 1;
        prop_assert!(r.abs() < c.ten_pow_neg(20));
    }

    #[test]
    fn abel_round_trip(x in 0.01f64..30.0) {
        let abel = shared_abel();
        let c = abel.ctx();
        let x = c.real(x);
        let back = abel.a_inverse(&abel.a(&x).unwrap()).unwrap();
        prop_assert!(((back - &x) / &x).abs() < c.ten_pow_neg(20));
    }

    #[test]
    fn h_conjugates_exp(x in -20.0f64..4.0) {
        let c = ctx(30);
        let x = c.real(x);
        let lhs = h(&x.exp(), &c).unwrap();
        let rhs = h(&x, &c).unwrap().exp_m1();
        let scale = lhs.abs().max(c.one());
        prop_assert!((lhs - rhs).abs() < c.ten_pow_neg(25) * scale);
    }

    #[test]
    fn h_is_increasing(a in -30.0f64..30.0, b in -30.0f64..30.0) {
        prop_assume!((a - b).abs() > 1e-6);
        let c = ctx(30);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(h(&c.real(lo), &c).unwrap() < h(&c.real(hi), &c).unwrap());
    }

    #[test]
    fn f_is_even(x in 0.0f64..50.0) {
        let c = ctx(30);
        let x = c.real(x);
        prop_assert_eq!(f_limit(&x, &c).unwrap(), f_limit(&-&x, &c).unwrap());
    }

    #[test]
    fn f_functional_equation(x in -10.0f64..10.0) {
        let c = ctx(30);
        let x = c.real(x);
        let lhs = f_limit(&x, &c).unwrap().square() + 1;
        let rhs = f_limit(&(x.square() + 1), &c).unwrap();
        prop_assert!(((lhs - &rhs) / &rhs).abs() < c.ten_pow_neg(25));
    }

    #[test]
    fn f_between_identity_and_square(x in 0.0f64..100.0) {
        let c = ctx(30);
        let x = c.real(x);
        let fx = f_limit(&x, &c).unwrap();
        prop_assert!(fx > x);
        prop_assert!(fx < x.square() + 1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn psi_twice_is_exp(x in -4.0f64..2.5) {
        let he = shared_half_exp();
        let c = he.ctx();
        let x = c.real(x);
        let twice = he.psi(&he.psi(&x).unwrap()).unwrap();
        let want = x.exp();
        prop_assert!(((twice - &want) / &want).abs() < c.ten_pow_neg(15));
    }

    #[test]
    fn xi_twice_is_exp_m1(x in 0.1f64..2.0) {
        let he = shared_half_exp();
        let c = he.ctx();
        let x = c.real(x);
        let twice = he.xi(&he.xi(&x).unwrap()).unwrap();
        prop_assert!((twice - x.exp_m1()).abs() < c.ten_pow_neg(15));
    }
}
