//! Exact-rational polynomials of the power-logarithmic expansion of the
//! orbit `y_n = ln(1 + y_{n-1})`:
//!
//! ```text
//! y_n   ~ sum_{m<k} P_m(ln(n)/3 - C) * 2 / n^(m+1)
//! 2/y_n ~ n + sum_{m<k} T_{m+1}(-ln(n)/3 + C) / n^m
//! ```
//!
//! Both families are stored in the same formal variable `Y`. Note the sign
//! flip: the P-series is evaluated at `u = ln(n)/3 - C`, the T-series at `-u`.
//!
//! [`p_table`] and [`t_table`] hold the first few polynomials verbatim;
//! [`generate_p`] and [`generate_t`] re-derive them (and any number beyond)
//! by order matching in exact arithmetic.

use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rug::{Float, Rational};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Univariate polynomial in `Y` with exact rational coefficients, lowest
/// degree first. Trailing zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct RationalPolynomial {
    coeffs: Vec<Rational>,
}

impl RationalPolynomial {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| *c == 0) {
            coeffs.pop();
        }
        RationalPolynomial { coeffs }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    /// Build from `(numerator, denominator)` pairs.
    pub fn from_ratios(pairs: &[(i64, i64)]) -> Self {
        Self::new(pairs.iter().map(|&(n, d)| Rational::from((n, d))).collect())
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Coefficient of `Y^i` (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading_coefficient(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        Self::new(self.coeffs.iter().map(|c| Rational::from(c * factor)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Rational::new(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == 0 {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += Rational::from(a * b);
            }
        }
        Self::new(out)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| Rational::from(c * i as u32))
                .collect(),
        )
    }

    /// Antiderivative with zero constant term.
    pub fn integral(&self) -> Self {
        let mut out = vec![Rational::new()];
        out.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| Rational::from(c / (i as u32 + 1))),
        );
        Self::new(out)
    }

    /// `p(Y) -> p(-Y)`.
    pub fn reflect(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| if i % 2 == 1 { Rational::from(-c) } else { c.clone() })
                .collect(),
        )
    }

    pub fn eval_rational(&self, y: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.coeffs.iter().rev() {
            acc *= y;
            acc += c;
        }
        acc
    }

    /// Horner evaluation at `prec` bits.
    pub fn eval(&self, y: &Float, prec: u32) -> Float {
        let mut acc = Float::with_val(prec, 0);
        for c in self.coeffs.iter().rev() {
            acc *= y;
            acc += c;
        }
        acc
    }

    /// Coefficients as `"p/q"` strings.
    pub fn to_strings(&self) -> Vec<String> {
        self.coeffs
            .iter()
            .map(|c| format!("{}/{}", c.numer(), c.denom()))
            .collect()
    }

    pub fn from_strings<S: AsRef<str>>(items: &[S]) -> Result<Self> {
        let coeffs = items
            .iter()
            .map(|s| {
                let s = s.as_ref().trim();
                Rational::parse(s)
                    .map(Rational::from)
                    .map_err(|e| Error::Parse(format!("bad rational {s:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(coeffs))
    }
}

impl fmt::Debug for RationalPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RationalPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c == 0 {
                continue;
            }
            let sign = if *c < 0 { "-" } else { "+" };
            if first {
                if *c < 0 {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let abs = Rational::from(c.abs_ref());
            match (i, abs == 1) {
                (0, _) => write!(f, "{abs}")?,
                (1, true) => f.write_str("Y")?,
                (1, false) => write!(f, "({abs})Y")?,
                (_, true) => write!(f, "Y^{i}")?,
                (_, false) => write!(f, "({abs})Y^{i}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for RationalPolynomial {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_strings().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RationalPolynomial {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let items = Vec::<String>::deserialize(deserializer)?;
        Self::from_strings(&items).map_err(serde::de::Error::custom)
    }
}

/// Number of polynomial terms kept in a truncated series (`k >= 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeriesTruncation(usize);

impl SeriesTruncation {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidConfig("series truncation k must be at least 1".into()));
        }
        Ok(SeriesTruncation(k))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

const P_TABLE: [&[(i64, i64)]; 7] = [
    &[(1, 1)],
    &[(0, 1), (1, 1)],
    &[(1, 18), (-1, 3), (1, 1)],
    &[(-7, 270), (5, 18), (-5, 6), (1, 1)],
    &[(67, 4860), (-53, 270), (5, 6), (-13, 9), (1, 1)],
    &[(-2701, 408240), (653, 4860), (-83, 108), (101, 54), (-77, 36), (1, 1)],
    &[
        (92461, 30618000),
        (-3449, 40824),
        (89, 135),
        (-175, 81),
        (95, 27),
        (-29, 10),
        (1, 1),
    ],
];

const T_TABLE: [&[(i64, i64)]; 6] = [
    &[(0, 1), (1, 1)],
    &[(-1, 18), (-1, 3)],
    &[(7, 270), (1, 6), (1, 6)],
    &[(-13, 1215), (-29, 270), (-2, 9), (-1, 9)],
    &[(305, 81648), (11, 162), (127, 540), (7, 27), (1, 12)],
    &[
        (-3359, 3402000),
        (-767, 20412),
        (-347, 1620),
        (-2, 5),
        (-31, 108),
        (-1, 15),
    ],
];

/// The tabulated `P_m`, `0 <= m <= 6`.
pub fn p_table(m: usize) -> Result<RationalPolynomial> {
    P_TABLE
        .get(m)
        .map(|pairs| RationalPolynomial::from_ratios(pairs))
        .ok_or(Error::OutOfRange { index: m, min: 0, max: 6 })
}

/// The tabulated `T_m`, `1 <= m <= 6`.
pub fn t_table(m: usize) -> Result<RationalPolynomial> {
    m.checked_sub(1)
        .and_then(|i| T_TABLE.get(i))
        .map(|pairs| RationalPolynomial::from_ratios(pairs))
        .ok_or(Error::OutOfRange { index: m, min: 1, max: 6 })
}

fn p_cache() -> &'static Mutex<Arc<Vec<RationalPolynomial>>> {
    static CACHE: OnceLock<Mutex<Arc<Vec<RationalPolynomial>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(Arc::new(Vec::new())))
}

/// `P_0 … P_{k-1}`, shared and memoized.
pub fn generate_p_shared(k: usize) -> Arc<Vec<RationalPolynomial>> {
    let mut cache = p_cache().lock().unwrap_or_else(|e| e.into_inner());
    if cache.len() < k {
        *cache = Arc::new(derive_p(k));
    }
    if cache.len() == k {
        Arc::clone(&cache)
    } else {
        Arc::new(cache[..k].to_vec())
    }
}

/// `P_0 … P_{k-1}` re-derived by order matching.
pub fn generate_p(k: usize) -> Vec<RationalPolynomial> {
    generate_p_shared(k).as_ref().clone()
}

/// `T_1 … T_k`, from the formal reciprocal of the P-series.
///
/// With `y_n = (2/n) * sum_m P_m(u) / n^m`, `2/y_n = n * (sum_m P_m(u) ε^m)^(-1)`
/// for `ε = 1/n`. Writing the reciprocal as `sum_j c_j(u) ε^j` gives
/// `2/y_n = n + sum_{j>=1} c_j(u) / n^(j-1)`, so `T_j(Y) = c_j(-Y)`.
pub fn generate_t(k: usize) -> Vec<RationalPolynomial> {
    let p = generate_p_shared(k + 1);
    let mut c: Vec<RationalPolynomial> = vec![RationalPolynomial::constant(Rational::from(1))];
    for j in 1..=k {
        let mut acc = RationalPolynomial::zero();
        for i in 1..=j {
            acc = acc.add(&p[i].mul(&c[j - i]));
        }
        c.push(acc.scale(&Rational::from(-1)));
    }
    c.into_iter().skip(1).map(|cj| cj.reflect()).collect()
}

/// Order matching for `y_{n+1} = ln(1 + y_n)`.
///
/// With `ε = 1/n` and `u = ln(n)/3 - C`, the ansatz
/// `y_n = sum_m 2 P_m(u) ε^(m+1)` turns the recurrence into
///
/// ```text
/// sum_m 2 ε^(m+1) (1+ε)^-(m+1) P_m(u + ln(1+ε)/3)  =  ln(1 + S),   S = sum_m 2 P_m(u) ε^(m+1).
/// ```
///
/// `P_m` first enters at order `ε^(m+1)` identically on both sides. At order
/// `ε^(m+2)` it appears through `(2/3) P_m' + (2 - 2m) P_m`, and everything
/// else there involves only `P_0 … P_{m-1}`, so each order fixes one
/// polynomial. For `m = 1` the equation fixes only `P_1'`; the free constant
/// is absorbed into `C` and set to zero.
fn derive_p(k: usize) -> Vec<RationalPolynomial> {
    type Poly = RationalPolynomial;
    let mut p: Vec<Poly> = vec![Poly::constant(Rational::from(1))];
    if k <= 1 {
        p.truncate(k);
        return p;
    }
    let top = k + 1;

    // δ = ln(1+ε)/3 and its powers, as scalar series in ε up to ε^top.
    let mut delta = vec![Rational::new(); top + 1];
    for (t, d) in delta.iter_mut().enumerate().skip(1) {
        let sign = if t % 2 == 1 { 1 } else { -1 };
        *d = Rational::from((sign, 3 * t as i64));
    }
    let mut delta_pow: Vec<Vec<Rational>> = vec![vec![Rational::new(); top + 1]];
    delta_pow[0][0] = Rational::from(1);
    for i in 1..=top {
        let prev = &delta_pow[i - 1];
        let mut next = vec![Rational::new(); top + 1];
        for a in 0..=top {
            if prev[a] == 0 {
                continue;
            }
            for b in 1..=top - a {
                next[a + b] += Rational::from(&prev[a] * &delta[b]);
            }
        }
        delta_pow.push(next);
    }

    // (1+ε)^-(j+1) coefficient of ε^t: (-1)^t binom(j+t, t).
    let neg_binom = |j: usize, t: usize| -> Rational {
        let mut b = rug::Integer::from(1);
        for i in 1..=t {
            b *= (j + i) as u32;
            b /= i as u32;
        }
        if t % 2 == 1 {
            b = -b;
        }
        Rational::from(b)
    };

    // Taylor coefficients P_j^{(i)}(u)/i! for each known P_j.
    let taylor = |poly: &Poly| -> Vec<Poly> {
        let mut out = vec![poly.clone()];
        let mut d = poly.clone();
        let mut fact = Rational::from(1);
        let mut i = 1u32;
        while !d.is_zero() {
            d = d.derivative();
            fact *= i;
            out.push(d.scale(&fact.clone().recip()));
            i += 1;
        }
        out
    };
    let mut taylors: Vec<Vec<Poly>> = vec![taylor(&p[0])];

    // S_t = 2 P_{t-1}; powers[i][t] = coefficient of ε^t in S^i (i >= 2).
    let mut s: Vec<Poly> = vec![Poly::zero(); top + 1];
    s[1] = Poly::constant(Rational::from(2));
    let mut powers: Vec<Vec<Poly>> = vec![vec![Poly::zero(); top + 1]; top + 1];
    powers[2][2] = s[1].mul(&s[1]);

    let power_coeff = |powers: &Vec<Vec<Poly>>, s: &Vec<Poly>, i: usize, n: usize| -> Poly {
        let mut acc = Poly::zero();
        for a in 1..=n.saturating_sub(i - 1) {
            let lower = if i == 2 { &s[n - a] } else { &powers[i - 1][n - a] };
            if s[a].is_zero() || lower.is_zero() {
                continue;
            }
            acc = acc.add(&s[a].mul(lower));
        }
        acc
    };

    for n in 3..=top {
        let m = n - 2;
        // Left side, contributions of P_0 … P_{m-1} at ε^n.
        let mut lhs = Poly::zero();
        for (j, tj) in taylors.iter().enumerate().take(m) {
            let t = n - j - 1;
            let mut coeff = Poly::zero();
            for b in 0..=t {
                let mut q = Poly::zero();
                for (i, ti) in tj.iter().enumerate().take(b + 1) {
                    if delta_pow[i][b] != 0 {
                        q = q.add(&ti.scale(&delta_pow[i][b]));
                    }
                }
                if !q.is_zero() {
                    coeff = coeff.add(&q.scale(&neg_binom(j, t - b)));
                }
            }
            lhs = lhs.add(&coeff.scale(&Rational::from(2)));
        }
        // Right side, ln(1+S) - S at ε^n with S_{n-1} (unknown) set to zero.
        let mut rhs = Poly::zero();
        for i in 2..=n {
            powers[i][n] = power_coeff(&powers, &s, i, n);
            let sign = if i % 2 == 0 { -1 } else { 1 };
            rhs = rhs.add(&powers[i][n].scale(&Rational::from((sign, i as i64))));
        }
        let residual = lhs.sub(&rhs);

        // (2/3) P_m' + (2 - 2m) P_m = -residual
        let target = residual.scale(&Rational::from(-1));
        let pm = if m == 1 {
            target.scale(&Rational::from((3, 2))).integral()
        } else {
            let deg = target.degree().unwrap_or(0);
            let lambda = Rational::from(2 - 2 * m as i64);
            let mut a = vec![Rational::new(); deg + 2];
            for i in (0..=deg).rev() {
                let carry = &a[i + 1] * Rational::from((2 * (i as i64 + 1), 3));
                a[i] = Rational::from(&(target.coeff(i) - carry) / &lambda);
            }
            Poly::new(a)
        };

        s[n - 1] = pm.scale(&Rational::from(2));
        powers[2][n] = power_coeff(&powers, &s, 2, n);
        taylors.push(taylor(&pm));
        p.push(pm);
        if p.len() == k {
            break;
        }
    }
    p
}
