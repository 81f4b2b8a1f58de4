//! Truncated complex Laurent series about `t = 0`.
//!
//! A nonzero series is stored as `t^m (c_0 + c_1 t + ... + c_K t^K)` with
//! `c_0 != 0`. Every coefficient that is stored is justified: operations
//! never invent precision they were not given, so the number of stored
//! coefficients only shrinks along a computation (cancellation of leading
//! terms is what shrinks it).

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Default number of coefficients after the leading one.
pub const DEFAULT_TRUNCATION: usize = 32;

/// Leading coefficients at or below this magnitude are treated as zero when
/// restoring the canonical form.
pub const CANON_ABS: f64 = 1e-300;

/// A sum whose magnitude falls below this fraction of its summands is a
/// cancellation and is set to zero exactly.
pub const CANCEL_REL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("division by the zero series")]
    DivisionByZero,
    #[error("square root of a series of odd order {0}")]
    OddOrder(i64),
    #[error("evaluation at z = 0 of a series with a pole of order {0}")]
    Pole(i64),
    #[error("logarithm of the zero series")]
    LogOfZero,
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
}

/// Which square root of the leading coefficient to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SqrtBranch {
    /// Principal square root of `c_0`.
    #[default]
    Principal,
    /// Negative of the principal square root.
    Negated,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedLaurentSeries {
    order: i64,
    coeffs: Vec<C64>,
}

pub type Laurent = TruncatedLaurentSeries;

impl TruncatedLaurentSeries {
    /// Builds a series from `t^order * sum coeffs[j] t^j`, stripping leading zeros.
    pub fn new(order: i64, coeffs: Vec<C64>) -> Self {
        let lead = coeffs.iter().position(|c| c.norm() > CANON_ABS);
        match lead {
            None => Self::zero(),
            Some(j) => Self {
                order: order + j as i64,
                coeffs: coeffs[j..].to_vec(),
            },
        }
    }

    pub fn from_real(order: i64, coeffs: &[f64]) -> Self {
        Self::new(order, coeffs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// A Laurent polynomial padded with zeros to `truncation + 1` coefficients.
    pub fn polynomial(order: i64, coeffs: &[C64], truncation: usize) -> Self {
        let lead = coeffs.iter().position(|c| c.norm() > CANON_ABS);
        let Some(j) = lead else { return Self::zero() };
        let mut v: Vec<C64> = coeffs[j..].to_vec();
        v.resize(truncation + 1, C64::new(0.0, 0.0));
        v.truncate(truncation + 1);
        Self {
            order: order + j as i64,
            coeffs: v,
        }
    }

    pub fn real_polynomial(order: i64, coeffs: &[f64], truncation: usize) -> Self {
        let c: Vec<C64> = coeffs.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::polynomial(order, &c, truncation)
    }

    pub fn zero() -> Self {
        Self {
            order: 0,
            coeffs: Vec::new(),
        }
    }

    pub fn constant(c: C64, truncation: usize) -> Self {
        Self::polynomial(0, &[c], truncation)
    }

    pub fn one() -> Self {
        Self::constant(C64::new(1.0, 0.0), DEFAULT_TRUNCATION)
    }

    /// `c t^n` with the given truncation.
    pub fn monomial(c: C64, n: i64, truncation: usize) -> Self {
        Self::polynomial(n, &[c], truncation)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Exponent of the leading monomial (0 for the zero series).
    pub fn order(&self) -> i64 {
        self.order
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Number of justified coefficients after the leading one.
    pub fn truncation(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// First exponent that is not known.
    pub fn precision(&self) -> i64 {
        self.order + self.coeffs.len() as i64
    }

    pub fn leading(&self) -> C64 {
        self.coeffs.first().copied().unwrap_or_default()
    }

    /// Coefficient of `t^k`; zero outside the stored range.
    pub fn coeff(&self, k: i64) -> C64 {
        let j = k - self.order;
        if j < 0 || j as usize >= self.coeffs.len() {
            C64::new(0.0, 0.0)
        } else {
            self.coeffs[j as usize]
        }
    }

    /// Drops coefficients beyond `truncation`.
    pub fn truncated(&self, truncation: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.truncate(truncation + 1);
        Self {
            order: self.order,
            coeffs: c,
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn scale(&self, k: C64) -> Self {
        if k.norm() <= CANON_ABS {
            return Self::zero();
        }
        Self {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let lo = self.order.min(other.order);
        let hi = self.precision().min(other.precision());
        if hi <= lo {
            return Self::zero();
        }
        let mut out = Vec::with_capacity((hi - lo) as usize);
        for k in lo..hi {
            let a = self.coeff(k);
            let b = other.coeff(k);
            let s = a + b;
            let scale = a.norm().max(b.norm());
            if s.norm() <= CANCEL_REL * scale {
                out.push(C64::new(0.0, 0.0));
            } else {
                out.push(s);
            }
        }
        let r = Self::new(lo, out);
        if r.is_zero() {
            log::debug!("series sum cancelled to within its precision t^{hi}");
        }
        r
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let n = self.coeffs.len().min(other.coeffs.len());
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (i, a) in self.coeffs.iter().take(n).enumerate() {
            for (j, b) in other.coeffs.iter().take(n - i).enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(self.order + other.order, out)
    }

    /// Multiplicative inverse.
    pub fn inv(&self) -> Result<Self, SeriesError> {
        if self.is_zero() {
            return Err(SeriesError::DivisionByZero);
        }
        let c0inv = self.coeffs[0].inv();
        let n = self.coeffs.len();
        let mut g = vec![C64::new(0.0, 0.0); n];
        g[0] = c0inv;
        for k in 1..n {
            let mut acc = C64::new(0.0, 0.0);
            for j in 1..=k {
                acc += self.coeffs[j] * g[k - j];
            }
            g[k] = -acc * c0inv;
        }
        Ok(Self::new(-self.order, g))
    }

    pub fn div(&self, other: &Self) -> Result<Self, SeriesError> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn powi(&self, n: i64) -> Result<Self, SeriesError> {
        if n == 0 {
            return Ok(Self::constant(
                C64::new(1.0, 0.0),
                self.truncation()
                    .max(if self.is_zero() { DEFAULT_TRUNCATION } else { 0 }),
            ));
        }
        let base = if n < 0 { self.inv()? } else { self.clone() };
        let mut acc = base.clone();
        for _ in 1..n.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Ok(acc)
    }

    /// Formal logarithm: `-m log(1/t) + log c_0 + log(1 + sum_{j>=1} (c_j/c_0) t^j)`.
    pub fn plog(&self) -> Result<LogSeries, SeriesError> {
        if self.is_zero() {
            return Err(SeriesError::LogOfZero);
        }
        let c0 = self.coeffs[0];
        let a: Vec<C64> = self.coeffs.iter().map(|c| c / c0).collect();
        let mut b = log1p_coeffs(&a);
        b[0] = c0.ln();
        Ok(LogSeries {
            na_part: -self.order,
            analytic: b,
        })
    }

    /// Square root; the order must be even.
    pub fn sqrt(&self, branch: SqrtBranch) -> Result<Self, SeriesError> {
        if self.is_zero() {
            return Ok(Self::zero());
        }
        if self.order % 2 != 0 {
            return Err(SeriesError::OddOrder(self.order));
        }
        let c0 = self.coeffs[0];
        let a: Vec<C64> = self.coeffs.iter().map(|c| c / c0).collect();
        let r = sqrt_newton(&a);
        let mut lead = c0.sqrt();
        if branch == SqrtBranch::Negated {
            lead = -lead;
        }
        Ok(Self::new(self.order / 2, r.into_iter().map(|c| c * lead).collect()))
    }

    /// Leading `M + 1` terms `t^m (c_0 + ... + c_M t^M)`.
    pub fn lt(&self, m: usize) -> Result<Self, SeriesError> {
        if self.is_zero() {
            return Err(SeriesError::LogOfZero);
        }
        if self.coeffs.len() < m + 1 {
            return Err(SeriesError::PrecisionExhausted(format!(
                "lt_{m} needs {} coefficients, {} are justified",
                m + 1,
                self.coeffs.len()
            )));
        }
        Ok(self.truncated(m))
    }

    /// Horner evaluation of the stored truncation at `t = z`.
    pub fn eval(&self, z: C64) -> Result<C64, SeriesError> {
        if self.is_zero() {
            return Ok(C64::new(0.0, 0.0));
        }
        if z.norm() == 0.0 {
            return match self.order.cmp(&0) {
                std::cmp::Ordering::Less => Err(SeriesError::Pole(-self.order)),
                std::cmp::Ordering::Equal => Ok(self.coeffs[0]),
                std::cmp::Ordering::Greater => Ok(C64::new(0.0, 0.0)),
            };
        }
        if z.norm() >= 1.0 {
            log::warn!("evaluating a series at |z| = {} outside the unit disc", z.norm());
        }
        let mut acc = C64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        Ok(acc * z.powi(self.order as i32))
    }

    /// `sum max(|a_n|, 1[a_n != 0]) e^{-n}` over the stored terms. This is a
    /// lower bound for the norm of the untruncated series.
    pub fn hybrid_norm(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() != 0.0)
            .map(|(j, c)| c.norm().max(1.0) * (-((self.order + j as i64) as f64)).exp())
            .sum()
    }

    /// Largest coefficient difference over the exponents both series know.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.is_zero() && other.is_zero() {
            return 0.0;
        }
        let lo = if self.is_zero() {
            other.order
        } else if other.is_zero() {
            self.order
        } else {
            self.order.min(other.order)
        };
        let hi = match (self.is_zero(), other.is_zero()) {
            (true, _) => other.precision(),
            (_, true) => self.precision(),
            _ => self.precision().min(other.precision()),
        };
        (lo..hi)
            .map(|k| (self.coeff(k) - other.coeff(k)).norm())
            .fold(0.0, f64::max)
    }

    pub fn to_literal(&self) -> SeriesLiteral {
        SeriesLiteral {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
    }

    pub fn from_literal(lit: &SeriesLiteral) -> Self {
        Self::new(lit.order, lit.coeffs.iter().map(|c| C64::new(c[0], c[1])).collect())
    }
}

impl std::ops::Add for &TruncatedLaurentSeries {
    type Output = TruncatedLaurentSeries;
    fn add(self, rhs: Self) -> Self::Output {
        TruncatedLaurentSeries::add(self, rhs)
    }
}

impl std::ops::Sub for &TruncatedLaurentSeries {
    type Output = TruncatedLaurentSeries;
    fn sub(self, rhs: Self) -> Self::Output {
        TruncatedLaurentSeries::sub(self, rhs)
    }
}

impl std::ops::Mul for &TruncatedLaurentSeries {
    type Output = TruncatedLaurentSeries;
    fn mul(self, rhs: Self) -> Self::Output {
        TruncatedLaurentSeries::mul(self, rhs)
    }
}

impl std::ops::Neg for &TruncatedLaurentSeries {
    type Output = TruncatedLaurentSeries;
    fn neg(self) -> Self::Output {
        TruncatedLaurentSeries::neg(self)
    }
}

/// JSON literal `{"order": m, "coeffs": [[re, im], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesLiteral {
    pub order: i64,
    pub coeffs: Vec<[f64; 2]>,
}

/// Element `n log(1/t) + sum b_j t^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct LogSeries {
    pub na_part: i64,
    pub analytic: Vec<C64>,
}

impl LogSeries {
    pub fn zero() -> Self {
        Self {
            na_part: 0,
            analytic: Vec::new(),
        }
    }

    /// Keeps `n log(1/t) + sum_{j<=M} b_j t^j`.
    pub fn lt_prime(&self, m: usize) -> Self {
        let mut a = self.analytic.clone();
        a.truncate(m + 1);
        Self {
            na_part: self.na_part,
            analytic: a,
        }
    }

    /// Keeps only `n log(1/t)`.
    pub fn lt_prime_neg1(&self) -> Self {
        Self {
            na_part: self.na_part,
            analytic: Vec::new(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.analytic.len().max(other.analytic.len());
        let n = if self.analytic.is_empty() || other.analytic.is_empty() {
            n
        } else {
            self.analytic.len().min(other.analytic.len())
        };
        let get = |v: &[C64], j: usize| v.get(j).copied().unwrap_or_default();
        Self {
            na_part: self.na_part + other.na_part,
            analytic: (0..n)
                .map(|j| get(&self.analytic, j) + get(&other.analytic, j))
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale_int(-1)
    }

    pub fn scale_int(&self, k: i64) -> Self {
        Self {
            na_part: self.na_part * k,
            analytic: self.analytic.iter().map(|b| b * k as f64).collect(),
        }
    }

    /// `n log(1/z) + sum b_j z^j` with the principal logarithm.
    pub fn eval(&self, z: C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for b in self.analytic.iter().rev() {
            acc = acc * z + b;
        }
        acc - (self.na_part as f64) * z.ln()
    }

    /// `exp` of the series, a Laurent series of order `-na_part`.
    pub fn exp(&self) -> TruncatedLaurentSeries {
        if self.analytic.is_empty() {
            return TruncatedLaurentSeries::monomial(C64::new(1.0, 0.0), -self.na_part, 0);
        }
        TruncatedLaurentSeries::new(-self.na_part, exp_coeffs(&self.analytic))
    }

    /// Largest coefficient difference with `b_0` compared modulo `2 pi i`;
    /// infinite when the integer parts differ.
    pub fn diff_mod_2pi(&self, other: &Self) -> f64 {
        if self.na_part != other.na_part {
            return f64::INFINITY;
        }
        let n = self.analytic.len().min(other.analytic.len());
        let mut worst: f64 = 0.0;
        for j in 0..n {
            let mut d = self.analytic[j] - other.analytic[j];
            if j == 0 {
                d.im = wrap_angle(d.im);
            }
            worst = worst.max(d.norm());
        }
        worst
    }

    /// Same as [`diff_mod_2pi`](Self::diff_mod_2pi) but each coefficient
    /// difference is measured relative to `max(1, |b_j|)`.
    pub fn rel_diff_mod_2pi(&self, other: &Self) -> f64 {
        if self.na_part != other.na_part {
            return f64::INFINITY;
        }
        let n = self.analytic.len().min(other.analytic.len());
        let mut worst: f64 = 0.0;
        for j in 0..n {
            let mut d = self.analytic[j] - other.analytic[j];
            if j == 0 {
                d.im = wrap_angle(d.im);
            }
            let s = self.analytic[j].norm().max(other.analytic[j].norm()).max(1.0);
            worst = worst.max(d.norm() / s);
        }
        worst
    }
}

/// Reduces an angle to `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// Coefficients of `log(a(t))` for a power series with `a_0 = 1`; entry 0 is 0.
fn log1p_coeffs(a: &[C64]) -> Vec<C64> {
    let n = a.len();
    let mut g = vec![C64::new(0.0, 0.0); n];
    for k in 1..n {
        let mut acc = a[k] * k as f64;
        for j in 1..k {
            acc -= g[j] * (j as f64) * a[k - j];
        }
        g[k] = acc / k as f64;
    }
    g
}

/// Coefficients of `exp(b(t))`.
fn exp_coeffs(b: &[C64]) -> Vec<C64> {
    let n = b.len();
    let mut h = vec![C64::new(0.0, 0.0); n];
    h[0] = b[0].exp();
    for k in 1..n {
        let mut acc = C64::new(0.0, 0.0);
        for j in 1..=k {
            acc += b[j] * (j as f64) * h[k - j];
        }
        h[k] = acc / k as f64;
    }
    h
}

/// Power-series product truncated to `n` coefficients.
fn ps_mul(a: &[C64], b: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n];
    for (i, x) in a.iter().take(n).enumerate() {
        for (j, y) in b.iter().take(n - i).enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Power-series inverse truncated to `n` coefficients (`a_0 != 0`).
fn ps_inv(a: &[C64], n: usize) -> Vec<C64> {
    let mut g = vec![C64::new(0.0, 0.0); n];
    let c = a[0].inv();
    g[0] = c;
    for k in 1..n {
        let mut acc = C64::new(0.0, 0.0);
        for j in 1..=k.min(a.len() - 1) {
            acc += a[j] * g[k - j];
        }
        g[k] = -acc * c;
    }
    g
}

/// Square root of a power series with `a_0 = 1` by Newton iteration
/// `r <- (r + a/r)/2`, doubling the number of correct terms each step.
fn sqrt_newton(a: &[C64]) -> Vec<C64> {
    let n = a.len();
    let mut r = vec![C64::new(1.0, 0.0)];
    let mut prec = 1;
    while prec < n {
        prec = (2 * prec).min(n);
        let q = ps_mul(&a[..prec], &ps_inv(&r, prec), prec);
        let mut next = vec![C64::new(0.0, 0.0); prec];
        for k in 0..prec {
            let rk = r.get(k).copied().unwrap_or_default();
            next[k] = (rk + q[k]) * 0.5;
        }
        r = next;
    }
    r.truncate(n);
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn random_series(rng: &mut ChaCha8Rng, order: i64, k: usize) -> Laurent {
        let mut v: Vec<C64> = (0..=k)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        v[0] += C64::new(1.5, 0.0);
        Laurent::new(order, v)
    }

    #[test]
    fn mul_polynomials() {
        let f = Laurent::real_polynomial(-2, &[1.0, 1.0], 4);
        let g = Laurent::real_polynomial(1, &[2.0, -1.0], 4);
        let h = f.mul(&g);
        assert_eq!(h.order(), -1);
        let want = [2.0, 1.0, -1.0, 0.0, 0.0];
        for (k, w) in want.iter().enumerate() {
            assert!((h.coeffs()[k] - c(*w)).norm() < 1e-15);
        }
    }

    #[test]
    fn mul_by_one_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_series(&mut rng, -3, DEFAULT_TRUNCATION);
        assert!(f.mul(&Laurent::one()).max_abs_diff(&f) < 1e-15);
    }

    #[test]
    fn mul_matches_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = random_series(&mut rng, 0, 20);
        let g = random_series(&mut rng, 0, 20);
        let h = f.mul(&g);
        for n in 0..=20usize {
            let mut want = C64::new(0.0, 0.0);
            for i in 0..=n {
                want += f.coeffs()[i] * g.coeffs()[n - i];
            }
            assert!((h.coeffs()[n] - want).norm() <= 1e-12);
        }
    }

    #[test]
    fn div_examples() {
        let f = Laurent::real_polynomial(2, &[1.0, 1.0], 8);
        let g = Laurent::real_polynomial(1, &[1.0, 1.0], 8);
        let q = f.div(&g).unwrap();
        assert_eq!(q.order(), 1);
        assert!((q.coeffs()[0] - c(1.0)).norm() < 1e-15);
        assert!(q.coeffs()[1..].iter().all(|x| x.norm() < 1e-15));

        let geo = Laurent::one()
            .div(&Laurent::real_polynomial(0, &[1.0, -1.0], DEFAULT_TRUNCATION))
            .unwrap();
        assert!(geo.coeffs().iter().all(|x| (x - c(1.0)).norm() < 1e-15));
        assert_eq!(Laurent::one().div(&Laurent::zero()), Err(SeriesError::DivisionByZero));
    }

    #[test]
    fn plog_example() {
        let f = Laurent::real_polynomial(-2, &[3.0, 3.0], 10);
        let l = f.plog().unwrap();
        assert_eq!(l.na_part, 2);
        assert!((l.analytic[0] - c(3f64.ln())).norm() < 1e-15);
        for j in 1..=10usize {
            let want = if j % 2 == 1 { 1.0 } else { -1.0 } / j as f64;
            assert!((l.analytic[j] - c(want)).norm() < 1e-14);
        }
        let one = Laurent::one().plog().unwrap();
        assert_eq!(one.na_part, 0);
        assert!(one.analytic.iter().all(|b| b.norm() < 1e-16));
    }

    #[test]
    fn sqrt_examples() {
        let t2 = Laurent::real_polynomial(2, &[1.0], 8);
        let r = t2.sqrt(SqrtBranch::Principal).unwrap();
        assert_eq!(r.order(), 1);
        assert!((r.coeffs()[0] - c(1.0)).norm() < 1e-15);

        let f = Laurent::real_polynomial(0, &[1.0, 1.0], 8);
        let r = f.sqrt(SqrtBranch::Principal).unwrap();
        let want = [1.0, 0.5, -0.125, 0.0625, -0.0390625];
        for (k, w) in want.iter().enumerate() {
            assert!((r.coeffs()[k] - c(*w)).norm() < 1e-15);
        }
        let odd = Laurent::real_polynomial(1, &[1.0], 8);
        assert_eq!(odd.sqrt(SqrtBranch::Principal), Err(SeriesError::OddOrder(1)));
        let neg = f.sqrt(SqrtBranch::Negated).unwrap();
        assert!((neg.coeffs()[0] + c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn lt_truncation() {
        let f = Laurent::real_polynomial(-1, &[5.0, 1.0, 7.0, 1.0], 3);
        let g = f.lt(2).unwrap();
        assert_eq!(g.order(), -1);
        assert_eq!(g.coeffs().len(), 3);
        assert!((g.coeffs()[2] - c(7.0)).norm() == 0.0);
        assert!(matches!(f.lt(9), Err(SeriesError::PrecisionExhausted(_))));
        assert_eq!(g.lt(2).unwrap(), g);
    }

    #[test]
    fn eval_examples() {
        let t = Laurent::real_polynomial(-2, &[1.0], 4);
        let z = C64::new((-5.0f64).exp(), 0.0);
        assert!((t.eval(z).unwrap().re / 10f64.exp() - 1.0).abs() < 1e-14);
        let p = Laurent::real_polynomial(0, &[1.0, 1.0], 4);
        assert!((p.eval(c(0.1)).unwrap() - c(1.1)).norm() < 1e-15);
        assert_eq!(t.eval(c(0.0)), Err(SeriesError::Pole(2)));
        let geo = Laurent::real_polynomial(0, &[1.0; 50], 49);
        assert!((geo.eval(c(0.3)).unwrap() - c(1.0 / 0.7)).norm() < 1e-12);
    }

    #[test]
    fn hybrid_norm_examples() {
        assert_eq!(Laurent::zero().hybrid_norm(), 0.0);
        let a = Laurent::real_polynomial(-1, &[1.0], 0);
        assert!((a.hybrid_norm() - std::f64::consts::E).abs() < 1e-15);
        let b = Laurent::real_polynomial(1, &[3.0], 0);
        assert!((b.hybrid_norm() - 3.0 / std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn cancellation_raises_order() {
        let f = Laurent::real_polynomial(0, &[1.0, 2.0, 3.0], 4);
        let g = Laurent::real_polynomial(0, &[-1.0, 1.0], 4);
        let h = f.add(&g);
        assert_eq!(h.order(), 1);
        assert_eq!(h.truncation(), 3);
        assert!(f.sub(&f).is_zero());
    }

    #[test]
    fn lt_prime_ops() {
        let l = LogSeries {
            na_part: 3,
            analytic: vec![c(1.0), c(2.0), c(3.0)],
        };
        assert_eq!(l.lt_prime(1).analytic.len(), 2);
        assert_eq!(l.lt_prime(1).lt_prime_neg1(), l.lt_prime_neg1());
        assert!(l.lt_prime_neg1().analytic.is_empty());
    }

    fn arb_series(order: std::ops::Range<i64>) -> impl Strategy<Value = Laurent> {
        (order, prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 9)).prop_map(|(m, v)| {
            let mut c: Vec<C64> = v.into_iter().map(|(a, b)| C64::new(a, b)).collect();
            c[0] += C64::new(1.5, 0.0);
            Laurent::new(m, c)
        })
    }

    proptest! {
        #[test]
        fn mul_commutes_and_associates(f in arb_series(-3..3), g in arb_series(-3..3), h in arb_series(-3..3)) {
            prop_assert!(f.mul(&g).max_abs_diff(&g.mul(&f)) < 1e-11);
            let l = f.mul(&g).mul(&h);
            let r = f.mul(&g.mul(&h));
            prop_assert!(l.max_abs_diff(&r) < 1e-11 * (1.0 + l.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max)));
        }

        #[test]
        fn mul_distributes(f in arb_series(0..1), g in arb_series(0..1), h in arb_series(0..1)) {
            let l = f.mul(&g.add(&h));
            let r = f.mul(&g).add(&f.mul(&h));
            prop_assert!(l.max_abs_diff(&r) < 1e-11 * 10.0);
        }

        #[test]
        fn plog_is_additive(f in arb_series(-3..3), g in arb_series(-3..3)) {
            let lf = f.plog().unwrap();
            let lg = g.plog().unwrap();
            let lfg = f.mul(&g).plog().unwrap();
            prop_assert_eq!(lfg.na_part, lf.na_part + lg.na_part);
            prop_assert!(lfg.diff_mod_2pi(&lf.add(&lg)) < 1e-11);
        }

        #[test]
        fn lt_commutes_with_plog(f in arb_series(-3..3), g in arb_series(-3..3), m in 0usize..4) {
            let a = f.lt(m).unwrap().plog().unwrap().lt_prime(m);
            let b = f.plog().unwrap().lt_prime(m);
            prop_assert!(a.diff_mod_2pi(&b) < 1e-12);
            let lhs = f.mul(&g).lt(m).unwrap().plog().unwrap().lt_prime(m);
            let rhs = f.plog().unwrap().lt_prime(m).add(&g.plog().unwrap().lt_prime(m));
            prop_assert!(lhs.diff_mod_2pi(&rhs) < 1e-11);
        }

        #[test]
        fn lt_is_idempotent(f in arb_series(-3..3), m in 0usize..5) {
            let once = f.lt(m).unwrap();
            prop_assert_eq!(once.lt(m).unwrap(), once);
        }

        #[test]
        fn exp_inverts_plog(f in arb_series(0..1)) {
            let back = f.plog().unwrap().exp();
            prop_assert!(back.max_abs_diff(&f) < 1e-11);
        }
    }
}
