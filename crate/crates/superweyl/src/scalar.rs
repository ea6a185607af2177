//! Laurent polynomials in ħ over Gaussian rationals (exact) or complex doubles (numeric).

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Coefficient field of a Laurent scalar.
pub trait Coeff: Clone + fmt::Debug + PartialEq + Send + Sync + 'static {
    /// Whether arithmetic is free of rounding.
    const EXACT: bool;
    fn zero() -> Self;
    fn one() -> Self;
    fn i() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn from_ratio(n: i64, d: i64) -> Self;
    fn from_rational(q: &BigRational) -> Self;
    fn inv(&self) -> Option<Self>;
    /// Square root when it exists in the field (exact: perfect squares of non-negative rationals).
    fn sqrt(&self) -> Option<Self>;
    fn to_c64(&self) -> Complex64;
    fn fmt_coeff(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result;
}

/// Complex number with arbitrary-precision rational parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GaussRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRational { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        GaussRational {
            re,
            im: BigRational::zero(),
        }
    }
}

fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    if &(&n * &n) == q.numer() && &(&d * &d) == q.denom() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

fn fmt_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl Coeff for GaussRational {
    const EXACT: bool = true;

    fn zero() -> Self {
        GaussRational::real(BigRational::zero())
    }
    fn one() -> Self {
        GaussRational::real(BigRational::one())
    }
    fn i() -> Self {
        GaussRational::new(BigRational::zero(), BigRational::one())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn add(&self, o: &Self) -> Self {
        GaussRational::new(&self.re + &o.re, &self.im + &o.im)
    }
    fn sub(&self, o: &Self) -> Self {
        GaussRational::new(&self.re - &o.re, &self.im - &o.im)
    }
    fn mul(&self, o: &Self) -> Self {
        if self.im.is_zero() && o.im.is_zero() {
            return GaussRational::real(&self.re * &o.re);
        }
        GaussRational::new(&self.re * &o.re - &self.im * &o.im, &self.re * &o.im + &self.im * &o.re)
    }
    fn neg(&self) -> Self {
        GaussRational::new(-&self.re, -&self.im)
    }
    fn from_ratio(n: i64, d: i64) -> Self {
        GaussRational::real(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }
    fn from_rational(q: &BigRational) -> Self {
        GaussRational::real(q.clone())
    }
    fn inv(&self) -> Option<Self> {
        let norm = &self.re * &self.re + &self.im * &self.im;
        if norm.is_zero() {
            return None;
        }
        Some(GaussRational::new(&self.re / &norm, -&self.im / &norm))
    }
    fn sqrt(&self) -> Option<Self> {
        if !self.im.is_zero() {
            return None;
        }
        rational_sqrt(&self.re).map(GaussRational::real)
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
    fn fmt_coeff(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "({})", fmt_rational(&self.re)),
            (true, false) => write!(f, "({} i)", fmt_rational(&self.im)),
            (false, false) => {
                let sign = if self.im.is_negative() { "-" } else { "+" };
                write!(
                    f,
                    "({} {sign} {} i)",
                    fmt_rational(&self.re),
                    fmt_rational(&self.im.abs())
                )
            }
        }
    }
}

impl Coeff for Complex64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn i() -> Self {
        Complex64::new(0.0, 1.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_ratio(n: i64, d: i64) -> Self {
        Complex64::new(n as f64 / d as f64, 0.0)
    }
    fn from_rational(q: &BigRational) -> Self {
        Complex64::new(q.to_f64().unwrap_or(f64::NAN), 0.0)
    }
    fn inv(&self) -> Option<Self> {
        if Coeff::is_zero(self) {
            None
        } else {
            Some(Complex64::new(1.0, 0.0) / self)
        }
    }
    fn sqrt(&self) -> Option<Self> {
        Some(Complex64::sqrt(*self))
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn fmt_coeff(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {} i)", self.re, self.im)
    }
}

/// Laurent polynomial Σ c_k ħ^k with no stored zero coefficients, sorted by k.
#[derive(Clone, PartialEq)]
pub struct Laurent<C: Coeff> {
    terms: Vec<(i32, C)>,
}

/// Exact scalar: Gaussian-rational coefficients.
pub type ExactScalar = Laurent<GaussRational>;
/// Numeric scalar: complex-double coefficients.
pub type NumericScalar = Laurent<Complex64>;

impl<C: Coeff> Laurent<C> {
    pub fn zero() -> Self {
        Laurent { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    pub fn i() -> Self {
        Self::constant(C::i())
    }

    pub fn constant(c: C) -> Self {
        Self::monomial(c, 0)
    }

    pub fn monomial(c: C, k: i32) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            Laurent { terms: vec![(k, c)] }
        }
    }

    /// ħ^k.
    pub fn hbar(k: i32) -> Self {
        Self::monomial(C::one(), k)
    }

    pub fn from_i64(v: i64) -> Self {
        Self::constant(C::from_ratio(v, 1))
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        Self::constant(C::from_ratio(n, d))
    }

    pub fn from_rational(q: &BigRational) -> Self {
        Self::constant(C::from_rational(q))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0 == 0 && self.terms[0].1 == C::one()
    }

    /// Coefficient of ħ^k.
    pub fn coeff(&self, k: i32) -> C {
        self.terms
            .iter()
            .find(|(e, _)| *e == k)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(C::zero)
    }

    pub fn terms(&self) -> &[(i32, C)] {
        &self.terms
    }

    pub fn min_degree(&self) -> Option<i32> {
        self.terms.first().map(|t| t.0)
    }

    pub fn max_degree(&self) -> Option<i32> {
        self.terms.last().map(|t| t.0)
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Laurent {
            terms: self
                .terms
                .iter()
                .map(|(k, a)| (*k, a.mul(c)))
                .filter(|(_, a)| !a.is_zero())
                .collect(),
        }
    }

    /// Multiplies by ħ^k.
    pub fn shift(&self, k: i32) -> Self {
        Laurent {
            terms: self.terms.iter().map(|(e, c)| (e + k, c.clone())).collect(),
        }
    }

    /// Inverse; only monomials c·ħ^k are invertible.
    pub fn inv(&self) -> Option<Self> {
        match self.terms.as_slice() {
            [(k, c)] => c.inv().map(|ci| Laurent { terms: vec![(-k, ci)] }),
            _ => None,
        }
    }

    /// Square root of an ħ-free constant, when the coefficient field has it.
    pub fn sqrt(&self) -> Option<Self> {
        match self.terms.as_slice() {
            [] => Some(Self::zero()),
            [(0, c)] => c.sqrt().map(Self::constant),
            _ => None,
        }
    }

    /// Integer power; negative powers need an invertible monomial.
    pub fn powi(&self, k: i32) -> Option<Self> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut acc = Self::one();
        for _ in 0..k.unsigned_abs() {
            acc = &acc * &base;
        }
        Some(acc)
    }

    /// Value at a numeric ħ.
    pub fn eval_hbar(&self, hbar: f64) -> Complex64 {
        self.terms.iter().map(|(k, c)| c.to_c64() * hbar.powi(*k)).sum()
    }

    pub fn to_numeric(&self) -> NumericScalar {
        Laurent {
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (*k, c.to_c64()))
                .filter(|(_, c)| !Coeff::is_zero(c))
                .collect(),
        }
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.to_c64().norm()).fold(0.0, f64::max)
    }

    /// Equality up to `tol` relative to the larger operand (exact types compare exactly).
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if C::EXACT {
            return self == other;
        }
        let scale = self.max_abs().max(other.max_abs()).max(1.0);
        (self - other).max_abs() <= tol * scale
    }

    fn from_sorted(terms: Vec<(i32, C)>) -> Self {
        Laurent {
            terms: terms.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    fn merge(&self, other: &Self, negate: bool) -> Self {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &other.terms);
        while i < a.len() || j < b.len() {
            if j >= b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push(a[i].clone());
                i += 1;
            } else if i >= a.len() || b[j].0 < a[i].0 {
                let c = if negate { b[j].1.neg() } else { b[j].1.clone() };
                out.push((b[j].0, c));
                j += 1;
            } else {
                let c = if negate {
                    a[i].1.sub(&b[j].1)
                } else {
                    a[i].1.add(&b[j].1)
                };
                out.push((a[i].0, c));
                i += 1;
                j += 1;
            }
        }
        Self::from_sorted(out)
    }

    fn product(&self, other: &Self) -> Self {
        match (self.terms.as_slice(), other.terms.as_slice()) {
            ([], _) | (_, []) => Self::zero(),
            ([(k, c)], _) => Laurent {
                terms: other
                    .terms
                    .iter()
                    .map(|(e, d)| (e + k, c.mul(d)))
                    .filter(|(_, d)| !d.is_zero())
                    .collect(),
            },
            (_, [(k, c)]) => Laurent {
                terms: self
                    .terms
                    .iter()
                    .map(|(e, d)| (e + k, d.mul(c)))
                    .filter(|(_, d)| !d.is_zero())
                    .collect(),
            },
            (a, b) => {
                let lo = a[0].0 + b[0].0;
                let hi = a[a.len() - 1].0 + b[b.len() - 1].0;
                let mut dense: Vec<C> = vec![C::zero(); (hi - lo + 1) as usize];
                for (ea, ca) in a {
                    for (eb, cb) in b {
                        let slot = &mut dense[(ea + eb - lo) as usize];
                        *slot = slot.add(&ca.mul(cb));
                    }
                }
                Self::from_sorted(dense.into_iter().enumerate().map(|(i, c)| (lo + i as i32, c)).collect())
            }
        }
    }
}

impl NumericScalar {
    pub fn from_f64(v: f64) -> Self {
        Self::constant(Complex64::new(v, 0.0))
    }

    pub fn from_c64(v: Complex64) -> Self {
        Self::constant(v)
    }
}

impl<C: Coeff> Default for Laurent<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Coeff> fmt::Debug for Laurent<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<C: Coeff> fmt::Display for Laurent<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (k, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            c.fmt_coeff(f)?;
            if *k != 0 {
                write!(f, " hbar^{k}")?;
            }
        }
        Ok(())
    }
}

impl<'a, C: Coeff> Add<&'a Laurent<C>> for &'a Laurent<C> {
    type Output = Laurent<C>;
    fn add(self, o: &Laurent<C>) -> Laurent<C> {
        self.merge(o, false)
    }
}

impl<'a, C: Coeff> Sub<&'a Laurent<C>> for &'a Laurent<C> {
    type Output = Laurent<C>;
    fn sub(self, o: &Laurent<C>) -> Laurent<C> {
        self.merge(o, true)
    }
}

impl<'a, C: Coeff> Mul<&'a Laurent<C>> for &'a Laurent<C> {
    type Output = Laurent<C>;
    fn mul(self, o: &Laurent<C>) -> Laurent<C> {
        self.product(o)
    }
}

impl<C: Coeff> Neg for &Laurent<C> {
    type Output = Laurent<C>;
    fn neg(self) -> Laurent<C> {
        Laurent {
            terms: self.terms.iter().map(|(k, c)| (*k, c.neg())).collect(),
        }
    }
}

impl<C: Coeff> Add for Laurent<C> {
    type Output = Laurent<C>;
    fn add(self, o: Laurent<C>) -> Laurent<C> {
        &self + &o
    }
}

impl<C: Coeff> Sub for Laurent<C> {
    type Output = Laurent<C>;
    fn sub(self, o: Laurent<C>) -> Laurent<C> {
        &self - &o
    }
}

impl<C: Coeff> Mul for Laurent<C> {
    type Output = Laurent<C>;
    fn mul(self, o: Laurent<C>) -> Laurent<C> {
        &self * &o
    }
}

impl<C: Coeff> Neg for Laurent<C> {
    type Output = Laurent<C>;
    fn neg(self) -> Laurent<C> {
        -&self
    }
}

impl<C: Coeff> AddAssign<&Laurent<C>> for Laurent<C> {
    fn add_assign(&mut self, o: &Laurent<C>) {
        *self = &*self + o;
    }
}

impl<C: Coeff> SubAssign<&Laurent<C>> for Laurent<C> {
    fn sub_assign(&mut self, o: &Laurent<C>) {
        *self = &*self - o;
    }
}

/// Best rational approximation of `x` with denominator at most `max_den`,
/// accepted only if it reproduces `x` to `tol` relative.
pub fn rational_approx(x: f64, max_den: i64, tol: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    let mut y = x.abs();
    for _ in 0..64 {
        let a = y.floor();
        if a > 1e15 {
            break;
        }
        let a = a as i128;
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        if q2 > max_den as i128 {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = y - a as f64;
        if (p1 as f64 / q1 as f64 - x.abs()).abs() <= tol * x.abs().max(1.0) || frac == 0.0 {
            break;
        }
        y = 1.0 / frac;
    }
    if q1 == 0 {
        return None;
    }
    let value = p1 as f64 / q1 as f64;
    if (value - x.abs()).abs() > tol * x.abs().max(1.0) {
        return None;
    }
    let sign = if x < 0.0 { -1 } else { 1 };
    Some(BigRational::new(BigInt::from(sign * p1), BigInt::from(q1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> ExactScalar {
        ExactScalar::from_ratio(n, d)
    }

    #[test]
    fn imaginary_unit_squares_to_minus_one() {
        let i = ExactScalar::i();
        assert_eq!(&i * &i, q(-1, 1));
    }

    #[test]
    fn laurent_product_and_inverse() {
        let a = &q(1, 2) + &ExactScalar::hbar(-1);
        let b = &q(2, 1) - &ExactScalar::hbar(1);
        let p = &a * &b;
        // (1/2 + ħ⁻¹)(2 − ħ) = 2ħ⁻¹ + 1 − 1 − ħ/2
        assert_eq!(p, &q(2, 1) * &ExactScalar::hbar(-1) - &q(1, 2) * &ExactScalar::hbar(1));
        let m = &ExactScalar::i() * &ExactScalar::hbar(3);
        assert!((&m * &m.inv().unwrap()).is_one());
        assert!(a.inv().is_none());
    }

    #[test]
    fn exact_square_roots() {
        assert_eq!(q(36, 1).sqrt(), Some(q(6, 1)));
        assert_eq!(q(9, 4).sqrt(), Some(q(3, 2)));
        assert!(q(2, 1).sqrt().is_none());
        assert!(q(-4, 1).sqrt().is_none());
    }

    #[test]
    fn display_format() {
        let s = &(&q(1, 2) + &(&ExactScalar::i() * &q(-3, 4))) * &ExactScalar::hbar(2);
        assert_eq!(s.to_string(), "(1/2 - 3/4 i) hbar^2");
    }

    #[test]
    fn continued_fraction_rounding() {
        assert_eq!(
            rational_approx(0.75, 1000, 1e-12),
            Some(BigRational::new(3.into(), 4.into()))
        );
        assert_eq!(
            rational_approx(-1.0 + 1e-16, 1000, 1e-12),
            Some(BigRational::from_integer((-1).into()))
        );
        assert_eq!(
            rational_approx(1.0 / 3.0, 1000, 1e-12),
            Some(BigRational::new(1.into(), 3.into()))
        );
        assert!(rational_approx(std::f64::consts::PI, 1000, 1e-12).is_none());
    }
}
