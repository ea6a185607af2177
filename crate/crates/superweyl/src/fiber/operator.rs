use std::fmt;
use std::sync::Arc;

use crate::grassmann::{GeneratorSet, Multivector, Parity};
use crate::scalar::{Coeff, Laurent};

/// Endomorphism of Λ(ξ¹..ξⁿ) as a 2ⁿ×2ⁿ matrix; entry (i, j) maps monomial j to monomial i.
#[derive(Clone, PartialEq)]
pub struct FiberOperator<C: Coeff> {
    n: usize,
    entries: Vec<Laurent<C>>,
}

impl<C: Coeff> FiberOperator<C> {
    pub fn zero(n: usize) -> Self {
        FiberOperator {
            n,
            entries: vec![Laurent::zero(); 1 << (2 * n)],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n);
        for i in 0..m.dim() {
            m.set(i, i, Laurent::one());
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Laurent<C>) -> Self {
        let dim = 1 << n;
        FiberOperator {
            n,
            entries: (0..dim * dim).map(|k| f(k / dim, k % dim)).collect(),
        }
    }

    /// Matrix of a linear map given by its action on basis monomials of `lambda`.
    pub fn from_linear_map(lambda: &Arc<GeneratorSet>, f: impl Fn(&Multivector<C>) -> Multivector<C>) -> Self {
        let n = lambda.len();
        let mut m = Self::zero(n);
        for j in 0..m.dim() {
            let image = f(&Multivector::monomial(lambda, j as u64, Laurent::one()));
            for (i, c) in image.terms() {
                m.set(*i as usize, j, c.clone());
            }
        }
        m
    }

    /// (−1)^P: +1 on even monomials, −1 on odd ones.
    pub fn parity_operator(n: usize) -> Self {
        Self::from_fn(n, |i, j| {
            if i != j {
                Laurent::zero()
            } else if (i as u64).count_ones().is_multiple_of(2) {
                Laurent::one()
            } else {
                -Laurent::<C>::one()
            }
        })
    }

    /// Left multiplication by ξ^k (0-based).
    pub fn xi_hat(lambda: &Arc<GeneratorSet>, k: usize) -> Self {
        let g = Multivector::generator(lambda, k);
        Self::from_linear_map(lambda, |u| &g * u)
    }

    /// Left derivative ∂/∂ξ^k (0-based).
    pub fn d_hat(lambda: &Arc<GeneratorSet>, k: usize) -> Self {
        Self::from_linear_map(lambda, |u| u.left_derivative(k))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Laurent<C> {
        &self.entries[i * self.dim() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Laurent<C>) {
        let d = self.dim();
        self.entries[i * d + j] = v;
    }

    pub fn entries(&self) -> &[Laurent<C>] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Laurent::is_zero)
    }

    /// Parity of a homogeneous operator, `None` when it mixes parities. Zero counts as even.
    pub fn parity(&self) -> Option<Parity> {
        let (even, odd) = self.split_parity();
        match (even.is_zero(), odd.is_zero()) {
            (_, true) => Some(Parity::Even),
            (true, false) => Some(Parity::Odd),
            (false, false) => None,
        }
    }

    /// (even part, odd part).
    pub fn split_parity(&self) -> (Self, Self) {
        let d = self.dim();
        let mut even = Self::zero(self.n);
        let mut odd = Self::zero(self.n);
        for i in 0..d {
            for j in 0..d {
                let v = self.get(i, j);
                if v.is_zero() {
                    continue;
                }
                if ((i ^ j) as u64).count_ones().is_multiple_of(2) {
                    even.set(i, j, v.clone());
                } else {
                    odd.set(i, j, v.clone());
                }
            }
        }
        (even, odd)
    }

    pub fn scale(&self, s: &Laurent<C>) -> Self {
        FiberOperator {
            n: self.n,
            entries: self.entries.iter().map(|e| e * s).collect(),
        }
    }

    pub fn trace(&self) -> Laurent<C> {
        let mut acc = Laurent::zero();
        for i in 0..self.dim() {
            acc += self.get(i, i);
        }
        acc
    }

    /// Supercommutator AB − (−1)^{ÃB̃} BA for homogeneous operands.
    pub fn supercommutator(&self, other: &Self) -> Self {
        let pa = self.parity().map_or(0, Parity::bit);
        let pb = other.parity().map_or(0, Parity::bit);
        let ab = self * other;
        let ba = other * self;
        if pa * pb == 1 {
            &ab + &ba
        } else {
            &ab - &ba
        }
    }

    /// Right-linear action on a multivector whose set starts with ξ¹..ξⁿ:
    /// A(ξ^I · rest) = A(ξ^I) · rest.
    pub fn apply(&self, u: &Multivector<C>) -> Multivector<C> {
        let low = (1u64 << self.n) - 1;
        let mut out = Multivector::zero(u.set());
        let d = self.dim();
        for (m, c) in u.terms() {
            let j = (m & low) as usize;
            let rest = m & !low;
            for i in 0..d {
                let a = self.get(i, j);
                if !a.is_zero() {
                    out.add_term(i as u64 | rest, &(a * c));
                }
            }
        }
        out
    }

    /// Equality to `tol` relative (exact rings compare exactly).
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.n == other.n
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a.approx_eq(b, tol))
    }

    pub fn to_numeric(&self) -> FiberOperator<num_complex::Complex64> {
        FiberOperator {
            n: self.n,
            entries: self.entries.iter().map(Laurent::to_numeric).collect(),
        }
    }
}

impl<'a, C: Coeff> std::ops::Mul<&'a FiberOperator<C>> for &'a FiberOperator<C> {
    type Output = FiberOperator<C>;
    fn mul(self, o: &FiberOperator<C>) -> FiberOperator<C> {
        assert_eq!(self.n, o.n, "operator sizes differ");
        let d = self.dim();
        let mut out = FiberOperator::zero(self.n);
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    let b = o.get(k, j);
                    if !b.is_zero() {
                        out.entries[i * d + j] += &(a * b);
                    }
                }
            }
        }
        out
    }
}

impl<'a, C: Coeff> std::ops::Add<&'a FiberOperator<C>> for &'a FiberOperator<C> {
    type Output = FiberOperator<C>;
    fn add(self, o: &FiberOperator<C>) -> FiberOperator<C> {
        assert_eq!(self.n, o.n, "operator sizes differ");
        FiberOperator {
            n: self.n,
            entries: self.entries.iter().zip(&o.entries).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a, C: Coeff> std::ops::Sub<&'a FiberOperator<C>> for &'a FiberOperator<C> {
    type Output = FiberOperator<C>;
    fn sub(self, o: &FiberOperator<C>) -> FiberOperator<C> {
        assert_eq!(self.n, o.n, "operator sizes differ");
        FiberOperator {
            n: self.n,
            entries: self.entries.iter().zip(&o.entries).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<C: Coeff> fmt::Debug for FiberOperator<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "FiberOperator(n = {}) [", self.n)?;
        for i in 0..self.dim() {
            let row: Vec<String> = (0..self.dim()).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}
