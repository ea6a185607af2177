//! Quantization at a point: operators on Λ(ℝⁿ), their symbols and kernels.
//!
//! Operators are 2ⁿ×2ⁿ matrices indexed by monomial masks of ξ¹..ξⁿ. Symbols
//! live over (ξ¹..ξⁿ, θ_1..θ_n), kernels over (ξ¹..ξⁿ, η¹..ηⁿ). Internally all
//! Berezin computations run in one work algebra holding six blocks of n
//! generators: ξ, η, θ, ε and a second copy (ξ', θ') for composition.

mod calculus;
mod operator;
pub mod selftest;

use std::sync::{Arc, OnceLock};

use num_rational::Rational64;
use thiserror::Error;

use crate::grassmann::{GeneratorSet, Multivector};
use crate::linalg::{self, Matrix};
use crate::scalar::{Coeff, Laurent};

pub use operator::FiberOperator;

/// Symbol f(ξ, θ).
pub type FiberSymbol<C> = Multivector<C>;
/// Kernel k(ξ, η).
pub type FiberKernel<C> = Multivector<C>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FiberError {
    #[error("metric must be a symmetric {0}x{0} matrix")]
    MetricShape(usize),
    #[error("metric is not positive definite")]
    MetricNotPositive,
    #[error("square root of det g is not available in the scalar ring")]
    NoExactSqrt,
    #[error("ordering parameter r must lie in [0, 1]")]
    OrderingOutOfRange,
    #[error("star parameter t must be invertible")]
    StarParameter,
    #[error("involution check needs even n and C = t^(-n/2)")]
    StarNormalization,
    #[error("grading operator is not an involution")]
    NotInvolution,
    #[error("matrix T is singular")]
    SingularTransform,
    #[error("size mismatch: expected n = {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("star trace needs even n")]
    OddDimension,
}

/// Generator blocks of the work algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Block {
    Xi = 0,
    Eta = 1,
    Theta = 2,
    Eps = 3,
    Xi2 = 4,
    Theta2 = 5,
}

/// Metric, ordering parameter and star normalization at a point.
#[derive(Clone)]
pub struct FiberContext<C: Coeff> {
    n: usize,
    metric: Matrix<C>,
    sqrt_g: Laurent<C>,
    inv_sqrt_g: Laurent<C>,
    r: Rational64,
    t: Laurent<C>,
    star_c: Laurent<C>,
    lambda: Arc<GeneratorSet>,
    symbols: Arc<GeneratorSet>,
    kernels: Arc<GeneratorSet>,
    work: Arc<GeneratorSet>,
    quantize_table: OnceLock<Arc<Vec<FiberOperator<C>>>>,
    symbol_table: OnceLock<Arc<Vec<FiberSymbol<C>>>>,
    sign_fault: bool,
}

impl<C: Coeff> std::fmt::Debug for FiberContext<C> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FiberContext")
            .field("n", &self.n)
            .field("r", &self.r)
            .field("metric", &self.metric)
            .field("t", &self.t)
            .field("star_c", &self.star_c)
            .finish()
    }
}

fn names(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (1..=n).map(move |i| format!("{prefix}{i}"))
}

impl<C: Coeff> FiberContext<C> {
    /// Identity metric, r = 0, t = 1, C = 1.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1 && 6 * n <= 64, "fiber dimension out of range");
        let lambda = GeneratorSet::new(names("xi", n)).unwrap();
        let symbols = GeneratorSet::new(names("xi", n).chain(names("theta", n))).unwrap();
        let kernels = GeneratorSet::new(names("xi", n).chain(names("eta", n))).unwrap();
        let work = GeneratorSet::new(
            ["xi", "eta", "theta", "eps", "xi'", "theta'"]
                .into_iter()
                .flat_map(|p| names(p, n)),
        )
        .unwrap();
        FiberContext {
            n,
            metric: linalg::identity(n),
            sqrt_g: Laurent::one(),
            inv_sqrt_g: Laurent::one(),
            r: Rational64::from_integer(0),
            t: Laurent::one(),
            star_c: Laurent::one(),
            lambda,
            symbols,
            kernels,
            work,
            quantize_table: OnceLock::new(),
            symbol_table: OnceLock::new(),
            sign_fault: false,
        }
    }

    fn reset_caches(mut self) -> Self {
        self.quantize_table = OnceLock::new();
        self.symbol_table = OnceLock::new();
        self
    }

    /// Sets the ordering parameter r ∈ [0, 1].
    pub fn with_r(mut self, r: Rational64) -> Result<Self, FiberError> {
        if r < Rational64::from_integer(0) || r > Rational64::from_integer(1) {
            return Err(FiberError::OrderingOutOfRange);
        }
        self.r = r;
        Ok(self.reset_caches())
    }

    /// Sets g_{kl}; requires symmetry, positivity of leading minors and an exact √det g.
    pub fn with_metric(mut self, g: Matrix<C>) -> Result<Self, FiberError> {
        let n = self.n;
        if g.len() != n || !linalg::is_square(&g) {
            return Err(FiberError::MetricShape(n));
        }
        for i in 0..n {
            for j in 0..i {
                if !g[i][j].approx_eq(&g[j][i], 1e-12) {
                    return Err(FiberError::MetricShape(n));
                }
            }
        }
        for k in 1..=n {
            let lead: Matrix<C> = g[..k].iter().map(|row| row[..k].to_vec()).collect();
            let d = linalg::det(&lead);
            let ok = matches!(d.terms(), [(0, c)] if c.to_c64().re > 0.0 && c.to_c64().im == 0.0);
            if !ok {
                return Err(FiberError::MetricNotPositive);
            }
        }
        let sqrt_g = linalg::det(&g).sqrt().ok_or(FiberError::NoExactSqrt)?;
        self.inv_sqrt_g = sqrt_g.inv().ok_or(FiberError::NoExactSqrt)?;
        self.sqrt_g = sqrt_g;
        self.metric = g;
        Ok(self.reset_caches())
    }

    /// Sets the star parameters t and C.
    pub fn with_star(mut self, t: Laurent<C>, c: Laurent<C>) -> Result<Self, FiberError> {
        if t.inv().is_none() {
            return Err(FiberError::StarParameter);
        }
        self.t = t;
        self.star_c = c;
        Ok(self)
    }

    /// Sets t and the involutive normalization C = t^{−m} (n = 2m).
    pub fn with_star_involutive(self, t: Laurent<C>) -> Result<Self, FiberError> {
        if self.n % 2 == 1 {
            return Err(FiberError::StarNormalization);
        }
        let c = t.powi(-(self.n as i32 / 2)).ok_or(FiberError::StarParameter)?;
        self.with_star(t, c)
    }

    /// Negative control: flips the (−1)^{nÃ} sign on odd parts inside the symbol map.
    pub fn with_injected_sign_fault(mut self) -> Self {
        self.sign_fault = true;
        self.reset_caches()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn r(&self) -> Rational64 {
        self.r
    }

    pub fn metric(&self) -> &Matrix<C> {
        &self.metric
    }

    pub fn sqrt_g(&self) -> &Laurent<C> {
        &self.sqrt_g
    }

    pub fn t(&self) -> &Laurent<C> {
        &self.t
    }

    pub fn star_c(&self) -> &Laurent<C> {
        &self.star_c
    }

    /// Generators ξ¹..ξⁿ of Λ.
    pub fn lambda_set(&self) -> &Arc<GeneratorSet> {
        &self.lambda
    }

    /// Generators (ξ¹..ξⁿ, θ_1..θ_n) of symbols.
    pub fn symbol_set(&self) -> &Arc<GeneratorSet> {
        &self.symbols
    }

    /// Generators (ξ¹..ξⁿ, η¹..ηⁿ) of kernels.
    pub fn kernel_set(&self) -> &Arc<GeneratorSet> {
        &self.kernels
    }

    pub(crate) fn idx(&self, b: Block, a: usize) -> usize {
        b as usize * self.n + a
    }

    pub(crate) fn gen(&self, b: Block, a: usize) -> Multivector<C> {
        Multivector::generator(&self.work, self.idx(b, a))
    }

    pub(crate) fn scalar_r(&self) -> Laurent<C> {
        Laurent::from_ratio(*self.r.numer(), *self.r.denom())
    }

    /// ξ^a in a symbol.
    pub fn xi(&self, a: usize) -> FiberSymbol<C> {
        Multivector::generator(&self.symbols, a)
    }

    /// θ_a in a symbol.
    pub fn theta(&self, a: usize) -> FiberSymbol<C> {
        Multivector::generator(&self.symbols, self.n + a)
    }

    /// Symbol basis monomial with the given mask over (ξ, θ).
    pub fn symbol_monomial(&self, mask: u64) -> FiberSymbol<C> {
        Multivector::monomial(&self.symbols, mask, Laurent::one())
    }

    /// Sign (−1)^{n·Ã}.
    pub(crate) fn parity_sign(&self, op_parity: u32) -> Laurent<C> {
        if (self.n as u32 * op_parity) % 2 == 1 {
            -Laurent::<C>::one()
        } else {
            Laurent::one()
        }
    }

    /// (−iħ)ⁿ.
    pub(crate) fn minus_i_hbar_n(&self) -> Laurent<C> {
        let base = &(-Laurent::<C>::i()) * &Laurent::hbar(1);
        base.powi(self.n as i32).unwrap()
    }
}

#[cfg(test)]
mod tests;
