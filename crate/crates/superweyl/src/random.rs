//! Seeded generators for random exact test data.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fiber::FiberOperator;
use crate::grassmann::{GeneratorSet, Multivector};
use crate::linalg::{self, Matrix};
use crate::scalar::{ExactScalar, GaussRational, Laurent};

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn small_rational(rng: &mut TestRng) -> BigRational {
    let n: i64 = rng.gen_range(-4..=4);
    let d: i64 = rng.gen_range(1..=3);
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Small Gaussian rational times ħ^k with k ∈ [−1, 1]; may be zero.
pub fn exact_scalar(rng: &mut TestRng) -> ExactScalar {
    let c = GaussRational::new(small_rational(rng), small_rational(rng));
    Laurent::monomial(c, rng.gen_range(-1..=1))
}

/// Small nonzero rational integer-ish real scalar.
pub fn real_rational(rng: &mut TestRng) -> ExactScalar {
    loop {
        let q = small_rational(rng);
        if q != BigRational::from_integer(0.into()) {
            return Laurent::from_rational(&q);
        }
    }
}

/// Operator whose entries are nonzero with probability `density`.
pub fn exact_operator(rng: &mut TestRng, n: usize, density: f64) -> FiberOperator<GaussRational> {
    FiberOperator::from_fn(n, |_, _| {
        if rng.gen_bool(density) {
            exact_scalar(rng)
        } else {
            Laurent::zero()
        }
    })
}

/// Homogeneous operator of the given parity bit.
pub fn exact_homogeneous_operator(
    rng: &mut TestRng,
    n: usize,
    parity: u32,
    density: f64,
) -> FiberOperator<GaussRational> {
    let (even, odd) = exact_operator(rng, n, density).split_parity();
    if parity == 0 {
        even
    } else {
        odd
    }
}

/// Multivector whose basis coefficients are nonzero with probability `density`.
pub fn exact_multivector(rng: &mut TestRng, set: &Arc<GeneratorSet>, density: f64) -> Multivector<GaussRational> {
    let count = 1u64 << set.len();
    let mut out = Multivector::zero(set);
    for m in 0..count {
        if rng.gen_bool(density) {
            out.add_term(m, &exact_scalar(rng));
        }
    }
    out
}

/// Real rational matrix with nonzero determinant.
pub fn invertible_matrix(rng: &mut TestRng, n: usize) -> Matrix<GaussRational> {
    loop {
        let m: Matrix<GaussRational> = (0..n)
            .map(|_| (0..n).map(|_| Laurent::from_rational(&small_rational(rng))).collect())
            .collect();
        if !linalg::det(&m).is_zero() {
            return m;
        }
    }
}

/// Antisymmetric rational matrix.
pub fn antisymmetric_matrix(rng: &mut TestRng, k: usize) -> Matrix<GaussRational> {
    let mut m: Matrix<GaussRational> = linalg::identity(k);
    for i in 0..k {
        m[i][i] = Laurent::zero();
        for j in i + 1..k {
            let v = Laurent::from_rational(&small_rational(rng));
            m[j][i] = -&v;
            m[i][j] = v;
        }
    }
    m
}
