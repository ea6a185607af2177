#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use superweyl::expr::{Expr, Func};
use superweyl::geometry::ManifoldSpec;
use superweyl::grassmann::{pfaffian, GeneratorSet, Multivector, Parity};
use superweyl::linalg;
use superweyl::random;
use superweyl::scalar::{ExactScalar, GaussRational};

pub const CASES: u32 = 512;

pub fn spec(name: &str) -> ManifoldSpec {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "specs", &format!("{name}.json")]
        .iter()
        .collect();
    ManifoldSpec::load(path).unwrap()
}

// ---- expressions ----

/// Smooth expressions in x, y without domain restrictions on the reals.
pub fn expr_strategy() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        Just(Expr::var("x")),
        Just(Expr::var("y")),
        (-3i32..=3).prop_map(|k| Expr::num(f64::from(k))),
        Just(Expr::pi()),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            inner.clone().prop_map(|a| -a),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a / (Expr::num(2.0) + b.powi(2))),
            (inner.clone(), 2i32..=3).prop_map(|(a, k)| a.powi(k)),
            inner.clone().prop_map(|a| a.sin()),
            inner.clone().prop_map(|a| a.cos()),
            inner.clone().prop_map(|a| Expr::call(Func::Exp, a.sin())),
            inner.prop_map(|a| (Expr::num(1.0) + a.powi(2)).sqrt()),
        ]
    })
}

pub fn point_strategy() -> impl Strategy<Value = (f64, f64)> {
    (-1.0..1.0f64, -1.0..1.0f64)
}

fn at(e: &Expr, x: f64, y: f64) -> f64 {
    e.eval_at(&[("x", x), ("y", y)]).expect("expression is total")
}

pub fn simplify_preserves_value(e: &Expr, (x, y): (f64, f64)) -> Result<(), TestCaseError> {
    let a = at(e, x, y);
    let b = at(&e.simplify(), x, y);
    prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()), "{e}: {a} vs {b}");
    Ok(())
}

pub fn parse_roundtrip(e: &Expr, (x, y): (f64, f64)) -> Result<(), TestCaseError> {
    let back: Expr = e
        .to_string()
        .parse()
        .map_err(|err| TestCaseError::fail(format!("{err}: {e}")))?;
    let (a, b) = (at(e, x, y), at(&back, x, y));
    prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{e}: {a} vs {b}");
    Ok(())
}

/// ∂/∂x against a fourth-order central difference.
pub fn derivative_matches_difference(e: &Expr, (x, y): (f64, f64)) -> Result<(), TestCaseError> {
    let h = 1e-3;
    let f = |t: f64| at(e, t, y);
    let fd = (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h);
    let d = at(&e.differentiate("x"), x, y);
    let scale = 1.0 + d.abs() + f(x).abs();
    prop_assert!((d - fd).abs() <= 1e-5 * scale, "{e}: {d} vs {fd}");
    Ok(())
}

// ---- Grassmann algebra ----

type Mv = Multivector<GaussRational>;

fn set(k: usize) -> Arc<GeneratorSet> {
    GeneratorSet::numbered("e", k)
}

fn mv(seed: u64, s: &Arc<GeneratorSet>) -> Mv {
    random::exact_multivector(&mut random::rng(seed), s, 0.35)
}

fn sign_of(p: Parity, q: Parity) -> ExactScalar {
    if p == Parity::Odd && q == Parity::Odd {
        -ExactScalar::one()
    } else {
        ExactScalar::one()
    }
}

pub fn associativity(seed: u64, k: usize) -> Result<(), TestCaseError> {
    let s = set(k);
    let (a, b, c) = (mv(seed, &s), mv(seed ^ 1, &s), mv(seed ^ 2, &s));
    prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
    prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
    Ok(())
}

pub fn graded_commutativity(seed: u64, k: usize) -> Result<(), TestCaseError> {
    let s = set(k);
    let (ae, ao) = mv(seed, &s).split_parity();
    let (be, bo) = mv(seed ^ 3, &s).split_parity();
    for (a, pa) in [(&ae, Parity::Even), (&ao, Parity::Odd)] {
        for (b, pb) in [(&be, Parity::Even), (&bo, Parity::Odd)] {
            prop_assert_eq!(a * b, (b * a).scale(&sign_of(pa, pb)));
        }
    }
    Ok(())
}

/// ∂(ab) = (∂a)b + (−1)^ã a ∂b for left derivatives, and the mirrored rule on the right.
pub fn leibniz(seed: u64, k: usize, g: usize) -> Result<(), TestCaseError> {
    let s = set(k);
    let g = g % k;
    let b = mv(seed ^ 5, &s);
    let (ae, ao) = mv(seed, &s).split_parity();
    for (a, pa) in [(&ae, Parity::Even), (&ao, Parity::Odd)] {
        let lhs = (a * &b).left_derivative(g);
        let rhs = &(&a.left_derivative(g) * &b) + &(a * &b.left_derivative(g)).scale(&sign_of(pa, Parity::Odd));
        prop_assert_eq!(lhs, rhs);
        let (be, bo) = b.split_parity();
        for (bb, pb) in [(&be, Parity::Even), (&bo, Parity::Odd)] {
            let lhs = (a * bb).right_derivative(g);
            let rhs = &(a * &bb.right_derivative(g)) + &(&a.right_derivative(g) * bb).scale(&sign_of(pb, Parity::Odd));
            prop_assert_eq!(lhs, rhs);
        }
    }
    Ok(())
}

/// Pf(A)² = det A for antisymmetric A; odd sizes give Pf = 0.
pub fn pfaffian_squared_is_det(seed: u64, k: usize) -> Result<(), TestCaseError> {
    let a = random::antisymmetric_matrix(&mut random::rng(seed), k);
    let pf = pfaffian(&a).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!(&pf * &pf, linalg::det(&a));
    if k % 2 == 1 {
        prop_assert!(pf.is_zero());
    }
    Ok(())
}

/// ∫ f(Aθ) Dθ = det A ∫ f(θ) Dθ.
pub fn berezin_change_of_variables(seed: u64, k: usize) -> Result<(), TestCaseError> {
    let s = set(k);
    let mut rng = random::rng(seed);
    let f = random::exact_multivector(&mut rng, &s, 0.5);
    let a = random::invertible_matrix(&mut rng, k);
    let images: Vec<Mv> = a
        .iter()
        .map(|row| Multivector::from_terms(&s, row.iter().enumerate().map(|(j, v)| (1u64 << j, v.clone()))))
        .collect();
    let g = f
        .substitute_linear(&images, &s)
        .map_err(|e| TestCaseError::fail(e.to_string()))?;
    let all: Vec<usize> = (0..k).collect();
    prop_assert_eq!(g.berezin(&all), f.berezin(&all).scale(&linalg::det(&a)));
    Ok(())
}

/// exp(a) exp(−a) = 1 for even nilpotent a.
pub fn exp_inverse(seed: u64, k: usize) -> Result<(), TestCaseError> {
    let s = set(k);
    let (even, _) = mv(seed, &s).split_parity();
    let a = even.filter(|m| m != 0);
    let e1 = a.exp_even_nilpotent().map_err(|e| TestCaseError::fail(e.to_string()))?;
    let e2 = (-&a)
        .exp_even_nilpotent()
        .map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!(&e1 * &e2, Multivector::one(&s));
    Ok(())
}
