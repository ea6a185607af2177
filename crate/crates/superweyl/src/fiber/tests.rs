use num_rational::Rational64;

use super::*;
use crate::random;
use crate::scalar::{ExactScalar, GaussRational};

type Ctx = FiberContext<GaussRational>;

fn ctx(n: usize, r: (i64, i64)) -> Ctx {
    Ctx::new(n).with_r(Rational64::new(r.0, r.1)).unwrap()
}

fn minus_i_hbar() -> ExactScalar {
    &(-ExactScalar::i()) * &ExactScalar::hbar(1)
}

const RS: [(i64, i64); 3] = [(0, 1), (1, 2), (1, 1)];

#[test]
fn generator_operators_n1() {
    let c = ctx(1, (0, 1));
    let (xs, ds) = c.generator_operators();
    let o = ExactScalar::one;
    let z = ExactScalar::zero;
    assert_eq!(
        xs[0],
        FiberOperator::from_fn(1, |i, j| if i == 1 && j == 0 { o() } else { z() })
    );
    assert_eq!(
        ds[0],
        FiberOperator::from_fn(1, |i, j| if i == 0 && j == 1 { o() } else { z() })
    );
}

#[test]
fn clifford_relations_n2() {
    let c = ctx(2, (0, 1));
    let (xs, ds) = c.generator_operators();
    for k in 0..2 {
        for l in 0..2 {
            assert!((&(&xs[k] * &xs[l]) + &(&xs[l] * &xs[k])).is_zero());
            let anti = &(&ds[k] * &xs[l]) + &(&xs[l] * &ds[k]);
            let expect = if k == l {
                FiberOperator::identity(2)
            } else {
                FiberOperator::zero(2)
            };
            assert_eq!(anti, expect);
        }
    }
}

#[test]
fn delta_reproduces() {
    for n in 1..=3 {
        let c = ctx(n, (0, 1));
        let id = FiberOperator::identity(n);
        assert_eq!(c.op_from_kernel(&c.kernel_of(&id)), id);
    }
    let c = ctx(1, (0, 1));
    // (−1)ⁿ δ(ξ−η) with n = 1
    let k = c.kernel_of(&FiberOperator::identity(1));
    assert_eq!(k, -&c.delta());
}

#[test]
fn parity_operator_kernel() {
    for n in 1..=3 {
        let c = ctx(n, (0, 1));
        let p = FiberOperator::parity_operator(n);
        // √g δ(ξ+η) = Π_{k=n..1}(ξ^k + η^k)
        let set = c.kernel_set();
        let mut expect = Multivector::one(set);
        for k in (0..n).rev() {
            expect = &expect * &(&Multivector::generator(set, k) + &Multivector::generator(set, n + k));
        }
        assert_eq!(c.kernel_of(&p), expect);
        assert_eq!(c.op_from_kernel(&expect), p);
    }
}

#[test]
fn xi_d_kernel_is_single_monomial() {
    let c = ctx(1, (0, 1));
    let (xs, ds) = c.generator_operators();
    let k = c.kernel_of(&(&xs[0] * &ds[0]));
    assert_eq!(k.len(), 1);
}

#[test]
fn kernel_roundtrip_random() {
    let mut rng = random::rng(11);
    for n in 1..=3 {
        let g: Vec<Vec<ExactScalar>> = match n {
            2 => vec![
                vec![ExactScalar::from_i64(2), ExactScalar::from_i64(1)],
                vec![ExactScalar::from_i64(1), ExactScalar::from_i64(1)],
            ],
            _ => linalg::identity(n),
        };
        let c = ctx(n, (0, 1)).with_metric(g).unwrap();
        for _ in 0..20 {
            let a = random::exact_operator(&mut rng, n, 0.4);
            assert_eq!(c.op_from_kernel(&c.kernel_of(&a)), a);
        }
    }
}

#[test]
fn kernel_compose_matches_product() {
    let mut rng = random::rng(12);
    let c = ctx(2, (0, 1));
    for _ in 0..20 {
        let a = {
            let p = rng_bit(&mut rng);
            random::exact_homogeneous_operator(&mut rng, 2, p, 0.5)
        };
        let b = random::exact_operator(&mut rng, 2, 0.5);
        let k = c.kernel_compose(&c.kernel_of(&a), &c.kernel_of(&b));
        assert_eq!(k, c.kernel_of(&(&a * &b)));
    }
    let c1 = ctx(1, (0, 1));
    let (xs, _) = c1.generator_operators();
    let kx = c1.kernel_of(&xs[0]);
    assert!(c1.kernel_compose(&kx, &kx).is_zero());
    let kid = c1.kernel_of(&FiberOperator::identity(1));
    assert_eq!(c1.kernel_compose(&kx, &kid), kx);
}

fn rng_bit(rng: &mut random::TestRng) -> u32 {
    use rand::Rng;
    rng.gen_range(0..2)
}

#[test]
fn quantize_examples_n1() {
    for r in RS {
        let c = ctx(1, r);
        let (xs, ds) = c.generator_operators();
        assert_eq!(c.quantize(&c.symbol_monomial(0)), FiberOperator::identity(1));
        assert_eq!(c.quantize(&c.xi(0)), xs[0]);
        assert_eq!(c.quantize(&c.theta(0)), ds[0].scale(&minus_i_hbar()));
        assert_eq!(c.symbol_of(&ds[0].scale(&minus_i_hbar())), c.theta(0));
    }
    let xt = |c: &Ctx| &c.xi(0) * &c.theta(0);
    let c0 = ctx(1, (0, 1));
    let (xs, ds) = c0.generator_operators();
    let xd = &xs[0] * &ds[0];
    assert_eq!(c0.quantize(&xt(&c0)), xd.scale(&minus_i_hbar()));
    let c1 = ctx(1, (1, 1));
    let expect = (&xd - &FiberOperator::identity(1)).scale(&minus_i_hbar());
    assert_eq!(c1.quantize(&xt(&c1)), expect);
}

#[test]
fn cached_maps_match_direct() {
    let mut rng = random::rng(13);
    let c = ctx(2, (1, 2));
    for _ in 0..5 {
        let f = random::exact_multivector(&mut rng, c.symbol_set(), 0.3);
        assert_eq!(c.quantize(&f), c.quantize_direct(&f));
        let a = random::exact_operator(&mut rng, 2, 0.3);
        assert_eq!(c.symbol_of(&a), c.symbol_of_direct(&a));
    }
}

#[test]
fn roundtrip_all_basis_symbols() {
    for n in 1..=3 {
        for r in RS {
            let c = ctx(n, r);
            for m in 0..1u64 << (2 * n) {
                let f = c.symbol_monomial(m);
                assert_eq!(c.symbol_of(&c.quantize(&f)), f, "n={n} r={r:?} mask={m}");
            }
        }
    }
}

#[test]
fn roundtrip_with_metric() {
    let g = vec![
        vec![ExactScalar::from_i64(5), ExactScalar::from_i64(2)],
        vec![ExactScalar::from_i64(2), ExactScalar::from_i64(1)],
    ];
    let c = ctx(2, (1, 2)).with_metric(g).unwrap();
    for m in 0..16 {
        let f = c.symbol_monomial(m);
        assert_eq!(c.symbol_of_direct(&c.quantize_direct(&f)), f);
    }
}

#[test]
fn exponential_test_formula_r0() {
    // For r = 0: σA(ξ,θ) = (A_η e^{(i/ħ)(η−ξ)θ})|_{η=ξ}.
    let mut rng = random::rng(14);
    let n = 2;
    let c = ctx(n, (0, 1));
    let set = crate::grassmann::GeneratorSet::new(["eta1", "eta2", "xi1", "xi2", "theta1", "theta2"]).unwrap();
    let ih = &ExactScalar::i() * &ExactScalar::hbar(-1);
    let mut pairing = Multivector::zero(&set);
    for a in 0..n {
        let diff = &Multivector::generator(&set, a) - &Multivector::generator(&set, n + a);
        pairing = &pairing + &(&diff * &Multivector::generator(&set, 2 * n + a));
    }
    let e = pairing.scale(&ih).exp_even_nilpotent().unwrap();
    for _ in 0..10 {
        let a = random::exact_operator(&mut rng, n, 0.4);
        let applied = a.apply(&e);
        let images: Vec<_> = (0..3 * n)
            .map(|i| match i / n {
                0 | 1 => c.xi(i % n),
                _ => c.theta(i % n),
            })
            .collect();
        let restricted = applied.substitute_linear(&images, c.symbol_set()).unwrap();
        assert_eq!(restricted, c.symbol_of(&a));
    }
}

#[test]
fn composition_unit_and_canonical_pair() {
    let c = ctx(1, (0, 1));
    let one = c.symbol_monomial(0);
    let (x, t) = (c.xi(0), c.theta(0));
    assert_eq!(c.compose_symbols(&one, &t), t);
    assert_eq!(c.compose_symbols(&x, &one), x);
    let comm = &c.compose_symbols(&t, &x) + &c.compose_symbols(&x, &t);
    assert_eq!(comm, Multivector::scalar(c.symbol_set(), minus_i_hbar()));
}

#[test]
fn composition_two_routes_n2() {
    for r in RS {
        let c = ctx(2, r);
        for a in 0..16 {
            for b in 0..16 {
                let (f, g) = (c.symbol_monomial(a), c.symbol_monomial(b));
                assert_eq!(c.compose_symbols(&f, &g), c.compose_brute(&f, &g), "r={r:?} {a} {b}");
            }
        }
    }
}

#[test]
fn composition_associative() {
    let mut rng = random::rng(15);
    let c = ctx(2, (1, 2));
    for _ in 0..10 {
        let f = random::exact_multivector(&mut rng, c.symbol_set(), 0.3);
        let g = random::exact_multivector(&mut rng, c.symbol_set(), 0.3);
        let h = random::exact_multivector(&mut rng, c.symbol_set(), 0.3);
        let left = c.compose_symbols(&c.compose_symbols(&f, &g), &h);
        let right = c.compose_symbols(&f, &c.compose_symbols(&g, &h));
        assert_eq!(left, right);
    }
}

/// Coefficient of ħ^k in every term.
fn hbar_part(f: &FiberSymbol<GaussRational>, k: i32) -> FiberSymbol<GaussRational> {
    let mut out = Multivector::zero(f.set());
    for (m, c) in f.terms() {
        out.add_term(*m, &ExactScalar::constant(c.coeff(k)));
    }
    out
}

#[test]
fn leading_order_is_product_and_bracket() {
    for r in RS {
        let c = ctx(2, r);
        for a in 0..16u64 {
            for b in 0..16u64 {
                let (f, g) = (c.symbol_monomial(a), c.symbol_monomial(b));
                let fg = c.compose_symbols(&f, &g);
                let gf = c.compose_symbols(&g, &f);
                assert_eq!(hbar_part(&fg, 0), &f * &g);
                let sign = if a.count_ones() % 2 == 1 && b.count_ones() % 2 == 1 {
                    -1
                } else {
                    1
                };
                let comm = &fg - &gf.scale(&ExactScalar::from_i64(sign));
                let bracket = c.poisson_bracket(&f, &g);
                assert!(hbar_part(&comm, 0).is_zero());
                assert_eq!(hbar_part(&comm, 1), bracket.scale(&(-ExactScalar::i())));
            }
        }
    }
}

#[test]
fn poisson_examples() {
    let c = ctx(2, (0, 1));
    let one = c.symbol_monomial(0);
    assert_eq!(c.poisson_bracket(&c.theta(0), &c.xi(0)), one);
    assert!(c.poisson_bracket(&c.xi(0), &c.xi(1)).is_zero());
    let xt = &c.xi(0) * &c.theta(0);
    assert_eq!(c.poisson_bracket(&xt, &c.xi(0)), c.xi(0));
}

#[test]
fn star_n2_examples() {
    let c = ctx(2, (0, 1));
    let s = c.hodge_star();
    let lam = c.lambda_set();
    let one = Multivector::one(lam);
    let top = &Multivector::generator(lam, 0) * &Multivector::generator(lam, 1);
    assert_eq!(s.apply(&one), -&top);
    assert_eq!(s.apply(&top), -&one);
    assert_eq!(&s * &s, FiberOperator::identity(2));
    assert_eq!(s.trace(), ExactScalar::zero());
}

#[test]
fn star_involution_and_inverse() {
    for n in [2usize, 4] {
        for t in [ExactScalar::one(), ExactScalar::from_ratio(3, 2)] {
            let c = Ctx::new(n).with_star_involutive(t).unwrap();
            let s = c.hodge_star_involutive().unwrap();
            assert_eq!(&s * &s, FiberOperator::identity(n));
        }
    }
    let mut rng = random::rng(16);
    for n in 2..=4 {
        let t = random::real_rational(&mut rng);
        let cc = random::real_rational(&mut rng);
        let c = Ctx::new(n).with_star(t, cc).unwrap();
        let inv = c.hodge_star_inverse_formula().unwrap();
        assert_eq!(&c.hodge_star() * &inv, FiberOperator::identity(n));
    }
    assert_eq!(
        Ctx::new(3).hodge_star_involutive().unwrap_err(),
        FiberError::StarNormalization
    );
}

#[test]
fn trace_examples() {
    let c = ctx(1, (0, 1));
    let id = FiberOperator::identity(1);
    let p = FiberOperator::parity_operator(1);
    assert!(c.supertrace_from_symbol(&c.symbol_of(&id)).is_zero());
    assert_eq!(c.graded_trace(&id, &p).unwrap(), ExactScalar::zero());
    let (xs, ds) = c.generator_operators();
    let xd = &xs[0] * &ds[0];
    assert_eq!(c.graded_trace(&xd, &p).unwrap(), ExactScalar::from_i64(-1));
    assert_eq!(c.supertrace_from_symbol(&c.symbol_of(&xd)), ExactScalar::from_i64(-1));
    assert_eq!(c.trace_from_symbol(&c.symbol_of(&xd)), ExactScalar::one());
    for n in 1..=3 {
        let c = ctx(n, (1, 2));
        let id = FiberOperator::identity(n);
        assert_eq!(c.trace_from_symbol(&c.symbol_of(&id)), ExactScalar::from_i64(1 << n));
    }
    assert_eq!(c.graded_trace(&id, &xd).unwrap_err(), FiberError::NotInvolution);
}

#[test]
fn trace_paths_agree() {
    let mut rng = random::rng(17);
    for n in 1..=3 {
        for r in RS {
            let c = ctx(n, r);
            let p = FiberOperator::parity_operator(n);
            for _ in 0..5 {
                let a = random::exact_operator(&mut rng, n, 0.5);
                let sigma = c.symbol_of(&a);
                assert_eq!(c.supertrace_from_symbol(&sigma), c.graded_trace(&a, &p).unwrap());
                assert_eq!(c.trace_from_symbol(&sigma), a.trace());
                if n == 2 {
                    let s = c.hodge_star();
                    assert_eq!(
                        c.star_trace_from_symbol(&sigma).unwrap(),
                        c.graded_trace(&a, &s).unwrap()
                    );
                }
            }
        }
    }
}

#[test]
fn weyl_trace_at_half() {
    let mut rng = random::rng(18);
    for n in 1..=3 {
        let c = ctx(n, (1, 2));
        for _ in 0..5 {
            let a = random::exact_operator(&mut rng, n, 0.5);
            let s = c.symbol_of(&a).scalar_part();
            assert_eq!(a.trace(), &s * &ExactScalar::from_i64(1 << n));
        }
    }
}

#[test]
fn supertrace_kills_supercommutators() {
    let mut rng = random::rng(19);
    let c = ctx(2, (0, 1));
    let p = FiberOperator::parity_operator(2);
    for _ in 0..10 {
        let a = {
            let p = rng_bit(&mut rng);
            random::exact_homogeneous_operator(&mut rng, 2, p, 0.5)
        };
        let b = {
            let p = rng_bit(&mut rng);
            random::exact_homogeneous_operator(&mut rng, 2, p, 0.5)
        };
        assert!(c.graded_trace(&a.supercommutator(&b), &p).unwrap().is_zero());
    }
}

#[test]
fn spin_conjugation() {
    let mut rng = random::rng(20);
    let c = ctx(2, (1, 2));
    let id = linalg::identity(2);
    let f = random::exact_multivector(&mut rng, c.symbol_set(), 0.5);
    assert_eq!(c.spin_conjugate(&f, &id).unwrap(), f);
    let lam = vec![
        vec![ExactScalar::from_i64(3), ExactScalar::zero()],
        vec![ExactScalar::zero(), ExactScalar::from_i64(3)],
    ];
    let xt = &c.xi(0) * &c.theta(0);
    assert_eq!(c.spin_conjugate(&xt, &lam).unwrap(), xt);
    for _ in 0..3 {
        let t = random::invertible_matrix(&mut rng, 2);
        let pull = c.pullback(&t).unwrap();
        let pull_inv = c.pullback(&linalg::inverse(&t).unwrap()).unwrap();
        for m in 0..16 {
            let f = c.symbol_monomial(m);
            let lhs = &(&pull * &c.quantize(&f)) * &pull_inv;
            assert_eq!(lhs, c.quantize(&c.spin_conjugate(&f, &t).unwrap()));
        }
    }
    let singular = vec![vec![ExactScalar::one(); 2]; 2];
    assert_eq!(
        c.spin_conjugate(&f, &singular).unwrap_err(),
        FiberError::SingularTransform
    );
}

#[test]
fn context_validation() {
    assert!(Ctx::new(1).with_r(Rational64::new(3, 2)).is_err());
    let bad = vec![
        vec![ExactScalar::from_i64(1), ExactScalar::from_i64(2)],
        vec![ExactScalar::from_i64(2), ExactScalar::from_i64(1)],
    ];
    assert_eq!(Ctx::new(2).with_metric(bad).unwrap_err(), FiberError::MetricNotPositive);
    let no_root = vec![
        vec![ExactScalar::from_i64(2), ExactScalar::zero()],
        vec![ExactScalar::zero(), ExactScalar::from_i64(1)],
    ];
    assert_eq!(Ctx::new(2).with_metric(no_root).unwrap_err(), FiberError::NoExactSqrt);
}

#[test]
fn selftest_passes_and_detects_fault() {
    let cfg = selftest::SelftestConfig {
        random_cases: 10,
        ..Default::default()
    };
    let report = selftest::run(&cfg).unwrap();
    assert!(report.all_passed(), "{:?}", report.first_failure());
    let faulty = selftest::run(&selftest::SelftestConfig {
        inject_fault: true,
        ..cfg
    })
    .unwrap();
    assert_eq!(faulty.first_failure().unwrap().name, "roundtrip n=1 r=0");
}
