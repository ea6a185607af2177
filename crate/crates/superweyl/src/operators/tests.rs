use std::f64::consts::PI;

use num_rational::Rational64;

use super::*;
use crate::expr::Expr;
use crate::geometry::{Curvature, ManifoldSpec, MetricChart};
use crate::scalar::Laurent;

fn spec_curvature(name: &str) -> Curvature {
    let path = format!("{}/../../specs/{name}.json", env!("CARGO_MANIFEST_DIR"));
    Curvature::new(&ManifoldSpec::load(path).unwrap().charts[0]).unwrap()
}

fn flat(n: usize) -> Curvature {
    let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let metric = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| if a == b { Expr::one() } else { Expr::zero() })
                .collect()
        })
        .collect();
    Curvature::new(&MetricChart::new(&refs, &vec![(-1.0, 1.0); n], metric).unwrap()).unwrap()
}

fn e(text: &str) -> Expr {
    text.parse().unwrap()
}

fn assert_fields_close(curv: &Curvature, a: &FormField, b: &FormField, tol: f64) {
    let mut rng = crate::random::rng(11);
    for x in curv.chart().sample_points(&mut rng, 10) {
        let (va, vb) = (a.eval_at(&x).unwrap(), b.eval_at(&x).unwrap());
        for (p, q) in va.iter().zip(&vb) {
            assert!((p - q).abs() <= tol * q.abs().max(1.0), "{a} vs {b} at {x:?}");
        }
    }
}

fn coords(curv: &Curvature) -> &[String] {
    &curv.chart().coordinates
}

#[test]
fn exterior_derivative_examples() {
    let c = flat(2);
    let d = FormCalculus::new(&c).exterior_d();
    let cs = coords(&c);
    assert_eq!(
        d.apply(&FormField::function(cs, e("x1"))),
        FormField::monomial(cs, 1, Expr::one())
    );
    assert!(d.apply(&FormField::monomial(cs, 1, Expr::one())).is_zero());
    assert_eq!(
        d.apply(&FormField::monomial(cs, 2, e("x1"))),
        FormField::monomial(cs, 3, Expr::one())
    );
    // d∘d cancels at the symbolic level
    assert!(d.compose(&d).unwrap().is_empty());
}

#[test]
fn codifferential_examples() {
    let c = flat(2);
    let delta = FormCalculus::new(&c).codifferential().unwrap();
    let cs = coords(&c);
    assert_eq!(
        delta.apply(&FormField::monomial(cs, 1, e("x1"))),
        FormField::function(cs, Expr::one())
    );
    for f in ["1", "x1*x2", "sin(x2)"] {
        assert!(delta.apply(&FormField::function(cs, e(f))).is_zero());
    }
    let s2 = spec_curvature("sphere2");
    let delta = FormCalculus::new(&s2).codifferential().unwrap();
    let x = [PI / 3.0, 0.4];
    let out = delta
        .apply(&FormField::monomial(coords(&s2), 1, Expr::one()))
        .eval_at(&x)
        .unwrap();
    // (δu) = u_a^{;a} = g^{ab}(∂_b u_a − Γ^c_ba u_c) with u = ξ^th
    let p = s2.at(&x).unwrap();
    let component: f64 = (0..2)
        .flat_map(|a| (0..2).map(move |b| (a, b)))
        .map(|(a, b)| -p.ginv(a, b) * p.gamma(0, b, a))
        .sum();
    assert!((out[0] - component).abs() < 1e-12);
    assert!((out[0] - 1.0 / x[0].tan()).abs() < 1e-12);
}

#[test]
fn covariant_derivative_examples() {
    let c = flat(2);
    let calc = FormCalculus::new(&c);
    let cs = coords(&c);
    let fields = test_field_suite(cs);
    let s = Rational64::new(3, 7);
    let dx1 = calc.covariant_derivative(&[Expr::one(), Expr::zero()], s).unwrap();
    assert_eq!(dx1, FormOperator::d_x(cs, 0));
    let radial = calc
        .covariant_derivative(&[e("x1"), Expr::zero()], Rational64::from(1))
        .unwrap();
    let expected = FormOperator::term(cs, e("x1"), 0, 0, &[0]).add(&FormOperator::identity(cs));
    for u in &fields {
        assert_fields_close(&c, &radial.apply(u), &expected.apply(u), 1e-14);
    }
    let s2 = spec_curvature("sphere2");
    let calc = FormCalculus::new(&s2);
    let x = [e("sin(ph)"), e("cos(th)")];
    let plain = calc.covariant_derivative(&x, Rational64::from(0)).unwrap();
    let by_hand = calc.nabla(0).scale(&x[0]).add(&calc.nabla(1).scale(&x[1]));
    for u in test_field_suite(coords(&s2)) {
        assert_fields_close(&s2, &plain.apply(&u), &by_hand.apply(&u), 1e-12);
    }
    // div X = ∂_a X^a + Γ^a_ab X^b
    let div = calc.divergence(&x);
    let alt = crate::expr::sum((0..2).map(|a| {
        let mut t = vec![x[a].differentiate(&coords(&s2)[a])];
        t.extend((0..2).map(|b| s2.gamma(a, a, b) * &x[b]));
        crate::expr::sum(t)
    }));
    for th in [0.3, 1.2, 2.9] {
        let bind = [("th", th), ("ph", 0.8)];
        assert!((div.eval_at(&bind).unwrap() - alt.eval_at(&bind).unwrap()).abs() < 1e-12);
    }
    assert!(matches!(
        calc.covariant_derivative(&[Expr::one()], s),
        Err(OperatorError::SizeMismatch { .. })
    ));
}

#[test]
fn bochner_laplacian_examples() {
    let c = flat(3);
    let lap = FormCalculus::new(&c).bochner_laplacian().unwrap();
    let cs = coords(&c);
    let sum_dd = (0..3).fold(FormOperator::zero(cs), |acc, a| {
        acc.add(&FormOperator::term(cs, Expr::one(), 0, 0, &[a, a]))
    });
    assert_eq!(lap, sum_dd);
    assert!(lap.apply(&FormField::monomial(cs, 1, e("x1*x2"))).is_zero());

    let s2 = spec_curvature("sphere2");
    let lap = FormCalculus::new(&s2).bochner_laplacian().unwrap();
    let cs = coords(&s2);
    let f = FormField::function(cs, e("cos(th)"));
    assert_fields_close(&s2, &lap.apply(&f), &f.scale(&Expr::num(-2.0)), 1e-12);

    // on functions Δf = (1/√h) ∂_a(√h g^{ab} ∂_b f)
    for curv in [s2, spec_curvature("h2")] {
        let lap = FormCalculus::new(&curv).bochner_laplacian().unwrap();
        let cs = coords(&curv).to_vec();
        let root = curv.det().sqrt();
        for f in ["cos(th)*sin(ph)", "x^2*y", "1"] {
            let f = e(&f
                .replace("th", &cs[0])
                .replace("ph", &cs[1])
                .replace('x', &cs[0])
                .replace('y', &cs[1]));
            let lb = crate::expr::sum((0..2).flat_map(|a| {
                let (root, cs, f, curv) = (&root, &cs, &f, &curv);
                (0..2).map(move |b| (root * curv.ginv(a, b) * f.differentiate(&cs[b])).differentiate(&cs[a]))
            })) / root.clone();
            assert_fields_close(
                &curv,
                &lap.apply(&FormField::function(&cs, f)),
                &FormField::function(&cs, lb),
                1e-10,
            );
        }
    }
}

#[test]
fn hodge_laplacian_examples() {
    let c = flat(2);
    let calc = FormCalculus::new(&c);
    let boxop = calc.hodge_laplacian().unwrap();
    let lap = calc.bochner_laplacian().unwrap();
    for u in test_field_suite(coords(&c)) {
        assert_fields_close(&c, &boxop.apply(&u), &lap.apply(&u), 1e-14);
    }
    assert_eq!(calc.weitzenbock_rhs().unwrap(), lap);

    // δ = +div here, so □ agrees with Δ on functions: □cos(th) = −2cos(th)
    let s2 = spec_curvature("sphere2");
    let boxop = FormCalculus::new(&s2).hodge_laplacian().unwrap();
    let f = FormField::function(coords(&s2), e("cos(th)"));
    assert_fields_close(&s2, &boxop.apply(&f), &f.scale(&Expr::num(-2.0)), 1e-12);
}

#[test]
fn ricci_term_on_unit_sphere() {
    // R_ka^{kb} = −δ_a^b on the unit sphere, so the Ricci term maps ξ^th to −ξ^th.
    let s2 = spec_curvature("sphere2");
    let calc = FormCalculus::new(&s2);
    let u = FormField::monomial(coords(&s2), 1, Expr::one());
    assert_fields_close(&s2, &calc.ricci_term().apply(&u), &u.scale(&Expr::num(-1.0)), 1e-12);
    assert!(calc.riemann_term().unwrap().apply(&u).is_zero());
}

#[test]
fn composition_matches_sequential_application() {
    let s2 = spec_curvature("sphere2");
    let calc = FormCalculus::new(&s2);
    let ops = [
        calc.nabla(0),
        calc.nabla(1),
        calc.exterior_d(),
        calc.codifferential().unwrap(),
    ];
    let fields = test_field_suite(coords(&s2));
    for a in &ops {
        for b in &ops {
            let ab = a.compose(b).unwrap();
            for u in fields.iter().step_by(3) {
                assert_fields_close(&s2, &ab.apply(u), &a.apply(&b.apply(u)), 1e-11);
            }
        }
    }
    let cs = coords(&s2);
    let d2 = FormOperator::term(cs, Expr::one(), 0, 0, &[0, 1]);
    assert!(matches!(
        d2.compose(&FormOperator::d_x(cs, 0)),
        Err(OperatorError::OrderTooHigh(3))
    ));
}

#[test]
fn weitzenbock_on_chart_suite() {
    let cfg = FieldCheckConfig::default();
    for name in ["flat3", "sphere2", "h2"] {
        let curv = spec_curvature(name);
        let fields = test_field_suite(coords(&curv));
        let report = check_weitzenbock(&curv, &fields, &cfg).unwrap();
        assert!(report.all_passed(), "{name}: {:?}", report.first_failure());
        if name == "flat3" {
            assert!(report.checks[0].value <= 1e-12);
        }
    }
}

#[test]
fn weitzenbock_on_sphere_example_fields() {
    let s2 = spec_curvature("sphere2");
    let cs = coords(&s2);
    let fields: Vec<FormField> = ["1", "cos(th)", "sin(th)*cos(ph)"]
        .iter()
        .flat_map(|f| (0..4).map(move |m| FormField::monomial(cs, m, e(f))))
        .collect();
    let report = check_weitzenbock(&s2, &fields, &FieldCheckConfig::default()).unwrap();
    assert!(report.all_passed(), "{:?}", report.first_failure());
}

#[test]
fn wrong_curvature_sign_fails_weitzenbock() {
    let s2 = spec_curvature("sphere2");
    let calc = FormCalculus::new(&s2);
    let wrong = calc.bochner_laplacian().unwrap().sub(&calc.ricci_term());
    let fields = test_field_suite(coords(&s2));
    let boxop = calc.hodge_laplacian().unwrap();
    let check = check_against(
        &s2,
        &wrong,
        &fields,
        |u| boxop.apply(u),
        "sign flipped",
        &FieldCheckConfig::default(),
    )
    .unwrap();
    assert!(!check.passed);
    assert!(check.detail.contains("field"));
}

#[test]
fn complex_identities() {
    let cfg = FieldCheckConfig {
        tol: 1e-10,
        ..FieldCheckConfig::default()
    };
    for name in ["flat3", "sphere2", "h2"] {
        let curv = spec_curvature(name);
        let fields = test_field_suite(coords(&curv));
        let report = check_complex(&curv, &fields, &cfg).unwrap();
        assert!(report.all_passed(), "{name}: {:?}", report.first_failure());
    }
}

#[test]
fn random_symbol_identities() {
    let mut rng = crate::random::rng(5);
    let rs = [Rational64::from(0), Rational64::new(1, 2), Rational64::from(1)];
    let report = verify_random_symbol_identities(&mut rng, &[2, 3], &rs, 50).unwrap();
    assert_eq!(report.checks.len(), 6);
    assert!(report.all_passed(), "{:?}", report.first_failure());
}

#[test]
fn hodge_symbol_examples() {
    let flat = flat(2);
    let (sym, report) = hodge_symbol(&flat, &[0.1, 0.2], Rational64::new(1, 3)).unwrap();
    assert!(sym.is_exact() && sym.is_pure_momentum());
    assert!(report.all_passed());
    assert_eq!(sym.to_string(), "-hbar^-2 ((1) p1 p1 + (1) p2 p2)");

    let s2 = spec_curvature("sphere2");
    let (sym, report) = hodge_symbol(&s2, &[PI / 2.0, 1.0], Rational64::from(0)).unwrap();
    assert!(sym.is_exact(), "unit sphere curvature rationalizes");
    assert!(report.all_passed(), "{:?}", report.first_failure());
    let PointSymbol::Exact(h) = &sym else { unreachable!() };
    assert!(h.fiber.scalar_part().is_zero());

    let (half, _) = hodge_symbol(&s2, &[1.0, 1.0], Rational64::new(1, 2)).unwrap();
    assert_eq!(half.hbar_minus_one_part(), 0.0);
    assert!(sym.hbar_minus_one_part() > 0.0);

    assert!(matches!(
        hodge_symbol(&s2, &[4.0, 0.0], Rational64::from(0)),
        Err(OperatorError::OutsideChart(_))
    ));
}

#[test]
fn hodge_symbol_reflection_in_r() {
    let s2 = spec_curvature("sphere2");
    for r in [Rational64::from(0), Rational64::new(1, 4)] {
        let (PointSymbol::Exact(a), _) = hodge_symbol(&s2, &[1.0, 1.0], r).unwrap() else {
            panic!()
        };
        let (PointSymbol::Exact(b), _) = hodge_symbol(&s2, &[1.0, 1.0], Rational64::from(1) - r).unwrap() else {
            panic!()
        };
        // flip the ħ⁻¹ part of one side
        let flipped = a.fiber.map_coeffs(|c| {
            let minus = Laurent::monomial(c.coeff(-1), -1);
            &(c - &minus) - &minus
        });
        assert_eq!(flipped, b.fiber);
    }
}

#[test]
fn hodge_symbol_numeric_fallback() {
    // K = sin(x)/(2 + sin(x)) is irrational at generic points
    let metric = vec![vec![Expr::one(), Expr::zero()], vec![Expr::zero(), e("(2+sin(x))^2")]];
    let chart = MetricChart::new(&["x", "y"], &[(0.0, 3.0), (0.0, 1.0)], metric).unwrap();
    let curv = Curvature::new(&chart).unwrap();
    let (sym, report) = hodge_symbol(&curv, &[0.7, 0.5], Rational64::new(1, 3)).unwrap();
    assert!(!sym.is_exact());
    assert!(report.all_passed(), "{:?}", report.first_failure());
}
