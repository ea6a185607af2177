use std::path::PathBuf;

use crate::expr::Expr;
use crate::geometry::{Curvature, ManifoldSpec, MetricChart};
use crate::par::Execution;
use crate::random;

use super::*;

fn spec(name: &str) -> ManifoldSpec {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "specs", &format!("{name}.json")]
        .iter()
        .collect();
    ManifoldSpec::load(path).unwrap()
}

fn curvature(name: &str) -> Curvature {
    Curvature::new(&spec(name).charts[0]).unwrap()
}

fn coords(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn flat2() -> Curvature {
    let chart = MetricChart::new(
        &["x", "y"],
        &[(0.0, 1.0), (0.0, 1.0)],
        vec![vec![Expr::one(), Expr::zero()], vec![Expr::zero(), Expr::one()]],
    )
    .unwrap();
    Curvature::new(&chart).unwrap()
}

fn sign(f: &TStarSymbol, g: &TStarSymbol) -> f64 {
    let odd = |s: &TStarSymbol| s.parity().is_some_and(|p| p.bit() == 1);
    if odd(f) && odd(g) {
        -1.0
    } else {
        1.0
    }
}

#[test]
fn canonical_brackets_of_generators() {
    let c = coords(&["x", "y"]);
    let one = TStarSymbol::one(&c);
    let p1 = TStarSymbol::p(&c, 0);
    let x1 = TStarSymbol::x(&c, 0);
    let xi1 = TStarSymbol::xi(&c, 0);
    let th1 = TStarSymbol::theta(&c, 0);
    assert_eq!(canonical_bracket(&p1, &x1).unwrap(), one);
    assert_eq!(canonical_bracket(&th1, &xi1).unwrap(), one);
    assert!(canonical_bracket(&p1, &xi1).unwrap().is_zero());
    assert!(canonical_bracket(&TStarSymbol::p(&c, 1), &x1).unwrap().is_zero());
    // {ξ¹θ_1, ξ¹} = ξ¹
    let f = xi1.try_mul(&th1).unwrap();
    assert_eq!(canonical_bracket(&f, &xi1).unwrap(), xi1);
}

#[test]
fn bracket_rejects_other_charts() {
    let a = TStarSymbol::p(&coords(&["x", "y"]), 0);
    let b = TStarSymbol::p(&coords(&["u", "v"]), 0);
    assert!(matches!(canonical_bracket(&a, &b), Err(TStarError::ChartMismatch)));
}

#[test]
fn bracket_graded_antisymmetry() {
    let c = coords(&["th", "ph"]);
    let mut rng = random::rng(7);
    let pt = [0.7, 1.3];
    for _ in 0..40 {
        let f = random_symbol(&mut rng, &c);
        let g = random_symbol(&mut rng, &c);
        for (f, g) in [f.split_parity(), g.split_parity()]
            .iter()
            .flat_map(|(fe, fo)| [fe.clone(), fo.clone()])
            .zip([
                g.split_parity().0,
                g.split_parity().1,
                f.split_parity().0,
                f.split_parity().1,
            ])
        {
            let fg = canonical_bracket(&f, &g).unwrap();
            let gf = canonical_bracket(&g, &f).unwrap();
            let s = -sign(&f, &g);
            let res = fg.try_add(&gf.scale(&Expr::num(-s))).unwrap();
            assert!(res.max_abs_at(&pt).unwrap() < 1e-12, "{f} ; {g}: {res}");
        }
    }
}

#[test]
fn cartan_d_generators() {
    let flat = flat2();
    let c = flat.chart().coordinates.clone();
    assert_eq!(cartan_d(&flat, &TStarSymbol::x(&c, 0)).unwrap(), TStarSymbol::xi(&c, 0));
    assert_eq!(
        cartan_d(&flat, &TStarSymbol::p(&c, 0)).unwrap(),
        TStarSymbol::theta(&c, 0)
    );
    assert!(cartan_d(&flat, &TStarSymbol::theta(&c, 0)).unwrap().is_zero());
    assert!(cartan_d(&flat, &TStarSymbol::xi(&c, 1)).unwrap().is_zero());
}

#[test]
fn cartan_d_is_an_odd_derivation() {
    let curv = curvature("sphere2");
    let c = curv.chart().coordinates.clone();
    let d = CartanD::new(&curv);
    let mut rng = random::rng(11);
    let pt = [1.1, 0.4];
    for _ in 0..30 {
        let (f, _) = random_symbol(&mut rng, &c).split_parity();
        let (_, fo) = random_symbol(&mut rng, &c).split_parity();
        let g = random_symbol(&mut rng, &c);
        for f in [f, fo] {
            let s = if sign(&f, &f) < 0.0 { -1.0 } else { 1.0 };
            let lhs = d.apply(&f.try_mul(&g).unwrap()).unwrap();
            let rhs = d
                .apply(&f)
                .unwrap()
                .try_mul(&g)
                .unwrap()
                .try_add(&f.try_mul(&d.apply(&g).unwrap()).unwrap().scale(&Expr::num(s)))
                .unwrap();
            assert!(lhs.try_sub(&rhs).unwrap().max_abs_at(&pt).unwrap() < 1e-10);
        }
    }
}

#[test]
fn d_squared_vanishes() {
    let cfg = DCheckConfig::default();
    for name in ["flat3", "sphere2", "h2"] {
        let curv = curvature(name);
        let report = dcheck(&curv, &cfg).unwrap();
        let c = &report.checks[0];
        assert!(c.passed, "{name}: {c:?}");
    }
}

/// On a flat chart d{x,θ} = 0 while {dx,θ} = {ξ,θ} = 1, and likewise for (p, ξ):
/// the defect is a constant coming from the bracket itself.
#[test]
fn leibniz_defect_on_flat_charts_is_the_constant_table() {
    let flat = curvature("torus2");
    let c = flat.chart().coordinates.clone();
    let n = c.len();
    let gens = generators(&c);
    // generators() lists x^a, p_a, ξ^a, θ_a for each a
    let expected = |i: usize, j: usize| -> f64 {
        let (a, ki) = (i / 4, i % 4);
        let (b, kj) = (j / 4, j % 4);
        if a != b {
            return 0.0;
        }
        match (ki, kj) {
            (0, 3) | (1, 2) => -1.0,
            (3, 0) | (2, 1) => 1.0,
            _ => 0.0,
        }
    };
    for (i, f) in gens.iter().enumerate() {
        for (j, g) in gens.iter().enumerate() {
            let d = leibniz_defect(&flat, f, g).unwrap();
            let want = TStarSymbol::scalar(&c, Expr::num(expected(i, j)));
            assert_eq!(d.try_sub(&want).unwrap(), TStarSymbol::zero(&c), "{f}, {g}: {d}");
        }
    }
    assert_eq!(gens.len(), 4 * n);
    let check = check_leibniz_defect(&flat, &DCheckConfig::default()).unwrap();
    assert!(!check.passed);
    assert_eq!(check.value, 1.0);
}

#[test]
fn leibniz_defect_nonzero_on_sphere() {
    let curv = curvature("sphere2");
    let c = curv.chart().coordinates.clone();
    let x = [std::f64::consts::FRAC_PI_3, 0.5];
    let pool: Vec<TStarSymbol> = (0..2)
        .flat_map(|a| [TStarSymbol::p(&c, a), TStarSymbol::theta(&c, a), TStarSymbol::xi(&c, a)])
        .collect();
    let mut largest = 0.0_f64;
    for f in &pool {
        for g in &pool {
            largest = largest.max(leibniz_defect(&curv, f, g).unwrap().max_abs_at(&x).unwrap());
        }
    }
    assert!(largest > 1e-6, "{largest}");
    assert!(check_leibniz_defect(&curv, &DCheckConfig::default()).unwrap().passed);
}

#[test]
fn leibniz_defect_graded_symmetry() {
    let curv = curvature("sphere2");
    let c = curv.chart().coordinates.clone();
    let mut rng = random::rng(5);
    let pt = [0.9, 2.0];
    for _ in 0..15 {
        let (fe, fo) = random_symbol(&mut rng, &c).split_parity();
        let (ge, go) = random_symbol(&mut rng, &c).split_parity();
        for (f, g) in [(&fe, &ge), (&fe, &go), (&fo, &ge), (&fo, &go)] {
            let fg = leibniz_defect(&curv, f, g).unwrap();
            let gf = leibniz_defect(&curv, g, f).unwrap();
            let res = fg.try_add(&gf.scale(&Expr::num(sign(f, g)))).unwrap();
            let scale = fg.max_abs_at(&pt).unwrap().max(1.0);
            assert!(res.max_abs_at(&pt).unwrap() / scale < 1e-10, "{f}; {g}");
        }
    }
}

#[test]
fn euler_sphere_any_radius() {
    for rho in [0.5, 1.0, 3.0] {
        let s = spec("sphere2").with_param("rho", rho).unwrap();
        let r = euler_characteristic(&s, 64).unwrap();
        assert!((r.chi_computed - 2.0).abs() < 1e-6, "{r:?}");
        assert!(r.imag_residual <= 1e-10);
        assert_eq!(r.chi_expected, Some(2));
    }
}

#[test]
fn euler_torus_vanishes() {
    let r = euler_characteristic(&spec("torus2"), 16).unwrap();
    assert!(r.chi_computed.abs() <= 1e-12);
    assert!(supertrace_gaussian(&spec("torus2"), 16).unwrap().norm() <= 1e-12);
}

#[test]
fn euler_odd_dimension_is_zero_with_note() {
    let r = euler_characteristic(&spec("flat3"), 4).unwrap();
    assert_eq!(r.chi_computed, 0.0);
    assert!(r.note.is_some());
    assert!(serde_json::to_string(&r).unwrap().contains("\"note\""));
}

#[test]
fn euler_scaling_invariance() {
    let base = spec("sphere2");
    let values: Vec<f64> = [0.5, 1.0, 3.0]
        .iter()
        .map(|&c| {
            euler_characteristic(&base.scaled(c * c).unwrap(), 32)
                .unwrap()
                .chi_computed
        })
        .collect();
    for v in &values {
        assert!((v - values[1]).abs() < 1e-8, "{values:?}");
    }
}

#[test]
fn euler_converges_monotonically() {
    let s = spec("sphere2");
    let errs: Vec<f64> = [8, 16, 32, 64]
        .iter()
        .map(|&k| euler_characteristic(&s, k).unwrap().abs_error.unwrap())
        .collect();
    for w in errs.windows(2) {
        assert!(w[1] <= w[0].max(1e-13), "{errs:?}");
    }
}

#[test]
fn supertrace_matches_pfaffian_route_in_two_dimensions() {
    for name in ["sphere2", "torus2"] {
        let s = spec(name);
        let chi = euler_characteristic(&s, 24).unwrap().chi_computed;
        let st = supertrace_gaussian(&s, 24).unwrap();
        assert!((st.re - chi).abs() < 1e-8, "{name}: {st} vs {chi}");
        assert!(st.im.abs() <= 1e-10 * st.re.abs().max(1.0));
    }
}

#[test]
fn four_dimensional_routes_agree_at_low_resolution() {
    for name in ["s2xs2", "sphere4"] {
        let s = spec(name);
        let chi = euler_characteristic(&s, 6).unwrap();
        let st = supertrace_gaussian(&s, 6).unwrap();
        assert!((st.re - chi.chi_computed).abs() < 1e-8, "{name}: {st} vs {chi:?}");
        assert!(chi.imag_residual <= 1e-10);
    }
}

#[test]
fn execution_paths_give_identical_results() {
    let s = spec("sphere2");
    let a = euler_characteristic_with(Execution::Sequential, &s, 20).unwrap();
    let b = euler_characteristic_with(Execution::Parallel, &s, 20).unwrap();
    assert_eq!(a.chi_computed.to_bits(), b.chi_computed.to_bits());
}

#[test]
fn supertrace_rejects_unsupported_exponents() {
    let bad = |pc: &crate::geometry::PointCurvature, set: &std::sync::Arc<crate::grassmann::GeneratorSet>| {
        let mut q = curvature_exponent(pc, set);
        q.add_term(1 << pc.n, &crate::scalar::NumericScalar::from_f64(1.0));
        q
    };
    let err = supertrace_gaussian_with(Execution::Sequential, &spec("sphere2"), 4, &bad).unwrap_err();
    assert!(matches!(err, TStarError::UnsupportedSymbol(_)));
}

#[test]
#[ignore]
fn timing_four_dimensional() {
    for (name, k) in [("sphere4", 8), ("s2xs2", 8)] {
        let s = spec(name);
        let t = std::time::Instant::now();
        let chi = euler_characteristic(&s, k).unwrap();
        let t1 = t.elapsed();
        let st = supertrace_gaussian(&s, k).unwrap();
        eprintln!(
            "{name} k={k}: pf {:?} ({}), st {:?} ({st})",
            t1,
            chi.chi_computed,
            t.elapsed() - t1
        );
    }
}
