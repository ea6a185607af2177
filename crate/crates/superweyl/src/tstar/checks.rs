use rand::Rng;

use crate::expr::Expr;
use crate::geometry::Curvature;
use crate::par;
use crate::random::{self, TestRng};
use crate::report::{Check, Report};

use super::{CartanD, Monomial, TStarError, TStarSymbol};

#[derive(Debug, Clone)]
pub struct DCheckConfig {
    pub points: usize,
    pub seed: u64,
    pub tol: f64,
    /// Random symbols checked in addition to the generators.
    pub random_symbols: usize,
    /// Smallest defect magnitude that counts as nonzero on a curved chart.
    pub defect_floor: f64,
}

impl Default for DCheckConfig {
    fn default() -> Self {
        DCheckConfig {
            points: 20,
            seed: 1,
            tol: 1e-9,
            random_symbols: 12,
            defect_floor: 1e-6,
        }
    }
}

/// A few terms with coefficients from {1, x^a, x^a x^b, sin x^a}, momentum degree ≤ 2.
pub fn random_symbol(rng: &mut TestRng, coords: &[String]) -> TStarSymbol {
    let n = coords.len();
    let x: Vec<Expr> = coords.iter().map(|c| Expr::var(c.clone())).collect();
    let mut s = TStarSymbol::zero(coords);
    for _ in 0..rng.gen_range(1..=3) {
        let c = match rng.gen_range(0..4) {
            0 => Expr::one(),
            1 => x[rng.gen_range(0..n)].clone(),
            2 => &x[rng.gen_range(0..n)] * &x[rng.gen_range(0..n)],
            _ => x[rng.gen_range(0..n)].sin(),
        };
        let c = &Expr::num(f64::from(rng.gen_range(-3..=3_i32).max(1))) * &c;
        let mut p = vec![0; n];
        for _ in 0..rng.gen_range(0..=2) {
            p[rng.gen_range(0..n)] += 1;
        }
        let odd = rng.gen_range(0..1u64 << (2 * n));
        s.add_term(Monomial { p, odd }, c);
    }
    s
}

/// x^a, p_a, ξ^a, θ_a for every a.
pub fn generators(coords: &[String]) -> Vec<TStarSymbol> {
    let n = coords.len();
    (0..n)
        .flat_map(|a| {
            [
                TStarSymbol::x(coords, a),
                TStarSymbol::p(coords, a),
                TStarSymbol::xi(coords, a),
                TStarSymbol::theta(coords, a),
            ]
        })
        .collect()
}

fn sample_points(curv: &Curvature, cfg: &DCheckConfig) -> Vec<Vec<f64>> {
    let mut rng = random::rng(cfg.seed);
    curv.chart().sample_points(&mut rng, cfg.points)
}

/// max |d²f| over points, relative to the largest coefficient of f and df (floor 1).
pub fn check_d_squared(curv: &Curvature, symbols: &[TStarSymbol], cfg: &DCheckConfig) -> Result<Check, TStarError> {
    let d = CartanD::new(curv);
    let points = sample_points(curv, cfg);
    let per = par::map_indexed(symbols.len(), |i| -> Result<(f64, String), TStarError> {
        let f = &symbols[i];
        let df = d.apply(f)?;
        let ddf = d.apply(&df)?;
        let mut worst = (0.0_f64, String::new());
        for x in &points {
            let scale = f.max_abs_at(x)?.max(df.max_abs_at(x)?).max(1.0);
            let r = ddf.max_abs_at(x)? / scale;
            if r > worst.0 || r.is_nan() {
                worst = (r, format!("f = {f} at {x:?}"));
            }
        }
        Ok(worst)
    });
    let mut worst = (0.0_f64, String::new());
    for w in per {
        let w = w?;
        if w.0 > worst.0 || w.0.is_nan() {
            worst = w;
        }
    }
    let c = Check::within("d^2 = 0", worst.0, cfg.tol);
    Ok(if c.passed {
        c
    } else {
        let detail = format!("{}; {}", c.detail, worst.1);
        c.with_detail(detail)
    })
}

/// Largest defect over generator pairs and sample points. Flat charts must give
/// an exact symbolic zero; curved ones at least one value above the floor.
pub fn check_leibniz_defect(curv: &Curvature, cfg: &DCheckConfig) -> Result<Check, TStarError> {
    let d = CartanD::new(curv);
    let coords = &curv.chart().coordinates;
    let gens = generators(coords);
    let points = sample_points(curv, cfg);
    let n = coords.len();
    let flat = (0..n).all(|a| (0..n).all(|b| (0..n).all(|k| (0..n).all(|l| curv.riemann(a, b, k, l).is_zero()))));
    let mut symbolic_zero = true;
    let mut largest = (0.0_f64, String::new());
    for f in &gens {
        for g in &gens {
            let defect = d.leibniz_defect(f, g)?;
            symbolic_zero &= defect.is_zero();
            for x in &points {
                let v = defect.max_abs_at(x)?;
                if v > largest.0 {
                    largest = (v, format!("D({f}, {g}) = {defect}"));
                }
            }
        }
    }
    let (passed, detail) = if flat {
        (
            symbolic_zero && largest.0 == 0.0,
            format!(
                "flat chart, symbolic zero: {symbolic_zero}, largest |D| = {:e}; {}",
                largest.0, largest.1
            ),
        )
    } else {
        (
            largest.0 >= cfg.defect_floor,
            format!("curved chart, largest |D| = {:e}; {}", largest.0, largest.1),
        )
    };
    let mut c = Check::flag("Leibniz defect", passed, largest.0, detail);
    if !flat {
        c = c.with_tolerance(cfg.defect_floor);
    }
    Ok(c)
}

/// d² = 0 on generators and random symbols, plus the Leibniz-defect check.
pub fn dcheck(curv: &Curvature, cfg: &DCheckConfig) -> Result<Report, TStarError> {
    let coords = &curv.chart().coordinates;
    let mut symbols = generators(coords);
    let mut rng = random::rng(cfg.seed.wrapping_add(1));
    symbols.extend((0..cfg.random_symbols).map(|_| random_symbol(&mut rng, coords)));
    let mut report = Report::default();
    report.push(check_d_squared(curv, &symbols, cfg)?);
    report.push(check_leibniz_defect(curv, cfg)?);
    Ok(report)
}
