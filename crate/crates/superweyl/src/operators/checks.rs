use crate::expr::{EvalError, Expr};
use crate::geometry::Curvature;
use crate::par;
use crate::random;
use crate::report::{Check, Report};

use super::{FormCalculus, FormField, FormOperator, OperatorError};

#[derive(Debug, Clone)]
pub struct FieldCheckConfig {
    pub points: usize,
    pub seed: u64,
    pub tol: f64,
    /// Tolerance for the agreement of the two curvature-term variants.
    pub variant_tol: f64,
}

impl Default for FieldCheckConfig {
    fn default() -> Self {
        FieldCheckConfig {
            points: 20,
            seed: 1,
            tol: 1e-8,
            variant_tol: 1e-9,
        }
    }
}

/// Coefficients {1, x^a, x^a x^b, sin x^a, cos x^a} times every ξ-monomial.
pub fn test_field_suite(coords: &[String]) -> Vec<FormField> {
    let n = coords.len();
    let x: Vec<Expr> = coords.iter().map(|c| Expr::var(c.clone())).collect();
    let mut coefs = vec![Expr::one()];
    coefs.extend(x.iter().cloned());
    for a in 0..n {
        for b in a..n {
            coefs.push(&x[a] * &x[b]);
        }
    }
    for xa in &x {
        coefs.push(xa.sin());
        coefs.push(xa.cos());
    }
    let mut out = Vec::new();
    for mask in 0..1u64 << n {
        for f in &coefs {
            out.push(FormField::monomial(coords, mask, f.clone()));
        }
    }
    out
}

/// Largest relative residual over fields and points.
#[derive(Debug, Clone, Default)]
struct Worst {
    value: f64,
    detail: String,
}

impl Worst {
    fn merge(mut self, other: Worst) -> Worst {
        if other.value > self.value || other.value.is_nan() {
            self = other;
        }
        self
    }

    fn check(self, name: &str, tol: f64) -> Check {
        let c = Check::within(name, self.value, tol);
        if c.passed {
            c
        } else {
            let detail = format!("{}; {}", c.detail, self.detail);
            c.with_detail(detail)
        }
    }
}

/// Each side returns its stages, result last; residuals are relative to the largest
/// value seen in any stage, which bounds the rounding of the final cancellation.
fn compare(
    fields: &[FormField],
    points: &[Vec<f64>],
    lhs: impl Fn(&FormField) -> Vec<FormField> + Sync + Send,
    rhs: impl Fn(&FormField) -> Vec<FormField> + Sync + Send,
) -> Result<Worst, EvalError> {
    let per_field = par::map_indexed(fields.len(), |i| -> Result<Worst, EvalError> {
        let u = &fields[i];
        let (l, r) = (lhs(u), rhs(u));
        let mut worst = Worst::default();
        for x in points {
            let mut scale = 1.0_f64;
            for stage in l.iter().chain(&r) {
                scale = stage.eval_at(x)?.iter().fold(scale, |m, v| m.max(v.abs()));
            }
            let zero = FormField::zero(u.coords());
            let lv = l.last().unwrap_or(&zero).eval_at(x)?;
            let rv = r.last().unwrap_or(&zero).eval_at(x)?;
            let diff = lv.iter().zip(&rv).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
            let value = diff / scale;
            if value > worst.value || value.is_nan() {
                worst = Worst {
                    value,
                    detail: format!("field {u} at {x:?}"),
                };
            }
        }
        Ok(worst)
    });
    per_field
        .into_iter()
        .try_fold(Worst::default(), |acc, w| Ok(acc.merge(w?)))
}

fn twice(a: &FormOperator, b: &FormOperator, u: &FormField) -> Vec<FormField> {
    let first = b.apply(u);
    let second = a.apply(&first);
    vec![first, second]
}

fn sample_points(curv: &Curvature, cfg: &FieldCheckConfig) -> Vec<Vec<f64>> {
    let mut rng = random::rng(cfg.seed);
    curv.chart().sample_points(&mut rng, cfg.points)
}

/// □u against both Weitzenböck right-hand sides over `fields`.
pub fn check_weitzenbock(
    curv: &Curvature,
    fields: &[FormField],
    cfg: &FieldCheckConfig,
) -> Result<Report, OperatorError> {
    let calc = FormCalculus::new(curv);
    let points = sample_points(curv, cfg);
    let boxop = calc.hodge_laplacian()?;
    let rhs = calc.weitzenbock_rhs()?;
    let alt = calc.weitzenbock_rhs_alt()?;
    let mut report = Report::default();
    let w = compare(fields, &points, |u| vec![boxop.apply(u)], |u| vec![rhs.apply(u)])?;
    report.push(w.check("box = Bochner + Ric + 1/2 R_ab^kl", cfg.tol));
    let w = compare(fields, &points, |u| vec![rhs.apply(u)], |u| vec![alt.apply(u)])?;
    report.push(w.check("Riemann term variants agree", cfg.variant_tol));
    Ok(report)
}

/// d² = 0, δ² = 0, d□ = □d and (d+δ)² = □ on `fields`.
pub fn check_complex(curv: &Curvature, fields: &[FormField], cfg: &FieldCheckConfig) -> Result<Report, OperatorError> {
    let calc = FormCalculus::new(curv);
    let points = sample_points(curv, cfg);
    let d = calc.exterior_d();
    let delta = calc.codifferential()?;
    let boxop = calc.hodge_laplacian()?;
    let dirac = d.add(&delta);
    let zero = |_: &FormField| vec![];
    let mut report = Report::default();
    let w = compare(fields, &points, |u| twice(&d, &d, u), zero)?;
    report.push(w.check("d^2 = 0", cfg.tol));
    let w = compare(fields, &points, |u| twice(&delta, &delta, u), zero)?;
    report.push(w.check("delta^2 = 0", cfg.tol));
    let w = compare(fields, &points, |u| twice(&d, &boxop, u), |u| twice(&boxop, &d, u))?;
    report.push(w.check("d box = box d", cfg.tol));
    let w = compare(fields, &points, |u| twice(&dirac, &dirac, u), |u| vec![boxop.apply(u)])?;
    report.push(w.check("(d + delta)^2 = box", cfg.tol));
    Ok(report)
}

/// Residual of `op` applied to each field against a reference map.
pub fn check_against(
    curv: &Curvature,
    op: &FormOperator,
    fields: &[FormField],
    reference: impl Fn(&FormField) -> FormField + Sync + Send,
    name: &str,
    cfg: &FieldCheckConfig,
) -> Result<Check, OperatorError> {
    let points = sample_points(curv, cfg);
    Ok(compare(fields, &points, |u| vec![op.apply(u)], |u| vec![reference(u)])?.check(name, cfg.tol))
}
