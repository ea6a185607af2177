use rand::Rng;

use crate::expr::{sum, CompiledExpr, EvalError, Expr};
use crate::random;
use crate::report::{Check, Report};

use super::{Curvature, GeometryError, PointCurvature};

#[derive(Debug, Clone)]
pub struct IdentityConfig {
    pub points: usize,
    pub seed: u64,
    /// Relative tolerance; the absolute floor is `1e-4 * tol`.
    pub tol: f64,
}

impl Default for IdentityConfig {
    fn default() -> Self {
        IdentityConfig {
            points: 20,
            seed: 1,
            tol: 1e-8,
        }
    }
}

/// Largest residual relative to max(scale, 1e-4), and where it occurred.
#[derive(Debug, Default)]
struct Worst {
    value: f64,
    at: Vec<f64>,
}

impl Worst {
    fn record(&mut self, residual: f64, scale: f64, x: &[f64]) {
        let r = residual.abs() / scale.max(1e-4);
        if r > self.value || r.is_nan() {
            self.value = r;
            self.at = x.to_vec();
        }
    }

    fn check(self, name: &str, tol: f64) -> Check {
        let c = Check::within(name, self.value, tol);
        if c.passed {
            c
        } else {
            let detail = format!("{} at {:?}", c.detail, self.at);
            c.with_detail(detail)
        }
    }
}

/// Random smooth coefficient field a0 + Σ_a a_a sin(b_a x^a + c_a) + d x^1 x^n.
pub fn random_field(rng: &mut random::TestRng, coords: &[String]) -> Expr {
    let mut u = || (rng.gen_range(-1.0..1.0) * 8.0_f64).round() / 8.0;
    let mut terms = vec![Expr::num(u())];
    for c in coords {
        let x = Expr::var(c.clone());
        terms.push(Expr::num(u()) * (Expr::num(u() + 1.5) * x + Expr::num(u())).sin());
    }
    terms.push(Expr::num(u()) * Expr::var(coords[0].clone()) * Expr::var(coords[coords.len() - 1].clone()));
    sum(terms)
}

/// Symbolic [∇_a, ∇_b] applied to the 1-form f ξ^m: component k at `[(a*n + b)*n + k]`.
fn commutator_on_one_form(curv: &Curvature, f: &Expr, m: usize) -> Vec<Expr> {
    let n = curv.dim();
    let coords = &curv.chart().coordinates;
    let u: Vec<Expr> = (0..n).map(|k| if k == m { f.clone() } else { Expr::zero() }).collect();
    // (∇_b u)_k = ∂_b u_k − Γ^l_bk u_l
    let nabla = |b: usize, w: &[Expr]| -> Vec<Expr> {
        (0..n)
            .map(|k| {
                let mut terms = vec![w[k].differentiate(&coords[b])];
                for (l, wl) in w.iter().enumerate() {
                    if !wl.is_zero() && !curv.gamma(l, b, k).is_zero() {
                        terms.push(-(curv.gamma(l, b, k) * wl));
                    }
                }
                sum(terms).simplify()
            })
            .collect()
    };
    let first: Vec<Vec<Expr>> = (0..n).map(|b| nabla(b, &u)).collect();
    let mut out = Vec::with_capacity(n * n * n);
    for a in 0..n {
        for b in 0..n {
            let ab = nabla(a, &first[b]);
            let ba = nabla(b, &first[a]);
            for k in 0..n {
                out.push((&ab[k] - &ba[k]).simplify());
            }
        }
    }
    out
}

/// Antisymmetries, first Bianchi, metric compatibility and the commutator relation at
/// random interior points.
pub fn verify_curvature_identities(curv: &Curvature, cfg: &IdentityConfig) -> Result<Report, GeometryError> {
    let chart = curv.chart();
    let n = curv.dim();
    let mut rng = random::rng(cfg.seed);
    let points = chart.sample_points(&mut rng, cfg.points);
    let dg: Vec<CompiledExpr> = (0..n)
        .flat_map(|d| (0..n * n).map(move |ab| chart.metric[ab / n][ab % n].differentiate(&chart.coordinates[d])))
        .map(|e| chart.compile(&e))
        .collect::<Result<_, _>>()?;
    let fields: Vec<Expr> = (0..n).map(|_| random_field(&mut rng, &chart.coordinates)).collect();
    let commutators: Vec<(Expr, Vec<CompiledExpr>)> = fields
        .iter()
        .enumerate()
        .map(|(m, f)| {
            let comm = commutator_on_one_form(curv, f, m);
            let compiled = comm.iter().map(|e| chart.compile(e)).collect::<Result<Vec<_>, _>>()?;
            Ok((f.clone(), compiled))
        })
        .collect::<Result<_, EvalError>>()?;
    let field_compiled: Vec<CompiledExpr> = fields.iter().map(|f| chart.compile(f)).collect::<Result<_, _>>()?;

    let mut anti = Worst::default();
    let mut anti_raised = Worst::default();
    let mut bianchi = Worst::default();
    let mut compat = Worst::default();
    let mut commutator = Worst::default();
    for x in &points {
        let p: PointCurvature = curv.at(x)?;
        let scale = p.riemann_scale();
        let raised_scale = p.raised.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for a in 0..n {
            for b in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        anti.record(p.riemann(a, b, k, l) + p.riemann(b, a, k, l), scale, x);
                        anti_raised.record(p.raised(a, b, k, l) + p.raised(a, b, l, k), raised_scale, x);
                        bianchi.record(
                            p.riemann(a, b, k, l) + p.riemann(b, k, a, l) + p.riemann(k, a, b, l),
                            scale,
                            x,
                        );
                    }
                }
            }
        }
        // ∇_a g_bc = ∂_a g_bc − Γ^d_ab g_dc − Γ^d_ac g_bd
        let dgx: Vec<f64> = dg.iter().map(|c| c.eval(x)).collect::<Result<_, _>>()?;
        let gscale = p.g.iter().chain(&dgx).fold(0.0_f64, |m, v| m.max(v.abs()));
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let mut r = dgx[a * n * n + b * n + c];
                    for d in 0..n {
                        r -= p.gamma(d, a, b) * p.g(d, c) + p.gamma(d, a, c) * p.g(b, d);
                    }
                    compat.record(r, gscale, x);
                }
            }
        }
        for (m, (_, comm)) in commutators.iter().enumerate() {
            let fm = field_compiled[m].eval(x)?;
            for a in 0..n {
                for b in 0..n {
                    for k in 0..n {
                        let lhs = comm[(a * n + b) * n + k].eval(x)?;
                        let rhs = -p.riemann(a, b, k, m) * fm;
                        let s = lhs.abs().max(rhs.abs()).max(scale * fm.abs());
                        commutator.record(lhs - rhs, s, x);
                    }
                }
            }
        }
    }
    let mut report = Report::default();
    report.push(anti.check("antisymmetry R_abk^l in (a,b)", cfg.tol));
    report.push(anti_raised.check("antisymmetry R_ab^kl in (k,l)", cfg.tol));
    report.push(bianchi.check("first Bianchi identity", cfg.tol));
    report.push(compat.check("metric compatibility", cfg.tol));
    report.push(commutator.check("commutator [nabla_a, nabla_b] = -R_abk^l xi^k d/dxi^l", cfg.tol));
    Ok(report)
}
