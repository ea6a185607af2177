use crate::expr::{sum, CompiledExpr, EvalError, Expr};

use super::{GeometryError, MetricChart};

/// Symbolic Levi-Civita data of a chart.
///
/// Index conventions: `gamma(c, a, b)` = Γ^c_ab; `riemann(a, b, k, l)` = R_abk^l with
/// [∇_a, ∇_b] = −R_abk^l ξ^k ∂/∂ξ^l; `raised(a, b, k, l)` = R_ab^{kl} = g^{km} R_abm^l.
#[derive(Debug, Clone)]
pub struct Curvature {
    n: usize,
    chart: MetricChart,
    det: Expr,
    ginv: Vec<Expr>,
    gamma: Vec<Expr>,
    riemann: Vec<Expr>,
    raised: Vec<Expr>,
    ricci: Vec<Expr>,
    scalar: Expr,
    compiled: CompiledTensors,
}

#[derive(Debug, Clone)]
struct CompiledTensors {
    metric: Vec<Option<CompiledExpr>>,
    ginv: Vec<Option<CompiledExpr>>,
    det: CompiledExpr,
    gamma: Vec<Option<CompiledExpr>>,
    riemann: Vec<Option<CompiledExpr>>,
}

/// Numeric curvature at one point, same index conventions as [`Curvature`].
#[derive(Debug, Clone, PartialEq)]
pub struct PointCurvature {
    pub n: usize,
    pub x: Vec<f64>,
    /// g_ab, row-major.
    pub g: Vec<f64>,
    /// g^ab, row-major.
    pub ginv: Vec<f64>,
    pub det_g: f64,
    /// Γ^c_ab at `[(c*n + a)*n + b]`.
    pub gamma: Vec<f64>,
    /// R_abk^l at `[((a*n + b)*n + k)*n + l]`.
    pub riemann: Vec<f64>,
    /// R_ab^{kl}, same layout.
    pub raised: Vec<f64>,
}

fn idx2(n: usize, a: usize, b: usize) -> usize {
    a * n + b
}

fn idx3(n: usize, a: usize, b: usize, c: usize) -> usize {
    (a * n + b) * n + c
}

fn idx4(n: usize, a: usize, b: usize, c: usize, d: usize) -> usize {
    ((a * n + b) * n + c) * n + d
}

fn symbolic_det(m: &[Vec<Expr>]) -> Expr {
    match m.len() {
        0 => Expr::one(),
        1 => m[0][0].clone(),
        n => sum((0..n).filter(|&j| !m[0][j].is_zero()).map(|j| {
            let minor: Vec<Vec<Expr>> = m[1..]
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|(c, _)| *c != j)
                        .map(|(_, v)| v.clone())
                        .collect()
                })
                .collect();
            let t = &m[0][j] * &symbolic_det(&minor);
            if j % 2 == 0 {
                t
            } else {
                -t
            }
        }))
        .simplify(),
    }
}

fn is_diagonal(m: &[Vec<Expr>]) -> bool {
    m.iter()
        .enumerate()
        .all(|(i, row)| row.iter().enumerate().all(|(j, e)| i == j || e.is_zero()))
}

fn compile_all(chart: &MetricChart, es: &[Expr]) -> Result<Vec<Option<CompiledExpr>>, EvalError> {
    es.iter()
        .map(|e| {
            if e.is_zero() {
                Ok(None)
            } else {
                chart.compile(e).map(Some)
            }
        })
        .collect()
}

fn eval_all(cs: &[Option<CompiledExpr>], x: &[f64], stack: &mut Vec<f64>) -> Result<Vec<f64>, EvalError> {
    cs.iter()
        .map(|c| c.as_ref().map_or(Ok(0.0), |c| c.eval_with(x, stack)))
        .collect()
}

impl Curvature {
    /// Levi-Civita connection and its curvature.
    pub fn new(chart: &MetricChart) -> Result<Curvature, GeometryError> {
        let n = chart.dim();
        let (det, ginv) = Self::inverse_metric(chart);
        let coords = &chart.coordinates;
        let dg: Vec<Vec<Vec<Expr>>> = (0..n)
            .map(|d| {
                (0..n)
                    .map(|a| (0..n).map(|b| chart.metric[a][b].differentiate(&coords[d])).collect())
                    .collect()
            })
            .collect();
        let mut gamma = vec![Expr::zero(); n * n * n];
        for c in 0..n {
            for a in 0..n {
                for b in 0..=a {
                    let e = sum((0..n).filter(|&d| !ginv[idx2(n, c, d)].is_zero()).map(|d| {
                        let bracket = (&(&dg[a][b][d] + &dg[b][a][d]) - &dg[d][a][b]).simplify();
                        &ginv[idx2(n, c, d)] * &bracket
                    }));
                    let e = (Expr::num(0.5) * e).simplify();
                    gamma[idx3(n, c, a, b)] = e.clone();
                    gamma[idx3(n, c, b, a)] = e;
                }
            }
        }
        Self::from_parts(chart, det, ginv, gamma)
    }

    /// Curvature of an arbitrary (possibly non-metric or torsionful) connection Γ^c_ab given
    /// at `[(c*n + a)*n + b]`; used for negative controls.
    pub fn from_christoffel(chart: &MetricChart, gamma: Vec<Expr>) -> Result<Curvature, GeometryError> {
        let n = chart.dim();
        if gamma.len() != n * n * n {
            return Err(GeometryError::Schema(format!(
                "expected {} connection coefficients",
                n * n * n
            )));
        }
        let (det, ginv) = Self::inverse_metric(chart);
        Self::from_parts(chart, det, ginv, gamma)
    }

    fn inverse_metric(chart: &MetricChart) -> (Expr, Vec<Expr>) {
        let n = chart.dim();
        let g = &chart.metric;
        let det = symbolic_det(g);
        let mut ginv = vec![Expr::zero(); n * n];
        if is_diagonal(g) {
            for a in 0..n {
                ginv[idx2(n, a, a)] = (Expr::one() / g[a][a].clone()).simplify();
            }
        } else {
            for i in 0..n {
                for j in 0..n {
                    // adjugate: (−1)^{i+j} M_ji / det
                    let minor: Vec<Vec<Expr>> = g
                        .iter()
                        .enumerate()
                        .filter(|(r, _)| *r != j)
                        .map(|(_, row)| {
                            row.iter()
                                .enumerate()
                                .filter(|(c, _)| *c != i)
                                .map(|(_, v)| v.clone())
                                .collect()
                        })
                        .collect();
                    let cof = symbolic_det(&minor);
                    let cof = if (i + j) % 2 == 0 { cof } else { -cof };
                    ginv[idx2(n, i, j)] = (cof / det.clone()).simplify();
                }
            }
        }
        (det, ginv)
    }

    fn from_parts(
        chart: &MetricChart,
        det: Expr,
        ginv: Vec<Expr>,
        gamma: Vec<Expr>,
    ) -> Result<Curvature, GeometryError> {
        let n = chart.dim();
        let coords = &chart.coordinates;
        let g3 = |c: usize, a: usize, b: usize| &gamma[idx3(n, c, a, b)];
        // ∂_e Γ^c_ab
        let dgamma: Vec<Expr> = (0..n)
            .flat_map(|e| {
                let gamma = &gamma;
                (0..n * n * n).map(move |k| gamma[k].differentiate(&coords[e]))
            })
            .collect();
        let dg3 = |e: usize, c: usize, a: usize, b: usize| &dgamma[e * n * n * n + idx3(n, c, a, b)];
        let mut riemann = vec![Expr::zero(); n * n * n * n];
        for a in 0..n {
            for b in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut terms = vec![dg3(a, l, b, k).clone(), -dg3(b, l, a, k)];
                        for m in 0..n {
                            if !g3(l, a, m).is_zero() && !g3(m, b, k).is_zero() {
                                terms.push(g3(l, a, m) * g3(m, b, k));
                            }
                            if !g3(l, b, m).is_zero() && !g3(m, a, k).is_zero() {
                                terms.push(-(g3(l, b, m) * g3(m, a, k)));
                            }
                        }
                        riemann[idx4(n, a, b, k, l)] = sum(terms).simplify();
                    }
                }
            }
        }
        let mut raised = vec![Expr::zero(); n * n * n * n];
        for a in 0..n {
            for b in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        raised[idx4(n, a, b, k, l)] = sum((0..n)
                            .filter(|&m| !ginv[idx2(n, k, m)].is_zero() && !riemann[idx4(n, a, b, m, l)].is_zero())
                            .map(|m| &ginv[idx2(n, k, m)] * &riemann[idx4(n, a, b, m, l)]))
                        .simplify();
                    }
                }
            }
        }
        // Ric_bk = R^a_{bak} = R_{akb}^a, raised with g^{kc}.
        let ric_lower: Vec<Expr> = (0..n)
            .flat_map(|b| {
                let riemann = &riemann;
                (0..n).map(move |k| sum((0..n).map(|a| riemann[idx4(n, a, k, b, a)].clone())).simplify())
            })
            .collect();
        let mut ricci = vec![Expr::zero(); n * n];
        for b in 0..n {
            for c in 0..n {
                ricci[idx2(n, b, c)] = sum((0..n)
                    .filter(|&k| !ric_lower[idx2(n, b, k)].is_zero() && !ginv[idx2(n, k, c)].is_zero())
                    .map(|k| &ric_lower[idx2(n, b, k)] * &ginv[idx2(n, k, c)]))
                .simplify();
            }
        }
        let scalar = sum((0..n).map(|a| ricci[idx2(n, a, a)].clone())).simplify();
        let flat_metric: Vec<Expr> = chart.metric.iter().flatten().cloned().collect();
        let compiled = CompiledTensors {
            metric: compile_all(chart, &flat_metric)?,
            ginv: compile_all(chart, &ginv)?,
            det: chart.compile(&det)?,
            gamma: compile_all(chart, &gamma)?,
            riemann: compile_all(chart, &riemann)?,
        };
        Ok(Curvature {
            n,
            chart: chart.clone(),
            det,
            ginv,
            gamma,
            riemann,
            raised,
            ricci,
            scalar,
            compiled,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn chart(&self) -> &MetricChart {
        &self.chart
    }

    pub fn det(&self) -> &Expr {
        &self.det
    }

    /// g^ab.
    pub fn ginv(&self, a: usize, b: usize) -> &Expr {
        &self.ginv[idx2(self.n, a, b)]
    }

    /// Γ^c_ab.
    pub fn gamma(&self, c: usize, a: usize, b: usize) -> &Expr {
        &self.gamma[idx3(self.n, c, a, b)]
    }

    /// R_abk^l.
    pub fn riemann(&self, a: usize, b: usize, k: usize, l: usize) -> &Expr {
        &self.riemann[idx4(self.n, a, b, k, l)]
    }

    /// R_ab^{kl}.
    pub fn raised(&self, a: usize, b: usize, k: usize, l: usize) -> &Expr {
        &self.raised[idx4(self.n, a, b, k, l)]
    }

    /// Usual Ricci tensor Ric_a^b = g^{bc} R^k_{akc}; positive on round spheres.
    pub fn ricci(&self, a: usize, b: usize) -> &Expr {
        &self.ricci[idx2(self.n, a, b)]
    }

    /// The contraction R_ka^{kb} entering the Weitzenböck formula; equals −ricci(a, b).
    pub fn ricci_contraction(&self, a: usize, b: usize) -> Expr {
        sum((0..self.n).map(|k| self.raised(k, a, k, b).clone())).simplify()
    }

    /// Scalar curvature Ric_a^a of the usual Ricci tensor.
    pub fn scalar(&self) -> &Expr {
        &self.scalar
    }

    /// Numeric tensors at `x`.
    pub fn at(&self, x: &[f64]) -> Result<PointCurvature, EvalError> {
        let mut stack = Vec::new();
        self.at_with(x, &mut stack)
    }

    pub fn at_with(&self, x: &[f64], stack: &mut Vec<f64>) -> Result<PointCurvature, EvalError> {
        let n = self.n;
        let c = &self.compiled;
        let g = eval_all(&c.metric, x, stack)?;
        let ginv = eval_all(&c.ginv, x, stack)?;
        let det_g = c.det.eval_with(x, stack)?;
        let gamma = eval_all(&c.gamma, x, stack)?;
        let riemann = eval_all(&c.riemann, x, stack)?;
        let mut raised = vec![0.0; n * n * n * n];
        for a in 0..n {
            for b in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        raised[idx4(n, a, b, k, l)] =
                            (0..n).map(|m| ginv[idx2(n, k, m)] * riemann[idx4(n, a, b, m, l)]).sum();
                    }
                }
            }
        }
        Ok(PointCurvature {
            n,
            x: x.to_vec(),
            g,
            ginv,
            det_g,
            gamma,
            riemann,
            raised,
        })
    }
}

impl PointCurvature {
    pub fn g(&self, a: usize, b: usize) -> f64 {
        self.g[idx2(self.n, a, b)]
    }

    pub fn ginv(&self, a: usize, b: usize) -> f64 {
        self.ginv[idx2(self.n, a, b)]
    }

    pub fn gamma(&self, c: usize, a: usize, b: usize) -> f64 {
        self.gamma[idx3(self.n, c, a, b)]
    }

    pub fn riemann(&self, a: usize, b: usize, k: usize, l: usize) -> f64 {
        self.riemann[idx4(self.n, a, b, k, l)]
    }

    pub fn raised(&self, a: usize, b: usize, k: usize, l: usize) -> f64 {
        self.raised[idx4(self.n, a, b, k, l)]
    }

    /// Usual Ricci Ric_a^b.
    pub fn ricci(&self, a: usize, b: usize) -> f64 {
        let n = self.n;
        (0..n)
            .map(|c| {
                let lower: f64 = (0..n).map(|k| self.riemann(k, c, a, k)).sum();
                lower * self.ginv(c, b)
            })
            .sum()
    }

    /// R_ka^{kb}.
    pub fn ricci_contraction(&self, a: usize, b: usize) -> f64 {
        (0..self.n).map(|k| self.raised(k, a, k, b)).sum()
    }

    pub fn scalar(&self) -> f64 {
        (0..self.n).map(|a| self.ricci(a, a)).sum()
    }

    /// Largest absolute Riemann component.
    pub fn riemann_scale(&self) -> f64 {
        self.riemann.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}
