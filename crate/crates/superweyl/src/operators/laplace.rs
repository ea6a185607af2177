use num_rational::Rational64;

use crate::expr::{sum, Expr};
use crate::geometry::Curvature;

use super::{FormOperator, OperatorError};

/// Builds the standard operators on forms over one chart.
#[derive(Debug, Clone, Copy)]
pub struct FormCalculus<'a> {
    curv: &'a Curvature,
}

fn rat_expr(q: Rational64) -> Expr {
    Expr::num(*q.numer() as f64) / Expr::num(*q.denom() as f64)
}

impl<'a> FormCalculus<'a> {
    pub fn new(curv: &'a Curvature) -> FormCalculus<'a> {
        FormCalculus { curv }
    }

    pub fn curvature(&self) -> &'a Curvature {
        self.curv
    }

    pub fn coords(&self) -> &'a [String] {
        &self.curv.chart().coordinates
    }

    fn n(&self) -> usize {
        self.curv.dim()
    }

    /// d = ξ^a ∂/∂x^a.
    pub fn exterior_d(&self) -> FormOperator {
        let c = self.coords();
        (0..self.n()).fold(FormOperator::zero(c), |acc, a| {
            acc.add(&FormOperator::term(c, Expr::one(), 1 << a, 0, &[a]))
        })
    }

    /// ∇_a = ∂/∂x^a − Γ^l_ak ξ^k ∂/∂ξ^l.
    pub fn nabla(&self, a: usize) -> FormOperator {
        let c = self.coords();
        let mut op = FormOperator::d_x(c, a);
        for k in 0..self.n() {
            for l in 0..self.n() {
                let g = self.curv.gamma(l, a, k);
                if !g.is_zero() {
                    op = op.add(&FormOperator::term(c, -g, 1 << k, 1 << l, &[]));
                }
            }
        }
        op
    }

    /// δ = g^{ab} ∂/∂ξ^a ∇_b.
    pub fn codifferential(&self) -> Result<FormOperator, OperatorError> {
        let c = self.coords();
        let mut op = FormOperator::zero(c);
        for b in 0..self.n() {
            let nb = self.nabla(b);
            for a in 0..self.n() {
                let gab = self.curv.ginv(a, b);
                if gab.is_zero() {
                    continue;
                }
                op = op.add(&FormOperator::d_xi(c, a).compose(&nb)?.scale(gab));
            }
        }
        Ok(op)
    }

    /// div X = (1/√h) ∂_a(√h X^a).
    pub fn divergence(&self, x: &[Expr]) -> Expr {
        let root = self.curv.det().clone().sqrt();
        let flux = sum(x.iter().zip(self.coords()).map(|(xa, c)| (&root * xa).differentiate(c)));
        (flux / root).simplify()
    }

    /// ∇_X + s div X.
    pub fn covariant_derivative(&self, x: &[Expr], s: Rational64) -> Result<FormOperator, OperatorError> {
        if x.len() != self.n() {
            return Err(OperatorError::SizeMismatch {
                expected: self.n(),
                got: x.len(),
            });
        }
        let c = self.coords();
        let mut op = FormOperator::zero(c);
        for (a, xa) in x.iter().enumerate() {
            if !xa.is_zero() {
                op = op.add(&self.nabla(a).scale(xa));
            }
        }
        if *s.numer() != 0 {
            op = op.add(&FormOperator::function(c, rat_expr(s) * self.divergence(x)));
        }
        Ok(op)
    }

    /// Δ = g^{ab}(∇_a∇_b − Γ^c_ab ∇_c).
    pub fn bochner_laplacian(&self) -> Result<FormOperator, OperatorError> {
        let n = self.n();
        let nabla: Vec<FormOperator> = (0..n).map(|a| self.nabla(a)).collect();
        let mut op = FormOperator::zero(self.coords());
        for a in 0..n {
            for b in 0..n {
                let gab = self.curv.ginv(a, b);
                if gab.is_zero() {
                    continue;
                }
                let mut inner = nabla[a].compose(&nabla[b])?;
                for (c, nc) in nabla.iter().enumerate() {
                    let g = self.curv.gamma(c, a, b);
                    if !g.is_zero() {
                        inner = inner.sub(&nc.scale(g));
                    }
                }
                op = op.add(&inner.scale(gab));
            }
        }
        Ok(op)
    }

    /// □ = dδ + δd.
    pub fn hodge_laplacian(&self) -> Result<FormOperator, OperatorError> {
        let d = self.exterior_d();
        let delta = self.codifferential()?;
        Ok(d.compose(&delta)?.add(&delta.compose(&d)?))
    }

    /// Ric_a^b ξ^a ∂/∂ξ^b with Ric_a^b = R_ka^{kb}.
    pub fn ricci_term(&self) -> FormOperator {
        let c = self.coords();
        let mut op = FormOperator::zero(c);
        for a in 0..self.n() {
            for b in 0..self.n() {
                let ric = self.curv.ricci_contraction(a, b);
                if !ric.is_zero() {
                    op = op.add(&FormOperator::term(c, ric, 1 << a, 1 << b, &[]));
                }
            }
        }
        op
    }

    /// ½ R_ab^{kl} ξ^aξ^b ∂/∂ξ^k ∂/∂ξ^l.
    pub fn riemann_term(&self) -> Result<FormOperator, OperatorError> {
        self.quartic(|a, b, k, l| &Expr::num(0.5) * self.curv.raised(a, b, k, l))
    }

    /// R_a^k_b^l ξ^aξ^b ∂/∂ξ^k ∂/∂ξ^l with R_a^k_b^l = g^{km} R_amb^l.
    pub fn riemann_term_alt(&self) -> Result<FormOperator, OperatorError> {
        let n = self.n();
        self.quartic(|a, b, k, l| sum((0..n).map(|m| self.curv.ginv(k, m) * self.curv.riemann(a, m, b, l))))
    }

    /// Σ w(a,b,k,l) ξ^aξ^b ∂_k∂_l.
    fn quartic(&self, w: impl Fn(usize, usize, usize, usize) -> Expr) -> Result<FormOperator, OperatorError> {
        let n = self.n();
        let c = self.coords();
        let mut op = FormOperator::zero(c);
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    continue;
                }
                let xx = FormOperator::xi(c, a).compose(&FormOperator::xi(c, b))?;
                for k in 0..n {
                    for l in 0..n {
                        if k == l {
                            continue;
                        }
                        let coef = w(a, b, k, l).simplify();
                        if coef.is_zero() {
                            continue;
                        }
                        let dd = FormOperator::d_xi(c, k).compose(&FormOperator::d_xi(c, l))?;
                        op = op.add(&xx.compose(&dd)?.scale(&coef));
                    }
                }
            }
        }
        Ok(op)
    }

    /// Δ + Ric_a^b ξ^a∂_b + ½R_ab^{kl} ξ^aξ^b∂_k∂_l.
    pub fn weitzenbock_rhs(&self) -> Result<FormOperator, OperatorError> {
        Ok(self
            .bochner_laplacian()?
            .add(&self.ricci_term())
            .add(&self.riemann_term()?))
    }

    /// Δ + Ric_a^b ξ^a∂_b + R_a^k_b^l ξ^aξ^b∂_k∂_l.
    pub fn weitzenbock_rhs_alt(&self) -> Result<FormOperator, OperatorError> {
        Ok(self
            .bochner_laplacian()?
            .add(&self.ricci_term())
            .add(&self.riemann_term_alt()?))
    }
}
