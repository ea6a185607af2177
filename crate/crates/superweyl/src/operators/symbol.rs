use std::fmt;

use num_complex::Complex64;
use num_rational::Rational64;
use rand::Rng;

use crate::fiber::{FiberContext, FiberError, FiberOperator, FiberSymbol};
use crate::geometry::{Curvature, PointCurvature};
use crate::linalg::Matrix;
use crate::random::TestRng;
use crate::report::{Check, Report};
use crate::scalar::{rational_approx, Coeff, ExactScalar, GaussRational, Laurent, NumericScalar};

use super::OperatorError;

/// Tolerance of the NumericScalar fallback.
pub const NUMERIC_TOL: f64 = 1e-10;

/// Curvature at a point in a coefficient ring.
#[derive(Debug, Clone, PartialEq)]
pub struct PointTensors<C: Coeff> {
    pub n: usize,
    /// g^{ab}.
    pub inverse_metric: Matrix<C>,
    /// R_ab^{kl} at `[((a*n + b)*n + k)*n + l]`.
    pub riemann: Vec<Laurent<C>>,
}

impl<C: Coeff> PointTensors<C> {
    pub fn riemann(&self, a: usize, b: usize, k: usize, l: usize) -> &Laurent<C> {
        let n = self.n;
        &self.riemann[((a * n + b) * n + k) * n + l]
    }

    /// Ric_a^b = R_ka^{kb}.
    pub fn ricci(&self) -> Matrix<C> {
        let n = self.n;
        (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| (0..n).fold(Laurent::zero(), |acc, k| &acc + self.riemann(k, a, k, b)))
                    .collect()
            })
            .collect()
    }
}

fn trace<C: Coeff>(m: &Matrix<C>) -> Laurent<C> {
    (0..m.len()).fold(Laurent::zero(), |acc, a| &acc + &m[a][a])
}

fn i_over_hbar<C: Coeff>() -> Laurent<C> {
    &Laurent::i() * &Laurent::hbar(-1)
}

fn scalar_r<C: Coeff>(ctx: &FiberContext<C>) -> Laurent<C> {
    let r = ctx.r();
    Laurent::from_ratio(*r.numer(), *r.denom())
}

/// Σ m_a^b ξ^a θ_b.
fn xi_theta<C: Coeff>(ctx: &FiberContext<C>, m: &Matrix<C>) -> FiberSymbol<C> {
    let mut out = FiberSymbol::zero(ctx.symbol_set());
    for (a, row) in m.iter().enumerate() {
        for (b, v) in row.iter().enumerate() {
            if !v.is_zero() {
                out = &out + &(&ctx.xi(a) * &ctx.theta(b)).scale(v);
            }
        }
    }
    out
}

/// Σ R_ab^{kl} ξ^aξ^bθ_kθ_l.
fn quartic<C: Coeff>(ctx: &FiberContext<C>, t: &PointTensors<C>) -> FiberSymbol<C> {
    let n = t.n;
    let mut out = FiberSymbol::zero(ctx.symbol_set());
    for a in 0..n {
        for b in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v = t.riemann(a, b, k, l);
                    if !v.is_zero() {
                        let m = &(&ctx.xi(a) * &ctx.xi(b)) * &(&ctx.theta(k) * &ctx.theta(l));
                        out = &out + &m.scale(v);
                    }
                }
            }
        }
    }
    out
}

/// A = Ric_a^b ξ^a ∂/∂ξ^b as an operator on Λ.
pub fn operator_a<C: Coeff>(ctx: &FiberContext<C>, ric: &Matrix<C>) -> FiberOperator<C> {
    let (xi, d) = ctx.generator_operators();
    let mut out = FiberOperator::zero(ctx.n());
    for (a, row) in ric.iter().enumerate() {
        for (b, v) in row.iter().enumerate() {
            if !v.is_zero() {
                out = &out + &(&xi[a] * &d[b]).scale(v);
            }
        }
    }
    out
}

/// B = R_ab^{kl} ξ^aξ^b ∂/∂ξ^k ∂/∂ξ^l.
pub fn operator_b<C: Coeff>(ctx: &FiberContext<C>, t: &PointTensors<C>) -> FiberOperator<C> {
    let (xi, d) = ctx.generator_operators();
    let n = t.n;
    let mut out = FiberOperator::zero(n);
    for a in 0..n {
        for b in 0..n {
            let xx = &xi[a] * &xi[b];
            for k in 0..n {
                for l in 0..n {
                    let v = t.riemann(a, b, k, l);
                    if !v.is_zero() {
                        out = &out + &(&xx * &(&d[k] * &d[l])).scale(v);
                    }
                }
            }
        }
    }
    out
}

/// (i/ħ) Ric_a^b ξ^aθ_b + r R.
pub fn sigma_a<C: Coeff>(ctx: &FiberContext<C>, ric: &Matrix<C>) -> FiberSymbol<C> {
    let constant = &scalar_r(ctx) * &trace(ric);
    &xi_theta(ctx, ric).scale(&i_over_hbar()) + &FiberSymbol::scalar(ctx.symbol_set(), constant)
}

/// (i/ħ)² R_ab^{kl}ξ^aξ^bθ_kθ_l − 4r(i/ħ) Ric_a^k ξ^aθ_k − 2r² R.
pub fn sigma_b<C: Coeff>(ctx: &FiberContext<C>, t: &PointTensors<C>) -> FiberSymbol<C> {
    let ih = i_over_hbar::<C>();
    let r = scalar_r(ctx);
    let ric = t.ricci();
    let first = quartic(ctx, t).scale(&(&ih * &ih));
    let second = xi_theta(ctx, &ric).scale(&(&(&Laurent::from_i64(-4) * &r) * &ih));
    let third = &(&Laurent::from_i64(-2) * &(&r * &r)) * &trace(&ric);
    &(&first + &second) + &FiberSymbol::scalar(ctx.symbol_set(), third)
}

/// p-independent part of σ(□): −½ħ⁻² R_ab^{kl}ξ^aξ^bθ_kθ_l + iħ⁻¹(1−2r) Ric ξθ + r(1−r) R.
pub fn hodge_fiber_part<C: Coeff>(ctx: &FiberContext<C>, t: &PointTensors<C>) -> FiberSymbol<C> {
    let r = scalar_r(ctx);
    let one = Laurent::<C>::one();
    let ric = t.ricci();
    let first = quartic(ctx, t).scale(&Laurent::monomial(C::from_ratio(-1, 2), -2));
    let second = xi_theta(ctx, &ric).scale(&(&i_over_hbar() * &(&one - &(&Laurent::from_i64(2) * &r))));
    let third = &(&r * &(&one - &r)) * &trace(&ric);
    &(&first + &second) + &FiberSymbol::scalar(ctx.symbol_set(), third)
}

/// σ(□) = −ħ⁻² g^{ab}p_ap_b + fiber part.
#[derive(Debug, Clone, PartialEq)]
pub struct HodgeSymbol<C: Coeff> {
    pub r: Rational64,
    pub inverse_metric: Matrix<C>,
    pub fiber: FiberSymbol<C>,
}

impl<C: Coeff> HodgeSymbol<C> {
    pub fn new(ctx: &FiberContext<C>, t: &PointTensors<C>) -> Self {
        HodgeSymbol {
            r: ctx.r(),
            inverse_metric: t.inverse_metric.clone(),
            fiber: hodge_fiber_part(ctx, t),
        }
    }

    /// Whether the p-independent part vanishes.
    pub fn is_pure_momentum(&self) -> bool {
        self.fiber.is_zero()
    }

    /// Largest |ħ⁻¹| coefficient in the fiber part.
    pub fn hbar_minus_one_part(&self) -> f64 {
        self.fiber
            .terms()
            .values()
            .map(|c| c.coeff(-1).to_c64().norm())
            .fold(0.0, f64::max)
    }
}

impl<C: Coeff> fmt::Display for HodgeSymbol<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "-hbar^-2 (")?;
        let mut first = true;
        for (a, row) in self.inverse_metric.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                if v.is_zero() {
                    continue;
                }
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                write!(f, "{v} p{} p{}", a + 1, b + 1)?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, ")")?;
        if !self.fiber.is_zero() {
            write!(f, " + {}", self.fiber)?;
        }
        Ok(())
    }
}

fn symbols_agree<C: Coeff>(a: &FiberSymbol<C>, b: &FiberSymbol<C>) -> (bool, f64) {
    let diff = a - b;
    let residual = diff.max_abs();
    if C::EXACT {
        (diff.is_zero(), residual)
    } else {
        let scale = a.max_abs().max(b.max_abs()).max(1.0);
        (residual <= NUMERIC_TOL * scale, residual / scale)
    }
}

/// σ(A), σ(B) and σ(A + B/2) against their closed forms.
pub fn verify_symbol_identities<C: Coeff>(ctx: &FiberContext<C>, t: &PointTensors<C>, ric: &Matrix<C>) -> Report {
    let mut report = Report::default();
    let mut push = |name: &str, lhs: FiberSymbol<C>, rhs: FiberSymbol<C>| {
        let (ok, residual) = symbols_agree(&lhs, &rhs);
        let tol = if C::EXACT { 0.0 } else { NUMERIC_TOL };
        report.push(Check::flag(name, ok, residual, format!("residual {residual:e}")).with_tolerance(tol));
    };
    let a = operator_a(ctx, ric);
    push("sigma(A)", ctx.symbol_of(&a), sigma_a(ctx, ric));
    let b = operator_b(ctx, t);
    push("sigma(B)", ctx.symbol_of(&b), sigma_b(ctx, t));
    let ric_t = t.ricci();
    let half = Laurent::from_ratio(1, 2);
    let combined = &operator_a(ctx, &ric_t) + &b.scale(&half);
    push(
        "sigma(A + B/2) = fiber part of sigma(box)",
        ctx.symbol_of(&combined),
        hodge_fiber_part(ctx, t),
    );
    report
}

/// Exact rational approximation of every entry, if all succeed.
fn rationalize(values: &[f64]) -> Option<Vec<ExactScalar>> {
    values
        .iter()
        .map(|v| rational_approx(*v, 1_000_000, 1e-12).map(|q| ExactScalar::from_rational(&q)))
        .collect()
}

fn tensors_from<C: Coeff>(
    p: &PointCurvature,
    conv: impl Fn(&[f64]) -> Option<Vec<Laurent<C>>>,
) -> Option<PointTensors<C>> {
    let n = p.n;
    let ginv = conv(&p.ginv)?;
    Some(PointTensors {
        n,
        inverse_metric: ginv.chunks(n).map(|r| r.to_vec()).collect(),
        riemann: conv(&p.raised)?,
    })
}

/// σ(□) at a point with its verification, in whichever ring the point data allows.
#[derive(Debug, Clone)]
pub enum PointSymbol {
    Exact(HodgeSymbol<GaussRational>),
    Numeric(HodgeSymbol<Complex64>),
}

impl PointSymbol {
    pub fn is_exact(&self) -> bool {
        matches!(self, PointSymbol::Exact(_))
    }

    pub fn is_pure_momentum(&self) -> bool {
        match self {
            PointSymbol::Exact(s) => s.is_pure_momentum(),
            PointSymbol::Numeric(s) => s.fiber.max_abs() <= NUMERIC_TOL,
        }
    }

    pub fn hbar_minus_one_part(&self) -> f64 {
        match self {
            PointSymbol::Exact(s) => s.hbar_minus_one_part(),
            PointSymbol::Numeric(s) => s.hbar_minus_one_part(),
        }
    }
}

impl fmt::Display for PointSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointSymbol::Exact(s) => write!(f, "{s}"),
            PointSymbol::Numeric(s) => write!(f, "{s}"),
        }
    }
}

/// σ(□) at `x` for ordering `r`, plus the σ(A)/σ(B) checks on the point's curvature.
pub fn hodge_symbol(curv: &Curvature, x: &[f64], r: Rational64) -> Result<(PointSymbol, Report), OperatorError> {
    if !curv.chart().contains(x) {
        return Err(OperatorError::OutsideChart(x.to_vec()));
    }
    let p = curv.at(x)?;
    let n = p.n;
    if let Some(t) = tensors_from(&p, rationalize) {
        let ctx = FiberContext::<GaussRational>::new(n).with_r(r)?;
        let report = verify_symbol_identities(&ctx, &t, &t.ricci());
        return Ok((PointSymbol::Exact(HodgeSymbol::new(&ctx, &t)), report));
    }
    let numeric = |v: &[f64]| Some(v.iter().map(|x| NumericScalar::from_f64(*x)).collect());
    let t = tensors_from(&p, numeric).expect("numeric conversion is total");
    let ctx = FiberContext::<Complex64>::new(n).with_r(r)?;
    let report = verify_symbol_identities(&ctx, &t, &t.ricci());
    Ok((PointSymbol::Numeric(HodgeSymbol::new(&ctx, &t)), report))
}

fn small_rational(rng: &mut TestRng) -> ExactScalar {
    let num = rng.gen_range(-5..=5);
    let den = rng.gen_range(1..=4);
    ExactScalar::from_ratio(num, den)
}

/// Random R_ab^{kl}, antisymmetric in (a,b) and in (k,l), with a random matrix for A.
pub fn random_tensors(rng: &mut TestRng, n: usize) -> (PointTensors<GaussRational>, Matrix<GaussRational>) {
    let mut riemann = vec![ExactScalar::zero(); n.pow(4)];
    let at = |a: usize, b: usize, k: usize, l: usize| ((a * n + b) * n + k) * n + l;
    for a in 0..n {
        for b in a + 1..n {
            for k in 0..n {
                for l in k + 1..n {
                    let v = small_rational(rng);
                    riemann[at(a, b, k, l)] = v.clone();
                    riemann[at(b, a, k, l)] = -&v;
                    riemann[at(a, b, l, k)] = -&v;
                    riemann[at(b, a, l, k)] = v;
                }
            }
        }
    }
    let ric = (0..n).map(|_| (0..n).map(|_| small_rational(rng)).collect()).collect();
    let t = PointTensors {
        n,
        inverse_metric: crate::linalg::identity(n),
        riemann,
    };
    (t, ric)
}

/// Symbol identities over `cases` random tensor inputs per (n, r).
pub fn verify_random_symbol_identities(
    rng: &mut TestRng,
    ns: &[usize],
    rs: &[Rational64],
    cases: usize,
) -> Result<Report, FiberError> {
    let mut report = Report::default();
    for &n in ns {
        for &r in rs {
            let ctx = FiberContext::<GaussRational>::new(n).with_r(r)?;
            let mut failures = 0;
            for _ in 0..cases {
                let (t, ric) = random_tensors(rng, n);
                if !verify_symbol_identities(&ctx, &t, &ric).all_passed() {
                    failures += 1;
                }
            }
            report.push(Check::exact(format!("symbol identities n={n} r={r}"), failures, cases));
        }
    }
    Ok(report)
}
