use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::geometry::{Curvature, ManifoldSpec, PointCurvature};
use crate::grassmann::{gaussian_berezin, GeneratorSet, Multivector};
use crate::par::{self, Execution};
use crate::quadrature::integrate_box_with;
use crate::scalar::NumericScalar;

use super::TStarError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChartContribution {
    pub label: String,
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EulerReport {
    pub manifold: String,
    pub chi_computed: f64,
    pub chi_expected: Option<i64>,
    pub abs_error: Option<f64>,
    pub imag_residual: f64,
    pub nodes_per_dim: usize,
    pub charts: Vec<ChartContribution>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl EulerReport {
    /// True when an expected value is known and matched within `tol`.
    pub fn matches_expected(&self, tol: f64) -> Option<bool> {
        self.abs_error.map(|e| e <= tol)
    }
}

/// Odd generators ξ^0..ξ^{n−1}, θ_0..θ_{n−1}.
pub fn odd_generators(n: usize) -> Arc<GeneratorSet> {
    let names = (1..=n)
        .map(|a| format!("xi{a}"))
        .chain((1..=n).map(|a| format!("theta{a}")));
    GeneratorSet::new(names.collect::<Vec<_>>()).expect("distinct names")
}

fn real(v: f64) -> NumericScalar {
    NumericScalar::from_f64(v)
}

/// Ω^{kl}/2π with Ω^{kl} = ½R_ab^{kl} ξ^aξ^b.
fn curvature_forms(pc: &PointCurvature, set: &Arc<GeneratorSet>) -> Vec<Vec<Multivector<Complex64>>> {
    let n = pc.n;
    (0..n)
        .map(|k| {
            (0..n)
                .map(|l| {
                    let terms = (0..n)
                        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
                        .filter_map(|(a, b)| {
                            let v = pc.raised(a, b, k, l);
                            (v != 0.0).then(|| ((1u64 << a) | (1 << b), real(v / (2.0 * PI))))
                        });
                    Multivector::from_terms(set, terms)
                })
                .collect()
        })
        .collect()
}

/// −½ R_ab^{kl} ξ^aξ^bθ_kθ_l, the curvature part of the Gaussian symbol.
pub fn curvature_exponent(pc: &PointCurvature, set: &Arc<GeneratorSet>) -> Multivector<Complex64> {
    let n = pc.n;
    let mut terms = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for k in 0..n {
                for l in k + 1..n {
                    let v = pc.raised(a, b, k, l);
                    if v != 0.0 {
                        let mask = (1u64 << a) | (1 << b) | (1 << (n + k)) | (1 << (n + l));
                        terms.push((mask, real(-2.0 * v)));
                    }
                }
            }
        }
    }
    Multivector::from_terms(set, terms)
}

/// Pf(Ω/2π) density at one node: top ξ-coefficient times √det g.
fn pfaffian_density(pc: &PointCurvature, set: &Arc<GeneratorSet>) -> Result<Complex64, TStarError> {
    let n = pc.n;
    let theta: Vec<usize> = (n..2 * n).collect();
    let pf = gaussian_berezin(&curvature_forms(pc, set), &theta, set)?;
    let top = pf.coeff((1u64 << n) - 1).coeff(0);
    let sign = if (n / 2) % 2 == 1 { -1.0 } else { 1.0 };
    Ok(top * sign * pc.det_g.sqrt())
}

fn check_dim(spec: &ManifoldSpec) -> Option<String> {
    (spec.dim % 2 == 1).then(|| format!("0, n = {} is odd", spec.dim))
}

/// Σ over charts of ∫ density, each chart's full box with `nodes` per axis.
fn integrate_charts<F>(
    spec: &ManifoldSpec,
    nodes: usize,
    exec: Execution,
    density: F,
) -> Result<(Complex64, Vec<(String, Complex64)>), TStarError>
where
    F: Fn(&PointCurvature) -> Result<Complex64, TStarError> + Sync + Send,
{
    let mut total = Complex64::new(0.0, 0.0);
    let mut parts = Vec::new();
    for chart in &spec.charts {
        let curv = Curvature::new(chart)?;
        let v = integrate_box_with(exec, &chart.ranges, nodes, |x| {
            let pc = curv.at(x)?;
            density(&pc)
        })? * f64::from(spec.orientation);
        total += v;
        parts.push((chart.label.clone(), v));
    }
    Ok((total, parts))
}

fn imag_residual(z: Complex64) -> f64 {
    z.im.abs() / z.re.abs().max(1.0)
}

/// χ(M) = ∫ Pf(Ω/2π), the Pfaffian taken as a Gaussian Berezin integral.
pub fn euler_characteristic(spec: &ManifoldSpec, nodes: usize) -> Result<EulerReport, TStarError> {
    euler_characteristic_with(par::default_execution(), spec, nodes)
}

pub fn euler_characteristic_with(
    exec: Execution,
    spec: &ManifoldSpec,
    nodes: usize,
) -> Result<EulerReport, TStarError> {
    let note = check_dim(spec);
    let (chi, charts) = if note.is_some() {
        let charts = spec
            .charts
            .iter()
            .map(|c| (c.label.clone(), Complex64::new(0.0, 0.0)))
            .collect();
        (Complex64::new(0.0, 0.0), charts)
    } else {
        let set = odd_generators(spec.dim);
        integrate_charts(spec, nodes, exec, |pc| pfaffian_density(pc, &set))?
    };
    Ok(EulerReport {
        manifold: spec.name.clone(),
        chi_computed: chi.re,
        chi_expected: spec.expected_euler,
        abs_error: spec.expected_euler.map(|e| (chi.re - e as f64).abs()),
        imag_residual: imag_residual(chi),
        nodes_per_dim: nodes,
        charts: charts
            .into_iter()
            .map(|(label, v)| ChartContribution {
                label,
                contribution: v.re,
            })
            .collect(),
        note,
    })
}

/// Builds the θ-quadratic part of a Gaussian symbol at a node.
pub type ExponentFn = dyn Fn(&PointCurvature, &Arc<GeneratorSet>) -> Multivector<Complex64> + Sync + Send;

/// Every term must carry exactly two θ's and an even number of ξ's.
fn validate_exponent(e: &Multivector<Complex64>, n: usize) -> Result<(), TStarError> {
    let xi_mask = (1u64 << n) - 1;
    for &mask in e.terms().keys() {
        let thetas = (mask >> n).count_ones();
        let xis = (mask & xi_mask).count_ones();
        if thetas != 2 || xis % 2 == 1 {
            return Err(TStarError::UnsupportedSymbol(format!(
                "exponent term with {xis} xi and {thetas} theta factors"
            )));
        }
    }
    Ok(())
}

/// Str of the Gaussian symbol e^{−g^{ab}p_ap_b + Q}: iⁿ/(2π)ⁿ ∫ over T*M with the
/// p-integral done in closed form and the fiber integral by Berezin.
pub fn supertrace_gaussian(spec: &ManifoldSpec, nodes: usize) -> Result<Complex64, TStarError> {
    supertrace_gaussian_with(par::default_execution(), spec, nodes, &curvature_exponent)
}

pub fn supertrace_gaussian_with(
    exec: Execution,
    spec: &ManifoldSpec,
    nodes: usize,
    exponent: &ExponentFn,
) -> Result<Complex64, TStarError> {
    let n = spec.dim;
    if check_dim(spec).is_some() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let set = odd_generators(n);
    let pairs: Vec<usize> = (0..n).flat_map(|a| [a, n + a]).collect();
    let i = Complex64::new(0.0, 1.0);
    let prefactor = PI.powi(n as i32 / 2) / (2.0 * PI * i).powi(n as i32);
    let (total, _) = integrate_charts(spec, nodes, exec, |pc| {
        let q = exponent(pc, &set);
        validate_exponent(&q, n)?;
        let fiber = q.exp_even_nilpotent()?.berezin(&pairs).scalar_part().coeff(0);
        Ok(prefactor * fiber * pc.det_g.sqrt())
    })?;
    Ok(total)
}
