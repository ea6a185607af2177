//! Tensor-product Gauss–Legendre quadrature over coordinate boxes.

use std::ops::{Add, Mul};

use num_traits::Zero;

use crate::par::{self, Execution};

/// Nodes and weights on [−1, 1], nodes ascending.
pub fn gauss_legendre(k: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(k >= 1, "need at least one node");
    let mut nodes = vec![0.0; k];
    let mut weights = vec![0.0; k];
    for i in 0..k.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (k as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(k, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(k, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[k - 1 - i] = x;
        weights[i] = w;
        weights[k - 1 - i] = w;
    }
    if k % 2 == 1 {
        nodes[k / 2] = 0.0;
    }
    (nodes, weights)
}

/// P_k(x) and P_k'(x) by the three-term recurrence.
fn legendre(k: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if k == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=k {
        let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, k as f64 * (x * p1 - p0) / (x * x - 1.0))
}

const CHUNK: usize = 256;

/// ∫ f over the box with `k` nodes per axis.
///
/// Node values are summed in fixed chunks of the flattened node index, so the
/// result does not depend on the execution path.
pub fn integrate_box<T, E, F>(ranges: &[(f64, f64)], k: usize, f: F) -> Result<T, E>
where
    T: Zero + Add<Output = T> + Mul<f64, Output = T> + Copy + Send,
    E: Send,
    F: Fn(&[f64]) -> Result<T, E> + Sync + Send,
{
    integrate_box_with(par::default_execution(), ranges, k, f)
}

pub fn integrate_box_with<T, E, F>(exec: Execution, ranges: &[(f64, f64)], k: usize, f: F) -> Result<T, E>
where
    T: Zero + Add<Output = T> + Mul<f64, Output = T> + Copy + Send,
    E: Send,
    F: Fn(&[f64]) -> Result<T, E> + Sync + Send,
{
    let (t, w) = gauss_legendre(k);
    let dim = ranges.len();
    let total = k.pow(dim as u32);
    let half: Vec<(f64, f64)> = ranges
        .iter()
        .map(|(lo, hi)| ((hi - lo) / 2.0, (hi + lo) / 2.0))
        .collect();
    let jac: f64 = half.iter().map(|(h, _)| h).product();
    let chunks = total.div_ceil(CHUNK);
    let partial = par::map_indexed_with(exec, chunks, |c| -> Result<T, E> {
        let mut x = vec![0.0; dim];
        let mut acc = T::zero();
        for flat in c * CHUNK..((c + 1) * CHUNK).min(total) {
            let mut rest = flat;
            let mut weight = 1.0;
            for a in (0..dim).rev() {
                let i = rest % k;
                rest /= k;
                x[a] = half[a].0 * t[i] + half[a].1;
                weight *= w[i];
            }
            acc = acc + f(&x)? * weight;
        }
        Ok(acc)
    });
    let mut sum = T::zero();
    for p in partial {
        sum = sum + p?;
    }
    Ok(sum * jac)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rules_integrate_polynomials_exactly() {
        for k in 1..=12 {
            let (x, w) = gauss_legendre(k);
            for deg in 0..2 * k {
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((got - exact).abs() < 1e-13, "k={k} deg={deg}");
            }
        }
    }

    #[test]
    fn box_integrals() {
        let one = integrate_box(&[(0.0, 1.0), (0.0, 1.0)], 4, |_| Ok::<_, ()>(1.0)).unwrap();
        assert!((one - 1.0).abs() < 1e-14);
        let pi = std::f64::consts::PI;
        let area = integrate_box(&[(0.0, pi), (0.0, 2.0 * pi)], 32, |x| Ok::<_, ()>(x[0].sin())).unwrap();
        assert!((area / (4.0 * pi) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn paths_are_bit_identical() {
        let f = |x: &[f64]| Ok::<_, ()>((x[0] * 3.0).sin() * x[1].exp() + x[2]);
        let r = [(0.0, 1.0), (-1.0, 2.0), (0.5, 0.7)];
        let a = integrate_box_with(Execution::Sequential, &r, 17, f).unwrap();
        let b = integrate_box_with(Execution::Parallel, &r, 17, f).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
