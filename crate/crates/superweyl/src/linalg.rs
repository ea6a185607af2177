//! Small dense matrices over Laurent scalars.

use crate::scalar::{Coeff, Laurent};

pub type Matrix<C> = Vec<Vec<Laurent<C>>>;

pub fn identity<C: Coeff>(n: usize) -> Matrix<C> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Laurent::one() } else { Laurent::zero() })
                .collect()
        })
        .collect()
}

pub fn is_square<C: Coeff>(m: &Matrix<C>) -> bool {
    m.iter().all(|row| row.len() == m.len())
}

fn minor<C: Coeff>(m: &Matrix<C>, row: usize, col: usize) -> Matrix<C> {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, r)| {
            r.iter()
                .enumerate()
                .filter(|(j, _)| *j != col)
                .map(|(_, v)| v.clone())
                .collect()
        })
        .collect()
}

/// Determinant by cofactor expansion along the first row.
pub fn det<C: Coeff>(m: &Matrix<C>) -> Laurent<C> {
    match m.len() {
        0 => Laurent::one(),
        1 => m[0][0].clone(),
        2 => &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0]),
        n => {
            let mut acc = Laurent::zero();
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let term = &m[0][j] * &det(&minor(m, 0, j));
                if j % 2 == 0 {
                    acc += &term;
                } else {
                    acc -= &term;
                }
            }
            acc
        }
    }
}

/// Inverse via the adjugate; `None` if the determinant is not an invertible monomial.
pub fn inverse<C: Coeff>(m: &Matrix<C>) -> Option<Matrix<C>> {
    let n = m.len();
    let d_inv = det(m).inv()?;
    Some(
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let cof = det(&minor(m, j, i));
                        let v = &cof * &d_inv;
                        if (i + j) % 2 == 0 {
                            v
                        } else {
                            -v
                        }
                    })
                    .collect()
            })
            .collect(),
    )
}

pub fn matmul<C: Coeff>(a: &Matrix<C>, b: &Matrix<C>) -> Matrix<C> {
    let n = a.len();
    let k = b.first().map_or(0, Vec::len);
    (0..n)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let mut acc = Laurent::zero();
                    for (l, bl) in b.iter().enumerate() {
                        if !a[i][l].is_zero() && !bl[j].is_zero() {
                            acc += &(&a[i][l] * &bl[j]);
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn transpose<C: Coeff>(a: &Matrix<C>) -> Matrix<C> {
    let k = a.first().map_or(0, Vec::len);
    (0..k).map(|j| a.iter().map(|row| row[j].clone()).collect()).collect()
}
