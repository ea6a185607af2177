use std::collections::BTreeMap;
use std::fmt;

use crate::expr::{EvalError, Expr};
use crate::grassmann::product_sign;

/// Inhomogeneous differential form Σ u_I(x) ξ^I on a chart; monomials are masks
/// in ascending generator order.
#[derive(Clone, PartialEq)]
pub struct FormField {
    coords: Vec<String>,
    terms: BTreeMap<u64, Expr>,
}

impl FormField {
    pub fn zero(coords: &[String]) -> FormField {
        FormField {
            coords: coords.to_vec(),
            terms: BTreeMap::new(),
        }
    }

    pub fn function(coords: &[String], f: Expr) -> FormField {
        FormField::monomial(coords, 0, f)
    }

    /// f ξ^I.
    pub fn monomial(coords: &[String], mask: u64, f: Expr) -> FormField {
        let mut u = FormField::zero(coords);
        u.add_term(mask, f);
        u
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn terms(&self) -> &BTreeMap<u64, Expr> {
        &self.terms
    }

    pub fn coeff(&self, mask: u64) -> Expr {
        self.terms.get(&mask).cloned().unwrap_or_else(Expr::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, mask: u64, f: Expr) {
        assert!(mask < 1 << self.dim(), "monomial outside the chart's generators");
        let sum = match self.terms.remove(&mask) {
            Some(old) => (old + f).simplify(),
            None => f.simplify(),
        };
        if !sum.is_zero() {
            self.terms.insert(mask, sum);
        }
    }

    pub fn add(&self, other: &FormField) -> FormField {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &FormField) -> FormField {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, -c);
        }
        out
    }

    /// Multiplication by a function.
    pub fn scale(&self, f: &Expr) -> FormField {
        let mut out = FormField::zero(&self.coords);
        for (m, c) in &self.terms {
            out.add_term(*m, f * c);
        }
        out
    }

    /// ξ^a ∧ u.
    pub fn wedge(&self, a: usize) -> FormField {
        let bit = 1u64 << a;
        let mut out = FormField::zero(&self.coords);
        for (m, c) in &self.terms {
            if m & bit != 0 {
                continue;
            }
            let c = if product_sign(bit, *m) { -c } else { c.clone() };
            out.add_term(m | bit, c);
        }
        out
    }

    /// Left derivative ∂/∂ξ^a.
    pub fn d_xi(&self, a: usize) -> FormField {
        let bit = 1u64 << a;
        let mut out = FormField::zero(&self.coords);
        for (m, c) in &self.terms {
            if m & bit == 0 {
                continue;
            }
            let below = (m & (bit - 1)).count_ones();
            let c = if below % 2 == 1 { -c } else { c.clone() };
            out.add_term(m & !bit, c);
        }
        out
    }

    /// Coefficient-wise ∂/∂x^a.
    pub fn d_x(&self, a: usize) -> FormField {
        let mut out = FormField::zero(&self.coords);
        for (m, c) in &self.terms {
            out.add_term(*m, c.differentiate(&self.coords[a]));
        }
        out
    }

    /// All 2ⁿ coefficients at `x`, indexed by mask.
    pub fn eval_at(&self, x: &[f64]) -> Result<Vec<f64>, EvalError> {
        let bind: Vec<(&str, f64)> = self.coords.iter().map(|c| c.as_str()).zip(x.iter().copied()).collect();
        let mut out = vec![0.0; 1 << self.dim()];
        for (m, c) in &self.terms {
            out[*m as usize] = c.eval_at(&bind)?;
        }
        Ok(out)
    }
}

impl fmt::Debug for FormField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FormField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            for a in 0..self.dim() {
                if m >> a & 1 == 1 {
                    write!(f, " d{}", self.coords[a])?;
                }
            }
        }
        Ok(())
    }
}
