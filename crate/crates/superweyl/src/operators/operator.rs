use std::collections::BTreeMap;
use std::fmt;

use crate::expr::Expr;
use crate::grassmann::product_sign;

use super::{FormField, OperatorError};

/// Highest total order in ∂/∂x a [`FormOperator`] may carry.
pub const MAX_X_ORDER: usize = 2;

/// Normal-ordered term c(x) ξ^I (∂/∂ξ)^J (∂/∂x)^α.
///
/// (∂/∂ξ)^J = ∂_{j1}∘∂_{j2}∘… for j1 < j2 < …; ξ^I likewise ascending.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Key {
    xi: u64,
    dxi: u64,
    dx: Vec<usize>,
}

#[derive(Clone, PartialEq)]
pub struct FormOperator {
    coords: Vec<String>,
    terms: BTreeMap<Key, Expr>,
}

/// ∂^J ξ^I = Σ sign · ξ^K ∂^L.
fn normal_order(j: u64, i: u64) -> Vec<(bool, u64, u64)> {
    if j == 0 {
        return vec![(false, i, 0)];
    }
    let low = j & j.wrapping_neg();
    let mut out: BTreeMap<(u64, u64), i32> = BTreeMap::new();
    for (neg, k, l) in normal_order(j & !low, i) {
        let s = if neg { -1 } else { 1 };
        if k & low != 0 {
            let below = (k & (low - 1)).count_ones() as i32;
            *out.entry((k & !low, l)).or_default() += s * if below % 2 == 1 { -1 } else { 1 };
        }
        let pass = if k.count_ones() % 2 == 1 { -1 } else { 1 };
        *out.entry((k, l | low)).or_default() += s * pass;
    }
    out.into_iter()
        .filter(|(_, c)| *c != 0)
        .map(|((k, l), c)| {
            debug_assert!(c.abs() == 1);
            (c < 0, k, l)
        })
        .collect()
}

/// Sub-multisets of a sorted list as (taken, rest) pairs, with multiplicity.
fn splits(alpha: &[usize]) -> Vec<(Vec<usize>, Vec<usize>)> {
    let k = alpha.len();
    (0..1u32 << k)
        .map(|s| {
            let (mut taken, mut rest) = (vec![], vec![]);
            for (i, a) in alpha.iter().enumerate() {
                if s >> i & 1 == 1 {
                    taken.push(*a);
                } else {
                    rest.push(*a);
                }
            }
            (taken, rest)
        })
        .collect()
}

impl FormOperator {
    pub fn zero(coords: &[String]) -> FormOperator {
        FormOperator {
            coords: coords.to_vec(),
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(coords: &[String]) -> FormOperator {
        FormOperator::term(coords, Expr::one(), 0, 0, &[])
    }

    /// c ξ^I (∂/∂ξ)^J (∂/∂x)^α.
    pub fn term(coords: &[String], c: Expr, xi: u64, dxi: u64, dx: &[usize]) -> FormOperator {
        let mut op = FormOperator::zero(coords);
        let mut dx = dx.to_vec();
        dx.sort_unstable();
        op.add_key(Key { xi, dxi, dx }, c);
        op
    }

    /// Multiplication by a function.
    pub fn function(coords: &[String], f: Expr) -> FormOperator {
        FormOperator::term(coords, f, 0, 0, &[])
    }

    /// ξ^a.
    pub fn xi(coords: &[String], a: usize) -> FormOperator {
        FormOperator::term(coords, Expr::one(), 1 << a, 0, &[])
    }

    /// ∂/∂ξ^a.
    pub fn d_xi(coords: &[String], a: usize) -> FormOperator {
        FormOperator::term(coords, Expr::one(), 0, 1 << a, &[])
    }

    /// ∂/∂x^a.
    pub fn d_x(coords: &[String], a: usize) -> FormOperator {
        FormOperator::term(coords, Expr::one(), 0, 0, &[a])
    }

    fn add_key(&mut self, key: Key, c: Expr) {
        assert!(key.dx.len() <= MAX_X_ORDER, "x-order above {MAX_X_ORDER}");
        let sum = match self.terms.remove(&key) {
            Some(old) => (old + c).simplify(),
            None => c.simplify(),
        };
        if !sum.is_zero() {
            self.terms.insert(key, sum);
        }
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest ∂/∂x order present.
    pub fn order(&self) -> usize {
        self.terms.keys().map(|k| k.dx.len()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &FormOperator) -> FormOperator {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_key(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &FormOperator) -> FormOperator {
        self.add(&other.scale(&Expr::num(-1.0)))
    }

    /// Left multiplication by a function.
    pub fn scale(&self, f: &Expr) -> FormOperator {
        let mut out = FormOperator::zero(&self.coords);
        for (k, c) in &self.terms {
            out.add_key(k.clone(), f * c);
        }
        out
    }

    /// Normal-ordered product self ∘ other.
    pub fn compose(&self, other: &FormOperator) -> Result<FormOperator, OperatorError> {
        let mut out = FormOperator::zero(&self.coords);
        for (k1, c1) in &self.terms {
            for (k2, c2) in &other.terms {
                for (taken, rest) in splits(&k1.dx) {
                    let mut c2d = c2.clone();
                    for a in &taken {
                        c2d = c2d.differentiate(&self.coords[*a]);
                    }
                    if c2d.is_zero() {
                        continue;
                    }
                    let mut dx = rest;
                    dx.extend(&k2.dx);
                    dx.sort_unstable();
                    if dx.len() > MAX_X_ORDER {
                        return Err(OperatorError::OrderTooHigh(dx.len()));
                    }
                    for (neg, k, l) in normal_order(k1.dxi, k2.xi) {
                        if k1.xi & k != 0 || l & k2.dxi != 0 {
                            continue;
                        }
                        let sign = neg ^ product_sign(k1.xi, k) ^ product_sign(l, k2.dxi);
                        let c = c1 * &c2d;
                        let c = if sign { -c } else { c };
                        out.add_key(
                            Key {
                                xi: k1.xi | k,
                                dxi: l | k2.dxi,
                                dx: dx.clone(),
                            },
                            c,
                        );
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, u: &FormField) -> FormField {
        let mut out = FormField::zero(&self.coords);
        let n = self.coords.len();
        for (k, c) in &self.terms {
            let mut v = u.clone();
            for a in &k.dx {
                v = v.d_x(*a);
            }
            for j in (0..n).rev().filter(|j| k.dxi >> j & 1 == 1) {
                v = v.d_xi(j);
            }
            for i in (0..n).rev().filter(|i| k.xi >> i & 1 == 1) {
                v = v.wedge(i);
            }
            out = out.add(&v.scale(c));
        }
        out
    }
}

impl fmt::Debug for FormOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FormOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let n = self.coords.len();
        for (i, (k, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            for a in (0..n).filter(|a| k.xi >> a & 1 == 1) {
                write!(f, " xi{}", a + 1)?;
            }
            for a in (0..n).filter(|a| k.dxi >> a & 1 == 1) {
                write!(f, " d/dxi{}", a + 1)?;
            }
            for a in &k.dx {
                write!(f, " d/d{}", self.coords[*a])?;
            }
        }
        Ok(())
    }
}
