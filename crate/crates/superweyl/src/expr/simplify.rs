//! Best-effort simplifier.
//!
//! Sums are flattened into `constant + Σ c_i t_i` with like terms merged by
//! structural equality; products into `c · Π b_j^{k_j}` with equal bases merged
//! and factors sorted. Neither form is canonical, but both kill the zeros that
//! pile up in tensor formulas.

use std::cmp::Ordering;

use super::eval::apply_func;
use super::{Expr, Node};

pub(crate) fn simplify(e: &Expr) -> Expr {
    match e.node() {
        Node::Num(_) | Node::Pi | Node::Var(_) => e.clone(),
        Node::Neg(_) | Node::Add(..) | Node::Sub(..) => simplify_sum(e),
        Node::Mul(..) | Node::Div(..) => simplify_product(e),
        Node::Pow(a, b) => simplify_pow(&simplify(a), &simplify(b)),
        Node::Call(f, a) => {
            let a = simplify(a);
            if let Some(v) = a.as_num() {
                if let Ok(r) = apply_func(*f, v) {
                    return Expr::num(r);
                }
            }
            Expr::call(*f, a)
        }
    }
}

fn simplify_pow(a: &Expr, b: &Expr) -> Expr {
    match (a.as_num(), b.as_num()) {
        (_, Some(k)) if k == 1.0 => a.clone(),
        (_, Some(k)) if k == 0.0 => Expr::one(),
        (Some(x), _) if x == 1.0 => Expr::one(),
        (Some(x), Some(k)) => match super::eval::power(x, k) {
            Ok(v) => Expr::num(v),
            Err(_) => a.pow(b.clone()),
        },
        _ => a.pow(b.clone()),
    }
}

/// Pushes the linear terms of an already simplified expression.
fn push_linear(e: &Expr, coef: f64, constant: &mut f64, terms: &mut Vec<(Expr, f64)>) {
    match e.node() {
        Node::Num(v) => *constant += coef * v,
        Node::Neg(a) => push_linear(a, -coef, constant, terms),
        Node::Add(a, b) => {
            push_linear(a, coef, constant, terms);
            push_linear(b, coef, constant, terms);
        }
        Node::Sub(a, b) => {
            push_linear(a, coef, constant, terms);
            push_linear(b, -coef, constant, terms);
        }
        Node::Mul(a, b) if a.as_num().is_some() => push_linear(b, coef * a.as_num().unwrap(), constant, terms),
        _ => {
            if let Some(slot) = terms.iter_mut().find(|(t, _)| t == e) {
                slot.1 += coef;
            } else {
                terms.push((e.clone(), coef));
            }
        }
    }
}

fn collect_sum(e: &Expr, coef: f64, constant: &mut f64, terms: &mut Vec<(Expr, f64)>) {
    match e.node() {
        Node::Neg(a) => collect_sum(a, -coef, constant, terms),
        Node::Add(a, b) => {
            collect_sum(a, coef, constant, terms);
            collect_sum(b, coef, constant, terms);
        }
        Node::Sub(a, b) => {
            collect_sum(a, coef, constant, terms);
            collect_sum(b, -coef, constant, terms);
        }
        _ => push_linear(&simplify(e), coef, constant, terms),
    }
}

fn scaled(t: &Expr, c: f64) -> Expr {
    if c == 1.0 {
        t.clone()
    } else {
        Expr::num(c) * t.clone()
    }
}

fn simplify_sum(e: &Expr) -> Expr {
    let mut constant = 0.0;
    let mut terms = Vec::new();
    collect_sum(e, 1.0, &mut constant, &mut terms);
    let mut acc: Option<Expr> = None;
    for (t, c) in terms.into_iter().filter(|(_, c)| *c != 0.0) {
        acc = Some(match acc {
            None if c == -1.0 => -t,
            None => scaled(&t, c),
            Some(a) if c < 0.0 => a - scaled(&t, -c),
            Some(a) => a + scaled(&t, c),
        });
    }
    match acc {
        None => Expr::num(constant),
        Some(a) if constant > 0.0 => a + Expr::num(constant),
        Some(a) if constant < 0.0 => a - Expr::num(-constant),
        Some(a) => a,
    }
}

struct Product {
    coef: f64,
    factors: Vec<(Expr, f64)>,
}

impl Product {
    fn push_factor(&mut self, base: Expr, k: f64) {
        if let Some(slot) = self.factors.iter_mut().find(|(b, _)| *b == base) {
            slot.1 += k;
        } else {
            self.factors.push((base, k));
        }
    }

    /// Walks a simplified expression contributing `e^sign`.
    fn absorb(&mut self, e: &Expr, sign: f64) {
        match e.node() {
            Node::Num(v) if sign > 0.0 => self.coef *= v,
            Node::Num(v) if *v != 0.0 => self.coef /= v,
            Node::Neg(a) => {
                self.coef = -self.coef;
                self.absorb(a, sign);
            }
            Node::Mul(a, b) => {
                self.absorb(a, sign);
                self.absorb(b, sign);
            }
            Node::Div(a, b) => {
                self.absorb(a, sign);
                self.absorb(b, -sign);
            }
            Node::Pow(base, k) if k.as_num().is_some() => self.push_factor(base.clone(), sign * k.as_num().unwrap()),
            _ => self.push_factor(e.clone(), sign),
        }
    }
}

fn collect_product(e: &Expr, sign: f64, p: &mut Product) {
    match e.node() {
        Node::Mul(a, b) => {
            collect_product(a, sign, p);
            collect_product(b, sign, p);
        }
        Node::Div(a, b) => {
            collect_product(a, sign, p);
            collect_product(b, -sign, p);
        }
        _ => p.absorb(&simplify(e), sign),
    }
}

fn power_factor(base: &Expr, k: f64) -> Expr {
    if k == 1.0 {
        base.clone()
    } else {
        base.pow(Expr::num(k))
    }
}

fn product_of(fs: &[Expr]) -> Expr {
    let mut it = fs.iter();
    let first = it.next().cloned().unwrap_or_else(Expr::one);
    it.fold(first, |acc, f| acc * f.clone())
}

fn simplify_product(e: &Expr) -> Expr {
    let mut p = Product {
        coef: 1.0,
        factors: Vec::new(),
    };
    collect_product(e, 1.0, &mut p);
    if p.coef == 0.0 {
        return Expr::zero();
    }
    if !p.coef.is_finite() {
        // Leave overflow for the evaluator to report.
        return e.clone();
    }
    p.factors.retain(|(_, k)| *k != 0.0);
    p.factors.sort_by(|a, b| match a.0.structural_cmp(&b.0) {
        Ordering::Equal => a.1.total_cmp(&b.1),
        o => o,
    });
    let num: Vec<Expr> = p
        .factors
        .iter()
        .filter(|(_, k)| *k > 0.0)
        .map(|(b, k)| power_factor(b, *k))
        .collect();
    let den: Vec<Expr> = p
        .factors
        .iter()
        .filter(|(_, k)| *k < 0.0)
        .map(|(b, k)| power_factor(b, -*k))
        .collect();
    let body = if den.is_empty() {
        product_of(&num)
    } else {
        product_of(&num) / product_of(&den)
    };
    let body_is_one = num.is_empty() && den.is_empty();
    match p.coef {
        c if body_is_one => Expr::num(c),
        c if c == 1.0 => body,
        c if c == -1.0 => -body,
        c => Expr::num(c) * body,
    }
}
