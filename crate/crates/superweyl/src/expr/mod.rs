//! Scalar expressions over named real variables.
//!
//! Metric components and form coefficients are written in this language. Trees
//! are immutable and shared through `Arc`, so cloning is cheap and expressions
//! can be read from many threads.

mod compile;
mod diff;
mod eval;
mod parse;
mod simplify;

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

pub use compile::CompiledExpr;
pub use eval::EvalError;
pub use parse::{parse, ParseError};

/// Elementary functions understood by the parser.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 9] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == name)
    }
}

/// A node of the expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Pi,
    Var(String),
    Neg(Expr),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Pow(Expr, Expr),
    Call(Func, Expr),
}

/// Shared handle to an expression tree.
#[derive(Clone, PartialEq)]
pub struct Expr(Arc<Node>);

impl Expr {
    pub fn new(node: Node) -> Expr {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn num(v: f64) -> Expr {
        Expr::new(Node::Num(v))
    }

    pub fn zero() -> Expr {
        Expr::num(0.0)
    }

    pub fn one() -> Expr {
        Expr::num(1.0)
    }

    pub fn pi() -> Expr {
        Expr::new(Node::Pi)
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::new(Node::Var(name.into()))
    }

    pub fn pow(&self, exponent: Expr) -> Expr {
        Expr::new(Node::Pow(self.clone(), exponent))
    }

    pub fn powi(&self, k: i32) -> Expr {
        self.pow(Expr::num(k as f64))
    }

    pub fn call(f: Func, arg: Expr) -> Expr {
        Expr::new(Node::Call(f, arg))
    }

    pub fn sin(&self) -> Expr {
        Expr::call(Func::Sin, self.clone())
    }

    pub fn cos(&self) -> Expr {
        Expr::call(Func::Cos, self.clone())
    }

    pub fn sqrt(&self) -> Expr {
        Expr::call(Func::Sqrt, self.clone())
    }

    pub fn log(&self) -> Expr {
        Expr::call(Func::Log, self.clone())
    }

    /// Literal value if the tree is a bare number.
    pub fn as_num(&self) -> Option<f64> {
        match self.node() {
            Node::Num(v) => Some(*v),
            _ => None,
        }
    }

    /// True for the literal 0. Expressions that merely evaluate to 0 are not detected.
    pub fn is_zero(&self) -> bool {
        self.as_num() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_num() == Some(1.0)
    }

    pub fn contains_var(&self, name: &str) -> bool {
        match self.node() {
            Node::Num(_) | Node::Pi => false,
            Node::Var(v) => v == name,
            Node::Neg(a) | Node::Call(_, a) => a.contains_var(name),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                a.contains_var(name) || b.contains_var(name)
            }
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self.node() {
            Node::Num(_) | Node::Pi => {}
            Node::Var(v) => {
                out.insert(v.clone());
            }
            Node::Neg(a) | Node::Call(_, a) => a.collect_vars(out),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Replaces every occurrence of variable `name` by `value`.
    pub fn substitute(&self, name: &str, value: &Expr) -> Expr {
        if !self.contains_var(name) {
            return self.clone();
        }
        let s = |e: &Expr| e.substitute(name, value);
        match self.node() {
            Node::Var(_) => value.clone(),
            Node::Num(_) | Node::Pi => self.clone(),
            Node::Neg(a) => Expr::new(Node::Neg(s(a))),
            Node::Call(f, a) => Expr::call(*f, s(a)),
            Node::Add(a, b) => Expr::new(Node::Add(s(a), s(b))),
            Node::Sub(a, b) => Expr::new(Node::Sub(s(a), s(b))),
            Node::Mul(a, b) => Expr::new(Node::Mul(s(a), s(b))),
            Node::Div(a, b) => Expr::new(Node::Div(s(a), s(b))),
            Node::Pow(a, b) => Expr::new(Node::Pow(s(a), s(b))),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self.node() {
            Node::Num(_) | Node::Pi | Node::Var(_) => 1,
            Node::Neg(a) | Node::Call(_, a) => 1 + a.size(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }

    pub fn differentiate(&self, var: &str) -> Expr {
        diff::differentiate(self, var)
    }

    pub fn simplify(&self) -> Expr {
        simplify::simplify(self)
    }

    pub fn evaluate<F>(&self, lookup: F) -> Result<f64, EvalError>
    where
        F: Fn(&str) -> Option<f64>,
    {
        eval::evaluate(self, &lookup)
    }

    /// Evaluates with `(name, value)` pairs.
    pub fn eval_at(&self, bindings: &[(&str, f64)]) -> Result<f64, EvalError> {
        self.evaluate(|name| bindings.iter().find(|(n, _)| *n == name).map(|(_, v)| *v))
    }

    /// Structural total order used to canonicalize products.
    pub(crate) fn structural_cmp(&self, other: &Expr) -> Ordering {
        fn rank(n: &Node) -> u8 {
            match n {
                Node::Num(_) => 0,
                Node::Pi => 1,
                Node::Var(_) => 2,
                Node::Call(..) => 3,
                Node::Pow(..) => 4,
                Node::Mul(..) => 5,
                Node::Div(..) => 6,
                Node::Add(..) => 7,
                Node::Sub(..) => 8,
                Node::Neg(_) => 9,
            }
        }
        let (x, y) = (self.node(), other.node());
        match rank(x).cmp(&rank(y)) {
            Ordering::Equal => {}
            o => return o,
        }
        match (x, y) {
            (Node::Num(a), Node::Num(b)) => a.total_cmp(b),
            (Node::Pi, Node::Pi) => Ordering::Equal,
            (Node::Var(a), Node::Var(b)) => a.cmp(b),
            (Node::Neg(a), Node::Neg(b)) => a.structural_cmp(b),
            (Node::Call(f, a), Node::Call(g, b)) => f.cmp(g).then_with(|| a.structural_cmp(b)),
            (Node::Add(a1, b1), Node::Add(a2, b2))
            | (Node::Sub(a1, b1), Node::Sub(a2, b2))
            | (Node::Mul(a1, b1), Node::Mul(a2, b2))
            | (Node::Div(a1, b1), Node::Div(a2, b2))
            | (Node::Pow(a1, b1), Node::Pow(a2, b2)) => a1.structural_cmp(a2).then_with(|| b1.structural_cmp(b2)),
            _ => unreachable!("ranks agree"),
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

// Precedence levels used when printing: sums 1, products 2, negation 3, powers 4, atoms 5.
fn prec(e: &Expr) -> u8 {
    match e.node() {
        Node::Add(..) | Node::Sub(..) => 1,
        Node::Mul(..) | Node::Div(..) => 2,
        Node::Neg(_) => 3,
        Node::Num(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => 3,
        Node::Pow(..) => 4,
        _ => 5,
    }
}

fn write_prec(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if prec(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Num(v) => write!(f, "{v}"),
            Node::Pi => write!(f, "pi"),
            Node::Var(v) => write!(f, "{v}"),
            Node::Neg(a) => {
                write!(f, "-")?;
                write_prec(f, a, 3)
            }
            Node::Add(a, b) => {
                write_prec(f, a, 1)?;
                write!(f, " + ")?;
                write_prec(f, b, 2)
            }
            Node::Sub(a, b) => {
                write_prec(f, a, 1)?;
                write!(f, " - ")?;
                write_prec(f, b, 2)
            }
            Node::Mul(a, b) => {
                write_prec(f, a, 2)?;
                write!(f, "*")?;
                write_prec(f, b, 3)
            }
            Node::Div(a, b) => {
                write_prec(f, a, 2)?;
                write!(f, "/")?;
                write_prec(f, b, 3)
            }
            Node::Pow(a, b) => {
                write_prec(f, a, 5)?;
                write!(f, "^")?;
                write_prec(f, b, 3)
            }
            Node::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $variant:ident) => {
        impl std::ops::$trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::new(Node::$variant(self, rhs))
            }
        }
        impl std::ops::$trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::new(Node::$variant(self.clone(), rhs.clone()))
            }
        }
        impl std::ops::$trait<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::new(Node::$variant(self, Expr::num(rhs)))
            }
        }
    };
}

binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);
binop!(Div, div, Div);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::new(Node::Neg(self))
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::new(Node::Neg(self.clone()))
    }
}

impl From<f64> for Expr {
    fn from(v: f64) -> Expr {
        Expr::num(v)
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Expr, ParseError> {
        parse(s)
    }
}

/// Sum of expressions, simplified.
pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
    let mut acc: Option<Expr> = None;
    for t in terms {
        acc = Some(match acc {
            None => t,
            Some(a) => a + t,
        });
    }
    acc.unwrap_or_else(Expr::zero).simplify()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_round_trips_precedence() {
        for src in [
            "-x^2",
            "(-x)^2",
            "2^-1",
            "a - (b - c)",
            "a/(b*c)",
            "x^y^z",
            "(x^y)^z",
            "-(a + b)*c",
        ] {
            let e = parse(src).unwrap();
            let again = parse(&e.to_string()).unwrap();
            assert_eq!(e, again, "{src} printed as {e}");
        }
    }

    #[test]
    fn substitution_replaces_variables() {
        let e = parse("rho^2*sin(th)").unwrap();
        let s = e.substitute("rho", &Expr::num(3.0));
        assert!((s.eval_at(&[("th", 0.5)]).unwrap() - 9.0 * 0.5f64.sin()).abs() < 1e-15);
        assert!(!s.contains_var("rho"));
    }
}
