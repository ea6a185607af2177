use super::{Expr, Func, Node};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("domain error: {0}")]
    Domain(String),
}

pub(crate) fn apply_func(f: Func, x: f64) -> Result<f64, EvalError> {
    let v = match f {
        Func::Sin => x.sin(),
        Func::Cos => x.cos(),
        Func::Tan => x.tan(),
        Func::Sinh => x.sinh(),
        Func::Cosh => x.cosh(),
        Func::Tanh => x.tanh(),
        Func::Exp => x.exp(),
        Func::Log => {
            if x <= 0.0 {
                return Err(EvalError::Domain(format!("log of non-positive value {x}")));
            }
            x.ln()
        }
        Func::Sqrt => {
            if x < 0.0 {
                return Err(EvalError::Domain(format!("sqrt of negative value {x}")));
            }
            x.sqrt()
        }
    };
    finite(v, f.name())
}

pub(crate) fn finite(v: f64, what: &str) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::Domain(format!("{what} produced a non-finite value")))
    }
}

pub(crate) fn divide(a: f64, b: f64) -> Result<f64, EvalError> {
    if b == 0.0 {
        return Err(EvalError::Domain("division by zero".into()));
    }
    finite(a / b, "division")
}

pub(crate) fn power(a: f64, b: f64) -> Result<f64, EvalError> {
    let v = if b == b.trunc() && b.abs() <= i32::MAX as f64 {
        if a == 0.0 && b < 0.0 {
            return Err(EvalError::Domain("zero raised to a negative power".into()));
        }
        a.powi(b as i32)
    } else {
        if a < 0.0 {
            return Err(EvalError::Domain(format!(
                "negative base {a} with non-integer exponent {b}"
            )));
        }
        a.powf(b)
    };
    finite(v, "power")
}

pub(crate) fn evaluate(e: &Expr, lookup: &dyn Fn(&str) -> Option<f64>) -> Result<f64, EvalError> {
    match e.node() {
        Node::Num(v) => Ok(*v),
        Node::Pi => Ok(std::f64::consts::PI),
        Node::Var(name) => lookup(name).ok_or_else(|| EvalError::Unbound(name.clone())),
        Node::Neg(a) => Ok(-evaluate(a, lookup)?),
        Node::Add(a, b) => finite(evaluate(a, lookup)? + evaluate(b, lookup)?, "addition"),
        Node::Sub(a, b) => finite(evaluate(a, lookup)? - evaluate(b, lookup)?, "subtraction"),
        Node::Mul(a, b) => finite(evaluate(a, lookup)? * evaluate(b, lookup)?, "multiplication"),
        Node::Div(a, b) => divide(evaluate(a, lookup)?, evaluate(b, lookup)?),
        Node::Pow(a, b) => power(evaluate(a, lookup)?, evaluate(b, lookup)?),
        Node::Call(f, a) => apply_func(*f, evaluate(a, lookup)?),
    }
}
