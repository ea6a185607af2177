//! Stack-machine form of an expression for repeated evaluation at quadrature nodes.

use super::eval::{apply_func, divide, finite, power};
use super::{EvalError, Expr, Func, Node};

#[derive(Debug, Clone, Copy)]
enum Op {
    Const(f64),
    Var(usize),
    Neg,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Call(Func),
}

/// An expression compiled against a fixed variable order.
#[derive(Debug, Clone)]
pub struct CompiledExpr {
    ops: Vec<Op>,
    depth: usize,
}

impl CompiledExpr {
    /// Compiles `e`; every free variable must appear in `vars`.
    pub fn new(e: &Expr, vars: &[String]) -> Result<CompiledExpr, EvalError> {
        let mut ops = Vec::new();
        emit(e, vars, &mut ops)?;
        let mut depth = 0usize;
        let mut max = 0usize;
        for op in &ops {
            match op {
                Op::Const(_) | Op::Var(_) => depth += 1,
                Op::Neg | Op::Call(_) => {}
                _ => depth -= 1,
            }
            max = max.max(depth);
        }
        Ok(CompiledExpr { ops, depth: max })
    }

    /// True when the compiled program is the literal 0.
    pub fn is_zero(&self) -> bool {
        matches!(self.ops.as_slice(), [Op::Const(v)] if *v == 0.0)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        let mut stack = Vec::with_capacity(self.depth);
        self.eval_with(x, &mut stack)
    }

    /// Evaluates reusing `stack` as scratch space.
    pub fn eval_with(&self, x: &[f64], stack: &mut Vec<f64>) -> Result<f64, EvalError> {
        stack.clear();
        for op in &self.ops {
            match *op {
                Op::Const(v) => stack.push(v),
                Op::Var(i) => stack.push(x[i]),
                Op::Neg => {
                    let a = stack.pop().unwrap();
                    stack.push(-a);
                }
                Op::Call(f) => {
                    let a = stack.pop().unwrap();
                    stack.push(apply_func(f, a)?);
                }
                _ => {
                    let b = stack.pop().unwrap();
                    let a = stack.pop().unwrap();
                    let v = match *op {
                        Op::Add => finite(a + b, "addition")?,
                        Op::Sub => finite(a - b, "subtraction")?,
                        Op::Mul => finite(a * b, "multiplication")?,
                        Op::Div => divide(a, b)?,
                        Op::Pow => power(a, b)?,
                        _ => unreachable!(),
                    };
                    stack.push(v);
                }
            }
        }
        Ok(stack.pop().unwrap())
    }
}

fn emit(e: &Expr, vars: &[String], ops: &mut Vec<Op>) -> Result<(), EvalError> {
    match e.node() {
        Node::Num(v) => ops.push(Op::Const(*v)),
        Node::Pi => ops.push(Op::Const(std::f64::consts::PI)),
        Node::Var(name) => {
            let i = vars
                .iter()
                .position(|v| v == name)
                .ok_or_else(|| EvalError::Unbound(name.clone()))?;
            ops.push(Op::Var(i));
        }
        Node::Neg(a) => {
            emit(a, vars, ops)?;
            ops.push(Op::Neg);
        }
        Node::Call(f, a) => {
            emit(a, vars, ops)?;
            ops.push(Op::Call(*f));
        }
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
            emit(a, vars, ops)?;
            emit(b, vars, ops)?;
            ops.push(match e.node() {
                Node::Add(..) => Op::Add,
                Node::Sub(..) => Op::Sub,
                Node::Mul(..) => Op::Mul,
                Node::Div(..) => Op::Div,
                _ => Op::Pow,
            });
        }
    }
    Ok(())
}
