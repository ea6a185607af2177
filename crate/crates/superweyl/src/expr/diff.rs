use super::{Expr, Func, Node};

/// Exact symbolic derivative, simplified. Unknown variables differentiate to 0.
pub(crate) fn differentiate(e: &Expr, var: &str) -> Expr {
    raw(e, var).simplify()
}

fn raw(e: &Expr, var: &str) -> Expr {
    if !e.contains_var(var) {
        return Expr::zero();
    }
    match e.node() {
        Node::Num(_) | Node::Pi => Expr::zero(),
        Node::Var(_) => Expr::one(),
        Node::Neg(a) => -raw(a, var),
        Node::Add(a, b) => raw(a, var) + raw(b, var),
        Node::Sub(a, b) => raw(a, var) - raw(b, var),
        Node::Mul(a, b) => raw(a, var) * b.clone() + a.clone() * raw(b, var),
        Node::Div(a, b) => (raw(a, var) * b.clone() - a.clone() * raw(b, var)) / b.powi(2),
        Node::Pow(a, b) => {
            if !b.contains_var(var) {
                b.clone() * a.pow(b.clone() - 1.0) * raw(a, var)
            } else if !a.contains_var(var) {
                e.clone() * a.log() * raw(b, var)
            } else {
                e.clone() * (raw(b, var) * a.log() + b.clone() * raw(a, var) / a.clone())
            }
        }
        Node::Call(f, a) => {
            let da = raw(a, var);
            let outer = match f {
                Func::Sin => a.cos(),
                Func::Cos => -a.sin(),
                Func::Tan => Expr::one() / a.cos().powi(2),
                Func::Sinh => Expr::call(Func::Cosh, a.clone()),
                Func::Cosh => Expr::call(Func::Sinh, a.clone()),
                Func::Tanh => Expr::one() - Expr::call(Func::Tanh, a.clone()).powi(2),
                Func::Exp => e.clone(),
                Func::Log => Expr::one() / a.clone(),
                Func::Sqrt => Expr::one() / (Expr::num(2.0) * e.clone()),
            };
            outer * da
        }
    }
}
