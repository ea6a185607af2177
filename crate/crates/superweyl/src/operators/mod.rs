//! Differential operators on forms over a chart and the Weitzenböck checks.
//!
//! Forms are Σ u_I(x) ξ^I with ξ^a = dx^a. Operators are kept normal ordered:
//! multiplications by ξ to the left of ξ-derivatives, x-derivatives rightmost.

mod checks;
mod field;
mod laplace;
mod operator;
mod symbol;
#[cfg(test)]
mod tests;

use thiserror::Error;

use crate::expr::EvalError;
use crate::fiber::FiberError;

pub use checks::{check_against, check_complex, check_weitzenbock, test_field_suite, FieldCheckConfig};
pub use field::FormField;
pub use laplace::FormCalculus;
pub use operator::{FormOperator, MAX_X_ORDER};
pub use symbol::{
    hodge_fiber_part, hodge_symbol, operator_a, operator_b, random_tensors, sigma_a, sigma_b,
    verify_random_symbol_identities, verify_symbol_identities, HodgeSymbol, PointSymbol, PointTensors, NUMERIC_TOL,
};

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("composition would need x-derivatives of order {0}")]
    OrderTooHigh(usize),
    #[error("vector field has {got} components, chart has dimension {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("point {0:?} lies outside the chart")]
    OutsideChart(Vec<f64>),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Fiber(#[from] FiberError),
}
