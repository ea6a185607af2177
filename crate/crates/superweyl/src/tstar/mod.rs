//! Symbols on the cotangent bundle in coordinates (x, p, ξ = dx, θ = ∇p),
//! the action of d there, and the Euler characteristic as a Berezin integral.

mod checks;
mod euler;
mod symbol;
#[cfg(test)]
mod tests;

use thiserror::Error;

use crate::expr::EvalError;
use crate::geometry::GeometryError;
use crate::grassmann::GrassmannError;

pub use checks::{check_d_squared, check_leibniz_defect, dcheck, generators, random_symbol, DCheckConfig};
pub use euler::{
    curvature_exponent, euler_characteristic, euler_characteristic_with, odd_generators, supertrace_gaussian,
    supertrace_gaussian_with, ChartContribution, EulerReport, ExponentFn,
};
pub use symbol::{canonical_bracket, CartanD, Monomial, TStarSymbol};

#[derive(Debug, Error)]
pub enum TStarError {
    #[error("symbols live on different charts")]
    ChartMismatch,
    #[error("unsupported symbol: {0}")]
    UnsupportedSymbol(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Grassmann(#[from] GrassmannError),
}

/// d f for the Cartan-like derivation of `curv`.
pub fn cartan_d(curv: &crate::geometry::Curvature, f: &TStarSymbol) -> Result<TStarSymbol, TStarError> {
    CartanD::new(curv).apply(f)
}

/// d{f,g} − {df,g} − (−1)^f̃ {f,dg}.
pub fn leibniz_defect(
    curv: &crate::geometry::Curvature,
    f: &TStarSymbol,
    g: &TStarSymbol,
) -> Result<TStarSymbol, TStarError> {
    CartanD::new(curv).leibniz_defect(f, g)
}
