//! Super symbol calculus for differential forms.

pub mod expr;
pub mod fiber;
pub mod geometry;
pub mod grassmann;
pub mod linalg;
pub mod operators;
pub mod par;
pub mod quadrature;
pub mod random;
pub mod report;
pub mod scalar;
pub mod tstar;
