//! Numerical laboratory for discrete operator semigroups: decay of
//! `‖TⁿS‖`, growth of `‖R(λ,T)ᵏS‖`, the resolvent conditions of Kreiss,
//! Ritt and Stolz type, perturbations and weighted summability.

pub mod asymptotics;
pub mod conditions;
pub mod error;
pub mod linalg;
pub mod operators;
pub mod perturbation;
pub mod quadrature;
pub mod resolvent;
pub mod rvfunctions;
pub mod summability;
pub mod trend;

pub use error::{Error, Result};
pub use linalg::{DenseMatrix, C64};
pub use operators::{ComplexVector, DiagonalSymbol, LinearOperator};
