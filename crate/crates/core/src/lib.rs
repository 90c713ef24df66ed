//! Fully nonlinear Hessian equations of `(n−1)`-form type: elementary
//! symmetric functions, the operators built from them, numerical checks of
//! their ellipticity inequalities, and a finite-difference Robin solver.

pub mod ellipticity;
pub mod error;
pub mod io;
pub mod operator;
pub mod solver;
pub mod symfun;

pub use error::{ConeViolation, Error, Result};
pub use operator::{OperatorSpec, SymMatrix};
pub use symfun::Spectrum;
