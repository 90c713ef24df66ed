//! Finite-difference discretization of the Robin problem on a box and its
//! Newton/continuation solver.

mod continuation;
mod diagnostics;
mod discretize;
mod grid;
pub mod linalg;
mod manufactured;
mod newton;
mod problem;
mod report;

pub use continuation::{continuation_solve, starting_problem, Schedule};
pub use diagnostics::{diagnostics, field_diagnostics};
pub use discretize::{hessian_at, jacobian, normal_derivative, residual};
pub use grid::{BoxGrid, ScalarField};
pub use linalg::{CsrMatrix, LinearSolverKind};
pub use manufactured::{
    manufactured_problem, ClosedForm, ManufacturedCase, Paraboloid, PerturbedParaboloid, Quadratic,
};
pub use newton::{newton_solve, NewtonOptions};
pub use problem::ProblemSpec;
pub use report::{Diagnostics, IterationRecord, SolveReport, StageRecord};
