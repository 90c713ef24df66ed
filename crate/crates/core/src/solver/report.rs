use serde::{Deserialize, Serialize};

/// State after one Newton iteration (iteration 0 is the starting point).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub residual_inf: f64,
    /// Accepted line-search step length; 0 for the starting point.
    pub step_length: f64,
    pub min_cone_margin: f64,
}

/// One continuation stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub t: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Quantities whose a priori bounds make the continuation argument work:
/// the gradient bound, the second-derivative bound and the double-normal
/// bound on the boundary. Reported, not checked against constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `max |∇_h u|` over all nodes.
    pub sup_gradient: f64,
    /// `max λ_max(D²_h u)` over interior nodes.
    pub sup_hessian_eigenvalue: f64,
    /// `max |D_νν u|` over boundary nodes (one-sided second differences).
    pub sup_double_normal: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: Vec<IterationRecord>,
    pub continuation: Vec<StageRecord>,
    pub diagnostics: Option<Diagnostics>,
    pub converged: bool,
    pub tolerance: f64,
    pub interior_residual: f64,
    pub boundary_residual: f64,
    pub min_cone_margin: f64,
}

impl SolveReport {
    /// Number of accepted Newton steps.
    pub fn newton_steps(&self) -> usize {
        self.iterations.iter().filter(|r| r.step_length > 0.0).count()
    }

    pub fn final_residual(&self) -> f64 {
        self.interior_residual.max(self.boundary_residual)
    }

    /// Smallest cone margin over every recorded iterate.
    pub fn min_margin_along_path(&self) -> f64 {
        self.iterations
            .iter()
            .map(|r| r.min_cone_margin)
            .fold(f64::INFINITY, f64::min)
    }
}
