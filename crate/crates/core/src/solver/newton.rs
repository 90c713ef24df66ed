use serde::{Deserialize, Serialize};

use super::diagnostics::diagnostics;
use super::discretize::{evaluate, Evaluation};
use super::grid::ScalarField;
use super::linalg::{self, LinearSolverKind};
use super::problem::ProblemSpec;
use super::report::{IterationRecord, SolveReport};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    /// Residual ∞-norm target; `None` means `1e-10·(1 + ‖ψ̃‖∞)`.
    pub tol: Option<f64>,
    pub max_iter: usize,
    /// Sufficient-decrease factor of the line search.
    pub armijo: f64,
    /// Smallest step length tried before giving up.
    pub min_step: f64,
    pub linear_solver: LinearSolverKind,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: None,
            max_iter: 50,
            armijo: 1e-4,
            min_step: 1e-12,
            linear_solver: LinearSolverKind::Auto,
        }
    }
}

impl NewtonOptions {
    pub fn tolerance_for(&self, psi_tilde: &[f64]) -> f64 {
        self.tol.unwrap_or_else(|| {
            let sup = psi_tilde.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            1e-10 * (1.0 + sup)
        })
    }
}

fn record(ev: &Evaluation, step: f64) -> IterationRecord {
    IterationRecord {
        residual_inf: ev.residual_inf(),
        step_length: step,
        min_cone_margin: ev.min_margin,
    }
}

fn finish(report: &mut SolveReport, ev: &Evaluation, u: &ScalarField, spec: &ProblemSpec, converged: bool) {
    report.converged = converged;
    report.interior_residual = ev.interior_inf;
    report.boundary_residual = ev.boundary_inf;
    report.min_cone_margin = ev.min_margin;
    report.diagnostics = Some(diagnostics(u, spec));
}

/// Damped Newton iteration on the discrete problem, starting from `u0`.
///
/// Each step solves `J δ = −R` and halves the step length until every
/// interior node stays strictly admissible and the residual ∞-norm
/// satisfies the Armijo decrease `‖R(u+αδ)‖ ≤ (1 − c·α)‖R(u)‖`.
pub fn newton_solve(
    u0: &ScalarField,
    spec: &ProblemSpec,
    opts: &NewtonOptions,
) -> Result<(ScalarField, SolveReport)> {
    spec.check_field(u0)?;
    let psi_tilde = spec.psi_tilde();
    let tol = opts.tolerance_for(&psi_tilde);
    let mut u = u0.clone();
    let mut ev = evaluate(spec, u.values(), &psi_tilde, true).map_err(|e| match e {
        Error::ConeAtNode { node, violation } => Error::Precondition(format!(
            "initial guess is not admissible at node {node}: {violation}"
        )),
        other => other,
    })?;
    let mut report = SolveReport {
        tolerance: tol,
        ..SolveReport::default()
    };
    report.iterations.push(record(&ev, 0.0));

    for iter in 0.. {
        let norm = ev.residual_inf();
        if norm <= tol {
            finish(&mut report, &ev, &u, spec, true);
            return Ok((u, report));
        }
        let fail = |report: &mut SolveReport, ev: &Evaluation, u: &ScalarField, reason: String| {
            finish(report, ev, u, spec, false);
            Error::NonConvergence {
                reason,
                report: Box::new(report.clone()),
            }
        };
        if iter >= opts.max_iter {
            let reason = format!("{} iterations, residual {norm:e} > {tol:e}", opts.max_iter);
            return Err(fail(&mut report, &ev, &u, reason));
        }
        let jac = match ev.jacobian.take() {
            Some(j) => j,
            None => evaluate(spec, u.values(), &psi_tilde, true)?
                .jacobian
                .expect("requested"),
        };
        let rhs: Vec<f64> = ev.residual.iter().map(|r| -r).collect();
        let delta = match linalg::solve(&jac, &rhs, opts.linear_solver) {
            Ok(d) => d,
            Err(e) => return Err(fail(&mut report, &ev, &u, format!("linear solve: {e}"))),
        };

        let mut alpha = 1.0;
        let accepted = loop {
            let trial: Vec<f64> = u
                .values()
                .iter()
                .zip(&delta)
                .map(|(x, d)| x + alpha * d)
                .collect();
            if let Ok(tev) = evaluate(spec, &trial, &psi_tilde, false) {
                if tev.residual_inf() <= (1.0 - opts.armijo * alpha) * norm {
                    break Some((trial, tev));
                }
            }
            alpha *= 0.5;
            if alpha < opts.min_step {
                break None;
            }
        };
        match accepted {
            Some((trial, tev)) => {
                u = u.with_values(trial);
                ev = tev;
                report.iterations.push(record(&ev, alpha));
            }
            None => {
                let reason = format!("line search underflow at residual {norm:e}");
                return Err(fail(&mut report, &ev, &u, reason));
            }
        }
    }
    unreachable!()
}
