use serde::{Deserialize, Serialize};

use super::grid::ScalarField;
use super::manufactured::{manufactured_problem, Paraboloid};
use super::newton::{newton_solve, NewtonOptions};
use super::problem::ProblemSpec;
use super::report::{SolveReport, StageRecord};
use crate::error::{Error, Result};

/// Step control of the continuation in `t ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Schedule {
    pub step: f64,
    pub min_step: f64,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            step: 0.1,
            min_step: 1.0 / 256.0,
        }
    }
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step <= 1.0) {
            return Err(Error::validation("schedule.step", "must lie in (0, 1]"));
        }
        if !(self.min_step > 0.0 && self.min_step <= self.step) {
            return Err(Error::validation("schedule.min_step", "must lie in (0, step]"));
        }
        Ok(())
    }
}

/// The continuation start: `u₀ = ½|x − x_c|²` and the problem it solves
/// exactly with the target's operator, β and grid.
pub fn starting_problem(spec: &ProblemSpec) -> Result<(ProblemSpec, ScalarField)> {
    let grid = spec.grid();
    manufactured_problem(
        &Paraboloid::centered(grid.center()),
        grid,
        spec.op(),
        spec.beta(),
    )
}

fn close(x: f64, y: f64) -> bool {
    (x - y).abs() <= 1e-14 * (1.0 + x.abs().max(y.abs()))
}

/// Whether `a` and `b` pose the same discrete problem (φ matters only on
/// boundary nodes).
fn same_data(a: &ProblemSpec, b: &ProblemSpec) -> bool {
    let (pa, pb) = (a.psi_tilde(), b.psi_tilde());
    pa.iter().zip(&pb).all(|(x, y)| close(*x, *y))
        && a.grid()
            .boundary_nodes()
            .all(|node| close(a.phi()[node], b.phi()[node]))
}

/// Problem at homotopy parameter `t`: `ψ̃_t = (1−t)ψ̃₀ + tψ̃`,
/// `φ_t = (1−t)φ₀ + tφ`.
fn stage_problem(start: &ProblemSpec, target: &ProblemSpec, t: f64) -> Result<ProblemSpec> {
    let op = target.op();
    let (p0, p1) = (start.psi_tilde(), target.psi_tilde());
    let psi: Vec<f64> = p0
        .iter()
        .zip(&p1)
        .map(|(a, b)| op.psi_from_tilde((1.0 - t) * a + t * b))
        .collect();
    let phi: Vec<f64> = start
        .phi()
        .values()
        .iter()
        .zip(target.phi().values())
        .map(|(a, b)| (1.0 - t) * a + t * b)
        .collect();
    ProblemSpec::new(
        op,
        target.beta(),
        target.psi().with_values(psi),
        target.phi().with_values(phi),
    )
}

/// Method of continuity from the paraboloid problem to `spec`.
///
/// Stages advance `t` by `schedule.step`, warm-starting each Newton solve
/// from the previous stage; a failed stage halves the step (restoring it
/// after success) until it would drop below `schedule.min_step`.
pub fn continuation_solve(
    spec: &ProblemSpec,
    schedule: &Schedule,
    opts: &NewtonOptions,
) -> Result<(ScalarField, SolveReport)> {
    schedule.validate()?;
    let (start, u0) = starting_problem(spec)?;
    let mut report = SolveReport::default();
    let identity = same_data(&start, spec);

    let mut u = u0;
    // Start data that already is the target needs a single stage at t = 1.
    let mut t = 0.0;
    let mut step = if identity { 1.0 } else { schedule.step };
    let mut last: Option<SolveReport> = None;
    while t < 1.0 {
        let t_next = (t + step).min(1.0);
        let stage = if t_next >= 1.0 {
            spec.clone()
        } else {
            stage_problem(&start, spec, t_next)?
        };
        match newton_solve(&u, &stage, opts) {
            Ok((u_next, stage_report)) => {
                report.continuation.push(StageRecord {
                    t: t_next,
                    converged: true,
                    iterations: stage_report.newton_steps(),
                });
                report.iterations.extend(stage_report.iterations.iter().copied());
                u = u_next;
                t = t_next;
                step = (2.0 * step).min(schedule.step);
                last = Some(stage_report);
            }
            Err(e) => {
                let stage_report = e.report().cloned().unwrap_or_default();
                report.continuation.push(StageRecord {
                    t: t_next,
                    converged: false,
                    iterations: stage_report.newton_steps(),
                });
                report.iterations.extend(stage_report.iterations.iter().copied());
                step *= 0.5;
                if step < schedule.min_step {
                    report.converged = false;
                    report.tolerance = stage_report.tolerance;
                    report.interior_residual = stage_report.interior_residual;
                    report.boundary_residual = stage_report.boundary_residual;
                    report.min_cone_margin = stage_report.min_cone_margin;
                    report.diagnostics = stage_report.diagnostics;
                    return Err(Error::Continuation {
                        t: t_next,
                        reason: format!("step fell below {}: {e}", schedule.min_step),
                        report: Box::new(report),
                    });
                }
            }
        }
    }
    let last = last.expect("at least one stage ran");
    report.converged = true;
    report.tolerance = last.tolerance;
    report.interior_residual = last.interior_residual;
    report.boundary_residual = last.boundary_residual;
    report.min_cone_margin = last.min_cone_margin;
    report.diagnostics = last.diagnostics;
    Ok((u, report))
}
