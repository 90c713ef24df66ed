//! Finite-difference residual and Jacobian of
//! `f(λ(D²u)) − ψ̃` in the interior and `u_ν + βu − φ` on the boundary.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::grid::{BoxGrid, ScalarField};
use super::linalg::CsrMatrix;
use super::problem::ProblemSpec;
use crate::error::{Error, Result};
use crate::operator::{self, OperatorSpec, SymMatrix};

fn offset(node: usize, stride: usize, d: isize) -> usize {
    (node as isize + d * stride as isize) as usize
}

fn require_interior(grid: &BoxGrid, node: usize) -> Result<()> {
    if node >= grid.len() {
        return Err(Error::domain(format!("node {node} outside grid")));
    }
    if grid.is_boundary(node) {
        return Err(Error::domain(format!("node {node} is on the boundary")));
    }
    Ok(())
}

fn hessian_raw(grid: &BoxGrid, u: &[f64], node: usize) -> DMatrix<f64> {
    let n = grid.n();
    let h = grid.h();
    let mut m = DMatrix::zeros(n, n);
    let c = u[node];
    for a in 0..n {
        let s = grid.stride(a);
        m[(a, a)] = (u[node + s] - 2.0 * c + u[node - s]) / (h[a] * h[a]);
        for b in 0..a {
            let t = grid.stride(b);
            let v = (u[node + s + t] - u[node + s - t] - u[node - s + t] + u[node - s - t])
                / (4.0 * h[a] * h[b]);
            m[(a, b)] = v;
            m[(b, a)] = v;
        }
    }
    m
}

/// Central-difference Hessian at an interior node.
pub fn hessian_at(u: &ScalarField, node: usize) -> Result<SymMatrix> {
    require_interior(u.grid(), node)?;
    Ok(SymMatrix::from_trusted(hessian_raw(u.grid(), u.values(), node)))
}

/// Second-order one-sided outward derivative along `axis` (`sign` = ±1).
pub(crate) fn one_sided_normal(grid: &BoxGrid, u: &[f64], node: usize, axis: usize, sign: f64) -> f64 {
    let s = grid.stride(axis);
    let inward = -sign as isize;
    let u1 = u[offset(node, s, inward)];
    let u2 = u[offset(node, s, 2 * inward)];
    (3.0 * u[node] - 4.0 * u1 + u2) / (2.0 * grid.h()[axis])
}

/// Outward normal derivative at a boundary node; the average of the
/// axis-wise one-sided derivatives on edges and corners.
pub fn normal_derivative(u: &ScalarField, node: usize) -> Result<f64> {
    let grid = u.grid();
    let axes = grid.outward_axes(node);
    if axes.is_empty() {
        return Err(Error::domain(format!("node {node} is interior")));
    }
    Ok(averaged_normal(grid, u.values(), node, &axes))
}

fn averaged_normal(grid: &BoxGrid, u: &[f64], node: usize, axes: &[(usize, f64)]) -> f64 {
    axes.iter()
        .map(|&(a, s)| one_sided_normal(grid, u, node, a, s))
        .sum::<f64>()
        / axes.len() as f64
}

/// Residual, its ∞-norm split by node class, and the smallest cone margin.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub residual: Vec<f64>,
    pub interior_inf: f64,
    pub boundary_inf: f64,
    pub min_margin: f64,
    pub jacobian: Option<CsrMatrix>,
}

impl Evaluation {
    pub fn residual_inf(&self) -> f64 {
        self.interior_inf.max(self.boundary_inf)
    }
}

/// Weights of `Σ_ab A_ab (D²_h u)_ab` on the stencil around `node`.
fn interior_row(grid: &BoxGrid, node: usize, a: &DMatrix<f64>) -> Vec<(usize, f64)> {
    let n = grid.n();
    let h = grid.h();
    let mut row = Vec::with_capacity(1 + 2 * n + 2 * n * (n - 1));
    let mut center = 0.0;
    for i in 0..n {
        let s = grid.stride(i);
        let w = a[(i, i)] / (h[i] * h[i]);
        center -= 2.0 * w;
        row.push((node + s, w));
        row.push((node - s, w));
        for j in 0..i {
            let t = grid.stride(j);
            let c = 2.0 * a[(i, j)] / (4.0 * h[i] * h[j]);
            row.push((node + s + t, c));
            row.push((node + s - t, -c));
            row.push((node - s + t, -c));
            row.push((node - s - t, c));
        }
    }
    row.push((node, center));
    row
}

fn boundary_row(grid: &BoxGrid, node: usize, beta: f64, axes: &[(usize, f64)]) -> Vec<(usize, f64)> {
    let w = 1.0 / axes.len() as f64;
    let mut row = vec![(node, beta)];
    for &(a, sign) in axes {
        let s = grid.stride(a);
        let inward = -sign as isize;
        let h2 = 2.0 * grid.h()[a];
        row.push((node, w * 3.0 / h2));
        row.push((offset(node, s, inward), -w * 4.0 / h2));
        row.push((offset(node, s, 2 * inward), w / h2));
    }
    row
}

struct NodeResult {
    value: f64,
    margin: f64,
    boundary: bool,
    row: Option<Vec<(usize, f64)>>,
}

fn eval_node(
    grid: &BoxGrid,
    op: &OperatorSpec,
    beta: f64,
    u: &[f64],
    psi_tilde: &[f64],
    phi: &[f64],
    node: usize,
    with_jacobian: bool,
) -> Result<NodeResult> {
    let axes = grid.outward_axes(node);
    if !axes.is_empty() {
        let value = averaged_normal(grid, u, node, &axes) + beta * u[node] - phi[node];
        return Ok(NodeResult {
            value,
            margin: f64::INFINITY,
            boundary: true,
            row: with_jacobian.then(|| boundary_row(grid, node, beta, &axes)),
        });
    }
    let hess = SymMatrix::from_trusted(hessian_raw(grid, u, node));
    let at_node = |e: Error| match e.cone_violation() {
        Some(violation) => Error::ConeAtNode { node, violation },
        None => e,
    };
    if with_jacobian {
        let lin = operator::linearize(&hess, op).map_err(at_node)?;
        Ok(NodeResult {
            value: lin.value - psi_tilde[node],
            margin: lin.margin,
            boundary: false,
            row: Some(interior_row(grid, node, lin.gradient.matrix())),
        })
    } else {
        let (eta, _) = operator::eta_matrix(&hess).eigen()?;
        let value = operator::value_from_eta(&eta, op).map_err(at_node)?;
        Ok(NodeResult {
            value: value - psi_tilde[node],
            margin: crate::symfun::cone_margin_raw(&eta, op.cone_index()),
            boundary: false,
            row: None,
        })
    }
}

/// Evaluates the discrete system at `u`. Fails with [`Error::ConeAtNode`]
/// (lowest failing node) if any interior node is not admissible.
pub(crate) fn evaluate(
    spec: &ProblemSpec,
    u: &[f64],
    psi_tilde: &[f64],
    with_jacobian: bool,
) -> Result<Evaluation> {
    let grid = spec.grid();
    let op = spec.op();
    let beta = spec.beta();
    let phi = spec.phi().values();
    let results: Vec<Result<NodeResult>> = (0..grid.len())
        .into_par_iter()
        .map(|node| eval_node(grid, &op, beta, u, psi_tilde, phi, node, with_jacobian))
        .collect();
    let mut residual = Vec::with_capacity(grid.len());
    let mut rows = with_jacobian.then(|| Vec::with_capacity(grid.len()));
    let (mut interior_inf, mut boundary_inf, mut min_margin) = (0.0f64, 0.0f64, f64::INFINITY);
    for r in results {
        let nr = r?;
        if nr.boundary {
            boundary_inf = boundary_inf.max(nr.value.abs());
        } else {
            interior_inf = interior_inf.max(nr.value.abs());
            min_margin = min_margin.min(nr.margin);
        }
        residual.push(nr.value);
        if let (Some(rows), Some(row)) = (rows.as_mut(), nr.row) {
            rows.push(row);
        }
    }
    Ok(Evaluation {
        residual,
        interior_inf,
        boundary_inf,
        min_margin,
        jacobian: rows.map(CsrMatrix::from_rows),
    })
}

/// Residual field of the discrete problem at `u`.
pub fn residual(u: &ScalarField, spec: &ProblemSpec) -> Result<ScalarField> {
    spec.check_field(u)?;
    let ev = evaluate(spec, u.values(), &spec.psi_tilde(), false)?;
    Ok(u.with_values(ev.residual))
}

/// Sparse Jacobian of [`residual`] at `u`.
pub fn jacobian(u: &ScalarField, spec: &ProblemSpec) -> Result<CsrMatrix> {
    spec.check_field(u)?;
    let ev = evaluate(spec, u.values(), &spec.psi_tilde(), true)?;
    Ok(ev.jacobian.expect("requested"))
}
