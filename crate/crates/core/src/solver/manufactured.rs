//! Closed-form fields and the exact data that make them solutions.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::grid::{BoxGrid, ScalarField};
use super::problem::ProblemSpec;
use crate::error::{Error, Result};
use crate::operator::{self, OperatorSpec, SymMatrix};
use crate::symfun;

/// A twice-differentiable function with analytic derivatives.
pub trait ClosedForm: Sync {
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    fn hessian(&self, x: &[f64]) -> DMatrix<f64>;
}

/// `½·a·|x − c|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct Paraboloid {
    pub center: Vec<f64>,
    pub curvature: f64,
}

impl Paraboloid {
    pub fn unit(n: usize) -> Self {
        Paraboloid {
            center: vec![0.0; n],
            curvature: 1.0,
        }
    }

    pub fn centered(center: Vec<f64>) -> Self {
        Paraboloid {
            center,
            curvature: 1.0,
        }
    }
}

impl ClosedForm for Paraboloid {
    fn value(&self, x: &[f64]) -> f64 {
        0.5 * self.curvature
            * x.iter()
                .zip(&self.center)
                .map(|(a, c)| (a - c) * (a - c))
                .sum::<f64>()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.center)
            .map(|(a, c)| self.curvature * (a - c))
            .collect()
    }

    fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::identity(x.len(), x.len()) * self.curvature
    }
}

/// `½|x|² + a·∏_i sin(π x_i)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbedParaboloid {
    pub amplitude: f64,
}

impl ClosedForm for PerturbedParaboloid {
    fn value(&self, x: &[f64]) -> f64 {
        0.5 * x.iter().map(|v| v * v).sum::<f64>()
            + self.amplitude * x.iter().map(|v| (PI * v).sin()).product::<f64>()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (0..x.len())
            .map(|i| {
                let p: f64 = (0..x.len())
                    .map(|j| {
                        if j == i {
                            PI * (PI * x[j]).cos()
                        } else {
                            (PI * x[j]).sin()
                        }
                    })
                    .product();
                x[i] + self.amplitude * p
            })
            .collect()
    }

    fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let n = x.len();
        DMatrix::from_fn(n, n, |i, j| {
            let p: f64 = (0..n)
                .map(|q| {
                    let (s, c) = (PI * x[q]).sin_cos();
                    match (q == i, q == j) {
                        (true, true) => -PI * PI * s,
                        (true, false) | (false, true) => PI * c,
                        (false, false) => s,
                    }
                })
                .product();
            (i == j) as u8 as f64 + self.amplitude * p
        })
    }
}

/// `½xᵀAx + bᵀx + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    pub a: DMatrix<f64>,
    pub b: Vec<f64>,
    pub c: f64,
}

impl ClosedForm for Quadratic {
    fn value(&self, x: &[f64]) -> f64 {
        let n = x.len();
        let mut v = self.c;
        for i in 0..n {
            v += self.b[i] * x[i];
            for j in 0..n {
                v += 0.5 * self.a[(i, j)] * x[i] * x[j];
            }
        }
        v
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| self.b[i] + (0..n).map(|j| self.a[(i, j)] * x[j]).sum::<f64>())
            .collect()
    }

    fn hessian(&self, _x: &[f64]) -> DMatrix<f64> {
        self.a.clone()
    }
}

/// `σ_k(η)` or `σ_k(η)/σ_l(η)` (the un-normalized operator) at η.
fn raw_operator(eta: &[f64], op: &OperatorSpec) -> f64 {
    let s = symfun::sigmas(eta, op.k);
    match op.l {
        None => s[op.k],
        Some(l) => s[op.k] / s[l],
    }
}

/// Averaged outward normal derivative from an analytic gradient.
fn analytic_normal(grid: &BoxGrid, node: usize, grad: &[f64]) -> f64 {
    let axes = grid.outward_axes(node);
    axes.iter().map(|&(a, s)| s * grad[a]).sum::<f64>() / axes.len() as f64
}

/// Data `(ψ, φ)` for which `u_star` solves the continuum problem, plus
/// `u_star` sampled on the grid.
///
/// `ψ = σ_k(η(D²u*))` (or the quotient) from the analytic Hessian at every
/// node; `φ = ∂_ν u* + β u*` on boundary nodes, with the averaged axis
/// normal on edges and corners.
pub fn manufactured_problem(
    u_star: &dyn ClosedForm,
    grid: &BoxGrid,
    op: OperatorSpec,
    beta: f64,
) -> Result<(ProblemSpec, ScalarField)> {
    if op.n != grid.n() {
        return Err(Error::validation("n", "operator and grid dimensions differ"));
    }
    let mut psi = Vec::with_capacity(grid.len());
    let mut phi = Vec::with_capacity(grid.len());
    let mut exact = Vec::with_capacity(grid.len());
    for node in 0..grid.len() {
        let x = grid.coords(node);
        let hess = SymMatrix::new(u_star.hessian(&x))?;
        let (eta, _) = operator::eta_matrix(&hess).eigen()?;
        if let Some(v) = symfun::first_violation(&eta, op.cone_index()) {
            return Err(Error::validation(
                "u_star",
                format!("not admissible at node {node} (x = {x:?}): {v}"),
            ));
        }
        psi.push(raw_operator(&eta, &op));
        let value = u_star.value(&x);
        exact.push(value);
        phi.push(if grid.is_boundary(node) {
            analytic_normal(grid, node, &u_star.gradient(&x)) + beta * value
        } else {
            0.0
        });
    }
    let spec = ProblemSpec::new(
        op,
        beta,
        ScalarField::new(grid.clone(), psi)?,
        ScalarField::new(grid.clone(), phi)?,
    )?;
    Ok((spec, ScalarField::new(grid.clone(), exact)?))
}

/// Named manufactured cases used by convergence studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManufacturedCase {
    /// `½|x|²` on `[0,1]³`, `k = 2`: reproduced exactly by the stencils.
    Paraboloid,
    /// `½|x|² + 0.05·sin(πx₁)sin(πx₂)sin(πx₃)` on `[0,1]³`, `k = 2`.
    PerturbedParaboloid,
    /// `½|x|² + 0.05·sin(πx₁)sin(πx₂)` on `[0,1]²`, `k = 1`.
    PerturbedParaboloid2d,
}

impl ManufacturedCase {
    pub fn from_id(id: &str) -> Option<Self> {
        match id {
            "paraboloid" => Some(Self::Paraboloid),
            "perturbed-paraboloid" => Some(Self::PerturbedParaboloid),
            "perturbed-paraboloid-2d" => Some(Self::PerturbedParaboloid2d),
            _ => None,
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            Self::Paraboloid => "paraboloid",
            Self::PerturbedParaboloid => "perturbed-paraboloid",
            Self::PerturbedParaboloid2d => "perturbed-paraboloid-2d",
        }
    }

    pub const ALL: [ManufacturedCase; 3] = [
        Self::Paraboloid,
        Self::PerturbedParaboloid,
        Self::PerturbedParaboloid2d,
    ];

    pub fn operator(&self) -> OperatorSpec {
        match self {
            Self::Paraboloid | Self::PerturbedParaboloid => OperatorSpec { n: 3, k: 2, l: None },
            Self::PerturbedParaboloid2d => OperatorSpec { n: 2, k: 1, l: None },
        }
    }

    pub fn beta(&self) -> f64 {
        1.0
    }

    pub fn solution(&self) -> Box<dyn ClosedForm> {
        match self {
            Self::Paraboloid => Box::new(Paraboloid::unit(3)),
            Self::PerturbedParaboloid | Self::PerturbedParaboloid2d => {
                Box::new(PerturbedParaboloid { amplitude: 0.05 })
            }
        }
    }

    pub fn grid(&self, m: usize) -> Result<BoxGrid> {
        BoxGrid::cube(self.operator().n, 0.0, 1.0, m)
    }

    pub fn problem(&self, m: usize) -> Result<(ProblemSpec, ScalarField)> {
        manufactured_problem(self.solution().as_ref(), &self.grid(m)?, self.operator(), self.beta())
    }
}
