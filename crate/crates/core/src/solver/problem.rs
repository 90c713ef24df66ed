use super::grid::{BoxGrid, ScalarField};
use crate::error::{Error, Result};
use crate::operator::OperatorSpec;

/// One Robin problem: `F(D²u) = ψ` in the box, `u_ν + βu = φ` on its
/// boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    grid: BoxGrid,
    op: OperatorSpec,
    beta: f64,
    psi: ScalarField,
    phi: ScalarField,
}

impl ProblemSpec {
    pub fn new(op: OperatorSpec, beta: f64, psi: ScalarField, phi: ScalarField) -> Result<Self> {
        let grid = psi.grid().clone();
        if phi.grid() != &grid {
            return Err(Error::validation("phi", "defined on a different grid than psi"));
        }
        if op.n != grid.n() {
            return Err(Error::validation(
                "n",
                format!("operator has n = {}, grid has n = {}", op.n, grid.n()),
            ));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::validation(
                "beta",
                format!("must be a positive constant, got {beta}"),
            ));
        }
        if let Some((node, v)) = psi
            .values()
            .iter()
            .enumerate()
            .find(|(_, v)| **v < 0.0)
        {
            return Err(Error::validation(
                "psi",
                format!(
                    "0 <= psi violated: psi = {v} at node {node} (x = {:?})",
                    grid.coords(node)
                ),
            ));
        }
        Ok(ProblemSpec {
            grid,
            op,
            beta,
            psi,
            phi,
        })
    }

    pub fn grid(&self) -> &BoxGrid {
        &self.grid
    }

    pub fn op(&self) -> OperatorSpec {
        self.op
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn psi(&self) -> &ScalarField {
        &self.psi
    }

    pub fn phi(&self) -> &ScalarField {
        &self.phi
    }

    /// `ψ̃ = ψ^{1/k}` (or `ψ^{1/(k−l)}`) per node.
    pub fn psi_tilde(&self) -> Vec<f64> {
        self.psi
            .values()
            .iter()
            .map(|&p| self.op.psi_tilde(p))
            .collect()
    }

    pub(crate) fn check_field(&self, u: &ScalarField) -> Result<()> {
        if u.grid() != &self.grid {
            return Err(Error::domain("field grid does not match the problem grid"));
        }
        Ok(())
    }
}
