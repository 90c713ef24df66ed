use crate::error::{Error, Result};

pub(crate) const MAX_DIM: usize = 3;

/// Uniform tensor grid on an axis-aligned box with `m` points per axis.
///
/// Nodes are numbered lexicographically with axis 0 varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxGrid {
    n: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    m: usize,
    h: Vec<f64>,
    strides: Vec<usize>,
}

impl BoxGrid {
    pub fn new(n: usize, lo: Vec<f64>, hi: Vec<f64>, m: usize) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&n) {
            return Err(Error::validation("n", format!("grid dimension must be 2 or 3, got {n}")));
        }
        if lo.len() != n || hi.len() != n {
            return Err(Error::validation("box", format!("lo/hi must have {n} entries")));
        }
        if m < 9 || m % 2 == 0 {
            return Err(Error::validation("box.m", format!("must be odd and >= 9, got {m}")));
        }
        for a in 0..n {
            if !(lo[a].is_finite() && hi[a].is_finite() && hi[a] > lo[a]) {
                return Err(Error::validation(
                    "box",
                    format!("axis {a}: need finite lo < hi, got [{}, {}]", lo[a], hi[a]),
                ));
            }
        }
        let h = (0..n).map(|a| (hi[a] - lo[a]) / (m - 1) as f64).collect();
        let strides = (0..n).map(|a| m.pow(a as u32)).collect();
        Ok(BoxGrid {
            n,
            lo,
            hi,
            m,
            h,
            strides,
        })
    }

    /// The cube `[lo, hi]^n`.
    pub fn cube(n: usize, lo: f64, hi: f64, m: usize) -> Result<Self> {
        Self::new(n, vec![lo; n], vec![hi; n], m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    /// Total number of nodes, `mⁿ`.
    pub fn len(&self) -> usize {
        self.m.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index_of(&self, node: usize) -> [usize; MAX_DIM] {
        let mut idx = [0; MAX_DIM];
        let mut rest = node;
        for slot in idx.iter_mut().take(self.n) {
            *slot = rest % self.m;
            rest /= self.m;
        }
        idx
    }

    pub fn node_of(&self, idx: &[usize]) -> usize {
        idx.iter()
            .take(self.n)
            .zip(&self.strides)
            .map(|(i, s)| i * s)
            .sum()
    }

    pub fn coords(&self, node: usize) -> Vec<f64> {
        let idx = self.index_of(node);
        (0..self.n)
            .map(|a| self.lo[a] + idx[a] as f64 * self.h[a])
            .collect()
    }

    pub fn center(&self) -> Vec<f64> {
        (0..self.n).map(|a| 0.5 * (self.lo[a] + self.hi[a])).collect()
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        let idx = self.index_of(node);
        idx[..self.n].iter().any(|&i| i == 0 || i == self.m - 1)
    }

    /// Outward axis directions at a node: `(axis, +1.0)` on the `hi` face,
    /// `(axis, −1.0)` on the `lo` face. Empty for interior nodes.
    pub fn outward_axes(&self, node: usize) -> Vec<(usize, f64)> {
        let idx = self.index_of(node);
        (0..self.n)
            .filter_map(|a| {
                if idx[a] == 0 {
                    Some((a, -1.0))
                } else if idx[a] == self.m - 1 {
                    Some((a, 1.0))
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn interior_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&i| !self.is_boundary(i))
    }

    pub fn boundary_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&i| self.is_boundary(i))
    }
}

/// Grid-sampled scalar values, one per node.
///
/// Fields that only live on the boundary (the Robin data) still store a
/// value at every node; interior entries are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: BoxGrid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: BoxGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::domain(format!(
                "field has {} values, grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("field value at node {i} is not finite")));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn constant(grid: &BoxGrid, c: f64) -> Self {
        ScalarField {
            values: vec![c; grid.len()],
            grid: grid.clone(),
        }
    }

    pub fn from_fn(grid: &BoxGrid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(&grid.coords(i))).collect();
        Self::new(grid.clone(), values)
    }

    pub fn grid(&self) -> &BoxGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// `max |self − other|` over all nodes.
    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |a, (x, y)| a.max((x - y).abs()))
    }

    pub(crate) fn with_values(&self, values: Vec<f64>) -> ScalarField {
        debug_assert_eq!(values.len(), self.values.len());
        ScalarField {
            grid: self.grid.clone(),
            values,
        }
    }
}

impl std::ops::Index<usize> for ScalarField {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}
