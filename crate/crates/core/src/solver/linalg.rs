//! Sparse matrices and the linear solvers behind the Newton step.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Compressed sparse row matrix with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a square matrix from per-row `(column, value)` lists.
    /// Duplicate columns within a row are summed.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            for (c, v) in row {
                debug_assert!(c < n);
                if col_idx.len() > *row_ptr.last().unwrap() && *col_idx.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    pub fn row_len(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|e| e.0 == j).map(|e| e.1).unwrap_or(0.0)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(c, v)| v * x[c]).sum();
        }
    }

    /// `(lower, upper)` bandwidths.
    pub fn bandwidths(&self) -> (usize, usize) {
        let mut kl = 0;
        let mut ku = 0;
        for i in 0..self.n {
            for (c, _) in self.row(i) {
                if c < i {
                    kl = kl.max(i - c);
                } else {
                    ku = ku.max(c - i);
                }
            }
        }
        (kl, ku)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            for (c, v) in self.row(i) {
                row[c] = v;
            }
        }
        d
    }
}

/// Which linear solver handles the Newton systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinearSolverKind {
    /// Banded LU when its cost is moderate, GMRES otherwise.
    #[default]
    Auto,
    /// Banded LU with partial pivoting.
    Direct,
    /// Restarted GMRES with ILU(0) right preconditioning.
    Gmres,
}

/// Relative residual reached by the iterative solver.
pub const GMRES_RTOL: f64 = 1e-12;
const DIRECT_FLOP_LIMIT: f64 = 1.5e9;
const DIRECT_MEMORY_LIMIT: usize = 40_000_000;

pub fn solve(a: &CsrMatrix, b: &[f64], kind: LinearSolverKind) -> Result<Vec<f64>> {
    let use_direct = match kind {
        LinearSolverKind::Direct => true,
        LinearSolverKind::Gmres => false,
        LinearSolverKind::Auto => {
            let (kl, ku) = a.bandwidths();
            let flops = a.n as f64 * kl as f64 * (kl + ku) as f64;
            flops <= DIRECT_FLOP_LIMIT && a.n * (2 * kl + ku + 1) <= DIRECT_MEMORY_LIMIT
        }
    };
    if use_direct {
        BandedLu::factor(a)?.solve(b)
    } else {
        gmres_ilu(a, b, GMRES_RTOL, 120, 200)
    }
}

/// LU factorization of a banded matrix with partial pivoting, in the
/// column-major band layout of LAPACK's `gbtrf`.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    kv: usize,
    ldab: usize,
    ab: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.n;
        let (kl, ku) = a.bandwidths();
        let kv = kl + ku;
        let ldab = 2 * kl + ku + 1;
        let mut ab = vec![0.0; ldab * n];
        let at = |r: usize, c: usize| kv + r - c + c * ldab;
        for i in 0..n {
            for (c, v) in a.row(i) {
                ab[at(i, c)] = v;
            }
        }
        let mut pivots = vec![0; n];
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let col = j * ldab + kv;
            let mut jp = 0;
            let mut best = ab[col].abs();
            for t in 1..=km {
                if ab[col + t].abs() > best {
                    best = ab[col + t].abs();
                    jp = t;
                }
            }
            pivots[j] = j + jp;
            if best == 0.0 {
                return Err(Error::Numeric(format!("singular matrix at column {j}")));
            }
            ju = ju.max((j + ku + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    ab.swap(at(j, c), at(j + jp, c));
                }
            }
            let piv = ab[col];
            for t in 1..=km {
                ab[col + t] /= piv;
            }
            for c in (j + 1)..=ju {
                let ujc = ab[at(j, c)];
                if ujc == 0.0 {
                    continue;
                }
                let base = at(j, c);
                for t in 1..=km {
                    ab[base + t] -= ab[col + t] * ujc;
                }
            }
        }
        Ok(BandedLu {
            n,
            kl,
            kv,
            ldab,
            ab,
            pivots,
        })
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        let mut x = b.to_vec();
        for j in 0..n {
            let p = self.pivots[j];
            if p != j {
                x.swap(j, p);
            }
            let km = self.kl.min(n - 1 - j);
            let col = j * self.ldab + self.kv;
            let xj = x[j];
            for t in 1..=km {
                x[j + t] -= self.ab[col + t] * xj;
            }
        }
        for j in (0..n).rev() {
            let col = j * self.ldab + self.kv;
            x[j] /= self.ab[col];
            let xj = x[j];
            let top = j.saturating_sub(self.kv);
            for r in top..j {
                x[r] -= self.ab[self.kv + r - j + j * self.ldab] * xj;
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("banded LU produced non-finite solution".into()));
        }
        Ok(x)
    }
}

/// Incomplete LU with zero fill, on the sparsity pattern of `a`.
#[derive(Debug, Clone)]
pub struct Ilu0 {
    lu: CsrMatrix,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let mut lu = a.clone();
        let n = lu.n;
        let mut diag = vec![usize::MAX; n];
        for (i, d) in diag.iter_mut().enumerate() {
            for p in lu.row_ptr[i]..lu.row_ptr[i + 1] {
                if lu.col_idx[p] == i {
                    *d = p;
                }
            }
            if *d == usize::MAX {
                return Err(Error::Numeric(format!("missing diagonal in row {i}")));
            }
        }
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            let (start, end) = (lu.row_ptr[i], lu.row_ptr[i + 1]);
            for p in start..end {
                pos[lu.col_idx[p]] = p;
            }
            for p in start..diag[i] {
                let k = lu.col_idx[p];
                let pivot = lu.values[diag[k]];
                if pivot == 0.0 {
                    return Err(Error::Numeric(format!("zero pivot in ILU(0) at row {k}")));
                }
                let lik = lu.values[p] / pivot;
                lu.values[p] = lik;
                for q in (diag[k] + 1)..lu.row_ptr[k + 1] {
                    let j = lu.col_idx[q];
                    let target = pos[j];
                    if target != usize::MAX {
                        lu.values[target] -= lik * lu.values[q];
                    }
                }
            }
            for p in start..end {
                pos[lu.col_idx[p]] = usize::MAX;
            }
            if lu.values[diag[i]] == 0.0 {
                return Err(Error::Numeric(format!("zero pivot in ILU(0) at row {i}")));
            }
        }
        Ok(Ilu0 { lu, diag })
    }

    pub fn apply(&self, rhs: &[f64], out: &mut [f64]) {
        let lu = &self.lu;
        for i in 0..lu.n {
            let mut s = rhs[i];
            for p in lu.row_ptr[i]..self.diag[i] {
                s -= lu.values[p] * out[lu.col_idx[p]];
            }
            out[i] = s;
        }
        for i in (0..lu.n).rev() {
            let mut s = out[i];
            for p in (self.diag[i] + 1)..lu.row_ptr[i + 1] {
                s -= lu.values[p] * out[lu.col_idx[p]];
            }
            out[i] = s / lu.values[self.diag[i]];
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Restarted GMRES with ILU(0) right preconditioning. Converged when the
/// true residual satisfies `‖b − Ax‖₂ ≤ rtol·‖b‖₂`.
pub fn gmres_ilu(
    a: &CsrMatrix,
    b: &[f64],
    rtol: f64,
    restart: usize,
    max_restarts: usize,
) -> Result<Vec<f64>> {
    let n = a.n;
    let precond = Ilu0::factor(a)?;
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(x);
    }
    let target = rtol * bnorm;
    let mut r = b.to_vec();
    let mut w = vec![0.0; n];
    let mut z = vec![0.0; n];
    for _ in 0..max_restarts {
        let beta = norm(&r);
        if beta <= target {
            return Ok(x);
        }
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut h = vec![vec![0.0; restart]; restart + 1];
        let mut cs = vec![0.0; restart];
        let mut sn = vec![0.0; restart];
        let mut g = vec![0.0; restart + 1];
        g[0] = beta;
        let mut steps = 0;
        for j in 0..restart {
            precond.apply(&basis[j], &mut z);
            a.mul_vec_into(&z, &mut w);
            // modified Gram–Schmidt, twice for orthogonality at tight tolerances
            for _ in 0..2 {
                for (i, v) in basis.iter().enumerate() {
                    let hij = dot(&w, v);
                    h[i][j] += hij;
                    w.iter_mut().zip(v).for_each(|(wk, vk)| *wk -= hij * vk);
                }
            }
            let hnext = norm(&w);
            h[j + 1][j] = hnext;
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let denom = h[j][j].hypot(h[j + 1][j]);
            if denom == 0.0 {
                return Err(Error::Numeric("GMRES breakdown".into()));
            }
            cs[j] = h[j][j] / denom;
            sn[j] = h[j + 1][j] / denom;
            h[j][j] = denom;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            steps = j + 1;
            if g[j + 1].abs() <= 0.1 * target || hnext == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / hnext).collect());
        }
        let mut y = vec![0.0; steps];
        for i in (0..steps).rev() {
            let s: f64 = (i + 1..steps).map(|c| h[i][c] * y[c]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        let mut vy = vec![0.0; n];
        for (yi, v) in y.iter().zip(&basis) {
            vy.iter_mut().zip(v).for_each(|(acc, vk)| *acc += yi * vk);
        }
        precond.apply(&vy, &mut z);
        x.iter_mut().zip(&z).for_each(|(xi, zi)| *xi += zi);
        a.mul_vec_into(&x, &mut w);
        r.iter_mut()
            .zip(b.iter().zip(&w))
            .for_each(|(ri, (bi, wi))| *ri = bi - wi);
    }
    if norm(&r) <= target {
        return Ok(x);
    }
    Err(Error::Numeric(format!(
        "GMRES reached {:.3e} relative residual, target {rtol:e}",
        norm(&r) / bnorm
    )))
}
