//! The η-transform `η_i = Σ_j λ_j − λ_i`, the normalized operators
//! `f(λ) = σ_k^{1/k}(η)` and `f(λ) = (σ_k/σ_l)^{1/(k−l)}(η)`, and their
//! first derivatives at the eigenvalue and matrix level.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{ConeViolation, Error, Result};
use crate::symfun::{self, Spectrum};

const SYMMETRY_TOL: f64 = 1e-12;

/// Dense real symmetric matrix, e.g. a pointwise Hessian.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if n != m.ncols() {
            return Err(Error::domain(format!("matrix is {}x{}", n, m.ncols())));
        }
        if n < 2 {
            return Err(Error::domain("matrix dimension must be at least 2"));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("matrix has non-finite entries"));
        }
        let scale = m.amax().max(f64::MIN_POSITIVE);
        for i in 0..n {
            for j in 0..i {
                if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::Precondition(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(SymMatrix(m))
    }

    pub fn from_row_slice(n: usize, data: &[f64]) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::domain("row data length does not match n*n"));
        }
        Self::new(DMatrix::from_row_slice(n, n, data))
    }

    pub fn from_diagonal(d: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d)))
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(DMatrix::identity(n, n))
    }

    /// Wraps a matrix already known to be symmetric.
    pub(crate) fn from_trusted(m: DMatrix<f64>) -> Self {
        SymMatrix(m)
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// Frobenius inner product `Σ_ij a_ij b_ij`.
    pub fn inner(&self, other: &SymMatrix) -> f64 {
        self.0.dot(&other.0)
    }

    /// Eigenvalues (unordered) and orthonormal eigenvectors as columns.
    pub fn eigen(&self) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let eig = SymmetricEigen::try_new(self.0.clone(), f64::EPSILON, 0)
            .ok_or_else(|| Error::Numeric("symmetric eigendecomposition failed".into()))?;
        Ok((eig.eigenvalues.iter().copied().collect(), eig.eigenvectors))
    }

    pub fn eigenvalues(&self) -> Result<Spectrum> {
        Spectrum::new(self.eigen()?.0)
    }
}

impl std::ops::Index<(usize, usize)> for SymMatrix {
    type Output = f64;
    fn index(&self, ij: (usize, usize)) -> &f64 {
        &self.0[ij]
    }
}

/// Which normalized operator is meant: pure `σ_k^{1/k}` or the quotient
/// `(σ_k/σ_l)^{1/(k−l)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub n: usize,
    pub k: usize,
    pub l: Option<usize>,
}

impl OperatorSpec {
    pub fn new(n: usize, k: usize, l: Option<usize>) -> Result<Self> {
        if n < 2 {
            return Err(Error::validation("n", format!("must be at least 2, got {n}")));
        }
        if k < 1 || k > n - 1 {
            return Err(Error::validation(
                "k",
                format!("must satisfy 1 <= k <= n-1 = {}, got {k}", n - 1),
            ));
        }
        if let Some(l) = l {
            if l < 1 || l >= k {
                return Err(Error::validation(
                    "l",
                    format!("must satisfy 1 <= l < k = {k}, got {l}"),
                ));
            }
        }
        Ok(OperatorSpec { n, k, l })
    }

    pub fn pure(n: usize, k: usize) -> Result<Self> {
        Self::new(n, k, None)
    }

    pub fn quotient(n: usize, k: usize, l: usize) -> Result<Self> {
        Self::new(n, k, Some(l))
    }

    /// Cone the η-spectrum must lie in: `Γ_k`, or `Γ_{k+1}` for quotients.
    pub fn cone_index(&self) -> usize {
        match self.l {
            None => self.k,
            Some(_) => self.k + 1,
        }
    }

    /// Homogeneity degree of the raw (un-normalized) operator: `k` or `k − l`.
    pub fn degree(&self) -> usize {
        self.k - self.l.unwrap_or(0)
    }

    /// `ψ̃ = ψ^{1/k}` (pure) or `ψ^{1/(k−l)}` (quotient).
    pub fn psi_tilde(&self, psi: f64) -> f64 {
        psi.powf(1.0 / self.degree() as f64)
    }

    /// Inverse of [`psi_tilde`](Self::psi_tilde).
    pub fn psi_from_tilde(&self, psi_tilde: f64) -> f64 {
        psi_tilde.powi(self.degree() as i32)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::domain(format!(
                "spectrum has {len} entries, operator expects n = {}",
                self.n
            )));
        }
        Ok(())
    }
}

pub(crate) fn eta_raw(lambda: &[f64]) -> Vec<f64> {
    let s: f64 = lambda.iter().sum();
    lambda.iter().map(|l| s - l).collect()
}

/// `η_i = Σ_j λ_j − λ_i`. Reverses the ordering of sorted input.
pub fn eta_from_lambda(lambda: &Spectrum) -> Spectrum {
    Spectrum::new(eta_raw(lambda.as_slice())).expect("finite input gives finite output")
}

/// `λ_i = (Σ_j η_j)/(n−1) − η_i`.
pub fn lambda_from_eta(eta: &Spectrum) -> Result<Spectrum> {
    let n = eta.len();
    if n < 2 {
        return Err(Error::domain("lambda_from_eta needs n >= 2"));
    }
    let s: f64 = eta.as_slice().iter().sum::<f64>() / (n - 1) as f64;
    Spectrum::new(eta.as_slice().iter().map(|e| s - e).collect())
}

/// Real form of `Δu·δ_ij − u_ij`: `trace(r)·I − r`.
pub fn eta_matrix(r: &SymMatrix) -> SymMatrix {
    let n = r.n();
    let mut m = -r.matrix().clone();
    let t = r.trace();
    for i in 0..n {
        m[(i, i)] += t;
    }
    SymMatrix(m)
}

fn cone_check(eta: &[f64], spec: &OperatorSpec) -> Result<Vec<f64>> {
    let ci = spec.cone_index();
    let sig = symfun::sigmas(eta, ci);
    if let Some(i) = (1..=ci).find(|&i| sig[i].is_nan() || sig[i] <= 0.0) {
        return Err(Error::Cone {
            violation: ConeViolation {
                index: i,
                sigma: sig[i],
            },
        });
    }
    Ok(sig)
}

/// Value of the normalized operator given η directly.
pub(crate) fn value_from_eta(eta: &[f64], spec: &OperatorSpec) -> Result<f64> {
    let sig = cone_check(eta, spec)?;
    Ok(match spec.l {
        None => sig[spec.k].powf(1.0 / spec.k as f64),
        Some(l) => (sig[spec.k] / sig[l]).powf(1.0 / (spec.k - l) as f64),
    })
}

/// `g_i = ∂f/∂η_i` together with the operator value.
pub(crate) fn eta_gradient(eta: &[f64], spec: &OperatorSpec) -> Result<(f64, Vec<f64>)> {
    let sig = cone_check(eta, spec)?;
    let k = spec.k;
    let n = eta.len();
    match spec.l {
        None => {
            let value = sig[k].powf(1.0 / k as f64);
            let pre = value / (k as f64 * sig[k]);
            let g = (0..n)
                .map(|i| pre * symfun::sigma_excl_raw(eta, k - 1, i))
                .collect();
            Ok((value, g))
        }
        Some(l) => {
            let d = (k - l) as f64;
            let q = sig[k] / sig[l];
            let value = q.powf(1.0 / d);
            let pre = value / (d * q);
            let g = (0..n)
                .map(|i| {
                    let del = symfun::sigmas_with_skip(eta, k - 1, &[i]);
                    // σ_{k-1}(η|i) σ_l − σ_k σ_{l-1}(η|i), with σ_0 = 1
                    let num = del[k - 1] * sig[l] - sig[k] * del[l - 1];
                    pre * num / (sig[l] * sig[l])
                })
                .collect();
            Ok((value, g))
        }
    }
}

/// `f(λ)`: `σ_k^{1/k}(η)` or `(σ_k/σ_l)^{1/(k−l)}(η)` with `η = η(λ)`.
pub fn f_value(lambda: &Spectrum, spec: &OperatorSpec) -> Result<f64> {
    spec.check_len(lambda.len())?;
    value_from_eta(&eta_raw(lambda.as_slice()), spec)
}

fn lambda_gradient_from_g(g: &[f64]) -> Vec<f64> {
    let total: f64 = g.iter().sum();
    g.iter().map(|gi| total - gi).collect()
}

/// `f_i = ∂f/∂λ_i = Σ_{p≠i} ∂f/∂η_p`, evaluated in closed form.
pub fn f_grad(lambda: &Spectrum, spec: &OperatorSpec) -> Result<Spectrum> {
    spec.check_len(lambda.len())?;
    let (_, g) = eta_gradient(&eta_raw(lambda.as_slice()), spec)?;
    Spectrum::new(lambda_gradient_from_g(&g))
}

/// Value, matrix gradient and cone margin of `F(r) = f(λ(r))` in one pass.
#[derive(Debug, Clone)]
pub struct Linearization {
    pub value: f64,
    pub gradient: SymMatrix,
    pub margin: f64,
}

/// Like [`F_grad_matrix`] but also returns `F(r)` and the cone margin.
pub fn linearize(r: &SymMatrix, spec: &OperatorSpec) -> Result<Linearization> {
    spec.check_len(r.n())?;
    let e = eta_matrix(r);
    let (eta, q) = e.eigen()?;
    let (value, g) = eta_gradient(&eta, spec)?;
    let margin = symfun::cone_margin_raw(&eta, spec.cone_index());
    // ∇G = Q diag(g) Qᵀ, ∇F = trace(∇G) I − ∇G
    let n = r.n();
    let mut grad_g = DMatrix::zeros(n, n);
    for (p, gp) in g.iter().enumerate() {
        let col = q.column(p);
        grad_g.ger(*gp, &col, &col, 1.0);
    }
    let t = grad_g.trace();
    let mut grad = -grad_g;
    for i in 0..n {
        grad[(i, i)] += t;
    }
    let grad = (&grad + grad.transpose()) * 0.5;
    Ok(Linearization {
        value,
        gradient: SymMatrix(grad),
        margin,
    })
}

/// Derivative of `F(r) = f(λ(r))` with respect to the entries of `r`.
#[allow(non_snake_case)]
pub fn F_grad_matrix(r: &SymMatrix, spec: &OperatorSpec) -> Result<SymMatrix> {
    Ok(linearize(r, spec)?.gradient)
}

/// `F(r)` evaluated from the eigenvalues of `eta_matrix(r)`.
pub fn f_of_matrix(r: &SymMatrix, spec: &OperatorSpec) -> Result<f64> {
    spec.check_len(r.n())?;
    let (eta, _) = eta_matrix(r).eigen()?;
    value_from_eta(&eta, spec)
}

/// Whether the eigenvalues of `eta_matrix(r)` lie in the operator's cone,
/// with the signed margin.
pub fn admissible(r: &SymMatrix, spec: &OperatorSpec) -> Result<(bool, f64)> {
    spec.check_len(r.n())?;
    let (eta, _) = eta_matrix(r).eigen()?;
    let ci = spec.cone_index();
    let ok = symfun::first_violation(&eta, ci).is_none();
    Ok((ok, symfun::cone_margin_raw(&eta, ci)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(v: &[f64]) -> Spectrum {
        Spectrum::new(v.to_vec()).unwrap()
    }

    #[test]
    fn eta_transform_examples() {
        assert_eq!(eta_from_lambda(&sp(&[2.0, -7.0])).as_slice(), &[-7.0, 2.0]);
        assert_eq!(eta_from_lambda(&sp(&[1.0, 2.0, 3.0])).as_slice(), &[5.0, 4.0, 3.0]);
        assert_eq!(
            lambda_from_eta(&sp(&[5.0, 4.0, 3.0])).unwrap().as_slice(),
            &[1.0, 2.0, 3.0]
        );
        let l = lambda_from_eta(&Spectrum::uniform(4, 3.0).unwrap()).unwrap();
        for v in l.as_slice() {
            assert!((v - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn eta_matrix_examples() {
        let e = eta_matrix(&SymMatrix::identity(3).unwrap());
        assert_eq!(e.matrix(), &(DMatrix::identity(3, 3) * 2.0));
        let e = eta_matrix(&SymMatrix::from_diagonal(&[1.0, 2.0, 3.0]).unwrap());
        assert_eq!(e, SymMatrix::from_diagonal(&[5.0, 4.0, 3.0]).unwrap());
    }

    #[test]
    fn asymmetric_input_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.5, 1.0]);
        assert!(matches!(SymMatrix::new(m), Err(Error::Precondition(_))));
    }

    #[test]
    fn operator_spec_ranges() {
        assert!(OperatorSpec::pure(3, 3).is_err());
        assert!(OperatorSpec::pure(3, 0).is_err());
        assert!(OperatorSpec::quotient(4, 2, 2).is_err());
        assert!(OperatorSpec::quotient(4, 3, 1).is_ok());
        assert_eq!(OperatorSpec::quotient(4, 3, 1).unwrap().cone_index(), 4);
    }

    #[test]
    fn f_value_uniform() {
        let spec = OperatorSpec::pure(3, 2).unwrap();
        let f = f_value(&sp(&[1.0, 1.0, 1.0]), &spec).unwrap();
        assert!((f - 12f64.sqrt()).abs() < 1e-14);
        assert!((f - 3.46410).abs() < 1e-5);
    }

    #[test]
    fn k_one_is_linear() {
        for n in 2..6 {
            let spec = OperatorSpec::pure(n, 1).unwrap();
            let l: Vec<f64> = (0..n).map(|i| 0.3 + i as f64 * 0.7).collect();
            let f = f_value(&sp(&l), &spec).unwrap();
            let expected = (n - 1) as f64 * l.iter().sum::<f64>();
            assert!((f - expected).abs() < 1e-13 * expected);
        }
    }

    #[test]
    fn f_grad_uniform_and_euler() {
        let spec = OperatorSpec::pure(3, 2).unwrap();
        let l = sp(&[1.0, 1.0, 1.0]);
        let g = f_grad(&l, &spec).unwrap();
        for gi in g.as_slice() {
            assert!((gi - 2.0 / 3f64.sqrt()).abs() < 1e-14);
            assert!((gi - 1.15470).abs() < 1e-5);
        }
        let euler: f64 = g.as_slice().iter().zip(l.as_slice()).map(|(a, b)| a * b).sum();
        assert!((euler - 2.0 * 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn gradient_ordering_follows_lambda() {
        // λ descending ⇒ η ascending ⇒ f ascending
        let spec = OperatorSpec::pure(4, 2).unwrap();
        let l = sp(&[3.0, 2.0, 1.5, 0.5]);
        let g = f_grad(&l, &spec).unwrap();
        for w in g.as_slice().windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn quotient_gradient_formula_matches_fd() {
        let spec = OperatorSpec::quotient(4, 2, 1).unwrap();
        let l = [1.2, 0.7, 1.9, 0.4];
        let g = f_grad(&sp(&l), &spec).unwrap();
        for i in 0..4 {
            let h = 1e-5 * (1.0 + l[i].abs());
            let mut p = l;
            let mut m = l;
            p[i] += h;
            m[i] -= h;
            let fd = (f_value(&sp(&p), &spec).unwrap() - f_value(&sp(&m), &spec).unwrap())
                / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-7 * g[i].abs(), "i={i}");
        }
    }

    #[test]
    fn cone_errors_carry_index() {
        let spec = OperatorSpec::pure(3, 2).unwrap();
        let err = f_value(&sp(&[-1.0, -1.0, -1.0]), &spec).unwrap_err();
        assert_eq!(err.cone_violation().unwrap().index, 1);
        // η = (−1, 2, 2): σ₁ = 3 > 0, σ₂ = −4 + 4 = 0 ⇒ boundary of Γ₂
        let lambda = lambda_from_eta(&sp(&[-1.0, 2.0, 2.0])).unwrap();
        let err = f_grad(&lambda, &spec).unwrap_err();
        assert_eq!(err.cone_violation().unwrap().index, 2);
    }

    #[test]
    fn grad_matrix_diagonal_cases() {
        let spec = OperatorSpec::pure(3, 2).unwrap();
        let g = F_grad_matrix(&SymMatrix::identity(3).unwrap(), &spec).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 2.0 / 3f64.sqrt() } else { 0.0 };
                assert!((g[(i, j)] - expected).abs() < 1e-13);
            }
        }
        let r = SymMatrix::from_diagonal(&[1.0, 2.0, 3.0]).unwrap();
        let g = F_grad_matrix(&r, &spec).unwrap();
        let fg = f_grad(&sp(&[1.0, 2.0, 3.0]), &spec).unwrap();
        for i in 0..3 {
            assert!((g[(i, i)] - fg[i]).abs() < 1e-13);
            for j in 0..3 {
                if i != j {
                    assert!(g[(i, j)].abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn admissible_examples() {
        for n in 2..6 {
            let spec = OperatorSpec::pure(n, n - 1).unwrap();
            assert!(admissible(&SymMatrix::identity(n).unwrap(), &spec).unwrap().0);
        }
        let spec = OperatorSpec::pure(3, 2).unwrap();
        let r = SymMatrix::from_diagonal(&[10.0, 0.0, 0.0]).unwrap();
        let (ok, margin) = admissible(&r, &spec).unwrap();
        assert!(ok);
        assert!((margin - 20.0).abs() < 1e-12);
        let spec = OperatorSpec::pure(3, 1).unwrap();
        let r = SymMatrix::new(-DMatrix::identity(3, 3)).unwrap();
        let (ok, margin) = admissible(&r, &spec).unwrap();
        assert!(!ok);
        assert!((margin + 6.0).abs() < 1e-12);
    }
}
