//! Elementary symmetric functions, their deleted-variable variants and the
//! Gårding cone predicates.
//!
//! All evaluations go through the coefficient recurrence of `∏ (t + λ_i)`,
//! carried out with error-free transformations (a compensated recurrence), so
//! results are as accurate as if the recurrence ran in twice the working
//! precision. Deleted variants `σ_k(λ|i)` substitute zero for the removed
//! entries; they never shrink the vector.

use serde::{Deserialize, Serialize};

use crate::error::{ConeViolation, Error, Result};

/// An ordered real vector of (at least two) eigenvalues.
///
/// No ordering is imposed; operations that need sorted input sort a copy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::domain(format!(
                "spectrum needs at least 2 entries, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("spectrum entry {i} is not finite")));
        }
        Ok(Spectrum(values))
    }

    /// Uniform spectrum `(c, …, c)`.
    pub fn uniform(n: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn scaled(&self, t: f64) -> Spectrum {
        Spectrum(self.0.iter().map(|v| v * t).collect())
    }

    /// Copy sorted in descending order.
    pub fn sorted_descending(&self) -> Spectrum {
        let mut v = self.0.clone();
        v.sort_by(|a, b| b.total_cmp(a));
        Spectrum(v)
    }
}

impl std::ops::Index<usize> for Spectrum {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<f64>> for Spectrum {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Spectrum::new(v)
    }
}

impl From<Spectrum> for Vec<f64> {
    fn from(s: Spectrum) -> Self {
        s.0
    }
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// `σ_0, …, σ_kmax` of `values`, with `skip` entries treated as zero.
pub(crate) fn sigmas_with_skip(values: &[f64], kmax: usize, skip: &[usize]) -> Vec<f64> {
    let kmax = kmax.min(values.len());
    let mut hi = vec![0.0; kmax + 1];
    let mut lo = vec![0.0; kmax + 1];
    hi[0] = 1.0;
    let mut seen = 0usize;
    for (idx, &x) in values.iter().enumerate() {
        if skip.contains(&idx) || x == 0.0 {
            continue;
        }
        seen += 1;
        for j in (1..=seen.min(kmax)).rev() {
            let (p, perr) = two_prod(x, hi[j - 1]);
            let plo = x.mul_add(lo[j - 1], perr);
            let (s, serr) = two_sum(hi[j], p);
            hi[j] = s;
            lo[j] += plo + serr;
        }
    }
    hi.iter().zip(&lo).map(|(h, l)| h + l).collect()
}

/// `σ_0, …, σ_kmax` in one pass.
pub(crate) fn sigmas(values: &[f64], kmax: usize) -> Vec<f64> {
    sigmas_with_skip(values, kmax, &[])
}

pub(crate) fn sigma_raw(values: &[f64], k: usize) -> f64 {
    if k > values.len() {
        return 0.0;
    }
    sigmas(values, k)[k]
}

pub(crate) fn sigma_excl_raw(values: &[f64], k: usize, i: usize) -> f64 {
    if k > values.len() {
        return 0.0;
    }
    sigmas_with_skip(values, k, &[i])[k]
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k > n {
        return Err(Error::domain(format!("k = {k} outside 0..={n}")));
    }
    Ok(())
}

fn check_cone_k(n: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::domain(format!("k = {k} outside 1..={n}")));
    }
    Ok(())
}

fn check_index(n: usize, i: usize) -> Result<()> {
    if i >= n {
        return Err(Error::domain(format!("index {i} outside 0..{n}")));
    }
    Ok(())
}

/// k-th elementary symmetric polynomial; `σ_0 = 1`.
pub fn sigma(lambda: &Spectrum, k: usize) -> Result<f64> {
    check_k(lambda.len(), k)?;
    Ok(sigma_raw(lambda.as_slice(), k))
}

/// `σ_k(λ|i)`: σ_k with the entry `i` (0-based) set to zero.
pub fn sigma_excl(lambda: &Spectrum, k: usize, i: usize) -> Result<f64> {
    check_k(lambda.len(), k)?;
    check_index(lambda.len(), i)?;
    Ok(sigma_excl_raw(lambda.as_slice(), k, i))
}

/// `σ_k(λ|ij)`: σ_k with entries `i` and `j` set to zero.
pub fn sigma_excl2(lambda: &Spectrum, k: usize, i: usize, j: usize) -> Result<f64> {
    check_k(lambda.len(), k)?;
    check_index(lambda.len(), i)?;
    check_index(lambda.len(), j)?;
    Ok(sigmas_with_skip(lambda.as_slice(), k, &[i, j])[k])
}

pub(crate) fn sigma_grad_raw(values: &[f64], k: usize) -> Vec<f64> {
    (0..values.len())
        .map(|i| sigma_excl_raw(values, k - 1, i))
        .collect()
}

/// `∂σ_k/∂λ_i = σ_{k-1}(λ|i)`.
pub fn sigma_grad(lambda: &Spectrum, k: usize) -> Result<Spectrum> {
    check_cone_k(lambda.len(), k)?;
    Ok(Spectrum(sigma_grad_raw(lambda.as_slice(), k)))
}

/// First index `i ≤ k` with `σ_i ≤ 0`, if any.
pub(crate) fn first_violation(values: &[f64], k: usize) -> Option<ConeViolation> {
    let s = sigmas(values, k);
    (1..=k)
        .find(|&i| s[i].is_nan() || s[i] <= 0.0)
        .map(|i| ConeViolation {
            index: i,
            sigma: s[i],
        })
}

pub(crate) fn cone_margin_raw(values: &[f64], k: usize) -> f64 {
    sigmas(values, k)[1..=k]
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Membership in the open cone `Γ_k = {σ_i > 0, 1 ≤ i ≤ k}`. No tolerance.
pub fn in_gamma(lambda: &Spectrum, k: usize) -> Result<bool> {
    check_cone_k(lambda.len(), k)?;
    Ok(first_violation(lambda.as_slice(), k).is_none())
}

/// Signed margin `min_{1≤i≤k} σ_i(λ)`.
pub fn cone_margin(lambda: &Spectrum, k: usize) -> Result<f64> {
    check_cone_k(lambda.len(), k)?;
    Ok(cone_margin_raw(lambda.as_slice(), k))
}

/// Binomial coefficient as a float (exact for the sizes used here).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0f64;
    for j in 0..k {
        c = c * (n - j) as f64 / (j + 1) as f64;
    }
    c.round()
}

/// Gap in the generalized Newton–MacLaurin inequality:
///
/// `(σ_r/C(n,r) ÷ σ_s/C(n,s))^{1/(r-s)} − (σ_k/C(n,k) ÷ σ_l/C(n,l))^{1/(k-l)}`,
///
/// non-negative on `Γ_k` and zero exactly on uniform vectors.
pub fn newton_maclaurin_gap(
    lambda: &Spectrum,
    k: usize,
    l: usize,
    r: usize,
    s: usize,
) -> Result<f64> {
    let n = lambda.len();
    if !(k <= n && l < k && r <= n && s < r && r <= k && s <= l) {
        return Err(Error::domain(format!(
            "invalid index quadruple (k, l, r, s) = ({k}, {l}, {r}, {s}) for n = {n}"
        )));
    }
    let vals = lambda.as_slice();
    if let Some(v) = first_violation(vals, k) {
        return Err(Error::Precondition(format!("lambda not in Gamma_{k}: {v}")));
    }
    let sig = sigmas(vals, k);
    let normalized = |i: usize| sig[i] / binomial(n, i);
    let lhs = (normalized(k) / normalized(l)).powf(1.0 / (k - l) as f64);
    let rhs = (normalized(r) / normalized(s)).powf(1.0 / (r - s) as f64);
    Ok(rhs - lhs)
}
