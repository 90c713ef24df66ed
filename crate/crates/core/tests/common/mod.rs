#![allow(dead_code)]

use hn_core::symfun::in_gamma;
use hn_core::Spectrum;
use nalgebra::DMatrix;

/// `σ_k` by enumerating all `k`-subsets.
pub fn brute_sigma(v: &[f64], k: usize) -> f64 {
    fn rec(v: &[f64], k: usize, start: usize, acc: f64) -> f64 {
        if k == 0 {
            return acc;
        }
        (start..v.len())
            .map(|i| rec(v, k - 1, i + 1, acc * v[i]))
            .sum()
    }
    rec(v, k, 0, 1.0)
}

/// Cyclic Jacobi eigensolver: eigenvalues ascending, eigenvectors as columns.
pub fn jacobi_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut a = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off < 1e-30 * (1.0 + a.norm_squared()) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[(p, q)] == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).unwrap());
    let vals = order.iter().map(|&i| a[(i, i)]).collect();
    let vecs = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    (vals, vecs)
}

/// Largest `t` with `η − t·1 ∈ Γ_k` (to about 1e-12 relative).
pub fn diagonal_depth(eta: &Spectrum, k: usize) -> f64 {
    let shifted = |t: f64| Spectrum::new(eta.as_slice().iter().map(|v| v - t).collect()).unwrap();
    let inside = |t: f64| in_gamma(&shifted(t), k).unwrap();
    let (mut lo, mut hi) = (0.0, 1.0);
    while inside(hi) {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if inside(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Whether a sample is deep enough for central differences of `f` to
/// resolve its derivative.
pub fn fd_resolvable(eta: &Spectrum, k: usize) -> bool {
    let max = eta.as_slice().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    diagonal_depth(eta, k) >= 0.1 * (1.0 + max)
}

/// Orthogonal matrix from the QR factor of a matrix of given entries.
pub fn orthogonal(n: usize, entries: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(n, n, &entries[..n * n]).qr().q()
}
