//! Randomized numerical checks of the structure inequalities behind the
//! strict ellipticity of `σ_k^{1/k}(η)` and its quotient form.
//!
//! The constants `c_{n,k}` in these inequalities are not known in closed
//! form; sweeps report empirical infima and count strict-positivity or
//! explicit-bound violations only.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ConeViolation, Error, Result};
use crate::operator::{self, OperatorSpec};
use crate::symfun::{self, Spectrum};

/// Absolute slack allowed on inequality checks.
pub const VIOLATION_TOL: f64 = 1e-12;
/// Absolute slack on the trace lower bound.
pub const TRACE_TOL: f64 = 1e-10;

const SHIFT_TOL: f64 = 1e-10;
const MARGIN_FLOOR: f64 = 1e-6;

/// Deterministic generator of points strictly inside `Γ_k`.
///
/// Sample `i` draws a standard normal vector `g` from a ChaCha8 stream keyed
/// by `(seed, i)`, finds by bisection the smallest shift `t` with
/// `σ_j(g + t·1) > 1e-6` for all `j ≤ k`, and returns `scale·(g + (t + d)·1)`.
/// The extra depth `d` is zero for half of the samples (points hugging the
/// cone boundary) and `|N(0,1)|` for the rest (interior points).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeSampler {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub scale: f64,
    position: u64,
}

impl ConeSampler {
    pub fn new(n: usize, k: usize, seed: u64, scale: f64) -> Result<Self> {
        if n < 2 || k < 1 || k > n {
            return Err(Error::domain(format!("sampler needs 1 <= k <= n, n >= 2 (n={n}, k={k})")));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::domain("sampler scale must be positive"));
        }
        Ok(ConeSampler {
            n,
            k,
            seed,
            scale,
            position: 0,
        })
    }

    /// Index of the next sample in the stream.
    pub fn position(&self) -> u64 {
        self.position
    }

    /// Next point of the stream.
    pub fn sample_eta(&mut self) -> Spectrum {
        let s = self.sample_at(self.position);
        self.position += 1;
        s
    }

    /// The `index`-th point of the stream, independent of the current position.
    pub fn sample_at(&self, index: u64) -> Spectrum {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        let g: Vec<f64> = (0..self.n).map(|_| rng.sample(StandardNormal)).collect();
        let hug: bool = rng.random_bool(0.5);
        let depth = if hug {
            0.0
        } else {
            rng.sample::<f64, _>(StandardNormal).abs()
        };
        let shift = minimal_shift(&g, self.k) + depth;
        let eta: Vec<f64> = g.iter().map(|x| self.scale * (x + shift)).collect();
        debug_assert!(symfun::first_violation(&eta, self.k).is_none());
        Spectrum::new(eta).expect("finite sample")
    }
}

fn shifted_ok(g: &[f64], t: f64, k: usize, buf: &mut Vec<f64>) -> bool {
    buf.clear();
    buf.extend(g.iter().map(|x| x + t));
    let s = symfun::sigmas(buf, k);
    s[1..=k].iter().all(|&v| v > MARGIN_FLOOR)
}

/// Smallest `t` (to `SHIFT_TOL`) with `σ_j(g + t·1) > 1e-6` for all `j ≤ k`.
/// Each `σ_j(g + t·1)` is increasing in `t` on the cone, so bisection applies.
fn minimal_shift(g: &[f64], k: usize) -> f64 {
    let max = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = g.iter().copied().fold(f64::INFINITY, f64::min);
    let mut lo = -max - 1.0;
    let mut hi = -min + 1.0;
    let mut buf = Vec::with_capacity(g.len());
    while hi - lo > SHIFT_TOL {
        let mid = 0.5 * (lo + hi);
        if shifted_ok(g, mid, k, &mut buf) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn require_cone(values: &[f64], k: usize) -> Result<()> {
    match symfun::first_violation(values, k) {
        None => Ok(()),
        Some(v) => Err(Error::Cone { violation: v }),
    }
}

/// `σ_{k−1}(η|k) / Σ_i σ_{k−1}(η|i)` with η sorted descending first.
pub fn lt_ratio(eta: &Spectrum, k: usize) -> Result<f64> {
    let n = eta.len();
    if k < 1 || k > n {
        return Err(Error::domain(format!("k = {k} outside 1..={n}")));
    }
    require_cone(eta.as_slice(), k)?;
    let sorted = eta.sorted_descending();
    let v = sorted.as_slice();
    let num = symfun::sigma_excl_raw(v, k - 1, k - 1);
    let den: f64 = (0..n).map(|i| symfun::sigma_excl_raw(v, k - 1, i)).sum();
    Ok(num / den)
}

/// `min_i f_i / Σ_i f_i` for the operator's gradient at λ.
pub fn key_ratio(lambda: &Spectrum, spec: &OperatorSpec) -> Result<f64> {
    let f = operator::f_grad(lambda, spec)?;
    let total: f64 = f.as_slice().iter().sum();
    if !(total > 0.0) {
        return Err(Error::Numeric(format!("gradient sum {total} is not positive")));
    }
    let min = f.as_slice().iter().copied().fold(f64::INFINITY, f64::min);
    Ok(min / total)
}

/// Upper bound `l(n−k)/(k(n−l))` on `α_p`.
pub fn alpha_bound(n: usize, k: usize, l: usize) -> f64 {
    (l * (n - k)) as f64 / (k * (n - l)) as f64
}

/// `α_p = [σ_k(η|p)/σ_{k−1}(η|p)]·[σ_{l−1}(η|p)/σ_l(η|p)]` (0-based `p`).
pub fn alpha_p(eta: &Spectrum, k: usize, l: usize, p: usize) -> Result<f64> {
    let n = eta.len();
    if !(1 <= l && l < k && k < n) {
        return Err(Error::domain(format!(
            "need 1 <= l < k <= n-1, got n={n}, k={k}, l={l}"
        )));
    }
    if p >= n {
        return Err(Error::domain(format!("index {p} outside 0..{n}")));
    }
    require_cone(eta.as_slice(), k + 1)?;
    let del = symfun::sigmas_with_skip(eta.as_slice(), k, &[p]);
    if del[k - 1] <= 0.0 || del[l] <= 0.0 {
        return Err(Error::Numeric(format!(
            "zero denominator in alpha_{p}: sigma_{}(eta|p) = {}, sigma_{l}(eta|p) = {}",
            k - 1,
            del[k - 1],
            del[l]
        )));
    }
    Ok(del[k] / del[k - 1] * del[l - 1] / del[l])
}

/// `(n−1)/k · (n−k+1) · C(n,k−1) / C(n,k)^{(k−1)/k}`.
pub fn trace_lower_bound(n: usize, k: usize) -> f64 {
    let (nf, kf) = (n as f64, k as f64);
    (nf - 1.0) / kf * (nf - kf + 1.0) * symfun::binomial(n, k - 1)
        / symfun::binomial(n, k).powf((kf - 1.0) / kf)
}

/// `Σ f_i(λ) ≥ trace_lower_bound(n, k) − 1e-10` for the pure operator.
pub fn trace_check(lambda: &Spectrum, spec: &OperatorSpec) -> Result<bool> {
    if spec.l.is_some() {
        return Err(Error::domain("trace bound is stated for the pure operator only"));
    }
    let total: f64 = operator::f_grad(lambda, spec)?.as_slice().iter().sum();
    Ok(total >= trace_lower_bound(spec.n, spec.k) - TRACE_TOL)
}

/// Which inequality a sweep exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    /// `lt_ratio > 0` on `Γ_k`.
    LinTrudinger,
    /// `key_ratio > 0` for the pure operator, with scale invariance.
    KeyPure,
    /// `key_ratio > 0` for the quotient operator on `Γ_{k+1}`.
    KeyQuotient,
    /// `0 < α_p ≤ l(n−k)/(k(n−l))` on `Γ_{k+1}`.
    AlphaBound,
    /// `Σ f_i ≥ trace_lower_bound(n, k)`.
    TraceBound,
}

impl SweepKind {
    pub fn label(&self) -> &'static str {
        match self {
            SweepKind::LinTrudinger => "lin-trudinger",
            SweepKind::KeyPure => "key-pure",
            SweepKind::KeyQuotient => "key-quotient",
            SweepKind::AlphaBound => "alpha-bound",
            SweepKind::TraceBound => "trace-bound",
        }
    }

    pub const ALL: [SweepKind; 5] = [
        SweepKind::LinTrudinger,
        SweepKind::KeyPure,
        SweepKind::KeyQuotient,
        SweepKind::AlphaBound,
        SweepKind::TraceBound,
    ];

    /// Valid `(k, l)` pairs for dimension `n`.
    pub fn index_sets(&self, n: usize) -> Vec<(usize, Option<usize>)> {
        match self {
            SweepKind::LinTrudinger => (1..=n).map(|k| (k, None)).collect(),
            SweepKind::KeyPure | SweepKind::TraceBound => {
                (1..n).map(|k| (k, None)).collect()
            }
            SweepKind::KeyQuotient | SweepKind::AlphaBound => (2..n)
                .flat_map(|k| (1..k).map(move |l| (k, Some(l))))
                .collect(),
        }
    }

    fn sample_cone(&self, k: usize) -> usize {
        match self {
            SweepKind::KeyQuotient | SweepKind::AlphaBound => k + 1,
            _ => k,
        }
    }
}

/// Outcome of one sweep over a single `(kind, n, k[, l])` configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub lemma: SweepKind,
    pub n: usize,
    pub k: usize,
    pub l: Option<usize>,
    pub seed: u64,
    pub samples: u64,
    /// Smallest observed ratio (the empirical infimum of the constant).
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// η of the sample attaining `min_ratio`.
    pub argmin: Vec<f64>,
    pub violations: u64,
    /// Explicit bound checked, when the inequality has one.
    pub bound: Option<f64>,
    /// Largest `|ratio(10λ) − ratio(λ)|` (key sweeps only).
    pub max_scale_defect: Option<f64>,
    /// First violating sample, if any.
    pub first_violation: Option<Vec<f64>>,
    pub wall_time: f64,
}

impl SweepReport {
    pub const CSV_HEADER: &'static str =
        "lemma,n,k,l,seed,samples,min_ratio,max_ratio,violations,bound,max_scale_defect,argmin";

    /// One CSV row; wall time is left out so rows are reproducible.
    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        let argmin: Vec<String> = self.argmin.iter().map(|x| format!("{x:e}")).collect();
        format!(
            "{},{},{},{},{},{},{:e},{:e},{},{},{},{}",
            self.lemma.label(),
            self.n,
            self.k,
            self.l.map(|l| l.to_string()).unwrap_or_default(),
            self.seed,
            self.samples,
            self.min_ratio,
            self.max_ratio,
            self.violations,
            opt(self.bound),
            opt(self.max_scale_defect),
            argmin.join(";")
        )
    }
}

#[derive(Clone)]
struct Acc {
    min: f64,
    min_index: u64,
    max: f64,
    violations: u64,
    first_violation: Option<u64>,
    scale_defect: f64,
}

impl Acc {
    fn empty() -> Self {
        Acc {
            min: f64::INFINITY,
            min_index: u64::MAX,
            max: f64::NEG_INFINITY,
            violations: 0,
            first_violation: None,
            scale_defect: 0.0,
        }
    }

    fn merge(mut self, o: Acc) -> Acc {
        if o.min < self.min || (o.min == self.min && o.min_index < self.min_index) {
            self.min = o.min;
            self.min_index = o.min_index;
        }
        self.max = self.max.max(o.max);
        self.violations += o.violations;
        self.first_violation = match (self.first_violation, o.first_violation) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        self.scale_defect = self.scale_defect.max(o.scale_defect);
        self
    }
}

/// Per-sample outcome: (min ratio, max ratio, violated, scale defect).
fn evaluate_sample(
    kind: SweepKind,
    eta: &Spectrum,
    k: usize,
    l: Option<usize>,
    bound: Option<f64>,
) -> (f64, f64, bool, f64) {
    let n = eta.len();
    match kind {
        SweepKind::LinTrudinger => match lt_ratio(eta, k) {
            Ok(r) => (r, r, !(r > 0.0), 0.0),
            Err(_) => (f64::NAN, f64::NAN, true, 0.0),
        },
        SweepKind::KeyPure | SweepKind::KeyQuotient => {
            let spec = OperatorSpec { n, k, l };
            let lambda = operator::lambda_from_eta(eta).expect("n >= 2");
            match (key_ratio(&lambda, &spec), key_ratio(&lambda.scaled(10.0), &spec)) {
                (Ok(r), Ok(r10)) => (r, r, !(r > 0.0), (r10 - r).abs()),
                _ => (f64::NAN, f64::NAN, true, f64::INFINITY),
            }
        }
        SweepKind::AlphaBound => {
            let l = l.expect("alpha sweep needs l");
            let b = bound.expect("alpha sweep has a bound");
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            let mut bad = false;
            for p in 0..n {
                match alpha_p(eta, k, l, p) {
                    Ok(a) => {
                        lo = lo.min(a);
                        hi = hi.max(a);
                        bad |= !(a > 0.0) || a > b + VIOLATION_TOL;
                    }
                    Err(_) => bad = true,
                }
            }
            (lo, hi, bad, 0.0)
        }
        SweepKind::TraceBound => {
            let spec = OperatorSpec { n, k, l: None };
            let b = bound.expect("trace sweep has a bound");
            let lambda = operator::lambda_from_eta(eta).expect("n >= 2");
            match operator::f_grad(&lambda, &spec) {
                Ok(f) => {
                    let total: f64 = f.as_slice().iter().sum();
                    let r = total / b;
                    (r, r, total < b - TRACE_TOL, 0.0)
                }
                Err(_) => (f64::NAN, f64::NAN, true, 0.0),
            }
        }
    }
}

/// Runs `samples` points of one configuration. Results depend only on the
/// arguments, not on thread count or scheduling.
pub fn run_sweep(
    kind: SweepKind,
    n: usize,
    k: usize,
    l: Option<usize>,
    samples: u64,
    seed: u64,
) -> Result<SweepReport> {
    if !kind.index_sets(n).contains(&(k, l)) {
        return Err(Error::domain(format!(
            "{} sweep is not defined for n={n}, k={k}, l={l:?}",
            kind.label()
        )));
    }
    let start = Instant::now();
    let sampler = ConeSampler::new(n, kind.sample_cone(k), seed, 1.0)?;
    let bound = match kind {
        SweepKind::AlphaBound => Some(alpha_bound(n, k, l.unwrap())),
        SweepKind::TraceBound => Some(trace_lower_bound(n, k)),
        _ => None,
    };
    let acc = (0..samples)
        .into_par_iter()
        .fold(Acc::empty, |mut acc, i| {
            let eta = sampler.sample_at(i);
            let (lo, hi, bad, defect) = evaluate_sample(kind, &eta, k, l, bound);
            let one = Acc {
                min: if lo.is_nan() { f64::NEG_INFINITY } else { lo },
                min_index: i,
                max: hi,
                violations: bad as u64,
                first_violation: bad.then_some(i),
                scale_defect: defect,
            };
            acc = acc.merge(one);
            acc
        })
        .reduce(Acc::empty, Acc::merge);

    let argmin = if acc.min_index == u64::MAX {
        Vec::new()
    } else {
        sampler.sample_at(acc.min_index).into_vec()
    };
    Ok(SweepReport {
        lemma: kind,
        n,
        k,
        l,
        seed,
        samples,
        min_ratio: acc.min,
        max_ratio: acc.max,
        argmin,
        violations: acc.violations,
        bound,
        max_scale_defect: matches!(kind, SweepKind::KeyPure | SweepKind::KeyQuotient)
            .then_some(acc.scale_defect),
        first_violation: acc
            .first_violation
            .map(|i| sampler.sample_at(i).into_vec()),
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Cone violation of an arbitrary η against `Γ_k`, if any.
pub fn violation(eta: &Spectrum, k: usize) -> Option<ConeViolation> {
    symfun::first_violation(eta.as_slice(), k)
}
