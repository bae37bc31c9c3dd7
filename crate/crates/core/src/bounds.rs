//! Closed-form bounds on the largest feasible zero count and on how far the
//! diagonal relaxation can be from it.
//!
//! Each family brackets the optimum: `k_under <= K* <= K_d <= k_over`, where
//! `K*` is the true maximum number of zeros and `K_d` the count admitted by
//! the diagonal relaxation. `ratio_bound` caps `k_over / k_under`.
//!
//! Comparisons against `gamma` carry a relative slack of [`BOUND_SLACK`] so
//! that instances built to sit exactly on a threshold are classified as the
//! exact arithmetic would.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::linalg::{
    complement, eig_sym, eigenvalues, lambda_max, lambda_min, schur_complement, smallest_indices,
    sum_smallest, Matrix,
};

pub const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KBounds {
    pub k_under: usize,
    pub k_over: usize,
    /// Absent when `k_under = 0`.
    pub ratio_bound: Option<f64>,
}

fn within(value: f64, gamma: f64) -> bool {
    value <= gamma * (1.0 + BOUND_SLACK)
}

/// Largest `k` in `0..=n` with `pred(k)`; `pred(0)` is taken as true.
fn largest(n: usize, pred: impl Fn(usize) -> Result<bool>) -> Result<usize> {
    let mut best = 0;
    for k in 1..=n {
        if pred(k)? {
            best = k;
        }
    }
    Ok(best)
}

fn ratio(k_under: usize, k_over: usize, n: usize, scaled_next: f64) -> Option<f64> {
    if k_under == 0 {
        return None;
    }
    if k_under >= n {
        return Some(k_over as f64 / k_under as f64);
    }
    Some((scaled_next.ceil() - 1.0) / k_under as f64)
}

/// Zero set used by the lower count: the `k` coordinates with smallest `|c|`.
fn small_center_set(c: &[f64], k: usize) -> Vec<usize> {
    let mags: Vec<f64> = c.iter().map(|v| v.abs()).collect();
    smallest_indices(&mags, k)
}

fn schur_lambda_max(q: &Matrix, z: &[usize]) -> Result<f64> {
    let y = complement(q.rows(), z);
    lambda_max(&schur_complement(q, &y, z)?)
}

/// Eigenvalue bounds. `k_under` uses the largest eigenvalue of the Schur
/// complement on the smallest centers, `k_over` the smallest eigenvalue of `Q`.
pub fn eig_bounds(inst: &Instance) -> Result<KBounds> {
    let n = inst.n();
    let q = inst.q();
    let c = inst.c();
    let gamma = inst.gamma();
    let c2: Vec<f64> = c.iter().map(|v| v * v).collect();
    let lmin = lambda_min(q)?;
    let k_under = largest(n, |k| {
        let z = small_center_set(c, k);
        Ok(within(schur_lambda_max(q, &z)? * sum_smallest(&c2, k), gamma))
    })?;
    let k_over = largest(n, |k| Ok(within(lmin * sum_smallest(&c2, k), gamma)))?;
    let next = if k_under > 0 && k_under < n {
        let z = small_center_set(c, k_under + 1);
        (k_under + 1) as f64 * schur_lambda_max(q, &z)? / lmin
    } else {
        0.0
    };
    Ok(KBounds { k_under, k_over, ratio_bound: ratio(k_under, k_over, n, next) })
}

/// Eigenvalue bounds after the change of variables `x -> S x` with `S`
/// diagonal and positive: the matrix becomes `S^{-1} Q S^{-1}` and the
/// center `S c`.
pub fn eig_bounds_scaled(inst: &Instance, scale: &[f64]) -> Result<KBounds> {
    if scale.len() != inst.n() {
        return Err(Error::Dimension("scale has the wrong length".into()));
    }
    if scale.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
        return Err(Error::InvalidInput("scale entries must be positive".into()));
    }
    let inv: Vec<f64> = scale.iter().map(|s| 1.0 / s).collect();
    let q = inst.q().scale_sym(&inv);
    let c: Vec<f64> = inst.c().iter().zip(scale).map(|(c, s)| c * s).collect();
    eig_bounds(&Instance::new(q, c, inst.gamma())?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbRegime {
    Quadratic,
    Linear,
    Certain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbBound {
    pub epsilon: f64,
    /// Lower bound on the probability over random eigenvectors that
    /// `k_over / k_under <= ratio_bound`.
    pub probability: f64,
    pub ratio_bound: Option<f64>,
    pub regime: ProbRegime,
    pub eps_max: f64,
    /// The open interval where the linear regime applies, if any.
    pub interval: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectrum {
    pub mean: f64,
    pub var: f64,
    pub min: f64,
    pub max: f64,
}

impl Spectrum {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Spectrum { mean, var, min, max }
    }
}

/// Probability bound for a matrix with eigenvalues `sp` and uniformly random
/// eigenvectors, in dimension `n`.
pub fn prob_from_spectrum(sp: &Spectrum, n: usize, epsilon: f64) -> (f64, ProbRegime, f64, Option<(f64, f64)>) {
    let Spectrum { mean, var, max, .. } = *sp;
    let spread = max - mean;
    let eps_max = spread / mean;
    let interval = if spread * spread > 8.0 * var {
        let root = (eps_max * eps_max - 8.0 * var / (mean * mean)).sqrt();
        Some((0.25 * (eps_max - root), 0.25 * (eps_max + root)))
    } else {
        None
    };
    let nf = n as f64;
    if epsilon >= eps_max {
        return (1.0, ProbRegime::Certain, eps_max, interval);
    }
    let em = epsilon * mean;
    match interval {
        Some((lo, hi)) if epsilon > lo && epsilon < hi => {
            let gap = spread - em;
            (1.0 - (-nf / 8.0 * em / gap).exp(), ProbRegime::Linear, eps_max, interval)
        }
        _ => {
            let p = 1.0 - (-nf / 8.0 * em * em / (em * em + var)).exp();
            (p, ProbRegime::Quadratic, eps_max, interval)
        }
    }
}

pub fn prob_bound(inst: &Instance, epsilon: f64) -> Result<ProbBound> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidInput("epsilon must be positive".into()));
    }
    let n = inst.n();
    let sp = Spectrum::of(&eigenvalues(inst.q())?);
    let (probability, regime, eps_max, interval) = prob_from_spectrum(&sp, n, epsilon);
    let k_under = eig_bounds(inst)?.k_under;
    let ratio_bound = if k_under == 0 {
        None
    } else {
        let next = (k_under + 1) as f64 * (1.0 + epsilon) * sp.mean / sp.min;
        Some((next.ceil() - 1.0) / k_under as f64)
    };
    Ok(ProbBound { epsilon, probability, ratio_bound, regime, eps_max, interval })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagDomBounds {
    pub k_under: usize,
    pub k_over: usize,
    pub ratio_bound: Option<f64>,
    /// Largest normalized off-diagonal row sum over all rows.
    pub row_sum: f64,
    pub r_dd: Option<f64>,
}

/// `|Q_mn| / sqrt(Q_mm Q_nn)` with a zero diagonal.
fn normalized_offdiag(q: &Matrix) -> Matrix {
    let n = q.rows();
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                m[(i, j)] = q[(i, j)].abs() / (q[(i, i)] * q[(j, j)]).sqrt();
            }
        }
    }
    m
}

fn max_row_sum(a: &Matrix, set: &[usize]) -> f64 {
    set.iter().map(|&i| set.iter().map(|&j| a[(i, j)]).sum::<f64>()).fold(0.0, f64::max)
}

/// Bounds for matrices whose normalized off-diagonal row sums stay below one.
pub fn diag_dom_bounds(inst: &Instance) -> Result<DiagDomBounds> {
    let n = inst.n();
    let q = inst.q();
    let a = normalized_offdiag(q);
    let all: Vec<usize> = (0..n).collect();
    let row_sum = max_row_sum(&a, &all);
    if row_sum >= 1.0 {
        return Err(Error::NotDiagonallyDominant { row_sum });
    }
    let gamma = inst.gamma();
    let p: Vec<f64> = (0..n).map(|i| q[(i, i)] * inst.c()[i] * inst.c()[i]).collect();
    let local = |k: usize| max_row_sum(&a, &smallest_indices(&p, k));
    let k_under = largest(n, |k| Ok(within((1.0 + local(k)) * sum_smallest(&p, k), gamma)))?;
    let k_over = largest(n, |k| Ok(within((1.0 - row_sum) * sum_smallest(&p, k), gamma)))?;
    let r_dd = (k_under < n).then(|| (1.0 + local(k_under + 1)) / (1.0 - row_sum));
    let next = r_dd.map_or(0.0, |r| (k_under + 1) as f64 * r);
    Ok(DiagDomBounds { k_under, k_over, ratio_bound: ratio(k_under, k_over, n, next), row_sum, r_dd })
}

/// Assignment of eigenpairs to coordinates: coordinate `j` gets eigenvector
/// `eigen_index[j]` multiplied by `sign[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    pub eigen_index: Vec<usize>,
    pub sign: Vec<f64>,
}

/// Greedy matching: repeatedly pair the largest remaining entry `|V_ij|`
/// whose row and column are both unused, then flip signs so matched entries
/// are positive.
pub fn default_alignment(vectors: &Matrix) -> Alignment {
    let n = vectors.rows();
    let mut entries: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    entries.sort_by(|&(a, b), &(c, d)| {
        vectors[(c, d)].abs().total_cmp(&vectors[(a, b)].abs()).then((a, b).cmp(&(c, d)))
    });
    let mut eigen_index = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for (i, j) in entries {
        if eigen_index[i] == usize::MAX && !used[j] {
            eigen_index[i] = j;
            used[j] = true;
        }
    }
    let sign = (0..n).map(|i| if vectors[(i, eigen_index[i])] < 0.0 { -1.0 } else { 1.0 }).collect();
    Alignment { eigen_index, sign }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearAlignedBounds {
    pub k_under: usize,
    pub k_over: usize,
    pub ratio_bound: Option<f64>,
    /// Spectral norm of the deviation of the aligned eigenvectors from `I`.
    pub rho: f64,
    pub kappa: f64,
    /// Lower and upper limits on the spectrum of `L^{-1/2} Q L^{-1/2}`.
    pub spectrum_lower: f64,
    pub spectrum_upper: f64,
    pub r_na: f64,
    /// Eigenvalue assigned to each coordinate.
    pub matched_eigenvalues: Vec<f64>,
}

/// Bounds for matrices whose eigenvectors are close to the coordinate axes.
pub fn near_aligned_bounds(inst: &Instance, alignment: Option<&Alignment>) -> Result<NearAlignedBounds> {
    let n = inst.n();
    let eig = eig_sym(inst.q())?;
    let default;
    let al = match alignment {
        Some(a) => a,
        None => {
            default = default_alignment(&eig.vectors);
            &default
        }
    };
    if al.eigen_index.len() != n || al.sign.len() != n {
        return Err(Error::Dimension("alignment has the wrong length".into()));
    }
    let mut delta = Matrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            delta[(i, j)] = al.sign[j] * eig.vectors[(i, al.eigen_index[j])] - if i == j { 1.0 } else { 0.0 };
        }
    }
    let rho = lambda_max(&delta.transpose().matmul(&delta))?.max(0.0).sqrt();
    let lam: Vec<f64> = al.eigen_index.iter().map(|&k| eig.values[k]).collect();
    let kappa = eig.values[n - 1] / eig.values[0];
    if kappa * rho >= 1.0 {
        return Err(Error::AlignmentTooWeak { product: kappa * rho });
    }
    let spectrum_lower = 1.0 - kappa * rho;
    let spectrum_upper = 1.0 + kappa * (rho + rho * rho);
    let gamma = inst.gamma();
    let p: Vec<f64> = lam.iter().zip(inst.c()).map(|(l, c)| l * c * c).collect();
    let k_under = largest(n, |k| Ok(within(spectrum_upper * sum_smallest(&p, k), gamma)))?;
    let k_over = largest(n, |k| Ok(within(spectrum_lower * sum_smallest(&p, k), gamma)))?;
    let r_na = spectrum_upper / spectrum_lower;
    let next = (k_under + 1) as f64 * r_na;
    Ok(NearAlignedBounds {
        k_under,
        k_over,
        ratio_bound: ratio(k_under, k_over, n, next),
        rho,
        kappa,
        spectrum_lower,
        spectrum_upper,
        r_na,
        matched_eigenvalues: lam,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diag_exact::solve_diagonal;

    fn diagonal() -> Instance {
        let q = vec![vec![2.0, 0.0, 0.0], vec![0.0, 0.5, 0.0], vec![0.0, 0.0, 1.0]];
        Instance::from_rows(&q, &[0.4, 0.9, 0.3], 0.5).unwrap()
    }

    #[test]
    fn scaling_by_root_diagonal_is_exact_for_diagonal_q() {
        let i = diagonal();
        let s: Vec<f64> = i.q().diag().iter().map(|v| v.sqrt()).collect();
        let b = eig_bounds_scaled(&i, &s).unwrap();
        let exact = solve_diagonal(&i.q().diag(), i.c(), i.gamma()).unwrap().max_zeros;
        assert_eq!((b.k_under, b.k_over), (exact, exact));
    }

    #[test]
    fn identity_scale_changes_nothing() {
        let i = diagonal();
        assert_eq!(eig_bounds_scaled(&i, &[1.0; 3]).unwrap(), eig_bounds(&i).unwrap());
    }

    #[test]
    fn probability_regimes_join_continuously() {
        let sp = Spectrum::of(&[1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 9.0]);
        let (_, _, eps_max, interval) = prob_from_spectrum(&sp, 10, 0.1);
        let (lo, hi) = interval.expect("spread exceeds the variance condition");
        assert!(0.0 < lo && lo < hi && hi < eps_max);
        for edge in [lo, hi] {
            let (a, _, _, _) = prob_from_spectrum(&sp, 10, edge * (1.0 - 1e-12));
            let (b, _, _, _) = prob_from_spectrum(&sp, 10, edge * (1.0 + 1e-12));
            assert!((a - b).abs() < 1e-9);
        }
        let (_, r, _, _) = prob_from_spectrum(&sp, 10, 0.5 * (lo + hi));
        assert_eq!(r, ProbRegime::Linear);
        let (p, r, _, _) = prob_from_spectrum(&sp, 10, eps_max);
        assert_eq!((p, r), (1.0, ProbRegime::Certain));
    }

    #[test]
    fn non_dominant_matrix_is_rejected() {
        let q = vec![vec![1.0, 0.9, 0.0], vec![0.9, 1.0, 0.3], vec![0.0, 0.3, 1.0]];
        let i = Instance::from_rows(&q, &[0.1, 0.1, 0.1], 1.0).unwrap();
        assert!(matches!(diag_dom_bounds(&i), Err(Error::NotDiagonallyDominant { .. })));
    }

    #[test]
    fn diagonal_matrix_is_perfectly_aligned() {
        let i = diagonal();
        let b = near_aligned_bounds(&i, None).unwrap();
        assert!(b.rho < 1e-12);
        let exact = solve_diagonal(&i.q().diag(), i.c(), i.gamma()).unwrap().max_zeros;
        assert_eq!((b.k_under, b.k_over), (exact, exact));
    }
}
