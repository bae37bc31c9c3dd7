//! Diagonal relaxation: replace `Q` by the best diagonal `D` with
//! `0 <= D <= Q` in the semidefinite order.
//!
//! Every such `D` gives an ellipsoid containing the original one, and the
//! diagonal problem is solved exactly by sorting. For a zero count `K` the
//! relaxation value is
//!
//! ```text
//! E_d(K) = max { S_K(D_n c_n^2) : 0 <= D <= Q, D diagonal }
//! ```
//!
//! where `S_K` sums the `K` smallest entries. `K` zeros are ruled out once
//! `E_d(K) > gamma`, and bisection over `K` finds the largest admissible
//! count. `S_K` is handled through its linear-programming form
//! `max_t K t - sum_n (t - y_n)+`, which makes the barrier problem smooth
//! and lets it be solved by damped Newton steps.

use serde::{Deserialize, Serialize};

use crate::diag_exact::solve_diagonal;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::linalg::{cholesky, lambda_min, sum_smallest, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagOptions {
    /// First barrier weight, relative to `gamma`.
    pub mu_start: f64,
    /// Last barrier weight, relative to `gamma`.
    pub mu_end: f64,
    pub mu_factor: f64,
    pub max_inner: usize,
    /// Start certificates are pulled inside the cone by this relative amount.
    pub shrink: f64,
}

impl Default for DiagOptions {
    fn default() -> Self {
        DiagOptions { mu_start: 1e-2, mu_end: 1e-8, mu_factor: 0.1, max_inner: 500, shrink: 1e-9 }
    }
}

/// A feasible `D` together with the value it certifies for zero count `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagCertificate {
    pub k: usize,
    pub d: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BisectionStep {
    pub k: usize,
    pub value: f64,
    pub above: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagRelaxation {
    pub lower_bound: usize,
    /// Largest zero count the relaxation cannot exclude.
    pub k_d: usize,
    /// Certificate for `k_d + 1` zeros; absent when `k_d = n`.
    pub certificate: Option<DiagCertificate>,
    pub trace: Vec<BisectionStep>,
}

fn products(d: &[f64], c: &[f64]) -> Vec<f64> {
    d.iter().zip(c).map(|(a, b)| a * b * b).collect()
}

fn s_k(d: &[f64], c: &[f64], k: usize) -> f64 {
    sum_smallest(&products(d, c), k)
}

/// `Q - diag(d)` factors with strictly positive pivots.
pub fn is_strictly_feasible(q: &Matrix, d: &[f64]) -> bool {
    if d.iter().any(|&v| !(v > 0.0)) {
        return false;
    }
    let mut m = q.clone();
    for (i, &v) in d.iter().enumerate() {
        m[(i, i)] -= v;
    }
    cholesky(&m).is_ok()
}

/// The two closed-form starting points: `lambda_min(Q) I` and
/// `alpha Diag(Q)` with `alpha` the smallest eigenvalue of the unit-diagonal
/// rescaling of `Q`. Both are shrunk slightly into the interior.
pub fn start_certificates(inst: &Instance, shrink: f64) -> Result<[Vec<f64>; 2]> {
    let q = inst.q();
    let n = inst.n();
    let lmin = lambda_min(q)?;
    let diag = q.diag();
    let inv_sqrt: Vec<f64> = diag.iter().map(|v| 1.0 / v.sqrt()).collect();
    let alpha = lambda_min(&q.scale_sym(&inv_sqrt))?;
    let f = 1.0 - shrink;
    let first = vec![lmin * f; n];
    let second = diag.iter().map(|v| alpha * f * v).collect();
    Ok([first, second])
}

/// The better of the two start certificates for zero count `k`.
pub fn e_d_lower_start(inst: &Instance, k: usize, shrink: f64) -> Result<(f64, Vec<f64>)> {
    let [a, b] = start_certificates(inst, shrink)?;
    let (va, vb) = (s_k(&a, inst.c(), k), s_k(&b, inst.c(), k));
    Ok(if vb > va { (vb, b) } else { (va, a) })
}

#[derive(Clone, Copy, PartialEq)]
enum Stop {
    Full,
    /// Stop as soon as the answer to `E_d(k) > gamma` is settled.
    Threshold,
}

struct Outcome {
    value: f64,
    d: Vec<f64>,
}

struct Barrier<'a> {
    q: &'a Matrix,
    c2: Vec<f64>,
    k: f64,
}

struct Point {
    d: Vec<f64>,
    t: f64,
    s: Vec<f64>,
}

impl Barrier<'_> {
    fn n(&self) -> usize {
        self.c2.len()
    }

    fn slack(&self, p: &Point) -> Vec<f64> {
        (0..self.n()).map(|i| p.s[i] - p.t + self.c2[i] * p.d[i]).collect()
    }

    fn lp_value(&self, p: &Point) -> f64 {
        self.k * p.t - p.s.iter().sum::<f64>()
    }

    fn residual(&self, d: &[f64]) -> Matrix {
        let mut m = self.q.clone();
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] -= v;
        }
        m
    }

    /// `psi = -(K t - sum s) / mu - log det(Q - D) - sum log d - sum log s - sum log r`,
    /// or `None` outside the domain.
    fn psi(&self, p: &Point, mu: f64) -> Option<f64> {
        if p.d.iter().chain(&p.s).any(|&v| !(v > 0.0)) {
            return None;
        }
        let r = self.slack(p);
        if r.iter().any(|&v| !(v > 0.0)) {
            return None;
        }
        let ch = cholesky(&self.residual(&p.d)).ok()?;
        let logs: f64 = p.d.iter().chain(&p.s).chain(&r).map(|v| v.ln()).sum();
        Some(-self.lp_value(p) / mu - ch.logdet() - logs)
    }

    fn newton_step(&self, p: &Point, mu: f64) -> Option<(Vec<f64>, Vec<f64>)> {
        let n = self.n();
        let m = 2 * n + 1;
        let w = cholesky(&self.residual(&p.d)).ok()?.inverse();
        let r = self.slack(p);
        let mut grad = vec![0.0; m];
        let mut h = Matrix::zeros(m, m);
        let ti = n;
        let si = |i: usize| n + 1 + i;
        grad[ti] = -self.k / mu;
        for i in 0..n {
            let (d, s, ri, c2) = (p.d[i], p.s[i], r[i], self.c2[i]);
            let ir2 = 1.0 / (ri * ri);
            grad[i] = w[(i, i)] - 1.0 / d - c2 / ri;
            grad[ti] += 1.0 / ri;
            grad[si(i)] = 1.0 / mu - 1.0 / s - 1.0 / ri;
            for j in 0..n {
                h[(i, j)] = w[(i, j)] * w[(i, j)];
            }
            h[(i, i)] += 1.0 / (d * d) + c2 * c2 * ir2;
            h[(i, ti)] = -c2 * ir2;
            h[(ti, i)] = -c2 * ir2;
            h[(i, si(i))] = c2 * ir2;
            h[(si(i), i)] = c2 * ir2;
            h[(ti, ti)] += ir2;
            h[(ti, si(i))] = -ir2;
            h[(si(i), ti)] = -ir2;
            h[(si(i), si(i))] = 1.0 / (s * s) + ir2;
        }
        let ch = match cholesky(&h) {
            Ok(ch) => ch,
            Err(_) => {
                let scale = h.diag().iter().fold(0.0_f64, |a, &b| a.max(b));
                let mut hr = h.clone();
                for i in 0..m {
                    hr[(i, i)] += 1e-12 * scale;
                }
                cholesky(&hr).ok()?
            }
        };
        let neg: Vec<f64> = grad.iter().map(|g| -g).collect();
        Some((ch.solve(&neg), grad))
    }
}

/// Approximately maximizes `S_K(D c^2)` over `0 < D < Q` starting from the
/// feasible `d0`. Returns the best certified value seen.
fn maximize(inst: &Instance, k: usize, d0: &[f64], opts: &DiagOptions, stop: Stop) -> Outcome {
    let n = inst.n();
    let c = inst.c();
    let gamma = inst.gamma();
    let mut best = Outcome { value: s_k(d0, c, k), d: d0.to_vec() };
    if k == 0 || (stop == Stop::Threshold && best.value > gamma) {
        return best;
    }
    let bar = Barrier { q: inst.q(), c2: c.iter().map(|v| v * v).collect(), k: k as f64 };
    let mut mu = opts.mu_start * gamma;
    let mu_end = opts.mu_end * gamma;
    let d: Vec<f64> = d0.iter().map(|v| 0.95 * v).collect();
    let y = products(&d, c);
    let t = sum_smallest(&y, k) / k as f64;
    let s: Vec<f64> = y.iter().map(|&yi| (t - yi).max(0.0) + mu).collect();
    let mut p = Point { d, t, s };
    let mut psi = match bar.psi(&p, mu) {
        Some(v) => v,
        None => return best,
    };
    let record = |p: &Point, best: &mut Outcome| {
        let v = s_k(&p.d, c, k);
        if v > best.value {
            best.value = v;
            best.d.clone_from(&p.d);
        }
    };
    loop {
        for _ in 0..opts.max_inner {
            let Some((step, grad)) = bar.newton_step(&p, mu) else { break };
            let decrement: f64 = -grad.iter().zip(&step).map(|(g, s)| g * s).sum::<f64>();
            if decrement < 1e-10 {
                break;
            }
            let mut lambda: f64 = 1.0;
            let r = bar.slack(&p);
            for i in 0..n {
                let dd = step[i];
                let ds = step[n + 1 + i];
                let dr = ds - step[n] + bar.c2[i] * dd;
                for (v, dv) in [(p.d[i], dd), (p.s[i], ds), (r[i], dr)] {
                    if dv < 0.0 {
                        lambda = lambda.min(-0.99 * v / dv);
                    }
                }
            }
            let mut accepted = false;
            for _ in 0..60 {
                let cand = Point {
                    d: (0..n).map(|i| p.d[i] + lambda * step[i]).collect(),
                    t: p.t + lambda * step[n],
                    s: (0..n).map(|i| p.s[i] + lambda * step[n + 1 + i]).collect(),
                };
                if let Some(v) = bar.psi(&cand, mu) {
                    if v <= psi - 1e-4 * lambda * decrement {
                        p = cand;
                        psi = v;
                        accepted = true;
                        break;
                    }
                }
                lambda *= 0.5;
            }
            if !accepted {
                break;
            }
            record(&p, &mut best);
            if stop == Stop::Threshold && best.value > gamma {
                return best;
            }
        }
        let gap = 4.0 * n as f64 * mu;
        if stop == Stop::Threshold && bar.lp_value(&p) + gap <= gamma {
            return best;
        }
        if mu <= mu_end * (1.0 + 1e-12) {
            break;
        }
        mu = (mu * opts.mu_factor).max(mu_end);
        psi = match bar.psi(&p, mu) {
            Some(v) => v,
            None => break,
        };
    }
    best
}

/// `E_d(k)` to solver accuracy, with the diagonal that attains it.
pub fn solve_e_d(inst: &Instance, k: usize, opts: &DiagOptions) -> Result<DiagCertificate> {
    if k > inst.n() {
        return Err(Error::InvalidInput(format!("k = {k} exceeds n = {}", inst.n())));
    }
    let (_, d0) = e_d_lower_start(inst, k, opts.shrink)?;
    let out = maximize(inst, k, &d0, opts, Stop::Full);
    Ok(DiagCertificate { k, d: out.d, value: out.value })
}

/// Lower bound `n - k_d` where `k_d` is the largest zero count with
/// `E_d(k) <= gamma`.
pub fn solve_diag_relaxation(inst: &Instance, opts: &DiagOptions) -> Result<DiagRelaxation> {
    let n = inst.n();
    let c = inst.c();
    let gamma = inst.gamma();
    let starts = start_certificates(inst, opts.shrink)?;
    let mut warm: Option<Vec<f64>> = None;
    let mut trace = Vec::new();
    let mut above_cert: Option<DiagCertificate> = None;
    let (mut lo, mut hi) = (0usize, n + 1);
    while hi - lo > 1 {
        let k = (lo + hi) / 2;
        let mut d0 = &starts[0];
        for cand in starts.iter().chain(warm.iter()) {
            if s_k(cand, c, k) > s_k(d0, c, k) {
                d0 = cand;
            }
        }
        let out = maximize(inst, k, d0, opts, Stop::Threshold);
        let above = out.value > gamma;
        trace.push(BisectionStep { k, value: out.value, above });
        if above {
            hi = k;
            above_cert = Some(DiagCertificate { k, d: out.d.clone(), value: out.value });
        } else {
            lo = k;
        }
        warm = Some(out.d);
    }
    let mut k_d = lo;
    let certificate = if k_d < n {
        let cert = above_cert.filter(|c| c.k == k_d + 1).expect("bisection evaluated k_d + 1");
        let exact = solve_diagonal(&cert.d, c, gamma)?;
        k_d = k_d.min(exact.max_zeros);
        Some(cert)
    } else {
        None
    };
    Ok(DiagRelaxation { lower_bound: n - k_d, k_d, certificate, trace })
}

/// Recomputes the bound a diagonal certifies: checks `0 < D < Q` and solves
/// the diagonal problem exactly.
pub fn verify_diag_certificate(inst: &Instance, d: &[f64]) -> Result<usize> {
    if d.len() != inst.n() {
        return Err(Error::Dimension("certificate has the wrong length".into()));
    }
    if !is_strictly_feasible(inst.q(), d) {
        return Err(Error::InvalidInput("certificate is not strictly inside 0 < D < Q".into()));
    }
    Ok(solve_diagonal(d, inst.c(), inst.gamma())?.min_card)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst() -> Instance {
        Instance::from_rows(
            &[
                vec![2.0, 0.6, 0.1, -0.3],
                vec![0.6, 1.5, 0.2, 0.0],
                vec![0.1, 0.2, 1.0, 0.4],
                vec![-0.3, 0.0, 0.4, 3.0],
            ],
            &[0.3, -0.4, 0.5, 0.2],
            0.5,
        )
        .unwrap()
    }

    #[test]
    fn start_certificates_are_feasible() {
        let i = inst();
        for d in start_certificates(&i, 1e-9).unwrap() {
            assert!(is_strictly_feasible(i.q(), &d));
        }
    }

    #[test]
    fn diagonal_q_is_attained() {
        let i = Instance::from_rows(
            &[vec![2.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 4.0]],
            &[0.3, 0.5, 0.1],
            1.0,
        )
        .unwrap();
        let r = solve_e_d(&i, 2, &DiagOptions::default()).unwrap();
        assert!((r.value - (0.04 + 0.18)).abs() < 1e-6);
    }

    #[test]
    fn solver_improves_on_start_and_stays_feasible() {
        let i = inst();
        for k in 1..=4 {
            let (start, _) = e_d_lower_start(&i, k, 1e-9).unwrap();
            let r = solve_e_d(&i, k, &DiagOptions::default()).unwrap();
            assert!(r.value >= start);
            assert!(is_strictly_feasible(i.q(), &r.d));
            assert!((s_k(&r.d, i.c(), k) - r.value).abs() < 1e-15);
        }
    }

    #[test]
    fn relaxation_certificate_verifies() {
        let i = inst();
        let r = solve_diag_relaxation(&i, &DiagOptions::default()).unwrap();
        if let Some(cert) = &r.certificate {
            assert_eq!(verify_diag_certificate(&i, &cert.d).unwrap(), r.lower_bound);
        } else {
            assert_eq!(r.lower_bound, 0);
        }
    }
}
