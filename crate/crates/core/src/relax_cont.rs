//! Continuous relaxation: the weighted l1 norm over the box that circumscribes
//! the ellipsoid, solved through its dual
//!
//! ```text
//! max  c^T mu - sqrt(gamma mu^T Q^{-1} mu)   s.t.  -1/B-_n <= mu_n <= 1/B+_n
//! ```
//!
//! with `B+-_n = sqrt(gamma (Q^{-1})_nn) +- c_n`. Any feasible `mu` gives a
//! valid lower bound, so the returned value is always safe to round up.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::linalg::dot;

/// Box sides of zero are replaced by this bound on `|mu_n|`.
pub const MU_CAP: f64 = 1e12;
/// Slack subtracted before rounding the dual value up to an integer.
pub const ROUND_SLACK: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Consecutive small improvements needed to stop.
    pub patience: usize,
}

impl Default for ContOptions {
    fn default() -> Self {
        ContOptions { tol: 1e-7, max_iter: 10_000, patience: 5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxConstants {
    pub b_plus: Vec<f64>,
    pub b_minus: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContRelaxation {
    pub mu: Vec<f64>,
    pub value: f64,
    pub lower_bound: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Dual objective after each accepted step, starting with the initial point.
    #[serde(skip)]
    pub trace: Vec<f64>,
}

pub fn box_constants(inst: &Instance) -> Result<BoxConstants> {
    let g = inst.gamma();
    let p = inst.q_inv();
    let mut b_plus = Vec::with_capacity(inst.n());
    let mut b_minus = Vec::with_capacity(inst.n());
    for (i, &c) in inst.c().iter().enumerate() {
        let r = (g * p[(i, i)]).sqrt();
        let (bp, bm) = (r + c, r - c);
        if bp < 0.0 || bm < 0.0 {
            return Err(Error::DegenerateBox { index: i });
        }
        b_plus.push(bp);
        b_minus.push(bm);
    }
    Ok(BoxConstants { b_plus, b_minus })
}

fn mu_bounds(b: &BoxConstants) -> (Vec<f64>, Vec<f64>) {
    let inv = |s: f64| if s > 1.0 / MU_CAP { 1.0 / s } else { MU_CAP };
    let lo = b.b_minus.iter().map(|&s| -inv(s)).collect();
    let hi = b.b_plus.iter().map(|&s| inv(s)).collect();
    (lo, hi)
}

/// `sum_n x+_n / B+_n + x-_n / B-_n`.
pub fn primal_objective(b: &BoxConstants, x: &[f64]) -> f64 {
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            if v > 0.0 {
                v / b.b_plus[i]
            } else if v < 0.0 {
                -v / b.b_minus[i]
            } else {
                0.0
            }
        })
        .sum()
}

pub fn dual_objective(inst: &Instance, mu: &[f64]) -> f64 {
    let pm = inst.q_inv().matvec(mu);
    dot(inst.c(), mu) - (inst.gamma() * dot(mu, &pm)).max(0.0).sqrt()
}

/// Gradient of the dual objective; undefined at `mu = 0`.
pub fn dual_gradient(inst: &Instance, mu: &[f64]) -> Vec<f64> {
    let pm = inst.q_inv().matvec(mu);
    let g = inst.gamma();
    let norm = (g * dot(mu, &pm)).sqrt();
    inst.c().iter().zip(&pm).map(|(c, p)| c - g * p / norm).collect()
}

pub fn lower_bound_from_value(value: f64) -> usize {
    let v = (value - ROUND_SLACK).ceil();
    if v > 0.0 {
        v as usize
    } else {
        0
    }
}

/// `theta N / 2` with `theta = 1 - sqrt(gamma / c^T Q c)`; the continuous
/// relaxation never exceeds it.
pub fn relaxation_cap(inst: &Instance) -> f64 {
    let e = inst.center_energy();
    if e <= inst.gamma() {
        return 0.0;
    }
    let theta = 1.0 - (inst.gamma() / e).sqrt();
    theta * inst.n() as f64 / 2.0
}

/// Projected gradient ascent with Barzilai-Borwein trial steps and Armijo
/// backtracking along the projection arc. Every iterate stays in the box.
pub fn solve_dual(inst: &Instance, opts: &ContOptions) -> Result<ContRelaxation> {
    let n = inst.n();
    let bx = box_constants(inst)?;
    let (lo, hi) = mu_bounds(&bx);
    let qc = inst.q().matvec(inst.c());
    if inst.center_energy() <= inst.gamma() || qc.iter().all(|&v| v == 0.0) {
        return Ok(ContRelaxation {
            mu: vec![0.0; n],
            value: 0.0,
            lower_bound: 0,
            iterations: 0,
            converged: true,
            trace: vec![0.0],
        });
    }
    let mut alpha = f64::INFINITY;
    for i in 0..n {
        if qc[i] > 0.0 {
            alpha = alpha.min(hi[i] / qc[i]);
        } else if qc[i] < 0.0 {
            alpha = alpha.min(lo[i] / qc[i]);
        }
    }
    let project = |v: &mut [f64]| {
        for i in 0..n {
            v[i] = v[i].clamp(lo[i], hi[i]);
        }
    };
    let mut mu: Vec<f64> = qc.iter().map(|v| v * alpha).collect();
    project(&mut mu);
    let mut f = dual_objective(inst, &mu);
    let mut g = dual_gradient(inst, &mu);
    let mut trace = vec![f];
    let mut step = 1.0;
    let mut small = 0;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        let mut trial: Vec<f64> = mu.iter().zip(&g).map(|(m, gi)| m + step * gi).collect();
        project(&mut trial);
        let d: Vec<f64> = trial.iter().zip(&mu).map(|(t, m)| t - m).collect();
        let slope = dot(&g, &d);
        if !(slope > 0.0) {
            converged = true;
            break;
        }
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let cand: Vec<f64> = mu.iter().zip(&d).map(|(m, di)| m + lambda * di).collect();
            let fc = dual_objective(inst, &cand);
            if fc >= f + 1e-4 * lambda * slope {
                accepted = Some((cand, fc));
                break;
            }
            lambda *= 0.5;
        }
        let Some((cand, fc)) = accepted else {
            converged = true;
            break;
        };
        let gc = dual_gradient(inst, &cand);
        let s: Vec<f64> = cand.iter().zip(&mu).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gc.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = -dot(&s, &y);
        step = if sy > 0.0 { (dot(&s, &s) / sy).clamp(1e-12, 1e12) } else { 1e12_f64.min(step * 10.0) };
        let improvement = (fc - f) / f.abs().max(1e-12);
        mu = cand;
        f = fc;
        g = gc;
        trace.push(f);
        if improvement < opts.tol {
            small += 1;
            if small >= opts.patience {
                converged = true;
                break;
            }
        } else {
            small = 0;
        }
    }
    Ok(ContRelaxation { lower_bound: lower_bound_from_value(f), mu, value: f, iterations, converged, trace })
}

/// Recomputes the bound implied by a dual point, checking it lies in the box.
pub fn verify_dual(inst: &Instance, mu: &[f64]) -> Result<usize> {
    if mu.len() != inst.n() {
        return Err(Error::Dimension("dual point has the wrong length".into()));
    }
    let (lo, hi) = mu_bounds(&box_constants(inst)?);
    for i in 0..mu.len() {
        if !(mu[i] >= lo[i] && mu[i] <= hi[i]) {
            return Err(Error::InvalidInput(format!("dual entry {i} leaves the box")));
        }
    }
    Ok(lower_bound_from_value(dual_objective(inst, mu)))
}
