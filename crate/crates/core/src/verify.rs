//! Certified relaxation output and the small-instance consistency battery.

use serde::{Deserialize, Serialize};

use crate::bnb::{backward_greedy, brute_force, solve, BnbConfig, BoundMode};
use crate::bounds::{diag_dom_bounds, eig_bounds, near_aligned_bounds, BOUND_SLACK};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::linalg::lambda_min;
use crate::relax_cont::{solve_dual, verify_dual, ContOptions};
use crate::relax_diag::{solve_diag_relaxation, verify_diag_certificate, DiagOptions};

/// Largest dimension the battery accepts; it brute-forces every instance.
pub const VERIFY_MAX_N: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Cont,
    Diag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Certificate {
    /// Nothing left to bound after preprocessing.
    Trivial,
    Cont { mu: Vec<f64>, value: f64 },
    Diag { k: usize, d: Vec<f64>, value: f64 },
}

/// Relaxation bound on the original instance: the coordinates forced
/// nonzero by preprocessing plus the bound on what remains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxOutput {
    pub which: Which,
    pub n: usize,
    pub forced: Vec<usize>,
    pub lower_bound: usize,
    pub certificate: Certificate,
}

pub fn relax(inst: &Instance, which: Which) -> Result<RelaxOutput> {
    let sub = inst.preprocess()?;
    let base = sub.base_cost();
    let (bound, certificate) = match (&sub.instance, which) {
        (None, _) => (0, Certificate::Trivial),
        (Some(r), Which::Cont) => {
            let out = solve_dual(r, &ContOptions::default())?;
            (out.lower_bound, Certificate::Cont { mu: out.mu, value: out.value })
        }
        (Some(r), Which::Diag) => {
            let out = solve_diag_relaxation(r, &DiagOptions::default())?;
            match out.certificate {
                Some(c) => (out.lower_bound, Certificate::Diag { k: c.k, d: c.d, value: c.value }),
                None => (0, Certificate::Trivial),
            }
        }
    };
    Ok(RelaxOutput { which, n: inst.n(), forced: sub.nonzero, lower_bound: base + bound, certificate })
}

/// Re-derives the bound from the certificate alone.
pub fn check_relaxation(inst: &Instance, out: &RelaxOutput) -> Result<usize> {
    let sub = inst.preprocess()?;
    if sub.nonzero != out.forced {
        return Err(Error::InvalidInput("forced coordinates do not match preprocessing".into()));
    }
    let base = sub.base_cost();
    let bound = match (&sub.instance, &out.certificate) {
        (_, Certificate::Trivial) => 0,
        (Some(r), Certificate::Cont { mu, .. }) => verify_dual(r, mu)?,
        (Some(r), Certificate::Diag { d, .. }) => verify_diag_certificate(r, d)?,
        (None, _) => return Err(Error::InvalidInput("certificate for an empty reduction".into())),
    };
    Ok(base + bound)
}

/// Deliberate defects for exercising the battery itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Reports branch and bound optima one too high.
    BnbOffByOne,
    /// Reports the eigenvalue upper count one too low.
    KOverShort,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct BatteryReport {
    pub instances: usize,
    pub checks: usize,
    pub violations: Vec<String>,
}

impl BatteryReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.violations.push(msg());
        }
    }
}

/// Largest `K` with `lambda_min(Q)` times the `K` smallest `c_n^2` within `gamma`.
fn direct_k_over(inst: &Instance) -> Result<usize> {
    let lmin = lambda_min(inst.q())?;
    let mut c2: Vec<f64> = inst.c().iter().map(|v| v * v).collect();
    c2.sort_by(f64::total_cmp);
    let mut sum = 0.0;
    let mut k = 0;
    for v in c2 {
        sum += v;
        if lmin * sum > inst.gamma() * (1.0 + BOUND_SLACK) {
            break;
        }
        k += 1;
    }
    Ok(k)
}

/// Cross-checks every solver and bound against brute force.
pub fn run_battery(instances: &[Instance], fault: Option<Fault>) -> Result<BatteryReport> {
    let mut rep = BatteryReport { instances: instances.len(), ..Default::default() };
    for (t, inst) in instances.iter().enumerate() {
        if inst.n() > VERIFY_MAX_N {
            return Err(Error::DimensionTooLarge { n: inst.n(), max: VERIFY_MAX_N });
        }
        let n = inst.n();
        let opt = brute_force(inst)?.min_card;
        let k_star = n - opt;
        let greedy = backward_greedy(inst)?;
        rep.check(greedy.min_card >= opt && inst.contains(&greedy.x, 1e-9), || {
            format!("instance {t}: greedy cost {} below optimum {opt} or infeasible", greedy.min_card)
        });
        for mode in [BoundMode::None, BoundMode::Cont, BoundMode::Diag] {
            let cfg = BnbConfig { relax_min_dim: 1, ..BnbConfig::with_bound(mode) };
            let r = solve(inst, &cfg)?;
            let got = r.min_card + usize::from(fault == Some(Fault::BnbOffByOne));
            rep.check(got == opt && r.proven_optimal, || {
                format!("instance {t}: branch and bound ({mode:?}) found {got}, optimum {opt}")
            });
            rep.check(inst.contains(&r.x, 1e-9), || format!("instance {t}: {mode:?} point infeasible"));
        }
        for which in [Which::Cont, Which::Diag] {
            let out = relax(inst, which)?;
            rep.check(out.lower_bound <= opt, || {
                format!("instance {t}: {which:?} bound {} exceeds optimum {opt}", out.lower_bound)
            });
            let rechecked = check_relaxation(inst, &out);
            rep.check(rechecked.as_ref().ok() == Some(&out.lower_bound), || {
                format!("instance {t}: {which:?} certificate gives {rechecked:?}, reported {}", out.lower_bound)
            });
        }
        let k_d = n - relax(inst, Which::Diag)?.lower_bound;
        let eig = eig_bounds(inst)?;
        let k_over = eig.k_over - usize::from(fault == Some(Fault::KOverShort) && eig.k_over > 0);
        rep.check(eig.k_under <= k_star && k_star <= k_d && k_d <= k_over, || {
            format!("instance {t}: eigenvalue bracket {} <= {k_star} <= {k_d} <= {k_over} fails", eig.k_under)
        });
        let expect_over = direct_k_over(inst)?;
        rep.check(k_over == expect_over, || format!("instance {t}: k_over {k_over}, direct count {expect_over}"));
        if let Ok(dd) = diag_dom_bounds(inst) {
            rep.check(dd.k_under <= k_star && k_d <= dd.k_over, || {
                format!("instance {t}: dominance bracket {} <= {k_star}, {k_d} <= {} fails", dd.k_under, dd.k_over)
            });
        }
        if let Ok(na) = near_aligned_bounds(inst, None) {
            rep.check(na.k_under <= k_star && k_d <= na.k_over, || {
                format!("instance {t}: alignment bracket {} <= {k_star}, {k_d} <= {} fails", na.k_under, na.k_over)
            });
        }
    }
    Ok(rep)
}
