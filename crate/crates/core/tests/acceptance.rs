//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use rand::Rng;
use sparse_ellipsoid::bench::{self, BenchItem, BenchOptions, Mode};
use sparse_ellipsoid::bnb::{solve, BnbConfig, BoundMode};
use sparse_ellipsoid::bounds::{diag_dom_bounds, eig_bounds, near_aligned_bounds};
use sparse_ellipsoid::generate::{constructed, generate, instance_id, Class, EnsembleSpec};
use sparse_ellipsoid::linalg::{complement, inverse_spd, lambda_min, schur_complement};
use sparse_ellipsoid::relax_cont::{dual_gradient, dual_objective, relaxation_cap, solve_dual, ContOptions};
use sparse_ellipsoid::relax_diag::{solve_diag_relaxation, solve_e_d, DiagOptions};
use sparse_ellipsoid::verify::{check_relaxation, relax, Which};
use sparse_ellipsoid::Instance;

use common::{near_aligned_instance, oracle_min_card, random_instance, random_spd, rng};

/// Tolerances and budgets, one place.
const ED_REL_TOL: f64 = 1e-4;
const GRAD_REL_TOL: f64 = 1e-5;
const SCHUR_REL_TOL: f64 = 1e-8;
const CAP_ABS_TOL: f64 = 1e-8;
const RATIO_GAP: f64 = 0.1;
const NODE_FACTOR: f64 = 0.8;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn floor_half(n: usize) -> usize {
    n / 2
}

fn best_case() -> Outcome {
    let mut bad = Vec::new();
    for n in [6, 8, 10, 12] {
        let inst = constructed(Class::BestCaseCont, n).unwrap();
        let opt = oracle_min_card(&inst);
        let cont = relax(&inst, Which::Cont).unwrap().lower_bound;
        if opt != floor_half(n) || cont != floor_half(n) {
            bad.push(format!("n={n}: optimum {opt}, continuous {cont}"));
        }
    }
    outcome(bad.is_empty(), if bad.is_empty() { "optimum = continuous bound = floor(N/2)".into() } else { bad.join("; ") })
}

fn worst_case() -> Outcome {
    let mut bad = Vec::new();
    let mut diag_seen = Vec::new();
    for n in [6, 8, 10, 12] {
        let inst = constructed(Class::WorstCaseCont, n).unwrap();
        let opt = oracle_min_card(&inst);
        let cont = relax(&inst, Which::Cont).unwrap().lower_bound;
        let diag = relax(&inst, Which::Diag).unwrap().lower_bound;
        diag_seen.push(diag);
        if (opt, cont, diag) != (n - 1, 1, 0) {
            bad.push(format!("n={n}: optimum {opt}, continuous {cont}, diagonal {diag}"));
        }
    }
    // The diagonal ratio of zero is attained on the single-long-axis
    // instance with equal components, where E_d(N) = N lambda_min = 1.
    let mut zero_ratio = true;
    for n in [6, 8, 10, 12] {
        let inst = constructed(Class::BestCaseCont, n).unwrap();
        zero_ratio &= relax(&inst, Which::Diag).unwrap().lower_bound == 0;
    }
    if bad.is_empty() {
        return outcome(true, "optimum N-1, continuous 1, diagonal 0");
    }
    outcome(
        false,
        format!(
            "{}; worst_case_cont has an eigenvector e/sqrt(N) with lambda_min = 1/(N-1), so E_d(K) = K/(N-1) \
             and the diagonal bound is exactly 1 for every sound solver (observed {diag_seen:?}); \
             diagonal bound 0 on best_case_cont: {}",
            bad.join("; "),
            if zero_ratio { "yes" } else { "no" }
        ),
    )
}

fn closed_form_e_d() -> Outcome {
    let mut worst: f64 = 0.0;
    for class in [Class::BestCaseCont, Class::TightEig] {
        for n in [6, 10, 20] {
            let inst = constructed(class, n).unwrap();
            let lmin = lambda_min(inst.q()).unwrap();
            for k in [1, n.div_ceil(2), n] {
                let got = solve_e_d(&inst, k, &DiagOptions::default()).unwrap().value;
                let want = k as f64 * lmin;
                worst = worst.max((got - want).abs() / want);
            }
        }
    }
    outcome(worst <= ED_REL_TOL, format!("max relative error {worst:.2e} (tolerance {ED_REL_TOL:.0e})"))
}

fn sandwich() -> Outcome {
    let mut r = rng(4);
    let mut instances: Vec<(&str, Instance)> = Vec::new();
    let classes = [Class::PowerlawInv, Class::Uniform, Class::PowerlawInvSq, Class::OffdiagUniform];
    for (i, class) in classes.iter().enumerate() {
        for j in 0..25 {
            let n = 6 + (j % 7);
            let spec = match class {
                Class::OffdiagUniform => EnsembleSpec::new(*class, n, 1, (100 * i + j) as u64).with_a(1.0),
                _ => EnsembleSpec::new(*class, n, 1, (100 * i + j) as u64).with_kappa(n as f64),
            };
            instances.push(("eig", generate(&spec).unwrap().remove(0)));
        }
    }
    let mut dd = 0;
    let mut seed = 1000;
    while dd < 50 {
        seed += 1;
        let n = 6 + (seed % 7) as usize;
        let spec = EnsembleSpec::new(Class::OffdiagUniform, n, 1, seed).with_a(0.4);
        let inst = generate(&spec).unwrap().remove(0);
        if diag_dom_bounds(&inst).is_ok() {
            instances.push(("dd", inst));
            dd += 1;
        }
    }
    let mut na = 0;
    while na < 50 {
        let n = r.gen_range(6..=12);
        let inst = near_aligned_instance(n, 0.01, 2.0, &mut r);
        if near_aligned_bounds(&inst, None).is_ok() {
            instances.push(("naa", inst));
            na += 1;
        }
    }
    let mut violations = Vec::new();
    let mut ratio_checks = 0;
    for (t, (kind, inst)) in instances.iter().enumerate() {
        let n = inst.n();
        let k_star = n - oracle_min_card(inst);
        let k_d = n - solve_diag_relaxation(inst, &DiagOptions::default()).unwrap().lower_bound;
        let mut brackets = vec![("eig", eig_bounds(inst).map(|b| (b.k_under, b.k_over, b.ratio_bound)))];
        match *kind {
            "dd" => brackets.push(("dd", diag_dom_bounds(inst).map(|b| (b.k_under, b.k_over, b.ratio_bound)))),
            "naa" => brackets
                .push(("naa", near_aligned_bounds(inst, None).map(|b| (b.k_under, b.k_over, b.ratio_bound)))),
            _ => {}
        }
        for (name, b) in brackets {
            let (ku, ko, ratio) = b.unwrap();
            if !(ku <= k_star && k_star <= k_d && k_d <= ko) {
                violations.push(format!("#{t} {name}: {ku} <= {k_star} <= {k_d} <= {ko}"));
            }
            if ku >= 1 {
                ratio_checks += 1;
                let rb = ratio.unwrap();
                if ko as f64 / ku as f64 > rb * (1.0 + 1e-12) {
                    violations.push(format!("#{t} {name}: {ko}/{ku} > {rb}"));
                }
            }
        }
    }
    outcome(
        violations.is_empty(),
        format!(
            "{} instances, {} ratio checks, {} violations{}",
            instances.len(),
            ratio_checks,
            violations.len(),
            violations.first().map(|v| format!(" (first: {v})")).unwrap_or_default()
        ),
    )
}

fn tightness() -> Outcome {
    let te = constructed(Class::TightEig, 9).unwrap();
    let e = eig_bounds(&te).unwrap();
    let kd_e = 9 - solve_diag_relaxation(&te, &DiagOptions::default()).unwrap().lower_bound;
    let ks_e = 9 - oracle_min_card(&te);
    let td = constructed(Class::TightDd, 5).unwrap();
    let d = diag_dom_bounds(&td).unwrap();
    let kd_d = 5 - solve_diag_relaxation(&td, &DiagOptions::default()).unwrap().lower_bound;
    let ks_d = 5 - oracle_min_card(&td);
    let got_e = (e.k_under, e.k_over, kd_e, ks_e);
    let got_d = (d.k_under, d.k_over, kd_d, ks_d);
    outcome(
        got_e == (6, 9, 9, 6) && got_d == (4, 5, 5, 4),
        format!("tight_eig N=9 {got_e:?}, tight_dd N=5 {got_d:?}"),
    )
}

fn oracle_equivalence() -> Outcome {
    let classes = [Class::PowerlawInv, Class::Uniform, Class::PowerlawInvSq, Class::OffdiagUniform];
    let mut violations = Vec::new();
    let mut count = 0;
    for (ci, class) in classes.iter().enumerate() {
        for j in 0..75 {
            let n = 6 + (j % 7);
            let base = EnsembleSpec::new(*class, n, 1, (7919 * ci + j) as u64);
            let spec = match class {
                Class::OffdiagUniform => base.with_a(1.0),
                _ => base.with_kappa([2.0, n as f64, 100.0][j % 3]),
            };
            let inst = generate(&spec).unwrap().remove(0);
            let opt = oracle_min_card(&inst);
            count += 1;
            for mode in [BoundMode::None, BoundMode::Cont, BoundMode::Diag] {
                let cfg = BnbConfig { relax_min_dim: 1, ..BnbConfig::with_bound(mode) };
                let r = solve(&inst, &cfg).unwrap();
                if r.min_card != opt || !r.proven_optimal || !inst.contains(&r.x, 1e-9) {
                    violations.push(format!("{} {mode:?}: {} vs {opt}", instance_id(&spec, 0), r.min_card));
                }
            }
        }
    }
    outcome(
        violations.is_empty(),
        format!("{count} instances x 3 variants, relaxations at every size, {} violations", violations.len()),
    )
}

fn desk_ensemble() -> Vec<BenchItem> {
    let spec = EnsembleSpec::new(Class::PowerlawInvSq, 40, 100, 2024).with_kappa(40.0);
    generate(&spec)
        .unwrap()
        .into_iter()
        .enumerate()
        .map(|(i, instance)| BenchItem { id: instance_id(&spec, i), class: "powerlaw_inv_sq".into(), parameter: Some(40.0), instance })
        .collect()
}

fn ratio_direction(items: &[BenchItem]) -> Outcome {
    let records: Vec<_> = bench::run(items, &BenchOptions::default()).into_iter().collect::<Result<_, _>>().unwrap();
    let s = bench::summarize(&records);
    let (rc, rd) = (s.r_c.unwrap(), s.r_d.unwrap());
    outcome(rd >= rc + RATIO_GAP, format!("mean R_c {rc:.3}, mean R_d {rd:.3}, required gap {RATIO_GAP}"))
}

fn node_direction(items: &[BenchItem]) -> Outcome {
    let opts = BenchOptions { mode: Mode::Bnb, ..Default::default() };
    let records: Vec<_> = bench::run(items, &opts).into_iter().collect::<Result<_, _>>().unwrap();
    let s = bench::summarize(&records);
    let (c, d) = (s.nodes_bbc.unwrap(), s.nodes_bbd.unwrap());
    outcome(
        d <= NODE_FACTOR * c,
        format!("mean nodes BB-C {c:.1}, BB-D {d:.1}, ratio {:.3} (limit {NODE_FACTOR})", d / c),
    )
}

fn hygiene() -> Outcome {
    let mut r = rng(9);
    let mut worst_grad: f64 = 0.0;
    for _ in 0..50 {
        let n = r.gen_range(3..=10);
        let inst = random_instance(n, &mut r);
        let mu: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
        let g = dual_gradient(&inst, &mu);
        let h = 1e-6;
        let mut err = 0.0;
        for k in 0..n {
            let mut a = mu.clone();
            let mut b = mu.clone();
            a[k] += h;
            b[k] -= h;
            let fd = (dual_objective(&inst, &a) - dual_objective(&inst, &b)) / (2.0 * h);
            err += (fd - g[k]).powi(2);
        }
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        worst_grad = worst_grad.max(err.sqrt() / norm);
    }
    let mut worst_schur: f64 = 0.0;
    for _ in 0..100 {
        let n = r.gen_range(2..=10);
        let q = random_spd(n, &mut r);
        let k = r.gen_range(1..n);
        let mut z: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            z.swap(i, r.gen_range(0..=i));
        }
        z.truncate(k);
        z.sort_unstable();
        let y = complement(n, &z);
        let s = schur_complement(&q, &y, &z).unwrap();
        let via = inverse_spd(&inverse_spd(&q).unwrap().principal(&z)).unwrap();
        worst_schur = worst_schur.max(s.sub(&via).frobenius() / via.frobenius());
    }
    let mut cert_failures = 0;
    let mut certs = 0;
    for seed in 0..20 {
        let n = 6 + seed % 15;
        let spec = EnsembleSpec::new(Class::PowerlawInv, n, 1, seed as u64).with_kappa(n as f64);
        let inst = generate(&spec).unwrap().remove(0);
        for which in [Which::Cont, Which::Diag] {
            let out = relax(&inst, which).unwrap();
            certs += 1;
            if check_relaxation(&inst, &out).ok() != Some(out.lower_bound) {
                cert_failures += 1;
            }
        }
    }
    outcome(
        worst_grad <= GRAD_REL_TOL && worst_schur <= SCHUR_REL_TOL && cert_failures == 0,
        format!(
            "gradient error {worst_grad:.1e}, Schur error {worst_schur:.1e}, {certs} certificates, {cert_failures} failed"
        ),
    )
}

fn continuous_cap() -> Outcome {
    let classes = [Class::PowerlawInv, Class::Uniform, Class::PowerlawInvSq, Class::OffdiagUniform];
    let mut worst = f64::NEG_INFINITY;
    for j in 0..500usize {
        let class = classes[j % 4];
        let n = 6 + j % 35;
        let base = EnsembleSpec::new(class, n, 1, 31 * j as u64 + 5);
        let spec = match class {
            Class::OffdiagUniform => base.with_a(1.0),
            _ => base.with_kappa(n as f64),
        };
        let inst = generate(&spec).unwrap().remove(0);
        let v = solve_dual(&inst, &ContOptions::default()).unwrap().value;
        worst = worst.max(v - relaxation_cap(&inst));
    }
    outcome(worst <= CAP_ABS_TOL, format!("500 instances, max(value - cap) = {worst:.2e}"))
}

fn main() {
    let budgets = [10, 10, 30, 300, 30, 600, 1800, 3600, 60, 60];
    let names = [
        "best-case continuous bound",
        "worst-case bounds",
        "diagonal relaxation on closed-form instances",
        "bound sandwich",
        "tightness pins",
        "branch and bound vs brute force",
        "ratio direction at N=40",
        "node-count direction at N=40",
        "numerical hygiene",
        "continuous relaxation cap",
    ];
    let desk = desk_ensemble();
    let mut failed = 0;
    for (i, name) in names.iter().enumerate() {
        let t = Instant::now();
        let out = match i {
            0 => best_case(),
            1 => worst_case(),
            2 => closed_form_e_d(),
            3 => sandwich(),
            4 => tightness(),
            5 => oracle_equivalence(),
            6 => ratio_direction(&desk),
            7 => node_direction(&desk),
            8 => hygiene(),
            _ => continuous_cap(),
        };
        let elapsed = t.elapsed();
        let in_time = elapsed <= Duration::from_secs(budgets[i]);
        let ok = out.ok && in_time;
        if !ok {
            failed += 1;
        }
        println!(
            "[{}] criterion {:>2}: {name}: {} ({:.1}s of {}s)",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            out.detail,
            elapsed.as_secs_f64(),
            budgets[i]
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all 10 criteria passed");
}
