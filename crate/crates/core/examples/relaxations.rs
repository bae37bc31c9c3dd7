//! Continuous and diagonal relaxations on the closed-form instances and on a
//! random one, with the bisection trace of the diagonal relaxation.
//!
//! ```text
//! cargo run --release --example relaxations -- [n]
//! ```

use sparse_ellipsoid::bnb::brute_force;
use sparse_ellipsoid::generate::{constructed, generate, Class, EnsembleSpec};
use sparse_ellipsoid::relax_cont::{relaxation_cap, solve_dual, ContOptions};
use sparse_ellipsoid::relax_diag::{solve_diag_relaxation, DiagOptions};
use sparse_ellipsoid::Instance;

fn report(name: &str, inst: &Instance) {
    let cont = solve_dual(inst, &ContOptions::default()).expect("continuous relaxation");
    let diag = solve_diag_relaxation(inst, &DiagOptions::default()).expect("diagonal relaxation");
    let opt = brute_force(inst).expect("small instance").min_card;
    println!(
        "{name:<18} optimum {opt:>3}  continuous {:>3} (value {:.3}, cap {:.3})  diagonal {:>3} (k_d {})",
        cont.lower_bound,
        cont.value,
        relaxation_cap(inst),
        diag.lower_bound,
        diag.k_d
    );
}

fn main() {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    report("best_case_cont", &constructed(Class::BestCaseCont, n).unwrap());
    report("worst_case_cont", &constructed(Class::WorstCaseCont, n).unwrap());

    let spec = EnsembleSpec::new(Class::PowerlawInvSq, n, 1, 7).with_kappa(n as f64);
    let inst = generate(&spec).unwrap().remove(0);
    report("powerlaw_inv_sq", &inst);

    let diag = solve_diag_relaxation(&inst, &DiagOptions::default()).unwrap();
    println!("bisection on powerlaw_inv_sq:");
    for step in &diag.trace {
        println!("  K = {:>3}  E_d >= {:.4}  rules out K zeros: {}", step.k, step.value, step.above);
    }
}
