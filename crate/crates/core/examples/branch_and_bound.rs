//! Exact solution by branch and bound under each bound mode, checked against
//! brute force.
//!
//! ```text
//! cargo run --release --example branch_and_bound -- [n] [seed]
//! ```

use sparse_ellipsoid::bnb::{backward_greedy, brute_force, solve, BnbConfig, BoundMode, BRUTE_FORCE_MAX_N};
use sparse_ellipsoid::generate::{generate, Class, EnsembleSpec};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().and_then(|s| s.parse().ok()).unwrap_or(16);
    let seed: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(3);

    let spec = EnsembleSpec::new(Class::PowerlawInvSq, n, 1, seed).with_kappa(n as f64);
    let inst = generate(&spec).expect("valid spec").remove(0);

    let greedy = backward_greedy(&inst).unwrap();
    println!("greedy cost {}", greedy.min_card);
    for (name, mode) in [("none", BoundMode::None), ("cont", BoundMode::Cont), ("diag", BoundMode::Diag)] {
        let mut cfg = BnbConfig::with_bound(mode);
        cfg.relax_min_dim = 1;
        let r = solve(&inst, &cfg).unwrap();
        println!(
            "bound {name:<4}: optimum {} nodes {:>6} relaxations {:>5} proven {} ({:.3}s)",
            r.min_card, r.nodes_explored, r.relaxations_solved, r.proven_optimal, r.elapsed_s
        );
    }
    if n <= BRUTE_FORCE_MAX_N {
        let b = brute_force(&inst).unwrap();
        println!("brute force optimum {} with zero set {:?}", b.min_card, b.zero_set);
    }
}
