//! Mean ratio of each relaxation's bound to the greedy cost over an ensemble.
//!
//! ```text
//! cargo run --release --example approximation_ratios -- [n] [count] [seed]
//! ```

use sparse_ellipsoid::bench::{self, BenchItem, BenchOptions};
use sparse_ellipsoid::generate::{generate, instance_id, Class, EnsembleSpec};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().and_then(|s| s.parse().ok()).unwrap_or(20);
    let count: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let seed: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1);

    println!("{:<18} {:>8} {:>8} {:>8}", "class", "mean R_c", "mean R_d", "time s");
    for class in [Class::PowerlawInv, Class::Uniform, Class::PowerlawInvSq] {
        let spec = EnsembleSpec::new(class, n, count, seed).with_kappa(n as f64);
        let items: Vec<BenchItem> = generate(&spec)
            .expect("valid spec")
            .into_iter()
            .enumerate()
            .map(|(i, instance)| BenchItem {
                id: instance_id(&spec, i),
                class: class.name().into(),
                parameter: spec.kappa,
                instance,
            })
            .collect();
        let t = std::time::Instant::now();
        let records: Vec<_> = bench::run(&items, &BenchOptions::default()).into_iter().filter_map(Result::ok).collect();
        let s = bench::summarize(&records);
        println!(
            "{:<18} {:>8.3} {:>8.3} {:>8.1}",
            class.name(),
            s.r_c.unwrap_or(f64::NAN),
            s.r_d.unwrap_or(f64::NAN),
            t.elapsed().as_secs_f64()
        );
    }
}
