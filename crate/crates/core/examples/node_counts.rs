//! Branch-and-bound node counts with the continuous and the diagonal
//! relaxation on one ensemble.
//!
//! ```text
//! cargo run --release --example node_counts -- [n] [count] [seed]
//! ```

use sparse_ellipsoid::bench::{self, BenchItem, BenchOptions, Mode};
use sparse_ellipsoid::generate::{generate, instance_id, Class, EnsembleSpec};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().and_then(|s| s.parse().ok()).unwrap_or(30);
    let count: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let seed: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1);

    let spec = EnsembleSpec::new(Class::PowerlawInvSq, n, count, seed).with_kappa(n as f64);
    let items: Vec<BenchItem> = generate(&spec)
        .expect("valid spec")
        .into_iter()
        .enumerate()
        .map(|(i, instance)| BenchItem { id: instance_id(&spec, i), class: spec.class.name().into(), parameter: spec.kappa, instance })
        .collect();
    let opts = BenchOptions { mode: Mode::Bnb, ..Default::default() };
    println!("{:<28} {:>8} {:>8} {:>9} {:>9}", "instance", "BB-C", "BB-D", "BB-C s", "BB-D s");
    let mut records = Vec::new();
    for r in bench::run(&items, &opts) {
        match r {
            Ok(rec) => {
                println!(
                    "{:<28} {:>8} {:>8} {:>9.3} {:>9.3}",
                    rec.instance_id,
                    rec.nodes_bbc.unwrap_or(0),
                    rec.nodes_bbd.unwrap_or(0),
                    rec.time_bbc_s.unwrap_or(0.0),
                    rec.time_bbd_s.unwrap_or(0.0)
                );
                records.push(rec);
            }
            Err((id, e)) => eprintln!("{id}: {e}"),
        }
    }
    let s = bench::summarize(&records);
    println!(
        "{:<28} {:>8.1} {:>8.1} {:>9.3} {:>9.3}",
        "mean",
        s.nodes_bbc.unwrap_or(f64::NAN),
        s.nodes_bbd.unwrap_or(f64::NAN),
        s.time_bbc_s.unwrap_or(f64::NAN),
        s.time_bbd_s.unwrap_or(f64::NAN)
    );
}
