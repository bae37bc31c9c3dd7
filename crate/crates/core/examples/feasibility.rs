//! Zero-set feasibility, single-zero margins and variable elimination on a
//! small instance.
//!
//! ```text
//! cargo run --example feasibility
//! ```

use sparse_ellipsoid::Instance;

fn main() {
    let inst = Instance::from_rows(
        &[vec![2.0, 0.4, 0.0, 0.1], vec![0.4, 1.0, 0.2, 0.0], vec![0.0, 0.2, 1.5, -0.3], vec![0.1, 0.0, -0.3, 1.0]],
        &[1.1, 0.3, -0.2, 0.9],
        1.0,
    )
    .expect("valid instance");

    let report = inst.margin_report();
    println!("single-zero margins: {:?}", report.margins.iter().map(|m| format!("{m:.3}")).collect::<Vec<_>>());
    println!("forced nonzero: {:?}", report.forced);

    for z in [vec![1], vec![1, 2], vec![1, 2, 3], vec![0, 1, 2]] {
        let e = inst.zero_set_energy(&z);
        print!("zero set {z:?}: energy {e:.4}");
        if inst.zero_set_feasible(&z) {
            let x = inst.completion(&z).expect("feasible");
            println!(", completion {:?}", x.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>());
        } else {
            println!(", infeasible");
        }
    }

    let sub = inst.preprocess().expect("preprocess");
    println!(
        "after forcing: nonzero {:?}, free {:?}, gamma_eff {:.4}",
        sub.nonzero, sub.free, sub.gamma_eff
    );
}
