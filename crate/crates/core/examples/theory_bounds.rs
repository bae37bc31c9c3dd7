//! Cardinality bounds that need no optimization: eigenvalue, diagonally
//! dominant, near-aligned and probabilistic.
//!
//! ```text
//! cargo run --example theory_bounds
//! ```

use sparse_ellipsoid::bnb::brute_force;
use sparse_ellipsoid::bounds::{diag_dom_bounds, eig_bounds, near_aligned_bounds, prob_bound};
use sparse_ellipsoid::generate::{constructed, generate, Class, EnsembleSpec};
use sparse_ellipsoid::linalg::{qr, Matrix};
use sparse_ellipsoid::Instance;

/// `diag(1, ..., n)` rotated by an orthogonal matrix close to the identity.
fn tilted_instance(n: usize, tilt: f64) -> Instance {
    let mut a = Matrix::identity(n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] += tilt * ((i * 7 + j * 3) % 5) as f64 / 4.0;
        }
    }
    let v = qr(&a).0;
    let lam: Vec<f64> = (1..=n).map(|k| k as f64).collect();
    let q = v.matmul(&Matrix::from_diag(&lam)).matmul(&v.transpose()).symmetrized();
    let c: Vec<f64> = (0..n).map(|i| 0.9 / (i as f64 + 1.0).sqrt() * if i % 2 == 0 { 1.0 } else { -0.7 }).collect();
    Instance::new(q, c, 1.0).unwrap()
}

fn main() {
    let tight = constructed(Class::TightEig, 9).unwrap();
    let b = eig_bounds(&tight).unwrap();
    println!("tight_eig N=9: max zeros in [{}, {}], ratio bound {:?}", b.k_under, b.k_over, b.ratio_bound);

    let dd = constructed(Class::TightDd, 5).unwrap();
    let b = diag_dom_bounds(&dd).unwrap();
    println!("tight_dd N=5: max zeros in [{}, {}], row sum {:.4}", b.k_under, b.k_over, b.row_sum);

    let spec = EnsembleSpec::new(Class::OffdiagUniform, 10, 1, 11).with_a(0.02);
    let inst = generate(&spec).unwrap().remove(0);
    let opt = brute_force(&inst).unwrap();
    let k_star = inst.n() - opt.min_card;
    println!("offdiag_uniform a=0.02 N=10: exact max zeros {k_star}");
    match diag_dom_bounds(&inst) {
        Ok(b) => println!("  diagonally dominant: [{}, {}]", b.k_under, b.k_over),
        Err(e) => println!("  diagonally dominant: {e}"),
    }
    let e = eig_bounds(&inst).unwrap();
    println!("  eigenvalue: [{}, {}]", e.k_under, e.k_over);

    let tilted = tilted_instance(8, 0.01);
    let k_star = tilted.n() - brute_force(&tilted).unwrap().min_card;
    let b = near_aligned_bounds(&tilted, None).unwrap();
    println!(
        "diag(1..8) tilted by 0.01: exact max zeros {k_star}, near-aligned [{}, {}], rho {:.4}",
        b.k_under, b.k_over, b.rho
    );

    let spread = generate(&EnsembleSpec::new(Class::Uniform, 10, 1, 11).with_kappa(10.0)).unwrap().remove(0);
    println!("uniform kappa=10 N=10, random eigenvectors:");
    for eps in [0.05, 0.5, 5.0] {
        let p = prob_bound(&spread, eps).unwrap();
        println!(
            "  epsilon {eps}: probability >= {:.4} ({:?}), ratio bound {:?}",
            p.probability, p.regime, p.ratio_bound
        );
    }
}
