#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparse_ellipsoid::generate::random_orthogonal;
use sparse_ellipsoid::linalg::{complement, qr, schur_complement, Matrix};
use sparse_ellipsoid::Instance;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `c_Z^T (Q / Q_YY) c_Z` through an explicit Schur complement.
pub fn schur_energy(inst: &Instance, z: &[usize]) -> f64 {
    if z.is_empty() {
        return 0.0;
    }
    let y = complement(inst.n(), z);
    let s = schur_complement(inst.q(), &y, z).unwrap();
    let cz: Vec<f64> = z.iter().map(|&i| inst.c()[i]).collect();
    s.quad_form(&cz)
}

/// Largest feasible zero count by enumerating every subset, optionally
/// forcing some coordinates to zero and keeping others out of the zero set.
pub fn oracle_max_zeros(inst: &Instance, must_zero: &[usize], never_zero: &[usize]) -> Option<usize> {
    let n = inst.n();
    assert!(n <= 16);
    let must: u32 = must_zero.iter().map(|&i| 1u32 << i).sum();
    let never: u32 = never_zero.iter().map(|&i| 1u32 << i).sum();
    let mut best = None;
    for mask in 0u32..(1 << n) {
        if mask & must != must || mask & never != 0 {
            continue;
        }
        let k = mask.count_ones() as usize;
        if best.is_some_and(|b| b >= k) {
            continue;
        }
        let z: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        if schur_energy(inst, &z) <= inst.gamma() {
            best = Some(k);
        }
    }
    best
}

pub fn oracle_min_card(inst: &Instance) -> usize {
    inst.n() - oracle_max_zeros(inst, &[], &[]).expect("empty zero set is feasible")
}

/// Center uniform on the open single-zero box so every single zero is feasible.
pub fn center_for<R: Rng>(q: &Matrix, rng: &mut R) -> Vec<f64> {
    let p = sparse_ellipsoid::linalg::inverse_spd(q).unwrap();
    (0..q.rows()).map(|i| p[(i, i)].sqrt() * rng.gen_range(-0.999..0.999)).collect()
}

pub fn random_spd<R: Rng>(n: usize, rng: &mut R) -> Matrix {
    let v = random_orthogonal(n, rng);
    let lam: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..5.0)).collect();
    v.matmul(&Matrix::from_diag(&lam)).matmul(&v.transpose()).symmetrized()
}

pub fn random_instance<R: Rng>(n: usize, rng: &mut R) -> Instance {
    let q = random_spd(n, rng);
    let c = center_for(&q, rng);
    Instance::new(q, c, 1.0).unwrap()
}

/// Eigenvectors a small rotation away from the coordinate axes.
pub fn near_aligned_instance<R: Rng>(n: usize, tilt: f64, kappa: f64, rng: &mut R) -> Instance {
    let mut a = Matrix::identity(n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] += tilt * rng.gen_range(-1.0..1.0);
        }
    }
    let v = qr(&a).0;
    let mut lam: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..kappa)).collect();
    lam[0] = 1.0;
    lam[n - 1] = kappa;
    let q = v.matmul(&Matrix::from_diag(&lam)).matmul(&v.transpose()).symmetrized();
    let c = center_for(&q, rng);
    Instance::new(q, c, 1.0).unwrap()
}
