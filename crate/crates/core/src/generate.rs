//! Reproducible instance ensembles.
//!
//! Random classes draw `Q = V diag(lambda) V^T` with `V` Haar-distributed
//! (QR of a Gaussian matrix, signs fixed so `R` has a positive diagonal), or
//! a unit-diagonal matrix with uniform off-diagonal entries. Centers are
//! uniform on `(-sqrt((Q^{-1})_nn), sqrt((Q^{-1})_nn))` so that every single
//! zero is feasible. All randomness comes from one ChaCha20 stream seeded
//! from the ensemble seed.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::linalg::{cholesky, qr, Matrix};

/// Identifies the generator and seeding scheme in manifests.
pub const RNG_ID: &str = "chacha20-seed_from_u64";
pub const REJECTION_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Class {
    /// Eigenvalue density proportional to `1/lambda` on `[1, kappa]`.
    PowerlawInv,
    Uniform,
    /// Eigenvalue density proportional to `1/lambda^2` on `[1, kappa]`.
    PowerlawInvSq,
    /// Unit diagonal, off-diagonals uniform on `[-a, a] / sqrt(n)`.
    OffdiagUniform,
    /// Continuous relaxation exact, diagonal relaxation gives zero.
    BestCaseCont,
    /// Continuous relaxation gives one, optimum is `n - 1`.
    WorstCaseCont,
    /// Eigenvalue bounds are attained.
    TightEig,
    /// Diagonal-dominance bounds are attained.
    TightDd,
}

impl Class {
    pub const ALL: [Class; 8] = [
        Class::PowerlawInv,
        Class::Uniform,
        Class::PowerlawInvSq,
        Class::OffdiagUniform,
        Class::BestCaseCont,
        Class::WorstCaseCont,
        Class::TightEig,
        Class::TightDd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Class::PowerlawInv => "powerlaw_inv",
            Class::Uniform => "uniform",
            Class::PowerlawInvSq => "powerlaw_inv_sq",
            Class::OffdiagUniform => "offdiag_uniform",
            Class::BestCaseCont => "best_case_cont",
            Class::WorstCaseCont => "worst_case_cont",
            Class::TightEig => "tight_eig",
            Class::TightDd => "tight_dd",
        }
    }

    pub fn is_random(self) -> bool {
        matches!(self, Class::PowerlawInv | Class::Uniform | Class::PowerlawInvSq | Class::OffdiagUniform)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub class: Class,
    pub n: usize,
    pub count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(class: Class, n: usize, count: usize, seed: u64) -> Self {
        EnsembleSpec { class, n, count, kappa: None, a: None, seed }
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = Some(kappa);
        self
    }

    pub fn with_a(mut self, a: f64) -> Self {
        self.a = Some(a);
        self
    }

    /// The class parameter reported in tables.
    pub fn parameter(&self) -> Option<f64> {
        match self.class {
            Class::OffdiagUniform => self.a,
            _ => self.kappa,
        }
    }

    fn validate(&self) -> Result<()> {
        let min_n = match self.class {
            Class::TightEig => 5,
            _ => 2,
        };
        if self.n < min_n {
            return Err(Error::InvalidInput(format!(
                "{} needs n >= {min_n}, got {}",
                self.class.name(),
                self.n
            )));
        }
        match self.class {
            Class::PowerlawInv | Class::Uniform | Class::PowerlawInvSq => match self.kappa {
                Some(k) if k >= 1.0 && k.is_finite() => Ok(()),
                _ => Err(Error::InvalidInput(format!("{} needs kappa >= 1", self.class.name()))),
            },
            Class::OffdiagUniform => match self.a {
                Some(a) if a >= 0.0 && a.is_finite() => Ok(()),
                _ => Err(Error::InvalidInput("offdiag_uniform needs a >= 0".into())),
            },
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub spec: EnsembleSpec,
    pub rng: String,
    /// Eigenvalue support convention for the power-law classes.
    pub support: String,
    pub files: Vec<String>,
}

/// Haar-distributed orthogonal matrix.
pub fn random_orthogonal<R: Rng>(n: usize, rng: &mut R) -> Matrix {
    let data = (0..n * n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let g = Matrix::from_row_major(n, n, data).expect("square");
    qr(&g).0
}

/// Eigenvalues on `[1, kappa]` whose smallest and largest draws are pinned
/// to exactly `1` and `kappa`.
pub fn sample_spectrum<R: Rng>(class: Class, n: usize, kappa: f64, rng: &mut R) -> Vec<f64> {
    let mut lam: Vec<f64> = (0..n)
        .map(|_| {
            let u: f64 = rng.gen();
            match class {
                Class::PowerlawInv => (u * kappa.ln()).exp(),
                Class::PowerlawInvSq => kappa / (kappa - u * (kappa - 1.0)),
                _ => 1.0 + u * (kappa - 1.0),
            }
        })
        .collect();
    if n >= 2 {
        let lo = (0..n).min_by(|&a, &b| lam[a].total_cmp(&lam[b])).expect("nonempty");
        let hi = (0..n).filter(|&i| i != lo).max_by(|&a, &b| lam[a].total_cmp(&lam[b])).expect("n >= 2");
        lam[lo] = 1.0;
        lam[hi] = kappa;
    }
    lam
}

fn random_center<R: Rng>(q: &Matrix, rng: &mut R) -> Result<Vec<f64>> {
    let p = cholesky(q)?.inverse();
    Ok((0..q.rows())
        .map(|i| {
            let r = p[(i, i)].sqrt();
            loop {
                let v = rng.gen_range(-r..r);
                if v > -r {
                    break v;
                }
            }
        })
        .collect())
}

fn offdiag_matrix<R: Rng>(n: usize, a: f64, rng: &mut R) -> Result<Matrix> {
    let scale = a / (n as f64).sqrt();
    for _ in 0..REJECTION_ATTEMPTS {
        let mut q = Matrix::identity(n);
        for i in 0..n {
            for j in (i + 1)..n {
                let v = if scale > 0.0 { rng.gen_range(-scale..=scale) } else { 0.0 };
                q[(i, j)] = v;
                q[(j, i)] = v;
            }
        }
        if cholesky(&q).is_ok() {
            return Ok(q);
        }
    }
    Err(Error::RejectionLimit { attempts: REJECTION_ATTEMPTS })
}

/// `lambda2 I - (lambda2 - lambda1) v v^T` with `c = e`, `gamma = 1`.
fn rank_one_instance(v: &[f64], lambda1: f64, lambda2: f64) -> Result<Instance> {
    let n = v.len();
    let mut q = Matrix::identity(n).scale(lambda2);
    for i in 0..n {
        for j in 0..n {
            q[(i, j)] -= (lambda2 - lambda1) * v[i] * v[j];
        }
    }
    Instance::new(q, vec![1.0; n], 1.0)
}

/// `+1/sqrt(n)` on the first `ceil(n/2)` entries, `-1/sqrt(n)` on the rest.
fn split_vector(n: usize) -> Vec<f64> {
    let s = 1.0 / (n as f64).sqrt();
    (0..n).map(|i| if i < n.div_ceil(2) { s } else { -s }).collect()
}

pub fn constructed(class: Class, n: usize) -> Result<Instance> {
    let nf = n as f64;
    match class {
        Class::BestCaseCont => rank_one_instance(&split_vector(n), 1.0 / nf, nf),
        Class::WorstCaseCont => {
            let v = vec![1.0 / nf.sqrt(); n];
            rank_one_instance(&v, 1.0 / (nf - 1.0), (nf - 1.0) / 2.0)
        }
        Class::TightEig => {
            let denom = 2 * n.div_ceil(2) - (nf.sqrt().floor() as usize) - 1;
            rank_one_instance(&split_vector(n), 1.0 / nf, 1.0 / denom as f64)
        }
        Class::TightDd => {
            let lambda2 = 1.0 / nf + 1.0 / ((nf - 1.0) * (2.0 * nf - 3.0));
            rank_one_instance(&split_vector(n), 1.0 / nf, lambda2)
        }
        _ => Err(Error::InvalidInput(format!("{} is a random class", class.name()))),
    }
}

pub fn generate(spec: &EnsembleSpec) -> Result<Vec<Instance>> {
    spec.validate()?;
    if !spec.class.is_random() {
        let inst = constructed(spec.class, spec.n)?;
        return Ok(vec![inst; spec.count]);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let n = spec.n;
    (0..spec.count)
        .map(|_| {
            let q = match spec.class {
                Class::OffdiagUniform => offdiag_matrix(n, spec.a.unwrap_or(0.0), &mut rng)?,
                class => {
                    let kappa = spec.kappa.unwrap_or(1.0);
                    let v = random_orthogonal(n, &mut rng);
                    let lam = sample_spectrum(class, n, kappa, &mut rng);
                    v.matmul(&Matrix::from_diag(&lam)).matmul(&v.transpose()).symmetrized()
                }
            };
            let c = random_center(&q, &mut rng)?;
            Instance::new(q, c, 1.0)
        })
        .collect()
}

pub fn instance_id(spec: &EnsembleSpec, index: usize) -> String {
    format!("{}_n{}_{:04}", spec.class.name(), spec.n, index)
}

/// Writes every instance and a `manifest.json` into `dir`.
pub fn write_ensemble(spec: &EnsembleSpec, dir: &Path) -> Result<Manifest> {
    let instances = generate(spec)?;
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::with_capacity(instances.len());
    for (i, inst) in instances.iter().enumerate() {
        let name = format!("{}.json", instance_id(spec, i));
        inst.save(&dir.join(&name))?;
        files.push(name);
    }
    let manifest = Manifest {
        spec: spec.clone(),
        rng: RNG_ID.to_string(),
        support: "[1, kappa] with the extreme draws pinned to 1 and kappa".to_string(),
        files,
    };
    std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

/// Loads the instances listed in a manifest, resolving paths against its directory.
pub fn read_ensemble(manifest_path: &Path) -> Result<(Manifest, Vec<Instance>)> {
    let manifest: Manifest = serde_json::from_str(&std::fs::read_to_string(manifest_path)?)?;
    let dir: PathBuf = manifest_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let instances = manifest.files.iter().map(|f| Instance::load(&dir.join(f))).collect::<Result<_>>()?;
    Ok((manifest, instances))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigenvalues;

    #[test]
    fn same_seed_same_instances() {
        let spec = EnsembleSpec::new(Class::PowerlawInv, 6, 3, 42).with_kappa(10.0);
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.q(), y.q());
            assert_eq!(x.c(), y.c());
        }
        let other = generate(&EnsembleSpec { seed: 43, ..spec }).unwrap();
        assert_ne!(a[0].c(), other[0].c());
    }

    #[test]
    fn condition_number_is_pinned() {
        for class in [Class::PowerlawInv, Class::Uniform, Class::PowerlawInvSq] {
            let spec = EnsembleSpec::new(class, 8, 2, 7).with_kappa(25.0);
            for inst in generate(&spec).unwrap() {
                let ev = eigenvalues(inst.q()).unwrap();
                assert!((ev[0] - 1.0).abs() < 1e-8);
                assert!((ev[7] - 25.0).abs() < 1e-8 * 25.0);
            }
        }
    }

    #[test]
    fn single_zeros_are_feasible() {
        let spec = EnsembleSpec::new(Class::OffdiagUniform, 10, 5, 3).with_a(1.0);
        for inst in generate(&spec).unwrap() {
            assert!(inst.single_zero_margins().iter().all(|&m| m > 0.0));
            assert!(inst.q().diag().iter().all(|&d| d == 1.0));
        }
    }

    #[test]
    fn haar_matrix_is_orthogonal() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let v = random_orthogonal(7, &mut rng);
        assert!(v.transpose().matmul(&v).max_abs_diff(&Matrix::identity(7)) < 1e-12);
    }

    #[test]
    fn constructed_instances_keep_single_zeros_feasible() {
        for class in [Class::BestCaseCont, Class::WorstCaseCont, Class::TightEig, Class::TightDd] {
            for n in [5, 6, 9, 12] {
                let inst = constructed(class, n).unwrap();
                assert!(inst.single_zero_margins().iter().all(|&m| m >= 0.0), "{class:?} n={n}");
            }
        }
        assert!(generate(&EnsembleSpec::new(Class::TightEig, 4, 1, 0)).is_err());
    }

    #[test]
    fn rejection_limit_is_reported() {
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        assert_eq!(
            offdiag_matrix(30, 50.0, &mut rng).unwrap_err(),
            Error::RejectionLimit { attempts: REJECTION_ATTEMPTS }
        );
    }

    #[test]
    fn manifest_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let spec = EnsembleSpec::new(Class::Uniform, 5, 2, 9).with_kappa(5.0);
        let m = write_ensemble(&spec, dir.path()).unwrap();
        let (back, insts) = read_ensemble(&dir.path().join("manifest.json")).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.rng, RNG_ID);
        assert_eq!(insts.len(), 2);
        let fresh = generate(&spec).unwrap();
        assert!(insts[1].q().max_abs_diff(fresh[1].q()) < 1e-15);
    }
}
