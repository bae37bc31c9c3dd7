//! Problem instances and the feasibility algebra of zero sets.
//!
//! An instance asks for the sparsest `x` with `(x - c)^T Q (x - c) <= gamma`.
//! Fixing a set `Z` of coordinates to zero is feasible exactly when
//! `c_Z^T (Q / Q_YY) c_Z <= gamma`, where `Y` is the complement of `Z`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky, complement, dot, Cholesky, Matrix};

#[derive(Debug, Clone)]
pub struct Instance {
    q: Matrix,
    c: Vec<f64>,
    gamma: f64,
    q_inv: Matrix,
}

/// On-disk form: `{"n": 3, "q": [[...]], "c": [...], "gamma": 1.0}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    pub n: usize,
    pub q: Vec<Vec<f64>>,
    pub c: Vec<f64>,
    pub gamma: f64,
}

impl Instance {
    /// Symmetrizes `q` and rejects non-PD matrices, non-positive `gamma`
    /// and non-finite data.
    pub fn new(q: Matrix, c: Vec<f64>, gamma: f64) -> Result<Self> {
        if !q.is_square() || q.rows() != c.len() {
            return Err(Error::Dimension(format!(
                "q is {}x{} but c has {} entries",
                q.rows(),
                q.cols(),
                c.len()
            )));
        }
        if c.is_empty() {
            return Err(Error::InvalidInput("empty instance".into()));
        }
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidInput(format!("gamma must be positive, got {gamma}")));
        }
        if q.as_slice().iter().chain(&c).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite entry".into()));
        }
        let q = q.symmetrized();
        let q_inv = cholesky(&q)?.inverse();
        Ok(Instance { q, c, gamma, q_inv })
    }

    pub fn from_rows(q: &[Vec<f64>], c: &[f64], gamma: f64) -> Result<Self> {
        Self::new(Matrix::from_rows(q)?, c.to_vec(), gamma)
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn q(&self) -> &Matrix {
        &self.q
    }

    pub fn q_inv(&self) -> &Matrix {
        &self.q_inv
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile { n: self.n(), q: self.q.to_rows(), c: self.c.clone(), gamma: self.gamma }
    }

    pub fn from_file(f: &InstanceFile) -> Result<Self> {
        if f.q.len() != f.n || f.c.len() != f.n {
            return Err(Error::Dimension(format!("declared n = {} does not match data", f.n)));
        }
        Self::new(Matrix::from_rows(&f.q)?, f.c.clone(), f.gamma)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("instance serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_file(&serde_json::from_str(s)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    /// `(x - c)^T Q (x - c)`.
    pub fn ellipsoid_value(&self, x: &[f64]) -> f64 {
        let d: Vec<f64> = x.iter().zip(&self.c).map(|(a, b)| a - b).collect();
        self.q.quad_form(&d)
    }

    pub fn contains(&self, x: &[f64], rel_tol: f64) -> bool {
        self.ellipsoid_value(x) <= self.gamma * (1.0 + rel_tol)
    }

    /// `c^T Q c`, the value of the all-zero point.
    pub fn center_energy(&self) -> f64 {
        self.q.quad_form(&self.c)
    }

    /// Smallest value of the ellipsoid form over points with `x_Z = 0`,
    /// i.e. `c_Z^T (Q / Q_YY) c_Z`.
    pub fn zero_set_energy(&self, z: &[usize]) -> f64 {
        if z.is_empty() {
            return 0.0;
        }
        let p = self.q_inv.principal(z);
        let cz: Vec<f64> = z.iter().map(|&i| self.c[i]).collect();
        match cholesky(&p) {
            Ok(ch) => dot(&cz, &ch.solve(&cz)),
            Err(_) => f64::INFINITY,
        }
    }

    pub fn zero_set_feasible(&self, z: &[usize]) -> bool {
        self.zero_set_energy(z) <= self.gamma
    }

    /// `gamma - c_n^2 / (Q^{-1})_nn` for every coordinate.
    pub fn single_zero_margins(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.gamma - self.c[i] * self.c[i] / self.q_inv[(i, i)]).collect()
    }

    pub fn margin_report(&self) -> MarginReport {
        let margins = self.single_zero_margins();
        let forced = margins.iter().enumerate().filter(|(_, &m)| m < 0.0).map(|(i, _)| i).collect();
        MarginReport { margins, forced }
    }

    /// The point of the ellipsoid closest to `c` in the `Q` norm among those
    /// with `x_Z = 0`: `x_Y = c_Y + Q_YY^{-1} Q_YZ c_Z`.
    pub fn completion(&self, z: &[usize]) -> Result<Vec<f64>> {
        let n = self.n();
        let y = complement(n, z);
        let mut x = vec![0.0; n];
        if y.is_empty() {
            return Ok(x);
        }
        let shift = self.center_shift(&y, z)?;
        for (k, &i) in y.iter().enumerate() {
            x[i] = self.c[i] + shift[k];
        }
        Ok(x)
    }

    fn center_shift(&self, y: &[usize], z: &[usize]) -> Result<Vec<f64>> {
        if z.is_empty() {
            return Ok(vec![0.0; y.len()]);
        }
        let qyz = self.q.submatrix(y, z);
        let cz: Vec<f64> = z.iter().map(|&i| self.c[i]).collect();
        Ok(cholesky(&self.q.principal(y))?.solve(&qyz.matvec(&cz)))
    }

    /// Instance over the free coordinates after fixing `z` to zero and
    /// projecting out the coordinates in `u`, which are known to be nonzero.
    pub fn reduce(&self, z: &[usize], u: &[usize]) -> Result<Subproblem> {
        let n = self.n();
        let mut in_z = vec![false; n];
        let mut in_u = vec![false; n];
        for &i in z {
            in_z[i] = true;
        }
        for &i in u {
            if in_z[i] {
                return Err(Error::InvalidInput(format!("index {i} is both zero and nonzero")));
            }
            in_u[i] = true;
        }
        let gamma_eff = self.gamma - self.zero_set_energy(z);
        if !(gamma_eff > 0.0) {
            return Err(Error::Infeasible { gamma_eff });
        }
        let y: Vec<usize> = (0..n).filter(|&i| !in_z[i]).collect();
        let free: Vec<usize> = (0..n).filter(|&i| !in_z[i] && !in_u[i]).collect();
        let mut zero: Vec<usize> = z.to_vec();
        zero.sort_unstable();
        let mut nonzero: Vec<usize> = u.to_vec();
        nonzero.sort_unstable();
        if free.is_empty() {
            return Ok(Subproblem { instance: None, free, zero, nonzero, gamma_eff });
        }
        let shift = self.center_shift(&y, z)?;
        let mut pos = vec![usize::MAX; n];
        for (k, &i) in y.iter().enumerate() {
            pos[i] = k;
        }
        let c_eff: Vec<f64> = free.iter().map(|&i| self.c[i] + shift[pos[i]]).collect();
        let q_eff = if nonzero.is_empty() {
            self.q.principal(&free)
        } else {
            crate::linalg::schur_complement(&self.q, &nonzero, &free)?
        };
        let instance = Instance::new(q_eff, c_eff, gamma_eff)?;
        Ok(Subproblem { instance: Some(instance), free, zero, nonzero, gamma_eff })
    }

    /// Forces every coordinate whose single-zero margin is negative into the
    /// nonzero set, repeating on the reduced instance until none remain.
    pub fn preprocess(&self) -> Result<Subproblem> {
        let mut u: Vec<usize> = Vec::new();
        loop {
            let sub = self.reduce(&[], &u)?;
            let forced = match &sub.instance {
                Some(inst) => inst.margin_report().forced,
                None => Vec::new(),
            };
            if forced.is_empty() {
                return Ok(sub);
            }
            u.extend(forced.iter().map(|&k| sub.free[k]));
            u.sort_unstable();
        }
    }

    pub fn cholesky(&self) -> Cholesky {
        cholesky(&self.q).expect("instance matrix is positive definite")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginReport {
    pub margins: Vec<f64>,
    pub forced: Vec<usize>,
}

/// A node of the search: coordinates fixed to zero, coordinates known to be
/// nonzero, and the reduced instance on the rest.
#[derive(Debug, Clone)]
pub struct Subproblem {
    /// `None` when every coordinate is fixed.
    pub instance: Option<Instance>,
    /// Original indices of the reduced coordinates, ascending.
    pub free: Vec<usize>,
    pub zero: Vec<usize>,
    pub nonzero: Vec<usize>,
    pub gamma_eff: f64,
}

impl Subproblem {
    pub fn base_cost(&self) -> usize {
        self.nonzero.len()
    }

    pub fn free_dim(&self) -> usize {
        self.free.len()
    }

    /// Maps reduced indices back to original ones.
    pub fn lift_indices(&self, local: &[usize]) -> Vec<usize> {
        let mut v: Vec<usize> = local.iter().map(|&k| self.free[k]).collect();
        v.sort_unstable();
        v
    }
}
