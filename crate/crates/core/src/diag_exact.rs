//! Exact solution when the ellipsoid matrix is diagonal.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::smallest_indices;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagSolution {
    pub max_zeros: usize,
    pub min_card: usize,
    /// Coordinates set to zero, ascending.
    pub zero_set: Vec<usize>,
    pub x: Vec<f64>,
}

/// Zeroes the coordinates with the smallest `d_n c_n^2` for as long as their
/// running sum stays within `gamma`. Ties go to the lower index.
pub fn solve_diagonal(d: &[f64], c: &[f64], gamma: f64) -> Result<DiagSolution> {
    if d.len() != c.len() {
        return Err(Error::Dimension(format!("{} weights for {} centers", d.len(), c.len())));
    }
    if let Some(i) = d.iter().position(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidInput(format!("diagonal entry {i} is not positive")));
    }
    let n = d.len();
    let products: Vec<f64> = d.iter().zip(c).map(|(a, b)| a * b * b).collect();
    let order = sorted_order(&products);
    let mut sum = 0.0;
    let mut k = 0;
    for &i in &order {
        if sum + products[i] > gamma {
            break;
        }
        sum += products[i];
        k += 1;
    }
    let zero_set = smallest_indices(&products, k);
    let mut x = c.to_vec();
    for &i in &zero_set {
        x[i] = 0.0;
    }
    Ok(DiagSolution { max_zeros: k, min_card: n - k, zero_set, x })
}

fn sorted_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example() {
        let s = solve_diagonal(&[1.0, 1.0, 1.0], &[0.5, 0.5, 2.0], 1.0).unwrap();
        assert_eq!(s.max_zeros, 2);
        assert_eq!(s.min_card, 1);
        assert_eq!(s.zero_set, vec![0, 1]);
        assert_eq!(s.x, vec![0.0, 0.0, 2.0]);
    }

    #[test]
    fn ties_go_to_lower_index() {
        let s = solve_diagonal(&[1.0; 3], &[0.8, 0.8, 0.8], 1.0).unwrap();
        assert_eq!(s.zero_set, vec![0]);
    }

    #[test]
    fn zero_center_zeroes_everything() {
        let s = solve_diagonal(&[2.0, 3.0], &[0.0, 0.0], 0.5).unwrap();
        assert_eq!(s.min_card, 0);
    }

    #[test]
    fn rejects_nonpositive_weights() {
        assert!(solve_diagonal(&[1.0, 0.0], &[1.0, 1.0], 1.0).is_err());
    }

    #[test]
    fn matches_enumeration() {
        let d = [0.7, 1.3, 2.0, 0.4, 1.1];
        let c = [0.5, -0.3, 0.6, 1.2, 0.1];
        let gamma = 0.9;
        let mut best = 0;
        for mask in 0u32..32 {
            let s: f64 = (0..5).filter(|i| mask >> i & 1 == 1).map(|i| d[i] * c[i] * c[i]).sum();
            if s <= gamma {
                best = best.max(mask.count_ones() as usize);
            }
        }
        assert_eq!(solve_diagonal(&d, &c, gamma).unwrap().max_zeros, best);
    }
}
