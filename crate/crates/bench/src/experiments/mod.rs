//! Experiment drivers. Each returns a [`Report`](crate::report::Report);
//! trials run in parallel with seeds derived from the master seed and the
//! trial index, so output does not depend on scheduling.

pub mod band;
pub mod eig;
pub mod extend;
pub mod slopes;
pub mod sparse;
pub mod verify;

use pertext::matrix::{dot, norm2};

use crate::report::Row;

/// `min_s |w - s u|_2` over `s = +-1`.
pub fn sign_aligned_distance(w: &[f64], u: &[f64]) -> f64 {
    let s = if dot(w, u) < 0.0 { -1.0 } else { 1.0 };
    let d: Vec<f64> = w.iter().zip(u).map(|(a, b)| a - s * b).collect();
    norm2(&d)
}

pub(crate) struct RowTemplate<'a> {
    pub experiment_id: &'a str,
    pub trial: usize,
    pub seed: u64,
}

impl RowTemplate<'_> {
    pub fn row(&self, method: &str, parameter: f64, nnz_fraction: f64, metric: &str, value: f64) -> Row {
        Row {
            experiment_id: self.experiment_id.to_string(),
            method: method.to_string(),
            parameter,
            nnz_fraction,
            metric: metric.to_string(),
            value,
            trial: self.trial,
            seed: self.seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_ignores_sign() {
        assert_eq!(sign_aligned_distance(&[1.0, 0.0], &[-1.0, 0.0]), 0.0);
        assert!((sign_aligned_distance(&[1.0, 0.0], &[0.0, 1.0]) - 2f64.sqrt()).abs() < 1e-15);
    }
}
