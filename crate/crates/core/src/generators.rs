//! Seeded synthetic instances: band kernels, prescribed spectra, random PSD
//! matrices and clustered point clouds.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::angles::orthonormalize;
use crate::data::Dataset;
use crate::eigen::spectral_norm;
use crate::error::{Error, Result};
use crate::matrix::{ColBlock, SparseSymmetric, SymmetricDense};
use crate::rng::{rng_from_seed, Rng};

fn gaussian(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Band-concentrated kernel: unit diagonal, and `X^(|i-j| / decay)` off the
/// diagonal with one `X ~ U(0, 1)` drawn per symmetric pair. Entries below
/// `cutoff` are dropped.
pub fn gen_band_matrix(n: usize, decay: f64, cutoff: f64, seed: u64) -> Result<SparseSymmetric> {
    if n < 2 || decay <= 0.0 || !decay.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "band matrix needs n >= 2 and a positive decay, got n = {n}, decay = {decay}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut t = Vec::new();
    for i in 0..n {
        t.push((i, i, 1.0));
        for j in (i + 1)..n {
            let x: f64 = rng.random();
            let v = x.powf((j - i) as f64 / decay);
            if v >= cutoff && v > 0.0 {
                t.push((i, j, v));
            }
        }
    }
    Ok(SparseSymmetric::from_sorted_upper(n, t))
}

/// Symmetrized i.i.d. Gaussian matrix scaled to unit spectral norm.
pub fn gen_unit_random_symmetric(n: usize, seed: u64) -> Result<SymmetricDense> {
    let mut rng = rng_from_seed(seed);
    let a = SymmetricDense::from_upper_fn(n, |i, j| {
        let g = gaussian(&mut rng);
        if i == j { g } else { g / std::f64::consts::SQRT_2 }
    })?;
    let s = spectral_norm(&a)?;
    Ok(a.scaled(1.0 / s))
}

/// Random orthogonal `n x n` matrix (Gram-Schmidt on a Gaussian matrix).
pub fn random_orthogonal(n: usize, rng: &mut Rng) -> Result<ColBlock> {
    let g = ColBlock::from_col_major(n, n, (0..n * n).map(|_| gaussian(rng)).collect())?;
    orthonormalize(&g)
}

/// `Q diag(values) Q^T` for a random orthogonal `Q`.
pub fn gen_with_spectrum(values: &[f64], seed: u64) -> Result<SymmetricDense> {
    let n = values.len();
    let mut rng = rng_from_seed(seed);
    let q = random_orthogonal(n, &mut rng)?;
    let mut out = SymmetricDense::zeros(n);
    for (j, &lam) in values.iter().enumerate() {
        if lam != 0.0 {
            out.add_outer(lam, q.col(j));
        }
    }
    out.mirror_upper();
    Ok(out)
}

/// `m` leading eigenvalues spread over `leading_range` (one jittered draw per
/// stratum, so they stay well separated) and `n - m` eigenvalues equal to `tail_value`.
pub fn gen_rank_m_spectrum(
    n: usize,
    m: usize,
    leading_range: (f64, f64),
    tail_value: f64,
    seed: u64,
) -> Result<SymmetricDense> {
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!("need 1 <= m <= n, got m = {m}, n = {n}")));
    }
    let (lo, hi) = leading_range;
    let mut rng = rng_from_seed(seed ^ 0xA5A5_A5A5);
    let mut values: Vec<f64> = (0..m)
        .map(|j| lo + (hi - lo) * (j as f64 + 0.25 + 0.5 * rng.random::<f64>()) / m as f64)
        .collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values.resize(n, tail_value);
    gen_with_spectrum(&values, seed)
}

/// `G G^T / (2n)` with `G` an `n x 2n` standard Gaussian matrix.
pub fn gen_random_psd(n: usize, seed: u64) -> Result<SymmetricDense> {
    let mut rng = rng_from_seed(seed);
    let cols = 2 * n;
    let g: Vec<f64> = (0..n * cols).map(|_| gaussian(&mut rng)).collect();
    let scale = 1.0 / cols as f64;
    SymmetricDense::from_upper_fn(n, |i, j| {
        let (a, b) = (&g[i * cols..(i + 1) * cols], &g[j * cols..(j + 1) * cols]);
        scale * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
    })
}

/// Slowly decaying spectrum `1, 1/2, ..., 1/n` in a random basis.
pub fn gen_slow_decay(n: usize, seed: u64) -> Result<SymmetricDense> {
    let values: Vec<f64> = (1..=n).map(|i| 1.0 / i as f64).collect();
    gen_with_spectrum(&values, seed)
}

/// Gaussian mixture: `clusters` centers drawn as `N(0, separation^2 I)`,
/// each point its center plus `N(0, spread^2 I)` noise.
pub fn gen_clustered_dataset(
    n: usize,
    d: usize,
    clusters: usize,
    separation: f64,
    spread: f64,
    seed: u64,
) -> Result<Dataset> {
    if n == 0 || d == 0 || clusters == 0 {
        return Err(Error::InvalidArgument("empty clustered dataset requested".into()));
    }
    let mut rng = rng_from_seed(seed);
    let centers: Vec<Vec<f64>> = (0..clusters)
        .map(|_| (0..d).map(|_| separation * gaussian(&mut rng)).collect())
        .collect();
    let rows = (0..n)
        .map(|_| {
            let c = &centers[rng.random_range(0..clusters)];
            c.iter().map(|x| x + spread * gaussian(&mut rng)).collect()
        })
        .collect();
    Dataset::new(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::sym_eig_full;
    use crate::matrix::{SymOperator, SymmetricMatrix};

    #[test]
    fn band_matrix_shape() {
        let a = gen_band_matrix(200, 0.1, 1e-10, 3).unwrap();
        for i in 0..200 {
            assert_eq!(a.get(i, i), 1.0);
        }
        assert!(a.triplets().iter().all(|t| t.2 >= 1e-10 && t.2 <= 1.0));
        assert!(a.bandwidth() < 200);
        assert_eq!(a, gen_band_matrix(200, 0.1, 1e-10, 3).unwrap());
        assert_ne!(a, gen_band_matrix(200, 0.1, 1e-10, 4).unwrap());
    }

    #[test]
    fn band_matrix_entries_decay_with_distance() {
        let a = gen_band_matrix(300, 0.1, 1e-10, 5).unwrap();
        let near = a.triplets().iter().filter(|t| t.1 - t.0 == 1).count();
        let far = a.triplets().iter().filter(|t| t.1 - t.0 == 100).count();
        assert!(near > 10 * far.max(1));
    }

    #[test]
    fn unit_random_has_unit_norm() {
        let a = gen_unit_random_symmetric(60, 1).unwrap();
        let e = sym_eig_full(&a).unwrap();
        let s = e.values[0].abs().max(e.values[59].abs());
        assert!((s - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn rank_m_spectrum_is_recovered() {
        let a = gen_rank_m_spectrum(200, 10, (1.0, 2.0), 0.3, 2).unwrap();
        let e = sym_eig_full(&a).unwrap();
        assert!(e.values[..10].iter().all(|v| (1.0..=2.0).contains(v)));
        assert!(e.values[10..].iter().all(|v| (v - 0.3).abs() <= 1e-10));
        let r = gen_rank_m_spectrum(50, 5, (1.0, 2.0), 0.0, 2).unwrap();
        let e = sym_eig_full(&r).unwrap();
        assert!(e.values[5..].iter().all(|v| v.abs() <= 1e-12));
    }

    #[test]
    fn leading_values_are_separated() {
        let a = gen_rank_m_spectrum(40, 10, (1.0, 2.0), 0.0, 9).unwrap();
        let e = sym_eig_full(&a).unwrap();
        assert!(e.values[..10].windows(2).all(|w| w[0] - w[1] >= 0.05 - 1e-12));
    }

    #[test]
    fn random_psd_is_psd() {
        let a = gen_random_psd(40, 3).unwrap();
        assert!(sym_eig_full(&a).unwrap().values[39] > 0.0);
        assert_eq!(a, gen_random_psd(40, 3).unwrap());
    }

    #[test]
    fn slow_decay_trace() {
        let a = gen_slow_decay(30, 1).unwrap();
        let h: f64 = (1..=30).map(|i| 1.0 / i as f64).sum();
        assert!((a.trace() - h).abs() < 1e-12);
        assert!((a.frobenius_norm().powi(2) - (1..=30).map(|i| 1.0 / (i * i) as f64).sum::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn clustered_dataset_is_deterministic() {
        let a = gen_clustered_dataset(50, 4, 3, 3.0, 1.0, 8).unwrap();
        assert_eq!(a.n(), 50);
        assert_eq!(a.d(), 4);
        assert_eq!(a, gen_clustered_dataset(50, 4, 3, 3.0, 1.0, 8).unwrap());
    }
}
