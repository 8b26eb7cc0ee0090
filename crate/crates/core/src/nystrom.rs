//! The Nyström method and its generalized, shifted and ensemble variants.
//!
//! All variants sample columns of `K`; the leading-block forms use the first
//! `l` columns, so random sampling is done by permuting `K` beforehand or by
//! passing explicit column sets (see [`sample_columns`]).

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::eigen::{spectral_norm, sym_eig_partial};
use crate::error::{Error, Result};
use crate::extension::block::{check_weights, weighted_sum};
use crate::extension::{low_rank, pert_extend, ExtensionConfig, Selector};
use crate::matrix::{dot, norm2, ColBlock, Shifted, SymOperator, SymmetricDense, SymmetricMatrix};
use crate::perturbation::{MuPolicy, Order};
use crate::rng::rng_from_seed;
use crate::tolerance::NYSTROM_PIVOT;

#[derive(Debug, Clone, PartialEq)]
pub struct NystromResult {
    /// Approximate eigenvalues of `K`, shift restored.
    pub values: Vec<f64>,
    /// Approximate eigenvectors of `K`, `n x k`.
    pub vectors: ColBlock,
    pub shift: f64,
    /// The sampled columns.
    pub columns: Vec<usize>,
    /// Structural nonzeros of `K` inside the sampled principal block.
    pub block_nnz: usize,
}

/// How a Nyström approximation is formed.
#[derive(Debug, Clone, PartialEq)]
pub struct NystromConfig {
    /// Number of eigenpairs.
    pub k: usize,
    /// Number of sampled columns, `l >= k`.
    pub l: usize,
    pub shift: f64,
}

impl NystromConfig {
    pub fn standard(k: usize) -> Self {
        Self { k, l: k, shift: 0.0 }
    }
}

/// Nyström on the columns `cols` of `K - shift * I`, keeping `pairs`
/// eigenpairs of the sampled block; eigenvalues are shifted back.
pub fn nystrom_on_columns<M: SymmetricMatrix>(
    k: &M,
    cols: &[usize],
    pairs: usize,
    shift: f64,
) -> Result<NystromResult> {
    let n = k.dim();
    let l = cols.len();
    if l == 0 || l > n {
        return Err(Error::InvalidArgument(format!("{l} sampled columns of a {n}x{n} matrix")));
    }
    if pairs == 0 || pairs > l {
        return Err(Error::InvalidArgument(format!("{pairs} eigenpairs from {l} columns")));
    }
    if !shift.is_finite() {
        return Err(Error::InvalidArgument(format!("shift must be finite, got {shift}")));
    }
    let mut seen = vec![false; n];
    for &c in cols {
        if c >= n || std::mem::replace(&mut seen[c], true) {
            return Err(Error::InvalidArgument(format!("column {c} out of range or repeated")));
        }
    }

    let w = k.principal_submatrix(cols);
    let block_nnz = w.nnz();
    let inner = sym_eig_partial(&Shifted { inner: &w, shift }, pairs)?;
    let pivot = NYSTROM_PIVOT * k.frobenius_norm();
    if let Some(i) = inner.values.iter().position(|v| v.abs() < pivot) {
        return Err(Error::SingularDenominator { index: i, value: inner.values[i] });
    }

    let op = Shifted { inner: k, shift };
    let scale = (l as f64 / n as f64).sqrt();
    let columns: Vec<Vec<f64>> = (0..pairs)
        .into_par_iter()
        .map(|i| {
            let mut x = vec![0.0; n];
            for (&c, &u) in cols.iter().zip(inner.vector(i)) {
                x[c] = u;
            }
            let f = scale / inner.values[i];
            op.apply_vec(&x).into_iter().map(|v| v * f).collect()
        })
        .collect();
    let ratio = n as f64 / l as f64;
    Ok(NystromResult {
        values: inner.values.iter().map(|v| ratio * v + shift).collect(),
        vectors: ColBlock::from_columns(n, &columns)?,
        shift,
        columns: cols.to_vec(),
        block_nnz,
    })
}

fn leading(l: usize) -> Vec<usize> {
    (0..l).collect()
}

/// Standard Nyström from the first `k` columns.
pub fn nystrom_extend<M: SymmetricMatrix>(k: &M, kk: usize) -> Result<NystromResult> {
    nystrom_on_columns(k, &leading(kk), kk, 0.0)
}

/// `k` eigenpairs from the first `l >= k` columns.
pub fn generalized_nystrom<M: SymmetricMatrix>(k: &M, kk: usize, l: usize) -> Result<NystromResult> {
    if l < kk {
        return Err(Error::InvalidArgument(format!("l = {l} below k = {kk}")));
    }
    nystrom_on_columns(k, &leading(l), kk, 0.0)
}

/// Nyström of `K - mu I` from the first `k` columns, eigenvalues shifted back by `mu`.
pub fn shifted_nystrom<M: SymmetricMatrix>(k: &M, kk: usize, mu: f64) -> Result<NystromResult> {
    nystrom_on_columns(k, &leading(kk), kk, mu)
}

/// Shift estimate `max(0, (trace K - sum_j lambda_j) / (n - k))` with the
/// leading eigenvalues of `K` replaced by their standard Nyström estimates
/// from the columns `cols`, so nothing beyond the sampled columns and the
/// diagonal is needed.
pub fn nystrom_shift_estimate<M: SymmetricMatrix>(k: &M, cols: &[usize]) -> Result<f64> {
    let n = k.dim();
    let kk = cols.len();
    if kk >= n {
        return Ok(0.0);
    }
    let w = k.principal_submatrix(cols);
    let inner = sym_eig_partial(&w, kk)?;
    let est: f64 = inner.values.iter().sum::<f64>() * n as f64 / kk as f64;
    Ok(((k.trace() - est) / (n - kk) as f64).max(0.0))
}

/// `C W^+ C^T` restricted to the kept pairs.
pub fn nystrom_kernel_approx(r: &NystromResult) -> SymmetricDense {
    low_rank(&r.values, &r.vectors)
}

/// Nyström approximation of `K - mu I`, plus `mu I`.
pub fn shifted_kernel_approx(r: &NystromResult) -> SymmetricDense {
    let values: Vec<f64> = r.values.iter().map(|v| v - r.shift).collect();
    low_rank(&values, &r.vectors).shifted(r.shift)
}

/// First `l` entries of a seeded random permutation of `0..n`.
pub fn sample_columns(n: usize, l: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng_from_seed(seed));
    idx.truncate(l);
    idx
}

/// `sum_i w_i K~_i` over standard Nyström approximations from the column sets
/// `subsets`, each with `k` pairs; uniform weights when `weights` is `None`.
pub fn ensemble_nystrom<M: SymmetricMatrix>(
    k: &M,
    kk: usize,
    subsets: &[Vec<usize>],
    weights: Option<&[f64]>,
) -> Result<SymmetricDense> {
    let q = subsets.len();
    if q == 0 {
        return Err(Error::InvalidArgument("ensemble needs at least one member".into()));
    }
    let uniform = vec![1.0 / q as f64; q];
    let w = weights.unwrap_or(&uniform);
    check_weights(w, q)?;
    let members = subsets
        .par_iter()
        .map(|cols| nystrom_on_columns(k, cols, kk, 0.0).map(|r| nystrom_kernel_approx(&r)))
        .collect::<Result<Vec<_>>>()?;
    weighted_sum(&members, w)
}

/// Deviation between a Nyström result and a rescaled extension result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalenceReport {
    /// `max_i |u^_i - sqrt(k/n) u~_i|_2` after sign alignment.
    pub max_vector_deviation: f64,
    /// Largest eigenvalue mismatch relative to `|K|_2`.
    pub max_value_deviation: f64,
    pub passed: bool,
}

fn compare(
    nys: &NystromResult,
    ext_vectors: &ColBlock,
    value_pairs: impl Iterator<Item = (f64, f64)>,
    vec_scale: f64,
    norm_k: f64,
    tolerance: f64,
) -> EquivalenceReport {
    let mut max_vec = 0.0f64;
    for i in 0..nys.vectors.cols() {
        let a = nys.vectors.col(i);
        let b: Vec<f64> = ext_vectors.col(i).iter().map(|x| x * vec_scale).collect();
        let s = if dot(a, &b) < 0.0 { -1.0 } else { 1.0 };
        let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - s * y).collect();
        max_vec = max_vec.max(norm2(&d));
    }
    let max_val = value_pairs.map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / norm_k.max(f64::MIN_POSITIVE);
    EquivalenceReport {
        max_vector_deviation: max_vec,
        max_value_deviation: max_val,
        passed: max_vec <= tolerance && max_val <= tolerance,
    }
}

/// Checks that Nyström from the first `m` columns equals the first-order
/// extension of the leading `m x m` block with zero shift, after scaling
/// vectors by `sqrt(m/n)` and values by `n/m`.
pub fn verify_prop4(k: &SymmetricDense, m: usize, tolerance: f64) -> Result<EquivalenceReport> {
    let n = k.n() as f64;
    let nys = nystrom_extend(k, m)?;
    let cfg = ExtensionConfig::new(m, Order::First, MuPolicy::Zero).without_bounds();
    let ext = pert_extend(k, &Selector::TopLeft(m), &cfg)?;
    let ratio = n / m as f64;
    Ok(compare(
        &nys,
        &ext.vectors,
        nys.values.iter().zip(&ext.values).map(|(a, b)| (*a, ratio * b)),
        (m as f64 / n).sqrt(),
        spectral_norm(k)?,
        tolerance,
    ))
}

/// Checks that shifted Nyström from the first `k` columns equals the
/// first-order extension of the leading block with the same shift:
/// vectors agree after scaling by `sqrt(k/n)` and `lambda^ - mu = (n/k)(lambda~ - mu)`.
/// A shift colliding with a block eigenvalue is reported as an error.
pub fn verify_prop5(k: &SymmetricDense, kk: usize, mu: MuPolicy, tolerance: f64) -> Result<EquivalenceReport> {
    let n = k.n() as f64;
    let cfg = ExtensionConfig::new(kk, Order::First, mu).without_bounds();
    let ext = pert_extend(k, &Selector::TopLeft(kk), &cfg)?;
    let shift = ext.mu;
    let nys = shifted_nystrom(k, kk, shift)?;
    let ratio = n / kk as f64;
    Ok(compare(
        &nys,
        &ext.vectors,
        nys.values
            .iter()
            .zip(&ext.values)
            .map(|(a, b)| (a - shift, ratio * (b - shift))),
        (kk as f64 / n).sqrt(),
        spectral_norm(k)?,
        tolerance,
    ))
}
