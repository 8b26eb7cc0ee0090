//! Out-of-sample extension: take a submatrix `K^s` of `K`, compute its
//! leading eigenpairs, and extend them to approximate eigenpairs of `K` by
//! treating `K - K^s` as a perturbation.

pub(crate) mod block;
mod selector;

pub use block::block_extend;
pub use selector::{select_submatrix, Selector};

use crate::eigen::{spectral_norm, sym_eig_full, sym_eig_partial_checked, EigenPairs};
use crate::error::{Error, Result};
use crate::matrix::{check_dim, dot, ColBlock, Difference, SparseSymmetric, SymOperator, SymmetricDense, SymmetricMatrix};
use crate::perturbation::{error_bounds, truncated_update, MuPolicy, Order, PerturbationProblem, TailSpectrum};
use crate::tolerance::DENSE_FALLBACK_DIM;

/// Number of pairs, truncation order and tail policy of an extension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtensionConfig {
    pub m: usize,
    pub order: Order,
    pub mu: MuPolicy,
    /// Compute the per-pair error bound terms. This costs a spectral norm of
    /// `K - K^s` and, for large `n`, a moment estimate of the tail.
    pub bounds: bool,
}

impl ExtensionConfig {
    pub fn new(m: usize, order: Order, mu: MuPolicy) -> Self {
        Self { m, order, mu, bounds: true }
    }

    pub fn without_bounds(mut self) -> Self {
        self.bounds = false;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionResult {
    /// Extended eigenvalues `lambda^s_i + u^s_i^T (K - K^s) u^s_i`.
    pub values: Vec<f64>,
    /// Extended eigenvectors, unnormalized.
    pub vectors: ColBlock,
    /// Leading error-bound term per pair; empty when bounds were not requested.
    pub bound_first_terms: Vec<f64>,
    /// Structural nonzeros of `K^s` (symmetric pairs counted twice).
    pub selector_nnz: usize,
    /// Leading pairs of `K^s` that were extended.
    pub source_pairs: EigenPairs,
    /// Eigenvalue `m + 1` of `K^s`, when it exists.
    pub next_value: Option<f64>,
    /// The resolved shift.
    pub mu: f64,
}

impl ExtensionResult {
    pub fn nnz_fraction<M: SymmetricMatrix>(&self, k: &M) -> f64 {
        self.selector_nnz as f64 / k.nnz() as f64
    }
}

/// Extends the leading pairs of `K^s = select(K)` to approximate pairs of `K`.
pub fn pert_extend<M: SymmetricMatrix>(k: &M, sel: &Selector, cfg: &ExtensionConfig) -> Result<ExtensionResult> {
    let ks = select_submatrix(k, sel)?;
    extend_from_submatrix(k, &ks, cfg)
}

/// [`pert_extend`] for an already selected `K^s`.
pub fn extend_from_submatrix<M: SymmetricMatrix>(
    k: &M,
    ks: &SparseSymmetric,
    cfg: &ExtensionConfig,
) -> Result<ExtensionResult> {
    check_dim("extension K^s", k.dim(), ks.dim())?;
    let n = k.dim();
    if cfg.m == 0 || cfg.m > n {
        return Err(Error::InvalidArgument(format!("m = {} not in 1..={n}", cfg.m)));
    }
    let (source, next_value) = sym_eig_partial_checked(ks, cfg.m)?;
    let e = Difference::new(k, ks)?;
    let problem = PerturbationProblem::new(ks, &source, &e)?;
    let update = truncated_update(&problem, cfg.mu, cfg.order)?;

    let bound_first_terms = if cfg.bounds && cfg.m < n {
        let norm_e = spectral_norm(&e)?;
        let tail = tail_spectrum(ks, &source)?;
        error_bounds(&source.values, next_value, &tail, update.mu, norm_e, cfg.order)?
    } else if cfg.bounds {
        vec![0.0; cfg.m]
    } else {
        Vec::new()
    };

    Ok(ExtensionResult {
        values: update.values,
        vectors: update.vectors,
        bound_first_terms,
        selector_nnz: ks.nnz(),
        source_pairs: source,
        next_value,
        mu: update.mu,
    })
}

/// Trailing spectrum of `K^s`: listed exactly at desk scale, otherwise
/// summarized by `trace(K^s)` and `trace(K^s^2) = |K^s|_F^2`.
fn tail_spectrum(ks: &SparseSymmetric, source: &EigenPairs) -> Result<TailSpectrum> {
    let n = ks.dim();
    let m = source.m();
    if n <= DENSE_FALLBACK_DIM {
        let all = sym_eig_full(&ks.to_dense())?;
        return Ok(TailSpectrum::Values(all.values[m..].to_vec()));
    }
    Ok(TailSpectrum::from_traces(
        n,
        ks.trace(),
        ks.frobenius_norm().powi(2),
        &source.values,
        false,
    ))
}

/// `lambda^s_i + u^s_i^T (K - K^s) u^s_i`.
pub fn pert_extend_values(source: &EigenPairs, k: &dyn SymOperator, ks: &dyn SymOperator) -> Result<Vec<f64>> {
    check_dim("pert_extend_values", k.dim(), ks.dim())?;
    check_dim("pert_extend_values pairs", k.dim(), source.n())?;
    let e = Difference::new(k, ks)?;
    Ok((0..source.m())
        .map(|i| {
            let u = source.vector(i);
            source.values[i] + dot(u, &e.apply_vec(u))
        })
        .collect())
}

/// First-order bound terms for an extension result, given the tail of the
/// `K^s` spectrum and `|K - K^s|_2`.
pub fn extension_error_bound(result: &ExtensionResult, tail: &TailSpectrum, mu: f64, norm_e: f64) -> Result<Vec<f64>> {
    error_bounds(&result.source_pairs.values, result.next_value, tail, mu, norm_e, Order::First)
}

/// `sum_i lambda_i u_i u_i^T` from extended pairs (no orthonormalization).
pub fn kernel_approx(result: &ExtensionResult) -> SymmetricDense {
    low_rank(&result.values, &result.vectors)
}

pub(crate) fn low_rank(values: &[f64], vectors: &ColBlock) -> SymmetricDense {
    let mut out = SymmetricDense::zeros(vectors.rows());
    for (j, &v) in values.iter().enumerate() {
        out.add_outer(v, vectors.col(j));
    }
    out.mirror_upper();
    out
}
