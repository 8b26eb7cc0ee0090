//! Eigensolver residual check on random symmetric matrices, and leading
//! pairs of a user-supplied matrix.

use std::path::Path;

use pertext::generators::gen_unit_random_symmetric;
use pertext::io::{write_block, write_values};
use pertext::matrix::{norm2, SymOperator};
use pertext::rng::derive_seed;
use pertext::{sym_eig_full, sym_eig_partial, EigenPairs};
use rayon::prelude::*;

use super::extend::{ensure_dir, Matrix, MatrixInput, VALUES_FILE, VECTORS_FILE};
use super::RowTemplate;
use crate::report::Report;
use crate::{BenchError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EigConfig {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for EigConfig {
    fn default() -> Self {
        Self { n: 100, trials: 100, seed: 0, tolerance: 1e-10 }
    }
}

/// `max_i |A v_i - lambda_i v_i|_2 / |A|_2`.
pub fn max_relative_residual(a: &dyn SymOperator, pairs: &EigenPairs, norm: f64) -> f64 {
    (0..pairs.m())
        .map(|i| {
            let v = pairs.vector(i);
            let mut r = a.apply_vec(v);
            r.iter_mut().zip(v).for_each(|(x, y)| *x -= pairs.values[i] * y);
            norm2(&r)
        })
        .fold(0.0, f64::max)
        / norm.max(f64::MIN_POSITIVE)
}

pub struct EigOutcome {
    pub report: Report,
    pub worst: f64,
    pub failures: usize,
}

/// Full decompositions of `trials` seeded random symmetric matrices.
pub fn run(cfg: &EigConfig) -> Result<EigOutcome> {
    if cfg.n == 0 || cfg.trials == 0 {
        return Err(BenchError::Usage("eig needs n > 0 and trials > 0".into()));
    }
    let residuals = (0..cfg.trials)
        .into_par_iter()
        .map(|t| -> Result<(usize, u64, f64)> {
            let seed = derive_seed(cfg.seed, t as u64);
            let a = gen_unit_random_symmetric(cfg.n, seed)?;
            let e = sym_eig_full(&a)?;
            let norm = e.values[0].abs().max(e.values[cfg.n - 1].abs());
            Ok((t, seed, max_relative_residual(&a, &e, norm)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = Report::new();
    for &(trial, seed, r) in &residuals {
        let tpl = RowTemplate { experiment_id: "eig", trial, seed };
        report.push(tpl.row("full", cfg.n as f64, 1.0, "relative_residual", r))?;
    }
    let worst = residuals.iter().map(|r| r.2).fold(0.0, f64::max);
    let failures = residuals.iter().filter(|r| r.2 > cfg.tolerance).count();
    Ok(EigOutcome { report, worst, failures })
}

/// Writes the `m` leading pairs of a matrix file into `out_dir`.
pub fn leading_pairs(input: &MatrixInput, m: usize, out_dir: &Path) -> Result<EigenPairs> {
    let pairs = match input.load()? {
        Matrix::Dense(a) => sym_eig_partial(&a, m)?,
        Matrix::Sparse(a) => sym_eig_partial(&a, m)?,
    };
    ensure_dir(out_dir)?;
    write_values(&out_dir.join(VALUES_FILE), &pairs.values)?;
    write_block(&out_dir.join(VECTORS_FILE), &pairs.vectors)?;
    Ok(pairs)
}
