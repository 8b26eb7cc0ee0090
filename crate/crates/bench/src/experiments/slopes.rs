//! Error of the truncated updates against the exact leading eigenvector,
//! swept over the perturbation size and over the tail eigenvalue.

use pertext::eigen::sym_eig_partial;
use pertext::generators::{gen_rank_m_spectrum, gen_unit_random_symmetric};
use pertext::perturbation::{truncated_update, PerturbationProblem};
use pertext::rng::derive_seed;
use pertext::{EigenPairs, MuPolicy, Order, SymmetricDense};
use rayon::prelude::*;

use super::{sign_aligned_distance, RowTemplate};
use crate::report::Report;
use crate::stats::{logspace, loglog_slope};
use crate::{Context, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SlopesConfig {
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub trials: usize,
    /// Scalings `c` of the unit-norm perturbation.
    pub scale_grid: Vec<f64>,
    /// Tail eigenvalues of the rank-`m`-plus-constant base matrix.
    pub tail_grid: Vec<f64>,
    /// Spectral norm of the perturbation in the tail sweep.
    pub tail_perturbation: f64,
    pub leading_range: (f64, f64),
}

impl Default for SlopesConfig {
    fn default() -> Self {
        Self {
            n: 200,
            m: 10,
            seed: 0,
            trials: 1,
            scale_grid: logspace(1e-6, 1e-3, 10),
            tail_grid: logspace(3e-2, 5e-1, 8),
            tail_perturbation: 1e-6,
            leading_range: (1.0, 2.0),
        }
    }
}

/// Fitted log-log slopes of one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialSlopes {
    pub trial: usize,
    /// Error against `|cE|`, first and second order.
    pub scale_first: f64,
    pub scale_second: f64,
    /// Error against the tail value, first and second order.
    pub tail_first: f64,
    pub tail_second: f64,
}

pub struct SlopesOutcome {
    pub report: Report,
    pub slopes: Vec<TrialSlopes>,
}

/// Distances of the first- and second-order leading vectors to the exact
/// leading eigenvector of `base + e`.
fn leading_errors(base: &SymmetricDense, known: &EigenPairs, e: &SymmetricDense) -> Result<(f64, f64)> {
    let exact = sym_eig_partial(&base.add_scaled(e, 1.0)?, 1).context(|| "exact leading pair".into())?;
    let problem = PerturbationProblem::new(base, known, e)?;
    let mut out = [0.0; 2];
    for (slot, order) in out.iter_mut().zip([Order::First, Order::Second]) {
        let upd = truncated_update(&problem, MuPolicy::Zero, order)?;
        *slot = sign_aligned_distance(exact.vector(0), upd.vectors.col(0));
    }
    Ok((out[0], out[1]))
}

fn run_trial(cfg: &SlopesConfig, trial: usize) -> Result<(Report, TrialSlopes)> {
    let seed = derive_seed(cfg.seed, trial as u64);
    let mut report = Report::new();

    let tpl = RowTemplate { experiment_id: "scale_sweep", trial, seed };
    let a = gen_unit_random_symmetric(cfg.n, derive_seed(seed, 0))?;
    let e = gen_unit_random_symmetric(cfg.n, derive_seed(seed, 1))?;
    let known = sym_eig_partial(&a, cfg.m).context(|| "leading pairs of the base matrix".into())?;
    let errs = cfg
        .scale_grid
        .par_iter()
        .map(|&c| leading_errors(&a, &known, &e.scaled(c)))
        .collect::<Result<Vec<_>>>()?;
    for (&c, &(e1, e2)) in cfg.scale_grid.iter().zip(&errs) {
        report.push(tpl.row("first_order", c, 1.0, "eigvec_error", e1))?;
        report.push(tpl.row("second_order", c, 1.0, "eigvec_error", e2))?;
    }
    let e1: Vec<f64> = errs.iter().map(|p| p.0).collect();
    let e2: Vec<f64> = errs.iter().map(|p| p.1).collect();
    let scale_first = loglog_slope(&cfg.scale_grid, &e1)?;
    let scale_second = loglog_slope(&cfg.scale_grid, &e2)?;
    report.push(tpl.row("first_order", 0.0, 1.0, "loglog_slope", scale_first))?;
    report.push(tpl.row("second_order", 0.0, 1.0, "loglog_slope", scale_second))?;

    let tpl = RowTemplate { experiment_id: "tail_sweep", trial, seed };
    let e = gen_unit_random_symmetric(cfg.n, derive_seed(seed, 2))?.scaled(cfg.tail_perturbation);
    let base_seed = derive_seed(seed, 3);
    let errs = cfg
        .tail_grid
        .par_iter()
        .map(|&c| {
            let base = gen_rank_m_spectrum(cfg.n, cfg.m, cfg.leading_range, c, base_seed)?;
            let known = sym_eig_partial(&base, cfg.m).context(|| format!("leading pairs, tail {c}"))?;
            leading_errors(&base, &known, &e)
        })
        .collect::<Result<Vec<_>>>()?;
    for (&c, &(e1, e2)) in cfg.tail_grid.iter().zip(&errs) {
        report.push(tpl.row("first_order", c, 1.0, "eigvec_error", e1))?;
        report.push(tpl.row("second_order", c, 1.0, "eigvec_error", e2))?;
    }
    let e1: Vec<f64> = errs.iter().map(|p| p.0).collect();
    let e2: Vec<f64> = errs.iter().map(|p| p.1).collect();
    let tail_first = loglog_slope(&cfg.tail_grid, &e1)?;
    let tail_second = loglog_slope(&cfg.tail_grid, &e2)?;
    report.push(tpl.row("first_order", 0.0, 1.0, "loglog_slope", tail_first))?;
    report.push(tpl.row("second_order", 0.0, 1.0, "loglog_slope", tail_second))?;

    Ok((
        report,
        TrialSlopes { trial, scale_first, scale_second, tail_first, tail_second },
    ))
}

pub fn run(cfg: &SlopesConfig) -> Result<SlopesOutcome> {
    if cfg.m == 0 || cfg.m >= cfg.n || cfg.trials == 0 {
        return Err(crate::BenchError::Usage(format!(
            "slopes needs 0 < m < n and at least one trial (n = {}, m = {}, trials = {})",
            cfg.n, cfg.m, cfg.trials
        )));
    }
    let results = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, t))
        .collect::<Result<Vec<_>>>()?;
    let mut report = Report::new();
    let mut slopes = Vec::new();
    for (r, s) in results {
        report.extend(r);
        slopes.push(s);
    }
    Ok(SlopesOutcome { report, slopes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::BenchError;

    #[test]
    fn single_point_grid_has_no_slope() {
        let cfg = SlopesConfig { n: 30, m: 3, scale_grid: vec![1e-4], ..Default::default() };
        assert!(matches!(run(&cfg), Err(BenchError::Slope(_))));
    }

    #[test]
    fn small_instance_slopes() {
        let cfg = SlopesConfig { n: 40, m: 4, ..Default::default() };
        let out = run(&cfg).unwrap();
        let s = out.slopes[0];
        assert!((s.scale_first - 1.0).abs() < 0.1, "{s:?}");
        assert!((s.scale_second - 1.0).abs() < 0.1, "{s:?}");
    }
}
