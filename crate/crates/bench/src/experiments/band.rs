//! Band extensions against generalized Nyström on band-concentrated kernels.

use log::warn;
use pertext::eigen::sym_eig_partial;
use pertext::extension::{extend_from_submatrix, select_submatrix};
use pertext::generators::gen_band_matrix;
use pertext::nystrom::{nystrom_on_columns, sample_columns};
use pertext::rng::derive_seed;
use pertext::{principal_angle, ExtensionConfig, MuPolicy, Order, Selector, SparseSymmetric, SymmetricMatrix};
use rayon::prelude::*;

use super::RowTemplate;
use crate::report::Report;
use crate::{BenchError, Context, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BandConfig {
    pub n: usize,
    pub m: usize,
    /// Half-bandwidths of the band extensions.
    pub p_grid: Vec<usize>,
    /// Sampled column counts of the Nyström baseline.
    pub l_grid: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub decay: f64,
    pub cutoff: f64,
}

impl BandConfig {
    pub fn with_size(n: usize) -> Self {
        let mut p_grid: Vec<usize> = std::iter::successors(Some(1usize), |p| Some(p * 2))
            .take_while(|&p| p < n - 1)
            .collect();
        p_grid.push(n - 1);
        Self {
            n,
            m: 10,
            p_grid,
            l_grid: (1..=10).map(|i| n * i / 10).filter(|&l| l >= 10).collect(),
            trials: 20,
            seed: 0,
            decay: 0.1,
            cutoff: 1e-10,
        }
    }
}

impl Default for BandConfig {
    fn default() -> Self {
        Self::with_size(500)
    }
}

/// Extension and Nyström curves against the exact leading subspace of `k`.
/// Extensions that fail (e.g. on an eigengap of `K^s`) are skipped with a warning.
#[allow(clippy::too_many_arguments)]
pub(crate) fn compare_curves(
    report: &mut Report,
    tpl: &RowTemplate,
    k: &SparseSymmetric,
    m: usize,
    selectors: &[(f64, Selector)],
    ext_method: &str,
    l_grid: &[usize],
    column_seed: u64,
) -> Result<()> {
    let n = k.n();
    let total = k.nnz() as f64;
    let exact = sym_eig_partial(k, m).context(|| format!("exact leading pairs, trial {}", tpl.trial))?;
    let cfg = ExtensionConfig::new(m, Order::First, MuPolicy::Zero).without_bounds();

    let ext = selectors
        .par_iter()
        .map(|(param, sel)| -> Result<Option<(f64, f64, f64)>> {
            let ks = select_submatrix(k, sel)?;
            match extend_from_submatrix(k, &ks, &cfg) {
                Ok(r) => {
                    let angle = principal_angle(&exact.vectors, &r.vectors)?;
                    Ok(Some((*param, ks.nnz() as f64 / total, angle)))
                }
                Err(e) => {
                    warn!("{} trial {}: {sel:?} skipped: {e}", tpl.experiment_id, tpl.trial);
                    Ok(None)
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;
    for (param, frac, angle) in ext.into_iter().flatten() {
        if frac > 0.0 {
            report.push(tpl.row(ext_method, param, frac, "principal_angle", angle))?;
        }
    }

    let perm = sample_columns(n, n, column_seed);
    let nys = l_grid
        .par_iter()
        .map(|&l| -> Result<Option<(f64, f64, f64)>> {
            match nystrom_on_columns(k, &perm[..l], m, 0.0) {
                Ok(r) => {
                    let angle = principal_angle(&exact.vectors, &r.vectors)?;
                    Ok(Some((l as f64, r.block_nnz as f64 / total, angle)))
                }
                Err(e) => {
                    warn!("{} trial {}: nystrom l = {l} skipped: {e}", tpl.experiment_id, tpl.trial);
                    Ok(None)
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;
    for (l, frac, angle) in nys.into_iter().flatten() {
        report.push(tpl.row("nystrom", l, frac, "principal_angle", angle))?;
    }
    Ok(())
}

pub fn run(cfg: &BandConfig) -> Result<Report> {
    if cfg.p_grid.is_empty() || cfg.l_grid.is_empty() {
        return Err(BenchError::Usage("band experiment needs nonempty p and l grids".into()));
    }
    if cfg.trials == 0 || cfg.m == 0 || cfg.m >= cfg.n {
        return Err(BenchError::Usage(format!("need trials > 0 and 0 < m < n = {}", cfg.n)));
    }
    if let Some(p) = cfg.p_grid.iter().find(|&&p| p >= cfg.n) {
        return Err(BenchError::Usage(format!("half-bandwidth {p} must be below n = {}", cfg.n)));
    }
    if let Some(l) = cfg.l_grid.iter().find(|&&l| l < cfg.m || l > cfg.n) {
        return Err(BenchError::Usage(format!("column count {l} not in {}..={}", cfg.m, cfg.n)));
    }
    let selectors: Vec<(f64, Selector)> = cfg.p_grid.iter().map(|&p| (p as f64, Selector::Band(p))).collect();
    let parts = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| -> Result<Report> {
            let seed = derive_seed(cfg.seed, trial as u64);
            let tpl = RowTemplate { experiment_id: "band", trial, seed };
            let k = gen_band_matrix(cfg.n, cfg.decay, cfg.cutoff, derive_seed(seed, 0))?;
            let mut report = Report::new();
            compare_curves(&mut report, &tpl, &k, cfg.m, &selectors, "band", &cfg.l_grid, derive_seed(seed, 1))?;
            Ok(report)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = Report::new();
    parts.into_iter().for_each(|p| report.extend(p));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_bandwidth_is_exact() {
        let mut cfg = BandConfig::with_size(60);
        cfg.m = 4;
        cfg.trials = 2;
        cfg.p_grid = vec![59];
        cfg.l_grid = vec![60];
        let r = run(&cfg).unwrap();
        for row in r.rows() {
            assert!(row.value <= 1e-6, "{row:?}");
            assert!((0.0..=std::f64::consts::FRAC_PI_2).contains(&row.value));
        }
    }

    #[test]
    fn empty_grid_rejected() {
        let mut cfg = BandConfig::with_size(60);
        cfg.p_grid.clear();
        assert!(matches!(run(&cfg), Err(BenchError::Usage(_))));
    }

    #[test]
    fn default_grids_are_valid() {
        let cfg = BandConfig::default();
        assert_eq!(cfg.p_grid.first(), Some(&1));
        assert_eq!(cfg.p_grid.last(), Some(&499));
        assert_eq!(cfg.l_grid.last(), Some(&500));
    }
}
