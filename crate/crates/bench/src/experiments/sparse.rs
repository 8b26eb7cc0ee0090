//! Sparse top-q extensions against generalized Nyström on sparsified kernels.

use std::path::PathBuf;

use pertext::data::{build_kernel, load_dataset, sparsify, standardize, Dataset, KernelSpec};
use pertext::generators::gen_clustered_dataset;
use pertext::nystrom::sample_columns;
use pertext::rng::derive_seed;
use pertext::Selector;
use rayon::prelude::*;

use super::band::compare_curves;
use super::RowTemplate;
use crate::report::Report;
use crate::{BenchError, Context, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    /// Gaussian mixture, regenerated per trial.
    Synthetic {
        d: usize,
        clusters: usize,
        separation: f64,
        spread: f64,
    },
    /// A numeric CSV file; each trial draws `n` of its rows at random.
    File { path: PathBuf, has_header: bool },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseConfig {
    pub source: DataSource,
    pub n: usize,
    pub kernel: KernelSpec,
    /// Fraction of the kernel's entries kept by sparsification.
    pub keep: f64,
    pub m: usize,
    pub q_grid: Vec<f64>,
    pub l_grid: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
}

impl SparseConfig {
    pub fn with_size(n: usize) -> Self {
        Self {
            source: DataSource::Synthetic { d: 81, clusters: 5, separation: 3.0, spread: 1.0 },
            n,
            kernel: KernelSpec::Gaussian(0.1),
            keep: 0.1,
            m: 5,
            q_grid: (1..=10).map(|i| i as f64 / 10.0).collect(),
            l_grid: (1..=10).map(|i| n * i / 10).collect(),
            trials: 20,
            seed: 0,
        }
    }
}

impl Default for SparseConfig {
    fn default() -> Self {
        Self::with_size(1000)
    }
}

fn trial_dataset(cfg: &SparseConfig, file: Option<&Dataset>, seed: u64) -> Result<Dataset> {
    match (&cfg.source, file) {
        (DataSource::Synthetic { d, clusters, separation, spread }, _) => {
            Ok(gen_clustered_dataset(cfg.n, *d, *clusters, *separation, *spread, seed)?)
        }
        (DataSource::File { .. }, Some(ds)) => {
            let idx = sample_columns(ds.n(), cfg.n.min(ds.n()), seed);
            Ok(Dataset::new(idx.iter().map(|&i| ds.row(i).to_vec()).collect())?)
        }
        (DataSource::File { path, .. }, None) => {
            Err(BenchError::Usage(format!("dataset {} was not loaded", path.display())))
        }
    }
}

pub fn run(cfg: &SparseConfig) -> Result<Report> {
    if cfg.q_grid.is_empty() || cfg.l_grid.is_empty() {
        return Err(BenchError::Usage("sparse experiment needs nonempty q and l grids".into()));
    }
    if cfg.trials == 0 || cfg.m == 0 {
        return Err(BenchError::Usage("need trials > 0 and m > 0".into()));
    }
    if let Some(q) = cfg.q_grid.iter().find(|q| !(**q > 0.0 && **q <= 1.0)) {
        return Err(BenchError::Usage(format!("fraction {q} not in (0, 1]")));
    }
    let file = match &cfg.source {
        DataSource::File { path, has_header } => {
            Some(load_dataset(path, *has_header).context(|| format!("loading {}", path.display()))?)
        }
        DataSource::Synthetic { .. } => None,
    };
    let n = file.as_ref().map_or(cfg.n, |f| cfg.n.min(f.n()));
    if cfg.m >= n {
        return Err(BenchError::Usage(format!("m = {} must be below the sample size {n}", cfg.m)));
    }
    if let Some(l) = cfg.l_grid.iter().find(|&&l| l < cfg.m || l > n) {
        return Err(BenchError::Usage(format!("column count {l} not in {}..={n}", cfg.m)));
    }
    let selectors: Vec<(f64, Selector)> = cfg.q_grid.iter().map(|&q| (q, Selector::SparseTopQ(q))).collect();
    let parts = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| -> Result<Report> {
            let seed = derive_seed(cfg.seed, trial as u64);
            let tpl = RowTemplate { experiment_id: "sparse", trial, seed };
            let ds = standardize(&trial_dataset(cfg, file.as_ref(), derive_seed(seed, 0))?)?;
            let k = sparsify(&build_kernel(&ds, cfg.kernel)?, cfg.keep)?;
            let mut report = Report::new();
            compare_curves(&mut report, &tpl, &k, cfg.m, &selectors, "sparse", &cfg.l_grid, derive_seed(seed, 1))?;
            Ok(report)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = Report::new();
    parts.into_iter().for_each(|p| report.extend(p));
    Ok(report)
}
