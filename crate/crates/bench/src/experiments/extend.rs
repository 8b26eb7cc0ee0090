//! Ad-hoc extension of a user-supplied matrix or dataset kernel.

use std::fs;
use std::path::{Path, PathBuf};

use pertext::data::{build_kernel, load_dataset, sparsify, standardize, KernelSpec};
use pertext::extension::{pert_extend, ExtensionResult};
use pertext::io::{read_dense, read_sparse, write_block, write_values};
use pertext::{ExtensionConfig, MuPolicy, Order, Selector, SparseSymmetric, SymmetricDense};

use crate::{BenchError, Context, Result};

/// Where the kernel comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixInput {
    /// Dense comma-separated matrix.
    Dense(PathBuf),
    /// Sparse `n nnz` / `i j v` file.
    Sparse(PathBuf),
    /// Kernel of a standardized dataset, optionally sparsified.
    Dataset {
        path: PathBuf,
        has_header: bool,
        kernel: KernelSpec,
        keep: Option<f64>,
    },
}

pub enum Matrix {
    Dense(SymmetricDense),
    Sparse(SparseSymmetric),
}

impl MatrixInput {
    pub fn load(&self) -> Result<Matrix> {
        match self {
            MatrixInput::Dense(p) => Ok(Matrix::Dense(read_dense(p)?)),
            MatrixInput::Sparse(p) => Ok(Matrix::Sparse(read_sparse(p)?)),
            MatrixInput::Dataset { path, has_header, kernel, keep } => {
                let ds = standardize(&load_dataset(path, *has_header)?)?;
                let k = build_kernel(&ds, *kernel).context(|| format!("kernel of {}", path.display()))?;
                Ok(match keep {
                    Some(f) => Matrix::Sparse(sparsify(&k, *f)?),
                    None => Matrix::Dense(k),
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtendConfig {
    pub input: MatrixInput,
    pub selector: Selector,
    pub m: usize,
    pub order: Order,
    pub mu: MuPolicy,
    pub out_dir: PathBuf,
}

pub const VALUES_FILE: &str = "values.txt";
pub const VECTORS_FILE: &str = "vectors.csv";
pub const BOUNDS_FILE: &str = "bounds.txt";

pub(crate) fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| BenchError::Io { path: dir.to_path_buf(), source })
}

/// Extends and writes values, vectors and first bound terms into `out_dir`.
pub fn run(cfg: &ExtendConfig) -> Result<ExtensionResult> {
    let ext_cfg = ExtensionConfig::new(cfg.m, cfg.order, cfg.mu);
    let result = match cfg.input.load()? {
        Matrix::Dense(k) => pert_extend(&k, &cfg.selector, &ext_cfg),
        Matrix::Sparse(k) => pert_extend(&k, &cfg.selector, &ext_cfg),
    }
    .context(|| format!("extension with {:?}", cfg.selector))?;
    ensure_dir(&cfg.out_dir)?;
    write_values(&cfg.out_dir.join(VALUES_FILE), &result.values)?;
    write_block(&cfg.out_dir.join(VECTORS_FILE), &result.vectors)?;
    write_values(&cfg.out_dir.join(BOUNDS_FILE), &result.bound_first_terms)?;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use pertext::generators::gen_random_psd;
    use pertext::io::{read_table, write_dense};
    use pertext::nystrom::nystrom_extend;
    use pertext::{principal_angle, sym_eig_full, ColBlock};

    fn setup(n: usize) -> (tempfile::TempDir, SymmetricDense, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let k = gen_random_psd(n, 3).unwrap();
        let p = dir.path().join("k.csv");
        write_dense(&p, &k).unwrap();
        (dir, k, p)
    }

    fn read_vectors(dir: &Path) -> ColBlock {
        let rows = read_table(&dir.join(VECTORS_FILE)).unwrap();
        let (n, m) = (rows.len(), rows[0].len());
        ColBlock::from_col_major(n, m, (0..m).flat_map(|j| rows.iter().map(move |r| r[j])).collect()).unwrap()
    }

    #[test]
    fn topleft_matches_scaled_nystrom() {
        let (dir, k, p) = setup(30);
        let out = dir.path().join("out");
        let cfg = ExtendConfig {
            input: MatrixInput::Dense(p),
            selector: Selector::parse("topleft:6").unwrap(),
            m: 6,
            order: Order::First,
            mu: MuPolicy::Zero,
            out_dir: out.clone(),
        };
        run(&cfg).unwrap();
        let v = read_vectors(&out);
        let nys = nystrom_extend(&k, 6).unwrap();
        let scale = (6.0f64 / 30.0).sqrt();
        for j in 0..6 {
            let d = super::super::sign_aligned_distance(nys.vectors.col(j), &v.col(j).iter().map(|x| x * scale).collect::<Vec<_>>());
            assert!(d <= 1e-10, "column {j}: {d}");
        }
        assert_eq!(fs::read_to_string(out.join(BOUNDS_FILE)).unwrap().lines().count(), 6);
    }

    #[test]
    fn full_mask_gives_exact_pairs() {
        let (dir, k, p) = setup(20);
        let mask = dir.path().join("mask.txt");
        let pairs: Vec<String> = (0..20).flat_map(|i| (i..20).map(move |j| format!("{i} {j} 1"))).collect();
        fs::write(&mask, format!("20 {}\n{}\n", pairs.len(), pairs.join("\n"))).unwrap();
        let out = dir.path().join("out");
        let cfg = ExtendConfig {
            input: MatrixInput::Dense(p),
            selector: Selector::parse(&format!("mask:{}", mask.display())).unwrap(),
            m: 4,
            order: Order::Second,
            mu: MuPolicy::Mean,
            out_dir: out.clone(),
        };
        run(&cfg).unwrap();
        let exact = sym_eig_full(&k).unwrap().truncated(4);
        assert!(principal_angle(&exact.vectors, &read_vectors(&out)).unwrap() <= 1e-8);
    }
}
