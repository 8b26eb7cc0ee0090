//! Datasets, standardization, kernel matrices and magnitude sparsification.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{SparseSymmetric, SymmetricDense};

/// `n` samples of `d` features, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    rows: Vec<Vec<f64>>,
    pub standardized: bool,
    /// Columns found constant during standardization (stored as zeros).
    pub constant_columns: Vec<usize>,
}

impl Dataset {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let d = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || d == 0 {
            return Err(Error::InvalidArgument("dataset is empty".into()));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != d {
                return Err(Error::DimensionMismatch {
                    context: "Dataset row length",
                    expected: d,
                    found: r.len(),
                });
            }
            if let Some(j) = r.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
        Ok(Self {
            rows,
            standardized: false,
            constant_columns: Vec::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn d(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// The first `k` samples.
    pub fn head(&self, k: usize) -> Result<Dataset> {
        Dataset::new(self.rows[..k.min(self.n())].to_vec())
    }
}

/// Reads a comma-separated numeric file, optionally skipping one header row.
pub fn load_dataset(path: &Path, has_header: bool) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let row = record
            .iter()
            .enumerate()
            .map(|(c, field)| {
                field.parse::<f64>().map_err(|_| Error::Parse {
                    path: path.display().to_string(),
                    line,
                    column: c + 1,
                    message: format!("not a number: {field:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            path: path.display().to_string(),
            line: 1,
            column: 1,
            message: "no data rows".into(),
        });
    }
    Dataset::new(rows)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => Error::Parse {
            path: path.display().to_string(),
            line,
            column: (len.min(expected_len) + 1) as usize,
            message: format!("expected {expected_len} fields, found {len}"),
        },
        other => Error::Parse {
            path: path.display().to_string(),
            line,
            column: 1,
            message: format!("{other:?}"),
        },
    }
}

/// Centers each column and scales it to unit population variance.
/// Constant columns become zero and are recorded in `constant_columns`.
pub fn standardize(ds: &Dataset) -> Result<Dataset> {
    let (n, d) = (ds.n(), ds.d());
    if n < 2 {
        return Err(Error::InvalidArgument("standardization needs at least two samples".into()));
    }
    let mut rows = ds.rows.clone();
    let mut constant = Vec::new();
    for j in 0..d {
        let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n as f64;
        let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n as f64;
        let std = var.sqrt();
        if std <= 1e-12 * mean.abs().max(1.0) {
            constant.push(j);
            rows.iter_mut().for_each(|r| r[j] = 0.0);
        } else {
            rows.iter_mut().for_each(|r| r[j] = (r[j] - mean) / std);
        }
    }
    Ok(Dataset {
        rows,
        standardized: true,
        constant_columns: constant,
    })
}

/// Kernel function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    /// `exp(-gamma |x - y|^2)`
    Gaussian(f64),
    /// `(1 + x.y)^d`
    Polynomial(u32),
    /// `x.y`
    Linear,
}

impl FromStr for KernelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("kernel must be gaussian:<gamma>, poly:<degree> or linear, got {s:?}"));
        match s.trim().split_once(':') {
            None if s.trim() == "linear" => Ok(KernelSpec::Linear),
            Some(("gaussian", g)) => {
                let g: f64 = g.parse().map_err(|_| bad())?;
                if g > 0.0 && g.is_finite() {
                    Ok(KernelSpec::Gaussian(g))
                } else {
                    Err(bad())
                }
            }
            Some(("poly", d)) => match d.parse::<u32>() {
                Ok(d) if d >= 1 => Ok(KernelSpec::Polynomial(d)),
                _ => Err(bad()),
            },
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Gaussian(g) => write!(f, "gaussian:{g}"),
            KernelSpec::Polynomial(d) => write!(f, "poly:{d}"),
            KernelSpec::Linear => write!(f, "linear"),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Kernel matrix of all sample pairs. Rows are computed in parallel; the
/// result does not depend on scheduling.
pub fn build_kernel(ds: &Dataset, spec: KernelSpec) -> Result<SymmetricDense> {
    let n = ds.n();
    let eval = |i: usize, j: usize| -> Result<f64> {
        let (x, y) = (ds.row(i), ds.row(j));
        let v = match spec {
            KernelSpec::Gaussian(g) => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-g * d2).exp()
            }
            KernelSpec::Polynomial(d) => (1.0 + dot(x, y)).powi(d as i32),
            KernelSpec::Linear => dot(x, y),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Overflow(format!("kernel {spec} entry ({i}, {j}) is not finite")))
        }
    };
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (i..n).map(|j| eval(i, j)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    SymmetricDense::from_upper_fn(n, |i, j| upper[i][j - i])
}

/// `ceil(fraction * count)`, robust to the fraction not being exactly representable.
pub(crate) fn ceil_fraction(fraction: f64, count: usize) -> usize {
    let x = fraction * count as f64;
    let r = x.round();
    let k = if (x - r).abs() <= 1e-9 * x.max(1.0) { r } else { x.ceil() };
    (k as usize).min(count)
}

/// Upper-triangle entries ranked by decreasing magnitude, ties by `(row, col)`.
pub(crate) fn rank_by_magnitude(mut entries: Vec<(usize, usize, f64)>) -> Vec<(usize, usize, f64)> {
    entries.sort_by(|a, b| {
        b.2.abs()
            .total_cmp(&a.2.abs())
            .then((a.0, a.1).cmp(&(b.0, b.1)))
    });
    entries
}

/// Keeps the `ceil(keep_fraction * n(n+1)/2)` largest-magnitude upper-triangle
/// entries (mirrored) and zeroes the rest.
pub fn sparsify(k: &SymmetricDense, keep_fraction: f64) -> Result<SparseSymmetric> {
    if !(keep_fraction > 0.0 && keep_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "keep fraction must be in (0, 1], got {keep_fraction}"
        )));
    }
    let n = k.n();
    let mut all = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        let row = k.row(i);
        for (j, &v) in row.iter().enumerate().skip(i) {
            all.push((i, j, v));
        }
    }
    let take = ceil_fraction(keep_fraction, all.len());
    let mut kept: Vec<_> = rank_by_magnitude(all)
        .into_iter()
        .take(take)
        .filter(|t| t.2 != 0.0)
        .collect();
    kept.sort_by_key(|a| (a.0, a.1));
    Ok(SparseSymmetric::from_sorted_upper(n, kept))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::SymmetricMatrix;
    use crate::rng::rng_from_seed;
    use rand::Rng;
    use std::fs;

    fn random_dataset(n: usize, d: usize, seed: u64) -> Dataset {
        let mut rng = rng_from_seed(seed);
        Dataset::new((0..n).map(|_| (0..d).map(|j| rng.random_range(-1.0..1.0) * (j + 1) as f64 + j as f64).collect()).collect()).unwrap()
    }

    #[test]
    fn load_plain_and_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        fs::write(&p, "1,2\n3,4\n").unwrap();
        let ds = load_dataset(&p, false).unwrap();
        assert_eq!(ds.rows(), &[vec![1.0, 2.0], vec![3.0, 4.0]]);
        fs::write(&p, "x,y\n1,2\n3,4\n").unwrap();
        assert_eq!(load_dataset(&p, true).unwrap(), ds);
    }

    #[test]
    fn load_errors_locate_problem() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        fs::write(&p, "1,2\n3\n").unwrap();
        match load_dataset(&p, false) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        fs::write(&p, "1,2\n3,abc\n").unwrap();
        match load_dataset(&p, false) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 2)),
            other => panic!("unexpected {other:?}"),
        }
        fs::write(&p, "").unwrap();
        assert!(load_dataset(&p, false).is_err());
        assert!(matches!(load_dataset(&dir.path().join("missing.csv"), false), Err(Error::Io { .. })));
    }

    #[test]
    fn standardize_two_points() {
        let ds = Dataset::new(vec![vec![1.0, 5.0], vec![3.0, 5.0]]).unwrap();
        let s = standardize(&ds).unwrap();
        assert_eq!(s.rows(), &[vec![-1.0, 0.0], vec![1.0, 0.0]]);
        assert_eq!(s.constant_columns, vec![1]);
        assert!(s.standardized);
    }

    #[test]
    fn standardize_moments_and_idempotence() {
        let s = standardize(&random_dataset(100, 5, 1)).unwrap();
        for j in 0..5 {
            let mean: f64 = s.rows().iter().map(|r| r[j]).sum::<f64>() / 100.0;
            let var: f64 = s.rows().iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / 100.0;
            assert!(mean.abs() <= 1e-10);
            assert!((var.sqrt() - 1.0).abs() <= 1e-8);
        }
        let again = standardize(&s).unwrap();
        for (a, b) in s.rows().iter().flatten().zip(again.rows().iter().flatten()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn kernel_arithmetic() {
        let ds = Dataset::new(vec![vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let p = build_kernel(&ds, KernelSpec::Polynomial(2)).unwrap();
        assert_eq!(p.get(0, 1), 4.0);
        let l = build_kernel(&ds, KernelSpec::Linear).unwrap();
        assert_eq!(l.get(0, 1), 1.0);
        let two = Dataset::new(vec![vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let g = build_kernel(&two, KernelSpec::Gaussian(0.5)).unwrap();
        assert!((g.get(0, 1) - 0.367879441171442).abs() < 1e-15);
        assert_eq!(g.get(0, 0), 1.0);
    }

    #[test]
    fn gaussian_kernel_is_psd() {
        let ds = standardize(&random_dataset(60, 3, 2)).unwrap();
        let k = build_kernel(&ds, KernelSpec::Gaussian(0.1)).unwrap();
        assert!(k.diag().iter().all(|&v| v == 1.0));
        let e = crate::eigen::sym_eig_full(&k).unwrap();
        assert!(e.values[59] >= -1e-8 * 60.0);
    }

    #[test]
    fn polynomial_overflow_reported() {
        let ds = Dataset::new(vec![vec![1e200], vec![1e200]]).unwrap();
        assert!(matches!(build_kernel(&ds, KernelSpec::Polynomial(3)), Err(Error::Overflow(_))));
    }

    #[test]
    fn kernel_spec_parsing() {
        assert_eq!("gaussian:0.1".parse::<KernelSpec>().unwrap(), KernelSpec::Gaussian(0.1));
        assert_eq!("poly:3".parse::<KernelSpec>().unwrap(), KernelSpec::Polynomial(3));
        assert_eq!("linear".parse::<KernelSpec>().unwrap(), KernelSpec::Linear);
        for bad in ["gaussian:-1", "poly:0", "rbf", "gaussian:x"] {
            assert!(bad.parse::<KernelSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn sparsify_counts() {
        let ds = standardize(&random_dataset(80, 3, 3)).unwrap();
        let k = build_kernel(&ds, KernelSpec::Gaussian(0.1)).unwrap();
        assert_eq!(sparsify(&k, 1.0).unwrap().to_dense(), k);
        let s = sparsify(&k, 0.1).unwrap();
        let upper = 80 * 81 / 2;
        let kept = (0.1 * upper as f64).ceil() as usize;
        let diag = s.triplets().iter().filter(|t| t.0 == t.1).count();
        assert_eq!(s.stored(), kept);
        assert_eq!(s.nnz(), 2 * kept - diag);
        // every kept entry is at least as large as every dropped one
        let min_kept = s.triplets().iter().map(|t| t.2.abs()).fold(f64::INFINITY, f64::min);
        for i in 0..80 {
            for j in i..80 {
                if s.get(i, j) == 0.0 {
                    assert!(k.get(i, j).abs() <= min_kept);
                }
            }
        }
    }

    #[test]
    fn sparsify_keeps_dominant_diagonal() {
        let k = SymmetricDense::from_upper_fn(6, |i, j| if i == j { 10.0 } else { 0.1 }).unwrap();
        let s = sparsify(&k, 6.0 / 21.0).unwrap();
        assert_eq!(s.stored(), 6);
        assert!(s.triplets().iter().all(|t| t.0 == t.1));
    }

    #[test]
    fn ceil_fraction_is_robust() {
        assert_eq!(ceil_fraction(0.1, 500500), 50050);
        assert_eq!(ceil_fraction(0.3, 10), 3);
        assert_eq!(ceil_fraction(0.31, 10), 4);
        assert_eq!(ceil_fraction(1.0, 7), 7);
    }
}
