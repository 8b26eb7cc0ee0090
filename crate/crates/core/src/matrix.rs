//! Dense and sparse symmetric matrices, column blocks, and the operator
//! abstraction the solvers and perturbation formulas are written against.

use crate::error::{Error, Result};

/// A real symmetric linear operator on `R^n`.
///
/// Implementors only need a matrix-vector product; everything in the
/// perturbation and Lanczos code is phrased in terms of `apply`.
pub trait SymOperator: Sync {
    fn dim(&self) -> usize;

    /// `y <- A x`. Both slices have length `dim()`.
    fn apply(&self, x: &[f64], y: &mut [f64]);

    fn trace(&self) -> f64;

    fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.apply(x, &mut y);
        y
    }
}

/// Operators with explicit entries: kernels `K` and their selections `K^s`.
pub trait SymmetricMatrix: SymOperator + Sized {
    fn get(&self, i: usize, j: usize) -> f64;

    /// Nonzero entries `(i, j, value)` with `i <= j`, sorted by `(i, j)`.
    fn upper_nonzeros(&self) -> Vec<(usize, usize, f64)>;

    /// Structural nonzeros, symmetric pairs counted twice and the diagonal once.
    fn nnz(&self) -> usize;

    fn frobenius_norm(&self) -> f64;

    /// The principal submatrix on `indices` (in the given order).
    fn principal_submatrix(&self, indices: &[usize]) -> Self;
}

/// Dense real symmetric `n x n` matrix with exact symmetry and finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricDense {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricDense {
    /// Builds from row-major storage, rejecting asymmetric or non-finite input.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                context: "SymmetricDense::from_row_major",
                expected: n * n,
                found: data.len(),
            });
        }
        for i in 0..n {
            for j in 0..n {
                let v = data[i * n + j];
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                if j > i && v != data[j * n + i] {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(Self { n, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "SymmetricDense::from_rows",
                    expected: n,
                    found: row.len(),
                });
            }
            let _ = i;
            data.extend_from_slice(row);
        }
        Self::from_row_major(n, data)
    }

    /// Evaluates `f(i, j)` on the upper triangle and mirrors it.
    pub fn from_upper_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self::from_row_major(n, data)
    }

    /// Symmetrizes `(B + B^T) / 2` from arbitrary square row-major storage.
    pub fn symmetrized(n: usize, data: &[f64]) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                context: "SymmetricDense::symmetrized",
                expected: n * n,
                found: data.len(),
            });
        }
        Self::from_upper_fn(n, |i, j| 0.5 * (data[i * n + j] + data[j * n + i]))
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut data = vec![0.0; n * n];
        for (i, &v) in d.iter().enumerate() {
            data[i * n + i] = v;
        }
        Self { n, data }
    }

    /// Materializes any symmetric operator by applying it to unit vectors.
    pub fn from_operator(op: &dyn SymOperator) -> Result<Self> {
        let n = op.dim();
        let mut cols = vec![0.0; n * n];
        let mut e = vec![0.0; n];
        let mut y = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            op.apply(&e, &mut y);
            e[j] = 0.0;
            cols[j * n..(j + 1) * n].copy_from_slice(&y);
        }
        Self::symmetrized(n, &cols)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_row_major(&self) -> &[f64] {
        &self.data
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.data[i * self.n + i]).collect()
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, other: &SymmetricDense, c: f64) -> Result<SymmetricDense> {
        check_dim("add_scaled", self.n, other.n)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + c * b)
            .collect();
        Ok(SymmetricDense { n: self.n, data })
    }

    /// `self + c * I`.
    pub fn shifted(&self, c: f64) -> SymmetricDense {
        let mut out = self.clone();
        for i in 0..self.n {
            out.data[i * self.n + i] += c;
        }
        out
    }

    pub fn scaled(&self, c: f64) -> SymmetricDense {
        SymmetricDense {
            n: self.n,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    /// Symmetric permutation `P A P^T` with `out[i][j] = A[perm[i]][perm[j]]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<SymmetricDense> {
        check_dim("permuted", self.n, perm.len())?;
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = self.data[perm[i] * n + perm[j]];
            }
        }
        Ok(SymmetricDense { n, data })
    }

    pub fn max_abs_diff(&self, other: &SymmetricDense) -> Result<f64> {
        check_dim("max_abs_diff", self.n, other.n)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Adds `c * u u^T` in place.
    pub(crate) fn add_outer(&mut self, c: f64, u: &[f64]) {
        let n = self.n;
        for i in 0..n {
            let ci = c * u[i];
            let row = &mut self.data[i * n..(i + 1) * n];
            for (r, &uj) in row.iter_mut().zip(u) {
                *r += ci * uj;
            }
        }
    }

    /// Forces exact symmetry by copying the upper triangle down.
    pub(crate) fn mirror_upper(&mut self) {
        let n = self.n;
        for i in 0..n {
            for j in (i + 1)..n {
                self.data[j * n + i] = self.data[i * n + j];
            }
        }
    }

    /// Conversion to triplet storage, dropping exact zeros.
    pub fn to_sparse(&self) -> SparseSymmetric {
        SparseSymmetric::from_sorted_upper(self.n, self.upper_nonzeros())
    }
}

impl SymOperator for SymmetricDense {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = dot(self.row(i), x);
        }
    }

    fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.data[i * self.n + i]).sum()
    }
}

impl SymmetricMatrix for SymmetricDense {
    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    fn upper_nonzeros(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n;
        let mut out = Vec::new();
        for i in 0..n {
            for j in i..n {
                let v = self.data[i * n + j];
                if v != 0.0 {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    fn nnz(&self) -> usize {
        self.data.iter().filter(|v| **v != 0.0).count()
    }

    fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn principal_submatrix(&self, indices: &[usize]) -> Self {
        let l = indices.len();
        let mut data = Vec::with_capacity(l * l);
        for &i in indices {
            for &j in indices {
                data.push(self.data[i * self.n + j]);
            }
        }
        SymmetricDense { n: l, data }
    }
}

/// Sparse symmetric matrix stored as upper-triangle triplets, with a
/// compressed full-pattern copy for `O(nnz)` products.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymmetric {
    n: usize,
    triplets: Vec<(usize, usize, f64)>,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseSymmetric {
    /// Accepts triplets in either triangle; `(j, i)` is folded onto `(i, j)`.
    /// Duplicates and non-finite values are rejected and exact zeros dropped.
    pub fn from_triplets(n: usize, triplets: Vec<(usize, usize, f64)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        let mut upper = Vec::with_capacity(triplets.len());
        for (i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(Error::InvalidArgument(format!(
                    "index ({i}, {j}) out of range for dimension {n}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
            let (r, c) = if i <= j { (i, j) } else { (j, i) };
            if v != 0.0 {
                upper.push((r, c, v));
            }
        }
        upper.sort_by_key(|a| (a.0, a.1));
        for w in upper.windows(2) {
            if (w[0].0, w[0].1) == (w[1].0, w[1].1) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate entry ({}, {})",
                    w[0].0, w[0].1
                )));
            }
        }
        Ok(Self::from_sorted_upper(n, upper))
    }

    pub(crate) fn from_sorted_upper(n: usize, triplets: Vec<(usize, usize, f64)>) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &(i, j, _) in &triplets {
            counts[i + 1] += 1;
            if i != j {
                counts[j + 1] += 1;
            }
        }
        for k in 0..n {
            counts[k + 1] += counts[k];
        }
        let row_ptr = counts.clone();
        let total = row_ptr[n];
        let mut col_idx = vec![0; total];
        let mut vals = vec![0.0; total];
        let mut next = counts;
        for &(i, j, v) in &triplets {
            col_idx[next[i]] = j;
            vals[next[i]] = v;
            next[i] += 1;
            if i != j {
                col_idx[next[j]] = i;
                vals[next[j]] = v;
                next[j] += 1;
            }
        }
        // sort each row by column for deterministic traversal
        for r in 0..n {
            let (s, e) = (row_ptr[r], row_ptr[r + 1]);
            let mut pairs: Vec<(usize, f64)> =
                col_idx[s..e].iter().copied().zip(vals[s..e].iter().copied()).collect();
            pairs.sort_by_key(|p| p.0);
            for (k, (c, v)) in pairs.into_iter().enumerate() {
                col_idx[s + k] = c;
                vals[s + k] = v;
            }
        }
        Self {
            n,
            triplets,
            row_ptr,
            col_idx,
            vals,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_sorted_upper(n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn triplets(&self) -> &[(usize, usize, f64)] {
        &self.triplets
    }

    /// Number of stored upper-triangle triplets.
    pub fn stored(&self) -> usize {
        self.triplets.len()
    }

    pub fn to_dense(&self) -> SymmetricDense {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for &(i, j, v) in &self.triplets {
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
        SymmetricDense { n, data }
    }

    /// Largest `|i - j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        self.triplets.iter().map(|&(i, j, _)| j - i).max().unwrap_or(0)
    }

    pub fn permuted(&self, perm: &[usize]) -> Result<SparseSymmetric> {
        check_dim("permuted", self.n, perm.len())?;
        let mut inv = vec![0; self.n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let t = self
            .triplets
            .iter()
            .map(|&(i, j, v)| (inv[i], inv[j], v))
            .collect();
        SparseSymmetric::from_triplets(self.n, t)
    }
}

impl SymOperator for SparseSymmetric {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (r, yr) in y.iter_mut().enumerate() {
            let (s, e) = (self.row_ptr[r], self.row_ptr[r + 1]);
            let mut acc = 0.0;
            for k in s..e {
                acc += self.vals[k] * x[self.col_idx[k]];
            }
            *yr = acc;
        }
    }

    fn trace(&self) -> f64 {
        self.triplets
            .iter()
            .filter(|t| t.0 == t.1)
            .map(|t| t.2)
            .sum()
    }
}

impl SymmetricMatrix for SparseSymmetric {
    fn get(&self, i: usize, j: usize) -> f64 {
        let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
        match self.col_idx[s..e].binary_search(&j) {
            Ok(k) => self.vals[s + k],
            Err(_) => 0.0,
        }
    }

    fn upper_nonzeros(&self) -> Vec<(usize, usize, f64)> {
        self.triplets.clone()
    }

    fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    fn frobenius_norm(&self) -> f64 {
        self.vals.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn principal_submatrix(&self, indices: &[usize]) -> Self {
        let mut pos = vec![usize::MAX; self.n];
        for (new, &old) in indices.iter().enumerate() {
            pos[old] = new;
        }
        let mut t = Vec::new();
        for &(i, j, v) in &self.triplets {
            let (a, b) = (pos[i], pos[j]);
            if a != usize::MAX && b != usize::MAX {
                t.push((a.min(b), a.max(b), v));
            }
        }
        t.sort_by_key(|a| (a.0, a.1));
        SparseSymmetric::from_sorted_upper(indices.len(), t)
    }
}

/// `A - B` applied implicitly, so a sparse `B` never forces `A - B` to be formed.
pub struct Difference<'a, A: ?Sized, B: ?Sized> {
    pub minuend: &'a A,
    pub subtrahend: &'a B,
}

impl<'a, A: SymOperator + ?Sized, B: SymOperator + ?Sized> Difference<'a, A, B> {
    pub fn new(minuend: &'a A, subtrahend: &'a B) -> Result<Self> {
        check_dim("Difference", minuend.dim(), subtrahend.dim())?;
        Ok(Self {
            minuend,
            subtrahend,
        })
    }
}

impl<A: SymOperator + ?Sized, B: SymOperator + ?Sized> SymOperator for Difference<'_, A, B> {
    fn dim(&self) -> usize {
        self.minuend.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.minuend.apply(x, y);
        let s = self.subtrahend.apply_vec(x);
        for (yi, si) in y.iter_mut().zip(s) {
            *yi -= si;
        }
    }

    fn trace(&self) -> f64 {
        self.minuend.trace() - self.subtrahend.trace()
    }
}

/// `c * A`.
pub struct Scaled<'a, A: ?Sized> {
    pub inner: &'a A,
    pub factor: f64,
}

impl<A: SymOperator + ?Sized> SymOperator for Scaled<'_, A> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.inner.apply(x, y);
        for v in y.iter_mut() {
            *v *= self.factor;
        }
    }

    fn trace(&self) -> f64 {
        self.factor * self.inner.trace()
    }
}

/// `A - shift * I`.
pub struct Shifted<'a, A: ?Sized> {
    pub inner: &'a A,
    pub shift: f64,
}

impl<A: SymOperator + ?Sized> SymOperator for Shifted<'_, A> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.inner.apply(x, y);
        if self.shift != 0.0 {
            axpy(-self.shift, x, y);
        }
    }

    fn trace(&self) -> f64 {
        self.inner.trace() - self.shift * self.inner.dim() as f64
    }
}

/// An `n x m` block of column vectors in column-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct ColBlock {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl ColBlock {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * columns.len());
        for c in columns {
            check_dim("ColBlock::from_columns", rows, c.len())?;
            data.extend_from_slice(c);
        }
        Ok(Self {
            rows,
            cols: columns.len(),
            data,
        })
    }

    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_dim("ColBlock::from_col_major", rows * cols, data.len())?;
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.rows.max(1)).take(self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    /// `B^T x`.
    pub fn t_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.columns().map(|c| dot(c, x)).collect()
    }

    /// `B y`.
    pub fn mul_vec(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        for (c, &yj) in self.columns().zip(y) {
            axpy(yj, c, &mut out);
        }
        out
    }

    /// `self^T other` as a `cols x other.cols` row-major matrix.
    pub fn t_mul(&self, other: &ColBlock) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.cols * other.cols);
        for a in self.columns() {
            for b in other.columns() {
                out.push(dot(a, b));
            }
        }
        out
    }

    /// Keeps the first `k` columns.
    pub fn truncated(&self, k: usize) -> ColBlock {
        let k = k.min(self.cols);
        ColBlock {
            rows: self.rows,
            cols: k,
            data: self.data[..k * self.rows].to_vec(),
        }
    }

    /// Rows selected (and reordered) by `perm`: `out[i] = self[perm[i]]`.
    pub fn permuted_rows(&self, perm: &[usize]) -> ColBlock {
        let mut out = ColBlock::zeros(perm.len(), self.cols);
        for j in 0..self.cols {
            let src = self.col(j);
            let dst = out.col_mut(j);
            for (d, &p) in dst.iter_mut().zip(perm) {
                *d = src[p];
            }
        }
        out
    }

    pub fn scaled(&self, c: f64) -> ColBlock {
        ColBlock {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y <- y + a x`.
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn matvec(a: &dyn SymOperator, x: &[f64]) -> Result<Vec<f64>> {
    check_dim("matvec", a.dim(), x.len())?;
    Ok(a.apply_vec(x))
}

pub fn trace(a: &dyn SymOperator) -> f64 {
    a.trace()
}

pub fn frobenius_norm<M: SymmetricMatrix>(a: &M) -> f64 {
    a.frobenius_norm()
}

pub fn add_scaled(a: &SymmetricDense, b: &SymmetricDense, c: f64) -> Result<SymmetricDense> {
    a.add_scaled(b, c)
}

pub(crate) fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        });
    }
    Ok(())
}
