//! Symmetric eigensolvers: cyclic Jacobi for full decompositions and a
//! thick-restart Lanczos iteration for a few leading pairs.

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::matrix::{axpy, dot, norm2, ColBlock, SymOperator, SymmetricDense};
use crate::rng::rng_from_seed;
use crate::tolerance::{
    DENSE_FALLBACK_DIM, EIGENGAP, JACOBI_MAX_SWEEPS, JACOBI_OFF_DIAGONAL, LANCZOS_MAX_RESTARTS,
    LANCZOS_RESIDUAL,
};

/// Leading eigenpairs, values in descending order, vectors as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: ColBlock,
}

impl EigenPairs {
    pub fn new(values: Vec<f64>, vectors: ColBlock) -> Result<Self> {
        if values.len() != vectors.cols() {
            return Err(Error::DimensionMismatch {
                context: "EigenPairs::new",
                expected: vectors.cols(),
                found: values.len(),
            });
        }
        Ok(Self { values, vectors })
    }

    pub fn n(&self) -> usize {
        self.vectors.rows()
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        self.vectors.col(i)
    }

    /// Keeps the `m` leading pairs.
    pub fn truncated(&self, m: usize) -> EigenPairs {
        EigenPairs {
            values: self.values[..m.min(self.m())].to_vec(),
            vectors: self.vectors.truncated(m),
        }
    }

    /// Fails if two consecutive values are closer than the eigengap tolerance.
    pub fn check_distinct(&self) -> Result<()> {
        for (i, w) in self.values.windows(2).enumerate() {
            let gap = w[0] - w[1];
            if gap < EIGENGAP {
                return Err(Error::EigengapTooSmall { index: i, gap });
            }
        }
        Ok(())
    }
}

/// Flips `v` so its largest-magnitude entry (lowest index on ties) is positive.
pub fn normalize_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|x| *x < 0.0) {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// All eigenpairs of a dense symmetric matrix by cyclic Jacobi rotations.
pub fn sym_eig_full(a: &SymmetricDense) -> Result<EigenPairs> {
    let n = a.n();
    let (values, vecs) = jacobi(n, a.as_row_major())?;
    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps index order among ties
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    let mut out = ColBlock::zeros(n, n);
    let mut sorted = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        sorted.push(values[src]);
        let col = out.col_mut(dst);
        for (r, c) in col.iter_mut().enumerate() {
            *c = vecs[r * n + src];
        }
        normalize_sign(col);
    }
    EigenPairs::new(sorted, out)
}

/// Returns unsorted eigenvalues and the row-major eigenvector matrix (columns are vectors).
fn jacobi(n: usize, input: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut a = input.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let fro = input.iter().map(|x| x * x).sum::<f64>().sqrt();
    let threshold = JACOBI_OFF_DIAGONAL * fro;
    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += 2.0 * a[i * n + j] * a[i * n + j];
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while off(&a) > threshold {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence { iterations: sweeps });
        }
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                if s == 0.0 {
                    continue;
                }
                rotated = true;
                // A <- J^T A J with J acting on columns/rows p, q
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let values = (0..n).map(|i| a[i * n + i]).collect();
    Ok((values, v))
}

/// The `m` algebraically largest eigenpairs of `a`.
///
/// Uses Lanczos with full reorthogonalization above `DENSE_FALLBACK_DIM`,
/// dense Jacobi below. Errors if eigenvalues `m` and `m + 1` are not separated.
pub fn sym_eig_partial(a: &dyn SymOperator, m: usize) -> Result<EigenPairs> {
    Ok(sym_eig_partial_checked(a, m)?.0)
}

/// [`sym_eig_partial`] that also returns eigenvalue `m + 1` when it exists.
pub(crate) fn sym_eig_partial_checked(a: &dyn SymOperator, m: usize) -> Result<(EigenPairs, Option<f64>)> {
    let (pairs, next) = sym_eig_partial_with_next(a, m)?;
    if let Some(next) = next {
        let gap = pairs.values[m - 1] - next;
        if gap < EIGENGAP {
            return Err(Error::EigengapTooSmall { index: m - 1, gap });
        }
    }
    Ok((pairs, next))
}

/// Like [`sym_eig_partial_checked`] without the gap check.
pub(crate) fn sym_eig_partial_with_next(
    a: &dyn SymOperator,
    m: usize,
) -> Result<(EigenPairs, Option<f64>)> {
    let n = a.dim();
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!(
            "requested {m} eigenpairs of a {n}x{n} matrix"
        )));
    }
    let want = (m + 1).min(n);
    let full = if n <= DENSE_FALLBACK_DIM {
        sym_eig_full(&SymmetricDense::from_operator(a)?)?.truncated(want)
    } else {
        lanczos(a, want, 0x5EED_0000 ^ n as u64)?
    };
    let next = (want > m).then(|| full.values[m]);
    Ok((full.truncated(m), next))
}

/// Largest absolute eigenvalue.
pub fn spectral_norm(a: &dyn SymOperator) -> Result<f64> {
    let n = a.dim();
    if n <= DENSE_FALLBACK_DIM {
        let e = sym_eig_full(&SymmetricDense::from_operator(a)?)?;
        return Ok(e.values[0].abs().max(e.values[n - 1].abs()));
    }
    let top = lanczos(a, 1, 0x5EED_0001)?.values[0];
    let neg = crate::matrix::Scaled {
        inner: a,
        factor: -1.0,
    };
    let bottom = lanczos(&neg, 1, 0x5EED_0002)?.values[0];
    Ok(top.abs().max(bottom.abs()))
}

/// Thick-restart Lanczos with full reorthogonalization and explicit
/// Rayleigh-Ritz projection `H = V^T A V` from stored `A V` columns.
fn lanczos(a: &dyn SymOperator, k: usize, seed: u64) -> Result<EigenPairs> {
    let n = a.dim();
    let ncv = n.min((2 * k + 20).max(k + 30));
    let mut rng = rng_from_seed(seed);
    let mut random_unit = |basis: &[Vec<f64>]| -> Vec<f64> {
        loop {
            let mut x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            orthogonalize(&mut x, basis);
            let nx = norm2(&x);
            if nx > 1e-8 {
                x.iter_mut().for_each(|v| *v /= nx);
                return x;
            }
        }
    };

    let mut v: Vec<Vec<f64>> = vec![random_unit(&[])];
    let mut av: Vec<Vec<f64>> = vec![a.apply_vec(&v[0])];
    let mut source = 0;

    for _restart in 0..LANCZOS_MAX_RESTARTS {
        while v.len() < ncv {
            let mut f = av[source].clone();
            let scale = norm2(&f);
            orthogonalize(&mut f, &v);
            let nf = norm2(&f);
            let next = if nf > 1e-10 * scale.max(f64::MIN_POSITIVE) && nf > 0.0 {
                f.iter_mut().for_each(|x| *x /= nf);
                f
            } else {
                random_unit(&v)
            };
            av.push(a.apply_vec(&next));
            v.push(next);
            source = v.len() - 1;
        }

        let j = v.len();
        let mut h = vec![0.0; j * j];
        for r in 0..j {
            for c in r..j {
                let x = 0.5 * (dot(&v[r], &av[c]) + dot(&v[c], &av[r]));
                h[r * j + c] = x;
                h[c * j + r] = x;
            }
        }
        let hs = SymmetricDense::from_row_major(j, h)?;
        let ritz = sym_eig_full(&hs)?;
        let scale = ritz.values[0].abs().max(ritz.values[j - 1].abs()).max(f64::MIN_POSITIVE);

        let combine = |basis: &[Vec<f64>], y: &[f64]| -> Vec<f64> {
            let mut out = vec![0.0; n];
            for (b, &c) in basis.iter().zip(y) {
                axpy(c, b, &mut out);
            }
            out
        };
        let keep = if j == n { k } else { (k + (j - k) / 2).min(j - 1).max(k) };
        let mut new_v = Vec::with_capacity(keep);
        let mut new_av = Vec::with_capacity(keep);
        let mut worst = (0.0, 0);
        let mut converged = true;
        for i in 0..keep {
            let y = ritz.vectors.col(i);
            let x = combine(&v, y);
            let ax = combine(&av, y);
            let mut res = ax.clone();
            axpy(-ritz.values[i], &x, &mut res);
            let rn = norm2(&res);
            if i < k && rn > LANCZOS_RESIDUAL * scale {
                converged = false;
            }
            if rn > worst.0 {
                worst = (rn, i);
            }
            new_v.push(x);
            new_av.push(ax);
        }
        if converged || j == n {
            let mut block = ColBlock::zeros(n, k);
            for (i, x) in new_v.into_iter().take(k).enumerate() {
                let nx = norm2(&x);
                let col = block.col_mut(i);
                for (c, xv) in col.iter_mut().zip(x) {
                    *c = xv / nx;
                }
                normalize_sign(col);
            }
            return EigenPairs::new(ritz.values[..k].to_vec(), block);
        }
        v = new_v;
        av = new_av;
        source = worst.1;
    }
    Err(Error::NoConvergence {
        iterations: LANCZOS_MAX_RESTARTS,
    })
}

/// Two passes of classical Gram-Schmidt against an orthonormal basis.
fn orthogonalize(x: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, x);
            axpy(-c, b, x);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::SparseSymmetric;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    fn random_symmetric(n: usize, seed: u64) -> SymmetricDense {
        let mut rng = rng_from_seed(seed);
        SymmetricDense::from_upper_fn(n, |_, _| rng.random_range(-1.0..1.0)).unwrap()
    }

    fn max_residual(a: &dyn SymOperator, e: &EigenPairs) -> f64 {
        (0..e.m())
            .map(|i| {
                let mut r = a.apply_vec(e.vector(i));
                axpy(-e.values[i], e.vector(i), &mut r);
                norm2(&r)
            })
            .fold(0.0, f64::max)
    }

    fn max_orthonormality_error(b: &ColBlock) -> f64 {
        let g = b.t_mul(b);
        let m = b.cols();
        (0..m * m)
            .map(|k| (g[k] - if k / m == k % m { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn diagonal_full() {
        let e = sym_eig_full(&SymmetricDense::diagonal(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(e.values, vec![3.0, 2.0, 1.0]);
        assert_eq!(e.vector(0), &[1.0, 0.0, 0.0]);
        assert_eq!(e.vector(1), &[0.0, 0.0, 1.0]);
        assert_eq!(e.vector(2), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn identity_full_keeps_index_order() {
        let e = sym_eig_full(&SymmetricDense::identity(4)).unwrap();
        assert_eq!(e.values, vec![1.0; 4]);
        for i in 0..4 {
            assert_eq!(e.vector(i)[i], 1.0);
        }
    }

    #[test]
    fn random_full_residual_and_orthonormality() {
        let a = random_symmetric(100, 3);
        let e = sym_eig_full(&a).unwrap();
        let norm = e.values[0].abs().max(e.values[99].abs());
        assert!(max_residual(&a, &e) <= 1e-10 * norm);
        assert!(max_orthonormality_error(&e.vectors) <= 1e-8);
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn two_by_two_closed_form() {
        // eigenvalues of [[a, b], [b, c]] are (a + c)/2 +- sqrt(((a - c)/2)^2 + b^2)
        let (a, b, c) = (2.0, 0.75, -1.0);
        let m = SymmetricDense::from_rows(&[vec![a, b], vec![b, c]]).unwrap();
        let e = sym_eig_full(&m).unwrap();
        let r = (((a - c) / 2.0f64).powi(2) + b * b).sqrt();
        assert!((e.values[0] - ((a + c) / 2.0 + r)).abs() < 1e-14);
        assert!((e.values[1] - ((a + c) / 2.0 - r)).abs() < 1e-14);
    }

    #[test]
    fn partial_diagonal() {
        let e = sym_eig_partial(&SymmetricDense::diagonal(&[5.0, 4.0, 3.0, 2.0, 1.0]), 2).unwrap();
        assert_eq!(e.values, vec![5.0, 4.0]);
    }

    #[test]
    fn partial_sparse_identity() {
        let e = sym_eig_partial(&SparseSymmetric::identity(3), 3).unwrap();
        assert_eq!(e.values[0], 1.0);
    }

    #[test]
    fn partial_rejects_degenerate_cut() {
        let r = sym_eig_partial(&SymmetricDense::diagonal(&[3.0, 2.0, 2.0]), 2);
        assert!(matches!(r, Err(Error::EigengapTooSmall { index: 1, .. })));
    }

    fn random_sparse(n: usize, density: f64, seed: u64) -> SparseSymmetric {
        let mut rng = rng_from_seed(seed);
        let mut t = Vec::new();
        for i in 0..n {
            for j in i..n {
                if rng.random::<f64>() < density {
                    t.push((i, j, rng.random_range(-1.0..1.0)));
                }
            }
        }
        SparseSymmetric::from_triplets(n, t).unwrap()
    }

    fn check_partial_against_full(a: &SparseSymmetric, m: usize) {
        let full = sym_eig_full(&a.to_dense()).unwrap();
        let part = sym_eig_partial(a, m).unwrap();
        for i in 0..m {
            assert!((full.values[i] - part.values[i]).abs() <= 1e-8, "value {i}");
            let d: f64 = full
                .vector(i)
                .iter()
                .zip(part.vector(i))
                .map(|(x, y)| (x - y).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(d <= 1e-6, "vector {i}: {d}");
        }
        assert!(max_orthonormality_error(&part.vectors) <= 1e-8);
    }

    #[test]
    fn partial_small_sparse_matches_full() {
        check_partial_against_full(&random_sparse(200, 0.05, 11), 10);
    }

    #[test]
    fn partial_lanczos_matches_full() {
        // above the dense fallback threshold, so this exercises Lanczos
        check_partial_against_full(&random_sparse(300, 0.05, 12), 10);
    }

    #[test]
    fn lanczos_handles_invariant_subspace() {
        // block-diagonal with tiny blocks: Krylov space from most starts is small
        let n = 300;
        let d: Vec<f64> = (0..n).map(|i| if i < 5 { 10.0 - i as f64 } else { 0.5 }).collect();
        let a = SymmetricDense::diagonal(&d);
        let e = lanczos(&a, 4, 1).unwrap();
        assert_eq!(e.values.len(), 4);
        for (i, v) in e.values.iter().enumerate() {
            assert!((v - (10.0 - i as f64)).abs() < 1e-10);
        }
    }

    #[test]
    fn spectral_norm_cases() {
        assert_eq!(spectral_norm(&SymmetricDense::diagonal(&[-7.0, 3.0])).unwrap(), 7.0);
        assert_eq!(spectral_norm(&SymmetricDense::zeros(3)).unwrap(), 0.0);
        let a = random_symmetric(50, 4);
        let e = sym_eig_full(&a).unwrap();
        let exact = e.values[0].abs().max(e.values[49].abs());
        assert!((spectral_norm(&a).unwrap() - exact).abs() <= 1e-8 * exact);
    }

    #[test]
    fn spectral_norm_large_matches_full() {
        let a = random_symmetric(300, 5);
        let e = sym_eig_full(&a).unwrap();
        let exact = e.values[0].abs().max(e.values[299].abs());
        assert!((spectral_norm(&a).unwrap() - exact).abs() <= 1e-8 * exact);
    }

    #[test]
    fn deterministic_output() {
        let a = random_sparse(280, 0.05, 6);
        assert_eq!(sym_eig_partial(&a, 5).unwrap(), sym_eig_partial(&a, 5).unwrap());
        let d = random_symmetric(40, 7);
        assert_eq!(sym_eig_full(&d).unwrap(), sym_eig_full(&d).unwrap());
    }
}
