//! Orthonormalization and the largest principal angle between subspaces.

use crate::eigen::sym_eig_full;
use crate::error::{Error, Result};
use crate::matrix::{axpy, check_dim, dot, norm2, ColBlock, SymmetricDense};
use crate::tolerance::RANK_DEFICIENCY;

/// Orthonormal basis for the column span, by twice-repeated modified Gram-Schmidt.
pub fn orthonormalize(b: &ColBlock) -> Result<ColBlock> {
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(b.cols());
    for (j, col) in b.columns().enumerate() {
        let original = norm2(col);
        if original == 0.0 || !original.is_finite() {
            return Err(Error::RankDeficient { column: j });
        }
        let mut x = col.to_vec();
        for _ in 0..2 {
            for done in &q {
                let c = dot(done, &x);
                axpy(-c, done, &mut x);
            }
        }
        let nx = norm2(&x);
        if nx <= RANK_DEFICIENCY * original {
            return Err(Error::RankDeficient { column: j });
        }
        x.iter_mut().for_each(|v| *v /= nx);
        q.push(x);
    }
    ColBlock::from_columns(b.rows(), &q)
}

/// Largest principal angle between `span(U)` and `span(W)`, in `[0, pi/2]`.
///
/// Small angles are taken from the sine (`sigma_max` of the component of
/// `W` outside `span(U)`), large ones from the cosine, so both ends stay accurate.
pub fn principal_angle(u: &ColBlock, w: &ColBlock) -> Result<f64> {
    check_dim("principal_angle rows", u.rows(), w.rows())?;
    check_dim("principal_angle cols", u.cols(), w.cols())?;
    let qu = orthonormalize(u)?;
    let qw = orthonormalize(w)?;
    let k = qu.cols();

    let mut outside = qw.clone();
    for j in 0..k {
        let col = outside.col_mut(j);
        for _ in 0..2 {
            for b in qu.columns() {
                let c = dot(b, col);
                axpy(-c, b, col);
            }
        }
    }
    let sin2 = gram_extreme(&outside, true)?;
    if sin2 < 0.5 {
        return Ok(sin2.max(0.0).sqrt().min(1.0).asin());
    }
    let m = qu.t_mul(&qw);
    let mm = SymmetricDense::symmetrized(k, &ata(k, &m))?;
    let cos2 = sym_eig_full(&mm)?.values[k - 1];
    Ok(cos2.clamp(0.0, 1.0).sqrt().acos())
}

/// Largest (or smallest) eigenvalue of `B^T B`.
fn gram_extreme(b: &ColBlock, largest: bool) -> Result<f64> {
    let k = b.cols();
    let g = SymmetricDense::symmetrized(k, &b.t_mul(b))?;
    let e = sym_eig_full(&g)?;
    Ok(if largest { e.values[0] } else { e.values[k - 1] })
}

/// `M^T M` for a row-major `k x k` matrix.
fn ata(k: usize, m: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            out[i * k + j] = (0..k).map(|r| m[r * k + i] * m[r * k + j]).sum();
        }
    }
    out
}
