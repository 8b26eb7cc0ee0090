use rayon::prelude::*;

use super::selector::block_labels;
use super::{extend_from_submatrix, kernel_approx, ExtensionConfig};
use crate::error::{Error, Result};
use crate::matrix::{SparseSymmetric, SymmetricDense, SymmetricMatrix};

/// Extends each diagonal block of `K` separately (as a zero-padded `K^s`)
/// and returns the weighted sum of the per-block kernel approximations.
///
/// `weights` defaults to uniform. Blocks run concurrently; the sum is
/// accumulated in block order with compensated summation, so the result
/// does not depend on scheduling.
pub fn block_extend<M: SymmetricMatrix>(
    k: &M,
    block_sizes: &[usize],
    cfg: &ExtensionConfig,
    weights: Option<&[f64]>,
) -> Result<SymmetricDense> {
    let n = k.dim();
    if block_sizes.is_empty() || block_sizes.contains(&0) || block_sizes.iter().sum::<usize>() != n {
        return Err(Error::InvalidArgument(format!(
            "block sizes {block_sizes:?} do not partition {n}"
        )));
    }
    let q = block_sizes.len();
    let uniform = vec![1.0 / q as f64; q];
    let w = weights.unwrap_or(&uniform);
    check_weights(w, q)?;

    let label = block_labels(block_sizes);
    let upper = k.upper_nonzeros();
    let approx: Vec<SymmetricDense> = (0..q)
        .into_par_iter()
        .map(|b| {
            let t = upper
                .iter()
                .filter(|t| label[t.0] == b && label[t.1] == b)
                .copied()
                .collect();
            let ks = SparseSymmetric::from_sorted_upper(n, t);
            extend_from_submatrix(k, &ks, cfg).map(|r| kernel_approx(&r))
        })
        .collect::<Result<_>>()?;
    weighted_sum(&approx, w)
}

pub(crate) fn check_weights(w: &[f64], q: usize) -> Result<()> {
    if w.len() != q {
        return Err(Error::DimensionMismatch {
            context: "weights",
            expected: q,
            found: w.len(),
        });
    }
    if w.iter().any(|x| !x.is_finite() || *x < 0.0) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "weights must be nonnegative and sum to 1, got {w:?}"
        )));
    }
    Ok(())
}

/// `sum_j w_j A_j` entrywise with Neumaier compensated summation.
pub(crate) fn weighted_sum(terms: &[SymmetricDense], w: &[f64]) -> Result<SymmetricDense> {
    let n = terms[0].n();
    let mut sum = vec![0.0; n * n];
    let mut comp = vec![0.0; n * n];
    for (a, &wj) in terms.iter().zip(w) {
        for ((s, c), &x) in sum.iter_mut().zip(comp.iter_mut()).zip(a.as_row_major()) {
            let y = wj * x;
            let t = *s + y;
            *c += if s.abs() >= y.abs() { (*s - t) + y } else { (y - t) + *s };
            *s = t;
        }
    }
    let data = sum.iter().zip(&comp).map(|(s, c)| s + c).collect();
    SymmetricDense::from_row_major(n, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::{pert_extend, Selector};
    use crate::generators::gen_random_psd;
    use crate::perturbation::{MuPolicy, Order};

    fn cfg(m: usize) -> ExtensionConfig {
        ExtensionConfig::new(m, Order::First, MuPolicy::Zero).without_bounds()
    }

    #[test]
    fn single_block_is_plain_extension() {
        let k = gen_random_psd(20, 1).unwrap();
        let b = block_extend(&k, &[20], &cfg(3), Some(&[1.0])).unwrap();
        let r = pert_extend(&k, &Selector::TopLeft(20), &cfg(3)).unwrap();
        assert_eq!(b, kernel_approx(&r));
    }

    #[test]
    fn block_diagonal_k_is_reconstructed_per_block() {
        let a = gen_random_psd(6, 2).unwrap();
        let c = gen_random_psd(6, 3).unwrap();
        let k = SymmetricDense::from_upper_fn(12, |i, j| match (i < 6, j < 6) {
            (true, true) => a.get(i, j),
            (false, false) => c.get(i - 6, j - 6),
            _ => 0.0,
        })
        .unwrap();
        let w = [0.25, 0.75];
        let out = block_extend(&k, &[6, 6], &cfg(6), Some(&w)).unwrap();
        // each block is recovered exactly, scaled by its weight
        for i in 0..12 {
            for j in 0..12 {
                let expect = match (i < 6, j < 6) {
                    (true, true) => w[0] * a.get(i, j),
                    (false, false) => w[1] * c.get(i - 6, j - 6),
                    _ => 0.0,
                };
                assert!((out.get(i, j) - expect).abs() <= 1e-10, "({i}, {j})");
            }
        }
    }

    #[test]
    fn uniform_weights_average_blocks() {
        let k = gen_random_psd(16, 4).unwrap();
        let out = block_extend(&k, &[7, 9], &cfg(2), None).unwrap();
        let mut expect = SymmetricDense::zeros(16);
        for (start, len) in [(0usize, 7usize), (7, 9)] {
            let mask = (start..start + len).flat_map(|i| (i..start + len).map(move |j| (i, j))).collect();
            let r = pert_extend(&k, &Selector::CustomMask(mask), &cfg(2)).unwrap();
            expect = expect.add_scaled(&kernel_approx(&r), 0.5).unwrap();
        }
        assert!(out.max_abs_diff(&expect).unwrap() <= 1e-12);
    }

    #[test]
    fn invalid_partition_or_weights() {
        let k = gen_random_psd(8, 5).unwrap();
        assert!(block_extend(&k, &[3, 4], &cfg(1), None).is_err());
        assert!(block_extend(&k, &[4, 4], &cfg(1), Some(&[0.7, 0.7])).is_err());
        assert!(block_extend(&k, &[4, 4], &cfg(1), Some(&[1.0])).is_err());
    }
}
