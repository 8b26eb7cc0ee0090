use std::path::Path;

use crate::data::{ceil_fraction, rank_by_magnitude};
use crate::error::{Error, Result};
use crate::io::read_pattern;
use crate::matrix::{SparseSymmetric, SymmetricMatrix};

/// Which entries of `K` make up `K^s`.
#[derive(Debug, Clone, PartialEq)]
pub enum Selector {
    /// The leading `l x l` principal block.
    TopLeft(usize),
    /// Entries with `|i - j| <= p`.
    Band(usize),
    /// Largest-magnitude entries covering a fraction `q` of `nnz(K)`.
    SparseTopQ(f64),
    /// Diagonal blocks of the given consecutive sizes.
    BlockDiag(Vec<usize>),
    /// Explicit index pairs; `(i, j)` and `(j, i)` are equivalent.
    CustomMask(Vec<(usize, usize)>),
}

impl Selector {
    /// Parses `topleft:<l>`, `band:<p>`, `sparse:<q>`, `blocks:<s1,s2,...>` or
    /// `mask:<file>` (a sparse matrix file whose values are ignored).
    pub fn parse(s: &str) -> Result<Selector> {
        let bad = |why: &str| Error::InvalidSelector(format!("{s:?}: {why}"));
        let (kind, arg) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| bad("expected <kind>:<argument>"))?;
        match kind {
            "topleft" => arg.parse().map(Selector::TopLeft).map_err(|_| bad("size must be an integer")),
            "band" => arg.parse().map(Selector::Band).map_err(|_| bad("width must be an integer")),
            "sparse" => {
                let q: f64 = arg.parse().map_err(|_| bad("fraction must be a number"))?;
                if q > 0.0 && q <= 1.0 {
                    Ok(Selector::SparseTopQ(q))
                } else {
                    Err(bad("fraction must be in (0, 1]"))
                }
            }
            "blocks" => arg
                .split(',')
                .map(|b| b.trim().parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(Selector::BlockDiag)
                .map_err(|_| bad("block sizes must be integers")),
            "mask" => {
                let (_, pairs) = read_pattern(Path::new(arg))?;
                Ok(Selector::CustomMask(pairs))
            }
            _ => Err(bad("unknown selector kind")),
        }
    }

    /// Checks the parameters against the dimension of `K`.
    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |why: String| Err(Error::InvalidSelector(why));
        match self {
            Selector::TopLeft(l) if *l == 0 || *l > n => bad(format!("topleft size {l} not in 1..={n}")),
            Selector::Band(p) if *p >= n => bad(format!("band width {p} exceeds {}", n - 1)),
            Selector::SparseTopQ(q) if !(*q > 0.0 && *q <= 1.0) => bad(format!("fraction {q} not in (0, 1]")),
            Selector::BlockDiag(b) if b.iter().sum::<usize>() != n || b.contains(&0) => {
                bad(format!("block sizes {b:?} do not partition {n}"))
            }
            Selector::CustomMask(m) => match m.iter().find(|&&(i, j)| i >= n || j >= n) {
                Some(&(i, j)) => bad(format!("mask index ({i}, {j}) out of range for {n}")),
                None => Ok(()),
            },
            _ => Ok(()),
        }
    }
}

/// Block index of every row for a consecutive partition.
pub(crate) fn block_labels(sizes: &[usize]) -> Vec<usize> {
    sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &s)| std::iter::repeat_n(b, s))
        .collect()
}

/// `K^s`: the selected entries of `K`, zero elsewhere.
pub fn select_submatrix<M: SymmetricMatrix>(k: &M, sel: &Selector) -> Result<SparseSymmetric> {
    let n = k.dim();
    sel.validate(n)?;
    let upper = k.upper_nonzeros();
    let kept: Vec<(usize, usize, f64)> = match sel {
        Selector::TopLeft(l) => upper.into_iter().filter(|t| t.1 < *l).collect(),
        Selector::Band(p) => upper.into_iter().filter(|t| t.1 - t.0 <= *p).collect(),
        Selector::BlockDiag(sizes) => {
            let label = block_labels(sizes);
            upper.into_iter().filter(|t| label[t.0] == label[t.1]).collect()
        }
        Selector::SparseTopQ(q) => {
            let target = ceil_fraction(*q, k.nnz());
            let mut covered = 0;
            let mut out = Vec::new();
            for t in rank_by_magnitude(upper) {
                if covered >= target {
                    break;
                }
                covered += if t.0 == t.1 { 1 } else { 2 };
                out.push(t);
            }
            out.sort_by_key(|a| (a.0, a.1));
            out
        }
        Selector::CustomMask(pairs) => {
            let mut idx: Vec<(usize, usize)> = pairs.iter().map(|&(i, j)| (i.min(j), i.max(j))).collect();
            idx.sort_unstable();
            idx.dedup();
            idx.into_iter()
                .map(|(i, j)| (i, j, k.get(i, j)))
                .filter(|t| t.2 != 0.0)
                .collect()
        }
    };
    Ok(SparseSymmetric::from_sorted_upper(n, kept))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{SymOperator, SymmetricDense};

    fn sample() -> SymmetricDense {
        SymmetricDense::from_upper_fn(6, |i, j| 1.0 + (i * 6 + j) as f64 * if (i + j) % 2 == 0 { 1.0 } else { -1.0 }).unwrap()
    }

    fn all_pairs(n: usize) -> Vec<(usize, usize)> {
        (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect()
    }

    #[test]
    fn full_mask_reproduces_k() {
        let k = sample();
        assert_eq!(select_submatrix(&k, &Selector::CustomMask(all_pairs(6))).unwrap().to_dense(), k);
        assert_eq!(select_submatrix(&k, &Selector::TopLeft(6)).unwrap().to_dense(), k);
    }

    #[test]
    fn band_zero_is_diagonal() {
        let k = sample();
        let s = select_submatrix(&k, &Selector::Band(0)).unwrap();
        assert_eq!(s.to_dense(), SymmetricDense::diagonal(&k.diag()));
    }

    #[test]
    fn sparse_full_fraction_keeps_everything() {
        let k = SymmetricDense::from_upper_fn(5, |i, j| if (i + j) % 3 == 0 { 0.0 } else { (i + 2 * j) as f64 }).unwrap();
        let s = select_submatrix(&k.to_sparse(), &Selector::SparseTopQ(1.0)).unwrap();
        assert_eq!(s.to_dense(), k);
    }

    #[test]
    fn sparse_top_q_takes_largest() {
        let k = sample();
        let s = select_submatrix(&k, &Selector::SparseTopQ(0.25)).unwrap();
        assert!(s.nnz() >= 9);
        let min_kept = s.triplets().iter().map(|t| t.2.abs()).fold(f64::INFINITY, f64::min);
        for (i, j) in all_pairs(6) {
            if s.get(i, j) == 0.0 {
                assert!(k.get(i, j).abs() <= min_kept);
            }
        }
    }

    #[test]
    fn entries_match_k_and_are_symmetric() {
        let k = sample();
        for sel in [
            Selector::TopLeft(3),
            Selector::Band(2),
            Selector::SparseTopQ(0.5),
            Selector::BlockDiag(vec![2, 4]),
            Selector::CustomMask(vec![(4, 1), (0, 0), (1, 4)]),
        ] {
            let s = select_submatrix(&k, &sel).unwrap();
            for (i, j) in all_pairs(6) {
                let v = s.get(i, j);
                assert_eq!(v, s.get(j, i));
                assert!(v == 0.0 || v == k.get(i, j), "{sel:?} at ({i}, {j})");
            }
        }
    }

    #[test]
    fn block_diag_structure() {
        let k = sample();
        let s = select_submatrix(&k, &Selector::BlockDiag(vec![2, 4])).unwrap();
        assert_eq!(s.get(0, 1), k.get(0, 1));
        assert_eq!(s.get(1, 2), 0.0);
        assert_eq!(s.get(2, 5), k.get(2, 5));
        assert!((s.trace() - k.trace()).abs() < 1e-12);
    }

    #[test]
    fn parse_grammar() {
        assert_eq!(Selector::parse("topleft:20").unwrap(), Selector::TopLeft(20));
        assert_eq!(Selector::parse("band:3").unwrap(), Selector::Band(3));
        assert_eq!(Selector::parse("sparse:0.4").unwrap(), Selector::SparseTopQ(0.4));
        assert_eq!(Selector::parse("blocks:2,3,5").unwrap(), Selector::BlockDiag(vec![2, 3, 5]));
        for bad in ["topleft", "band:-1", "sparse:0", "sparse:1.5", "blocks:a,b", "diag:3", "mask:/nonexistent/x"] {
            assert!(Selector::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn parse_mask_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.txt");
        std::fs::write(&p, "4 2\n0 0 1\n1 3 0\n").unwrap();
        let sel = Selector::parse(&format!("mask:{}", p.display())).unwrap();
        assert_eq!(sel, Selector::CustomMask(vec![(0, 0), (1, 3)]));
    }

    #[test]
    fn invalid_parameters_rejected() {
        let k = sample();
        for sel in [
            Selector::TopLeft(0),
            Selector::TopLeft(7),
            Selector::Band(6),
            Selector::BlockDiag(vec![2, 3]),
            Selector::CustomMask(vec![(0, 6)]),
        ] {
            assert!(matches!(select_submatrix(&k, &sel), Err(Error::InvalidSelector(_))), "{sel:?}");
        }
    }
}
