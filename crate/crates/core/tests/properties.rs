use pertext::data::{build_kernel, standardize, Dataset, KernelSpec};
use pertext::eigen::sym_eig_partial;
use pertext::extension::{kernel_approx, select_submatrix};
use pertext::generators::{gen_band_matrix, gen_clustered_dataset, gen_random_psd, gen_unit_random_symmetric};
use pertext::nystrom::{nystrom_extend, nystrom_kernel_approx, shifted_nystrom};
use pertext::perturbation::{truncated_update, PerturbationProblem};
use pertext::rng::derive_seed;
use pertext::{
    pert_extend, principal_angle, spectral_norm, sym_eig_full, EigenPairs, ExtensionConfig, MuPolicy, Order, Selector,
    SymOperator, SymmetricDense, SymmetricMatrix,
};
use proptest::prelude::*;

fn max_residual(a: &SymmetricDense, e: &EigenPairs) -> f64 {
    (0..e.m())
        .map(|i| {
            let v = e.vector(i);
            let av = a.apply_vec(v);
            av.iter().zip(v).map(|(x, y)| (x - e.values[i] * y).powi(2)).sum::<f64>().sqrt()
        })
        .fold(0.0, f64::max)
}

fn max_orthonormality_error(e: &EigenPairs) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..e.m() {
        for j in 0..e.m() {
            let d: f64 = e.vector(i).iter().zip(e.vector(j)).map(|(a, b)| a * b).sum();
            worst = worst.max((d - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dense_eigenpairs_are_accurate(n in 2usize..40, seed in any::<u64>()) {
        let a = gen_unit_random_symmetric(n, seed).unwrap();
        let e = sym_eig_full(&a).unwrap();
        prop_assert!(max_residual(&a, &e) <= 1e-10);
        prop_assert!(max_orthonormality_error(&e) <= 1e-8);
        prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn partial_eigenpairs_are_accurate(seed in any::<u64>(), m in 1usize..6) {
        let a = gen_random_psd(300, seed).unwrap();
        let norm = spectral_norm(&a).unwrap();
        let e = sym_eig_partial(&a, m).unwrap();
        prop_assert!(max_residual(&a, &e) <= 1e-8 * norm);
        prop_assert!(max_orthonormality_error(&e) <= 1e-8);
    }

    #[test]
    fn selected_entries_come_from_k(seed in any::<u64>(), n in 3usize..25, which in 0usize..4, frac in 0.05f64..1.0) {
        let k = gen_unit_random_symmetric(n, seed).unwrap();
        let sel = match which {
            0 => Selector::TopLeft(1 + (frac * (n - 1) as f64) as usize),
            1 => Selector::Band((frac * (n - 1) as f64) as usize),
            2 => Selector::SparseTopQ(frac),
            _ => {
                let first = 1 + (frac * (n - 2) as f64) as usize;
                Selector::BlockDiag(vec![first, n - first])
            }
        };
        let s = select_submatrix(&k, &sel).unwrap();
        for i in 0..n {
            for j in 0..n {
                let v = s.get(i, j);
                prop_assert_eq!(v.to_bits(), s.get(j, i).to_bits());
                prop_assert!(v == 0.0 || v == k.get(i, j));
            }
        }
    }

    #[test]
    fn zero_perturbation_is_identity(seed in any::<u64>(), n in 6usize..30, order in 1u8..=2) {
        let a = gen_random_psd(n, seed).unwrap();
        let known = sym_eig_full(&a).unwrap().truncated(3);
        let zero = SymmetricDense::zeros(n);
        let problem = PerturbationProblem::new(&a, &known, &zero).unwrap();
        let upd = truncated_update(&problem, MuPolicy::Zero, Order::try_from(order).unwrap()).unwrap();
        for (u, v) in upd.vectors.columns().zip(known.vectors.columns()) {
            prop_assert!(u.iter().zip(v).all(|(x, y)| (x - y).abs() <= 1e-14));
        }
        prop_assert_eq!(upd.values, known.values);
    }

    #[test]
    fn full_mask_extension_is_exact(seed in any::<u64>(), n in 6usize..30) {
        let k = gen_unit_random_symmetric(n, seed).unwrap();
        let mask = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
        let cfg = ExtensionConfig::new(3, Order::Second, MuPolicy::Mean);
        let r = pert_extend(&k, &Selector::CustomMask(mask), &cfg).unwrap();
        let exact = sym_eig_full(&k).unwrap().truncated(3);
        prop_assert!(principal_angle(&exact.vectors, &r.vectors).unwrap() <= 1e-8);
    }

    #[test]
    fn nystrom_and_extension_give_same_kernel(seed in any::<u64>(), n in 10usize..40, m in 1usize..8) {
        let k = gen_random_psd(n, seed).unwrap();
        let cfg = ExtensionConfig::new(m, Order::First, MuPolicy::Zero).without_bounds();
        let ext = kernel_approx(&pert_extend(&k, &Selector::TopLeft(m), &cfg).unwrap());
        let nys = nystrom_kernel_approx(&nystrom_extend(&k, m).unwrap());
        prop_assert!(ext.max_abs_diff(&nys).unwrap() <= 1e-10 * spectral_norm(&k).unwrap());
    }

    #[test]
    fn zero_shift_nystrom_is_bitwise_standard(seed in any::<u64>(), n in 5usize..30) {
        let k = gen_random_psd(n, seed).unwrap();
        prop_assert_eq!(shifted_nystrom(&k, 4, 0.0).unwrap(), nystrom_extend(&k, 4).unwrap());
    }

    #[test]
    fn kernels_are_symmetric_and_psd(seed in any::<u64>(), n in 5usize..40, d in 1usize..6, which in 0usize..3) {
        let ds = standardize(&gen_clustered_dataset(n, d, 3, 2.0, 1.0, seed).unwrap()).unwrap();
        let spec = [KernelSpec::Gaussian(0.3), KernelSpec::Polynomial(2), KernelSpec::Linear][which];
        let k = build_kernel(&ds, spec).unwrap();
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(k.get(i, j).to_bits(), k.get(j, i).to_bits());
            }
            if which == 0 {
                prop_assert_eq!(k.get(i, i), 1.0);
            }
        }
        let min = *sym_eig_full(&k).unwrap().values.last().unwrap();
        prop_assert!(min >= -1e-8 * n as f64 * k.frobenius_norm().max(1.0));
    }

    #[test]
    fn standardize_is_idempotent(seed in any::<u64>(), n in 2usize..30, d in 1usize..5) {
        let ds = gen_clustered_dataset(n, d, 2, 4.0, 0.5, seed).unwrap();
        let once = standardize(&ds).unwrap();
        let twice = standardize(&once).unwrap();
        for (a, b) in once.rows().iter().zip(twice.rows()) {
            prop_assert!(a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12));
        }
    }
}

#[test]
fn generators_are_seed_deterministic() {
    assert_eq!(gen_band_matrix(60, 0.1, 1e-10, 5).unwrap(), gen_band_matrix(60, 0.1, 1e-10, 5).unwrap());
    assert_eq!(gen_random_psd(30, 5).unwrap(), gen_random_psd(30, 5).unwrap());
    assert_eq!(gen_unit_random_symmetric(30, 5).unwrap(), gen_unit_random_symmetric(30, 5).unwrap());
    let a = gen_clustered_dataset(20, 3, 2, 1.0, 1.0, 5).unwrap();
    let b = gen_clustered_dataset(20, 3, 2, 1.0, 1.0, 5).unwrap();
    assert_eq!(a.rows(), b.rows());
    assert_ne!(gen_random_psd(30, 5).unwrap(), gen_random_psd(30, 6).unwrap());
}

#[test]
fn constant_column_standardizes_to_zero() {
    let ds = Dataset::new(vec![vec![1.0, 2.0], vec![1.0, 4.0], vec![1.0, 9.0]]).unwrap();
    let s = standardize(&ds).unwrap();
    assert_eq!(s.constant_columns, vec![0]);
    assert!(s.rows().iter().all(|r| r[0] == 0.0));
}

#[test]
fn band_error_is_monotone_in_bandwidth() {
    // median over 20 seeds of the Band(p) extension error, non-increasing in p
    let n = 200;
    let ps = [1usize, 2, 4, 8, 16, 32, 64, 128, 199];
    let cfg = ExtensionConfig::new(10, Order::First, MuPolicy::Zero).without_bounds();
    let mut per_p = vec![Vec::new(); ps.len()];
    for t in 0..20 {
        let k = gen_band_matrix(n, 0.1, 1e-10, derive_seed(0xBA4D, t)).unwrap();
        let exact = sym_eig_partial(&k, 10).unwrap();
        for (slot, &p) in per_p.iter_mut().zip(&ps) {
            let angle = pert_extend(&k, &Selector::Band(p), &cfg)
                .and_then(|r| principal_angle(&exact.vectors, &r.vectors))
                .unwrap_or(std::f64::consts::FRAC_PI_2);
            slot.push(angle);
        }
    }
    let medians: Vec<f64> = per_p
        .iter_mut()
        .map(|v| {
            v.sort_by(f64::total_cmp);
            0.5 * (v[9] + v[10])
        })
        .collect();
    assert!(medians.windows(2).all(|w| w[1] <= w[0]), "{medians:?}");
}
