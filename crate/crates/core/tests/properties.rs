use epdiff_core::dynamics::t_op;
use epdiff_core::littlewood_paley::{besov_norm, build_chi_phi, decompose, BesovIndex};
use epdiff_core::spectral::{random_band_limited, resample, translate, Grid};
use proptest::prelude::*;

fn grid() -> Grid {
    Grid::new(&[64, 64], &[32.0, 32.0]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn operator_is_symmetric(a in 0u64..10_000, b in 0u64..10_000) {
        let g = grid();
        let u = random_band_limited(&g, 2, 3.0, a);
        let v = random_band_limited(&g, 2, 3.0, b);
        prop_assert_eq!(t_op(&u, &v).unwrap().max_coeff_diff(&t_op(&v, &u).unwrap()), 0.0);
    }

    #[test]
    fn blocks_reconstruct_the_field(seed in 0u64..10_000, k in 0.5f64..4.5) {
        let g = grid();
        let cp = build_chi_phi(&g).unwrap();
        let f = random_band_limited(&g, 1, k, seed);
        let back = decompose(&f, &cp).unwrap().reconstruct().unwrap();
        prop_assert!(back.max_coeff_diff(&f) <= 1e-13 * f.max_abs_coeff().max(1e-300));
    }

    #[test]
    fn besov_norm_is_homogeneous(seed in 0u64..10_000, a in -20.0f64..20.0, s in 0.0f64..5.0) {
        let g = grid();
        let cp = build_chi_phi(&g).unwrap();
        let idx = BesovIndex::new(s, 2.0, 2.0).unwrap();
        let f = random_band_limited(&g, 2, 5.0, seed);
        let n = besov_norm(&f, &idx, &cp).unwrap().value;
        let na = besov_norm(&f.scaled(a), &idx, &cp).unwrap().value;
        prop_assert!((na - a.abs() * n).abs() <= 1e-12 * n * a.abs().max(1.0));
    }

    #[test]
    fn translation_preserves_besov_norm(seed in 0u64..10_000, x in -8.0f64..8.0, y in -8.0f64..8.0) {
        let g = grid();
        let cp = build_chi_phi(&g).unwrap();
        let idx = BesovIndex::new(2.5, 2.0, 2.0).unwrap();
        let f = random_band_limited(&g, 1, 5.0, seed);
        let n = besov_norm(&f, &idx, &cp).unwrap().value;
        let nt = besov_norm(&translate(&f, &[x, y]).unwrap(), &idx, &cp).unwrap().value;
        prop_assert!((n - nt).abs() <= 1e-12 * n);
    }

    #[test]
    fn resampling_round_trips(seed in 0u64..10_000) {
        let g = grid();
        let fine = g.refined(2).unwrap();
        let f = random_band_limited(&g, 2, 5.0, seed);
        let back = resample(&resample(&f, &fine).unwrap(), &g).unwrap();
        prop_assert_eq!(back.max_coeff_diff(&f), 0.0);
    }
}
