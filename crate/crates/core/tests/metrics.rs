mod common;

use common::*;
use mtsg::metrics::{arrmse, pearson_matrix, rmse, rpd, rpd_band, rpt, rrmse, RpdBand};
use ndarray::Array2;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn metrics_match_brute_force(seed in 0u64..100_000, n in 3usize..50, d in 1usize..5) {
        let mut r = rng(seed);
        let a = uniform_matrix(&mut r, n, d, -10.0, 10.0);
        let p = &a + &uniform_matrix(&mut r, n, d, -2.0, 2.0);
        for t in 0..d {
            let e = rmse(a.column(t), p.column(t)).unwrap();
            prop_assert!((e - rmse_oracle(a.column(t), p.column(t))).abs() < 1e-10);
            let rr = rrmse(a.column(t), p.column(t)).unwrap().unwrap();
            prop_assert!((rr - rrmse_oracle(a.column(t), p.column(t))).abs() < 1e-10);
            let sd = sd_oracle(a.column(t));
            prop_assert!((rpd(sd, e).unwrap() - sd / e).abs() < 1e-10);
        }
        prop_assert!((arrmse(a.view(), p.view(), None).unwrap() - arrmse_oracle(a.view(), p.view())).abs() < 1e-10);
        let m = pearson_matrix(a.view(), None).unwrap();
        for i in 0..d {
            for j in 0..d {
                prop_assert!((m[[i, j]] - pearson_oracle(a.column(i), a.column(j))).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn mean_predictor_scores_one() {
    let mut r = rng(4);
    let a = uniform_matrix(&mut r, 30, 3, 0.0, 5.0);
    let means = a.mean_axis(ndarray::Axis(0)).unwrap();
    let p = Array2::from_shape_fn((30, 3), |(_, t)| means[t]);
    assert!((arrmse(a.view(), p.view(), None).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn rpt_direction_and_bands() {
    assert!(rpt(2.0, 1.0).unwrap() > 1.0);
    assert!((rpt(7.8, 7.6).unwrap() - 1.026).abs() < 1e-3);
    assert!(rpt(1.0, 0.0).is_err());
    assert_eq!(rpd_band(rpd(4.2, 2.1).unwrap()).unwrap(), RpdBand::VeryGood);
    assert_eq!(rpd_band(1.24).unwrap(), RpdBand::Poor);
    assert_eq!(rpd_band(1.80).unwrap(), RpdBand::Good);
}

#[test]
fn constant_column_is_named() {
    let y = Array2::from_shape_fn((5, 2), |(i, t)| if t == 1 { 3.0 } else { i as f64 });
    let names = vec!["ok".to_string(), "flat".to_string()];
    let err = pearson_matrix(y.view(), Some(&names)).unwrap_err();
    assert!(err.to_string().contains("flat"));
}
