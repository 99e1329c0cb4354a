mod common;

use common::{complex_vec, max_diff, naive_dgt, norm, rng};
use num_complex::Complex64;
use proptest::prelude::*;
use stargabor::{make_window, star_window, AnalysisOperator, GaborParams, WindowKind};

#[test]
fn hann_dgt_matches_direct_sum() {
    let params = GaborParams::new(33, 1, 11).unwrap();
    let g = make_window::<f64>(WindowKind::Hann, 33).unwrap();
    let op = AnalysisOperator::new(g.clone(), params, false).unwrap();
    let x = complex_vec(&mut rng(5), 33);
    let naive = naive_dgt(&x, g.samples(), 1, 11, 3);
    assert!(max_diff(op.dgt(&x).unwrap().as_flat(), &naive) <= 1e-10 * norm(&naive));
}

#[test]
fn frame_rows_have_window_norm_and_match_dgt() {
    let params = GaborParams::new(15, 3, 5).unwrap();
    let g = star_window::<f64>(15, 0.0, 3).unwrap().vector;
    let op = AnalysisOperator::new(g, params, false).unwrap();
    let frame = op.frame_matrix().unwrap();
    for i in 0..frame.rows() {
        let n: f64 = frame
            .row(i)
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!((n - 1.0).abs() < 1e-12);
    }
    let x = complex_vec(&mut rng(6), 15);
    let dense = frame.apply(&x).unwrap();
    assert!(max_diff(&dense, op.dgt(&x).unwrap().as_flat()) < 1e-12);
}

#[test]
fn positive_rows_are_a_prefix_of_full_rows() {
    let params = GaborParams::new(45, 1, 9).unwrap();
    let g = make_window::<f64>(WindowKind::Gaussian, 45).unwrap();
    let full = AnalysisOperator::new(g.clone(), params, false).unwrap();
    let half = AnalysisOperator::new(g, params, true).unwrap();
    let x: Vec<f64> = (0..45).map(|i| (i as f64 * 0.3).sin()).collect();
    let (cf, ch) = (full.dgt_real(&x).unwrap(), half.dgt_real(&x).unwrap());
    assert_eq!(ch.rows(), 3);
    for n in 0..45 {
        for m in 0..3 {
            assert!((cf.get(m, n) - ch.get(m, n)).norm() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn dgt_is_linear(seed in any::<u64>(), alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
        let params = GaborParams::new(33, 3, 11).unwrap();
        let op = AnalysisOperator::new(make_window::<f64>(WindowKind::Hamming, 33).unwrap(), params, false).unwrap();
        let mut r = rng(seed);
        let (x, z) = (complex_vec(&mut r, 33), complex_vec(&mut r, 33));
        let comb: Vec<Complex64> = x.iter().zip(&z).map(|(p, q)| p * alpha + q * beta).collect();
        let lhs = op.dgt(&comb).unwrap();
        let (cx, cz) = (op.dgt(&x).unwrap(), op.dgt(&z).unwrap());
        let rhs: Vec<Complex64> = cx.as_flat().iter().zip(cz.as_flat()).map(|(p, q)| p * alpha + q * beta).collect();
        prop_assert!(max_diff(lhs.as_flat(), &rhs) <= 1e-12 * (1.0 + norm(&rhs)));
    }
}
