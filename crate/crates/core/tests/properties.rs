use std::f64::consts::PI;

use proptest::prelude::*;
use rankspec::hoeffding::{decompose, HoeffdingModel};
use rankspec::simlab::{simulate, SimulationModel};
use rankspec::spectral::lag_window_value;
use rankspec::{dependence_sequence, Bandwidth, LagWindow, MeasureKind, TimeSeries};

fn distinct_series(max_len: usize) -> impl Strategy<Value = TimeSeries> {
    proptest::collection::btree_set(-10_000i32..10_000, 12..max_len)
        .prop_map(|set| set.into_iter().map(|v| v as f64 / 7.0).collect::<Vec<_>>())
        .prop_shuffle()
        .prop_map(|v| TimeSeries::new(v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn time_reversal_preserves_rank_measures(s in distinct_series(60)) {
        let mut rev = s.values().to_vec();
        rev.reverse();
        let rev = TimeSeries::new(rev).unwrap();
        let lags = s.len() - 4;
        for kind in [MeasureKind::KendallTau, MeasureKind::SpearmanRho] {
            let a = dependence_sequence(&s, kind, lags).unwrap();
            let b = dependence_sequence(&rev, kind, lags).unwrap();
            for (x, y) in a.xi.iter().zip(&b.xi) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn estimate_integrates_to_lag_zero(s in distinct_series(60), r in 1.0f64..7.0) {
        // the mean over M > ⌊r⌋ equispaced frequencies on the circle keeps
        // only the k = 0 term of the cosine sum
        let bw = Bandwidth::user(r).unwrap();
        let seq = dependence_sequence(&s, MeasureKind::KendallTau, bw.max_lag()).unwrap();
        let m = 2 * (bw.max_lag() + 1);
        let total: f64 = (0..m)
            .map(|j| lag_window_value(&seq, &LagWindow::PARZEN, &bw, 2.0 * PI * j as f64 / m as f64).unwrap())
            .sum();
        prop_assert!((2.0 * PI * total / m as f64 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn estimate_is_even_and_periodic(s in distinct_series(40), omega in 0.0f64..PI) {
        let bw = Bandwidth::user(5.5).unwrap();
        let seq = dependence_sequence(&s, MeasureKind::SpearmanRho, 5).unwrap();
        let f = |w| lag_window_value(&seq, &LagWindow::BARTLETT, &bw, w).unwrap();
        prop_assert!((f(omega) - f(-omega)).abs() < 1e-12);
        prop_assert!((f(omega) - f(omega + 2.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn decomposition_identity_under_gaussian_pairs(seed in 0u64..1000, k in 1usize..4) {
        let process = SimulationModel::gaussian_ar1(0.6).unwrap();
        let s = simulate(&process, 14, seed).unwrap();
        for kind in [MeasureKind::KendallTau, MeasureKind::SpearmanRho, MeasureKind::Covariance] {
            let model = HoeffdingModel::for_process(&process, kind, k).unwrap();
            let report = decompose(&s, &model, k).unwrap();
            prop_assert!(report.residual.abs() <= 1e-10, "{:?}", report);
        }
    }
}
