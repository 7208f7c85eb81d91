//! Fixtures shared by the benchmarks.

use skyforge_core::measures::{MeasureSet, MeasureSpec, RidgeConfig, RidgeEstimator};
use skyforge_core::synth;
use skyforge_core::tabular::DEFAULT_MAX_CLUSTERS;
use skyforge_core::UniversalTable;

/// Compressed 12-column regression table with its ridge estimator and the
/// four ridge measures.
pub fn ridge_instance(rows: usize) -> (UniversalTable, RidgeEstimator, MeasureSet) {
    let rel = synth::regression_table(7, rows, 11);
    let u = UniversalTable::from_relation(rel)
        .with_literals(DEFAULT_MAX_CLUSTERS)
        .and_then(|u| u.compress_rows())
        .expect("synthetic table");
    let est = RidgeEstimator::new(
        &u,
        &RidgeConfig {
            target: "y".into(),
            lambda: 1e-8,
        },
    )
    .expect("numeric target");
    (u, est, ridge_measures(rows as f64))
}

pub fn ridge_measures(rows: f64) -> MeasureSet {
    let spec = |name: &str, hi: f64| MeasureSpec {
        name: name.into(),
        direction: skyforge_core::Direction::Minimize,
        raw_low: 0.0,
        raw_high: hi,
        pl: 0.01,
        pu: 1.0,
        decisive: false,
    };
    MeasureSet::new(
        vec![
            spec("train_error", 10.0),
            spec("holdout_error", 10.0),
            spec("model_size", 12.0),
            spec("train_cost", rows),
        ],
        None,
    )
    .expect("valid measures")
}
