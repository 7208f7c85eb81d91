//! Closed-form ridge regression used as a built-in, deterministic estimator.

use serde::{Deserialize, Serialize};

use super::{Estimator, RawMeasures};
use crate::bitmap::StateBitmap;
use crate::error::{Error, Result};
use crate::operators::DatasetView;
use crate::tabular::UniversalTable;

pub const RIDGE_MEASURES: [&str; 4] = ["train_error", "holdout_error", "train_cost", "model_size"];

/// Rows whose universal index is congruent to this modulo `HOLDOUT_MOD` are held out.
const HOLDOUT_MOD: usize = 5;
const HOLDOUT_REM: usize = 4;

fn default_lambda() -> f64 {
    1e-8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RidgeConfig {
    pub target: String,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
}

/// Reports, for the regression of the target on the dataset's other columns:
/// `train_error` (RMSE on the 80% split), `holdout_error` (RMSE on the rest),
/// `train_cost` (expanded row count) and `model_size` (feature count).
/// Datasets it cannot fit get the target's standard deviation as error.
#[derive(Debug, Clone)]
pub struct RidgeEstimator {
    target: usize,
    lambda: f64,
    baseline: f64,
}

impl RidgeEstimator {
    pub fn new(u: &UniversalTable, cfg: &RidgeConfig) -> Result<Self> {
        let rel = u.relation();
        let target = rel
            .column_index(&cfg.target)
            .ok_or_else(|| Error::Config(format!("target `{}` is not an attribute", cfg.target)))?;
        if !rel.is_numeric(target) {
            return Err(Error::Config(format!("target `{}` is not numeric", cfg.target)));
        }
        if !(cfg.lambda >= 0.0 && cfg.lambda.is_finite()) {
            return Err(Error::Config("ridge lambda must be finite and non-negative".into()));
        }
        let (mut sw, mut s, mut ss) = (0.0, 0.0, 0.0);
        for (i, row) in rel.rows().iter().enumerate() {
            if let Some(y) = row[target].as_f64() {
                let w = rel.weight(i) as f64;
                sw += w;
                s += w * y;
                ss += w * y * y;
            }
        }
        let mean = if sw > 0.0 { s / sw } else { 0.0 };
        let baseline = if sw > 0.0 { (ss / sw - mean * mean).max(0.0).sqrt() } else { 0.0 };
        Ok(RidgeEstimator {
            target,
            lambda: cfg.lambda,
            baseline,
        })
    }

    pub fn target_column(&self) -> usize {
        self.target
    }
}

impl Estimator for RidgeEstimator {
    fn measures(&self) -> Vec<String> {
        RIDGE_MEASURES.iter().map(|s| s.to_string()).collect()
    }

    fn min_feature_columns(&self) -> usize {
        1
    }

    fn estimate(&self, u: &UniversalTable, _: &StateBitmap, view: &DatasetView) -> std::result::Result<RawMeasures, String> {
        let features: Vec<usize> = view.columns.iter().copied().filter(|&c| c != self.target).collect();
        let (train, holdout) = if view.columns.contains(&self.target) {
            fit(u, self.target, &features, &view.rows, self.lambda)
        } else {
            None
        }
        .unwrap_or((self.baseline, self.baseline));
        Ok([
            ("train_error", train),
            ("holdout_error", holdout),
            ("train_cost", view.expanded_rows(u) as f64),
            ("model_size", features.len() as f64),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect())
    }
}

/// Weighted ridge fit on standardized features. Returns (train, holdout) RMSE.
fn fit(u: &UniversalTable, target: usize, features: &[usize], rows: &[usize], lambda: f64) -> Option<(f64, f64)> {
    let rel = u.relation();
    let rows: Vec<usize> = rows.iter().copied().filter(|&r| !rel.rows()[r][target].is_null()).collect();
    let is_train = |r: usize| r % HOLDOUT_MOD != HOLDOUT_REM;
    let train: Vec<usize> = rows.iter().copied().filter(|&r| is_train(r)).collect();
    let w = |r: usize| rel.weight(r) as f64;
    let total: f64 = train.iter().map(|&r| w(r)).sum();
    if total < 2.0 {
        return None;
    }

    let encode = |r: usize, c: usize| -> Option<f64> {
        let v = &rel.rows()[r][c];
        v.as_f64()
            .or_else(|| (!v.is_null()).then(|| rel.adom_at(c).binary_search(v).map_or(0.0, |i| i as f64)))
    };
    let d = features.len();
    // Column means for imputation and centering, then scales.
    let mut mean = vec![0.0; d];
    let mut scale = vec![0.0; d];
    for (j, &c) in features.iter().enumerate() {
        let (mut sw, mut s) = (0.0, 0.0);
        for &r in &train {
            if let Some(x) = encode(r, c) {
                sw += w(r);
                s += w(r) * x;
            }
        }
        mean[j] = if sw > 0.0 { s / sw } else { 0.0 };
    }
    let row_x = |r: usize| -> Vec<f64> {
        features
            .iter()
            .enumerate()
            .map(|(j, &c)| encode(r, c).unwrap_or(mean[j]) - mean[j])
            .collect()
    };
    let y_of = |r: usize| rel.rows()[r][target].as_f64().unwrap();
    let y_mean = train.iter().map(|&r| w(r) * y_of(r)).sum::<f64>() / total;
    for &r in &train {
        for (j, x) in row_x(r).into_iter().enumerate() {
            scale[j] += w(r) * x * x;
        }
    }
    for s in &mut scale {
        *s = (*s / total).sqrt();
    }

    let z = |r: usize| -> Vec<f64> {
        row_x(r)
            .into_iter()
            .zip(&scale)
            .map(|(x, s)| if *s > 0.0 { x / s } else { 0.0 })
            .collect()
    };
    let mut a = vec![vec![0.0; d]; d];
    let mut b = vec![0.0; d];
    for &r in &train {
        let zr = z(r);
        let yr = y_of(r) - y_mean;
        for i in 0..d {
            b[i] += w(r) * zr[i] * yr;
            for j in 0..d {
                a[i][j] += w(r) * zr[i] * zr[j];
            }
        }
    }
    for (i, row) in a.iter_mut().enumerate() {
        row[i] += lambda * total + if scale[i] > 0.0 { 0.0 } else { 1.0 };
    }
    let beta = solve(a, b)?;

    let rmse = |set: &[usize]| -> Option<f64> {
        let (mut sw, mut se) = (0.0, 0.0);
        for &r in set {
            let pred = y_mean + z(r).iter().zip(&beta).map(|(x, b)| x * b).sum::<f64>();
            let e = y_of(r) - pred;
            sw += w(r);
            se += w(r) * e * e;
        }
        (sw > 0.0).then(|| (se / sw).sqrt())
    };
    let holdout: Vec<usize> = rows.iter().copied().filter(|&r| !is_train(r)).collect();
    let tr = rmse(&train)?;
    Some((tr, rmse(&holdout).unwrap_or(tr)))
}

/// Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[r][k] -= f * a[col][k];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}
