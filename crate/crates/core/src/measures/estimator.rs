use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{LogEntry, MeasureSet, RawMeasures, TestLog};
use crate::bitmap::StateBitmap;
use crate::error::{Error, Result};
use crate::operators::{DatasetView, Materializer};
use crate::tabular::UniversalTable;

/// Anything that maps a dataset to raw measure values in a single call.
/// Implementations must be deterministic.
pub trait Estimator: Send + Sync {
    /// Measures this estimator reports.
    fn measures(&self) -> Vec<String>;

    /// Feature columns (besides the target) a dataset needs before the
    /// estimator can say anything about it.
    fn min_feature_columns(&self) -> usize {
        0
    }

    fn estimate(
        &self,
        u: &UniversalTable,
        bitmap: &StateBitmap,
        view: &DatasetView,
    ) -> std::result::Result<RawMeasures, String>;
}

/// Runs the estimator on one bitmap and normalizes its output.
pub(crate) fn fresh_entry(
    m: &Materializer<'_>,
    est: &dyn Estimator,
    measures: &MeasureSet,
    b: &StateBitmap,
) -> Result<LogEntry> {
    let view = m.materialize(b);
    let fail = |reason: String| Error::Estimator {
        bitmap: b.to_hex(),
        reason,
    };
    let raw = est.estimate(m.table(), b, &view).map_err(fail)?;
    let (values, raw) = measures.normalize_all(&raw).map_err(|e| match e {
        Error::Estimator { reason, .. } => fail(reason),
        other => other,
    })?;
    Ok(LogEntry {
        bitmap: b.clone(),
        values,
        raw,
    })
}

/// Normalized vector for `b`, from the log when present. The flag reports
/// whether the estimator was invoked.
pub fn valuate(
    m: &Materializer<'_>,
    est: &dyn Estimator,
    measures: &MeasureSet,
    log: &mut TestLog,
    b: &StateBitmap,
) -> Result<(Vec<f64>, bool)> {
    if let Some(e) = log.get(b) {
        return Ok((e.values.clone(), false));
    }
    let entry = fresh_entry(m, est, measures, b)?;
    let values = entry.values.clone();
    log.append(entry)?;
    Ok((values, true))
}

/// Estimator backed by a closure over the bitmap.
pub struct FnEstimator<F> {
    names: Vec<String>,
    min_features: usize,
    f: F,
}

impl<F> FnEstimator<F>
where
    F: Fn(&StateBitmap) -> Vec<f64> + Send + Sync,
{
    pub fn new(names: Vec<String>, f: F) -> Self {
        FnEstimator {
            names,
            min_features: 0,
            f,
        }
    }

    pub fn requiring_features(mut self, n: usize) -> Self {
        self.min_features = n;
        self
    }
}

impl<F> Estimator for FnEstimator<F>
where
    F: Fn(&StateBitmap) -> Vec<f64> + Send + Sync,
{
    fn measures(&self) -> Vec<String> {
        self.names.clone()
    }

    fn min_feature_columns(&self) -> usize {
        self.min_features
    }

    fn estimate(&self, _: &UniversalTable, b: &StateBitmap, _: &DatasetView) -> std::result::Result<RawMeasures, String> {
        let v = (self.f)(b);
        if v.len() != self.names.len() {
            return Err(format!("closure returned {} values for {} measures", v.len(), self.names.len()));
        }
        Ok(self.names.iter().cloned().zip(v).collect())
    }
}

/// Serialized form of a lookup estimator: raw values per hex bitmap.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LookupTable {
    pub measures: Vec<String>,
    pub entries: Vec<LookupRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LookupRow {
    pub bitmap: String,
    pub values: Vec<f64>,
}

/// Table of raw vectors keyed by bitmap. Unknown bitmaps fail unless a
/// default vector is set.
#[derive(Debug, Clone)]
pub struct LookupEstimator {
    names: Vec<String>,
    table: HashMap<StateBitmap, Vec<f64>>,
    default: Option<Vec<f64>>,
}

impl LookupEstimator {
    pub fn new(names: Vec<String>) -> Self {
        LookupEstimator {
            names,
            table: HashMap::new(),
            default: None,
        }
    }

    pub fn insert(&mut self, b: StateBitmap, values: Vec<f64>) -> Result<()> {
        if values.len() != self.names.len() {
            return Err(Error::Argument(format!(
                "lookup row for {b} has {} values, expected {}",
                values.len(),
                self.names.len()
            )));
        }
        self.table.insert(b, values);
        Ok(())
    }

    pub fn with_default(mut self, values: Vec<f64>) -> Self {
        self.default = Some(values);
        self
    }

    /// Builds from the serialized table; `bits` is the bitmap length.
    pub fn from_table(t: &LookupTable, bits: usize) -> Result<Self> {
        let mut e = LookupEstimator::new(t.measures.clone());
        for row in &t.entries {
            e.insert(StateBitmap::from_hex(&row.bitmap, bits)?, row.values.clone())?;
        }
        if let Some(d) = &t.default {
            if d.len() != t.measures.len() {
                return Err(Error::Argument("lookup default has the wrong length".into()));
            }
            e.default = Some(d.clone());
        }
        Ok(e)
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

impl Estimator for LookupEstimator {
    fn measures(&self) -> Vec<String> {
        self.names.clone()
    }

    fn estimate(&self, _: &UniversalTable, b: &StateBitmap, _: &DatasetView) -> std::result::Result<RawMeasures, String> {
        let v = self
            .table
            .get(b)
            .or(self.default.as_ref())
            .ok_or_else(|| format!("no lookup entry for {}", b.to_hex()))?;
        Ok(self.names.iter().cloned().zip(v.iter().copied()).collect())
    }
}
