//! Measure declarations, normalization, estimators and the test log.

mod correlation;
pub(crate) mod estimator;
mod log;
mod perf;
mod ridge;
mod subprocess;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use correlation::{estimate_bounds, spearman, CorrelationGraph, Edge, SUPPORT_NODE};
pub use estimator::{valuate, Estimator, FnEstimator, LookupEstimator, LookupRow, LookupTable};
pub use log::{euclid, LogEntry, TestLog};
pub use perf::{PerfEntry, PerfVector};
pub use ridge::{RidgeConfig, RidgeEstimator, RIDGE_MEASURES};
pub use subprocess::{SubprocessConfig, SubprocessEstimator, DEFAULT_TIMEOUT_SECS};

use crate::error::{Error, Result};

/// Raw estimator output keyed by measure name.
pub type RawMeasures = BTreeMap<String, f64>;

/// Lower clamp that keeps normalized values strictly positive.
pub const NORMALIZED_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpec {
    pub name: String,
    pub direction: Direction,
    pub raw_low: f64,
    pub raw_high: f64,
    pub pl: f64,
    pub pu: f64,
    #[serde(default)]
    pub decisive: bool,
}

impl MeasureSpec {
    /// Minimize-direction measure on raw range [0, 1].
    pub fn unit(name: &str, pl: f64, pu: f64) -> Self {
        MeasureSpec {
            name: name.to_string(),
            direction: Direction::Minimize,
            raw_low: 0.0,
            raw_high: 1.0,
            pl,
            pu,
            decisive: false,
        }
    }

    /// Maps a raw value into (0, 1], smaller is better. Maximize measures are
    /// flipped around `raw_high` first.
    pub fn normalize(&self, raw: f64) -> Result<f64> {
        if !raw.is_finite() {
            return Err(Error::Estimator {
                bitmap: String::new(),
                reason: format!("measure `{}` returned non-finite value {raw}", self.name),
            });
        }
        let span = self.raw_high - self.raw_low;
        let v = match self.direction {
            Direction::Minimize => (raw - self.raw_low) / span,
            Direction::Maximize => (self.raw_high - raw) / span,
        };
        Ok(v.clamp(NORMALIZED_FLOOR, 1.0))
    }

    fn validate(&self) -> Result<()> {
        let bad = |why: &str| Err(Error::Config(format!("measure `{}`: {why}", self.name)));
        if !(self.raw_low.is_finite() && self.raw_high.is_finite()) || self.raw_high <= self.raw_low {
            return bad("raw_high must exceed raw_low");
        }
        if !(self.pl > 0.0 && self.pl <= self.pu && self.pu <= 1.0) {
            return bad("bounds must satisfy 0 < pl <= pu <= 1");
        }
        Ok(())
    }
}

/// An ordered measure set with exactly one decisive measure.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSet {
    specs: Vec<MeasureSpec>,
    decisive: usize,
}

impl MeasureSet {
    /// The decisive measure is the one flagged in `specs`, the one named by
    /// `decisive_override`, or else the last one.
    pub fn new(mut specs: Vec<MeasureSpec>, decisive_override: Option<&str>) -> Result<Self> {
        if specs.is_empty() {
            return Err(Error::Config("at least one measure is required".into()));
        }
        for (i, s) in specs.iter().enumerate() {
            s.validate()?;
            if specs[..i].iter().any(|t| t.name == s.name) {
                return Err(Error::Config(format!("duplicate measure `{}`", s.name)));
            }
        }
        let decisive = match decisive_override {
            Some(name) => specs
                .iter()
                .position(|s| s.name == name)
                .ok_or_else(|| Error::Config(format!("decisive measure `{name}` is not declared")))?,
            None => {
                let flagged: Vec<usize> = (0..specs.len()).filter(|&i| specs[i].decisive).collect();
                match flagged.as_slice() {
                    [] => specs.len() - 1,
                    [i] => *i,
                    _ => return Err(Error::Config("more than one measure is flagged decisive".into())),
                }
            }
        };
        for (i, s) in specs.iter_mut().enumerate() {
            s.decisive = i == decisive;
        }
        Ok(MeasureSet { specs, decisive })
    }

    pub fn specs(&self) -> &[MeasureSpec] {
        &self.specs
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    pub fn decisive(&self) -> usize {
        self.decisive
    }

    pub fn names(&self) -> Vec<String> {
        self.specs.iter().map(|s| s.name.clone()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.specs.iter().position(|s| s.name == name)
    }

    /// Normalizes a raw estimator result; every declared measure must be present.
    pub fn normalize_all(&self, raw: &RawMeasures) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut norm = Vec::with_capacity(self.len());
        let mut kept = Vec::with_capacity(self.len());
        for s in &self.specs {
            let r = *raw.get(&s.name).ok_or_else(|| Error::Estimator {
                bitmap: String::new(),
                reason: format!("missing measure `{}`", s.name),
            })?;
            norm.push(s.normalize(r)?);
            kept.push(r);
        }
        Ok((norm, kept))
    }

    /// True iff every value is at most its measure's upper bound.
    pub fn within_upper(&self, values: &[f64]) -> bool {
        values.iter().zip(&self.specs).all(|(v, s)| *v <= s.pu)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(direction: Direction, lo: f64, hi: f64) -> MeasureSpec {
        MeasureSpec {
            name: "m".into(),
            direction,
            raw_low: lo,
            raw_high: hi,
            pl: 0.01,
            pu: 1.0,
            decisive: false,
        }
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(spec(Direction::Minimize, 0.0, 3600.0).normalize(1800.0).unwrap(), 0.5);
        assert_eq!(spec(Direction::Minimize, 0.0, 3600.0).normalize(0.0).unwrap(), 1e-6);
        let acc = spec(Direction::Maximize, 0.0, 1.0).normalize(0.65).unwrap();
        assert!((acc - 0.35).abs() < 1e-12);
        assert!(spec(Direction::Minimize, 0.0, 1.0).normalize(f64::NAN).is_err());
        assert_eq!(spec(Direction::Minimize, 0.0, 1.0).normalize(7.0).unwrap(), 1.0);
    }

    #[test]
    fn decisive_defaults_to_last_and_rejects_two() {
        let a = MeasureSpec::unit("a", 0.1, 1.0);
        let b = MeasureSpec::unit("b", 0.1, 1.0);
        let set = MeasureSet::new(vec![a.clone(), b.clone()], None).unwrap();
        assert_eq!(set.decisive(), 1);
        let set = MeasureSet::new(vec![a.clone(), b.clone()], Some("a")).unwrap();
        assert_eq!(set.decisive(), 0);
        assert!(set.specs()[0].decisive && !set.specs()[1].decisive);
        let mut a2 = a.clone();
        a2.decisive = true;
        let mut b2 = b.clone();
        b2.decisive = true;
        assert!(MeasureSet::new(vec![a2, b2], None).is_err());
        assert!(MeasureSet::new(vec![a.clone(), a], None).is_err());
    }

    #[test]
    fn rejects_bad_bounds() {
        let mut a = MeasureSpec::unit("a", 0.0, 1.0);
        assert!(MeasureSet::new(vec![a.clone()], None).is_err());
        a.pl = 0.5;
        a.pu = 0.4;
        assert!(MeasureSet::new(vec![a], None).is_err());
    }
}
