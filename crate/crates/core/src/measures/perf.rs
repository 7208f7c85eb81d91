use serde::{Deserialize, Serialize};

/// One measure's knowledge for a state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PerfEntry {
    Valuated(f64),
    Bounded { lo: f64, hi: f64 },
    Unvaluated,
}

impl PerfEntry {
    pub fn lower(&self) -> Option<f64> {
        match *self {
            PerfEntry::Valuated(v) => Some(v),
            PerfEntry::Bounded { lo, .. } => Some(lo),
            PerfEntry::Unvaluated => None,
        }
    }

    pub fn upper(&self) -> Option<f64> {
        match *self {
            PerfEntry::Valuated(v) => Some(v),
            PerfEntry::Bounded { hi, .. } => Some(hi),
            PerfEntry::Unvaluated => None,
        }
    }

    pub fn value(&self) -> Option<f64> {
        match *self {
            PerfEntry::Valuated(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerfVector(pub Vec<PerfEntry>);

impl PerfVector {
    pub fn valuated(values: &[f64]) -> Self {
        PerfVector(values.iter().map(|&v| PerfEntry::Valuated(v)).collect())
    }

    pub fn unvaluated(n: usize) -> Self {
        PerfVector(vec![PerfEntry::Unvaluated; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// All values, if every entry is valuated.
    pub fn values(&self) -> Option<Vec<f64>> {
        self.0.iter().map(PerfEntry::value).collect()
    }

    pub fn is_valuated(&self) -> bool {
        self.0.iter().all(|e| matches!(e, PerfEntry::Valuated(_)))
    }
}
