//! The JSON result manifest.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use skyforge_core::search::{SearchOutcome, Termination};
use skyforge_core::{GridPosition, OpKind, UniversalTable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiteralEntry {
    pub bit: usize,
    pub attribute: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureValue {
    pub raw: f64,
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub op: OpKind,
    pub bit: usize,
    pub attribute: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub root: String,
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub bitmap: String,
    pub csv: String,
    pub rows: u64,
    pub columns: Vec<String>,
    pub measures: BTreeMap<String, MeasureValue>,
    pub grid_position: GridPosition,
    /// Some measure sits below its declared lower bound.
    pub below_lower: bool,
    pub diversified: bool,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrunedEntry {
    pub bitmap: String,
    pub parent: String,
    pub direction: skyforge_core::SearchDirection,
    pub pair: (String, String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub config_hash: String,
    pub algorithm: String,
    pub epsilon: f64,
    pub decisive: String,
    pub bits: usize,
    pub universal_rows: usize,
    pub valuations: usize,
    pub cache_hits: usize,
    pub submitted: usize,
    pub iterations: usize,
    pub termination: String,
    pub meet: Option<String>,
    pub partial: bool,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub metadata: Metadata,
    pub literals: Vec<LiteralEntry>,
    pub datasets: Vec<DatasetEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diversified: Option<Vec<String>>,
    pub pruned: Vec<PrunedEntry>,
    /// Kept apart so reruns can be compared without it.
    pub timing: Timing,
}

impl Manifest {
    /// The manifest as JSON with the timing block removed.
    pub fn without_timing(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("manifest serializes");
        v.as_object_mut().unwrap().remove("timing");
        v
    }
}

pub fn literal_entries(u: &UniversalTable) -> Vec<LiteralEntry> {
    (0..u.bit_count())
        .map(|bit| {
            let l = u.literal_at_bit(bit);
            LiteralEntry {
                bit,
                attribute: l.attribute,
                value: l.value,
            }
        })
        .collect()
}

pub fn termination_name(t: Termination) -> &'static str {
    match t {
        Termination::Exhausted => "exhausted",
        Termination::Budget => "budget",
        Termination::Meet => "meet",
        Termination::Failed => "failed",
    }
}

pub fn provenance(u: &UniversalTable, out: &SearchOutcome, b: &skyforge_core::StateBitmap) -> Provenance {
    let (root, path) = out.graph.path_to(b).expect("grid occupants are graph nodes");
    Provenance {
        root: root.to_hex(),
        steps: path
            .iter()
            .map(|t| {
                let l = u.literal_at_bit(t.op.bit);
                Step {
                    op: t.op.kind,
                    bit: t.op.bit,
                    attribute: l.attribute,
                    value: l.value,
                }
            })
            .collect(),
    }
}
