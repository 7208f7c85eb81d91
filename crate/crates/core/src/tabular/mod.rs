//! Source tables, the universal table and its literal index.

mod csvio;
mod join;
mod literals;
mod relation;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use csvio::{read_csv, read_csv_from, write_csv};
pub(crate) use csvio::write_rows;
pub use join::{build_universal, JoinSpec};
pub use literals::DEFAULT_MAX_CLUSTERS;
pub use relation::Relation;

use crate::error::{Error, Result};
use crate::value::Value;
use literals::Clustering;

/// Equality condition `attribute = value`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub attribute: String,
    pub value: String,
}

/// The joined table over the union schema, plus per-attribute literals.
///
/// Literal bits are laid out attribute by attribute in schema order, and
/// within an attribute in derivation order.
#[derive(Debug, Clone)]
pub struct UniversalTable {
    relation: Relation,
    provenance: Vec<String>,
    clusters: Vec<Clustering>,
    offsets: Vec<usize>,
}

impl UniversalTable {
    pub(crate) fn from_parts(relation: Relation, provenance: Vec<String>) -> Self {
        let n = relation.arity();
        UniversalTable {
            relation,
            provenance,
            clusters: vec![
                Clustering {
                    representatives: Vec::new(),
                    assignment: HashMap::new(),
                };
                n
            ],
            offsets: vec![0; n + 1],
        }
    }

    /// Wraps a single relation; every attribute's provenance is its name.
    pub fn from_relation(relation: Relation) -> Self {
        let prov = vec![relation.name().to_string(); relation.arity()];
        Self::from_parts(relation, prov)
    }

    pub fn relation(&self) -> &Relation {
        &self.relation
    }

    pub fn schema(&self) -> &[String] {
        self.relation.schema()
    }

    pub fn provenance(&self, attribute: &str) -> Option<&str> {
        self.relation
            .column_index(attribute)
            .map(|c| self.provenance[c].as_str())
    }

    /// Derives literals for every attribute.
    pub fn with_literals(mut self, max_clusters: usize) -> Result<Self> {
        if max_clusters == 0 {
            return Err(Error::Argument("maxClusters must be at least 1".into()));
        }
        self.clusters = (0..self.relation.arity())
            .map(|c| cluster_column(&self.relation, c, max_clusters))
            .collect();
        self.rebuild_offsets();
        Ok(self)
    }

    fn rebuild_offsets(&mut self) {
        self.offsets = std::iter::once(0)
            .chain(self.clusters.iter().scan(0, |acc, c| {
                *acc += c.representatives.len();
                Some(*acc)
            }))
            .collect();
    }

    /// Literals of one attribute in derivation order.
    pub fn literals(&self, attribute: &str) -> Option<Vec<Literal>> {
        self.relation
            .column_index(attribute)
            .map(|c| self.literals_at(c))
    }

    pub fn literals_at(&self, col: usize) -> Vec<Literal> {
        self.clusters[col]
            .representatives
            .iter()
            .map(|v| Literal {
                attribute: self.schema()[col].clone(),
                value: v.to_string(),
            })
            .collect()
    }

    pub fn representatives_at(&self, col: usize) -> &[Value] {
        &self.clusters[col].representatives
    }

    /// Number of literal bits across all attributes.
    pub fn bit_count(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// Bit range of column `col`.
    pub fn bit_range(&self, col: usize) -> std::ops::Range<usize> {
        self.offsets[col]..self.offsets[col + 1]
    }

    /// Column and literal index owning bit `bit`.
    pub fn bit_owner(&self, bit: usize) -> (usize, usize) {
        let col = self.offsets.partition_point(|&o| o <= bit) - 1;
        (col, bit - self.offsets[col])
    }

    pub fn literal_at_bit(&self, bit: usize) -> Literal {
        let (col, i) = self.bit_owner(bit);
        Literal {
            attribute: self.schema()[col].clone(),
            value: self.clusters[col].representatives[i].to_string(),
        }
    }

    pub fn bit_of(&self, lit: &Literal) -> Option<usize> {
        let col = self.relation.column_index(&lit.attribute)?;
        self.clusters[col]
            .representatives
            .iter()
            .position(|v| v.to_string() == lit.value)
            .map(|i| self.offsets[col] + i)
    }

    /// Cluster (literal index) of a cell, if it has one.
    pub fn cluster_of(&self, col: usize, value: &Value) -> Option<usize> {
        self.clusters[col].assignment.get(value).copied()
    }

    /// Replaces every clustered cell by its representative and merges
    /// duplicate rows, summing multiplicities. Literals are kept as they are.
    pub fn compress_rows(&self) -> Result<Self> {
        let rel = &self.relation;
        let mut index: HashMap<Vec<Value>, usize> = HashMap::new();
        let mut rows: Vec<Vec<Value>> = Vec::new();
        let mut weights: Vec<u64> = Vec::new();
        for (i, row) in rel.rows().iter().enumerate() {
            let mapped: Vec<Value> = row
                .iter()
                .enumerate()
                .map(|(c, v)| match self.cluster_of(c, v) {
                    Some(k) => self.clusters[c].representatives[k].clone(),
                    None => v.clone(),
                })
                .collect();
            match index.get(&mapped) {
                Some(&j) => weights[j] += rel.weight(i),
                None => {
                    index.insert(mapped.clone(), rows.len());
                    rows.push(mapped);
                    weights.push(rel.weight(i));
                }
            }
        }
        let relation = Relation::new(rel.name(), rel.schema().to_vec(), rows)?.with_weights(weights)?;
        let clusters = self
            .clusters
            .iter()
            .enumerate()
            .map(|(c, cl)| Clustering {
                representatives: cl.representatives.clone(),
                assignment: relation
                    .adom_at(c)
                    .iter()
                    .filter_map(|v| cl.assignment.get(v).map(|&k| (v.clone(), k)))
                    .collect(),
            })
            .collect();
        Ok(UniversalTable {
            relation,
            provenance: self.provenance.clone(),
            clusters,
            offsets: self.offsets.clone(),
        })
    }
}

/// Literals for one attribute: k-means representatives for numeric columns,
/// most frequent values for everything else.
pub fn derive_literals(u: &UniversalTable, attribute: &str, max_clusters: usize) -> Result<Vec<Literal>> {
    let col = u
        .relation
        .column_index(attribute)
        .ok_or_else(|| Error::Argument(format!("unknown attribute `{attribute}`")))?;
    if max_clusters == 0 {
        return Err(Error::Argument("maxClusters must be at least 1".into()));
    }
    let cl = cluster_column(&u.relation, col, max_clusters);
    Ok(cl
        .representatives
        .iter()
        .map(|v| Literal {
            attribute: attribute.to_string(),
            value: v.to_string(),
        })
        .collect())
}

fn cluster_column(rel: &Relation, col: usize, max_clusters: usize) -> Clustering {
    let adom = rel.adom_at(col);
    if rel.is_numeric(col) {
        literals::cluster_numeric(adom, max_clusters)
    } else {
        let mut counts: HashMap<Value, u64> = HashMap::new();
        for (i, row) in rel.rows().iter().enumerate() {
            if !row[col].is_null() {
                *counts.entry(row[col].clone()).or_default() += rel.weight(i);
            }
        }
        literals::cluster_categorical(adom, &counts, max_clusters)
    }
}
