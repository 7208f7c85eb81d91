use std::collections::{BTreeSet, HashSet};

use crate::error::{Error, Result};
use crate::value::Value;

/// A named table with per-attribute active domains.
///
/// `weights` holds row multiplicities once rows have been compressed; a
/// relation without weights counts every row once.
#[derive(Debug, Clone, PartialEq)]
pub struct Relation {
    name: String,
    schema: Vec<String>,
    rows: Vec<Vec<Value>>,
    adoms: Vec<Vec<Value>>,
    weights: Option<Vec<u64>>,
}

impl Relation {
    pub fn new(name: impl Into<String>, schema: Vec<String>, rows: Vec<Vec<Value>>) -> Result<Self> {
        let name = name.into();
        let mut seen = HashSet::new();
        for a in &schema {
            if !seen.insert(a.as_str()) {
                return Err(Error::Malformed {
                    relation: name,
                    reason: format!("duplicate attribute `{a}`"),
                });
            }
        }
        if let Some(i) = rows.iter().position(|r| r.len() != schema.len()) {
            return Err(Error::Malformed {
                relation: name,
                reason: format!("row {i} has {} cells, schema has {}", rows[i].len(), schema.len()),
            });
        }
        let adoms = compute_adoms(schema.len(), &rows);
        Ok(Relation {
            name,
            schema,
            rows,
            adoms,
            weights: None,
        })
    }

    pub fn with_weights(mut self, weights: Vec<u64>) -> Result<Self> {
        if weights.len() != self.rows.len() {
            return Err(Error::Malformed {
                relation: self.name,
                reason: format!("{} weights for {} rows", weights.len(), self.rows.len()),
            });
        }
        self.weights = Some(weights);
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn schema(&self) -> &[String] {
        &self.schema
    }

    pub fn rows(&self) -> &[Vec<Value>] {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn arity(&self) -> usize {
        self.schema.len()
    }

    pub fn column_index(&self, attribute: &str) -> Option<usize> {
        self.schema.iter().position(|a| a == attribute)
    }

    /// Sorted distinct non-null values of column `col`.
    pub fn adom_at(&self, col: usize) -> &[Value] {
        &self.adoms[col]
    }

    pub fn adom(&self, attribute: &str) -> Option<&[Value]> {
        self.column_index(attribute).map(|c| self.adom_at(c))
    }

    pub fn weights(&self) -> Option<&[u64]> {
        self.weights.as_deref()
    }

    pub fn weight(&self, row: usize) -> u64 {
        self.weights.as_ref().map_or(1, |w| w[row])
    }

    /// Row count after expanding multiplicities.
    pub fn expanded_row_count(&self) -> u64 {
        self.weights
            .as_ref()
            .map_or(self.rows.len() as u64, |w| w.iter().sum())
    }

    /// A column holds numbers only (nulls aside) and at least one value.
    pub fn is_numeric(&self, col: usize) -> bool {
        !self.adoms[col].is_empty() && self.adoms[col].iter().all(Value::is_numeric)
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

fn compute_adoms(arity: usize, rows: &[Vec<Value>]) -> Vec<Vec<Value>> {
    let mut sets: Vec<BTreeSet<&Value>> = vec![BTreeSet::new(); arity];
    for row in rows {
        for (c, v) in row.iter().enumerate() {
            if !v.is_null() {
                sets[c].insert(v);
            }
        }
    }
    sets.into_iter()
        .map(|s| s.into_iter().cloned().collect())
        .collect()
}
