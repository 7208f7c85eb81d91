//! Bitmap states, Augment/Reduct, and one-flip neighbour generation.

use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex};

use lru::LruCache;
use serde::{Deserialize, Serialize};

use crate::bitmap::StateBitmap;
use crate::error::{Error, Result};
use crate::measures::PerfVector;
use crate::tabular::{Literal, Relation, UniversalTable};

pub const DEFAULT_CACHE_SIZE: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Augment,
    Reduct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchDirection {
    Forward,
    Backward,
}

/// One operator: flip literal bit `bit` on (augment) or off (reduct).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Operator {
    pub kind: OpKind,
    pub bit: usize,
}

impl Operator {
    pub fn apply(&self, b: &StateBitmap) -> Result<StateBitmap> {
        let on = self.kind == OpKind::Augment;
        if b.get(self.bit) == on {
            return Err(Error::Inapplicable { bit: self.bit, set: on });
        }
        Ok(b.with(self.bit, on))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub from: StateBitmap,
    pub op: Operator,
    pub to: StateBitmap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchState {
    pub bitmap: StateBitmap,
    pub perf: Option<PerfVector>,
    pub level: usize,
}

impl SearchState {
    pub fn new(bitmap: StateBitmap, level: usize) -> Self {
        SearchState {
            bitmap,
            perf: None,
            level,
        }
    }
}

/// The dataset a bitmap denotes, as column and row indices into the
/// universal table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetView {
    pub columns: Vec<usize>,
    pub rows: Vec<usize>,
}

impl DatasetView {
    pub fn is_degenerate(&self) -> bool {
        self.columns.is_empty() || self.rows.is_empty()
    }

    pub fn column_names(&self, u: &UniversalTable) -> Vec<String> {
        self.columns.iter().map(|&c| u.schema()[c].clone()).collect()
    }

    /// Row count after expanding multiplicities.
    pub fn expanded_rows(&self, u: &UniversalTable) -> u64 {
        self.rows.iter().map(|&r| u.relation().weight(r)).sum()
    }

    pub fn to_relation(&self, u: &UniversalTable, name: &str) -> Result<Relation> {
        let rel = u.relation();
        let rows = self
            .rows
            .iter()
            .map(|&r| self.columns.iter().map(|&c| rel.rows()[r][c].clone()).collect())
            .collect();
        let out = Relation::new(name, self.column_names(u), rows)?;
        match rel.weights() {
            Some(_) => out.with_weights(self.rows.iter().map(|&r| rel.weight(r)).collect()),
            None => Ok(out),
        }
    }

    pub fn write_csv<W: std::io::Write>(&self, u: &UniversalTable, writer: W, expand: bool) -> Result<()> {
        let rel = u.relation();
        let cells: Vec<Vec<crate::value::Value>> = self
            .rows
            .iter()
            .map(|&r| self.columns.iter().map(|&c| rel.rows()[r][c].clone()).collect())
            .collect();
        crate::tabular::write_rows(
            writer,
            &self.column_names(u),
            cells
                .iter()
                .zip(&self.rows)
                .map(|(row, &r)| (row.as_slice(), if expand { rel.weight(r) } else { 1 })),
        )
    }
}

/// Materializes bitmaps against a universal table, with an LRU cache.
pub struct Materializer<'a> {
    u: &'a UniversalTable,
    cell_bits: Vec<Vec<Option<usize>>>,
    cache: Mutex<LruCache<StateBitmap, Arc<DatasetView>>>,
}

impl<'a> Materializer<'a> {
    pub fn new(u: &'a UniversalTable) -> Self {
        Self::with_cache_size(u, DEFAULT_CACHE_SIZE)
    }

    pub fn with_cache_size(u: &'a UniversalTable, size: usize) -> Self {
        let rel = u.relation();
        let cell_bits = rel
            .rows()
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(c, v)| u.cluster_of(c, v).map(|k| u.bit_range(c).start + k))
                    .collect()
            })
            .collect();
        Materializer {
            u,
            cell_bits,
            cache: Mutex::new(LruCache::new(NonZeroUsize::new(size.max(1)).unwrap())),
        }
    }

    pub fn table(&self) -> &'a UniversalTable {
        self.u
    }

    pub fn bit_count(&self) -> usize {
        self.u.bit_count()
    }

    pub fn full(&self) -> StateBitmap {
        StateBitmap::full(self.bit_count())
    }

    /// Attributes with at least one retained literal.
    pub fn present_columns(&self, b: &StateBitmap) -> Vec<usize> {
        (0..self.u.schema().len())
            .filter(|&c| b.any_in(self.u.bit_range(c)))
            .collect()
    }

    /// Rows where every present attribute is null, unclustered, or in a
    /// retained cluster.
    pub fn materialize(&self, b: &StateBitmap) -> Arc<DatasetView> {
        if let Some(v) = self.cache.lock().unwrap().get(b) {
            return Arc::clone(v);
        }
        let view = Arc::new(self.compute(b));
        self.cache.lock().unwrap().put(b.clone(), Arc::clone(&view));
        view
    }

    fn compute(&self, b: &StateBitmap) -> DatasetView {
        let columns = self.present_columns(b);
        let rows = if columns.is_empty() {
            Vec::new()
        } else {
            (0..self.cell_bits.len())
                .filter(|&r| {
                    columns
                        .iter()
                        .all(|&c| self.cell_bits[r][c].is_none_or(|bit| b.get(bit)))
                })
                .collect()
        };
        DatasetView { columns, rows }
    }

    pub fn is_degenerate(&self, b: &StateBitmap) -> bool {
        self.materialize(b).is_degenerate()
    }

    fn step(&self, s: &SearchState, op: Operator) -> Result<SearchState> {
        let to = op.apply(&s.bitmap)?;
        if self.is_degenerate(&to) {
            return Err(Error::Degenerate { bitmap: to.to_hex() });
        }
        Ok(SearchState::new(to, s.level + 1))
    }

    fn bit_for(&self, lit: &Literal) -> Result<usize> {
        self.u
            .bit_of(lit)
            .ok_or_else(|| Error::Argument(format!("unknown literal {}={}", lit.attribute, lit.value)))
    }

    /// Drops the tuples of `lit`'s cluster; when it was the attribute's last
    /// literal the attribute leaves the schema.
    pub fn apply_reduct(&self, s: &SearchState, lit: &Literal) -> Result<SearchState> {
        let bit = self.bit_for(lit)?;
        self.step(s, Operator { kind: OpKind::Reduct, bit })
    }

    pub fn apply_augment(&self, s: &SearchState, lit: &Literal) -> Result<SearchState> {
        let bit = self.bit_for(lit)?;
        self.step(s, Operator { kind: OpKind::Augment, bit })
    }

    /// All non-degenerate one-flip children in bit order: reducts going
    /// forward, augments going backward.
    pub fn op_gen(&self, s: &SearchState, dir: SearchDirection) -> Vec<(Operator, SearchState)> {
        let (kind, bits): (OpKind, Vec<usize>) = match dir {
            SearchDirection::Forward => (OpKind::Reduct, s.bitmap.ones().collect()),
            SearchDirection::Backward => (OpKind::Augment, s.bitmap.zeros().collect()),
        };
        bits.into_iter()
            .filter_map(|bit| {
                let op = Operator { kind, bit };
                self.step(s, op).ok().map(|c| (op, c))
            })
            .collect()
    }
}
