//! Universal table construction by sequential full outer joins.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tabular::{Relation, UniversalTable};
use crate::value::{JoinKey, Value};

/// Join condition between two named sources: pairs of (left attribute,
/// right attribute) that must be equal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JoinSpec {
    pub left: String,
    pub right: String,
    pub on: Vec<(String, String)>,
}

impl JoinSpec {
    pub fn new(left: &str, right: &str, on: &[(&str, &str)]) -> Self {
        JoinSpec {
            left: left.to_string(),
            right: right.to_string(),
            on: on.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
        }
    }
}

struct Acc {
    schema: Vec<String>,
    provenance: Vec<String>,
    rows: Vec<Vec<Value>>,
    members: Vec<String>,
}

/// Joins `sources` left to right. A source that shares no join key with the
/// accumulated table is appended as an outer join that matches nothing, so
/// its rows come in null-padded.
pub fn build_universal(sources: &[Relation], keys: &[JoinSpec]) -> Result<UniversalTable> {
    let first = sources
        .first()
        .ok_or_else(|| Error::Argument("no source relations".into()))?;
    check_keys(sources, keys)?;

    let mut acc = Acc {
        schema: first.schema().to_vec(),
        provenance: vec![first.name().to_string(); first.arity()],
        rows: first.rows().to_vec(),
        members: vec![first.name().to_string()],
    };
    for rel in &sources[1..] {
        join_into(&mut acc, rel, keys)?;
    }
    let relation = Relation::new("universal", acc.schema, acc.rows)?;
    Ok(UniversalTable::from_parts(relation, acc.provenance))
}

fn check_keys(sources: &[Relation], keys: &[JoinSpec]) -> Result<()> {
    let find = |n: &str| sources.iter().find(|r| r.name() == n);
    for k in keys {
        let (l, r) = match (find(&k.left), find(&k.right)) {
            (Some(l), Some(r)) => (l, r),
            _ => {
                return Err(Error::Argument(format!(
                    "join key references unknown relation pair ({}, {})",
                    k.left, k.right
                )))
            }
        };
        if k.on.is_empty() {
            return Err(Error::Argument(format!("join ({}, {}) has no attribute pairs", k.left, k.right)));
        }
        for (a, b) in &k.on {
            if l.column_index(a).is_none() || r.column_index(b).is_none() {
                return Err(Error::Argument(format!(
                    "join key {}.{a} = {}.{b} references a missing attribute",
                    k.left, k.right
                )));
            }
        }
    }
    Ok(())
}

fn join_into(acc: &mut Acc, rel: &Relation, keys: &[JoinSpec]) -> Result<()> {
    // (accumulated column, rel column) pairs.
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for k in keys {
        let oriented: Vec<(&str, &str)> = if k.right == rel.name() && acc.members.contains(&k.left) {
            k.on.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect()
        } else if k.left == rel.name() && acc.members.contains(&k.right) {
            k.on.iter().map(|(a, b)| (b.as_str(), a.as_str())).collect()
        } else {
            continue;
        };
        let owner = if k.left == rel.name() { &k.right } else { &k.left };
        for (a, b) in oriented {
            let ac = (0..acc.schema.len())
                .find(|&c| acc.schema[c] == a && acc.provenance[c] == *owner)
                .or_else(|| acc.schema.iter().position(|s| s == a))
                .ok_or_else(|| Error::Argument(format!("join attribute `{a}` not in joined table")))?;
            let rc = rel.column_index(b).unwrap();
            if !pairs.contains(&(ac, rc)) {
                pairs.push((ac, rc));
            }
        }
    }

    // Same-named key columns coalesce; every other rel column is appended.
    let coalesced: HashMap<usize, usize> = pairs
        .iter()
        .filter(|(ac, rc)| acc.schema[*ac] == rel.schema()[*rc])
        .map(|&(ac, rc)| (rc, ac))
        .collect();
    let mut appended: Vec<usize> = Vec::new();
    for (rc, a) in rel.schema().iter().enumerate() {
        if coalesced.contains_key(&rc) {
            continue;
        }
        if let Some(ac) = acc.schema.iter().position(|s| s == a) {
            return Err(Error::SchemaConflict {
                attribute: a.clone(),
                first: acc.provenance[ac].clone(),
                second: rel.name().to_string(),
            });
        }
        appended.push(rc);
    }

    let left_width = acc.schema.len();
    let width = left_width + appended.len();
    let mut index: HashMap<Vec<JoinKey>, Vec<usize>> = HashMap::new();
    if !pairs.is_empty() {
        for (i, row) in rel.rows().iter().enumerate() {
            if let Some(k) = key_of(pairs.iter().map(|p| &row[p.1])) {
                index.entry(k).or_default().push(i);
            }
        }
    }

    let mut matched = vec![false; rel.row_count()];
    let mut out = Vec::with_capacity(acc.rows.len());
    for lrow in &acc.rows {
        let hits = if pairs.is_empty() {
            None
        } else {
            key_of(pairs.iter().map(|p| &lrow[p.0])).and_then(|k| index.get(&k))
        };
        match hits {
            Some(hits) => {
                for &ri in hits {
                    matched[ri] = true;
                    let mut row = lrow.clone();
                    row.extend(appended.iter().map(|&rc| rel.rows()[ri][rc].clone()));
                    out.push(row);
                }
            }
            None => {
                let mut row = lrow.clone();
                row.resize(width, Value::Null);
                out.push(row);
            }
        }
    }
    for (ri, rrow) in rel.rows().iter().enumerate() {
        if matched[ri] {
            continue;
        }
        let mut row = vec![Value::Null; width];
        for (&rc, &ac) in &coalesced {
            row[ac] = rrow[rc].clone();
        }
        for (j, &rc) in appended.iter().enumerate() {
            row[left_width + j] = rrow[rc].clone();
        }
        out.push(row);
    }

    acc.schema.extend(appended.iter().map(|&rc| rel.schema()[rc].clone()));
    acc.provenance.extend(std::iter::repeat_n(rel.name().to_string(), appended.len()));
    acc.rows = out;
    acc.members.push(rel.name().to_string());
    Ok(())
}

fn key_of<'a>(cells: impl Iterator<Item = &'a Value>) -> Option<Vec<JoinKey>> {
    cells.map(Value::join_key).collect()
}
