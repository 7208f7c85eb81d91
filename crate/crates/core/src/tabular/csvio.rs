//! CSV ingest and export. Empty cells are nulls; each column takes the first
//! type (integer, float, string) that parses every non-empty cell.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::tabular::Relation;
use crate::value::Value;

pub fn read_csv(path: impl AsRef<Path>, name: &str) -> Result<Relation> {
    let file = std::fs::File::open(path.as_ref())?;
    read_csv_from(file, name)
}

pub fn read_csv_from<R: Read>(reader: R, name: &str) -> Result<Relation> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let schema: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let mut raw: Vec<Vec<String>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != schema.len() {
            return Err(Error::Malformed {
                relation: name.to_string(),
                reason: format!("record {} has {} fields", raw.len() + 1, rec.len()),
            });
        }
        raw.push(rec.iter().map(str::to_string).collect());
    }

    let kinds: Vec<Kind> = (0..schema.len())
        .map(|c| infer(raw.iter().map(|r| r[c].as_str())))
        .collect();
    let rows = raw
        .into_iter()
        .map(|r| {
            r.into_iter()
                .zip(&kinds)
                .map(|(cell, k)| parse(&cell, *k))
                .collect()
        })
        .collect();
    Relation::new(name, schema, rows)
}

#[derive(Clone, Copy)]
enum Kind {
    Int,
    Float,
    Str,
}

fn infer<'a>(cells: impl Iterator<Item = &'a str> + Clone) -> Kind {
    let non_empty = cells.filter(|c| !c.is_empty());
    if non_empty.clone().all(|c| c.trim().parse::<i64>().is_ok()) {
        Kind::Int
    } else if non_empty.clone().all(|c| c.trim().parse::<f64>().is_ok()) {
        Kind::Float
    } else {
        Kind::Str
    }
}

fn parse(cell: &str, kind: Kind) -> Value {
    if cell.is_empty() {
        return Value::Null;
    }
    match kind {
        Kind::Int => Value::Int(cell.trim().parse().unwrap()),
        Kind::Float => Value::Float(cell.trim().parse().unwrap()),
        Kind::Str => Value::Str(cell.to_string()),
    }
}

/// Writes `rel` with a header row. With `expand`, each row is repeated by its
/// weight so compressed tables come back out at their real size.
pub fn write_csv<W: Write>(rel: &Relation, writer: W, expand: bool) -> Result<()> {
    write_rows(
        writer,
        rel.schema(),
        (0..rel.row_count()).map(|i| (rel.rows()[i].as_slice(), if expand { rel.weight(i) } else { 1 })),
    )
}

pub(crate) fn write_rows<'a, W: Write>(
    writer: W,
    header: &[String],
    rows: impl Iterator<Item = (&'a [Value], u64)>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(header)?;
    let mut buf: Vec<String> = Vec::with_capacity(header.len());
    for (row, times) in rows {
        buf.clear();
        buf.extend(row.iter().map(ToString::to_string));
        for _ in 0..times {
            w.write_record(&buf)?;
        }
    }
    w.flush()?;
    Ok(())
}
