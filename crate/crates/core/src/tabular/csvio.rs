use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{Cell, Class, ColumnKind, ColumnSchema, Dataset};
use crate::error::{Error, Result};

/// How a CSV file maps onto a labeled [`Dataset`].
#[derive(Clone, Debug)]
pub struct CsvOptions {
    pub label_column: String,
    /// Label cell value that marks a churner; every other value is a non-churner.
    pub churn_label: String,
    /// Cells equal to this token (or empty) are missing.
    pub missing_token: String,
    pub schema_hint: HashMap<String, ColumnKind>,
}

impl CsvOptions {
    pub fn new(label_column: impl Into<String>, churn_label: impl Into<String>) -> Self {
        CsvOptions {
            label_column: label_column.into(),
            churn_label: churn_label.into(),
            missing_token: "NA".to_string(),
            schema_hint: HashMap::new(),
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, opts)
}

fn parse_decimal(s: &str) -> Option<f64> {
    let t = s.trim();
    // Rust's float parser also accepts "inf"/"nan"; those are not decimal numbers.
    if t.is_empty() || !t.bytes().any(|b| b.is_ascii_digit()) {
        return None;
    }
    t.parse::<f64>().ok().filter(|v| v.is_finite())
}

pub fn read_csv<R: Read>(reader: R, opts: &CsvOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(Error::invalid("missing header line"));
    }
    let label_idx = header
        .iter()
        .position(|h| *h == opts.label_column)
        .ok_or_else(|| Error::invalid(format!("label column '{}' not found in header", opts.label_column)))?;

    let mut raw: Vec<Vec<Option<String>>> = Vec::new();
    let mut labels = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != header.len() {
            return Err(Error::RaggedRow {
                line,
                expected: header.len(),
                found: record.len(),
            });
        }
        let label = record[label_idx].trim();
        if label.is_empty() || label == opts.missing_token {
            return Err(Error::invalid(format!("line {line}: missing label")));
        }
        labels.push(if label == opts.churn_label {
            Class::Churner
        } else {
            Class::NonChurner
        });
        let cells = record
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != label_idx)
            .map(|(_, v)| {
                if v.is_empty() || v == opts.missing_token {
                    None
                } else {
                    Some(v.to_string())
                }
            })
            .collect();
        raw.push(cells);
    }

    let names: Vec<&String> = header
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != label_idx)
        .map(|(_, h)| h)
        .collect();
    let mut schema = Vec::with_capacity(names.len());
    for (j, name) in names.iter().enumerate() {
        let inferred = if raw
            .iter()
            .all(|r| r[j].as_deref().is_none_or(|v| parse_decimal(v).is_some()))
        {
            ColumnKind::Numeric
        } else {
            ColumnKind::Categorical
        };
        let kind = opts.schema_hint.get(name.as_str()).copied().unwrap_or(inferred);
        if kind == ColumnKind::Numeric && inferred == ColumnKind::Categorical {
            return Err(Error::invalid(format!(
                "column '{name}' declared numeric but holds non-numeric cells"
            )));
        }
        let col = match kind {
            ColumnKind::Numeric => ColumnSchema::numeric(name.as_str()),
            ColumnKind::Categorical => {
                let labels: Vec<&str> = raw.iter().filter_map(|r| r[j].as_deref()).collect();
                if labels.is_empty() {
                    // fully missing: no vocabulary
                    ColumnSchema::numeric(name.as_str())
                } else {
                    ColumnSchema::categorical(name.as_str(), labels)
                }
            }
        };
        schema.push(col);
    }

    let rows = raw
        .into_iter()
        .map(|r| {
            r.into_iter()
                .zip(&schema)
                .map(|(v, col)| match (v, col.kind) {
                    (None, _) => Cell::Missing,
                    (Some(v), ColumnKind::Numeric) => Cell::Num(parse_decimal(&v).expect("checked numeric")),
                    (Some(v), ColumnKind::Categorical) => Cell::Cat(v),
                })
                .collect()
        })
        .collect();
    Dataset::new(schema, rows, labels)
}

/// Writes an all-numeric dataset with the label column last ("1" = churner, "0" otherwise).
/// Values use the shortest representation that round-trips.
pub fn write_numeric_csv<W: Write>(ds: &Dataset, label_column: &str, out: W) -> Result<()> {
    let rows = ds.numeric_rows()?;
    let mut wtr = csv::Writer::from_writer(out);
    let mut header = ds.column_names();
    header.push(label_column.to_string());
    wtr.write_record(&header)?;
    for (row, label) in rows.iter().zip(ds.labels()) {
        let mut rec: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        rec.push(if label.is_churner() { "1" } else { "0" }.to_string());
        wtr.write_record(&rec)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}
