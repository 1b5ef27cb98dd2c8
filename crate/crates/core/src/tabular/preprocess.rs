use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{Cell, Class, ColumnKind, ColumnSchema, Dataset};
use crate::error::{Error, Result};
use crate::textfmt::{fmt17, parse_f64};

pub const DEFAULT_DROP_THRESHOLD: f64 = 0.95;

#[derive(Clone, Debug, PartialEq)]
pub enum ImputeValue {
    Mean(f64),
    Mode(String),
}

/// Per-column `(name, min, max)` fitted by [`normalize_minmax`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MinMaxParams {
    pub columns: Vec<(String, f64, f64)>,
}

/// Drops columns whose missing fraction is strictly greater than `threshold`.
pub fn drop_sparse_columns(ds: &Dataset, threshold: f64) -> Result<(Dataset, Vec<(String, f64)>)> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::invalid(format!("drop threshold {threshold} outside (0, 1]")));
    }
    let mut keep = Vec::new();
    let mut dropped = Vec::new();
    for (j, col) in ds.schema().iter().enumerate() {
        let frac = ds.missing_fraction(j);
        if frac > threshold {
            dropped.push((col.name.clone(), frac));
        } else {
            keep.push(j);
        }
    }
    if keep.is_empty() {
        return Err(Error::invalid("every column exceeds the missing-value threshold"));
    }
    Ok((select_columns(ds, &keep)?, dropped))
}

fn select_columns(ds: &Dataset, keep: &[usize]) -> Result<Dataset> {
    let schema = keep.iter().map(|&j| ds.schema()[j].clone()).collect();
    let rows = ds
        .rows()
        .iter()
        .map(|r| keep.iter().map(|&j| r[j].clone()).collect())
        .collect();
    Dataset::new(schema, rows, ds.labels().to_vec())
}

fn fit_impute_value(ds: &Dataset, j: usize) -> Result<ImputeValue> {
    let col = &ds.schema()[j];
    match col.kind {
        ColumnKind::Numeric => {
            let (sum, count) = ds
                .rows()
                .iter()
                .filter_map(|r| r[j].as_num())
                .fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
            if count == 0 {
                return Err(Error::EmptyColumn(col.name.clone()));
            }
            Ok(ImputeValue::Mean(sum / count as f64))
        }
        ColumnKind::Categorical => {
            let mut freq: BTreeMap<&str, usize> = BTreeMap::new();
            for r in ds.rows() {
                if let Cell::Cat(s) = &r[j] {
                    *freq.entry(s.as_str()).or_default() += 1;
                }
            }
            // BTreeMap iterates in lexicographic order; keeping the first maximum
            // resolves ties toward the smallest label.
            let mut best: Option<(&str, usize)> = None;
            for (label, n) in freq {
                if best.is_none_or(|(_, b)| n > b) {
                    best = Some((label, n));
                }
            }
            best.map(|(l, _)| ImputeValue::Mode(l.to_string()))
                .ok_or_else(|| Error::EmptyColumn(col.name.clone()))
        }
    }
}

fn fill(cell: &Cell, value: &ImputeValue) -> Cell {
    match (cell, value) {
        (Cell::Missing, ImputeValue::Mean(m)) => Cell::Num(*m),
        (Cell::Missing, ImputeValue::Mode(s)) => Cell::Cat(s.clone()),
        (c, _) => c.clone(),
    }
}

/// Replaces missing numeric cells with the column mean and missing categorical
/// cells with the column mode.
pub fn impute(ds: &Dataset) -> Result<(Dataset, Vec<(String, ImputeValue)>)> {
    let values = (0..ds.n_cols())
        .map(|j| fit_impute_value(ds, j))
        .collect::<Result<Vec<_>>>()?;
    let out = apply_impute(ds, &values)?;
    let report = ds.schema().iter().map(|c| c.name.clone()).zip(values).collect();
    Ok((out, report))
}

fn apply_impute(ds: &Dataset, values: &[ImputeValue]) -> Result<Dataset> {
    let rows = ds
        .rows()
        .iter()
        .map(|r| r.iter().zip(values).map(|(c, v)| fill(c, v)).collect())
        .collect();
    Dataset::new(ds.schema().to_vec(), rows, ds.labels().to_vec())
}

/// Expands each categorical column into one 0/1 column per category, in place,
/// using the categories recorded in the schema.
pub fn one_hot_encode(ds: &Dataset) -> Result<Dataset> {
    encode_with(ds, ds.schema())
}

/// Encodes `ds` with a fitted vocabulary. Labels absent from the vocabulary
/// produce an all-zero block.
fn encode_with(ds: &Dataset, vocab: &[ColumnSchema]) -> Result<Dataset> {
    if ds.has_missing() {
        return Err(Error::invalid("one-hot encoding requires imputed data"));
    }
    let mut names = Vec::new();
    for col in vocab {
        match col.kind {
            ColumnKind::Numeric => names.push(col.name.clone()),
            ColumnKind::Categorical => names.extend(col.categories.iter().map(|c| format!("{}={}", col.name, c))),
        }
    }
    let rows = ds
        .rows()
        .iter()
        .map(|r| {
            let mut out = Vec::with_capacity(names.len());
            for (cell, col) in r.iter().zip(vocab) {
                match (col.kind, cell) {
                    (ColumnKind::Numeric, Cell::Num(v)) => out.push(*v),
                    (ColumnKind::Categorical, cell) => {
                        let label = match cell {
                            Cell::Cat(s) => s.clone(),
                            Cell::Num(v) => format!("{v}"),
                            Cell::Missing => unreachable!("checked above"),
                        };
                        out.extend(col.categories.iter().map(|c| if *c == label { 1.0 } else { 0.0 }));
                    }
                    _ => {
                        return Err(Error::invalid(format!(
                            "column '{}' is numeric at fit time but holds a category",
                            col.name
                        )))
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::from_matrix(names, rows, ds.labels().to_vec())
}

fn scale(x: f64, min: f64, max: f64) -> f64 {
    if max == min {
        0.0
    } else {
        (x - min) / (max - min)
    }
}

/// Min-max scaling to [0, 1]. Without `params` the per-column extremes are
/// fitted on `ds`; with `params` they are applied and results are clamped.
pub fn normalize_minmax(ds: &Dataset, params: Option<&MinMaxParams>) -> Result<(Dataset, MinMaxParams)> {
    let rows = ds.numeric_rows()?;
    let fitted = match params {
        Some(p) => {
            if p.columns.len() != ds.n_cols() {
                return Err(Error::invalid(format!(
                    "min-max parameters cover {} columns, dataset has {}",
                    p.columns.len(),
                    ds.n_cols()
                )));
            }
            p.clone()
        }
        None => {
            let columns = ds
                .schema()
                .iter()
                .enumerate()
                .map(|(j, col)| {
                    let (lo, hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                        (lo.min(r[j]), hi.max(r[j]))
                    });
                    let (lo, hi) = if rows.is_empty() { (0.0, 0.0) } else { (lo, hi) };
                    (col.name.clone(), lo, hi)
                })
                .collect();
            MinMaxParams { columns }
        }
    };
    let clamp = params.is_some();
    let scaled = rows
        .into_iter()
        .map(|r| {
            r.into_iter()
                .zip(&fitted.columns)
                .map(|(x, (_, lo, hi))| {
                    let v = scale(x, *lo, *hi);
                    if clamp {
                        v.clamp(0.0, 1.0)
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect();
    Ok((
        Dataset::from_matrix(ds.column_names(), scaled, ds.labels().to_vec())?,
        fitted,
    ))
}

/// Everything fitted by the preprocessing chain. Serializes to a tab-separated,
/// line-oriented text format.
#[derive(Clone, Debug, PartialEq)]
pub struct PreprocessReport {
    pub threshold: f64,
    pub dropped_columns: Vec<(String, f64)>,
    pub imputed_values: Vec<(String, ImputeValue)>,
    /// Surviving columns with their fitted category vocabularies.
    pub columns: Vec<ColumnSchema>,
    pub minmax_params: MinMaxParams,
    pub encoded_width: usize,
}

impl PreprocessReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "threshold\t{}", fmt17(self.threshold)).unwrap();
        for (name, frac) in &self.dropped_columns {
            writeln!(s, "dropped\t{name}\t{}", fmt17(*frac)).unwrap();
        }
        for col in &self.columns {
            match col.kind {
                ColumnKind::Numeric => writeln!(s, "column\t{}\tnumeric", col.name).unwrap(),
                ColumnKind::Categorical => {
                    writeln!(s, "column\t{}\tcategorical\t{}", col.name, col.categories.join("\t")).unwrap()
                }
            }
        }
        for (name, v) in &self.imputed_values {
            match v {
                ImputeValue::Mean(m) => writeln!(s, "imputed\t{name}\tmean\t{}", fmt17(*m)).unwrap(),
                ImputeValue::Mode(l) => writeln!(s, "imputed\t{name}\tmode\t{l}").unwrap(),
            }
        }
        for (name, lo, hi) in &self.minmax_params.columns {
            writeln!(s, "minmax\t{name}\t{}\t{}", fmt17(*lo), fmt17(*hi)).unwrap();
        }
        writeln!(s, "encoded_width\t{}", self.encoded_width).unwrap();
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let err = |line: usize, m: &str| Error::Parse {
            what: "preprocess report",
            line,
            message: m.to_string(),
        };
        let mut rep = PreprocessReport {
            threshold: DEFAULT_DROP_THRESHOLD,
            dropped_columns: Vec::new(),
            imputed_values: Vec::new(),
            columns: Vec::new(),
            minmax_params: MinMaxParams::default(),
            encoded_width: 0,
        };
        for (i, line) in text.lines().enumerate() {
            let ln = i + 1;
            let f: Vec<&str> = line.split('\t').collect();
            let num = |s: &str| parse_f64(s).ok_or_else(|| err(ln, "bad number"));
            match (f[0], f.len()) {
                ("threshold", 2) => rep.threshold = num(f[1])?,
                ("dropped", 3) => rep.dropped_columns.push((f[1].to_string(), num(f[2])?)),
                ("column", 3) if f[2] == "numeric" => rep.columns.push(ColumnSchema::numeric(f[1])),
                ("column", n) if n >= 4 && f[2] == "categorical" => rep
                    .columns
                    .push(ColumnSchema::categorical(f[1], f[3..].iter().copied())),
                ("imputed", 4) if f[2] == "mean" => rep
                    .imputed_values
                    .push((f[1].to_string(), ImputeValue::Mean(num(f[3])?))),
                ("imputed", 4) if f[2] == "mode" => rep
                    .imputed_values
                    .push((f[1].to_string(), ImputeValue::Mode(f[3].to_string()))),
                ("minmax", 4) => rep
                    .minmax_params
                    .columns
                    .push((f[1].to_string(), num(f[2])?, num(f[3])?)),
                ("encoded_width", 2) => rep.encoded_width = f[1].parse().map_err(|_| err(ln, "bad width"))?,
                ("", 1) => {}
                _ => return Err(err(ln, "unrecognized record")),
            }
        }
        if rep.columns.len() != rep.imputed_values.len() {
            return Err(err(0, "column and imputation records disagree"));
        }
        Ok(rep)
    }
}

/// The fitted preprocessing chain (drop, impute, encode, normalize). Fit on
/// training rows, then apply to any data with the same raw columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Preprocessor {
    report: PreprocessReport,
}

impl Preprocessor {
    pub fn fit(ds: &Dataset, threshold: f64) -> Result<(Preprocessor, Dataset)> {
        let (kept, dropped) = drop_sparse_columns(ds, threshold)?;
        let (imputed, imputed_values) = impute(&kept)?;
        let encoded = one_hot_encode(&imputed)?;
        let (normalized, minmax_params) = normalize_minmax(&encoded, None)?;
        let report = PreprocessReport {
            threshold,
            dropped_columns: dropped,
            imputed_values,
            columns: kept.schema().to_vec(),
            minmax_params,
            encoded_width: normalized.n_cols(),
        };
        Ok((Preprocessor { report }, normalized))
    }

    pub fn from_report(report: PreprocessReport) -> Self {
        Preprocessor { report }
    }

    pub fn report(&self) -> &PreprocessReport {
        &self.report
    }

    pub fn apply(&self, ds: &Dataset) -> Result<Dataset> {
        let keep = self
            .report
            .columns
            .iter()
            .map(|c| {
                ds.column_index(&c.name)
                    .ok_or_else(|| Error::invalid(format!("column '{}' missing from input", c.name)))
            })
            .collect::<Result<Vec<_>>>()?;
        let rows: Vec<Vec<Cell>> = ds
            .rows()
            .iter()
            .map(|r| {
                keep.iter()
                    .zip(&self.report.imputed_values)
                    .map(|(&j, (_, v))| fill(&r[j], v))
                    .collect()
            })
            .collect();
        let labels: Vec<Class> = ds.labels().to_vec();
        // Cells are re-typed against the fitted schema before encoding.
        let schema: Vec<ColumnSchema> = self
            .report
            .columns
            .iter()
            .map(|c| match c.kind {
                ColumnKind::Numeric => ColumnSchema::numeric(c.name.as_str()),
                ColumnKind::Categorical => ColumnSchema::categorical(c.name.as_str(), ["_"]),
            })
            .collect();
        let rows = rows
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .zip(&self.report.columns)
                    .map(|(cell, col)| match (col.kind, cell) {
                        (ColumnKind::Categorical, Cell::Num(v)) => Cell::Cat(format!("{v}")),
                        (_, c) => c,
                    })
                    .collect()
            })
            .collect();
        let typed = Dataset::new(schema, rows, labels)?;
        let encoded = encode_with(&typed, &self.report.columns)?;
        let (out, _) = normalize_minmax(&encoded, Some(&self.report.minmax_params))?;
        Ok(out)
    }
}
