//! Tabular ingestion and the preprocessing chain: sparse-column dropping,
//! imputation, dummy-variable encoding, min-max scaling and stratified splits.

mod csvio;
mod preprocess;
mod split;

pub use csvio::{load_csv, read_csv, write_numeric_csv, CsvOptions};
pub use preprocess::{
    drop_sparse_columns, impute, normalize_minmax, one_hot_encode, ImputeValue, MinMaxParams, PreprocessReport,
    Preprocessor, DEFAULT_DROP_THRESHOLD,
};
pub use split::stratified_split;

use std::fmt;

use crate::error::{Error, Result};

/// Binary target. Churners are the positive class everywhere in this crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Class {
    Churner,
    NonChurner,
}

impl Class {
    pub const BOTH: [Class; 2] = [Class::Churner, Class::NonChurner];

    pub fn is_churner(self) -> bool {
        self == Class::Churner
    }

    /// Index used by the two-way softmax head: churner = 0, non-churner = 1.
    pub fn index(self) -> usize {
        match self {
            Class::Churner => 0,
            Class::NonChurner => 1,
        }
    }

    pub fn from_index(i: usize) -> Class {
        if i == 0 {
            Class::Churner
        } else {
            Class::NonChurner
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Class::Churner => "churner",
            Class::NonChurner => "nonchurner",
        }
    }

    pub fn from_tag(s: &str) -> Option<Class> {
        match s {
            "churner" => Some(Class::Churner),
            "nonchurner" => Some(Class::NonChurner),
            _ => None,
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
    /// Sorted, distinct category labels. Empty for numeric columns.
    pub categories: Vec<String>,
}

impl ColumnSchema {
    pub fn numeric(name: impl Into<String>) -> Self {
        ColumnSchema {
            name: name.into(),
            kind: ColumnKind::Numeric,
            categories: Vec::new(),
        }
    }

    /// Builds a categorical column; labels are sorted and deduplicated.
    pub fn categorical<S: Into<String>>(name: impl Into<String>, labels: impl IntoIterator<Item = S>) -> Self {
        let mut categories: Vec<String> = labels.into_iter().map(Into::into).collect();
        categories.sort();
        categories.dedup();
        ColumnSchema {
            name: name.into(),
            kind: ColumnKind::Categorical,
            categories,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Cat(String),
    Missing,
}

impl Cell {
    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing)
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            _ => None,
        }
    }
}

/// Labeled tabular data with a typed schema.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    schema: Vec<ColumnSchema>,
    rows: Vec<Vec<Cell>>,
    labels: Vec<Class>,
}

impl Dataset {
    pub fn new(schema: Vec<ColumnSchema>, rows: Vec<Vec<Cell>>, labels: Vec<Class>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::invalid(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        for col in &schema {
            let sorted = col.categories.windows(2).all(|w| w[0] < w[1]);
            let ok = match col.kind {
                ColumnKind::Numeric => col.categories.is_empty(),
                ColumnKind::Categorical => !col.categories.is_empty() && sorted,
            };
            if !ok {
                return Err(Error::invalid(format!(
                    "inconsistent categories for column '{}'",
                    col.name
                )));
            }
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != schema.len() {
                return Err(Error::invalid(format!(
                    "row {r} has {} cells, schema has {}",
                    row.len(),
                    schema.len()
                )));
            }
            for (cell, col) in row.iter().zip(&schema) {
                let ok = matches!(
                    (cell, col.kind),
                    (Cell::Missing, _) | (Cell::Num(_), ColumnKind::Numeric) | (Cell::Cat(_), ColumnKind::Categorical)
                );
                if !ok {
                    return Err(Error::invalid(format!(
                        "row {r}: cell kind does not match column '{}'",
                        col.name
                    )));
                }
            }
        }
        Ok(Dataset { schema, rows, labels })
    }

    /// All-numeric dataset from a dense matrix.
    pub fn from_matrix(names: Vec<String>, rows: Vec<Vec<f64>>, labels: Vec<Class>) -> Result<Self> {
        let schema = names.into_iter().map(ColumnSchema::numeric).collect();
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().map(Cell::Num).collect())
            .collect();
        Dataset::new(schema, rows, labels)
    }

    pub fn schema(&self) -> &[ColumnSchema] {
        &self.schema
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn labels(&self) -> &[Class] {
        &self.labels
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.schema.len()
    }

    pub fn column_names(&self) -> Vec<String> {
        self.schema.iter().map(|c| c.name.clone()).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|c| c.name == name)
    }

    pub fn missing_fraction(&self, col: usize) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        let missing = self.rows.iter().filter(|r| r[col].is_missing()).count();
        missing as f64 / self.rows.len() as f64
    }

    pub fn has_missing(&self) -> bool {
        self.rows.iter().flatten().any(Cell::is_missing)
    }

    pub fn is_numeric(&self) -> bool {
        self.schema.iter().all(|c| c.kind == ColumnKind::Numeric)
    }

    pub fn class_count(&self, class: Class) -> usize {
        self.labels.iter().filter(|&&l| l == class).count()
    }

    /// Rows as dense vectors. Fails on categorical or missing cells.
    pub fn numeric_rows(&self) -> Result<Vec<Vec<f64>>> {
        self.rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                row.iter()
                    .map(|c| {
                        c.as_num()
                            .ok_or_else(|| Error::invalid(format!("row {r} is not fully numeric")))
                    })
                    .collect()
            })
            .collect()
    }

    /// Rows selected by index, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}
