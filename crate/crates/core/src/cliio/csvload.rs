use std::collections::HashMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numcore::{Dataset, Matrix};
use crate::scalar::Scalar;

/// Label column by header name or by 0-based position.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

fn default_delimiter() -> char {
    ','
}
fn default_header() -> bool {
    true
}

/// Layout of a delimited tabular file with one label column and numeric features.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvDatasetSchema {
    pub path: PathBuf,
    pub label_column: LabelColumn,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
    #[serde(default = "default_header")]
    pub header: bool,
}

impl CsvDatasetSchema {
    pub fn new(path: impl Into<PathBuf>, label_column: LabelColumn) -> Self {
        Self {
            path: path.into(),
            label_column,
            delimiter: ',',
            header: true,
        }
    }
}

/// Reads the file behind `schema` into an unstandardized dataset.
///
/// Class labels are mapped to `0..C` in order of first appearance. Rows in diagnostics are
/// 1-based data rows (the header is not counted); columns are named by header when present.
/// Standardization is left to the caller so its statistics can come from a training split.
pub fn load_csv_dataset<T: Scalar>(schema: &CsvDatasetSchema) -> Result<Dataset<T>> {
    let fail = |message: String| Error::Csv { path: schema.path.clone(), message };
    if !schema.delimiter.is_ascii() {
        return Err(fail(format!("delimiter {:?} is not a single ASCII character", schema.delimiter)));
    }
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter as u8)
        .has_headers(false)
        .flexible(true)
        .from_path(&schema.path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(source) => Error::Io { path: schema.path.clone(), source },
            other => fail(format!("{other:?}")),
        })?;

    let mut records = reader.records();
    let mut names: Option<Vec<String>> = None;
    if schema.header {
        match records.next() {
            Some(rec) => {
                let rec = rec.map_err(|e| fail(format!("header: {e}")))?;
                names = Some(rec.iter().map(|s| s.trim().to_string()).collect());
            }
            None => return Err(fail("file is empty".into())),
        }
    }

    let mut width = names.as_ref().map(Vec::len);
    let mut label_idx: Option<usize> = None;
    let resolve = |width: usize| -> Result<usize> {
        match &schema.label_column {
            LabelColumn::Index(i) if *i < width => Ok(*i),
            LabelColumn::Index(i) => Err(fail(format!(
                "label column index {i} is out of range for {width} columns"
            ))),
            LabelColumn::Name(name) => names
                .as_ref()
                .and_then(|n| n.iter().position(|c| c == name))
                .ok_or_else(|| match &names {
                    Some(n) => fail(format!(
                        "unknown label column {name:?}; columns are {}",
                        n.join(", ")
                    )),
                    None => fail(format!(
                        "label column {name:?} given by name but header = false"
                    )),
                }),
        }
    };
    if let Some(w) = width {
        label_idx = Some(resolve(w)?);
    }
    let column_name = |c: usize| match &names {
        Some(n) => format!("column {:?}", n[c]),
        None => format!("column {c}"),
    };

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut classes: HashMap<String, usize> = HashMap::new();
    let mut rows = 0usize;
    for (r, rec) in records.enumerate() {
        let row = r + 1;
        let rec = rec.map_err(|e| fail(format!("row {row}: {e}")))?;
        if rec.len() == 1 && rec[0].trim().is_empty() {
            continue;
        }
        let w = *width.get_or_insert(rec.len());
        if rec.len() != w {
            return Err(fail(format!(
                "row {row} has {} columns, expected {w}",
                rec.len()
            )));
        }
        let li = match label_idx {
            Some(i) => i,
            None => *label_idx.insert(resolve(w)?),
        };
        for (c, cell) in rec.iter().enumerate() {
            let cell = cell.trim();
            if c == li {
                let next = classes.len();
                labels.push(*classes.entry(cell.to_string()).or_insert(next));
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| {
                fail(format!("row {row}, {}: {cell:?} is not a number", column_name(c)))
            })?;
            if !v.is_finite() {
                return Err(fail(format!("row {row}, {}: {cell:?} is not finite", column_name(c))));
            }
            features.push(T::lit(v));
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(fail("file has no data rows".into()));
    }
    let width = width.unwrap_or(0);
    if width < 2 {
        return Err(fail("need at least one feature column besides the label".into()));
    }
    if classes.len() < 2 {
        return Err(fail(format!("label column holds {} distinct class(es), need 2", classes.len())));
    }
    let n_classes = classes.len();
    Dataset::new(Matrix::new(rows, width - 1, features)?, labels, n_classes)
}
