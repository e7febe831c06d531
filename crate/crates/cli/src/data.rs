//! CSV ingestion with column type inference.

use mlqc::table::{Column, ColumnData, Dataset};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnType {
    Numeric,
    Categorical,
}

/// Optional type overrides, `{"columns": {"zip": "categorical"}}`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schema {
    pub columns: BTreeMap<String, ColumnType>,
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("{path}: no header row or no data rows")]
    EmptyFile { path: String },
    #[error("{path}: line {line} has {got} fields, header has {expected}")]
    RaggedRow { path: String, line: u64, expected: usize, got: usize },
    #[error("{path}: empty cell in column `{column}` at line {line}; missing data is not supported")]
    EmptyCell { path: String, line: u64, column: String },
    #[error("{path}: non-finite value `{value}` in column `{column}` at line {line}")]
    NonFinite { path: String, line: u64, column: String, value: String },
    #[error("{path}: column `{column}` declared numeric but line {line} holds `{value}`")]
    TypeConflict { path: String, line: u64, column: String, value: String },
    #[error("{path}: schema names column `{column}`, which the file does not have")]
    SchemaColumn { path: String, column: String },
    #[error("{path}: {reason}")]
    Invalid { path: String, reason: String },
}

impl LoadError {
    /// Stable identifier printed with the message.
    pub fn code(&self) -> &'static str {
        match self {
            LoadError::Io { .. } => "io",
            LoadError::EmptyFile { .. } => "empty-file",
            LoadError::RaggedRow { .. } => "ragged-row",
            LoadError::EmptyCell { .. } => "empty-cell",
            LoadError::NonFinite { .. } => "non-finite",
            LoadError::TypeConflict { .. } => "type-conflict",
            LoadError::SchemaColumn { .. } => "schema-column",
            LoadError::Invalid { .. } => "invalid-table",
        }
    }
}

fn parse_real(cell: &str) -> Option<f64> {
    cell.parse::<f64>().ok()
}

pub fn load_schema(path: &Path) -> Result<Schema, LoadError> {
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| LoadError::Io { path: display.clone(), reason: e.to_string() })?;
    serde_json::from_str(&text).map_err(|e| LoadError::Invalid { path: display, reason: format!("bad schema: {e}") })
}

/// Reads a headed CSV file. A column is numeric when every cell parses as a
/// finite real, unless the schema says otherwise.
pub fn load_dataset(path: &Path, schema: Option<&Schema>) -> Result<Dataset, LoadError> {
    let display = path.display().to_string();
    let bytes = std::fs::read(path).map_err(|e| LoadError::Io { path: display.clone(), reason: e.to_string() })?;
    parse_dataset(&bytes, &display, schema)
}

pub fn parse_dataset(bytes: &[u8], path: &str, schema: Option<&Schema>) -> Result<Dataset, LoadError> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(bytes);
    let io = |e: csv::Error| LoadError::Io { path: path.to_owned(), reason: e.to_string() };
    let header: Vec<String> = reader.headers().map_err(io)?.iter().map(str::to_owned).collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(LoadError::EmptyFile { path: path.to_owned() });
    }
    let mut cells: Vec<Vec<String>> = vec![Vec::new(); header.len()];
    let mut lines: Vec<u64> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(io)?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(LoadError::RaggedRow { path: path.to_owned(), line, expected: header.len(), got: record.len() });
        }
        for (j, cell) in record.iter().enumerate() {
            if cell.is_empty() {
                return Err(LoadError::EmptyCell { path: path.to_owned(), line, column: header[j].clone() });
            }
            cells[j].push(cell.to_owned());
        }
        lines.push(line);
    }
    if lines.is_empty() {
        return Err(LoadError::EmptyFile { path: path.to_owned() });
    }
    if let Some(schema) = schema {
        if let Some(missing) = schema.columns.keys().find(|c| !header.contains(c)) {
            return Err(LoadError::SchemaColumn { path: path.to_owned(), column: missing.clone() });
        }
    }

    let mut columns = Vec::with_capacity(header.len());
    for (name, values) in header.into_iter().zip(cells) {
        let forced = schema.and_then(|s| s.columns.get(&name)).copied();
        let parsed: Vec<Option<f64>> = values.iter().map(|v| parse_real(v)).collect();
        let numeric_looking = parsed.iter().all(Option::is_some);
        let kind = forced.unwrap_or(if numeric_looking { ColumnType::Numeric } else { ColumnType::Categorical });
        let data = match kind {
            ColumnType::Categorical => {
                if forced.is_none() {
                    // cells like `inf` would silently become labels in an otherwise-text column
                    if let Some(i) = parsed.iter().position(|p| p.is_some_and(|x| !x.is_finite())) {
                        return Err(LoadError::NonFinite { path: path.to_owned(), line: lines[i], column: name, value: values[i].clone() });
                    }
                }
                ColumnData::Categorical(values)
            }
            ColumnType::Numeric => {
                let mut out = Vec::with_capacity(values.len());
                for (i, p) in parsed.iter().enumerate() {
                    match p {
                        Some(x) if x.is_finite() => out.push(*x),
                        Some(_) => {
                            return Err(LoadError::NonFinite { path: path.to_owned(), line: lines[i], column: name, value: values[i].clone() })
                        }
                        None => {
                            return Err(LoadError::TypeConflict { path: path.to_owned(), line: lines[i], column: name, value: values[i].clone() })
                        }
                    }
                }
                ColumnData::Numeric(out)
            }
        };
        columns.push(Column { name, data });
    }
    Dataset::new(columns).map_err(|e| LoadError::Invalid { path: path.to_owned(), reason: e.to_string() })
}
