//! Column-oriented tabular data shared by the slicing and relation code.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "values", rename_all = "lowercase")]
pub enum ColumnData {
    Numeric(Vec<f64>),
    Categorical(Vec<String>),
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Numeric(v) => v.len(),
            ColumnData::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub data: ColumnData,
}

/// A borrowed cell value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeatureValue<'a> {
    Numeric(f64),
    Categorical(&'a str),
}

/// An owned cell value, for building records by hand.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Numeric(f64),
    Categorical(String),
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Numeric(x)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Categorical(s.to_owned())
    }
}

/// Anything that can look up a feature value by name.
pub trait FeatureRecord {
    fn feature(&self, name: &str) -> Option<FeatureValue<'_>>;
}

impl FeatureRecord for HashMap<String, Value> {
    fn feature(&self, name: &str) -> Option<FeatureValue<'_>> {
        self.get(name).map(|v| match v {
            Value::Numeric(x) => FeatureValue::Numeric(*x),
            Value::Categorical(s) => FeatureValue::Categorical(s),
        })
    }
}

/// Rectangular table of named, typed columns with at least one row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    columns: Vec<Column>,
    rows: usize,
}

impl Dataset {
    pub fn new(columns: Vec<Column>) -> Result<Self> {
        let rows = columns.first().map(|c| c.data.len()).unwrap_or(0);
        if rows == 0 {
            return Err(Error::EmptySample);
        }
        for (i, c) in columns.iter().enumerate() {
            if c.data.len() != rows {
                return Err(Error::param("columns", format!("column `{}` has {} rows, expected {rows}", c.name, c.data.len())));
            }
            if columns[..i].iter().any(|o| o.name == c.name) {
                return Err(Error::DuplicateLabel(c.name.clone()));
            }
            if let ColumnData::Numeric(v) = &c.data {
                if let Some((index, &value)) = v.iter().enumerate().find(|(_, x)| !x.is_finite()) {
                    return Err(Error::NonFinite { index, value });
                }
            }
        }
        Ok(Dataset { columns, rows })
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn numeric(&self, name: &str) -> Result<&[f64]> {
        match self.column(name).map(|c| &c.data) {
            Some(ColumnData::Numeric(v)) => Ok(v),
            Some(_) => Err(Error::TypeMismatch { feature: name.to_owned(), expected: "numeric" }),
            None => Err(Error::MissingFeature(name.to_owned())),
        }
    }

    pub fn categorical(&self, name: &str) -> Result<&[String]> {
        match self.column(name).map(|c| &c.data) {
            Some(ColumnData::Categorical(v)) => Ok(v),
            Some(_) => Err(Error::TypeMismatch { feature: name.to_owned(), expected: "categorical" }),
            None => Err(Error::MissingFeature(name.to_owned())),
        }
    }

    pub fn row(&self, index: usize) -> RowRef<'_> {
        assert!(index < self.rows, "row {index} out of range");
        RowRef { dataset: self, index }
    }

    pub fn rows(&self) -> impl Iterator<Item = RowRef<'_>> {
        (0..self.rows).map(move |index| RowRef { dataset: self, index })
    }

    /// New dataset holding the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Dataset> {
        let columns = self
            .columns
            .iter()
            .map(|c| Column {
                name: c.name.clone(),
                data: match &c.data {
                    ColumnData::Numeric(v) => ColumnData::Numeric(indices.iter().map(|&i| v[i]).collect()),
                    ColumnData::Categorical(v) => ColumnData::Categorical(indices.iter().map(|&i| v[i].clone()).collect()),
                },
            })
            .collect();
        Dataset::new(columns)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RowRef<'a> {
    dataset: &'a Dataset,
    index: usize,
}

impl RowRef<'_> {
    pub fn index(&self) -> usize {
        self.index
    }
}

impl FeatureRecord for RowRef<'_> {
    fn feature(&self, name: &str) -> Option<FeatureValue<'_>> {
        self.dataset.column(name).map(|c| match &c.data {
            ColumnData::Numeric(v) => FeatureValue::Numeric(v[self.index]),
            ColumnData::Categorical(v) => FeatureValue::Categorical(&v[self.index]),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Dataset {
        Dataset::new(vec![
            Column { name: "x".into(), data: ColumnData::Numeric(vec![1.0, 2.0]) },
            Column { name: "y".into(), data: ColumnData::Categorical(vec!["a".into(), "b".into()]) },
        ])
        .unwrap()
    }

    #[test]
    fn row_access() {
        let d = sample();
        assert_eq!(d.n_rows(), 2);
        assert_eq!(d.row(1).feature("x"), Some(FeatureValue::Numeric(2.0)));
        assert_eq!(d.row(0).feature("y"), Some(FeatureValue::Categorical("a")));
        assert_eq!(d.row(0).feature("z"), None);
        assert!(matches!(d.numeric("y"), Err(Error::TypeMismatch { .. })));
    }

    #[test]
    fn rejects_ragged_and_empty() {
        assert!(Dataset::new(vec![]).is_err());
        let ragged = Dataset::new(vec![
            Column { name: "x".into(), data: ColumnData::Numeric(vec![1.0, 2.0]) },
            Column { name: "y".into(), data: ColumnData::Numeric(vec![1.0]) },
        ]);
        assert!(ragged.is_err());
        let nan = Dataset::new(vec![Column { name: "x".into(), data: ColumnData::Numeric(vec![f64::NAN]) }]);
        assert!(matches!(nan, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn select_rows_reorders() {
        let d = sample().select_rows(&[1, 1, 0]).unwrap();
        assert_eq!(d.numeric("x").unwrap(), &[2.0, 2.0, 1.0]);
    }
}
