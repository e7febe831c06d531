//! Slice rules: conjunctions of per-feature interval or set conditions.

use crate::table::{Dataset, FeatureRecord, FeatureValue};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Condition {
    /// Numeric feature within `[min, max]`, both ends inclusive.
    Interval { min: f64, max: f64 },
    /// Categorical feature equal to one of `values`.
    Set { values: BTreeSet<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predicate {
    pub feature: String,
    #[serde(flatten)]
    pub condition: Condition,
}

impl Predicate {
    pub fn interval(feature: &str, min: f64, max: f64) -> Self {
        Predicate { feature: feature.to_owned(), condition: Condition::Interval { min, max } }
    }

    pub fn set<S: Into<String>>(feature: &str, values: impl IntoIterator<Item = S>) -> Self {
        Predicate {
            feature: feature.to_owned(),
            condition: Condition::Set { values: values.into_iter().map(Into::into).collect() },
        }
    }

    pub fn matches(&self, record: &impl FeatureRecord) -> Result<bool> {
        let value = record.feature(&self.feature).ok_or_else(|| Error::MissingFeature(self.feature.clone()))?;
        match (&self.condition, value) {
            (Condition::Interval { min, max }, FeatureValue::Numeric(x)) => Ok(*min <= x && x <= *max),
            (Condition::Set { values }, FeatureValue::Categorical(s)) => Ok(values.contains(s)),
            (Condition::Interval { .. }, _) => {
                Err(Error::TypeMismatch { feature: self.feature.clone(), expected: "numeric" })
            }
            (Condition::Set { .. }, _) => Err(Error::TypeMismatch { feature: self.feature.clone(), expected: "categorical" }),
        }
    }
}

/// Conjunction of predicates, at most one per feature. The empty slice
/// matches every row.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<Predicate>", into = "Vec<Predicate>")]
pub struct Slice {
    predicates: Vec<Predicate>,
}

impl Slice {
    pub fn new(predicates: Vec<Predicate>) -> Result<Self> {
        let mut seen = HashSet::new();
        for p in &predicates {
            if !seen.insert(p.feature.as_str()) {
                return Err(Error::param("predicates", format!("feature `{}` appears twice", p.feature)));
            }
            match &p.condition {
                Condition::Interval { min, max } if !(min <= max) => {
                    return Err(Error::param("predicates", format!("interval on `{}` has min > max", p.feature)));
                }
                Condition::Set { values } if values.is_empty() => {
                    return Err(Error::param("predicates", format!("value set on `{}` is empty", p.feature)));
                }
                _ => {}
            }
        }
        Ok(Slice { predicates })
    }

    pub fn predicates(&self) -> &[Predicate] {
        &self.predicates
    }

    pub fn features(&self) -> impl Iterator<Item = &str> {
        self.predicates.iter().map(|p| p.feature.as_str())
    }

    pub fn contains(&self, record: &impl FeatureRecord) -> Result<bool> {
        for p in &self.predicates {
            if !p.matches(record)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Membership of every row in `ds`.
    pub fn mask(&self, ds: &Dataset) -> Result<Vec<bool>> {
        ds.rows().map(|r| self.contains(&r)).collect()
    }
}

impl TryFrom<Vec<Predicate>> for Slice {
    type Error = Error;
    fn try_from(p: Vec<Predicate>) -> Result<Self> {
        Slice::new(p)
    }
}

impl From<Slice> for Vec<Predicate> {
    fn from(s: Slice) -> Self {
        s.predicates
    }
}

pub fn slice_membership(slice: &Slice, row: &impl FeatureRecord) -> Result<bool> {
    slice.contains(row)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceStats {
    pub support: u64,
    pub fractional_support: f64,
    /// Mistakes over support; absent when no correctness column is given or
    /// the slice is empty.
    pub error_rate: Option<f64>,
}

impl SliceStats {
    pub(crate) fn from_counts(support: u64, mistakes: Option<u64>, n: usize) -> Self {
        SliceStats {
            support,
            fractional_support: support as f64 / n as f64,
            error_rate: mistakes.filter(|_| support > 0).map(|m| m as f64 / support as f64),
        }
    }
}

/// Support of `slice` in `ds`; with `correct` (one flag per row) also the
/// slice's error rate.
pub fn slice_stats(slice: &Slice, ds: &Dataset, correct: Option<&[bool]>) -> Result<SliceStats> {
    if let Some(c) = correct {
        if c.len() != ds.n_rows() {
            return Err(Error::param("correct", format!("{} flags for {} rows", c.len(), ds.n_rows())));
        }
    }
    let mask = slice.mask(ds)?;
    let support = mask.iter().filter(|&&m| m).count() as u64;
    let mistakes = correct.map(|c| mask.iter().zip(c).filter(|(&m, &ok)| m && !ok).count() as u64);
    Ok(SliceStats::from_counts(support, mistakes, ds.n_rows()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::{Column, ColumnData, Value};
    use std::collections::HashMap;

    fn census_slice() -> Slice {
        Slice::new(vec![
            Predicate::interval("INCOME", 30000.0, 60000.0),
            Predicate::set("STATE", ["NY", "OH", "MI"]),
            Predicate::set("SEX", ["Male"]),
        ])
        .unwrap()
    }

    fn record(income: f64, state: &str, sex: &str) -> HashMap<String, Value> {
        HashMap::from([
            ("INCOME".to_string(), Value::from(income)),
            ("STATE".to_string(), Value::from(state)),
            ("SEX".to_string(), Value::from(sex)),
        ])
    }

    #[test]
    fn worked_slice_membership() {
        let s = census_slice();
        assert!(slice_membership(&s, &record(45000.0, "OH", "Male")).unwrap());
        assert!(slice_membership(&s, &record(30000.0, "NY", "Male")).unwrap());
        assert!(slice_membership(&s, &record(60000.0, "MI", "Male")).unwrap());
        assert!(!slice_membership(&s, &record(29999.0, "OH", "Male")).unwrap());
        assert!(!slice_membership(&s, &record(45000.0, "CA", "Male")).unwrap());
        assert!(!slice_membership(&s, &record(45000.0, "OH", "Female")).unwrap());
        assert!(Slice::default().contains(&record(1.0, "x", "y")).unwrap());
    }

    #[test]
    fn membership_errors() {
        let s = census_slice();
        let mut r = record(45000.0, "OH", "Male");
        r.remove("SEX");
        assert_eq!(s.contains(&r), Err(Error::MissingFeature("SEX".into())));
        let mut r = record(45000.0, "OH", "Male");
        r.insert("INCOME".into(), Value::from("high"));
        assert!(matches!(s.contains(&r), Err(Error::TypeMismatch { .. })));
    }

    #[test]
    fn slice_validation() {
        assert!(Slice::new(vec![Predicate::interval("x", 2.0, 1.0)]).is_err());
        assert!(Slice::new(vec![Predicate::set::<&str>("x", [])]).is_err());
        assert!(Slice::new(vec![Predicate::interval("x", 0.0, 1.0), Predicate::set("x", ["a"])]).is_err());
    }

    #[test]
    fn json_schema() {
        let json = r#"[{"feature":"INCOME","kind":"interval","min":30000,"max":60000},
                       {"feature":"STATE","kind":"set","values":["NY","OH","MI"]},
                       {"feature":"SEX","kind":"set","values":["Male"]}]"#;
        let s: Slice = serde_json::from_str(json).unwrap();
        assert_eq!(s, census_slice());
        let back: Slice = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
        let bad = r#"[{"feature":"x","kind":"interval","min":3,"max":1}]"#;
        assert!(serde_json::from_str::<Slice>(bad).is_err());
    }

    fn dataset(n: usize) -> Dataset {
        Dataset::new(vec![Column { name: "x".into(), data: ColumnData::Numeric((0..n).map(|i| i as f64).collect()) }])
            .unwrap()
    }

    #[test]
    fn stats_support_and_errors() {
        let all = Slice::new(vec![Predicate::interval("x", 0.0, 99.0)]).unwrap();
        let st = slice_stats(&all, &dataset(100), None).unwrap();
        assert_eq!((st.support, st.fractional_support, st.error_rate), (100, 1.0, None));
        let some = Slice::new(vec![Predicate::interval("x", 0.0, 24.0)]).unwrap();
        let correct: Vec<bool> = (0..1000).map(|i| i % 5 != 0).collect();
        let st = slice_stats(&some, &dataset(1000), Some(&correct)).unwrap();
        assert_eq!(st.support, 25);
        assert!((st.fractional_support - 0.025).abs() < 1e-15);
        assert!((st.error_rate.unwrap() - 5.0 / 25.0).abs() < 1e-15);
        let none = Slice::new(vec![Predicate::interval("x", -5.0, -1.0)]).unwrap();
        let st = slice_stats(&none, &dataset(10), Some(&[true; 10])).unwrap();
        assert_eq!((st.support, st.error_rate), (0, None));
        assert!(slice_stats(&none, &dataset(10), Some(&[true; 3])).is_err());
    }
}
