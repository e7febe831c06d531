//! Density-based slices.
//!
//! The reference partition is supplied by the caller; this module types each
//! cell by how populated the reference data left it and classifies current
//! rows against that typing:
//!
//! - `A`: not very sparse (fractional support at least the sparsity threshold)
//! - `B`: very sparse (some support, but below the threshold)
//! - `C`: empty on the reference data
//! - `D` (current rows only): a sliced feature lies outside every value the
//!   reference slices span.

use super::rules::{Condition, Slice};
use crate::drift::CategoricalCounts;
use crate::table::{Dataset, FeatureRecord, FeatureValue};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DensityType {
    A,
    B,
    C,
}

impl DensityType {
    pub fn as_str(self) -> &'static str {
        match self {
            DensityType::A => "A",
            DensityType::B => "B",
            DensityType::C => "C",
        }
    }
}

pub const OUT_OF_RANGE: &str = "D";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySlice {
    #[serde(rename = "type")]
    pub kind: DensityType,
    pub predicates: Slice,
}

/// A partition of feature space into typed cells. Rows are matched to the
/// first cell (in declaration order) that contains them, so cells sharing an
/// inclusive boundary still assign each row exactly once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySliceSet {
    pub sparsity: f64,
    pub slices: Vec<DensitySlice>,
}

enum Range {
    Numeric(f64, f64),
    Categorical(BTreeSet<String>),
}

impl DensitySliceSet {
    /// Types the cells of `cells` by their first-match support in `reference`.
    pub fn from_partition(reference: &Dataset, cells: Vec<Slice>, sparsity: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&sparsity) {
            return Err(Error::param("sparsity", "must lie in [0, 1]"));
        }
        let mut set = DensitySliceSet {
            sparsity,
            slices: cells.into_iter().map(|predicates| DensitySlice { kind: DensityType::C, predicates }).collect(),
        };
        let mut support = vec![0usize; set.slices.len()];
        for row in reference.rows() {
            if let Some(i) = set.first_match(&row)? {
                support[i] += 1;
            }
        }
        let n = reference.n_rows() as f64;
        for (cell, &s) in set.slices.iter_mut().zip(&support) {
            cell.kind = match s {
                0 => DensityType::C,
                s if s as f64 / n >= sparsity => DensityType::A,
                _ => DensityType::B,
            };
        }
        Ok(set)
    }

    /// Equal-width grid over the observed range of each numeric feature.
    pub fn equal_width_grid(reference: &Dataset, features: &[&str], bins: usize, sparsity: f64) -> Result<Self> {
        if bins == 0 || features.is_empty() {
            return Err(Error::param("bins", "need at least one feature and one bin"));
        }
        let mut axes: Vec<Vec<(String, f64, f64)>> = Vec::new();
        for &f in features {
            let v = reference.numeric(f)?;
            let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let width = (hi - lo) / bins as f64;
            let edges: Vec<f64> = (0..=bins).map(|i| if i == bins { hi } else { lo + width * i as f64 }).collect();
            axes.push(edges.windows(2).map(|w| (f.to_owned(), w[0], w[1])).collect());
        }
        let mut cells: Vec<Vec<(String, f64, f64)>> = vec![Vec::new()];
        for axis in &axes {
            cells = cells
                .into_iter()
                .flat_map(|prefix| {
                    axis.iter().map(move |bin| {
                        let mut cell = prefix.clone();
                        cell.push(bin.clone());
                        cell
                    })
                })
                .collect();
        }
        let slices = cells
            .into_iter()
            .map(|cell| {
                Slice::new(cell.into_iter().map(|(f, lo, hi)| super::rules::Predicate::interval(&f, lo, hi)).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_partition(reference, slices, sparsity)
    }

    fn first_match(&self, row: &impl FeatureRecord) -> Result<Option<usize>> {
        for (i, cell) in self.slices.iter().enumerate() {
            if cell.predicates.contains(row)? {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    fn ranges(&self) -> BTreeMap<&str, Range> {
        let mut ranges: BTreeMap<&str, Range> = BTreeMap::new();
        for cell in &self.slices {
            for p in cell.predicates.predicates() {
                match (&p.condition, ranges.get_mut(p.feature.as_str())) {
                    (Condition::Interval { min, max }, Some(Range::Numeric(lo, hi))) => {
                        *lo = lo.min(*min);
                        *hi = hi.max(*max);
                    }
                    (Condition::Set { values }, Some(Range::Categorical(seen))) => seen.extend(values.iter().cloned()),
                    (Condition::Interval { min, max }, None) => {
                        ranges.insert(&p.feature, Range::Numeric(*min, *max));
                    }
                    (Condition::Set { values }, None) => {
                        ranges.insert(&p.feature, Range::Categorical(values.clone()));
                    }
                    // mixed kinds on one feature: the first kind wins; membership will report the mismatch
                    _ => {}
                }
            }
        }
        ranges
    }

    /// Type of one row: `A`/`B`/`C` from its cell, `D` when out of range.
    /// A row inside every feature's range but in no cell is typed `C`.
    pub fn classify(&self, row: &impl FeatureRecord) -> Result<&'static str> {
        for (feature, range) in self.ranges() {
            let value = row.feature(feature).ok_or_else(|| Error::MissingFeature(feature.to_owned()))?;
            let inside = match (range, value) {
                (Range::Numeric(lo, hi), FeatureValue::Numeric(x)) => lo <= x && x <= hi,
                (Range::Categorical(set), FeatureValue::Categorical(s)) => set.contains(s),
                (Range::Numeric(..), _) => {
                    return Err(Error::TypeMismatch { feature: feature.to_owned(), expected: "numeric" })
                }
                (Range::Categorical(_), _) => {
                    return Err(Error::TypeMismatch { feature: feature.to_owned(), expected: "categorical" })
                }
            };
            if !inside {
                return Ok(OUT_OF_RANGE);
            }
        }
        Ok(match self.first_match(row)? {
            Some(i) => self.slices[i].kind.as_str(),
            None => DensityType::C.as_str(),
        })
    }
}

/// Counts of `current` rows by type, over the labels `A, B, C, D`.
pub fn density_slice_map(set: &DensitySliceSet, current: &Dataset) -> Result<CategoricalCounts> {
    let mut counts = [0u64; 4];
    for row in current.rows() {
        let idx = match set.classify(&row)? {
            "A" => 0,
            "B" => 1,
            "C" => 2,
            _ => 3,
        };
        counts[idx] += 1;
    }
    CategoricalCounts::new(["A", "B", "C", "D"].map(String::from).to_vec(), counts.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drift::dissimilarity;
    use crate::slicing::rules::Predicate;
    use crate::table::{Column, ColumnData};

    fn grid_data(xs: Vec<f64>, ys: Vec<f64>) -> Dataset {
        Dataset::new(vec![
            Column { name: "x".into(), data: ColumnData::Numeric(xs) },
            Column { name: "y".into(), data: ColumnData::Numeric(ys) },
        ])
        .unwrap()
    }

    fn reference() -> Dataset {
        // dense cluster near the origin, a few points far out, nothing in between
        let mut xs: Vec<f64> = (0..95).map(|i| (i % 10) as f64 * 0.1).collect();
        let mut ys: Vec<f64> = (0..95).map(|i| (i / 10) as f64 * 0.1).collect();
        xs.extend([9.0, 9.5, 10.0, 9.2, 9.9]);
        ys.extend([9.0, 9.5, 10.0, 9.8, 9.1]);
        grid_data(xs, ys)
    }

    #[test]
    fn reference_types_itself_without_c_or_d() {
        let r = reference();
        let set = DensitySliceSet::equal_width_grid(&r, &["x", "y"], 4, 0.1).unwrap();
        let kinds: Vec<DensityType> = set.slices.iter().map(|s| s.kind).collect();
        assert!(kinds.contains(&DensityType::A) && kinds.contains(&DensityType::B) && kinds.contains(&DensityType::C));
        let counts = density_slice_map(&set, &r).unwrap();
        assert_eq!(counts.count_of("C"), 0);
        assert_eq!(counts.count_of("D"), 0);
        assert_eq!(counts.total(), 100);
    }

    #[test]
    fn out_of_range_is_d_and_gap_is_c() {
        let set = DensitySliceSet::equal_width_grid(&reference(), &["x", "y"], 4, 0.1).unwrap();
        let cur = grid_data(vec![10.5, 5.0, 0.2], vec![1.0, 5.0, 0.2]);
        let counts = density_slice_map(&set, &cur).unwrap();
        assert_eq!(counts.counts(), &[1, 0, 1, 1]);
    }

    #[test]
    fn type_proportions_feed_dissimilarity() {
        let r = reference();
        let set = DensitySliceSet::equal_width_grid(&r, &["x", "y"], 4, 0.1).unwrap();
        let base = density_slice_map(&set, &r).unwrap();
        let shifted = grid_data((0..100).map(|i| 4.0 + (i % 10) as f64 * 0.2).collect(), vec![5.0; 100]);
        let cur = density_slice_map(&set, &shifted).unwrap();
        let d = dissimilarity(&base, &cur);
        let by_hand = 0.5
            * ["A", "B", "C", "D"].iter().map(|l| (base.proportion_of(l) - cur.proportion_of(l)).abs()).sum::<f64>();
        assert!((d - by_hand).abs() < 1e-15);
        assert!(d > 0.5);
        assert_eq!(dissimilarity(&base, &density_slice_map(&set, &r).unwrap()), 0.0);
    }

    #[test]
    fn categorical_ranges_and_json() {
        let cells = vec![
            Slice::new(vec![Predicate::set("c", ["a", "b"])]).unwrap(),
            Slice::new(vec![Predicate::set("c", ["z"])]).unwrap(),
        ];
        let r = Dataset::new(vec![Column {
            name: "c".into(),
            data: ColumnData::Categorical(vec!["a".into(), "a".into(), "b".into()]),
        }])
        .unwrap();
        let set = DensitySliceSet::from_partition(&r, cells, 0.5).unwrap();
        assert_eq!(set.slices[0].kind, DensityType::A);
        assert_eq!(set.slices[1].kind, DensityType::C);
        let cur = Dataset::new(vec![Column {
            name: "c".into(),
            data: ColumnData::Categorical(vec!["z".into(), "q".into(), "b".into()]),
        }])
        .unwrap();
        assert_eq!(density_slice_map(&set, &cur).unwrap().counts(), &[1, 0, 1, 1]);
        let json = serde_json::to_string(&set).unwrap();
        assert!(json.contains(r#""type":"A""#));
        let back: DensitySliceSet = serde_json::from_str(&json).unwrap();
        assert_eq!(back, set);
        let missing = Dataset::new(vec![Column { name: "other".into(), data: ColumnData::Numeric(vec![1.0]) }]).unwrap();
        assert!(matches!(density_slice_map(&set, &missing), Err(Error::MissingFeature(_))));
    }
}
