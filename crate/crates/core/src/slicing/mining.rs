//! Error-slice mining.
//!
//! A bounded exhaustive search: every single-feature candidate predicate,
//! and every pair of candidates on distinct features, is scored. A slice is
//! kept when its support and error rate clear the configured floors.

use super::rules::{Predicate, Slice, SliceStats};
use crate::empirical::{EmpiricalCdf, Sample};
use crate::table::{ColumnData, Dataset};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiningConfig {
    /// 1 or 2.
    pub max_predicates: usize,
    /// Smallest fractional support a reported slice may have.
    pub min_support: f64,
    /// A slice qualifies when its error rate is at least `lift` times the overall rate.
    pub lift: f64,
    /// Columns never used as slicing features.
    #[serde(default)]
    pub exclude: Vec<String>,
}

impl Default for MiningConfig {
    fn default() -> Self {
        MiningConfig { max_predicates: 2, min_support: 0.01, lift: 1.5, exclude: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinedSlice {
    pub slice: Slice,
    pub stats: SliceStats,
}

/// Candidate predicates for one column: each distinct category, or the
/// intervals between consecutive quartile boundaries `min, Q1, Q2, Q3, max`.
pub fn candidate_predicates(ds: &Dataset, feature: &str) -> Result<Vec<Predicate>> {
    let column = ds.column(feature).ok_or_else(|| Error::MissingFeature(feature.to_owned()))?;
    Ok(match &column.data {
        ColumnData::Categorical(v) => {
            let distinct: BTreeSet<&str> = v.iter().map(String::as_str).collect();
            distinct.into_iter().map(|value| Predicate::set(feature, [value])).collect()
        }
        ColumnData::Numeric(v) => {
            let cdf = EmpiricalCdf::new(&Sample::new(v.clone())?);
            let sorted = cdf.sorted_values();
            let mut bounds = vec![sorted[0]];
            for q in [0.25, 0.5, 0.75] {
                bounds.push(cdf.quantile(q)?);
            }
            bounds.push(sorted[sorted.len() - 1]);
            bounds.dedup();
            if bounds.len() == 1 {
                vec![Predicate::interval(feature, bounds[0], bounds[0])]
            } else {
                bounds.windows(2).map(|w| Predicate::interval(feature, w[0], w[1])).collect()
            }
        }
    })
}

struct Candidate {
    predicate: Predicate,
    mask: Vec<bool>,
}

/// Slices whose error rate is at least `lift` times the overall error rate
/// and whose fractional support is at least `min_support`, ranked by error
/// rate (descending), then support (descending), then enumeration order.
///
/// `correct` holds one flag per row. Returns an empty list when the model
/// makes no mistakes.
pub fn mine_error_slices(ds: &Dataset, correct: &[bool], config: &MiningConfig) -> Result<Vec<MinedSlice>> {
    let n = ds.n_rows();
    if correct.len() != n {
        return Err(Error::param("correct", format!("{} flags for {n} rows", correct.len())));
    }
    if !(1..=2).contains(&config.max_predicates) {
        return Err(Error::param("max_predicates", "must be 1 or 2"));
    }
    if !(0.0..=1.0).contains(&config.min_support) {
        return Err(Error::param("min_support", "must lie in [0, 1]"));
    }
    let mistakes = correct.iter().filter(|&&ok| !ok).count();
    if mistakes == 0 {
        return Ok(Vec::new());
    }
    let floor = config.lift * mistakes as f64 / n as f64;

    let mut candidates = Vec::new();
    for column in ds.columns() {
        if config.exclude.contains(&column.name) {
            continue;
        }
        for predicate in candidate_predicates(ds, &column.name)? {
            let mask = ds.rows().map(|r| predicate.matches(&r)).collect::<Result<Vec<_>>>()?;
            candidates.push(Candidate { predicate, mask });
        }
    }

    let evaluate = |predicates: Vec<&Candidate>| -> Option<MinedSlice> {
        let (mut support, mut wrong) = (0u64, 0u64);
        for (row, &ok) in correct.iter().enumerate() {
            if predicates.iter().all(|c| c.mask[row]) {
                support += 1;
                wrong += u64::from(!ok);
            }
        }
        let stats = SliceStats::from_counts(support, Some(wrong), n);
        let qualifies = support > 0 && stats.fractional_support >= config.min_support && stats.error_rate? >= floor;
        qualifies.then(|| MinedSlice {
            slice: Slice::new(predicates.iter().map(|c| c.predicate.clone()).collect()).expect("distinct features"),
            stats,
        })
    };

    let mut combos: Vec<Vec<usize>> = (0..candidates.len()).map(|i| vec![i]).collect();
    if config.max_predicates == 2 {
        for i in 0..candidates.len() {
            for j in i + 1..candidates.len() {
                if candidates[i].predicate.feature != candidates[j].predicate.feature {
                    combos.push(vec![i, j]);
                }
            }
        }
    }
    let mut found: Vec<MinedSlice> = combos
        .par_iter()
        .filter_map(|combo| evaluate(combo.iter().map(|&i| &candidates[i]).collect()))
        .collect();
    found.sort_by(|a, b| {
        b.stats
            .error_rate
            .partial_cmp(&a.stats.error_rate)
            .expect("rates are finite")
            .then(b.stats.support.cmp(&a.stats.support))
    });
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slicing::rules::slice_stats;
    use crate::table::Column;

    fn dataset(colors: &[&str], sizes: &[f64]) -> Dataset {
        Dataset::new(vec![
            Column { name: "color".into(), data: ColumnData::Categorical(colors.iter().map(|s| s.to_string()).collect()) },
            Column { name: "size".into(), data: ColumnData::Numeric(sizes.to_vec()) },
        ])
        .unwrap()
    }

    #[test]
    fn quartile_candidates() {
        let sizes: Vec<f64> = (1..=8).map(f64::from).collect();
        let ds = dataset(&["a"; 8], &sizes);
        let c = candidate_predicates(&ds, "size").unwrap();
        let bounds: Vec<(f64, f64)> = c
            .iter()
            .map(|p| match p.condition {
                crate::slicing::Condition::Interval { min, max } => (min, max),
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(bounds, vec![(1.0, 2.0), (2.0, 4.0), (4.0, 6.0), (6.0, 8.0)]);
        let constant = dataset(&["a"; 3], &[5.0; 3]);
        assert_eq!(candidate_predicates(&constant, "size").unwrap().len(), 1);
        assert_eq!(candidate_predicates(&ds, "color").unwrap().len(), 1);
    }

    #[test]
    fn concentrated_errors_rank_first() {
        let colors: Vec<&str> = (0..200).map(|i| ["red", "green", "blue", "black"][i % 4]).collect();
        let sizes: Vec<f64> = (0..200).map(|i| (i % 13) as f64).collect();
        let correct: Vec<bool> = colors.iter().enumerate().map(|(i, c)| !(*c == "blue" && i % 8 < 4)).collect();
        let ds = dataset(&colors, &sizes);
        let cfg = MiningConfig { max_predicates: 1, min_support: 0.05, lift: 1.5, exclude: vec![] };
        let found = mine_error_slices(&ds, &correct, &cfg).unwrap();
        assert_eq!(found[0].slice, Slice::new(vec![Predicate::set("color", ["blue"])]).unwrap());
        let overall = correct.iter().filter(|c| !**c).count() as f64 / 200.0;
        for m in &found {
            assert!(m.stats.fractional_support >= cfg.min_support);
            assert!(m.stats.error_rate.unwrap() >= cfg.lift * overall);
        }
    }

    #[test]
    fn uniform_errors_yield_nothing() {
        let colors: Vec<&str> = (0..120).map(|i| ["a", "b", "c"][i % 3]).collect();
        let sizes = vec![1.0; 120];
        // every color has exactly 4 mistakes
        let correct: Vec<bool> = (0..120).map(|i| i >= 12).collect();
        let ds = dataset(&colors, &sizes);
        let cfg = MiningConfig { max_predicates: 2, min_support: 0.0, lift: 1.5, exclude: vec![] };
        assert!(mine_error_slices(&ds, &correct, &cfg).unwrap().is_empty());
        assert!(mine_error_slices(&ds, &[true; 120], &cfg).unwrap().is_empty());
    }

    #[test]
    fn depth_one_matches_brute_force() {
        let colors: Vec<&str> = (0..90).map(|i| ["x", "y", "z"][(i * 7) % 3]).collect();
        let sizes: Vec<f64> = (0..90).map(|i| ((i * 31) % 17) as f64).collect();
        let correct: Vec<bool> = (0..90).map(|i| (i * 11) % 5 != 0 || sizes[i] > 12.0).collect();
        let ds = dataset(&colors, &sizes);
        let cfg = MiningConfig { max_predicates: 1, min_support: 0.05, lift: 1.1, exclude: vec![] };
        let found = mine_error_slices(&ds, &correct, &cfg).unwrap();

        let overall = correct.iter().filter(|c| !**c).count() as f64 / 90.0;
        let mut expected = Vec::new();
        for feature in ["color", "size"] {
            for p in candidate_predicates(&ds, feature).unwrap() {
                let slice = Slice::new(vec![p]).unwrap();
                let st = slice_stats(&slice, &ds, Some(&correct)).unwrap();
                if st.support > 0 && st.fractional_support >= 0.05 && st.error_rate.unwrap() >= 1.1 * overall {
                    expected.push(slice);
                }
            }
        }
        let mut got: Vec<String> = found.iter().map(|m| serde_json::to_string(&m.slice).unwrap()).collect();
        let mut want: Vec<String> = expected.iter().map(|s| serde_json::to_string(s).unwrap()).collect();
        got.sort();
        want.sort();
        assert_eq!(got, want);
        assert!(!got.is_empty());
    }

    #[test]
    fn pairs_and_exclusions() {
        let colors: Vec<&str> = (0..100).map(|i| if i % 2 == 0 { "even" } else { "odd" }).collect();
        let sizes: Vec<f64> = (0..100).map(f64::from).collect();
        let correct: Vec<bool> = (0..100).map(|i| !(i % 2 == 0 && i < 20)).collect();
        let ds = dataset(&colors, &sizes);
        let cfg = MiningConfig { max_predicates: 2, min_support: 0.01, lift: 2.0, exclude: vec![] };
        let found = mine_error_slices(&ds, &correct, &cfg).unwrap();
        assert_eq!(found[0].slice.predicates().len(), 2);
        assert!(found.windows(2).all(|w| w[0].stats.error_rate >= w[1].stats.error_rate));
        let cfg = MiningConfig { exclude: vec!["size".into()], ..cfg };
        let found = mine_error_slices(&ds, &correct, &cfg).unwrap();
        assert!(found.iter().all(|m| m.slice.features().all(|f| f == "color")));
        assert!(mine_error_slices(&ds, &correct[..5], &cfg).is_err());
    }
}
