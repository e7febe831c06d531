//! Samples, empirical distribution functions and resampling.

use crate::rng::stream_rng;
use crate::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

// Guards ceil/floor of q*n against products like 0.07 * 100 = 7.000000000000001.
const RANK_SLACK: f64 = 1e-9;

/// Non-empty list of finite observations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    values: Vec<f64>,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Sample { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; kept for clippy's `len_without_is_empty`.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }

    /// Unbiased variance (divisor `n - 1`); `None` when `n < 2`.
    pub fn variance(&self) -> Option<f64> {
        variance(&self.values)
    }

    /// Values in non-decreasing order.
    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v
    }
}

impl<'de> Deserialize<'de> for Sample {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            values: Vec<f64>,
        }
        let raw = Raw::deserialize(de)?;
        Sample::new(raw.values).map_err(serde::de::Error::custom)
    }
}

impl TryFrom<Vec<f64>> for Sample {
    type Error = Error;
    fn try_from(values: Vec<f64>) -> Result<Self> {
        Sample::new(values)
    }
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub(crate) fn variance(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let m = mean(values);
    Some(values.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (values.len() - 1) as f64)
}

/// `(prediction, label)` pairs over one label alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample<L> {
    items: Vec<(L, L)>,
}

impl<L: Clone + Ord> LabeledSample<L> {
    pub fn new(items: Vec<(L, L)>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::EmptySample);
        }
        Ok(LabeledSample { items })
    }

    pub fn from_columns(predictions: Vec<L>, labels: Vec<L>) -> Result<Self> {
        if predictions.len() != labels.len() {
            return Err(Error::param("labels", "prediction and label columns differ in length"));
        }
        Self::new(predictions.into_iter().zip(labels).collect())
    }

    pub fn items(&self) -> &[(L, L)] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Fraction of items whose prediction equals the label.
pub fn sample_accuracy<L: PartialEq>(s: &LabeledSample<L>) -> f64 {
    accuracy_of(&s.items)
}

pub fn accuracy_of<L: PartialEq>(items: &[(L, L)]) -> f64 {
    items.iter().filter(|(p, y)| p == y).count() as f64 / items.len() as f64
}

/// Per-label mistake rate among items with that true label.
///
/// Labels that occur only as predictions have no true-label items; they are
/// reported as `None` rather than a rate of zero.
pub fn conditional_error_rates<L: Clone + Ord>(s: &LabeledSample<L>) -> BTreeMap<L, Option<f64>> {
    let mut tallies: BTreeMap<L, (usize, usize)> = BTreeMap::new();
    for (pred, label) in &s.items {
        let t = tallies.entry(label.clone()).or_default();
        t.0 += 1;
        if pred != label {
            t.1 += 1;
        }
        tallies.entry(pred.clone()).or_default();
    }
    tallies
        .into_iter()
        .map(|(l, (n, wrong))| (l, (n > 0).then(|| wrong as f64 / n as f64)))
        .collect()
}

/// Right-continuous step function `F(x) = #{values <= x} / n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCdf {
    sorted_values: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(sample: &Sample) -> Self {
        EmpiricalCdf { sorted_values: sample.sorted() }
    }

    pub fn len(&self) -> usize {
        self.sorted_values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn sorted_values(&self) -> &[f64] {
        &self.sorted_values
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.sorted_values.partition_point(|&v| v <= x) as f64 / self.len() as f64
    }

    /// The `ceil(q * n)`-th smallest value (1-based); `q = 0` gives the minimum.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::param("q", format!("must lie in [0, 1], got {q}")));
        }
        let n = self.len();
        let rank = ((q * n as f64 - RANK_SLACK).ceil() as usize).clamp(1, n);
        Ok(self.sorted_values[rank - 1])
    }
}

pub fn ecdf_build(sample: &Sample) -> EmpiricalCdf {
    EmpiricalCdf::new(sample)
}

pub(crate) fn floor_rank(x: f64) -> usize {
    (x + RANK_SLACK).floor() as usize
}

fn check_draws(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::param("m", "must be positive"));
    }
    Ok(())
}

/// Draws `m` items i.i.d. uniformly from `src` using `rng`.
pub fn resample_with<T: Clone, R: Rng + ?Sized>(src: &[T], m: usize, rng: &mut R) -> Result<Vec<T>> {
    if src.is_empty() {
        return Err(Error::EmptySample);
    }
    check_draws(m)?;
    Ok((0..m).map(|_| src[rng.gen_range(0..src.len())].clone()).collect())
}

/// Draws `m` items i.i.d. uniformly from `src`; deterministic in `seed`.
pub fn resample_with_replacement<T: Clone>(src: &[T], m: usize, seed: u64) -> Result<Vec<T>> {
    resample_with(src, m, &mut stream_rng(seed, 0))
}

/// Each draw picks a group uniformly, then an element uniformly within it.
/// Returns `(group label, element)` pairs.
pub fn balanced_resample<L: Clone + Ord, T: Clone>(
    groups: &BTreeMap<L, Vec<T>>,
    m: usize,
    seed: u64,
) -> Result<Vec<(L, T)>> {
    if groups.is_empty() || groups.values().any(Vec::is_empty) {
        return Err(Error::EmptySample);
    }
    check_draws(m)?;
    let groups: Vec<(&L, &Vec<T>)> = groups.iter().collect();
    let mut rng = stream_rng(seed, 0);
    Ok((0..m)
        .map(|_| {
            let (label, members) = groups[rng.gen_range(0..groups.len())];
            (label.clone(), members[rng.gen_range(0..members.len())].clone())
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(v: &[f64]) -> Sample {
        Sample::new(v.to_vec()).unwrap()
    }

    #[test]
    fn rejects_empty_and_non_finite() {
        assert_eq!(Sample::new(vec![]), Err(Error::EmptySample));
        assert!(matches!(Sample::new(vec![1.0, f64::NAN]), Err(Error::NonFinite { index: 1, .. })));
        assert!(Sample::new(vec![f64::INFINITY]).is_err());
        assert!(serde_json::from_str::<Sample>(r#"{"values":[]}"#).is_err());
    }

    #[test]
    fn die_parity_example() {
        let cdf = ecdf_build(&sample(&[0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0]));
        assert!((cdf.eval(0.0) - 4.0 / 9.0).abs() < 1e-15);
        assert_eq!(cdf.eval(-0.5), 0.0);
        assert_eq!(cdf.eval(1.0), 1.0);
        assert_eq!(cdf.eval(7.0), 1.0);
    }

    #[test]
    fn quantile_convention() {
        let cdf = ecdf_build(&Sample::new((1..=1000).map(f64::from).collect()).unwrap());
        assert_eq!(cdf.quantile(0.025).unwrap(), 25.0);
        assert_eq!(cdf.quantile(0.0).unwrap(), 1.0);
        assert_eq!(cdf.quantile(1.0).unwrap(), 1000.0);
        let cdf = ecdf_build(&Sample::new((1..=100).map(f64::from).collect()).unwrap());
        assert_eq!(cdf.quantile(0.5).unwrap(), 50.0);
        assert_eq!(cdf.quantile(0.07).unwrap(), 7.0);
        assert_eq!(cdf.quantile(0.071).unwrap(), 8.0);
        assert!(cdf.quantile(1.01).is_err());
        assert!(cdf.quantile(-0.1).is_err());
    }

    fn labeled(correct: usize, wrong: usize) -> LabeledSample<i32> {
        let mut items = vec![(1, 1); correct];
        items.extend(std::iter::repeat_n((-1, 1), wrong));
        LabeledSample::new(items).unwrap()
    }

    #[test]
    fn accuracy_counts() {
        assert_eq!(sample_accuracy(&labeled(10, 0)), 1.0);
        assert!((sample_accuracy(&labeled(950, 50)) - 0.95).abs() < 1e-15);
        assert_eq!(sample_accuracy(&labeled(3, 1)), 0.75);
    }

    #[test]
    fn error_rates_per_label() {
        let mut items = Vec::new();
        items.extend(std::iter::repeat_n((1, 1), 490));
        items.extend(std::iter::repeat_n((-1, 1), 10));
        items.extend(std::iter::repeat_n((-1, -1), 460));
        items.extend(std::iter::repeat_n((1, -1), 40));
        let s = LabeledSample::new(items).unwrap();
        let rates = conditional_error_rates(&s);
        assert!((rates[&1].unwrap() - 0.02).abs() < 1e-15);
        assert!((rates[&-1].unwrap() - 0.08).abs() < 1e-15);
        assert!((sample_accuracy(&s) - 0.95).abs() < 1e-15);
    }

    #[test]
    fn error_rate_absent_label_is_undefined() {
        let s = LabeledSample::new(vec![("cat", "dog"), ("dog", "dog")]).unwrap();
        let rates = conditional_error_rates(&s);
        assert_eq!(rates[&"cat"], None);
        assert_eq!(rates[&"dog"], Some(0.5));
        let perfect = LabeledSample::new(vec![("a", "a"), ("b", "b")]).unwrap();
        assert!(conditional_error_rates(&perfect).values().all(|r| *r == Some(0.0)));
    }

    #[test]
    fn resampling_basics() {
        assert_eq!(resample_with_replacement(&[7u8], 5, 1).unwrap(), vec![7; 5]);
        assert!(resample_with_replacement::<u8>(&[], 5, 1).is_err());
        assert!(resample_with_replacement(&[1u8], 0, 1).is_err());
        let src: Vec<u32> = (0..100).collect();
        assert_eq!(resample_with_replacement(&src, 50, 9).unwrap(), resample_with_replacement(&src, 50, 9).unwrap());
        assert_ne!(resample_with_replacement(&src, 50, 9).unwrap(), resample_with_replacement(&src, 50, 10).unwrap());
    }

    #[test]
    fn balanced_single_group_matches_plain() {
        let mut groups = BTreeMap::new();
        groups.insert("only", vec![1, 2, 3]);
        let drawn: Vec<i32> = balanced_resample(&groups, 20, 3).unwrap().into_iter().map(|(_, x)| x).collect();
        assert!(drawn.iter().all(|x| (1..=3).contains(x)));
        groups.insert("empty", vec![]);
        assert!(balanced_resample(&groups, 20, 3).is_err());
    }

    proptest! {
        #[test]
        fn ecdf_is_monotone_step(values in prop::collection::vec(-1e6f64..1e6, 1..50), probes in prop::collection::vec(-2e6f64..2e6, 1..20)) {
            let cdf = ecdf_build(&Sample::new(values.clone()).unwrap());
            let mut probes = probes;
            probes.sort_by(f64::total_cmp);
            let mut prev = 0.0;
            for x in probes {
                let f = cdf.eval(x);
                prop_assert!((0.0..=1.0).contains(&f));
                prop_assert!(f >= prev);
                prev = f;
            }
            let max = values.iter().cloned().fold(f64::MIN, f64::max);
            prop_assert_eq!(cdf.eval(max), 1.0);
            for &v in &values {
                let count = values.iter().filter(|&&w| w <= v).count();
                prop_assert_eq!(cdf.eval(v), count as f64 / values.len() as f64);
            }
        }

        #[test]
        fn accuracy_decomposes_over_labels(pairs in prop::collection::vec((0u8..4, 0u8..4), 1..80)) {
            let s = LabeledSample::new(pairs.clone()).unwrap();
            let rates = conditional_error_rates(&s);
            let n = pairs.len() as f64;
            let mut weighted = 0.0;
            for (label, rate) in &rates {
                let freq = pairs.iter().filter(|(_, y)| y == label).count() as f64 / n;
                if let Some(r) = rate {
                    weighted += freq * r;
                }
            }
            prop_assert!((sample_accuracy(&s) - (1.0 - weighted)).abs() < 1e-12);
        }
    }
}
