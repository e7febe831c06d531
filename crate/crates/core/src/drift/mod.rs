//! Two-sample drift measures.
//!
//! Every measure reports a [`TestResult`]. Its decision comes either from a
//! p-value compared with `alpha` or from an effect size compared with a
//! threshold, never from both.

mod categorical;
mod numeric;

pub use categorical::*;
pub use numeric::*;

use crate::pvalues::PValue;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::{BTreeMap, HashSet};

/// Effect sizes this close to a threshold count as reaching it.
const BOUNDARY_SLACK: f64 = 1e-12;

/// Default effect-size threshold for a drift decision (the "small" effect).
pub const DEFAULT_EFFECT_THRESHOLD: f64 = 0.2;

/// Dissimilarity index values below this mean the distributions are very close.
pub const DISSIMILARITY_THRESHOLD: f64 = 0.03;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decision {
    Drift,
    NoDrift,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EffectLabel {
    #[serde(rename = "very small")]
    VerySmall,
    #[serde(rename = "small")]
    Small,
    #[serde(rename = "medium")]
    Medium,
    #[serde(rename = "large")]
    Large,
    #[serde(rename = "very large")]
    VeryLarge,
    #[serde(rename = "huge")]
    Huge,
}

/// Threshold tables for effect-size labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EffectScale {
    /// Cohen's d and h: 0.2 small, 0.5 medium, 0.8 large.
    MeanOrProportion,
    /// Cohen's w: 0.01, 0.2, 0.5, 0.8, 1.2, 2.0 from very small to huge.
    Frequencies,
}

impl EffectScale {
    fn table(self) -> &'static [(f64, EffectLabel)] {
        use EffectLabel::*;
        match self {
            EffectScale::MeanOrProportion => &[(0.2, Small), (0.5, Medium), (0.8, Large)],
            EffectScale::Frequencies => {
                &[(0.01, VerySmall), (0.2, Small), (0.5, Medium), (0.8, Large), (1.2, VeryLarge), (2.0, Huge)]
            }
        }
    }

    /// Label for `|effect|`; a value on a boundary takes the larger label.
    /// `None` below the smallest threshold.
    pub fn label(self, effect: f64) -> Option<EffectLabel> {
        let x = effect.abs();
        self.table().iter().rev().find(|(t, _)| reaches(x, *t)).map(|&(_, l)| l)
    }
}

fn reaches(x: f64, threshold: f64) -> bool {
    x >= threshold - BOUNDARY_SLACK * threshold.abs().max(1.0)
}

/// Outcome of one drift test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub test_name: String,
    /// NaN when the statistic is undefined (serialized as `null`).
    #[serde(with = "nan_as_null")]
    pub statistic: f64,
    pub p_value: Option<PValue>,
    pub effect_size: Option<f64>,
    pub effect_label: Option<EffectLabel>,
    pub decision: Decision,
    /// `None` for plain measurements that carry no decision rule.
    pub alpha_or_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, Value>,
}

impl TestResult {
    /// Drift iff `p < alpha`.
    pub fn from_pvalue(name: &str, statistic: f64, p: PValue, alpha: f64) -> Self {
        TestResult {
            test_name: name.to_owned(),
            statistic,
            p_value: Some(p),
            effect_size: None,
            effect_label: None,
            decision: if p.value < alpha { Decision::Drift } else { Decision::NoDrift },
            alpha_or_threshold: Some(alpha),
            details: BTreeMap::new(),
        }
    }

    /// Drift iff `|effect| >= threshold`.
    pub fn from_effect(name: &str, effect: f64, scale: Option<EffectScale>, threshold: f64) -> Self {
        TestResult {
            test_name: name.to_owned(),
            statistic: effect,
            p_value: None,
            effect_size: Some(effect),
            effect_label: scale.and_then(|s| s.label(effect)),
            decision: if reaches(effect.abs(), threshold) { Decision::Drift } else { Decision::NoDrift },
            alpha_or_threshold: Some(threshold),
            details: BTreeMap::new(),
        }
    }

    /// A distance reported without a decision rule.
    pub fn measurement(name: &str, value: f64) -> Self {
        TestResult {
            test_name: name.to_owned(),
            statistic: value,
            p_value: None,
            effect_size: Some(value),
            effect_label: None,
            decision: Decision::NotApplicable,
            alpha_or_threshold: None,
            details: BTreeMap::new(),
        }
    }

    pub fn not_applicable(name: &str, statistic: f64, reason: &str, alpha_or_threshold: Option<f64>) -> Self {
        let mut r = TestResult::measurement(name, statistic);
        r.effect_size = None;
        r.alpha_or_threshold = alpha_or_threshold;
        r.details.insert("reason".into(), Value::from(reason));
        r
    }

    pub fn with_detail(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.details.insert(key.to_owned(), value.into());
        self
    }

    pub fn is_drift(&self) -> bool {
        self.decision == Decision::Drift
    }

    pub fn p(&self) -> Option<f64> {
        self.p_value.map(|p| p.value)
    }
}

mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_nan() {
            s.serialize_none()
        } else {
            s.serialize_f64(*x)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// Category counts with at least one observation in total.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoricalCounts {
    labels: Vec<String>,
    counts: Vec<u64>,
}

impl CategoricalCounts {
    pub fn new(labels: Vec<String>, counts: Vec<u64>) -> Result<Self> {
        if labels.len() != counts.len() {
            return Err(Error::param("counts", "labels and counts differ in length"));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        if counts.iter().sum::<u64>() == 0 {
            return Err(Error::EmptySample);
        }
        Ok(CategoricalCounts { labels, counts })
    }

    pub fn from_pairs<S: Into<String>>(pairs: impl IntoIterator<Item = (S, u64)>) -> Result<Self> {
        let (labels, counts) = pairs.into_iter().map(|(l, c)| (l.into(), c)).unzip();
        Self::new(labels, counts)
    }

    /// Tallies observations; labels are kept in sorted order.
    pub fn from_observations<S: AsRef<str>>(obs: impl IntoIterator<Item = S>) -> Result<Self> {
        let mut tally: BTreeMap<String, u64> = BTreeMap::new();
        for o in obs {
            *tally.entry(o.as_ref().to_owned()).or_default() += 1;
        }
        Self::from_pairs(tally)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn count_of(&self, label: &str) -> u64 {
        self.labels.iter().position(|l| l == label).map_or(0, |i| self.counts[i])
    }

    pub fn proportions(&self) -> Vec<f64> {
        let n = self.total() as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    pub fn proportion_of(&self, label: &str) -> f64 {
        self.count_of(label) as f64 / self.total() as f64
    }
}

/// Union of both label sets (first `a`'s order, then labels new in `b`) with
/// each side's proportions; absent labels get proportion 0.
pub fn unify(a: &CategoricalCounts, b: &CategoricalCounts) -> (Vec<String>, Vec<f64>, Vec<f64>) {
    let mut labels = a.labels.clone();
    for l in &b.labels {
        if !labels.contains(l) {
            labels.push(l.clone());
        }
    }
    let pa = labels.iter().map(|l| a.proportion_of(l)).collect();
    let pb = labels.iter().map(|l| b.proportion_of(l)).collect();
    (labels, pa, pb)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_follow_tables() {
        let d = EffectScale::MeanOrProportion;
        assert_eq!(d.label(0.1), None);
        assert_eq!(d.label(0.2), Some(EffectLabel::Small));
        assert_eq!(d.label(-0.5), Some(EffectLabel::Medium));
        assert_eq!(d.label(0.79), Some(EffectLabel::Medium));
        assert_eq!(d.label(3.0), Some(EffectLabel::Large));
        let w = EffectScale::Frequencies;
        assert_eq!(w.label(0.005), None);
        assert_eq!(w.label(0.01), Some(EffectLabel::VerySmall));
        assert_eq!(w.label(0.19999999999999996), Some(EffectLabel::Small));
        assert_eq!(w.label(1.2), Some(EffectLabel::VeryLarge));
        assert_eq!(w.label(2.0), Some(EffectLabel::Huge));
    }

    #[test]
    fn counts_validation() {
        assert!(CategoricalCounts::from_pairs([("a", 0u64)]).is_err());
        assert!(CategoricalCounts::from_pairs([("a", 1u64), ("a", 2)]).is_err());
        let c = CategoricalCounts::from_observations(["b", "a", "b"]).unwrap();
        assert_eq!(c.labels(), &["a".to_string(), "b".to_string()]);
        assert_eq!(c.counts(), &[1, 2]);
        let total: f64 = c.proportions().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unify_fills_missing_labels() {
        let a = CategoricalCounts::from_pairs([("x", 3u64), ("y", 1)]).unwrap();
        let b = CategoricalCounts::from_pairs([("z", 2u64), ("x", 2)]).unwrap();
        let (labels, pa, pb) = unify(&a, &b);
        assert_eq!(labels, vec!["x", "y", "z"]);
        assert_eq!(pa, vec![0.75, 0.25, 0.0]);
        assert_eq!(pb, vec![0.5, 0.0, 0.5]);
    }

    #[test]
    fn decision_rules() {
        let r = TestResult::from_pvalue("t", 1.0, PValue::analytic(0.01), 0.05);
        assert!(r.is_drift());
        let r = TestResult::from_pvalue("t", 1.0, PValue::analytic(0.05), 0.05);
        assert!(!r.is_drift());
        let r = TestResult::from_effect("d", -0.2, Some(EffectScale::MeanOrProportion), 0.2);
        assert!(r.is_drift());
        assert_eq!(r.effect_label, Some(EffectLabel::Small));
    }

    #[test]
    fn serde_names() {
        assert_eq!(serde_json::to_string(&Decision::NoDrift).unwrap(), "\"no-drift\"");
        assert_eq!(serde_json::to_string(&EffectLabel::VeryLarge).unwrap(), "\"very large\"");
        let na = TestResult::not_applicable("x", f64::NAN, "why", Some(0.05));
        let json = serde_json::to_string(&na).unwrap();
        assert!(json.contains("\"statistic\":null"));
        let back: TestResult = serde_json::from_str(&json).unwrap();
        assert!(back.statistic.is_nan());
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
    }
}
