//! Control intervals for performance statistics.
//!
//! A control interval is what remains of a sorted list of scores after
//! trimming the same fraction from both ends. Scores can be fresh samples,
//! bootstrap replicates, or the interval can be taken from the normal
//! approximation instead.

use crate::empirical::{accuracy_of, floor_rank, mean, LabeledSample, Sample};
use crate::pvalues::normal_quantile;
use crate::rng::{derive_seed, stream_rng};
use crate::{Error, Result};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Fewest bootstrap replicates accepted.
pub const MIN_REPLICATES: usize = 100;

/// Sample size below which the normal approximation is not advised.
pub const CLT_RULE_OF_THUMB: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntervalMethod {
    Trimmed,
    Bootstrap,
    Clt,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlInterval {
    pub lower: f64,
    pub upper: f64,
    pub confidence: f64,
    pub method: IntervalMethod,
    /// Number of scores the interval was cut from (bootstrap replicates,
    /// trimmed scores); the sample size for CLT intervals.
    pub replicate_count: usize,
}

impl ControlInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn overlaps(&self, other: &ControlInterval) -> bool {
        self.lower <= other.upper && other.lower <= self.upper
    }
}

pub type Aggregate = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Aggregate computed on each (re)sample of numeric scores.
#[derive(Clone)]
pub enum Statistic {
    Mean,
    /// Fraction of non-zero values; the success rate of a 0/1 sample.
    Proportion,
    Custom { name: String, aggregate: Aggregate },
}

impl Statistic {
    pub fn custom(name: impl Into<String>, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Statistic::Custom { name: name.into(), aggregate: Arc::new(f) }
    }

    pub fn name(&self) -> &str {
        match self {
            Statistic::Mean => "mean",
            Statistic::Proportion => "proportion",
            Statistic::Custom { name, .. } => name,
        }
    }

    pub fn apply(&self, values: &[f64]) -> f64 {
        match self {
            Statistic::Mean => mean(values),
            Statistic::Proportion => values.iter().filter(|&&v| v != 0.0).count() as f64 / values.len() as f64,
            Statistic::Custom { aggregate, .. } => aggregate(values),
        }
    }
}

impl fmt::Debug for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn check_trim(trim: f64) -> Result<()> {
    if !(trim > 0.0 && trim < 0.5) {
        return Err(Error::param("trim", format!("must lie in (0, 0.5), got {trim}")));
    }
    Ok(())
}

/// Drops `floor(trim * k)` scores from each end of the sorted list; the
/// interval spans the remaining extremes, ranks `floor(trim*k) + 1` through
/// `k - floor(trim*k)`. Requires `k >= ceil(1 / trim)` so each side loses at
/// least one score.
pub fn trimmed_interval(scores: &Sample, trim: f64) -> Result<ControlInterval> {
    check_trim(trim)?;
    trimmed_from_sorted(scores.sorted(), trim, IntervalMethod::Trimmed)
}

fn trimmed_from_sorted(sorted: Vec<f64>, trim: f64, method: IntervalMethod) -> Result<ControlInterval> {
    let k = sorted.len();
    let needed = (1.0 / trim - 1e-9).ceil() as usize;
    if k < needed {
        return Err(Error::TooFewObservations { needed, got: k });
    }
    let cut = floor_rank(trim * k as f64);
    Ok(ControlInterval {
        lower: sorted[cut],
        upper: sorted[k - cut - 1],
        confidence: 1.0 - 2.0 * trim,
        method,
        replicate_count: k,
    })
}

/// Statistic values on `k` bootstrap resamples of `source`, each the size of
/// `source`. Replicate `r` uses stream `r` of `seed`.
pub fn bootstrap_replicates<T, F>(source: &[T], stat: F, k: usize, seed: u64) -> Result<Vec<f64>>
where
    T: Clone + Send + Sync,
    F: Fn(&[T]) -> f64 + Sync,
{
    if source.is_empty() {
        return Err(Error::EmptySample);
    }
    if k < MIN_REPLICATES {
        return Err(Error::param("replicates", format!("need at least {MIN_REPLICATES}, got {k}")));
    }
    let n = source.len();
    Ok((0..k)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(n),
            |buf: &mut Vec<T>, r| {
                let mut rng = stream_rng(seed, r as u64);
                buf.clear();
                buf.extend((0..n).map(|_| source[rng.gen_range(0..n)].clone()));
                stat(buf)
            },
        )
        .collect())
}

/// Bootstrap control interval for an arbitrary statistic over any item type.
pub fn bootstrap_interval_with<T, F>(source: &[T], stat: F, k: usize, trim: f64, seed: u64) -> Result<ControlInterval>
where
    T: Clone + Send + Sync,
    F: Fn(&[T]) -> f64 + Sync,
{
    check_trim(trim)?;
    let mut reps = bootstrap_replicates(source, stat, k, seed)?;
    reps.sort_by(f64::total_cmp);
    trimmed_from_sorted(reps, trim, IntervalMethod::Bootstrap)
}

pub fn bootstrap_interval(source: &Sample, stat: &Statistic, k: usize, trim: f64, seed: u64) -> Result<ControlInterval> {
    bootstrap_interval_with(source.values(), |v| stat.apply(v), k, trim, seed)
}

/// Bootstrap interval for the accuracy of labelled predictions.
pub fn bootstrap_accuracy_interval<L>(source: &LabeledSample<L>, k: usize, trim: f64, seed: u64) -> Result<ControlInterval>
where
    L: Clone + Ord + Send + Sync,
{
    bootstrap_interval_with(source.items(), accuracy_of, k, trim, seed)
}

/// `mean +- z * s / sqrt(n)` with `s` the `n - 1` standard deviation.
///
/// Intended for `n >= 30`; smaller samples are accepted (down to 2) but the
/// normal approximation is then questionable.
pub fn clt_interval(sample: &Sample, confidence: f64) -> Result<ControlInterval> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::param("confidence", format!("must lie in (0, 1), got {confidence}")));
    }
    let n = sample.len();
    let var = sample.variance().ok_or(Error::TooFewObservations { needed: 2, got: n })?;
    let z = normal_quantile(0.5 + confidence / 2.0)?;
    let half = z * var.sqrt() / (n as f64).sqrt();
    let m = sample.mean();
    Ok(ControlInterval { lower: m - half, upper: m + half, confidence, method: IntervalMethod::Clt, replicate_count: n })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelComparison {
    pub interval_a: ControlInterval,
    pub interval_b: ControlInterval,
    /// True when the two bootstrap intervals are disjoint.
    pub distinguishable: bool,
}

/// Bootstraps both score lists and checks whether their intervals overlap.
pub fn compare_models(
    scores_a: &Sample,
    scores_b: &Sample,
    stat: &Statistic,
    k: usize,
    trim: f64,
    seed: u64,
) -> Result<ModelComparison> {
    let interval_a = bootstrap_interval(scores_a, stat, k, trim, derive_seed(seed, 0))?;
    let interval_b = bootstrap_interval(scores_b, stat, k, trim, derive_seed(seed, 1))?;
    Ok(ModelComparison { distinguishable: !interval_a.overlaps(&interval_b), interval_a, interval_b })
}
