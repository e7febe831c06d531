//! Drift measures on categorical distributions and proportions.

use super::{unify, CategoricalCounts, EffectScale, TestResult, DISSIMILARITY_THRESHOLD};
use crate::pvalues::{chi_square_sf, PValue};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Successes out of trials in two independent groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProportionPair {
    pub successes_a: u64,
    pub trials_a: u64,
    pub successes_b: u64,
    pub trials_b: u64,
}

impl ProportionPair {
    pub fn new(successes_a: u64, trials_a: u64, successes_b: u64, trials_b: u64) -> Result<Self> {
        if trials_a == 0 || trials_b == 0 {
            return Err(Error::param("trials", "must be at least 1"));
        }
        if successes_a > trials_a || successes_b > trials_b {
            return Err(Error::param("successes", "cannot exceed trials"));
        }
        Ok(ProportionPair { successes_a, trials_a, successes_b, trials_b })
    }

    /// Share of `positive` in each of two count tables.
    pub fn from_counts(a: &CategoricalCounts, b: &CategoricalCounts, positive: &str) -> Result<Self> {
        Self::new(a.count_of(positive), a.total(), b.count_of(positive), b.total())
    }

    pub fn proportion_a(&self) -> f64 {
        self.successes_a as f64 / self.trials_a as f64
    }

    pub fn proportion_b(&self) -> f64 {
        self.successes_b as f64 / self.trials_b as f64
    }

    pub fn swapped(&self) -> Self {
        ProportionPair {
            successes_a: self.successes_b,
            trials_a: self.trials_b,
            successes_b: self.successes_a,
            trials_b: self.trials_a,
        }
    }
}

/// Pairs each expected label with its observed count. Labels seen only in
/// `observed` have an expected count of zero, which is an error.
fn aligned(expected: &CategoricalCounts, observed: &CategoricalCounts) -> Result<Vec<(u64, u64)>> {
    for l in observed.labels() {
        if expected.count_of(l) == 0 {
            return Err(Error::ZeroExpectedCell(l.clone()));
        }
    }
    expected
        .labels()
        .iter()
        .zip(expected.counts())
        .map(|(l, &e)| if e == 0 { Err(Error::ZeroExpectedCell(l.clone())) } else { Ok((e, observed.count_of(l))) })
        .collect()
}

/// One-way chi-square goodness of fit, `sum (obs - exp)^2 / exp` with
/// `k - 1` degrees of freedom. Not applicable when the totals differ.
pub fn chi_square_gof(expected: &CategoricalCounts, observed: &CategoricalCounts, alpha: f64) -> Result<TestResult> {
    let cells = aligned(expected, observed)?;
    let stat: f64 = cells.iter().map(|&(e, o)| (o as f64 - e as f64).powi(2) / e as f64).sum();
    if expected.total() != observed.total() {
        return Ok(TestResult::not_applicable(
            "chi-square",
            stat,
            "expected and observed totals differ; use cohens-w for proportions",
            Some(alpha),
        ));
    }
    let df = cells.len().saturating_sub(1);
    if df == 0 {
        return Ok(TestResult::not_applicable("chi-square", stat, "a single category has no degrees of freedom", Some(alpha)));
    }
    let p = chi_square_sf(df as f64, stat)?;
    Ok(TestResult::from_pvalue("chi-square", stat, PValue::analytic(p), alpha).with_detail("df", df))
}

/// Cohen's w on proportions, so totals may differ:
/// `sqrt(sum (pi'_i - pi_i)^2 / pi_i)` with `pi` the expected proportions.
pub fn cohens_w(expected: &CategoricalCounts, observed: &CategoricalCounts, threshold: f64) -> Result<TestResult> {
    let cells = aligned(expected, observed)?;
    let (ne, no) = (expected.total() as f64, observed.total() as f64);
    let w = cells
        .iter()
        .map(|&(e, o)| {
            let (pe, po) = (e as f64 / ne, o as f64 / no);
            (po - pe).powi(2) / pe
        })
        .sum::<f64>()
        .sqrt();
    Ok(TestResult::from_effect("cohens-w", w, Some(EffectScale::Frequencies), threshold))
}

/// Cohen's h as `arcsin(sqrt(pi_1)) - arcsin(sqrt(pi_2))`.
///
/// This is half the textbook `2 arcsin sqrt(p)` transform; the 0.2/0.5/0.8
/// labels are applied to this value as is.
pub fn cohens_h(pair: &ProportionPair, threshold: f64) -> TestResult {
    let h = pair.proportion_a().sqrt().asin() - pair.proportion_b().sqrt().asin();
    TestResult::from_effect("cohens-h", h, Some(EffectScale::MeanOrProportion), threshold)
}

/// `0.5 * sum |pi_i - pi'_i|` over the union of labels.
pub fn dissimilarity(a: &CategoricalCounts, b: &CategoricalCounts) -> f64 {
    let (_, pa, pb) = unify(a, b);
    0.5 * pa.iter().zip(&pb).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Dissimilarity index; no drift iff it falls below `threshold`
/// (conventionally [`DISSIMILARITY_THRESHOLD`]).
pub fn dissimilarity_index(a: &CategoricalCounts, b: &CategoricalCounts, threshold: f64) -> TestResult {
    TestResult::from_effect("dissimilarity", dissimilarity(a, b), None, threshold)
}

pub fn dissimilarity_index_default(a: &CategoricalCounts, b: &CategoricalCounts) -> TestResult {
    dissimilarity_index(a, b, DISSIMILARITY_THRESHOLD)
}

/// Hellinger distance `sqrt(1 - B)` with `B` the Bhattacharyya coefficient.
pub fn hellinger(a: &CategoricalCounts, b: &CategoricalCounts) -> f64 {
    let (_, pa, pb) = unify(a, b);
    hellinger_probs(&pa, &pb)
}

pub(crate) fn hellinger_probs(pa: &[f64], pb: &[f64]) -> f64 {
    let bc: f64 = pa.iter().zip(pb).map(|(x, y)| (x * y).sqrt()).sum();
    (1.0 - bc).max(0.0).sqrt()
}

fn distance_result(name: &str, value: f64, threshold: Option<f64>) -> TestResult {
    match threshold {
        Some(t) => TestResult::from_effect(name, value, None, t),
        None => TestResult::measurement(name, value),
    }
}

/// Hellinger distance as a test result; without a threshold it carries no decision.
pub fn hellinger_test(a: &CategoricalCounts, b: &CategoricalCounts, threshold: Option<f64>) -> TestResult {
    distance_result("hellinger", hellinger(a, b), threshold)
}

fn check_base(base: f64) -> Result<f64> {
    if !(base > 0.0) || base == 1.0 || !base.is_finite() {
        return Err(Error::param("base", format!("logarithm base must be positive and not 1, got {base}")));
    }
    Ok(base.ln())
}

/// `sum p_i log_base(p_i / q_i)` over indices where both are non-zero.
pub fn kl_divergence(p: &[f64], q: &[f64], base: f64) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::param("q", "probability vectors differ in length"));
    }
    let ln_base = check_base(base)?;
    let mut any = false;
    let mut sum = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi > 0.0 && qi > 0.0 {
            any = true;
            sum += pi * (pi / qi).ln();
        }
    }
    if !any {
        return Err(Error::NoCommonSupport);
    }
    Ok(sum / ln_base)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsDistance {
    pub distance: f64,
    /// Label with the largest pointwise contribution to the divergence.
    pub most_divergent_label: String,
}

/// Jensen-Shannon distance, the square root of the JS divergence, in the
/// given logarithm base. Bounded by 1 in base 2.
pub fn js_distance(a: &CategoricalCounts, b: &CategoricalCounts, base: f64) -> Result<JsDistance> {
    let ln_base = check_base(base)?;
    let (labels, pa, pb) = unify(a, b);
    let term = |x: f64, m: f64| if x > 0.0 { x * (x / m).ln() } else { 0.0 };
    let mut total = 0.0;
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, (&x, &y)) in pa.iter().zip(&pb).enumerate() {
        let m = 0.5 * (x + y);
        if m == 0.0 {
            continue;
        }
        let contrib = term(x, m) + term(y, m);
        total += contrib;
        if contrib > best.0 {
            best = (contrib, i);
        }
    }
    let divergence = (total / 2.0 / ln_base).max(0.0);
    Ok(JsDistance { distance: divergence.sqrt(), most_divergent_label: labels[best.1].clone() })
}

pub fn js_test(a: &CategoricalCounts, b: &CategoricalCounts, base: f64, threshold: Option<f64>) -> Result<TestResult> {
    let js = js_distance(a, b, base)?;
    Ok(distance_result("jensen-shannon", js.distance, threshold)
        .with_detail("base", base)
        .with_detail("most_divergent_label", js.most_divergent_label))
}

/// Yates continuity-corrected chi-square on the 2x2 table of a proportion
/// pair, `N (|ad - bc| - N/2)^2 / (r1 r2 c1 c2)`, with the corrected
/// difference clamped at zero. Not applicable when a margin is empty.
pub fn yates_diff_proportions(pair: &ProportionPair, alpha: f64) -> TestResult {
    let a = pair.successes_a as f64;
    let b = (pair.trials_a - pair.successes_a) as f64;
    let c = pair.successes_b as f64;
    let d = (pair.trials_b - pair.successes_b) as f64;
    let n = a + b + c + d;
    let margins = [a + b, c + d, a + c, b + d];
    if margins.contains(&0.0) {
        return TestResult::not_applicable("yates", f64::NAN, "a margin of the 2x2 table is empty", Some(alpha));
    }
    let diff = ((a * d - b * c).abs() - n / 2.0).max(0.0);
    let stat = n * diff * diff / margins.iter().product::<f64>();
    let p = chi_square_sf(1.0, stat).expect("df = 1 and statistic >= 0");
    TestResult::from_pvalue("yates", stat, PValue::analytic(p), alpha)
        .with_detail("proportion_a", pair.proportion_a())
        .with_detail("proportion_b", pair.proportion_b())
}
