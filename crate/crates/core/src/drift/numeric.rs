//! Drift measures on numeric samples.

use super::{EffectScale, TestResult};
use crate::empirical::{mean, variance, Sample};
use crate::pvalues::{kolmogorov_sf, normal_sf, permutation_pvalue, student_t_two_sided, PValue};
use crate::{Error, Result};

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut v = v.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// `sup_x |F_a(x) - F_b(x)|`, evaluated at every pooled point so ties are
/// stepped over together.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let (a, b) = (sorted(a), sorted(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    // once one sample is exhausted the gap only narrows
    d
}

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value
/// `Q(sqrt(n_a n_b / (n_a + n_b)) * D)`.
pub fn ks_two_sample(a: &Sample, b: &Sample, alpha: f64) -> TestResult {
    let d = ks_statistic(a.values(), b.values());
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let lambda = (na * nb / (na + nb)).sqrt() * d;
    TestResult::from_pvalue("ks", d, PValue::analytic(kolmogorov_sf(lambda)), alpha)
        .with_detail("n_a", a.len())
        .with_detail("n_b", b.len())
}

struct WelchParts {
    t: f64,
    df: f64,
}

fn welch_parts(a: &[f64], b: &[f64]) -> Result<WelchParts> {
    let (va, vb) = match (variance(a), variance(b)) {
        (Some(va), Some(vb)) => (va, vb),
        _ => return Err(Error::TooFewObservations { needed: 2, got: a.len().min(b.len()) }),
    };
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (sa, sb) = (va / na, vb / nb);
    let se2 = sa + sb;
    if se2 == 0.0 {
        return Err(Error::ZeroVariance("both samples are constant"));
    }
    let t = (mean(a) - mean(b)) / se2.sqrt();
    let df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    Ok(WelchParts { t, df })
}

/// Welch's t statistic; 0 where it is undefined (used by permutation tests).
pub fn welch_statistic(a: &[f64], b: &[f64]) -> f64 {
    welch_parts(a, b).map(|w| w.t).unwrap_or(0.0)
}

/// Welch's unequal-variance t-test with Welch-Satterthwaite degrees of freedom.
pub fn welch_t(a: &Sample, b: &Sample, alpha: f64) -> Result<TestResult> {
    let WelchParts { t, df } = welch_parts(a.values(), b.values())?;
    let p = student_t_two_sided(t, df)?;
    Ok(TestResult::from_pvalue("welch-t", t, PValue::analytic(p), alpha).with_detail("df", df))
}

struct RankSums {
    u_a: f64,
    tie_term: f64,
}

fn rank_sums(a: &[f64], b: &[f64]) -> RankSums {
    let mut pooled: Vec<(f64, bool)> = a.iter().map(|&x| (x, true)).chain(b.iter().map(|&x| (x, false))).collect();
    pooled.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut rank_sum_a = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i;
        while j + 1 < pooled.len() && pooled[j + 1].0 == pooled[i].0 {
            j += 1;
        }
        let midrank = (i + j) as f64 / 2.0 + 1.0;
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        rank_sum_a += midrank * pooled[i..=j].iter().filter(|p| p.1).count() as f64;
        i = j + 1;
    }
    let na = a.len() as f64;
    RankSums { u_a: rank_sum_a - na * (na + 1.0) / 2.0, tie_term }
}

/// Mann-Whitney `U` of sample `a` (midranks for ties): the number of
/// (a, b) pairs with `a > b`, counting ties as one half.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> f64 {
    rank_sums(a, b).u_a
}

/// Mann-Whitney U test: normal approximation with tie-corrected variance and
/// a 0.5 continuity correction. Not applicable when every pooled value is equal.
pub fn mann_whitney(a: &Sample, b: &Sample, alpha: f64) -> TestResult {
    let RankSums { u_a, tie_term } = rank_sums(a.values(), b.values());
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let n = na + nb;
    let mu = na * nb / 2.0;
    let var = if n > 1.0 { na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0))) } else { 0.0 };
    if var <= 0.0 {
        return TestResult::not_applicable("mann-whitney", u_a, "all pooled values are identical", Some(alpha));
    }
    let z = ((u_a - mu).abs() - 0.5).max(0.0) / var.sqrt();
    let p = (2.0 * normal_sf(z)).min(1.0);
    TestResult::from_pvalue("mann-whitney", u_a, PValue::analytic(p), alpha).with_detail("z", z)
}

/// First-order Wasserstein distance `integral |F_a - F_b| dx`, exact for
/// empirical distributions.
pub fn wasserstein_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let (sa, sb) = (sorted(a), sorted(b));
    let pooled = sorted(&[a, b].concat());
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut area = 0.0;
    for w in pooled.windows(2) {
        let x = w[0];
        while i < sa.len() && sa[i] <= x {
            i += 1;
        }
        while j < sb.len() && sb[j] <= x {
            j += 1;
        }
        area += (i as f64 / na - j as f64 / nb).abs() * (w[1] - x);
    }
    Ok(area)
}

pub fn wasserstein_1d(a: &Sample, b: &Sample) -> f64 {
    wasserstein_distance(a.values(), b.values()).expect("samples are non-empty")
}

/// Wasserstein distance with a permutation p-value, for a drift decision.
pub fn wasserstein_test(a: &Sample, b: &Sample, alpha: f64, permutations: usize, seed: u64) -> Result<TestResult> {
    let w = wasserstein_1d(a, b);
    let stat = |x: &[f64], y: &[f64]| wasserstein_distance(x, y).unwrap_or(0.0);
    let p = permutation_pvalue(a.values(), b.values(), stat, permutations, seed)?;
    Ok(TestResult::from_pvalue("wasserstein", w, p, alpha))
}

/// Cohen's d with the pooled (`n_a + n_b - 2`) standard deviation; the
/// decision compares `|d|` with `threshold`.
pub fn cohens_d(a: &Sample, b: &Sample, threshold: f64) -> Result<TestResult> {
    let (na, nb) = (a.len(), b.len());
    let (va, vb) = match (a.variance(), b.variance()) {
        (Some(va), Some(vb)) => (va, vb),
        _ => return Err(Error::TooFewObservations { needed: 2, got: na.min(nb) }),
    };
    let pooled = (((na - 1) as f64 * va + (nb - 1) as f64 * vb) / (na + nb - 2) as f64).sqrt();
    if pooled == 0.0 {
        return Err(Error::ZeroVariance("pooled standard deviation is zero"));
    }
    let d = (a.mean() - b.mean()) / pooled;
    Ok(TestResult::from_effect("cohens-d", d, Some(EffectScale::MeanOrProportion), threshold))
}
