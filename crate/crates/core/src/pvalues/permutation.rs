//! Two-sample permutation tests.
//!
//! Signed statistics are folded by absolute value, so every test here is
//! two-sided. The Monte Carlo estimator is `(1 + #{|T*| >= |T|}) / (m + 1)`
//! and never returns zero.

use super::PValue;
use crate::rng::stream_rng;
use crate::{Error, Result};
use rand::seq::SliceRandom;
use rayon::prelude::*;

/// Smallest permutation count accepted by [`permutation_pvalue`].
pub const MIN_PERMUTATIONS: usize = 199;

/// Largest number of splits [`exact_permutation_pvalue`] will enumerate.
pub const MAX_EXACT_SPLITS: u64 = 2_000_000;

fn at_least(permuted: f64, observed: f64) -> bool {
    // permuted statistics are summed in a different order; allow for last-bit noise
    permuted >= observed - 1e-12 * observed.max(1.0)
}

fn check_inputs(a: &[f64], b: &[f64]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(())
}

/// Monte Carlo permutation p-value for `statistic(a, b)` with `m` random relabellings.
///
/// Permutation `i` draws from stream `i` of `seed`, so the result does not
/// depend on thread scheduling.
pub fn permutation_pvalue<F>(a: &[f64], b: &[f64], statistic: F, m: usize, seed: u64) -> Result<PValue>
where
    F: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    check_inputs(a, b)?;
    if m < MIN_PERMUTATIONS {
        return Err(Error::param("permutations", format!("need at least {MIN_PERMUTATIONS}, got {m}")));
    }
    let observed = statistic(a, b).abs();
    let na = a.len();
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let exceed = (0..m)
        .into_par_iter()
        .map_init(
            || pooled.clone(),
            |buf, i| {
                buf.copy_from_slice(&pooled);
                let mut rng = stream_rng(seed, i as u64);
                buf.shuffle(&mut rng);
                let (left, right) = buf.split_at(na);
                at_least(statistic(left, right).abs(), observed) as usize
            },
        )
        .sum::<usize>();
    Ok(PValue::permutation((1 + exceed) as f64 / (m + 1) as f64, m))
}

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc.saturating_mul((n - i) as u64) / (i as u64 + 1))
}

/// Exact permutation p-value: enumerates every split of the pooled data into
/// groups of the original sizes. The observed split is one of them, so the
/// result is at least `1 / C(n_a + n_b, n_a)`.
pub fn exact_permutation_pvalue<F>(a: &[f64], b: &[f64], statistic: F) -> Result<PValue>
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    check_inputs(a, b)?;
    let n = a.len() + b.len();
    let na = a.len();
    let splits = binomial(n, na);
    if splits > MAX_EXACT_SPLITS {
        return Err(Error::param("samples", format!("{splits} splits exceeds the exact enumeration limit")));
    }
    let observed = statistic(a, b).abs();
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let mut chosen: Vec<usize> = (0..na).collect();
    let mut left = Vec::with_capacity(na);
    let mut right = Vec::with_capacity(n - na);
    let mut exceed = 0u64;
    loop {
        left.clear();
        right.clear();
        let mut next = 0;
        for (i, &x) in pooled.iter().enumerate() {
            if next < na && chosen[next] == i {
                left.push(x);
                next += 1;
            } else {
                right.push(x);
            }
        }
        if at_least(statistic(&left, &right).abs(), observed) {
            exceed += 1;
        }
        // advance to the next combination in lexicographic order
        let mut i = na;
        loop {
            if i == 0 {
                let p = exceed as f64 / splits as f64;
                return Ok(PValue::permutation(p, splits as usize));
            }
            i -= 1;
            if chosen[i] < n - na + i {
                break;
            }
        }
        chosen[i] += 1;
        for j in i + 1..na {
            chosen[j] = chosen[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().sum::<f64>() / a.len() as f64 - b.iter().sum::<f64>() / b.len() as f64
    }

    #[test]
    fn identical_samples_give_large_p() {
        let a: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let p = permutation_pvalue(&a, &a, mean_diff, 999, 1).unwrap();
        assert!(p.value > 0.9, "{p:?}");
        assert_eq!(p.permutation_count, Some(999));
    }

    #[test]
    fn never_zero() {
        let a = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7];
        let b = [100.0, 101.0, 102.0, 103.0, 104.0, 105.0, 106.0, 107.0];
        let p = permutation_pvalue(&a, &b, mean_diff, 199, 3).unwrap();
        assert!(p.value > 0.0);
        assert!(p.value <= 2.0 / 200.0);
    }

    #[test]
    fn exhaustive_separated_triples() {
        // 20 splits of {1..6}; only the observed split and its mirror reach |diff| = 3
        let p = exact_permutation_pvalue(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], mean_diff).unwrap();
        assert_eq!(p.permutation_count, Some(20));
        assert!((p.value - 2.0 / 20.0).abs() < 1e-15);
        // a one-sided statistic counts just the observed split: 1/C(6,3)
        let one_sided = |a: &[f64], b: &[f64]| mean_diff(a, b).min(0.0);
        let p = exact_permutation_pvalue(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], one_sided).unwrap();
        assert!((p.value - 1.0 / 20.0).abs() < 1e-15);
    }

    #[test]
    fn monte_carlo_approaches_exact() {
        let a = [1.0, 2.0, 3.0];
        let b = [4.0, 5.0, 6.0];
        let p = permutation_pvalue(&a, &b, mean_diff, 19_999, 11).unwrap();
        assert!((p.value - 0.1).abs() < 0.01, "{p:?}");
    }

    #[test]
    fn deterministic_under_seed() {
        let a: Vec<f64> = (0..15).map(|i| (i as f64).sin()).collect();
        let b: Vec<f64> = (0..17).map(|i| (i as f64).cos()).collect();
        let p1 = permutation_pvalue(&a, &b, mean_diff, 500, 42).unwrap();
        let p2 = permutation_pvalue(&a, &b, mean_diff, 500, 42).unwrap();
        assert_eq!(p1, p2);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(permutation_pvalue(&[], &[1.0], mean_diff, 999, 0).is_err());
        assert!(permutation_pvalue(&[1.0], &[1.0], mean_diff, 10, 0).is_err());
        assert!(exact_permutation_pvalue(&[1.0], &[], mean_diff).is_err());
    }
}
