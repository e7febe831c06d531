//! Holm's step-down adjustment for family-wise error control.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolmAdjusted {
    /// Adjusted p-values, in the order of the input.
    pub adjusted: Vec<f64>,
    /// Smallest adjusted p-value; reject the family when it is below alpha.
    pub family_p: f64,
}

/// With `p_(1) <= ... <= p_(K)`, the adjusted value at rank `i` is
/// `max_{j <= i} min(1, (K - j + 1) p_(j))`.
pub fn holm_adjust(pvalues: &[f64]) -> Result<HolmAdjusted> {
    if pvalues.is_empty() {
        return Err(Error::param("pvalues", "need at least one p-value"));
    }
    if let Some(p) = pvalues.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::param("pvalues", format!("{p} is not a probability")));
    }
    let k = pvalues.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| pvalues[a].total_cmp(&pvalues[b]));
    let mut adjusted = vec![0.0; k];
    let mut running: f64 = 0.0;
    for (rank, &i) in order.iter().enumerate() {
        running = running.max(((k - rank) as f64 * pvalues[i]).min(1.0));
        adjusted[i] = running;
    }
    let family_p = adjusted.iter().cloned().fold(1.0, f64::min);
    Ok(HolmAdjusted { adjusted, family_p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_value_unchanged() {
        let h = holm_adjust(&[0.03]).unwrap();
        assert_eq!(h.adjusted, vec![0.03]);
        assert_eq!(h.family_p, 0.03);
    }

    #[test]
    fn equal_values_collapse_to_bonferroni() {
        let h = holm_adjust(&[0.02; 4]).unwrap();
        assert!(h.adjusted.iter().all(|&p| (p - 0.08).abs() < 1e-15));
        let h = holm_adjust(&[0.4; 4]).unwrap();
        assert!(h.adjusted.iter().all(|&p| p == 1.0));
    }

    #[test]
    fn textbook_example() {
        // sorted 0.01, 0.02, 0.03, 0.04 -> 0.04, 0.06, 0.06, 0.06
        let h = holm_adjust(&[0.03, 0.01, 0.04, 0.02]).unwrap();
        let expected = [0.06, 0.04, 0.06, 0.06];
        for (a, e) in h.adjusted.iter().zip(expected) {
            assert!((a - e).abs() < 1e-15);
        }
        assert!((h.family_p - 0.04).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(holm_adjust(&[]).is_err());
        assert!(holm_adjust(&[0.5, 1.2]).is_err());
        assert!(holm_adjust(&[f64::NAN]).is_err());
    }

    proptest! {
        #[test]
        fn bounds_and_monotonicity(p in prop::collection::vec(0.0f64..=1.0, 1..30)) {
            let h = holm_adjust(&p).unwrap();
            let k = p.len() as f64;
            let min = p.iter().cloned().fold(1.0, f64::min);
            prop_assert!(h.family_p >= min - 1e-15);
            prop_assert!(h.family_p <= (k * min).min(1.0) + 1e-15);
            let mut idx: Vec<usize> = (0..p.len()).collect();
            idx.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
            for w in idx.windows(2) {
                prop_assert!(h.adjusted[w[0]] <= h.adjusted[w[1]]);
            }
            for (a, raw) in h.adjusted.iter().zip(&p) {
                prop_assert!(a >= raw && *a <= 1.0);
            }
        }
    }
}
