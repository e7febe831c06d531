//! Data slices and the drift checks built on them.
//!
//! - [`rules`]: slice predicates, membership and support.
//! - [`mining`]: exhaustive search for slices with elevated error rates.
//! - [`holm`] and [`slice_drift_test`]: per-slice support drift with
//!   family-wise error control.
//! - [`density`]: typing current data against a reference density partition.
//! - [`relations`]: quadratic feature relations and their out-of-sample decay.

pub mod density;
pub mod holm;
pub mod mining;
pub mod relations;
pub mod rules;

pub use density::{density_slice_map, DensitySlice, DensitySliceSet, DensityType};
pub use holm::{holm_adjust, HolmAdjusted};
pub use mining::{mine_error_slices, MinedSlice, MiningConfig};
pub use relations::{
    fit_relation, relation_degradation_band, relation_drift_score, strong_relations, PolyRelation, RelationDrift, Term,
    DEFAULT_DEGRADATION_THRESHOLD,
};
pub use rules::{slice_membership, slice_stats, Condition, Predicate, Slice, SliceStats};

use crate::drift::{yates_diff_proportions, Decision, ProportionPair, TestResult};
use crate::table::Dataset;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceDriftEntry {
    pub slice: Slice,
    pub support_ref: u64,
    pub support_cur: u64,
    pub fraction_ref: f64,
    pub fraction_cur: f64,
    pub p_value: f64,
    pub adjusted_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceDriftReport {
    pub entries: Vec<SliceDriftEntry>,
    pub family_p: f64,
    pub alpha: f64,
    pub decision: Decision,
}

impl SliceDriftReport {
    /// Family-level result: the Holm-adjusted minimum p against `alpha`.
    pub fn to_test_result(&self) -> TestResult {
        let min_raw = self.entries.iter().map(|e| e.p_value).fold(1.0, f64::min);
        TestResult::from_pvalue("slice-drift-holm", min_raw, crate::pvalues::PValue::analytic(self.family_p), self.alpha)
            .with_detail("slices", self.entries.len())
    }
}

/// Compares each slice's fractional support in `reference` and `current`
/// with a Yates difference-in-proportions test, then Holm-adjusts across
/// slices. Each side uses its own row count as the denominator. A slice
/// whose 2x2 table has an empty margin (absent from, or covering, both
/// datasets) contributes p = 1.
pub fn slice_drift_test(slices: &[Slice], reference: &Dataset, current: &Dataset, alpha: f64) -> Result<SliceDriftReport> {
    if slices.is_empty() {
        return Err(Error::param("slices", "need at least one slice"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param("alpha", format!("must lie in (0, 1), got {alpha}")));
    }
    let (n_ref, n_cur) = (reference.n_rows() as u64, current.n_rows() as u64);
    let mut raw = Vec::with_capacity(slices.len());
    let mut partial = Vec::with_capacity(slices.len());
    for slice in slices {
        let s_ref = slice_stats(slice, reference, None)?.support;
        let s_cur = slice_stats(slice, current, None)?.support;
        let pair = ProportionPair::new(s_ref, n_ref, s_cur, n_cur)?;
        let p = yates_diff_proportions(&pair, alpha).p().unwrap_or(1.0);
        raw.push(p);
        partial.push((slice.clone(), s_ref, s_cur, pair));
    }
    let holm = holm_adjust(&raw)?;
    let entries = partial
        .into_iter()
        .zip(raw.iter().zip(&holm.adjusted))
        .map(|((slice, support_ref, support_cur, pair), (&p_value, &adjusted_p))| SliceDriftEntry {
            slice,
            support_ref,
            support_cur,
            fraction_ref: pair.proportion_a(),
            fraction_cur: pair.proportion_b(),
            p_value,
            adjusted_p,
        })
        .collect();
    let decision = if holm.family_p < alpha { Decision::Drift } else { Decision::NoDrift };
    Ok(SliceDriftReport { entries, family_p: holm.family_p, alpha, decision })
}
