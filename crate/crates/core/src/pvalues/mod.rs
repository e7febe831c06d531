//! Special functions and the permutation engine that supply every p-value.
//!
//! Analytic p-values come from [`special`]; [`permutation`] provides the
//! Monte Carlo and exhaustive permutation tests used as their oracle.

pub mod permutation;
pub mod special;

use serde::{Deserialize, Serialize};

pub use permutation::{exact_permutation_pvalue, permutation_pvalue};
pub use special::{
    chi_square_cdf, chi_square_sf, kolmogorov_sf, ln_gamma, normal_cdf, normal_quantile,
    normal_sf, reg_inc_beta, reg_inc_gamma, reg_inc_gamma_upper, student_t_two_sided,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PValueSource {
    Analytic,
    Permutation,
}

/// A probability in `[0, 1]` together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PValue {
    pub value: f64,
    pub source: PValueSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permutation_count: Option<usize>,
}

impl PValue {
    /// Analytic p-value, clamped into `[0, 1]` to absorb rounding.
    pub fn analytic(value: f64) -> Self {
        PValue { value: value.clamp(0.0, 1.0), source: PValueSource::Analytic, permutation_count: None }
    }

    pub fn permutation(value: f64, permutations: usize) -> Self {
        PValue {
            value: value.clamp(0.0, 1.0),
            source: PValueSource::Permutation,
            permutation_count: Some(permutations),
        }
    }
}
