//! Statistical control for ML-embedded systems.
//!
//! The crate is organised bottom-up:
//!
//! - [`empirical`]: samples, empirical CDFs, accuracy and resampling.
//! - [`control`]: trimmed, bootstrap and CLT control intervals.
//! - [`pvalues`]: special functions and the permutation engine behind every p-value.
//! - [`drift`]: two-sample drift measures for numeric and categorical data.
//! - [`slicing`]: slice rules, error-slice mining, slice drift, density slices
//!   and polynomial relations.
//! - [`system`]: reliability of hybrid rule/ML decision trees.
//! - [`policy`]: binomial control limits, human-review budgets and decision rules.
//!
//! Every randomized routine takes an explicit `u64` seed; see [`rng`].

// parameter checks written as `!(x > 0.0)` also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod drift;
pub mod empirical;
mod error;
pub mod policy;
pub mod pvalues;
pub mod rng;
pub mod slicing;
pub mod system;
pub mod table;

pub use error::{Error, Result};
