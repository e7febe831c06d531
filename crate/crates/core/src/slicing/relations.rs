//! Low-degree polynomial relations between numeric features.
//!
//! A relation predicts one feature from two others using up to the full
//! quadratic basis `{x_a, x_b, x_a x_b, x_a^2, x_b^2}` plus an intercept,
//! fitted by least squares. Drift is measured by freezing the fitted
//! polynomial and scoring it on new data: a relation that held strongly on
//! the reference set but fits poorly now signals a change in the joint
//! distribution.

use crate::control::{bootstrap_interval_with, ControlInterval};
use crate::drift::Decision;
use crate::table::Dataset;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Default drop in R^2 that counts as drift.
pub const DEFAULT_DEGRADATION_THRESHOLD: f64 = 0.2;

const RANK_TOLERANCE: f64 = 1e-10;

/// Monomial `x_a^power_a * x_b^power_b` with total degree 1 or 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Term {
    pub power_a: u8,
    pub power_b: u8,
}

impl Term {
    pub const A: Term = Term { power_a: 1, power_b: 0 };
    pub const B: Term = Term { power_a: 0, power_b: 1 };
    pub const AB: Term = Term { power_a: 1, power_b: 1 };
    pub const AA: Term = Term { power_a: 2, power_b: 0 };
    pub const BB: Term = Term { power_a: 0, power_b: 2 };

    /// All five quadratic terms.
    pub const QUADRATIC: [Term; 5] = [Term::A, Term::B, Term::AB, Term::AA, Term::BB];

    pub fn new(power_a: u8, power_b: u8) -> Result<Self> {
        let degree = power_a + power_b;
        if !(1..=2).contains(&degree) {
            return Err(Error::param("term", format!("total degree must be 1 or 2, got {degree}")));
        }
        Ok(Term { power_a, power_b })
    }

    pub fn eval(&self, xa: f64, xb: f64) -> f64 {
        xa.powi(self.power_a as i32) * xb.powi(self.power_b as i32)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyRelation {
    pub target: String,
    pub regressors: [String; 2],
    pub terms: Vec<Term>,
    /// One per term.
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    /// Coefficient of determination on the data the relation was fitted to.
    pub r_squared: f64,
}

impl PolyRelation {
    pub fn predict(&self, xa: f64, xb: f64) -> f64 {
        self.intercept + self.terms.iter().zip(&self.coefficients).map(|(t, c)| c * t.eval(xa, xb)).sum::<f64>()
    }

    fn columns<'a>(&self, ds: &'a Dataset) -> Result<(&'a [f64], &'a [f64], &'a [f64])> {
        Ok((ds.numeric(&self.target)?, ds.numeric(&self.regressors[0])?, ds.numeric(&self.regressors[1])?))
    }

    /// Out-of-sample R^2 of the frozen polynomial on `ds`; may be negative.
    pub fn r_squared_on(&self, ds: &Dataset) -> Result<f64> {
        let (y, xa, xb) = self.columns(ds)?;
        let pred: Vec<f64> = xa.iter().zip(xb).map(|(&a, &b)| self.predict(a, b)).collect();
        r_squared(y, &pred)
    }

    fn r_squared_rows(&self, ds: &Dataset, rows: &[usize]) -> f64 {
        let (y, xa, xb) = self.columns(ds).expect("columns checked by caller");
        let ys: Vec<f64> = rows.iter().map(|&i| y[i]).collect();
        let pred: Vec<f64> = rows.iter().map(|&i| self.predict(xa[i], xb[i])).collect();
        r_squared(&ys, &pred).unwrap_or(f64::NEG_INFINITY)
    }
}

fn r_squared(y: &[f64], pred: &[f64]) -> Result<f64> {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::ZeroVariance("target is constant; R^2 undefined"));
    }
    let ss_res: f64 = y.iter().zip(pred).map(|(v, p)| (v - p).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Least-squares fit of `target` on `terms` of the regressor pair.
pub fn fit_relation(ds: &Dataset, target: &str, regressors: (&str, &str), terms: &[Term]) -> Result<PolyRelation> {
    if terms.is_empty() {
        return Err(Error::param("terms", "need at least one term"));
    }
    let y = ds.numeric(target)?;
    let xa = ds.numeric(regressors.0)?;
    let xb = ds.numeric(regressors.1)?;
    let n = ds.n_rows();
    let p = terms.len() + 1;
    if n < p + 2 {
        return Err(Error::TooFewObservations { needed: p + 2, got: n });
    }
    let design = DMatrix::from_fn(n, p, |i, j| if j == 0 { 1.0 } else { terms[j - 1].eval(xa[i], xb[i]) });
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|&&s| s > smax * RANK_TOLERANCE).count();
    if rank < p {
        return Err(Error::RankDeficient { rank, columns: p });
    }
    let beta = svd.solve(&DVector::from_column_slice(y), 0.0).map_err(|e| Error::param("design", e.to_string()))?;
    let fitted = &design * &beta;
    let r2 = r_squared(y, fitted.as_slice())?;
    Ok(PolyRelation {
        target: target.to_owned(),
        regressors: [regressors.0.to_owned(), regressors.1.to_owned()],
        terms: terms.to_vec(),
        coefficients: beta.iter().skip(1).copied().collect(),
        intercept: beta[0],
        r_squared: r2,
    })
}

/// Every relation `target ~ quadratic(a, b)` over distinct numeric columns
/// whose reference R^2 is at least `min_r_squared`, strongest first.
/// Fits that are rank deficient or have a constant target are skipped.
pub fn strong_relations(ds: &Dataset, min_r_squared: f64, terms: &[Term]) -> Vec<PolyRelation> {
    use crate::table::ColumnData;
    let numeric: Vec<&str> = ds
        .columns()
        .iter()
        .filter(|c| matches!(c.data, ColumnData::Numeric(_)))
        .map(|c| c.name.as_str())
        .collect();
    let mut found = Vec::new();
    for &t in &numeric {
        let others: Vec<&str> = numeric.iter().copied().filter(|&c| c != t).collect();
        for i in 0..others.len() {
            for j in i + 1..others.len() {
                if let Ok(rel) = fit_relation(ds, t, (others[i], others[j]), terms) {
                    if rel.r_squared >= min_r_squared {
                        found.push(rel);
                    }
                }
            }
        }
    }
    found.sort_by(|a, b| b.r_squared.total_cmp(&a.r_squared));
    found
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationDrift {
    pub r_squared_ref: f64,
    pub r_squared_cur: f64,
    /// `r_squared_ref - r_squared_cur`.
    pub degradation: f64,
    pub threshold: f64,
    pub decision: Decision,
}

/// Scores the frozen relation on `current`; drift when the R^2 drop exceeds `threshold`.
pub fn relation_drift_score(rel: &PolyRelation, current: &Dataset, threshold: f64) -> Result<RelationDrift> {
    let r2 = rel.r_squared_on(current)?;
    let degradation = rel.r_squared - r2;
    Ok(RelationDrift {
        r_squared_ref: rel.r_squared,
        r_squared_cur: r2,
        degradation,
        threshold,
        decision: if degradation > threshold { Decision::Drift } else { Decision::NoDrift },
    })
}

/// Bootstrap control interval for the degradation, resampling rows of `current`.
pub fn relation_degradation_band(
    rel: &PolyRelation,
    current: &Dataset,
    replicates: usize,
    trim: f64,
    seed: u64,
) -> Result<ControlInterval> {
    rel.columns(current)?;
    let rows: Vec<usize> = (0..current.n_rows()).collect();
    bootstrap_interval_with(&rows, |idx| rel.r_squared - rel.r_squared_rows(current, idx), replicates, trim, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::{Column, ColumnData};

    fn table(cols: Vec<(&str, Vec<f64>)>) -> Dataset {
        Dataset::new(cols.into_iter().map(|(n, v)| Column { name: n.into(), data: ColumnData::Numeric(v) }).collect())
            .unwrap()
    }

    fn exact_example(n: usize) -> Dataset {
        let x2: Vec<f64> = (0..n).map(|i| ((i * 37) % 23) as f64 / 5.0 - 2.0).collect();
        let x3: Vec<f64> = (0..n).map(|i| ((i * 53) % 19) as f64 / 4.0 - 1.5).collect();
        let x1 = x2.iter().zip(&x3).map(|(a, b)| 2.0 + 3.0 * a - 5.0 * a * b + 1.5 * a * a).collect();
        table(vec![("X1", x1), ("X2", x2), ("X3", x3)])
    }

    #[test]
    fn recovers_exact_relation() {
        let rel = fit_relation(&exact_example(200), "X1", ("X2", "X3"), &Term::QUADRATIC).unwrap();
        let expected = [3.0, 0.0, -5.0, 1.5, 0.0];
        assert!((rel.intercept - 2.0).abs() < 1e-6);
        for (c, e) in rel.coefficients.iter().zip(expected) {
            assert!((c - e).abs() < 1e-6, "{c} vs {e}");
        }
        assert!(rel.r_squared >= 1.0 - 1e-9);
        assert!((rel.predict(1.0, 2.0) - (2.0 + 3.0 - 10.0 + 1.5)).abs() < 1e-6);
    }

    #[test]
    fn residuals_orthogonal_to_regressors() {
        let n = 150;
        let a: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin() * 3.0).collect();
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.11).cos() * 2.0).collect();
        let y: Vec<f64> = (0..n).map(|i| a[i] * b[i] + ((i * 7919) % 101) as f64 / 50.0).collect();
        let ds = table(vec![("y", y.clone()), ("a", a.clone()), ("b", b.clone())]);
        let rel = fit_relation(&ds, "y", ("a", "b"), &Term::QUADRATIC).unwrap();
        let resid: Vec<f64> = (0..n).map(|i| y[i] - rel.predict(a[i], b[i])).collect();
        assert!(resid.iter().sum::<f64>().abs() < 1e-8);
        for t in &rel.terms {
            let dot: f64 = (0..n).map(|i| resid[i] * t.eval(a[i], b[i])).sum();
            assert!(dot.abs() < 1e-8, "{t:?}: {dot}");
        }
        assert!(rel.r_squared > 0.0 && rel.r_squared < 1.0);
    }

    #[test]
    fn fit_errors() {
        let ds = table(vec![("y", (0..20).map(f64::from).collect()), ("a", vec![1.0; 20]), ("b", (0..20).map(|i| (i * i) as f64).collect())]);
        assert!(matches!(fit_relation(&ds, "y", ("a", "b"), &Term::QUADRATIC), Err(Error::RankDeficient { .. })));
        let ds = table(vec![("y", vec![3.0; 10]), ("a", (0..10).map(f64::from).collect()), ("b", (0..10).map(|i| ((i * 7) % 10) as f64).collect())]);
        assert!(matches!(fit_relation(&ds, "y", ("a", "b"), &[Term::A, Term::B]), Err(Error::ZeroVariance(_))));
        assert!(matches!(fit_relation(&exact_example(7), "X1", ("X2", "X3"), &Term::QUADRATIC), Err(Error::TooFewObservations { .. })));
        assert!(Term::new(2, 1).is_err());
        assert!(Term::new(0, 0).is_err());
    }

    #[test]
    fn frozen_relation_on_same_generator() {
        let rel = fit_relation(&exact_example(200), "X1", ("X2", "X3"), &Term::QUADRATIC).unwrap();
        let drift = relation_drift_score(&rel, &exact_example(120), DEFAULT_DEGRADATION_THRESHOLD).unwrap();
        assert!(drift.degradation.abs() < 1e-9);
        assert_eq!(drift.decision, Decision::NoDrift);
        let band = relation_degradation_band(&rel, &exact_example(120), 200, 0.025, 3).unwrap();
        assert!(band.upper.abs() < 1e-9);
    }

    #[test]
    fn strong_relation_search_finds_the_generator() {
        let found = strong_relations(&exact_example(100), 0.999, &Term::QUADRATIC);
        assert!(found.iter().any(|r| r.target == "X1"));
        assert!(found.windows(2).all(|w| w[0].r_squared >= w[1].r_squared));
    }
}
