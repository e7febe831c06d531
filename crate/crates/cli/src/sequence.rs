//! Windowed re-testing of a stream against a fixed reference.

use crate::report::WindowResult;
use crate::CliError;
use mlqc::drift::TestResult;
use mlqc::empirical::Sample;
use mlqc::pvalues::PValue;
use mlqc::slicing::holm_adjust;

pub struct SequenceOutcome {
    pub windows: Vec<WindowResult>,
    pub family_p: f64,
    pub first_drift_start: Option<usize>,
    pub family: TestResult,
}

/// Applies `test(reference, window, start)` to `current[start..start + window]`
/// for `start = 0, step, 2 step, ...` and Holm-adjusts the window p-values.
/// The first window whose adjusted p falls below `alpha` marks the change.
pub fn run_sequence<F>(
    reference: &Sample,
    current: &[f64],
    window: usize,
    step: usize,
    test: F,
    alpha: f64,
) -> Result<SequenceOutcome, CliError>
where
    F: Fn(&Sample, &Sample, usize) -> mlqc::Result<TestResult>,
{
    if window == 0 || step == 0 {
        return Err(CliError::Usage("--window and --step must be positive".into()));
    }
    if window > current.len() {
        return Err(CliError::Usage(format!("--window {window} exceeds the {} current rows", current.len())));
    }
    let mut results = Vec::new();
    let mut start = 0;
    while start + window <= current.len() {
        let w = Sample::new(current[start..start + window].to_vec())?;
        let r = test(reference, &w, start)?;
        if r.p_value.is_none() {
            return Err(CliError::Usage(format!("test `{}` has no p-value to correct across windows", r.test_name)));
        }
        results.push((start, r));
        start += step;
    }
    let raw: Vec<f64> = results.iter().map(|(_, r)| r.p().unwrap()).collect();
    let holm = holm_adjust(&raw)?;
    let first_drift_start = results.iter().zip(&holm.adjusted).find(|(_, &p)| p < alpha).map(|((s, _), _)| *s);
    let source = results[0].1.p_value.unwrap().source;
    let min_raw = raw.iter().copied().fold(1.0, f64::min);
    let family_pvalue = PValue { value: holm.family_p, source, permutation_count: None };
    let mut family = TestResult::from_pvalue(&format!("sequence-{}", results[0].1.test_name), min_raw, family_pvalue, alpha)
        .with_detail("windows", results.len());
    if let Some(s) = first_drift_start {
        family = family.with_detail("first_drift_start", s);
    }
    let windows = results
        .into_iter()
        .zip(holm.adjusted)
        .map(|((start, result), adjusted_p)| WindowResult { start, end: start + window, result, adjusted_p })
        .collect();
    Ok(SequenceOutcome { windows, family_p: holm.family_p, first_drift_start, family })
}

#[cfg(test)]
mod tests {
    use super::*;
    use mlqc::drift::ks_two_sample;

    #[test]
    fn full_window_reproduces_single_test() {
        let reference = Sample::new((0..80).map(|i| (i as f64 * 0.37).sin()).collect()).unwrap();
        let current: Vec<f64> = (0..60).map(|i| (i as f64 * 0.53).cos() + 0.3).collect();
        let out = run_sequence(&reference, &current, 60, 7, |a, b, _| Ok(ks_two_sample(a, b, 0.05)), 0.05).unwrap();
        let single = ks_two_sample(&reference, &Sample::new(current).unwrap(), 0.05);
        assert_eq!(out.windows.len(), 1);
        assert_eq!(out.family_p, single.p().unwrap());
        assert_eq!(out.family.decision, single.decision);
    }

    #[test]
    fn locates_the_change() {
        let reference = Sample::new((0..200).map(|i| ((i * 37) % 100) as f64 / 100.0).collect()).unwrap();
        let mut current: Vec<f64> = (0..400).map(|i| ((i * 53) % 100) as f64 / 100.0).collect();
        current[200..].iter_mut().for_each(|x| *x += 0.8);
        let out = run_sequence(&reference, &current, 100, 50, |a, b, _| Ok(ks_two_sample(a, b, 0.05)), 0.05).unwrap();
        assert_eq!(out.windows.len(), 7);
        assert_eq!(out.first_drift_start, Some(150));
        assert!(out.family.is_drift());
    }

    #[test]
    fn rejects_bad_windows() {
        let reference = Sample::new(vec![1.0, 2.0]).unwrap();
        let t = |a: &Sample, b: &Sample, _| Ok(ks_two_sample(a, b, 0.05));
        assert!(run_sequence(&reference, &[1.0], 2, 1, t, 0.05).is_err());
        assert!(run_sequence(&reference, &[1.0], 1, 0, t, 0.05).is_err());
    }
}
