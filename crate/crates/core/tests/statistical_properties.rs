//! Monte Carlo checks of the statistical behaviour of the library.

use mlqc::control::{bootstrap_interval, Statistic};
use mlqc::drift::{ks_statistic, ks_two_sample, mann_whitney, mann_whitney_u, welch_statistic, welch_t};
use mlqc::empirical::{EmpiricalCdf, Sample};
use mlqc::pvalues::{normal_quantile, permutation_pvalue};
use mlqc::rng::stream_rng;
use mlqc::slicing::{fit_relation, relation_drift_score, Term};
use mlqc::table::{Column, ColumnData, Dataset};
use rand::Rng;

/// Analytic and permutation p-values for one pair of samples.
type PValuePair = dyn Fn(&[f64], &[f64]) -> (f64, f64);

fn uniforms(seed: u64, stream: u64, n: usize) -> Vec<f64> {
    let mut rng = stream_rng(seed, stream);
    (0..n).map(|_| rng.gen::<f64>()).collect()
}

fn normals(seed: u64, stream: u64, n: usize, shift: f64) -> Vec<f64> {
    let mut rng = stream_rng(seed, stream);
    (0..n).map(|_| normal_quantile(rng.gen_range(1e-12..1.0)).unwrap() + shift).collect()
}

fn sample(v: Vec<f64>) -> Sample {
    Sample::new(v).unwrap()
}

fn rejection_rate(trials: u64, test: impl Fn(u64) -> f64) -> f64 {
    (0..trials).filter(|&t| test(t) < 0.05).count() as f64 / trials as f64
}

#[test]
fn null_rejection_rates_near_nominal() {
    let trials = 400;
    let ks = rejection_rate(trials, |t| {
        ks_two_sample(&sample(normals(1, 2 * t, 40, 0.0)), &sample(normals(1, 2 * t + 1, 40, 0.0)), 0.05).p().unwrap()
    });
    let mw = rejection_rate(trials, |t| {
        mann_whitney(&sample(normals(2, 2 * t, 40, 0.0)), &sample(normals(2, 2 * t + 1, 40, 0.0)), 0.05).p().unwrap()
    });
    let welch = rejection_rate(trials, |t| {
        welch_t(&sample(normals(3, 2 * t, 40, 0.0)), &sample(normals(3, 2 * t + 1, 40, 0.0)), 0.05).unwrap().p().unwrap()
    });
    for (name, rate) in [("ks", ks), ("mw", mw), ("welch", welch)] {
        assert!((0.01..=0.09).contains(&rate), "{name}: {rate}");
    }
}

#[test]
fn permutation_pvalues_roughly_uniform_under_null() {
    let ps: Vec<f64> = (0..200)
        .map(|t| {
            let (a, b) = (uniforms(4, 2 * t, 20), uniforms(4, 2 * t + 1, 20));
            permutation_pvalue(&a, &b, welch_statistic, 199, t).unwrap().value
        })
        .collect();
    for cut in [0.1, 0.25, 0.5, 0.75] {
        let frac = ps.iter().filter(|&&p| p <= cut).count() as f64 / ps.len() as f64;
        assert!((frac - cut).abs() < 0.1, "P(p <= {cut}) = {frac}");
    }
}

#[test]
fn analytic_and_permutation_pvalues_agree() {
    let trials = 40;
    let agree = |f: &PValuePair| {
        (0..trials)
            .filter(|&t| {
                let (a, b) = (normals(5, 2 * t, 50, 0.0), normals(5, 2 * t + 1, 50, 0.0));
                let (analytic, perm) = f(&a, &b);
                (analytic - perm).abs() < 0.05
            })
            .count()
    };
    let ks = agree(&|a, b| {
        let analytic = ks_two_sample(&sample(a.to_vec()), &sample(b.to_vec()), 0.05).p().unwrap();
        (analytic, permutation_pvalue(a, b, ks_statistic, 999, 1).unwrap().value)
    });
    let mw = agree(&|a, b| {
        let analytic = mann_whitney(&sample(a.to_vec()), &sample(b.to_vec()), 0.05).p().unwrap();
        let centred = |x: &[f64], y: &[f64]| mann_whitney_u(x, y) - (x.len() * y.len()) as f64 / 2.0;
        (analytic, permutation_pvalue(a, b, centred, 999, 2).unwrap().value)
    });
    assert!(ks >= 32, "ks agreed in {ks}/{trials}");
    assert!(mw >= 32, "mw agreed in {mw}/{trials}");
}

#[test]
fn ecdf_is_unbiased_with_binomial_variance() {
    let (n, reps, x) = (100, 1500, 0.3);
    let values: Vec<f64> = (0..reps).map(|r| EmpiricalCdf::new(&sample(uniforms(6, r, n))).eval(x)).collect();
    let mean = values.iter().sum::<f64>() / reps as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    let expected_var = x * (1.0 - x) / n as f64;
    assert!((mean - x).abs() < 0.01, "mean {mean}");
    assert!((var / expected_var - 1.0).abs() < 0.2, "var {var} vs {expected_var}");
}

#[test]
fn bootstrap_interval_covers_the_mean() {
    let covered = (0..100u64)
        .filter(|&t| {
            let s = sample(normals(7, t, 200, 1.5));
            bootstrap_interval(&s, &Statistic::Mean, 500, 0.025, t).unwrap().contains(1.5)
        })
        .count();
    assert!(covered >= 88, "covered {covered}/100");
}

#[test]
fn welch_detects_a_large_shift() {
    let power = 1.0
        - (0..200u64)
            .filter(|&t| {
                let r = welch_t(&sample(normals(8, 2 * t, 50, 0.0)), &sample(normals(8, 2 * t + 1, 50, 0.8)), 0.05).unwrap();
                !r.is_drift()
            })
            .count() as f64
            / 200.0;
    assert!(power > 0.9, "power {power}");
}

fn relation_data(seed: u64, n: usize, interaction: f64, noise: f64) -> Dataset {
    let mut rng = stream_rng(seed, 0);
    let x2: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let x3: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let x1: Vec<f64> = (0..n)
        .map(|i| {
            let eps = normal_quantile(rng.gen_range(1e-12..1.0)).unwrap() * noise;
            2.0 + 3.0 * x2[i] + interaction * x2[i] * x3[i] + 1.5 * x2[i] * x2[i] + eps
        })
        .collect();
    let col = |name: &str, v: Vec<f64>| Column { name: name.into(), data: ColumnData::Numeric(v) };
    Dataset::new(vec![col("x1", x1), col("x2", x2), col("x3", x3)]).unwrap()
}

#[test]
fn noise_only_target_has_small_r_squared() {
    let mut rng = stream_rng(10, 0);
    let cols: Vec<Column> = ["y", "a", "b"]
        .iter()
        .map(|&name| Column { name: name.into(), data: ColumnData::Numeric((0..500).map(|_| rng.gen()).collect()) })
        .collect();
    let rel = fit_relation(&Dataset::new(cols).unwrap(), "y", ("a", "b"), &Term::QUADRATIC).unwrap();
    assert!(rel.r_squared < 0.05, "{}", rel.r_squared);
}

#[test]
fn strong_relations_degrade_more_than_weak_ones() {
    let (strong_noise, weak_noise) = (0.5, 12.0);
    let strong = fit_relation(&relation_data(11, 400, -5.0, strong_noise), "x1", ("x2", "x3"), &Term::QUADRATIC).unwrap();
    let weak = fit_relation(&relation_data(12, 400, -5.0, weak_noise), "x1", ("x2", "x3"), &Term::QUADRATIC).unwrap();
    assert!(strong.r_squared > 0.95 && weak.r_squared < 0.5);
    let d_strong = relation_drift_score(&strong, &relation_data(13, 400, 5.0, strong_noise), 0.2).unwrap();
    let d_weak = relation_drift_score(&weak, &relation_data(14, 400, 5.0, weak_noise), 0.2).unwrap();
    assert!(d_strong.degradation > 0.5);
    assert!(d_strong.degradation > d_weak.degradation, "{} vs {}", d_strong.degradation, d_weak.degradation);
}
