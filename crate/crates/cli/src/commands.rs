use crate::args::*;
use crate::data::{load_dataset, load_schema, Schema};
use crate::report::*;
use crate::sequence::run_sequence;
use crate::CliError;
use mlqc::control::{bootstrap_accuracy_interval, bootstrap_interval, clt_interval, trimmed_interval, Statistic};
use mlqc::drift::*;
use mlqc::empirical::{EmpiricalCdf, LabeledSample, Sample};
use mlqc::policy::{
    bayes_action, binomial_tails, find_control_k, minmax_action, optimize_budget, Component, EliminationPolicy,
    LossMatrix,
};
use mlqc::rng::derive_seed;
use mlqc::slicing::*;
use mlqc::system::{path_correct_prob, random_walk_correct_prob, simulate_tree, worst_path, HybridTree, PathPolicy};
use mlqc::table::{ColumnData, Dataset};
use serde::de::DeserializeOwned;
use std::path::Path;

struct Run {
    seed: u64,
    alpha: f64,
    inputs: Vec<InputDigest>,
    results: Vec<ResultItem>,
}

impl Run {
    fn digest(&mut self, role: &str, path: &Path) -> Result<(), CliError> {
        let d = InputDigest::of(role, path).map_err(|e| CliError::io(path, e))?;
        self.inputs.push(d);
        Ok(())
    }

    fn schema(&mut self, path: Option<&Path>) -> Result<Option<Schema>, CliError> {
        match path {
            Some(p) => {
                self.digest("schema", p)?;
                Ok(Some(load_schema(p)?))
            }
            None => Ok(None),
        }
    }

    fn dataset(&mut self, role: &str, path: &Path, schema: Option<&Schema>) -> Result<Dataset, CliError> {
        self.digest(role, path)?;
        Ok(load_dataset(path, schema)?)
    }

    fn single(&mut self, args: &DataArgs) -> Result<Dataset, CliError> {
        let schema = self.schema(args.schema.as_deref())?;
        self.dataset("data", &args.data, schema.as_ref())
    }

    fn pair(&mut self, args: &PairArgs) -> Result<(Dataset, Dataset), CliError> {
        let schema = self.schema(args.schema.as_deref())?;
        let r = self.dataset("reference", &args.reference, schema.as_ref())?;
        let c = self.dataset("current", &args.current, schema.as_ref())?;
        Ok((r, c))
    }

    fn json<T: DeserializeOwned>(&mut self, role: &str, path: &Path) -> Result<T, CliError> {
        self.digest(role, path)?;
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::data("bad-json", format!("{}: {e}", path.display())))
    }

    fn test(&mut self, column: Option<&str>, result: TestResult) {
        self.results.push(ResultItem::Test { column: column.map(str::to_owned), result });
    }
}

pub(crate) fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Ecdf(_) => "ecdf",
        Command::Interval(IntervalCommand::Trimmed { .. }) => "interval trimmed",
        Command::Interval(IntervalCommand::Bootstrap { .. }) => "interval bootstrap",
        Command::Interval(IntervalCommand::Clt { .. }) => "interval clt",
        Command::Drift(DriftCommand::Numeric { .. }) => "drift numeric",
        Command::Drift(DriftCommand::Categorical { .. }) => "drift categorical",
        Command::Drift(DriftCommand::Slices { .. }) => "drift slices",
        Command::Drift(DriftCommand::Density { .. }) => "drift density",
        Command::Drift(DriftCommand::Relations { .. }) => "drift relations",
        Command::Drift(DriftCommand::Sequence { .. }) => "drift sequence",
        Command::Slices(SlicesCommand::Mine { .. }) => "slices mine",
        Command::SpcK(_) => "spc-k",
        Command::Policy(PolicyCommand::Optimize { .. }) => "policy optimize",
        Command::Policy(PolicyCommand::Evaluate { .. }) => "policy evaluate",
        Command::Policy(PolicyCommand::Decide { .. }) => "policy decide",
        Command::Tree(TreeCommand::Analyze { .. }) => "tree analyze",
        Command::Tree(TreeCommand::Simulate { .. }) => "tree simulate",
    }
}

fn sample(ds: &Dataset, column: &str) -> Result<Sample, CliError> {
    Ok(Sample::new(ds.numeric(column)?.to_vec())?)
}

/// Cell values as text, whatever the column type.
fn cell_text(ds: &Dataset, column: &str) -> Result<Vec<String>, CliError> {
    let col = ds.column(column).ok_or_else(|| mlqc::Error::MissingFeature(column.to_owned()))?;
    Ok(match &col.data {
        ColumnData::Numeric(v) => v.iter().map(|x| x.to_string()).collect(),
        ColumnData::Categorical(v) => v.clone(),
    })
}

fn shared_columns(a: &Dataset, b: &Dataset, numeric: bool) -> Vec<String> {
    a.columns()
        .iter()
        .filter(|c| matches!(c.data, ColumnData::Numeric(_)) == numeric)
        .filter(|c| b.column(&c.name).is_some_and(|d| matches!(d.data, ColumnData::Numeric(_)) == numeric))
        .map(|c| c.name.clone())
        .collect()
}

fn pick_columns(requested: &[String], a: &Dataset, b: &Dataset, numeric: bool) -> Result<Vec<String>, CliError> {
    let cols = if requested.is_empty() { shared_columns(a, b, numeric) } else { requested.to_vec() };
    if cols.is_empty() {
        let kind = if numeric { "numeric" } else { "categorical" };
        return Err(CliError::data("no-columns", format!("no {kind} columns shared by reference and current")));
    }
    Ok(cols)
}

pub(crate) fn numeric_test(
    test: NumericTest,
    a: &Sample,
    b: &Sample,
    alpha: f64,
    threshold: f64,
    permutations: usize,
    seed: u64,
) -> mlqc::Result<TestResult> {
    match test {
        NumericTest::Ks => Ok(ks_two_sample(a, b, alpha)),
        NumericTest::T => welch_t(a, b, alpha),
        NumericTest::Mw => Ok(mann_whitney(a, b, alpha)),
        NumericTest::Wass => wasserstein_test(a, b, alpha, permutations, seed),
        NumericTest::D => cohens_d(a, b, threshold),
    }
}

fn positive_pair(a: &CategoricalCounts, b: &CategoricalCounts, positive: Option<&str>) -> Result<ProportionPair, CliError> {
    let positive = positive.ok_or_else(|| CliError::Usage("this metric needs --positive <category>".into()))?;
    Ok(ProportionPair::from_counts(a, b, positive)?)
}

pub(crate) fn execute(cli: &Cli) -> Result<Report, CliError> {
    if !(cli.alpha > 0.0 && cli.alpha < 1.0) {
        return Err(CliError::Usage(format!("--alpha must lie in (0, 1), got {}", cli.alpha)));
    }
    let started = std::time::SystemTime::now();
    let clock = std::time::Instant::now();
    let mut run = Run { seed: cli.seed, alpha: cli.alpha, inputs: Vec::new(), results: Vec::new() };
    dispatch(&mut run, &cli.command)?;
    let started_unix_ms = started.duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64);
    Ok(Report {
        command: command_name(&cli.command).to_owned(),
        tool_version: TOOL_VERSION.to_owned(),
        seed: cli.seed,
        alpha: cli.alpha,
        inputs: run.inputs,
        results: run.results,
        timestamp: Timestamp { started_unix_ms, elapsed_ms: clock.elapsed().as_secs_f64() * 1e3 },
    })
}

fn dispatch(run: &mut Run, command: &Command) -> Result<(), CliError> {
    match command {
        Command::Ecdf(args) => ecdf(run, args),
        Command::Interval(c) => interval(run, c),
        Command::Drift(c) => drift(run, c),
        Command::Slices(c) => slices(run, c),
        Command::SpcK(args) => spc(run, args),
        Command::Policy(c) => policy(run, c),
        Command::Tree(c) => tree(run, c),
    }
}

fn ecdf(run: &mut Run, args: &EcdfArgs) -> Result<(), CliError> {
    let ds = run.single(&args.data)?;
    let s = sample(&ds, &args.column)?;
    let cdf = EmpiricalCdf::new(&s);
    let levels = if args.at.is_empty() && args.quantile.is_empty() { vec![0.25, 0.5, 0.75] } else { args.quantile.clone() };
    let points = args.at.iter().map(|&x| EcdfPoint { x, f: cdf.eval(x) }).collect();
    let quantiles = levels
        .iter()
        .map(|&q| Ok(QuantilePoint { q, value: cdf.quantile(q)? }))
        .collect::<mlqc::Result<Vec<_>>>()?;
    run.results.push(ResultItem::Ecdf { column: args.column.clone(), n: s.len(), points, quantiles });
    Ok(())
}

fn interval(run: &mut Run, command: &IntervalCommand) -> Result<(), CliError> {
    let seed = run.seed;
    let (column, statistic, interval) = match command {
        IntervalCommand::Trimmed { data, column, trim } => {
            let ds = run.single(data)?;
            (column.clone(), "scores".to_owned(), trimmed_interval(&sample(&ds, column)?, *trim)?)
        }
        IntervalCommand::Bootstrap { data, column, statistic, prediction, label, replicates, trim } => {
            let ds = run.single(data)?;
            match (prediction, label) {
                (Some(pred), Some(label)) => {
                    let labeled = LabeledSample::from_columns(cell_text(&ds, pred)?, cell_text(&ds, label)?)?;
                    let iv = bootstrap_accuracy_interval(&labeled, *replicates, *trim, seed)?;
                    (format!("{pred}~{label}"), "accuracy".to_owned(), iv)
                }
                _ => {
                    let column = column.as_deref().ok_or_else(|| CliError::Usage("--column is required".into()))?;
                    let stat = match statistic {
                        StatisticArg::Mean => Statistic::Mean,
                        StatisticArg::Proportion => Statistic::Proportion,
                    };
                    let iv = bootstrap_interval(&sample(&ds, column)?, &stat, *replicates, *trim, seed)?;
                    (column.to_owned(), stat.name().to_owned(), iv)
                }
            }
        }
        IntervalCommand::Clt { data, column, confidence } => {
            let ds = run.single(data)?;
            (column.clone(), "mean".to_owned(), clt_interval(&sample(&ds, column)?, *confidence)?)
        }
    };
    run.results.push(ResultItem::Interval { column, statistic, interval });
    Ok(())
}

fn drift(run: &mut Run, command: &DriftCommand) -> Result<(), CliError> {
    let (seed, alpha) = (run.seed, run.alpha);
    match command {
        DriftCommand::Numeric { pair, column, test, threshold, permutations } => {
            let (r, c) = run.pair(pair)?;
            for (i, col) in pick_columns(column, &r, &c, true)?.iter().enumerate() {
                let (a, b) = (sample(&r, col)?, sample(&c, col)?);
                let result = numeric_test(*test, &a, &b, alpha, *threshold, *permutations, derive_seed(seed, i as u64))?;
                run.test(Some(col), result);
            }
        }
        DriftCommand::Categorical { pair, column, metric, positive, threshold, base } => {
            let (r, c) = run.pair(pair)?;
            for col in pick_columns(column, &r, &c, false)? {
                let a = CategoricalCounts::from_observations(cell_text(&r, &col)?)?;
                let b = CategoricalCounts::from_observations(cell_text(&c, &col)?)?;
                let effect = threshold.unwrap_or(DEFAULT_EFFECT_THRESHOLD);
                let result = match metric {
                    CategoricalMetric::Chi2 => chi_square_gof(&a, &b, alpha)?,
                    CategoricalMetric::W => cohens_w(&a, &b, effect)?,
                    CategoricalMetric::H => cohens_h(&positive_pair(&a, &b, positive.as_deref())?, effect),
                    CategoricalMetric::Delta => dissimilarity_index(&a, &b, threshold.unwrap_or(DISSIMILARITY_THRESHOLD)),
                    CategoricalMetric::Hellinger => hellinger_test(&a, &b, *threshold),
                    CategoricalMetric::Jsd => js_test(&a, &b, *base, *threshold)?,
                    CategoricalMetric::Yates => yates_diff_proportions(&positive_pair(&a, &b, positive.as_deref())?, alpha),
                };
                run.test(Some(&col), result);
            }
        }
        DriftCommand::Slices { pair, slices } => {
            let (r, c) = run.pair(pair)?;
            let slices: Vec<Slice> = run.json("slices", slices)?;
            let report = slice_drift_test(&slices, &r, &c, alpha)?;
            run.test(None, report.to_test_result());
            run.results.push(ResultItem::SliceDrift { report });
        }
        DriftCommand::Density { pair, slices, features, bins, sparsity, metric, threshold } => {
            let (r, c) = run.pair(pair)?;
            let set: DensitySliceSet = match slices {
                Some(path) => run.json("density-slices", path)?,
                None => {
                    let names: Vec<&str> = features.iter().map(String::as_str).collect();
                    DensitySliceSet::equal_width_grid(&r, &names, *bins, *sparsity)?
                }
            };
            let reference = density_slice_map(&set, &r)?;
            let current = density_slice_map(&set, &c)?;
            let result = match metric {
                DensityMetric::Delta => dissimilarity_index(&reference, &current, threshold.unwrap_or(DISSIMILARITY_THRESHOLD)),
                DensityMetric::Hellinger => hellinger_test(&reference, &current, *threshold),
                DensityMetric::Jsd => js_test(&reference, &current, 2.0, *threshold)?,
            };
            run.test(None, result.with_detail("cells", set.slices.len()));
            run.results.push(ResultItem::DensityCounts { reference, current });
        }
        DriftCommand::Relations { pair, target, regressors, terms, min_r2, top, threshold, band_replicates } => {
            let (r, c) = run.pair(pair)?;
            let basis: &[Term] = match terms {
                TermSet::Linear => &[Term::A, Term::B],
                TermSet::Quadratic => &Term::QUADRATIC,
            };
            let relations = match target {
                Some(t) => match regressors.as_slice() {
                    [a, b] => vec![fit_relation(&r, t, (a, b), basis)?],
                    _ => return Err(CliError::Usage("--regressors takes exactly two columns".into())),
                },
                None => strong_relations(&r, *min_r2, basis).into_iter().take(*top).collect(),
            };
            for (i, rel) in relations.into_iter().enumerate() {
                let drift = relation_drift_score(&rel, &c, *threshold)?;
                let band = match band_replicates {
                    Some(k) => Some(relation_degradation_band(&rel, &c, *k, 0.025, derive_seed(seed, i as u64))?),
                    None => None,
                };
                let mut result = TestResult::measurement("relation-degradation", drift.degradation)
                    .with_detail("r_squared_ref", drift.r_squared_ref)
                    .with_detail("r_squared_cur", drift.r_squared_cur);
                result.alpha_or_threshold = Some(*threshold);
                result.decision = drift.decision;
                run.test(Some(&rel.target), result);
                run.results.push(ResultItem::Relation { relation: rel, drift, band });
            }
        }
        DriftCommand::Sequence { pair, column, window, step, test, permutations } => {
            let (r, c) = run.pair(pair)?;
            let reference = sample(&r, column)?;
            let current = c.numeric(column)?;
            let outcome = run_sequence(&reference, current, *window, *step, |a, b, start| {
                numeric_test(*test, a, b, alpha, DEFAULT_EFFECT_THRESHOLD, *permutations, derive_seed(seed, start as u64))
            }, alpha)?;
            run.test(Some(column), outcome.family.clone());
            run.results.push(ResultItem::Sequence {
                column: column.clone(),
                window: *window,
                step: *step,
                windows: outcome.windows,
                family_p: outcome.family_p,
                first_drift_start: outcome.first_drift_start,
            });
        }
    }
    Ok(())
}

fn slices(run: &mut Run, command: &SlicesCommand) -> Result<(), CliError> {
    let SlicesCommand::Mine { data, prediction, label, max_predicates, min_support, lift } = command;
    let ds = run.single(data)?;
    let pred = cell_text(&ds, prediction)?;
    let truth = cell_text(&ds, label)?;
    let correct: Vec<bool> = pred.iter().zip(&truth).map(|(p, t)| p == t).collect();
    let config = MiningConfig {
        max_predicates: *max_predicates,
        min_support: *min_support,
        lift: *lift,
        exclude: vec![prediction.clone(), label.clone()],
    };
    let slices = mine_error_slices(&ds, &correct, &config)?;
    let overall_error_rate = correct.iter().filter(|&&ok| !ok).count() as f64 / correct.len() as f64;
    run.results.push(ResultItem::MinedSlices { overall_error_rate, slices });
    Ok(())
}

fn spc(run: &mut Run, args: &SpcArgs) -> Result<(), CliError> {
    let k = find_control_k(args.n, args.p, run.alpha)?;
    let tails = binomial_tails(args.n, args.p)?;
    let tail_below_k = if k == 0 { 1.0 } else { tails[k as usize - 1] };
    run.results.push(ResultItem::ControlLimit {
        n: args.n,
        p: args.p,
        alpha: run.alpha,
        k,
        tail_at_k: tails[k as usize],
        tail_below_k,
    });
    Ok(())
}

fn policy(run: &mut Run, command: &PolicyCommand) -> Result<(), CliError> {
    match command {
        PolicyCommand::Optimize { components, budget, cost } => {
            let comps: Vec<Component> = run.json("components", components)?;
            let plan = optimize_budget(comps, *budget, cost.volume, cost.unit_cost)?;
            let std_error = plan.policy.std_error().ok();
            run.results.push(ResultItem::Budget { plan, std_error });
        }
        PolicyCommand::Evaluate { components, review, cost } => {
            let comps: Vec<Component> = run.json("components", components)?;
            let policy = EliminationPolicy::new(comps, review.clone(), cost.unit_cost, cost.volume)?;
            run.results.push(ResultItem::PolicyEvaluation {
                review: review.clone(),
                accuracy: policy.expected_accuracy(),
                cost: policy.expected_cost(),
                std_error: policy.std_error().ok(),
            });
        }
        PolicyCommand::Decide { loss } => {
            let matrix: LossMatrix = run.json("loss", loss)?;
            let minmax = minmax_action(&matrix);
            let bayes = if matrix.dist.is_some() { Some(bayes_action(&matrix)?) } else { None };
            run.results.push(ResultItem::Decision { minmax, bayes });
        }
    }
    Ok(())
}

fn tree(run: &mut Run, command: &TreeCommand) -> Result<(), CliError> {
    match command {
        TreeCommand::Analyze { tree, path } => {
            let t: HybridTree = run.json("tree", tree)?;
            let path_probability = if path.is_empty() { None } else { Some(path_correct_prob(&t, path)?) };
            run.results.push(ResultItem::TreeAnalysis {
                nodes: t.len(),
                paths: t.paths().len(),
                worst: worst_path(&t),
                random_walk: random_walk_correct_prob(&t),
                path_probability,
            });
        }
        TreeCommand::Simulate { tree, policy, path, trials, replicates, trim } => {
            let t: HybridTree = run.json("tree", tree)?;
            let (name, policy) = match policy {
                PathPolicyArg::Worst => ("worst", PathPolicy::Worst),
                PathPolicyArg::Random => ("random", PathPolicy::Random),
                PathPolicyArg::Fixed => ("fixed", PathPolicy::Fixed(path.clone())),
            };
            let simulation = simulate_tree(&t, &policy, *trials, *replicates, *trim, run.seed)?;
            run.results.push(ResultItem::TreeSimulation { policy: name.to_owned(), simulation });
        }
    }
    Ok(())
}
