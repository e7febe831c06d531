//! JSON run reports.

use mlqc::control::ControlInterval;
use mlqc::drift::{CategoricalCounts, TestResult};
use mlqc::policy::{BayesChoice, BudgetPlan, MinmaxChoice};
use mlqc::slicing::{MinedSlice, PolyRelation, RelationDrift, SliceDriftReport};
use mlqc::system::{Simulation, WorstPath};
use serde::{Deserialize, Serialize};
use serde_json::{Number, Value};
use sha2::{Digest, Sha256};
use std::path::Path;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

impl InputDigest {
    pub fn of(role: &str, path: &Path) -> std::io::Result<Self> {
        let bytes = std::fs::read(path)?;
        Ok(InputDigest { role: role.to_owned(), path: path.display().to_string(), sha256: hex::encode(Sha256::digest(&bytes)) })
    }
}

/// The only field that differs between repeated runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timestamp {
    pub started_unix_ms: u64,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcdfPoint {
    pub x: f64,
    pub f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantilePoint {
    pub q: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowResult {
    pub start: usize,
    pub end: usize,
    pub result: TestResult,
    pub adjusted_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ResultItem {
    Test { column: Option<String>, result: TestResult },
    Ecdf { column: String, n: usize, points: Vec<EcdfPoint>, quantiles: Vec<QuantilePoint> },
    Interval { column: String, statistic: String, interval: ControlInterval },
    ControlLimit { n: u64, p: f64, alpha: f64, k: u64, tail_at_k: f64, tail_below_k: f64 },
    Budget { plan: BudgetPlan, std_error: Option<f64> },
    PolicyEvaluation { review: Vec<f64>, accuracy: f64, cost: f64, std_error: Option<f64> },
    Decision { minmax: MinmaxChoice, bayes: Option<BayesChoice> },
    TreeAnalysis { nodes: usize, paths: usize, worst: WorstPath, random_walk: f64, path_probability: Option<f64> },
    TreeSimulation { policy: String, simulation: Simulation },
    SliceDrift { report: SliceDriftReport },
    MinedSlices { overall_error_rate: f64, slices: Vec<MinedSlice> },
    DensityCounts { reference: CategoricalCounts, current: CategoricalCounts },
    Relation { relation: PolyRelation, drift: RelationDrift, band: Option<ControlInterval> },
    Sequence { column: String, window: usize, step: usize, windows: Vec<WindowResult>, family_p: f64, first_drift_start: Option<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub tool_version: String,
    pub seed: u64,
    pub alpha: f64,
    pub inputs: Vec<InputDigest>,
    pub results: Vec<ResultItem>,
    pub timestamp: Timestamp,
}

impl Report {
    pub fn any_drift(&self) -> bool {
        self.results.iter().any(|r| matches!(r, ResultItem::Test { result, .. } if result.is_drift()))
    }

    pub fn tests(&self) -> impl Iterator<Item = &TestResult> {
        self.results.iter().filter_map(|r| match r {
            ResultItem::Test { result, .. } => Some(result),
            _ => None,
        })
    }
}

fn round_significant(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_significant(n.as_f64().unwrap());
            *v = Number::from_f64(x).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with floats rounded to 12 significant digits and object
/// keys in lexicographic order.
pub fn render_report(report: &Report) -> serde_json::Result<String> {
    let mut value = serde_json::to_value(report)?;
    round_value(&mut value);
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    Ok(text)
}

pub fn write_report(report: &Report, path: &Path) -> std::io::Result<()> {
    let text = render_report(report).map_err(std::io::Error::other)?;
    std::fs::write(path, text)
}

/// The report with volatile fields zeroed, for comparing runs.
pub fn without_timestamp(text: &str) -> serde_json::Result<Value> {
    let mut v: Value = serde_json::from_str(text)?;
    if let Some(map) = v.as_object_mut() {
        map.remove("timestamp");
    }
    Ok(v)
}
