//! Binomial control limits, human-review budgets and decision rules.

use crate::pvalues::ln_gamma;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

const SUM_TOLERANCE: f64 = 1e-9;
const TIE_TOLERANCE: f64 = 1e-12;

fn check_prob(name: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::param(name, format!("must lie in [0, 1], got {p}")))
    }
}

/// `P(T >= k)` for every `k = 0..=n+1` under `Binomial(n, p)`.
///
/// Terms are formed in log space and summed from the top of the support,
/// smallest terms first.
pub fn binomial_tails(n: u64, p: f64) -> Result<Vec<f64>> {
    check_prob("p", p)?;
    let len = n as usize + 2;
    let mut tail = vec![0.0; len];
    if p == 0.0 {
        tail[0] = 1.0;
        return Ok(tail);
    }
    if p == 1.0 {
        tail[..=n as usize].iter_mut().for_each(|t| *t = 1.0);
        return Ok(tail);
    }
    let nf = n as f64;
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let ln_n = ln_gamma(nf + 1.0);
    for t in (0..=n).rev() {
        let tf = t as f64;
        let ln_term = ln_n - ln_gamma(tf + 1.0) - ln_gamma(nf - tf + 1.0) + tf * lp + (nf - tf) * lq;
        tail[t as usize] = tail[t as usize + 1] + ln_term.exp();
    }
    tail[0] = 1.0;
    for t in tail.iter_mut() {
        *t = t.min(1.0);
    }
    Ok(tail)
}

/// Smallest `k` with `P(T >= k) <= alpha` for `T ~ Binomial(n, p)`.
/// Returns `n + 1` when no count in the support qualifies.
pub fn find_control_k(n: u64, p: f64, alpha: f64) -> Result<u64> {
    if n == 0 {
        return Err(Error::param("n", "batch size must be at least 1"));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::param("alpha", format!("must lie in (0, 1], got {alpha}")));
    }
    let tail = binomial_tails(n, p)?;
    Ok(tail.iter().position(|&t| t <= alpha).unwrap_or(n as usize + 1) as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub name: String,
    /// Probability an incoming case belongs to this component.
    pub q: f64,
    /// `P(correct | component)` of the ML decision.
    pub accuracy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub se: Option<f64>,
}

impl Component {
    pub fn new(name: impl Into<String>, q: f64, accuracy: f64) -> Self {
        Component { name: name.into(), q, accuracy, se: None }
    }

    pub fn with_se(mut self, se: f64) -> Self {
        self.se = Some(se);
        self
    }
}

fn check_components(components: &[Component]) -> Result<()> {
    if components.is_empty() {
        return Err(Error::InvalidPolicy("no components".into()));
    }
    for c in components {
        check_prob("q", c.q).map_err(|e| Error::InvalidPolicy(format!("{}: {e}", c.name)))?;
        check_prob("accuracy", c.accuracy).map_err(|e| Error::InvalidPolicy(format!("{}: {e}", c.name)))?;
        if let Some(se) = c.se {
            if !(se >= 0.0 && se.is_finite()) {
                return Err(Error::InvalidPolicy(format!("{}: standard error {se}", c.name)));
            }
        }
    }
    let total: f64 = components.iter().map(|c| c.q).sum();
    if (total - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::InvalidPolicy(format!("arrival probabilities sum to {total}")));
    }
    Ok(())
}

/// Routes a fraction `review[i]` of component `i` to a reviewer who is
/// always right, at `unit_cost` per reviewed case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EliminationPolicy {
    pub components: Vec<Component>,
    pub review: Vec<f64>,
    pub unit_cost: f64,
    /// Cases per period.
    pub volume: f64,
}

impl EliminationPolicy {
    pub fn new(components: Vec<Component>, review: Vec<f64>, unit_cost: f64, volume: f64) -> Result<Self> {
        check_components(&components)?;
        if review.len() != components.len() {
            return Err(Error::InvalidPolicy(format!(
                "{} review probabilities for {} components",
                review.len(),
                components.len()
            )));
        }
        for &p in &review {
            check_prob("review", p).map_err(|e| Error::InvalidPolicy(e.to_string()))?;
        }
        if !(unit_cost >= 0.0 && unit_cost.is_finite() && volume >= 0.0 && volume.is_finite()) {
            return Err(Error::InvalidPolicy("unit cost and volume must be finite and non-negative".into()));
        }
        Ok(EliminationPolicy { components, review, unit_cost, volume })
    }

    /// The policy that never reviews.
    pub fn baseline(components: Vec<Component>, unit_cost: f64, volume: f64) -> Result<Self> {
        let n = components.len();
        Self::new(components, vec![0.0; n], unit_cost, volume)
    }

    /// `sum q_i (p_i + (1 - p_i) P(correct | c_i))`.
    pub fn expected_accuracy(&self) -> f64 {
        self.components.iter().zip(&self.review).map(|(c, &p)| c.q * (p + (1.0 - p) * c.accuracy)).sum()
    }

    /// `volume * unit_cost * sum q_i p_i`.
    pub fn expected_cost(&self) -> f64 {
        self.volume * self.unit_cost * self.components.iter().zip(&self.review).map(|(c, &p)| c.q * p).sum::<f64>()
    }

    /// Delta-method standard error of [`expected_accuracy`](Self::expected_accuracy),
    /// treating the component accuracy estimates as independent.
    pub fn std_error(&self) -> Result<f64> {
        let mut var = 0.0;
        for (c, &p) in self.components.iter().zip(&self.review) {
            let se = c.se.ok_or_else(|| Error::MissingStdError(c.name.clone()))?;
            var += (c.q * (1.0 - p) * se).powi(2);
        }
        Ok(var.sqrt())
    }
}

pub fn expected_accuracy(policy: &EliminationPolicy) -> f64 {
    policy.expected_accuracy()
}

pub fn expected_cost(policy: &EliminationPolicy) -> f64 {
    policy.expected_cost()
}

pub fn policy_std_error(policy: &EliminationPolicy) -> Result<f64> {
    policy.std_error()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetPlan {
    pub policy: EliminationPolicy,
    pub accuracy: f64,
    pub cost: f64,
    /// Budget left after reviewing everything; zero unless the budget
    /// exceeds the cost of full review.
    pub leftover: f64,
}

/// Maximizes expected accuracy subject to `expected_cost <= budget`.
///
/// Reviewing one more unit of component `i` costs `volume * unit_cost * q_i`
/// and gains `q_i (1 - P_i)`, so the gain per unit spent is `(1 - P_i)`
/// divided by a common factor. The problem is a fractional knapsack: fill
/// components in ascending order of accuracy, the last one fractionally.
/// Equal accuracies keep declaration order.
pub fn optimize_budget(components: Vec<Component>, budget: f64, volume: f64, unit_cost: f64) -> Result<BudgetPlan> {
    if !(budget >= 0.0) {
        return Err(Error::param("budget", format!("must be non-negative, got {budget}")));
    }
    let mut policy = EliminationPolicy::baseline(components, unit_cost, volume)?;
    let mut order: Vec<usize> = (0..policy.components.len()).collect();
    order.sort_by(|&a, &b| policy.components[a].accuracy.total_cmp(&policy.components[b].accuracy));
    let mut remaining = budget;
    for i in order {
        let full = volume * unit_cost * policy.components[i].q;
        if full <= remaining {
            policy.review[i] = 1.0;
            remaining -= full;
        } else {
            policy.review[i] = remaining / full;
            remaining = 0.0;
            break;
        }
    }
    Ok(BudgetPlan {
        accuracy: policy.expected_accuracy(),
        cost: policy.expected_cost(),
        leftover: remaining,
        policy,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateLabel {
    Value(f64),
    Name(String),
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateLabel::Value(v) => write!(f, "{v}"),
            StateLabel::Name(s) => f.write_str(s),
        }
    }
}

/// Loss `losses[a][s]` of taking action `a` in state `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLossMatrix")]
pub struct LossMatrix {
    pub actions: Vec<String>,
    pub states: Vec<StateLabel>,
    pub losses: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dist: Option<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawLossMatrix {
    actions: Vec<String>,
    states: Vec<StateLabel>,
    losses: Vec<Vec<f64>>,
    #[serde(default)]
    dist: Option<Vec<f64>>,
}

impl TryFrom<RawLossMatrix> for LossMatrix {
    type Error = Error;
    fn try_from(r: RawLossMatrix) -> Result<Self> {
        LossMatrix::new(r.actions, r.states, r.losses, r.dist)
    }
}

impl LossMatrix {
    pub fn new(
        actions: Vec<String>,
        states: Vec<StateLabel>,
        losses: Vec<Vec<f64>>,
        dist: Option<Vec<f64>>,
    ) -> Result<Self> {
        if actions.is_empty() || states.is_empty() {
            return Err(Error::InvalidLossMatrix("need at least one action and one state".into()));
        }
        if losses.len() != actions.len() || losses.iter().any(|row| row.len() != states.len()) {
            return Err(Error::InvalidLossMatrix(format!(
                "losses must be {} x {}",
                actions.len(),
                states.len()
            )));
        }
        if losses.iter().flatten().any(|l| !l.is_finite()) {
            return Err(Error::InvalidLossMatrix("losses must be finite".into()));
        }
        if let Some(d) = &dist {
            if d.len() != states.len() || d.iter().any(|&w| !(0.0..=1.0).contains(&w)) {
                return Err(Error::InvalidLossMatrix("distribution must give a probability per state".into()));
            }
            let total: f64 = d.iter().sum();
            if (total - 1.0).abs() > SUM_TOLERANCE {
                return Err(Error::InvalidLossMatrix(format!("distribution sums to {total}")));
            }
        }
        Ok(LossMatrix { actions, states, losses, dist })
    }

    pub fn with_dist(mut self, dist: Vec<f64>) -> Result<Self> {
        self.dist = None;
        LossMatrix::new(self.actions, self.states, self.losses, Some(dist))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinmaxChoice {
    pub action: String,
    pub index: usize,
    /// Worst-case loss of each action.
    pub worst_losses: Vec<f64>,
}

/// Action whose worst-case loss is smallest; the first declared wins ties.
pub fn minmax_action(loss: &LossMatrix) -> MinmaxChoice {
    let worst: Vec<f64> = loss.losses.iter().map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max)).collect();
    let index = argmin_first(&worst);
    MinmaxChoice { action: loss.actions[index].clone(), index, worst_losses: worst }
}

fn argmin_first(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x < v[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesChoice {
    pub action: String,
    pub index: usize,
    pub expected_losses: Vec<f64>,
    /// Every action whose expected loss equals the minimum; more than one
    /// entry means the decision maker is indifferent.
    pub tied: Vec<String>,
}

impl BayesChoice {
    pub fn is_tie(&self) -> bool {
        self.tied.len() > 1
    }
}

/// Action minimizing expected loss under the state distribution.
pub fn bayes_action(loss: &LossMatrix) -> Result<BayesChoice> {
    let dist = loss.dist.as_ref().ok_or_else(|| Error::InvalidLossMatrix("no state distribution".into()))?;
    let expected: Vec<f64> =
        loss.losses.iter().map(|row| row.iter().zip(dist).map(|(l, w)| l * w).sum()).collect();
    let index = argmin_first(&expected);
    let min = expected[index];
    let tol = TIE_TOLERANCE * min.abs().max(1.0);
    let tied = expected
        .iter()
        .zip(&loss.actions)
        .filter(|(&e, _)| e - min <= tol)
        .map(|(_, a)| a.clone())
        .collect();
    Ok(BayesChoice { action: loss.actions[index].clone(), index, expected_losses: expected, tied })
}

/// Per-class volume, error rate and cost of one mistake.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassCost {
    pub volume: f64,
    pub error_rate: f64,
    pub cost: f64,
}

/// Expected total cost of misclassifications, `sum volume * rate * cost`.
pub fn misclassification_cost(classes: &[ClassCost]) -> f64 {
    classes.iter().map(|c| c.volume * c.error_rate * c.cost).sum()
}
