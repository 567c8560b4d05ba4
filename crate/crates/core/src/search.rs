//! Deterministic sequential-search simulation.
//!
//! Given a forecast and a realized cost vector, the optimal policy tests
//! classes in descending order of probability-to-cost ratio until the true
//! class is found, paying each tested class's cost. [`simulate_search`]
//! produces the full trace; [`aggregate_cost`] averages realized totals
//! over a test set. Imperfect tests and treatment payoffs enter through
//! [`effective_costs`] and [`treatment_payoff`], which preserve the ratio
//! ordering.

use alloc::string::ToString;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::scoring::{Forecast, LabeledForecast};
use crate::{clamp_prob, Error, Result};

/// A realized per-class testing cost vector, strictly positive.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RealizedCosts {
    costs: Vec<f64>,
}

impl RealizedCosts {
    pub fn new(costs: Vec<f64>) -> Result<Self> {
        if costs.is_empty() {
            return Err(Error::Domain("cost vector is empty".to_string()));
        }
        for (k, &c) in costs.iter().enumerate() {
            if !c.is_finite() || c <= 0.0 {
                return Err(Error::Domain(alloc::format!(
                    "realized cost {c} at class {k} is not strictly positive"
                )));
            }
        }
        Ok(Self { costs })
    }

    pub fn unit(k: usize) -> Self {
        Self { costs: alloc::vec![1.0; k] }
    }

    pub fn len(&self) -> usize {
        self.costs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.costs
    }
}

/// The record of one simulated search: the visited class prefix, the
/// cumulative cost after each step, and the step at which the true class
/// was tested.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SearchTrace {
    /// Classes tested, in order, up to and including the true class.
    pub order: Vec<usize>,
    /// Cumulative cost after each tested class; strictly increasing.
    pub step_costs: Vec<f64>,
    /// Index into `order` of the step that tested the true class
    /// (always the last entry).
    pub stop_step: usize,
    /// Total realized cost, equal to the last cumulative entry.
    pub total_cost: f64,
}

/// Per-class test characteristics: sensitivity `s in (0, 1]`,
/// false-positive rate `f in [0, 1)`, and confirmatory-workup cost
/// `C >= 0` incurred on a false positive.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TestCharacteristics {
    sensitivity: Vec<f64>,
    false_positive_rate: Vec<f64>,
    confirm_cost: Vec<f64>,
}

impl TestCharacteristics {
    pub fn new(
        sensitivity: Vec<f64>,
        false_positive_rate: Vec<f64>,
        confirm_cost: Vec<f64>,
    ) -> Result<Self> {
        let k = sensitivity.len();
        if false_positive_rate.len() != k || confirm_cost.len() != k {
            return Err(Error::Config(
                "test characteristic vectors must share one length".to_string(),
            ));
        }
        for (i, &s) in sensitivity.iter().enumerate() {
            if !s.is_finite() || s < 0.0 || s > 1.0 {
                return Err(Error::Domain(alloc::format!(
                    "sensitivity {s} at class {i} is outside [0, 1]"
                )));
            }
        }
        for (i, &f) in false_positive_rate.iter().enumerate() {
            if !f.is_finite() || f < 0.0 || f >= 1.0 {
                return Err(Error::Domain(alloc::format!(
                    "false-positive rate {f} at class {i} is outside [0, 1)"
                )));
            }
        }
        for (i, &c) in confirm_cost.iter().enumerate() {
            if !c.is_finite() || c < 0.0 {
                return Err(Error::Domain(alloc::format!(
                    "confirmatory cost {c} at class {i} is negative"
                )));
            }
        }
        Ok(Self { sensitivity, false_positive_rate, confirm_cost })
    }

    /// Perfect tests: `s = 1`, `f = 0`, no confirmatory cost.
    pub fn perfect(k: usize) -> Self {
        Self {
            sensitivity: alloc::vec![1.0; k],
            false_positive_rate: alloc::vec![0.0; k],
            confirm_cost: alloc::vec![0.0; k],
        }
    }

    pub fn len(&self) -> usize {
        self.sensitivity.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sensitivity.is_empty()
    }

    pub fn sensitivity(&self) -> &[f64] {
        &self.sensitivity
    }

    pub fn false_positive_rate(&self) -> &[f64] {
        &self.false_positive_rate
    }

    pub fn confirm_cost(&self) -> &[f64] {
        &self.confirm_cost
    }
}

/// Per-class treatment payoffs: benefit `B`, harm `r`, and
/// untreated-disease cost `D`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TreatmentPayoffs {
    pub benefit: Vec<f64>,
    pub harm: Vec<f64>,
    pub untreated_cost: Vec<f64>,
}

impl TreatmentPayoffs {
    pub fn new(benefit: Vec<f64>, harm: Vec<f64>, untreated_cost: Vec<f64>) -> Result<Self> {
        let k = benefit.len();
        if harm.len() != k || untreated_cost.len() != k {
            return Err(Error::Config(
                "treatment payoff vectors must share one length".to_string(),
            ));
        }
        Ok(Self { benefit, harm, untreated_cost })
    }

    pub fn len(&self) -> usize {
        self.benefit.len()
    }

    pub fn is_empty(&self) -> bool {
        self.benefit.is_empty()
    }
}

/// The order in which the optimal policy tests classes: descending
/// probability-to-cost ratio, exact ties broken by ascending class index.
///
/// Ratios are compared by cross-multiplication (`p_a * c_b` vs
/// `p_b * c_a`) rather than division, so exact rational ties are detected
/// reliably. Probabilities are clamped before comparison.
pub fn search_order(forecast: &Forecast, costs: &RealizedCosts) -> Result<Vec<usize>> {
    let k = forecast.num_classes();
    if costs.len() != k {
        return Err(Error::Config(alloc::format!(
            "cost vector has {} entries, forecast has {k} classes",
            costs.len()
        )));
    }
    let c = costs.values();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        let lhs = clamp_prob(forecast.probs()[a]) * c[b];
        let rhs = clamp_prob(forecast.probs()[b]) * c[a];
        // Descending ratio; total order is guaranteed by the index tiebreak.
        rhs.partial_cmp(&lhs).unwrap_or(Ordering::Equal).then(a.cmp(&b))
    });
    Ok(order)
}

/// Walk the optimal order, accumulating costs until the true class is
/// tested.
pub fn simulate_search(lf: &LabeledForecast, costs: &RealizedCosts) -> Result<SearchTrace> {
    let full_order = search_order(&lf.forecast, costs)?;
    let c = costs.values();
    let mut order = Vec::new();
    let mut step_costs = Vec::new();
    let mut running = 0.0;
    for class in full_order {
        running += c[class];
        order.push(class);
        step_costs.push(running);
        if class == lf.true_class {
            break;
        }
    }
    let stop_step = order.len() - 1;
    Ok(SearchTrace { order, step_costs, stop_step, total_cost: running })
}

/// Mean simulated search cost over a test set under one shared realized
/// cost vector. Accumulates left to right, so the result is independent
/// of any internal parallel partitioning a caller might apply.
pub fn aggregate_cost(dataset: &[LabeledForecast], costs: &RealizedCosts) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::Domain("dataset is empty".to_string()));
    }
    let mut sum = 0.0;
    for lf in dataset {
        sum += simulate_search(lf, costs)?.total_cost;
    }
    Ok(sum / dataset.len() as f64)
}

/// Effective per-class costs under imperfect tests:
/// `(c_k + f_k * C_k) / s_k`.
///
/// Low sensitivity inflates cost by `1/s_k` (expected search restarts),
/// and false positives add the expected confirmatory-workup burden.
/// Ranking by `p_k / effective_cost_k` equals ranking by the resolution
/// index `s_k p_k / (c_k + f_k C_k)`.
pub fn effective_costs(base: &RealizedCosts, tc: &TestCharacteristics) -> Result<RealizedCosts> {
    let k = base.len();
    if tc.len() != k {
        return Err(Error::Config(alloc::format!(
            "test characteristics cover {} classes, costs cover {k}",
            tc.len()
        )));
    }
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        let s = tc.sensitivity[i];
        if s <= 0.0 {
            return Err(Error::Domain(alloc::format!("zero sensitivity at class {i}")));
        }
        out.push((base.values()[i] + tc.false_positive_rate[i] * tc.confirm_cost[i]) / s);
    }
    RealizedCosts::new(out)
}

/// Expected payoff once class `j` is resolved as the true condition:
/// `s_j (B_j - r_j) - (1 - s_j) D_j`.
///
/// This term depends only on the true condition, not on the search order,
/// so it is never added into simulated trace totals.
pub fn treatment_payoff(
    tc: &TestCharacteristics,
    tp: &TreatmentPayoffs,
    class_index: usize,
) -> Result<f64> {
    if tp.len() != tc.len() {
        return Err(Error::Config(
            "treatment payoffs and test characteristics must share one length".to_string(),
        ));
    }
    if class_index >= tc.len() {
        return Err(Error::Domain(alloc::format!(
            "class index {class_index} out of range for {} classes",
            tc.len()
        )));
    }
    let s = tc.sensitivity[class_index];
    Ok(s * (tp.benefit[class_index] - tp.harm[class_index])
        - (1.0 - s) * tp.untreated_cost[class_index])
}
