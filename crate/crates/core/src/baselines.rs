//! Standard multiclass metrics and the decision models they implicitly
//! encode.
//!
//! Log loss is exposed alongside its two decision readings: a bank of
//! parallel per-class treat/defer decisions ([`parallel_decision_cost`])
//! and a fixed-order sequential search integrated against a
//! threshold-cost weight family ([`fixed_order_regret`]). At the Haldane
//! weights `a = b` the sequential regret collapses to `-ln p_i` for every
//! order — the metric forgets search economics entirely. Accuracy and
//! macro-F1 are the top-1 comparison metrics; [`f1_greedy_decision`]
//! makes macro-F1's implicit confusion-count-driven decision rule
//! executable.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::math;
use crate::scoring::{Forecast, LabeledForecast};
use crate::{Error, Result};

/// Per-class confusion counts for single-label multiclass predictions.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConfusionCounts {
    true_positives: Vec<u64>,
    false_positives: Vec<u64>,
    false_negatives: Vec<u64>,
}

impl ConfusionCounts {
    /// Build counts from explicit per-class vectors.
    pub fn from_raw(
        true_positives: Vec<u64>,
        false_positives: Vec<u64>,
        false_negatives: Vec<u64>,
    ) -> Result<Self> {
        let k = true_positives.len();
        if false_positives.len() != k || false_negatives.len() != k {
            return Err(Error::Config(
                "confusion count vectors must share one length".to_string(),
            ));
        }
        if k < 2 {
            return Err(Error::Domain("confusion counts need at least 2 classes".to_string()));
        }
        Ok(Self { true_positives, false_positives, false_negatives })
    }

    /// Fold a dataset into counts using argmax predictions (ties broken by
    /// lowest class index). The fold is associative over dataset chunks.
    pub fn from_predictions(dataset: &[LabeledForecast]) -> Result<Self> {
        if dataset.is_empty() {
            return Err(Error::Domain("dataset is empty".to_string()));
        }
        let k = dataset[0].num_classes();
        let mut counts = Self {
            true_positives: alloc::vec![0; k],
            false_positives: alloc::vec![0; k],
            false_negatives: alloc::vec![0; k],
        };
        for lf in dataset {
            if lf.num_classes() != k {
                return Err(Error::Config("mixed class counts in dataset".to_string()));
            }
            counts.record(argmax_lowest_index(lf.forecast.probs()), lf.true_class);
        }
        Ok(counts)
    }

    /// Record one (predicted, true) pair.
    pub fn record(&mut self, predicted: usize, truth: usize) {
        if predicted == truth {
            self.true_positives[truth] += 1;
        } else {
            self.false_positives[predicted] += 1;
            self.false_negatives[truth] += 1;
        }
    }

    pub fn num_classes(&self) -> usize {
        self.true_positives.len()
    }

    pub fn true_positives(&self) -> &[u64] {
        &self.true_positives
    }

    pub fn false_positives(&self) -> &[u64] {
        &self.false_positives
    }

    pub fn false_negatives(&self) -> &[u64] {
        &self.false_negatives
    }

    /// `D_k = 2 TP_k + FP_k + FN_k`, the F1 denominator for class `k`.
    pub fn f1_denominator(&self, k: usize) -> u64 {
        2 * self.true_positives[k] + self.false_positives[k] + self.false_negatives[k]
    }

    /// Per-class F1, with the `0/0` case defined as 0.
    pub fn f1(&self, k: usize) -> f64 {
        let d = self.f1_denominator(k);
        if d == 0 {
            0.0
        } else {
            2.0 * self.true_positives[k] as f64 / d as f64
        }
    }
}

/// Weights of the threshold-cost family `w(c) = a/c + b/(1-c)` used by
/// [`fixed_order_regret`]. The `a = b` member is the Haldane weight, the
/// unique choice that makes the regret order-invariant.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HaldaneParams {
    pub a: f64,
    pub b: f64,
}

impl HaldaneParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() || a < 0.0 || b < 0.0 || a + b <= 0.0 {
            return Err(Error::Domain(alloc::format!(
                "weights must be nonnegative with a + b > 0, got a={a}, b={b}"
            )));
        }
        Ok(Self { a, b })
    }
}

/// Index of the largest entry, ties broken by lowest index.
pub fn argmax_lowest_index(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Negative log probability of the true class, `-ln p_i`, with the
/// engine-wide clamp applied first.
pub fn log_loss(lf: &LabeledForecast) -> f64 {
    -math::ln(lf.forecast.clamped(lf.true_class))
}

/// Per-class risks of the parallel decision model with cost weight
/// `w(c) = 1/c`: `p_i - ln p_i` for the true class and `p_k` for each
/// distractor.
pub fn parallel_class_risks(lf: &LabeledForecast) -> Vec<f64> {
    (0..lf.num_classes())
        .map(|k| {
            let p = lf.forecast.clamped(k);
            if k == lf.true_class {
                p - math::ln(p)
            } else {
                p
            }
        })
        .collect()
}

/// Total cost of `K` simultaneous, independent treat/defer decisions,
/// which simplifies to `1 - ln p_i`: log loss plus a constant that does
/// not depend on the forecast beyond its unit mass.
pub fn parallel_decision_cost(lf: &LabeledForecast) -> f64 {
    parallel_class_risks(lf).iter().sum()
}

/// Integrated threshold regret of a fixed-order sequential search under
/// the weight family `w(c) = a/c + b/(1-c)`.
///
/// With `h_t` the conditional probability of the class at step `t` among
/// the remaining mass, false steps before the true class at position `m`
/// contribute `(a - b) h_t - b ln(1 - h_t)` and the true step contributes
/// `a (-ln h_m - (1 - h_m)) + b (1 - h_m)`. At `a = b` the sum
/// telescopes to `-ln p_i` for every order. Returns `+inf` when a false
/// step holds all remaining mass and `b > 0` (the regret integral
/// diverges).
pub fn fixed_order_regret(
    lf: &LabeledForecast,
    order: &[usize],
    params: HaldaneParams,
) -> Result<f64> {
    let k = lf.num_classes();
    if order.len() != k {
        return Err(Error::Domain(alloc::format!(
            "order has {} entries, forecast has {k} classes",
            order.len()
        )));
    }
    let mut seen = alloc::vec![false; k];
    for &cls in order {
        if cls >= k || seen[cls] {
            return Err(Error::Domain("order is not a permutation of the classes".to_string()));
        }
        seen[cls] = true;
    }

    // Suffix masses: remaining[t] is the clamped mass from step t onward.
    let probs: Vec<f64> = order.iter().map(|&cls| lf.forecast.clamped(cls)).collect();
    let mut remaining = alloc::vec![0.0; k + 1];
    for t in (0..k).rev() {
        remaining[t] = remaining[t + 1] + probs[t];
    }

    let HaldaneParams { a, b } = params;
    let mut total = 0.0;
    for t in 0..k {
        let h = probs[t] / remaining[t];
        if order[t] == lf.true_class {
            total += a * (-math::ln(h) - (1.0 - h)) + b * (1.0 - h);
            return Ok(total);
        }
        // 1 - h computed as a mass ratio to avoid cancellation near h = 1.
        let one_minus_h = remaining[t + 1] / remaining[t];
        if one_minus_h <= 0.0 {
            if b > 0.0 {
                return Ok(f64::INFINITY);
            }
            total += (a - b) * h;
            continue;
        }
        total += (a - b) * h - b * math::ln(one_minus_h);
    }
    unreachable!("true class is always present in a full permutation")
}

/// Fraction of instances whose argmax prediction (lowest-index ties)
/// equals the true class.
pub fn accuracy(dataset: &[LabeledForecast]) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::Domain("dataset is empty".to_string()));
    }
    let correct = dataset
        .iter()
        .filter(|lf| argmax_lowest_index(lf.forecast.probs()) == lf.true_class)
        .count();
    Ok(correct as f64 / dataset.len() as f64)
}

/// Unweighted mean over all classes of per-class F1 under argmax
/// predictions, with `0/0` per-class values defined as 0.
pub fn macro_f1(dataset: &[LabeledForecast]) -> Result<f64> {
    let counts = ConfusionCounts::from_predictions(dataset)?;
    let k = counts.num_classes();
    Ok((0..k).map(|c| counts.f1(c)).sum::<f64>() / k as f64)
}

/// Exact discrete marginal changes to class `k`'s F1 from one more true
/// positive and one more false positive:
///
/// `delta_tp = 2 (FP_k + FN_k) / (D_k (D_k + 2))`,
/// `delta_fp_abs = 2 TP_k / (D_k (D_k + 1))`.
///
/// The false-negative marginal has the same magnitude as the
/// false-positive one. Undefined (domain error) when `D_k = 0`; callers
/// wanting smoothing must seed the counts explicitly.
pub fn f1_marginals(counts: &ConfusionCounts, k: usize) -> Result<(f64, f64)> {
    if k >= counts.num_classes() {
        return Err(Error::Domain(alloc::format!("class index {k} out of range")));
    }
    let d = counts.f1_denominator(k);
    if d == 0 {
        return Err(Error::Domain(alloc::format!(
            "marginals undefined for class {k}: no counts recorded"
        )));
    }
    let d = d as f64;
    let tp = counts.true_positives[k] as f64;
    let fp_fn = (counts.false_positives[k] + counts.false_negatives[k]) as f64;
    Ok((2.0 * fp_fn / (d * (d + 2.0)), 2.0 * tp / (d * (d + 1.0))))
}

/// Large-count approximation of the greedy objective,
/// `(p_k - F1_k / 2) / D_k`. Provided only to check the exact rule's
/// asymptotics; decisions use [`f1_greedy_decision`].
pub fn f1_greedy_objective_asymptotic(counts: &ConfusionCounts, k: usize, p_k: f64) -> f64 {
    let d = counts.f1_denominator(k) as f64;
    (p_k - counts.f1(k) / 2.0) / d
}

/// The greedy macro-F1-optimal prediction for one instance: the class
/// maximizing `p_k (delta_tp_k + 2 delta_fp_k) - delta_fp_k`, where the
/// marginals come from the classifier's own aggregate confusion counts.
/// Ties broken by lowest index.
pub fn f1_greedy_decision(forecast: &Forecast, counts: &ConfusionCounts) -> Result<usize> {
    let k = forecast.num_classes();
    if counts.num_classes() != k {
        return Err(Error::Config(alloc::format!(
            "counts cover {} classes, forecast has {k}",
            counts.num_classes()
        )));
    }
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for class in 0..k {
        let (delta_tp, delta_fp) = f1_marginals(counts, class)?;
        let value = forecast.probs()[class] * (delta_tp + 2.0 * delta_fp) - delta_fp;
        if value > best_value {
            best = class;
            best_value = value;
        }
    }
    Ok(best)
}
