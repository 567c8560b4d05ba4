//! Model-ranking meta-evaluation.
//!
//! The question under test: when models are ranked by a cheap evaluation
//! metric, how well does that ranking agree with the ranking induced by
//! simulated downstream search cost? [`generate_zoo`] builds a synthetic
//! family of models as increasingly miscalibrated views of a shared
//! ground truth, [`apply_condition`] sets up one evaluation environment
//! (clinical costs, uniform cost draws, or temperature perturbations),
//! and [`run_meta_eval`] ranks models by each metric and by simulated
//! cost, reporting tie-corrected Kendall's tau with instance-bootstrap
//! confidence intervals.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::baselines::argmax_lowest_index;
use crate::math;
use crate::sampling::{self, RNG_ALGORITHM};
use crate::scoring::{pandora_regret, BaseCosts, Forecast, LabeledForecast};
use crate::search::{simulate_search, RealizedCosts};
use crate::{clamp_prob, Error, Result};

// Stream layout for condition seeds; the zoo uses stream 0 for ground
// truth and stream 1 + m for model m's noise.
const STREAM_COSTS: u64 = 0;
const STREAM_TEMPERATURE: u64 = 1;
const STREAM_BOOTSTRAP: u64 = 2;

/// Tie-corrected (tau-b) Kendall rank correlation between two equally
/// long lists of metric values.
///
/// Exhaustive O(n^2) pair counting:
/// `tau = (C - D) / sqrt((C + D + T_a)(C + D + T_b))` where `T_a` counts
/// pairs tied only in `a` and `T_b` pairs tied only in `b`.
pub fn kendall_tau(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Domain(alloc::format!(
            "rankings have different lengths: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::Domain("need at least 2 items to rank".to_string()));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::Domain("rankings contain NaN".to_string()));
    }
    let mut concordant = 0u64;
    let mut discordant = 0u64;
    let mut ties_a_only = 0u64;
    let mut ties_b_only = 0u64;
    for i in 0..n {
        for j in (i + 1)..n {
            let da = a[i] - a[j];
            let db = b[i] - b[j];
            if da == 0.0 && db == 0.0 {
                // Joint ties drop out of both denominator factors.
            } else if da == 0.0 {
                ties_a_only += 1;
            } else if db == 0.0 {
                ties_b_only += 1;
            } else if (da > 0.0) == (db > 0.0) {
                concordant += 1;
            } else {
                discordant += 1;
            }
        }
    }
    let cd = (concordant + discordant) as f64;
    let denom = math::sqrt((cd + ties_b_only as f64) * (cd + ties_a_only as f64));
    if denom == 0.0 {
        return Err(Error::Domain(
            "tau undefined: at least one ranking has no untied pairs".to_string(),
        ));
    }
    Ok((concordant as f64 - discordant as f64) / denom)
}

/// Shape of a synthetic model zoo: a shared ground truth plus a family of
/// models whose miscalibration severity grows along two axes, additive
/// Gaussian logit noise (linear grid) and a fixed softmax temperature
/// (log grid). Model 0 is the oracle (no noise, temperature 1).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelZooSpec {
    pub n_models: usize,
    pub num_classes: usize,
    pub n_instances: usize,
    /// Per-model logit-noise standard deviation, linearly interpolated
    /// from first to last model.
    pub noise_scale_range: (f64, f64),
    /// Per-model fixed temperature, log-interpolated from first to last
    /// model.
    pub temperature_range: (f64, f64),
    pub seed: u64,
}

impl Default for ModelZooSpec {
    fn default() -> Self {
        Self {
            n_models: 20,
            num_classes: 5,
            n_instances: 2000,
            noise_scale_range: (0.0, 3.0),
            temperature_range: (1.0, 3.0),
            seed: 42,
        }
    }
}

impl ModelZooSpec {
    fn validate(&self) -> Result<()> {
        if self.n_models < 10 {
            return Err(Error::Config(alloc::format!(
                "need at least 10 models, got {}",
                self.n_models
            )));
        }
        if self.n_instances < 100 {
            return Err(Error::Config(alloc::format!(
                "need at least 100 instances, got {}",
                self.n_instances
            )));
        }
        if self.num_classes < 2 {
            return Err(Error::Config("need at least 2 classes".to_string()));
        }
        let (n0, n1) = self.noise_scale_range;
        if !(n0.is_finite() && n1.is_finite()) || n0 < 0.0 || n1 < n0 {
            return Err(Error::Config("invalid noise scale range".to_string()));
        }
        let (t0, t1) = self.temperature_range;
        if !(t0.is_finite() && t1.is_finite()) || t0 <= 0.0 || t1 < t0 {
            return Err(Error::Config("invalid temperature range".to_string()));
        }
        Ok(())
    }
}

/// One synthetic model: its severity parameters and its forecasts for
/// every instance.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ZooModel {
    pub name: String,
    pub noise_scale: f64,
    pub temperature: f64,
    pub forecasts: Vec<Forecast>,
}

/// A generated zoo: shared labels/ground truth plus per-model forecasts.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelZoo {
    pub spec: ModelZooSpec,
    pub ground_truth: Vec<Forecast>,
    pub labels: Vec<usize>,
    pub models: Vec<ZooModel>,
}

impl ModelZoo {
    pub fn num_classes(&self) -> usize {
        self.spec.num_classes
    }

    pub fn n_instances(&self) -> usize {
        self.labels.len()
    }
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let exps: Vec<f64> = logits.iter().map(|&z| math::exp(z - max)).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|e| e / sum).collect()
}

/// Generate a synthetic model zoo deterministically from its spec.
///
/// Instance difficulty comes from uniform-simplex ground truths; labels
/// are drawn from those truths; model `m`'s forecast for an instance is
/// `softmax(ln(truth)/T_m + noise)` with per-model severity. Noise
/// scales ascend the linear grid with the model index while the log-grid
/// temperatures are assigned in a seeded shuffle, so the two
/// miscalibration axes are not collinear and metrics can genuinely
/// disagree about the ranking. Model 0 keeps zero noise and unit
/// temperature and so reproduces the truth exactly.
pub fn generate_zoo(spec: &ModelZooSpec) -> Result<ModelZoo> {
    spec.validate()?;
    let k = spec.num_classes;

    let mut truth_rng = sampling::stream_rng(spec.seed, 0);
    let mut ground_truth = Vec::with_capacity(spec.n_instances);
    let mut labels = Vec::with_capacity(spec.n_instances);
    for _ in 0..spec.n_instances {
        let pi = sampling::uniform_simplex(&mut truth_rng, k);
        labels.push(sampling::categorical(&mut truth_rng, &pi));
        ground_truth.push(Forecast::new(pi)?);
    }

    // Temperature grid positions for models 1.., shuffled; model 0 is
    // pinned to the grid origin.
    let mut temp_position: Vec<usize> = (1..spec.n_models).collect();
    {
        let mut shuffle_rng = sampling::stream_rng(spec.seed, u64::MAX);
        for i in (1..temp_position.len()).rev() {
            temp_position.swap(i, shuffle_rng.random_range(0..=i));
        }
    }

    let mut models = Vec::with_capacity(spec.n_models);
    let denom = (spec.n_models - 1).max(1) as f64;
    for m in 0..spec.n_models {
        let noise_frac = m as f64 / denom;
        let noise_scale = spec.noise_scale_range.0
            + noise_frac * (spec.noise_scale_range.1 - spec.noise_scale_range.0);
        let temp_frac =
            if m == 0 { 0.0 } else { temp_position[m - 1] as f64 / denom };
        let log_t0 = math::ln(spec.temperature_range.0);
        let log_t1 = math::ln(spec.temperature_range.1);
        let temperature = math::exp(log_t0 + temp_frac * (log_t1 - log_t0));

        let mut model_rng = sampling::stream_rng(spec.seed, 1 + m as u64);
        let mut forecasts = Vec::with_capacity(spec.n_instances);
        for truth in &ground_truth {
            if noise_scale == 0.0 && temperature == 1.0 {
                forecasts.push(truth.clone());
                continue;
            }
            let logits: Vec<f64> = truth
                .probs()
                .iter()
                .map(|&p| {
                    let z: f64 = model_rng.sample(StandardNormal);
                    math::ln(clamp_prob(p)) / temperature + noise_scale * z
                })
                .collect();
            forecasts.push(Forecast::new(softmax(&logits))?);
        }
        models.push(ZooModel {
            name: alloc::format!("model_{m:02}"),
            noise_scale,
            temperature,
            forecasts,
        });
    }

    Ok(ModelZoo { spec: spec.clone(), ground_truth, labels, models })
}

/// One evaluation environment.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ConditionKind {
    /// Rank against simulated cost under fixed task-specific costs.
    Clinical { costs: BaseCosts },
    /// Rank against simulated cost under shared uniform `(0, 1]` cost
    /// draws, matching the scoring rule's own prior; one draw per
    /// repetition, shared across models.
    WellSpecified,
    /// Rescale every model's forecasts by a per-model random temperature
    /// `T ~ LogNormal(0, log_sigma)`; costs stay at the given base.
    RandomTemperature { log_sigma: f64, costs: BaseCosts },
    /// Rescale only distractor-class probabilities by a per-model random
    /// temperature, holding each instance's true-class probability fixed;
    /// costs stay at the given base.
    DistractorTemperature { log_sigma: f64, costs: BaseCosts },
}

/// A condition plus the seed that makes its randomness reproducible.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Condition {
    pub kind: ConditionKind,
    pub seed: u64,
}

impl Condition {
    pub fn describe(&self) -> String {
        match &self.kind {
            ConditionKind::Clinical { .. } => "clinical".to_string(),
            ConditionKind::WellSpecified => "well_specified".to_string(),
            ConditionKind::RandomTemperature { log_sigma, .. } => {
                alloc::format!("random_temperature(log_sigma={log_sigma})")
            }
            ConditionKind::DistractorTemperature { log_sigma, .. } => {
                alloc::format!("distractor_temperature(log_sigma={log_sigma})")
            }
        }
    }

    fn validate(&self, num_classes: usize) -> Result<()> {
        let check_costs = |costs: &BaseCosts| -> Result<()> {
            if costs.len() != num_classes {
                return Err(Error::Config(alloc::format!(
                    "condition costs cover {} classes, zoo has {num_classes}",
                    costs.len()
                )));
            }
            Ok(())
        };
        match &self.kind {
            ConditionKind::Clinical { costs } => check_costs(costs),
            ConditionKind::WellSpecified => Ok(()),
            ConditionKind::RandomTemperature { log_sigma, costs }
            | ConditionKind::DistractorTemperature { log_sigma, costs } => {
                if !log_sigma.is_finite() || *log_sigma <= 0.0 {
                    return Err(Error::Config(alloc::format!(
                        "log_sigma must be positive, got {log_sigma}"
                    )));
                }
                check_costs(costs)
            }
        }
    }
}

/// Forecasts and realized cost vectors after applying a condition.
#[derive(Debug, Clone, PartialEq)]
pub struct AppliedCondition {
    /// Per-model forecasts (possibly perturbed), same shape as the zoo.
    pub model_forecasts: Vec<Vec<Forecast>>,
    /// Realized cost vectors to simulate against: one for fixed-cost
    /// conditions, `cost_draws` shared draws for the well-specified one.
    pub cost_vectors: Vec<RealizedCosts>,
    /// Temperatures drawn per model, when the condition uses them.
    pub temperatures: Option<Vec<f64>>,
    pub descriptor: String,
}

/// Rescale a forecast by temperature `T`: probabilities are raised to
/// `1/T` and renormalized (softmax of scaled log-probabilities). `T = 1`
/// is the identity.
pub fn temperature_rescale(forecast: &Forecast, temperature: f64) -> Result<Forecast> {
    if temperature == 1.0 {
        return Ok(forecast.clone());
    }
    let logits: Vec<f64> =
        forecast.probs().iter().map(|&p| math::ln(clamp_prob(p)) / temperature).collect();
    Forecast::new(softmax(&logits))
}

/// Rescale only the distractor probabilities by `1/T`, holding the true
/// class's probability fixed and renormalizing the distractors to the
/// remaining mass.
pub fn distractor_temperature_rescale(
    forecast: &Forecast,
    true_class: usize,
    temperature: f64,
) -> Result<Forecast> {
    if temperature == 1.0 {
        return Ok(forecast.clone());
    }
    let k = forecast.num_classes();
    let p_true = forecast.probs()[true_class];
    let remaining = (1.0 - p_true).max(0.0);
    let mut powered = alloc::vec![0.0; k];
    let mut sum = 0.0;
    for j in 0..k {
        if j == true_class {
            continue;
        }
        let w = math::powf(clamp_prob(forecast.probs()[j]), 1.0 / temperature);
        powered[j] = w;
        sum += w;
    }
    let mut probs = alloc::vec![0.0; k];
    probs[true_class] = p_true;
    for j in 0..k {
        if j != true_class {
            probs[j] = if sum > 0.0 { remaining * powered[j] / sum } else { 0.0 };
        }
    }
    Forecast::new(probs)
}

/// Apply a condition to a zoo: perturb forecasts where the condition says
/// to and fix the realized cost vectors the ranking will simulate
/// against.
pub fn apply_condition(
    zoo: &ModelZoo,
    condition: &Condition,
    cost_draws: usize,
) -> Result<AppliedCondition> {
    let k = zoo.num_classes();
    condition.validate(k)?;
    if cost_draws == 0 {
        return Err(Error::Config("need at least one cost draw".to_string()));
    }

    let identity_forecasts =
        || zoo.models.iter().map(|m| m.forecasts.clone()).collect::<Vec<_>>();

    match &condition.kind {
        ConditionKind::Clinical { costs } => Ok(AppliedCondition {
            model_forecasts: identity_forecasts(),
            cost_vectors: alloc::vec![RealizedCosts::new(costs.values().to_vec())?],
            temperatures: None,
            descriptor: condition.describe(),
        }),
        ConditionKind::WellSpecified => {
            let mut rng = sampling::stream_rng(condition.seed, STREAM_COSTS);
            let cost_vectors: Vec<RealizedCosts> = (0..cost_draws)
                .map(|_| {
                    RealizedCosts::new(
                        (0..k).map(|_| sampling::unit_uniform(&mut rng)).collect(),
                    )
                })
                .collect::<Result<_>>()?;
            Ok(AppliedCondition {
                model_forecasts: identity_forecasts(),
                cost_vectors,
                temperatures: None,
                descriptor: alloc::format!("well_specified(draws={cost_draws})"),
            })
        }
        ConditionKind::RandomTemperature { log_sigma, costs } => {
            let mut rng = sampling::stream_rng(condition.seed, STREAM_TEMPERATURE);
            let mut temperatures = Vec::with_capacity(zoo.models.len());
            let mut model_forecasts = Vec::with_capacity(zoo.models.len());
            for model in &zoo.models {
                let z: f64 = rng.sample(StandardNormal);
                let t = math::exp(log_sigma * z);
                temperatures.push(t);
                model_forecasts.push(
                    model
                        .forecasts
                        .iter()
                        .map(|f| temperature_rescale(f, t))
                        .collect::<Result<Vec<_>>>()?,
                );
            }
            Ok(AppliedCondition {
                model_forecasts,
                cost_vectors: alloc::vec![RealizedCosts::new(costs.values().to_vec())?],
                temperatures: Some(temperatures),
                descriptor: condition.describe(),
            })
        }
        ConditionKind::DistractorTemperature { log_sigma, costs } => {
            let mut rng = sampling::stream_rng(condition.seed, STREAM_TEMPERATURE);
            let mut temperatures = Vec::with_capacity(zoo.models.len());
            let mut model_forecasts = Vec::with_capacity(zoo.models.len());
            for model in &zoo.models {
                let z: f64 = rng.sample(StandardNormal);
                let t = math::exp(log_sigma * z);
                temperatures.push(t);
                let perturbed: Vec<Forecast> = model
                    .forecasts
                    .iter()
                    .zip(&zoo.labels)
                    .map(|(f, &label)| distractor_temperature_rescale(f, label, t))
                    .collect::<Result<_>>()?;
                model_forecasts.push(perturbed);
            }
            Ok(AppliedCondition {
                model_forecasts,
                cost_vectors: alloc::vec![RealizedCosts::new(costs.values().to_vec())?],
                temperatures: Some(temperatures),
                descriptor: condition.describe(),
            })
        }
    }
}

/// Metrics the harness can rank models by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Metric {
    Pandora,
    LogLoss,
    Accuracy,
    MacroF1,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Pandora, Metric::LogLoss, Metric::Accuracy, Metric::MacroF1];

    pub fn name(&self) -> &'static str {
        match self {
            Metric::Pandora => "pandora_regret",
            Metric::LogLoss => "log_loss",
            Metric::Accuracy => "accuracy",
            Metric::MacroF1 => "macro_f1",
        }
    }
}

/// Meta-evaluation options.
#[derive(Debug, Clone, Copy)]
pub struct MetaEvalOptions {
    /// Instance-bootstrap replicates for the confidence intervals.
    pub bootstrap_reps: usize,
    /// Shared cost draws for the well-specified condition; fixed-cost
    /// conditions always use exactly one vector.
    pub cost_draws: usize,
}

impl Default for MetaEvalOptions {
    fn default() -> Self {
        Self { bootstrap_reps: 200, cost_draws: 10 }
    }
}

/// One metric's row in a ranking report. `tau_abs` is the pooled mean of
/// per-draw |tau| values; the self-metric row pins the scale at 1.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricRow {
    pub metric: String,
    pub tau_signed: f64,
    pub tau_abs: f64,
    pub tau_abs_per_draw: Vec<f64>,
    pub tau_abs_ci: (f64, f64),
    pub gap_vs_pandora: f64,
    pub gap_ci: (f64, f64),
}

/// Raw metric values for one model: aligned with the report's
/// `per_model_header`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PerModelRow {
    pub model: String,
    pub values: Vec<f64>,
}

/// A full ranking report for one condition.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RankingReport {
    pub condition: String,
    pub condition_seed: u64,
    pub zoo_seed: u64,
    pub n_models: usize,
    pub n_instances: usize,
    pub num_classes: usize,
    pub bootstrap_reps: usize,
    pub cost_draws: usize,
    pub rng_algorithm: String,
    /// How the intervals were built. Intervals are widened, if needed, to
    /// contain the full-sample point estimate.
    pub ci_method: String,
    pub rows: Vec<MetricRow>,
    /// Column names of the raw per-model matrix: the requested metrics
    /// followed by the pooled simulated cost.
    pub per_model_header: Vec<String>,
    pub per_model: Vec<PerModelRow>,
}

/// Per-instance statistics for one model, precomputed once so bootstrap
/// replicates only re-average.
struct ModelStats {
    pandora: Vec<f64>,
    log_loss: Vec<f64>,
    correct: Vec<f64>,
    predicted: Vec<usize>,
    /// Simulated cost per cost draw per instance.
    costs: Vec<Vec<f64>>,
}

fn macro_f1_over(predicted: &[usize], labels: &[usize], indices: &[usize], k: usize) -> f64 {
    let mut tp = alloc::vec![0u64; k];
    let mut fp = alloc::vec![0u64; k];
    let mut fnn = alloc::vec![0u64; k];
    for &n in indices {
        let (pred, truth) = (predicted[n], labels[n]);
        if pred == truth {
            tp[truth] += 1;
        } else {
            fp[pred] += 1;
            fnn[truth] += 1;
        }
    }
    let mut sum = 0.0;
    for c in 0..k {
        let d = 2 * tp[c] + fp[c] + fnn[c];
        if d > 0 {
            sum += 2.0 * tp[c] as f64 / d as f64;
        }
    }
    sum / k as f64
}

fn mean_over(values: &[f64], indices: &[usize]) -> f64 {
    indices.iter().map(|&n| values[n]).sum::<f64>() / indices.len() as f64
}

/// Metric value per model over the given instance subset. Lower-is-better
/// and higher-is-better metrics are both fine: tau is reported in
/// absolute value with the signed value alongside.
fn metric_values(
    metric: Metric,
    stats: &[ModelStats],
    labels: &[usize],
    indices: &[usize],
    k: usize,
) -> Vec<f64> {
    stats
        .iter()
        .map(|s| match metric {
            Metric::Pandora => mean_over(&s.pandora, indices),
            Metric::LogLoss => mean_over(&s.log_loss, indices),
            Metric::Accuracy => mean_over(&s.correct, indices),
            Metric::MacroF1 => macro_f1_over(&s.predicted, labels, indices, k),
        })
        .collect()
}

fn cost_values(stats: &[ModelStats], draw: usize, indices: &[usize]) -> Vec<f64> {
    stats.iter().map(|s| mean_over(&s.costs[draw], indices)).collect()
}

/// Pooled (mean over cost draws) absolute and signed tau of one metric
/// vector against the per-draw simulated-cost vectors.
fn pooled_tau(
    metric_vec: &[f64],
    stats: &[ModelStats],
    n_draws: usize,
    indices: &[usize],
) -> Result<(f64, f64, Vec<f64>)> {
    let mut abs_sum = 0.0;
    let mut signed_sum = 0.0;
    let mut per_draw = Vec::with_capacity(n_draws);
    for d in 0..n_draws {
        let tau = kendall_tau(metric_vec, &cost_values(stats, d, indices))?;
        per_draw.push(math::abs(tau));
        abs_sum += math::abs(tau);
        signed_sum += tau;
    }
    let n = n_draws as f64;
    Ok((abs_sum / n, signed_sum / n, per_draw))
}

fn percentile_interval(sorted: &[f64], point: f64) -> (f64, f64) {
    let b = sorted.len();
    let lo_idx = (0.025 * (b - 1) as f64) as usize;
    let hi_idx = math::floor(0.975 * (b - 1) as f64 + 0.999999) as usize;
    let lo = sorted[lo_idx].min(point);
    let hi = sorted[hi_idx.min(b - 1)].max(point);
    (lo, hi)
}

/// Rank models by each metric and by simulated search cost under every
/// condition; report |tau| per metric with bootstrap confidence
/// intervals and the gap to Pandora's Regret.
///
/// Reports are deterministic: identical zoo, conditions, metrics, and
/// options reproduce them byte for byte.
pub fn run_meta_eval(
    zoo: &ModelZoo,
    conditions: &[Condition],
    metrics: &[Metric],
    opts: &MetaEvalOptions,
) -> Result<Vec<RankingReport>> {
    if metrics.is_empty() {
        return Err(Error::Config("metric list is empty".to_string()));
    }
    if opts.bootstrap_reps < 200 {
        return Err(Error::Config(alloc::format!(
            "need at least 200 bootstrap replicates, got {}",
            opts.bootstrap_reps
        )));
    }
    if zoo.models.is_empty() || zoo.labels.is_empty() {
        return Err(Error::Config("zoo is empty".to_string()));
    }

    let mut reports = Vec::with_capacity(conditions.len());
    for condition in conditions {
        reports.push(eval_condition(zoo, condition, metrics, opts)?);
    }
    Ok(reports)
}

fn eval_condition(
    zoo: &ModelZoo,
    condition: &Condition,
    metrics: &[Metric],
    opts: &MetaEvalOptions,
) -> Result<RankingReport> {
    let k = zoo.num_classes();
    let n_instances = zoo.n_instances();
    let applied = apply_condition(zoo, condition, opts.cost_draws)?;
    let n_draws = applied.cost_vectors.len();

    // Precompute per-instance statistics once per model.
    let mut stats = Vec::with_capacity(applied.model_forecasts.len());
    for forecasts in &applied.model_forecasts {
        let mut s = ModelStats {
            pandora: Vec::with_capacity(n_instances),
            log_loss: Vec::with_capacity(n_instances),
            correct: Vec::with_capacity(n_instances),
            predicted: Vec::with_capacity(n_instances),
            costs: alloc::vec![Vec::with_capacity(n_instances); n_draws],
        };
        for (n, forecast) in forecasts.iter().enumerate() {
            let lf = LabeledForecast::new(forecast.clone(), zoo.labels[n])?;
            s.pandora.push(pandora_regret(&lf));
            s.log_loss.push(crate::baselines::log_loss(&lf));
            let pred = argmax_lowest_index(forecast.probs());
            s.predicted.push(pred);
            s.correct.push(if pred == zoo.labels[n] { 1.0 } else { 0.0 });
            for (d, costs) in applied.cost_vectors.iter().enumerate() {
                s.costs[d].push(simulate_search(&lf, costs)?.total_cost);
            }
        }
        stats.push(s);
    }

    let full: Vec<usize> = (0..n_instances).collect();

    // Full-sample pooled taus: the self row plus every requested metric,
    // with Pandora always computed as the gap baseline.
    let (pandora_abs, _, _) =
        pooled_tau(&metric_values(Metric::Pandora, &stats, &zoo.labels, &full, k), &stats, n_draws, &full)?;

    struct RowAccum {
        name: String,
        point_abs: f64,
        point_signed: f64,
        per_draw: Vec<f64>,
        boot_abs: Vec<f64>,
        boot_gap: Vec<f64>,
    }

    let mut rows: Vec<RowAccum> = Vec::new();
    {
        // Self-metric sanity row: the cost ranking against itself.
        let mut abs_sum = 0.0;
        let mut per_draw = Vec::with_capacity(n_draws);
        for d in 0..n_draws {
            let v = cost_values(&stats, d, &full);
            let tau = kendall_tau(&v, &v)?;
            per_draw.push(math::abs(tau));
            abs_sum += math::abs(tau);
        }
        rows.push(RowAccum {
            name: "simulated_cost".to_string(),
            point_abs: abs_sum / n_draws as f64,
            point_signed: abs_sum / n_draws as f64,
            per_draw,
            boot_abs: Vec::new(),
            boot_gap: Vec::new(),
        });
    }
    for metric in metrics {
        let values = metric_values(*metric, &stats, &zoo.labels, &full, k);
        let (abs, signed, per_draw) = pooled_tau(&values, &stats, n_draws, &full)?;
        rows.push(RowAccum {
            name: metric.name().to_string(),
            point_abs: abs,
            point_signed: signed,
            per_draw,
            boot_abs: Vec::new(),
            boot_gap: Vec::new(),
        });
    }

    // Instance bootstrap: resample instances, recompute every ranking and
    // tau from the same resample so gaps are paired.
    let mut boot_rng = sampling::stream_rng(condition.seed, STREAM_BOOTSTRAP);
    for _ in 0..opts.bootstrap_reps {
        let indices: Vec<usize> =
            (0..n_instances).map(|_| boot_rng.random_range(0..n_instances)).collect();
        let (pandora_rep, _, _) = pooled_tau(
            &metric_values(Metric::Pandora, &stats, &zoo.labels, &indices, k),
            &stats,
            n_draws,
            &indices,
        )?;
        rows[0].boot_abs.push(1.0);
        rows[0].boot_gap.push(1.0 - pandora_rep);
        for (row, metric) in rows.iter_mut().skip(1).zip(metrics) {
            let values = metric_values(*metric, &stats, &zoo.labels, &indices, k);
            let (abs, _, _) = pooled_tau(&values, &stats, n_draws, &indices)?;
            row.boot_abs.push(abs);
            row.boot_gap.push(abs - pandora_rep);
        }
    }

    // Raw per-model matrix: requested metrics plus pooled simulated cost.
    let mut per_model_header: Vec<String> =
        metrics.iter().map(|m| m.name().to_string()).collect();
    per_model_header.push("simulated_cost".to_string());
    let per_model: Vec<PerModelRow> = zoo
        .models
        .iter()
        .enumerate()
        .map(|(m, model)| {
            let mut values: Vec<f64> = metrics
                .iter()
                .map(|&metric| {
                    metric_values(metric, &stats[m..=m], &zoo.labels, &full, k)[0]
                })
                .collect();
            let pooled_cost = (0..n_draws)
                .map(|d| mean_over(&stats[m].costs[d], &full))
                .sum::<f64>()
                / n_draws as f64;
            values.push(pooled_cost);
            PerModelRow { model: model.name.clone(), values }
        })
        .collect();

    let rows = rows
        .into_iter()
        .map(|row| {
            let mut sorted_abs = row.boot_abs.clone();
            sorted_abs.sort_by(|a, b| a.partial_cmp(b).expect("taus are finite"));
            let mut sorted_gap = row.boot_gap.clone();
            sorted_gap.sort_by(|a, b| a.partial_cmp(b).expect("gaps are finite"));
            let gap_point = row.point_abs - pandora_abs;
            MetricRow {
                metric: row.name,
                tau_signed: row.point_signed,
                tau_abs: row.point_abs,
                tau_abs_per_draw: row.per_draw,
                tau_abs_ci: percentile_interval(&sorted_abs, row.point_abs),
                gap_vs_pandora: gap_point,
                gap_ci: percentile_interval(&sorted_gap, gap_point),
            }
        })
        .collect();

    Ok(RankingReport {
        condition: applied.descriptor,
        condition_seed: condition.seed,
        zoo_seed: zoo.spec.seed,
        n_models: zoo.models.len(),
        n_instances,
        num_classes: k,
        bootstrap_reps: opts.bootstrap_reps,
        cost_draws: n_draws,
        rng_algorithm: RNG_ALGORITHM.to_string(),
        ci_method: "percentile bootstrap over test instances, widened to contain the point estimate"
            .to_string(),
        rows,
        per_model_header,
        per_model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kendall_tau_known_values() {
        assert_eq!(kendall_tau(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(kendall_tau(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        let tau = kendall_tau(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap();
        assert!((tau - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn kendall_tau_tie_correction() {
        // Two concordant pairs, one pair tied in the first list only:
        // tau-b = 2 / sqrt(2 * 3).
        let tau = kendall_tau(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!((tau - 2.0 / (6.0_f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn kendall_tau_rejects_degenerate_input() {
        assert!(kendall_tau(&[1.0], &[1.0]).is_err());
        assert!(kendall_tau(&[1.0, 2.0], &[1.0]).is_err());
        assert!(kendall_tau(&[1.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(kendall_tau(&[f64::NAN, 1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn kendall_tau_symmetry_and_negation() {
        let a = [0.3, 0.9, 0.1, 0.5];
        let b = [2.0, 1.0, 4.0, 3.0];
        assert_eq!(kendall_tau(&a, &b).unwrap(), kendall_tau(&b, &a).unwrap());
        let neg: Vec<f64> = a.iter().map(|v| -v).collect();
        assert_eq!(kendall_tau(&a, &neg).unwrap(), -1.0);
    }

    fn small_spec() -> ModelZooSpec {
        ModelZooSpec {
            n_models: 10,
            num_classes: 3,
            n_instances: 150,
            seed: 7,
            ..ModelZooSpec::default()
        }
    }

    #[test]
    fn zoo_generation_is_deterministic() {
        let spec = small_spec();
        let a = generate_zoo(&spec).unwrap();
        let b = generate_zoo(&spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn oracle_model_reproduces_ground_truth() {
        let zoo = generate_zoo(&small_spec()).unwrap();
        assert_eq!(zoo.models[0].noise_scale, 0.0);
        assert_eq!(zoo.models[0].temperature, 1.0);
        assert_eq!(zoo.models[0].forecasts, zoo.ground_truth);
    }

    #[test]
    fn zoo_spec_validation() {
        let mut spec = small_spec();
        spec.n_models = 5;
        assert!(generate_zoo(&spec).is_err());
        let mut spec = small_spec();
        spec.n_instances = 50;
        assert!(generate_zoo(&spec).is_err());
        let mut spec = small_spec();
        spec.temperature_range = (0.0, 2.0);
        assert!(generate_zoo(&spec).is_err());
    }

    #[test]
    fn temperature_identity_and_limits() {
        let f = Forecast::new(vec![0.5, 0.3, 0.2]).unwrap();
        assert_eq!(temperature_rescale(&f, 1.0).unwrap(), f);
        assert_eq!(distractor_temperature_rescale(&f, 0, 1.0).unwrap(), f);

        // Distractor rescale holds the true-class probability fixed.
        let out = distractor_temperature_rescale(&f, 0, 2.5).unwrap();
        assert_eq!(out.probs()[0], 0.5);
        let mass: f64 = out.probs().iter().sum();
        assert!((mass - 1.0).abs() < 1e-12);

        // T -> infinity flattens distractors to equal shares of the
        // remaining mass.
        let out = distractor_temperature_rescale(&f, 0, 1e12).unwrap();
        assert!((out.probs()[1] - 0.25).abs() < 1e-9);
        assert!((out.probs()[2] - 0.25).abs() < 1e-9);
    }

    #[test]
    fn well_specified_costs_are_shared_and_seeded() {
        let zoo = generate_zoo(&small_spec()).unwrap();
        let cond = Condition { kind: ConditionKind::WellSpecified, seed: 5 };
        let a = apply_condition(&zoo, &cond, 3).unwrap();
        let b = apply_condition(&zoo, &cond, 3).unwrap();
        assert_eq!(a.cost_vectors, b.cost_vectors);
        assert_eq!(a.cost_vectors.len(), 3);
        // Predictions pass through untouched.
        assert_eq!(a.model_forecasts[0], zoo.models[0].forecasts);
    }

    #[test]
    fn conditions_validate_inputs() {
        let zoo = generate_zoo(&small_spec()).unwrap();
        let bad = Condition {
            kind: ConditionKind::Clinical { costs: BaseCosts::unit(7) },
            seed: 1,
        };
        assert!(apply_condition(&zoo, &bad, 1).is_err());
        let bad = Condition {
            kind: ConditionKind::RandomTemperature {
                log_sigma: 0.0,
                costs: BaseCosts::unit(3),
            },
            seed: 1,
        };
        assert!(apply_condition(&zoo, &bad, 1).is_err());
    }

    #[test]
    fn meta_eval_self_row_is_one_and_reports_reproduce() {
        let zoo = generate_zoo(&small_spec()).unwrap();
        let conditions = [Condition { kind: ConditionKind::WellSpecified, seed: 11 }];
        let opts = MetaEvalOptions { bootstrap_reps: 200, cost_draws: 2 };
        let a = run_meta_eval(&zoo, &conditions, &Metric::ALL, &opts).unwrap();
        let b = run_meta_eval(&zoo, &conditions, &Metric::ALL, &opts).unwrap();
        assert_eq!(a, b);
        let report = &a[0];
        assert_eq!(report.rows[0].metric, "simulated_cost");
        assert_eq!(report.rows[0].tau_abs, 1.0);
        for row in &report.rows {
            assert!(row.tau_abs_ci.0 <= row.tau_abs && row.tau_abs <= row.tau_abs_ci.1);
            assert!(row.gap_ci.0 <= row.gap_vs_pandora && row.gap_vs_pandora <= row.gap_ci.1);
            assert!(row.tau_abs >= 0.0 && row.tau_abs <= 1.0);
        }
    }

    #[test]
    fn meta_eval_rejects_bad_options() {
        let zoo = generate_zoo(&small_spec()).unwrap();
        let conditions = [Condition { kind: ConditionKind::WellSpecified, seed: 11 }];
        let opts = MetaEvalOptions { bootstrap_reps: 10, cost_draws: 1 };
        assert!(run_meta_eval(&zoo, &conditions, &Metric::ALL, &opts).is_err());
        let opts = MetaEvalOptions::default();
        assert!(run_meta_eval(&zoo, &conditions, &[], &opts).is_err());
    }

    #[test]
    fn monotone_metric_transforms_share_tau() {
        let zoo = generate_zoo(&small_spec()).unwrap();
        let cond = Condition { kind: ConditionKind::WellSpecified, seed: 3 };
        let applied = apply_condition(&zoo, &cond, 1).unwrap();
        // Mean pandora per model vs its monotone transform.
        let mut vals = Vec::new();
        for (forecasts, _) in applied.model_forecasts.iter().zip(&zoo.models) {
            let mut sum = 0.0;
            for (f, &label) in forecasts.iter().zip(&zoo.labels) {
                sum += pandora_regret(&LabeledForecast::new(f.clone(), label).unwrap());
            }
            vals.push(sum / zoo.labels.len() as f64);
        }
        let transformed: Vec<f64> = vals.iter().map(|v| 10.0 * v + 3.0).collect();
        let costs: Vec<f64> = (0..vals.len()).map(|i| (i * 7 % 11) as f64).collect();
        let t1 = kendall_tau(&vals, &costs).unwrap();
        let t2 = kendall_tau(&transformed, &costs).unwrap();
        assert_eq!(t1, t2);
    }
}
