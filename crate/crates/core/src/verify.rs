//! Independent verification engines.
//!
//! The closed forms in [`crate::scoring`] claim to equal expected
//! search cost under specific cost priors. This module checks those
//! claims without reusing the closed-form path: [`mc_expected_cost`]
//! estimates expected cost by running the simulator over seeded cost
//! draws, [`pairwise_decomposition_check`] verifies the pathwise
//! accounting identity draw by draw, [`propriety_scan`] minimizes the
//! Bayes risk over a simplex grid to test (strict) propriety
//! numerically, and [`gradient_check`] compares the analytic pairwise
//! gradient against central finite differences.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::Rng;

use crate::math;
use crate::sampling::{self, RNG_ALGORITHM};
use crate::scoring::{beat_prob, BaseCosts, Forecast, LabeledForecast};
use crate::search::{simulate_search, RealizedCosts};
use crate::{clamp_prob, Error, Result};

/// A distribution over realized cost vectors, with the seed that makes
/// sampling from it reproducible.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CostPrior {
    pub kind: CostPriorKind,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CostPriorKind {
    /// Costs i.i.d. uniform on `(0, 1]`.
    Uniform01Iid,
    /// Costs i.i.d. `Beta(alpha, 1)`.
    BetaIid { alpha: f64 },
    /// `c_k = C_k * u_k` with `u_k` i.i.d. `Beta(alpha, 1)`.
    ScaledBeta { alpha: f64, base: BaseCosts },
    /// Uniform draw from a finite list of cost vectors. Proper but
    /// typically not strictly proper: only finitely many pairwise
    /// thresholds occur, so the expected score is piecewise flat.
    Empirical { samples: Vec<RealizedCosts> },
}

impl CostPrior {
    pub fn uniform01(seed: u64) -> Self {
        Self { kind: CostPriorKind::Uniform01Iid, seed }
    }

    pub fn beta(alpha: f64, seed: u64) -> Self {
        Self { kind: CostPriorKind::BetaIid { alpha }, seed }
    }

    pub fn scaled_beta(alpha: f64, base: BaseCosts, seed: u64) -> Self {
        Self { kind: CostPriorKind::ScaledBeta { alpha, base }, seed }
    }

    pub fn empirical(samples: Vec<RealizedCosts>, seed: u64) -> Self {
        Self { kind: CostPriorKind::Empirical { samples }, seed }
    }

    fn validate(&self, num_classes: usize) -> Result<()> {
        match &self.kind {
            CostPriorKind::Uniform01Iid => Ok(()),
            CostPriorKind::BetaIid { alpha } => {
                if !alpha.is_finite() || *alpha <= 0.0 {
                    return Err(Error::Config(alloc::format!(
                        "prior alpha must be finite positive, got {alpha}"
                    )));
                }
                Ok(())
            }
            CostPriorKind::ScaledBeta { alpha, base } => {
                if !alpha.is_finite() || *alpha <= 0.0 {
                    return Err(Error::Config(alloc::format!(
                        "prior alpha must be finite positive, got {alpha}"
                    )));
                }
                if base.len() != num_classes {
                    return Err(Error::Config(alloc::format!(
                        "prior base costs cover {} classes, instance has {num_classes}",
                        base.len()
                    )));
                }
                Ok(())
            }
            CostPriorKind::Empirical { samples } => {
                if samples.is_empty() {
                    return Err(Error::Config("empirical prior has no samples".to_string()));
                }
                for s in samples {
                    if s.len() != num_classes {
                        return Err(Error::Config(alloc::format!(
                            "empirical sample covers {} classes, instance has {num_classes}",
                            s.len()
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// Human-readable descriptor for reports.
    pub fn describe(&self) -> String {
        match &self.kind {
            CostPriorKind::Uniform01Iid => "uniform01_iid".to_string(),
            CostPriorKind::BetaIid { alpha } => alloc::format!("beta_iid(alpha={alpha})"),
            CostPriorKind::ScaledBeta { alpha, .. } => {
                alloc::format!("scaled_beta(alpha={alpha})")
            }
            CostPriorKind::Empirical { samples } => {
                alloc::format!("empirical({} samples)", samples.len())
            }
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R, num_classes: usize, out: &mut Vec<f64>) {
        out.clear();
        match &self.kind {
            CostPriorKind::Uniform01Iid => {
                out.extend((0..num_classes).map(|_| sampling::unit_uniform(rng)));
            }
            CostPriorKind::BetaIid { alpha } => {
                out.extend((0..num_classes).map(|_| sampling::beta_alpha_one(rng, *alpha)));
            }
            CostPriorKind::ScaledBeta { alpha, base } => {
                out.extend(
                    base.values().iter().map(|c| c * sampling::beta_alpha_one(rng, *alpha)),
                );
            }
            CostPriorKind::Empirical { samples } => {
                let idx = rng.random_range(0..samples.len());
                out.extend_from_slice(samples[idx].values());
            }
        }
    }
}

/// Streaming mean/variance accumulator (Welford), mergeable across
/// worker partitions without changing the result.
#[derive(Debug, Clone, Copy, Default)]
struct RunningMoments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningMoments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.count as f64 / count as f64;
        let m2 = self.m2
            + other.m2
            + delta * delta * self.count as f64 * other.count as f64 / count as f64;
        RunningMoments { count, mean, m2 }
    }

    fn std_error(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let var = (self.m2 / (self.count - 1) as f64).max(0.0);
        math::sqrt(var / self.count as f64)
    }
}

/// A Monte Carlo estimate with its sampling uncertainty and the
/// provenance needed to reproduce it.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub workers: u64,
    pub rng_algorithm: &'static str,
}

/// Estimate expected total search cost under a cost prior by running the
/// simulator over `n_samples` seeded draws.
///
/// Draws are partitioned across `workers` logical partitions, each on its
/// own ChaCha stream of the prior's seed; the combined estimate is
/// identical whether partitions run sequentially or concurrently, and
/// depends on the worker count only through the stream layout.
pub fn mc_expected_cost_partitioned(
    lf: &LabeledForecast,
    prior: &CostPrior,
    n_samples: u64,
    workers: u64,
) -> Result<McEstimate> {
    if n_samples < 1000 {
        return Err(Error::Config(alloc::format!(
            "need at least 1000 samples for a stable estimate, got {n_samples}"
        )));
    }
    if workers == 0 || workers > n_samples {
        return Err(Error::Config(alloc::format!("invalid worker count {workers}")));
    }
    let k = lf.num_classes();
    prior.validate(k)?;

    let base = n_samples / workers;
    let remainder = n_samples % workers;
    let mut combined = RunningMoments::default();
    let mut buf = Vec::with_capacity(k);
    for worker in 0..workers {
        let quota = base + u64::from(worker < remainder);
        let mut rng = sampling::stream_rng(prior.seed, worker);
        let mut local = RunningMoments::default();
        for _ in 0..quota {
            prior.draw(&mut rng, k, &mut buf);
            let costs = RealizedCosts::new(buf.clone())?;
            local.push(simulate_search(lf, &costs)?.total_cost);
        }
        combined = combined.merge(local);
    }
    Ok(McEstimate {
        mean: combined.mean,
        std_error: combined.std_error(),
        n_samples,
        workers,
        rng_algorithm: RNG_ALGORITHM,
    })
}

/// [`mc_expected_cost_partitioned`] with a single partition.
pub fn mc_expected_cost(
    lf: &LabeledForecast,
    prior: &CostPrior,
    n_samples: u64,
) -> Result<McEstimate> {
    mc_expected_cost_partitioned(lf, prior, n_samples, 1)
}

/// Outcome of the pathwise decomposition check: for every realized cost
/// vector, total search cost must equal the unavoidable true-class cost
/// plus one cost term per distractor tested earlier.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecompositionReport {
    pub n_samples: u64,
    /// Largest per-draw |direct - decomposed| deviation.
    pub max_abs_deviation: f64,
    /// Mean signed deviation across draws.
    pub mean_deviation: f64,
    /// Draws containing at least one exactly tied ratio pair. On ties the
    /// simulator uses the index rule while the decomposition charges half
    /// a cost, so tied draws may deviate; the two tie orders average to
    /// the decomposed value.
    pub tie_draws: u64,
    pub mean_direct: f64,
    pub mean_decomposed: f64,
    pub rng_algorithm: &'static str,
}

/// Compare the simulator's total cost against the pairwise-decomposed
/// total on the same draws.
///
/// Both sides compare ratios through identical cross products, and both
/// totals are accumulated in ascending class-index order, so on untied
/// draws the identity holds bit for bit: what is checked is which costs
/// are paid, not floating-point reassociation.
pub fn pairwise_decomposition_check(
    lf: &LabeledForecast,
    prior: &CostPrior,
    n_samples: u64,
) -> Result<DecompositionReport> {
    if n_samples < 1000 {
        return Err(Error::Config(alloc::format!(
            "need at least 1000 samples, got {n_samples}"
        )));
    }
    let k = lf.num_classes();
    prior.validate(k)?;

    let truth = lf.true_class;
    let p: Vec<f64> = (0..k).map(|j| lf.forecast.clamped(j)).collect();
    let mut rng = sampling::stream_rng(prior.seed, 0);
    let mut buf = Vec::with_capacity(k);
    let mut tested = alloc::vec![false; k];
    let mut max_abs = 0.0_f64;
    let mut sum_dev = 0.0;
    let mut sum_direct = 0.0;
    let mut sum_decomposed = 0.0;
    let mut tie_draws = 0;
    for _ in 0..n_samples {
        prior.draw(&mut rng, k, &mut buf);
        let costs = RealizedCosts::new(buf.clone())?;
        let trace = simulate_search(lf, &costs)?;
        tested.iter_mut().for_each(|t| *t = false);
        for &cls in &trace.order {
            tested[cls] = true;
        }

        let c = costs.values();
        let mut direct = 0.0;
        let mut decomposed = 0.0;
        let mut tied = false;
        for j in 0..k {
            if tested[j] {
                direct += c[j];
            }
            if j == truth {
                decomposed += c[j];
                continue;
            }
            // Distractor j is tested first exactly when its ratio beats
            // the true class's: p_j / c_j > p_i / c_i, compared via the
            // same cross products the simulator sorts with.
            let lhs = p[j] * c[truth];
            let rhs = p[truth] * c[j];
            if lhs == rhs {
                tied = true;
            }
            let weight = beat_prob(lhs, rhs);
            if weight > 0.0 {
                decomposed += weight * c[j];
            }
        }
        if tied {
            tie_draws += 1;
        }
        let dev = direct - decomposed;
        max_abs = max_abs.max(math::abs(dev));
        sum_dev += dev;
        sum_direct += direct;
        sum_decomposed += decomposed;
    }
    let n = n_samples as f64;
    Ok(DecompositionReport {
        n_samples,
        max_abs_deviation: max_abs,
        mean_deviation: sum_dev / n,
        tie_draws,
        mean_direct: sum_direct / n,
        mean_decomposed: sum_decomposed / n,
        rng_algorithm: RNG_ALGORITHM,
    })
}

/// Expected score of a candidate forecast when labels are distributed
/// according to `true_dist`: `sum_k pi_k * scorer(candidate, k)`.
pub fn bayes_risk<F>(candidate: &Forecast, true_dist: &Forecast, scorer: F) -> Result<f64>
where
    F: Fn(&Forecast, usize) -> Result<f64>,
{
    let k = true_dist.num_classes();
    if candidate.num_classes() != k {
        return Err(Error::Config(alloc::format!(
            "candidate has {} classes, true distribution has {k}",
            candidate.num_classes()
        )));
    }
    let mut risk = 0.0;
    for (class, &pi) in true_dist.probs().iter().enumerate() {
        risk += pi * scorer(candidate, class)?;
    }
    Ok(risk)
}

/// One evaluated point of a Bayes-risk grid scan.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridPoint {
    pub probs: Vec<f64>,
    pub risk: f64,
}

/// Bayes risks over a barycentric lattice of candidate forecasts.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BayesRiskGrid {
    pub true_dist: Forecast,
    pub resolution: f64,
    pub points: Vec<GridPoint>,
    /// Risk at the exact true distribution.
    pub truth_risk: f64,
}

/// Grid-scan verdict on (strict) propriety.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ProprietyVerdict {
    /// The truth beats every grid point at L1 distance >= 2 * resolution
    /// by more than the rounding margin; `margin` is the smallest lead.
    Strict { margin: f64 },
    /// Some sufficiently distant grid points tie the truth's risk within
    /// the rounding margin (flat regions).
    NonStrict { flat_points: usize },
    /// Some grid point strictly beats the truth; `deficit` is the worst
    /// shortfall. Indicates the scorer is not even proper.
    NotMinimal { deficit: f64 },
}

/// Result of a propriety grid scan.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProprietyScan {
    pub grid: BayesRiskGrid,
    pub verdict: ProprietyVerdict,
}

fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| math::abs(x - y)).sum()
}

fn simplex_grid(k: usize, resolution: f64) -> Vec<Vec<f64>> {
    let steps = (1.0 / resolution + 0.5) as usize;
    let mut points = Vec::new();
    match k {
        2 => {
            for i in 0..=steps {
                let a = i as f64 * resolution;
                points.push(alloc::vec![a.min(1.0), (1.0 - a).max(0.0)]);
            }
        }
        3 => {
            for i in 0..=steps {
                for j in 0..=(steps - i) {
                    let a = i as f64 * resolution;
                    let b = j as f64 * resolution;
                    points.push(alloc::vec![a, b, (1.0 - a - b).max(0.0)]);
                }
            }
        }
        _ => unreachable!("grid scan limited to 2 or 3 classes"),
    }
    points
}

/// Evaluate the Bayes risk of `scorer` on a simplex lattice plus the exact
/// true distribution, and judge strict propriety numerically.
///
/// PASS (strict) requires the truth to beat every grid point at L1
/// distance at least `2 * resolution` by more than ten machine epsilons
/// of the risk magnitude; nearer points are ignored because the risk is
/// quadratically flat around its minimum. Limited to 2 or 3 classes,
/// where the lattice is dense enough to be evidence.
pub fn propriety_scan<F>(
    true_dist: &Forecast,
    scorer: F,
    resolution: f64,
) -> Result<ProprietyScan>
where
    F: Fn(&Forecast, usize) -> Result<f64>,
{
    let k = true_dist.num_classes();
    if !(k == 2 || k == 3) {
        return Err(Error::Unsupported(alloc::format!(
            "grid scan supports 2 or 3 classes, got {k}"
        )));
    }
    if !(resolution > 0.0 && resolution <= 0.02) {
        return Err(Error::Config(alloc::format!(
            "resolution must be in (0, 0.02], got {resolution}"
        )));
    }

    let truth_risk = bayes_risk(true_dist, true_dist, &scorer)?;
    let mut points = Vec::new();
    for probs in simplex_grid(k, resolution) {
        let candidate = Forecast::new(probs.clone())?;
        let risk = bayes_risk(&candidate, true_dist, &scorer)?;
        points.push(GridPoint { probs, risk });
    }

    let mut verdict_margin = f64::INFINITY;
    let mut flat_points = 0;
    let mut worst_deficit = 0.0_f64;
    for point in &points {
        if l1_distance(&point.probs, true_dist.probs()) < 2.0 * resolution {
            continue;
        }
        let lead = point.risk - truth_risk;
        let margin = 10.0 * f64::EPSILON * math::abs(point.risk).max(math::abs(truth_risk));
        if lead > margin {
            verdict_margin = verdict_margin.min(lead);
        } else if lead >= -margin {
            flat_points += 1;
        } else {
            worst_deficit = worst_deficit.max(-lead);
        }
    }

    let verdict = if worst_deficit > 0.0 {
        ProprietyVerdict::NotMinimal { deficit: worst_deficit }
    } else if flat_points > 0 {
        ProprietyVerdict::NonStrict { flat_points }
    } else {
        ProprietyVerdict::Strict { margin: verdict_margin }
    };

    Ok(ProprietyScan {
        grid: BayesRiskGrid {
            true_dist: true_dist.clone(),
            resolution,
            points,
            truth_risk,
        },
        verdict,
    })
}

/// Report of a finite-difference check of the analytic pairwise gradient.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GradientCheckReport {
    pub alpha: f64,
    pub n_points: u64,
    pub max_rel_error: f64,
    /// Logit gaps with |delta| below this band are excluded: the loss has
    /// a kink at delta = 0 where central differences are meaningless.
    pub kink_exclusion: f64,
    pub step: f64,
}

/// Compare [`crate::scoring::pairwise_gradient`] against central finite
/// differences of the pairwise loss at `n_points` seeded random logit
/// gaps in `[-2, 2]`, excluding the kink band `|delta| < 1e-4`. Returns
/// the worst relative error.
pub fn gradient_check(alpha: f64, n_points: u64, seed: u64) -> Result<GradientCheckReport> {
    if n_points < 10 {
        return Err(Error::Config(alloc::format!("need at least 10 points, got {n_points}")));
    }
    const KINK: f64 = 1e-4;
    const STEP: f64 = 1e-6;
    let mut rng = sampling::seeded_rng(seed);
    let mut max_rel = 0.0_f64;
    let mut evaluated = 0;
    while evaluated < n_points {
        let delta: f64 = rng.random_range(-2.0..2.0);
        if math::abs(delta) < KINK {
            continue;
        }
        evaluated += 1;
        let analytic = crate::scoring::pairwise_gradient(alpha, delta)?;
        let loss = |d: f64| {
            crate::scoring::pairwise_loss(crate::scoring::Alpha::Finite(alpha), math::exp(d))
        };
        // The analytic value is the distractor-logit gradient, the
        // negative of d/d(delta).
        let fd = -(loss(delta + STEP)? - loss(delta - STEP)?) / (2.0 * STEP);
        let rel = math::abs(analytic - fd) / math::abs(analytic).max(f64::MIN_POSITIVE);
        max_rel = max_rel.max(rel);
    }
    Ok(GradientCheckReport {
        alpha,
        n_points,
        max_rel_error: max_rel,
        kink_exclusion: KINK,
        step: STEP,
    })
}

/// Scorer adapter: Pandora's Regret as a `(forecast, class) -> score`
/// function for [`bayes_risk`] and [`propriety_scan`].
pub fn pandora_scorer() -> impl Fn(&Forecast, usize) -> Result<f64> {
    |p: &Forecast, class: usize| {
        Ok(crate::scoring::pandora_regret(&LabeledForecast::new(p.clone(), class)?))
    }
}

/// Scorer adapter for the weighted Beta score at fixed `alpha` and costs.
pub fn beta_scorer(
    alpha: crate::scoring::Alpha,
    costs: BaseCosts,
) -> impl Fn(&Forecast, usize) -> Result<f64> {
    move |p: &Forecast, class: usize| {
        crate::scoring::beta_score(&LabeledForecast::new(p.clone(), class)?, alpha, &costs)
    }
}

/// Scorer adapter for accuracy as a loss: 0 when the argmax prediction
/// (lowest-index ties) matches the class, else 1. Flat almost everywhere.
pub fn accuracy_loss_scorer() -> impl Fn(&Forecast, usize) -> Result<f64> {
    |p: &Forecast, class: usize| {
        Ok(if crate::baselines::argmax_lowest_index(p.probs()) == class { 0.0 } else { 1.0 })
    }
}

/// Scorer adapter for negative log loss of the class.
pub fn log_loss_scorer() -> impl Fn(&Forecast, usize) -> Result<f64> {
    |p: &Forecast, class: usize| {
        Ok(-math::ln(clamp_prob(p.probs()[class])))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::{pandora_regret, raw_expected_cost, Alpha};

    fn lf(probs: &[f64], true_class: usize) -> LabeledForecast {
        LabeledForecast::new(Forecast::new(probs.to_vec()).unwrap(), true_class).unwrap()
    }

    #[test]
    fn mc_matches_uniform_closed_form_binary() {
        let inst = lf(&[0.5, 0.5], 0);
        let prior = CostPrior::uniform01(42);
        let est = mc_expected_cost(&inst, &prior, 200_000).unwrap();
        assert!(
            math::abs(est.mean - 2.0 / 3.0) <= 3.0 * est.std_error,
            "mean={} se={}",
            est.mean,
            est.std_error
        );
    }

    #[test]
    fn mc_matches_raw_cost_three_class() {
        let inst = lf(&[0.2, 0.5, 0.3], 0);
        let prior = CostPrior::uniform01(7);
        let est = mc_expected_cost(&inst, &prior, 200_000).unwrap();
        // Affine identity: S_unif = (1 + (K-1) regret) / 2.
        let expected = (1.0 + 2.0 * pandora_regret(&inst)) / 2.0;
        assert!((expected - 103.0 / 90.0).abs() < 1e-12);
        assert!(math::abs(est.mean - expected) <= 3.0 * est.std_error);
    }

    #[test]
    fn mc_matches_beta_closed_form() {
        let inst = lf(&[0.3, 0.45, 0.25], 1);
        let prior = CostPrior::beta(2.0, 11);
        let est = mc_expected_cost(&inst, &prior, 200_000).unwrap();
        let closed =
            raw_expected_cost(&inst, Alpha::Finite(2.0), &BaseCosts::unit(3)).unwrap();
        assert!(math::abs(est.mean - closed) <= 3.0 * est.std_error);
    }

    #[test]
    fn mc_degenerate_empirical_prior_has_zero_error() {
        let fixed = RealizedCosts::new(vec![2.0, 3.0]).unwrap();
        let inst = lf(&[0.4, 0.6], 0);
        let expected = simulate_search(&inst, &fixed).unwrap().total_cost;
        let prior = CostPrior::empirical(vec![fixed], 1);
        let est = mc_expected_cost(&inst, &prior, 1000).unwrap();
        assert_eq!(est.mean, expected);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn mc_is_reproducible_and_worker_invariant_in_distribution() {
        let inst = lf(&[0.25, 0.75], 1);
        let prior = CostPrior::uniform01(99);
        let a = mc_expected_cost(&inst, &prior, 10_000).unwrap();
        let b = mc_expected_cost(&inst, &prior, 10_000).unwrap();
        assert_eq!(a, b);
        // A different worker count reshapes streams but stays within
        // sampling error of the same target.
        let c = mc_expected_cost_partitioned(&inst, &prior, 10_000, 4).unwrap();
        assert!(math::abs(a.mean - c.mean) < 4.0 * (a.std_error + c.std_error));
    }

    #[test]
    fn mc_rejects_tiny_sample_counts_and_bad_priors() {
        let inst = lf(&[0.5, 0.5], 0);
        assert!(mc_expected_cost(&inst, &CostPrior::uniform01(1), 10).is_err());
        assert!(mc_expected_cost(&inst, &CostPrior::beta(-1.0, 1), 1000).is_err());
        let short = CostPrior::scaled_beta(1.0, BaseCosts::unit(3), 1);
        assert!(mc_expected_cost(&inst, &short, 1000).is_err());
        assert!(mc_expected_cost(&inst, &CostPrior::empirical(Vec::new(), 1), 1000).is_err());
    }

    #[test]
    fn decomposition_is_pathwise_exact_for_continuous_priors() {
        for (seed, prior) in [
            (3u64, CostPrior::uniform01(3)),
            (4, CostPrior::beta(0.5, 4)),
            (5, CostPrior::scaled_beta(2.0, BaseCosts::new(vec![2.0, 1.0, 4.0]).unwrap(), 5)),
        ] {
            let inst = lf(&[0.5, 0.2, 0.3], 2);
            let report = pairwise_decomposition_check(&inst, &prior, 20_000).unwrap();
            assert_eq!(report.max_abs_deviation, 0.0, "seed {seed}");
            assert_eq!(report.tie_draws, 0);
        }
    }

    #[test]
    fn decomposition_tie_draws_average_the_two_orders() {
        // Construct an exact tie: p = (2/3, 1/3), costs (2, 1) make
        // p_0 c_1 == p_1 c_0 bit for bit.
        let inst = lf(&[2.0 / 3.0, 1.0 / 3.0], 0);
        let tied = RealizedCosts::new(vec![2.0, 1.0]).unwrap();
        let prior = CostPrior::empirical(vec![tied.clone()], 8);
        let report = pairwise_decomposition_check(&inst, &prior, 1000).unwrap();
        assert_eq!(report.tie_draws, 1000);
        // Order (0): cost 2. Order (1, 0): cost 3. Average = 2.5.
        assert_eq!(report.mean_decomposed, 2.5);
        // The simulator's index rule resolves the tie toward class 0.
        assert_eq!(report.mean_direct, 2.0);
    }

    #[test]
    fn bayes_risk_identities() {
        let pi = Forecast::new(vec![0.5, 0.5]).unwrap();
        let risk = bayes_risk(&pi, &pi, pandora_scorer()).unwrap();
        assert!((risk - 1.0 / 3.0).abs() < 1e-15);

        // Log loss at the truth is the Shannon entropy.
        let pi = Forecast::new(vec![0.3, 0.7]).unwrap();
        let risk = bayes_risk(&pi, &pi, log_loss_scorer()).unwrap();
        let entropy = -(0.3 * math::ln(0.3) + 0.7 * math::ln(0.7));
        assert!((risk - entropy).abs() < 1e-12);

        // A one-hot far from the truth is strictly worse.
        let candidate = Forecast::new(vec![0.0, 1.0]).unwrap();
        let pi = Forecast::new(vec![0.7, 0.3]).unwrap();
        let at_truth = bayes_risk(&pi, &pi, pandora_scorer()).unwrap();
        let off = bayes_risk(&candidate, &pi, pandora_scorer()).unwrap();
        assert!(off > at_truth);
    }

    #[test]
    fn propriety_scan_strict_for_pandora() {
        let pi = Forecast::new(vec![0.6, 0.4]).unwrap();
        let scan = propriety_scan(&pi, pandora_scorer(), 0.01).unwrap();
        assert!(matches!(scan.verdict, ProprietyVerdict::Strict { .. }), "{:?}", scan.verdict);
    }

    #[test]
    fn propriety_scan_flat_for_rank_limit_and_accuracy() {
        let pi = Forecast::new(vec![0.6, 0.4]).unwrap();
        let scan = propriety_scan(
            &pi,
            beta_scorer(Alpha::InfinityLimit, BaseCosts::unit(2)),
            0.01,
        )
        .unwrap();
        assert!(matches!(scan.verdict, ProprietyVerdict::NonStrict { .. }), "{:?}", scan.verdict);

        let scan = propriety_scan(&pi, accuracy_loss_scorer(), 0.01).unwrap();
        assert!(matches!(scan.verdict, ProprietyVerdict::NonStrict { .. }), "{:?}", scan.verdict);
    }

    #[test]
    fn propriety_scan_rejects_unsupported_shapes() {
        let pi = Forecast::uniform(4).unwrap();
        assert!(matches!(
            propriety_scan(&pi, pandora_scorer(), 0.01),
            Err(Error::Unsupported(_))
        ));
        let pi = Forecast::uniform(2).unwrap();
        assert!(propriety_scan(&pi, pandora_scorer(), 0.5).is_err());
    }

    #[test]
    fn gradient_check_meets_tolerance() {
        for &alpha in &[0.5, 1.0, 3.0, 5.0] {
            let report = gradient_check(alpha, 200, 17).unwrap();
            assert!(
                report.max_rel_error < 1e-5,
                "alpha={alpha}: {}",
                report.max_rel_error
            );
        }
        assert!(gradient_check(1.0, 5, 17).is_err());
    }
}
