//! Closed-form search-cost scoring rules.
//!
//! Everything here reduces to one pairwise shape: the expected cost a
//! distractor class `j` adds to a sequential search for true class `i`,
//! as a function of the odds ratio `r = p_i / p_j`. Drawing latent unit
//! costs i.i.d. from `Beta(alpha, 1)` gives the one-parameter family
//! [`pairwise_loss`]; `alpha = 1` (uniform unit costs) specializes to
//! Pandora's Regret, and the `alpha -> 0` / `alpha -> infinity` endpoints
//! are exposed as symbolic limits.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::math;
use crate::{clamp_prob, Error, Result};

/// Above this value, powers of the odds ratio are computed in log space so
/// extreme exponents saturate cleanly instead of producing spurious NaNs.
const LOG_SPACE_ALPHA: f64 = 700.0;

/// A probability vector over `K >= 2` classes.
///
/// Entries must be nonnegative and sum to one within `1e-9` absolute.
/// Scores clamp entries to [`crate::PROB_CLAMP`] on use, so boundary
/// forecasts (exact zeros) are accepted.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Forecast {
    probs: Vec<f64>,
}

impl Forecast {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::Domain("forecast needs at least 2 classes".to_string()));
        }
        let mut sum = 0.0;
        for (k, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::Domain(alloc::format!(
                    "probability {p} at class {k} is not a finite nonnegative number"
                )));
            }
            sum += p;
        }
        if math::abs(sum - 1.0) > 1e-9 {
            return Err(Error::Domain(alloc::format!(
                "probabilities sum to {sum}, expected 1 within 1e-9"
            )));
        }
        Ok(Self { probs })
    }

    /// Uniform forecast over `k` classes.
    pub fn uniform(k: usize) -> Result<Self> {
        Self::new(alloc::vec![1.0 / k as f64; k])
    }

    pub fn num_classes(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Probability of class `k`, clamped away from zero.
    #[inline]
    pub fn clamped(&self, k: usize) -> f64 {
        clamp_prob(self.probs[k])
    }
}

/// A forecast paired with the instance's true class index.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LabeledForecast {
    pub forecast: Forecast,
    pub true_class: usize,
}

impl LabeledForecast {
    pub fn new(forecast: Forecast, true_class: usize) -> Result<Self> {
        if true_class >= forecast.num_classes() {
            return Err(Error::Domain(alloc::format!(
                "true class {true_class} out of range for {} classes",
                forecast.num_classes()
            )));
        }
        Ok(Self { forecast, true_class })
    }

    pub fn num_classes(&self) -> usize {
        self.forecast.num_classes()
    }
}

/// Shape parameter of the `Beta(alpha, 1)` unit-cost prior, including the
/// two symbolic endpoint limits.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Alpha {
    /// A finite shape, strictly positive.
    Finite(f64),
    /// The `alpha -> 0` limit: logarithmic left branch, `1/r` right branch.
    ZeroLimit,
    /// The `alpha -> infinity` limit: a pure rank step function.
    InfinityLimit,
}

impl Alpha {
    fn checked_finite(self) -> Result<Option<f64>> {
        match self {
            Alpha::Finite(a) if a.is_finite() && a > 0.0 => Ok(Some(a)),
            Alpha::Finite(a) => Err(Error::Domain(alloc::format!(
                "alpha must be a finite positive number, got {a}"
            ))),
            _ => Ok(None),
        }
    }
}

/// Deterministic per-class base costs, strictly positive.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BaseCosts {
    costs: Vec<f64>,
}

impl BaseCosts {
    pub fn new(costs: Vec<f64>) -> Result<Self> {
        if costs.is_empty() {
            return Err(Error::Domain("cost vector is empty".to_string()));
        }
        for (k, &c) in costs.iter().enumerate() {
            if !c.is_finite() || c <= 0.0 {
                return Err(Error::Domain(alloc::format!(
                    "cost {c} at class {k} is not strictly positive"
                )));
            }
        }
        Ok(Self { costs })
    }

    /// Unit costs for `k` classes.
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

/// `1` if `a > b`, `1/2` on an exact tie, else `0`: the probability that
/// the first quantity beats the second under random tie-breaking.
#[inline]
pub(crate) fn beat_prob(a: f64, b: f64) -> f64 {
    if a > b {
        1.0
    } else if a == b {
        0.5
    } else {
        0.0
    }
}

fn finite_loss(alpha: f64, r: f64) -> f64 {
    if r <= 1.0 {
        let r_pow_alpha = if alpha > LOG_SPACE_ALPHA {
            math::exp(alpha * math::ln(r))
        } else {
            math::powf(r, alpha)
        };
        1.0 + (1.0 + 1.0 / alpha) * (1.0 - r_pow_alpha)
    } else if alpha > LOG_SPACE_ALPHA {
        math::exp(-(alpha + 1.0) * math::ln(r))
    } else {
        math::powf(r, -(alpha + 1.0))
    }
}

/// Normalized pairwise loss of the Beta family at odds ratio `r`.
///
/// For finite `alpha > 0`:
///
/// ```text
/// L_alpha(r) = 1 + (1 + 1/alpha) (1 - r^alpha)   for r <= 1
///            = r^-(alpha+1)                       for r > 1
/// ```
///
/// Both branches meet at `L_alpha(1) = 1` for every `alpha`. The
/// [`Alpha::ZeroLimit`] endpoint is `1 - ln r` / `1/r`, and the
/// [`Alpha::InfinityLimit`] endpoint is the step `2, 1, 0` for
/// `r < 1, r = 1, r > 1`.
pub fn pairwise_loss(alpha: Alpha, r: f64) -> Result<f64> {
    if !r.is_finite() || r <= 0.0 {
        return Err(Error::Domain(alloc::format!(
            "odds ratio must be a finite positive number, got {r}"
        )));
    }
    match alpha.checked_finite()? {
        Some(a) => Ok(finite_loss(a, r)),
        None => match alpha {
            Alpha::ZeroLimit => {
                if r <= 1.0 {
                    Ok(1.0 - math::ln(r))
                } else {
                    Ok(1.0 / r)
                }
            }
            Alpha::InfinityLimit => Ok(2.0 * beat_prob(1.0, r)),
            Alpha::Finite(_) => unreachable!(),
        },
    }
}

/// Pandora's Regret: the unit-cost `alpha = 1` pairwise losses averaged
/// over distractors and scaled into `[0, 1]`.
///
/// `S(p, i) = 1/(3(K-1)) * sum_{j != i} L_1(p_i / p_j)` where
/// `L_1(r) = 3 - 2r` for `r <= 1` and `r^-2` for `r > 1`.
pub fn pandora_regret(lf: &LabeledForecast) -> f64 {
    let k = lf.num_classes();
    let p_true = lf.forecast.clamped(lf.true_class);
    let mut sum = 0.0;
    for j in 0..k {
        if j == lf.true_class {
            continue;
        }
        sum += finite_loss(1.0, p_true / lf.forecast.clamped(j));
    }
    sum / (3.0 * (k - 1) as f64)
}

/// Weighted Beta score: cost-weighted pairwise losses over cost-adjusted
/// odds, `sum_{j != i} C_j L_alpha((p_i/C_i) / (p_j/C_j))`.
///
/// With unit costs and `alpha = 1` this equals
/// `3 (K-1) * pandora_regret`.
pub fn beta_score(lf: &LabeledForecast, alpha: Alpha, costs: &BaseCosts) -> Result<f64> {
    let k = lf.num_classes();
    if costs.len() != k {
        return Err(Error::Config(alloc::format!(
            "cost vector has {} entries, forecast has {k} classes",
            costs.len()
        )));
    }
    alpha.checked_finite()?;
    let c = costs.values();
    let q_true = lf.forecast.clamped(lf.true_class) / c[lf.true_class];
    let mut sum = 0.0;
    for j in 0..k {
        if j == lf.true_class {
            continue;
        }
        let q_j = lf.forecast.clamped(j) / c[j];
        sum += c[j] * pairwise_loss(alpha, q_true / q_j)?;
    }
    Ok(sum)
}

/// Normalization constant linking the Beta score to raw expected search
/// cost: `b_alpha = alpha^2 / ((alpha + 1)(2 alpha + 1))`.
///
/// Monotone increasing in `alpha` with limit `1/2`.
pub fn b_alpha(alpha: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::Domain(alloc::format!(
            "alpha must be a finite positive number, got {alpha}"
        )));
    }
    Ok(alpha * alpha / ((alpha + 1.0) * (2.0 * alpha + 1.0)))
}

/// Raw expected total search cost under `Beta(alpha, 1)` unit costs scaled
/// by `costs`:
///
/// `S = alpha/(alpha+1) * C_i + b_alpha * beta_score`.
///
/// The `alpha -> infinity` limit is `C_i + sum_{j != i} C_j h(s_j, s_i)`
/// with `s_k = p_k / C_k` and `h` the half-tie indicator. The
/// `alpha -> 0` limit degenerates (both terms vanish) and is not defined
/// here; only the normalized [`beta_score`] exists at that endpoint.
pub fn raw_expected_cost(lf: &LabeledForecast, alpha: Alpha, costs: &BaseCosts) -> Result<f64> {
    let k = lf.num_classes();
    if costs.len() != k {
        return Err(Error::Config(alloc::format!(
            "cost vector has {} entries, forecast has {k} classes",
            costs.len()
        )));
    }
    let c_true = costs.values()[lf.true_class];
    match alpha {
        Alpha::Finite(_) => {
            let a = alpha.checked_finite()?.expect("finite alpha");
            Ok(a / (a + 1.0) * c_true + b_alpha(a)? * beta_score(lf, alpha, costs)?)
        }
        Alpha::InfinityLimit => {
            // alpha/(alpha+1) -> 1 and b_alpha -> 1/2.
            Ok(c_true + 0.5 * beta_score(lf, Alpha::InfinityLimit, costs)?)
        }
        Alpha::ZeroLimit => Err(Error::Unsupported(
            "raw expected cost degenerates as alpha -> 0; use beta_score for the limit score"
                .to_string(),
        )),
    }
}

/// Magnitude of the pairwise-loss gradient with respect to the distractor
/// logit, as a function of the logit gap `delta = z_i - z_j`:
///
/// `(alpha + 1) e^{alpha delta}` for `delta <= 0`,
/// `(alpha + 1) e^{-(alpha+1) delta}` for `delta > 0`.
///
/// Peaks at `alpha + 1` when the logits coincide.
pub fn pairwise_gradient(alpha: f64, delta: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::Domain(alloc::format!(
            "alpha must be a finite positive number, got {alpha}"
        )));
    }
    if delta <= 0.0 {
        Ok((alpha + 1.0) * math::exp(alpha * delta))
    } else {
        Ok((alpha + 1.0) * math::exp(-(alpha + 1.0) * delta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lf(probs: &[f64], true_class: usize) -> LabeledForecast {
        LabeledForecast::new(Forecast::new(probs.to_vec()).unwrap(), true_class).unwrap()
    }

    #[test]
    fn forecast_rejects_bad_inputs() {
        assert!(Forecast::new(vec![1.0]).is_err());
        assert!(Forecast::new(vec![0.5, 0.6]).is_err());
        assert!(Forecast::new(vec![-0.1, 1.1]).is_err());
        assert!(Forecast::new(vec![f64::NAN, 1.0]).is_err());
        assert!(Forecast::new(vec![0.5, 0.5]).is_ok());
        // Boundary forecasts are allowed; clamping happens at use.
        assert!(Forecast::new(vec![0.0, 1.0]).is_ok());
    }

    #[test]
    fn labeled_forecast_checks_class_index() {
        let f = Forecast::new(vec![0.5, 0.5]).unwrap();
        assert!(LabeledForecast::new(f.clone(), 2).is_err());
        assert!(LabeledForecast::new(f, 1).is_ok());
    }

    #[test]
    fn pairwise_loss_known_values() {
        assert_eq!(pairwise_loss(Alpha::Finite(1.0), 1.0).unwrap(), 1.0);
        assert_eq!(pairwise_loss(Alpha::Finite(1.0), 2.0).unwrap(), 0.25);
        assert_eq!(pairwise_loss(Alpha::Finite(1.0), 0.5).unwrap(), 2.0);
        let e_inv = math::exp(-1.0);
        assert!((pairwise_loss(Alpha::ZeroLimit, e_inv).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(pairwise_loss(Alpha::InfinityLimit, 0.7).unwrap(), 2.0);
        assert_eq!(pairwise_loss(Alpha::InfinityLimit, 1.0).unwrap(), 1.0);
        assert_eq!(pairwise_loss(Alpha::InfinityLimit, 1.3).unwrap(), 0.0);
    }

    #[test]
    fn pairwise_loss_rejects_bad_arguments() {
        assert!(pairwise_loss(Alpha::Finite(1.0), 0.0).is_err());
        assert!(pairwise_loss(Alpha::Finite(1.0), -1.0).is_err());
        assert!(pairwise_loss(Alpha::Finite(1.0), f64::INFINITY).is_err());
        assert!(pairwise_loss(Alpha::Finite(0.0), 1.0).is_err());
        assert!(pairwise_loss(Alpha::Finite(-2.0), 1.0).is_err());
    }

    // A finite-difference gap of 2 * eps * (alpha + 1) around r = 1 must
    // stay within 1e-6 at eps = 1e-8, which bounds the alphas tested here.
    #[test]
    fn pairwise_loss_continuous_at_one() {
        for &a in &[0.25, 0.5, 1.0, 2.0, 5.0, 10.0] {
            let eps = 1e-8;
            let lo = pairwise_loss(Alpha::Finite(a), 1.0 - eps).unwrap();
            let hi = pairwise_loss(Alpha::Finite(a), 1.0 + eps).unwrap();
            assert!((lo - hi).abs() < 1e-6, "alpha={a}: {lo} vs {hi}");
            assert_eq!(pairwise_loss(Alpha::Finite(a), 1.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn pairwise_loss_survives_extreme_alpha() {
        // Log-space path: saturates to the step limit without NaNs.
        let l = pairwise_loss(Alpha::Finite(1e4), 0.5).unwrap();
        assert!((l - (2.0 + 1e-4)).abs() < 1e-9);
        let r = pairwise_loss(Alpha::Finite(1e4), 2.0).unwrap();
        assert_eq!(r, 0.0);
        assert_eq!(pairwise_loss(Alpha::Finite(1e4), 1.0).unwrap(), 1.0);
    }

    #[test]
    fn pandora_regret_uniform_is_one_third() {
        for k in 2..=6 {
            let f = Forecast::uniform(k).unwrap();
            for i in 0..k {
                let v = pandora_regret(&LabeledForecast::new(f.clone(), i).unwrap());
                assert!((v - 1.0 / 3.0).abs() < 1e-15, "k={k} i={i}: {v}");
            }
        }
    }

    #[test]
    fn pandora_regret_binary_confident() {
        // r = 4, L_1 = 1/16, normalized by 3(K-1) = 3.
        let v = pandora_regret(&lf(&[0.8, 0.2], 0));
        assert!((v - 1.0 / 48.0).abs() < 1e-15);
    }

    #[test]
    fn pandora_regret_three_class_frozen() {
        // L_1(0.4) + L_1(2/3) = 11/5 + 5/3 = 58/15, over 3(K-1) = 6.
        let v = pandora_regret(&lf(&[0.2, 0.5, 0.3], 0));
        assert!((v - 29.0 / 45.0).abs() < 1e-14);
    }

    #[test]
    fn beta_score_known_values() {
        let unit4 = BaseCosts::unit(4);
        let f = Forecast::uniform(4).unwrap();
        let s = beta_score(
            &LabeledForecast::new(f, 0).unwrap(),
            Alpha::Finite(1.0),
            &unit4,
        )
        .unwrap();
        assert!((s - 3.0).abs() < 1e-15);

        let s = beta_score(&lf(&[0.8, 0.2], 0), Alpha::Finite(1.0), &BaseCosts::unit(2)).unwrap();
        assert!((s - 1.0 / 16.0).abs() < 1e-15);

        let costs = BaseCosts::new(vec![2.0, 1.0]).unwrap();
        let s = beta_score(&lf(&[0.5, 0.5], 0), Alpha::Finite(1.0), &costs).unwrap();
        assert!((s - 2.0).abs() < 1e-15);
    }

    #[test]
    fn beta_score_dimension_mismatch() {
        let err = beta_score(&lf(&[0.5, 0.5], 0), Alpha::Finite(1.0), &BaseCosts::unit(3));
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn pandora_normalization_matches_beta_score() {
        let cases = [
            lf(&[0.2, 0.5, 0.3], 0),
            lf(&[0.7, 0.1, 0.1, 0.1], 2),
            lf(&[0.5, 0.5], 1),
        ];
        for case in &cases {
            let k = case.num_classes();
            let lhs = 3.0 * (k - 1) as f64 * pandora_regret(case);
            let rhs = beta_score(case, Alpha::Finite(1.0), &BaseCosts::unit(k)).unwrap();
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
        }
    }

    #[test]
    fn b_alpha_known_values() {
        assert!((b_alpha(1.0).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!((b_alpha(2.0).unwrap() - 4.0 / 15.0).abs() < 1e-15);
        assert!((b_alpha(10.0).unwrap() - 100.0 / 231.0).abs() < 1e-15);
        assert!(b_alpha(0.0).is_err());
        assert!(b_alpha(-1.0).is_err());
        assert!(b_alpha(f64::INFINITY).is_err());
    }

    #[test]
    fn b_alpha_monotone_with_half_limit() {
        let mut prev = 0.0;
        for &a in &[0.01, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0, 1e6] {
            let b = b_alpha(a).unwrap();
            assert!(b > prev);
            assert!(b < 0.5);
            prev = b;
        }
        assert!((b_alpha(1e9).unwrap() - 0.5).abs() < 1e-8);
    }

    #[test]
    fn raw_expected_cost_known_values() {
        let unit2 = BaseCosts::unit(2);
        let v = raw_expected_cost(&lf(&[0.5, 0.5], 0), Alpha::Finite(1.0), &unit2).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-15);

        let v = raw_expected_cost(&lf(&[0.8, 0.2], 0), Alpha::Finite(1.0), &unit2).unwrap();
        assert!((v - 49.0 / 96.0).abs() < 1e-15);

        // Uniform-forecast closed form (1 + (K-1)/3) / 2 at alpha = 1.
        for k in 2..=6 {
            let f = Forecast::uniform(k).unwrap();
            let v = raw_expected_cost(
                &LabeledForecast::new(f, 0).unwrap(),
                Alpha::Finite(1.0),
                &BaseCosts::unit(k),
            )
            .unwrap();
            let expected = (1.0 + (k - 1) as f64 / 3.0) / 2.0;
            assert!((v - expected).abs() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn raw_expected_cost_zero_limit_unsupported() {
        let err = raw_expected_cost(&lf(&[0.5, 0.5], 0), Alpha::ZeroLimit, &BaseCosts::unit(2));
        assert!(matches!(err, Err(Error::Unsupported(_))));
    }

    #[test]
    fn raw_expected_cost_infinity_limit_is_rank_sum() {
        // p = (0.7, 0.2, 0.1), true class 1: distractor 0 outranks (s_0 > s_1),
        // distractor 2 does not.
        let v = raw_expected_cost(
            &lf(&[0.7, 0.2, 0.1], 1),
            Alpha::InfinityLimit,
            &BaseCosts::unit(3),
        )
        .unwrap();
        assert_eq!(v, 2.0);
    }

    #[test]
    fn pairwise_gradient_known_values() {
        assert_eq!(pairwise_gradient(1.0, 0.0).unwrap(), 2.0);
        let v = pairwise_gradient(1.0, math::ln(2.0)).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        let v = pairwise_gradient(3.0, -0.1).unwrap();
        assert!((v - 4.0 * math::exp(-0.3)).abs() < 1e-12);
        assert!(pairwise_gradient(0.0, 0.0).is_err());
        assert!(pairwise_gradient(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn zero_limit_matches_small_alpha() {
        for &r in &[0.1, 0.5, 1.0, 2.0, 10.0] {
            let near = pairwise_loss(Alpha::Finite(1e-4), r).unwrap();
            let limit = pairwise_loss(Alpha::ZeroLimit, r).unwrap();
            assert!((near - limit).abs() < 1e-3, "r={r}: {near} vs {limit}");
        }
    }

    #[test]
    fn infinity_limit_matches_large_alpha() {
        for &r in &[0.5, 0.9, 1.1, 2.0] {
            let near = pairwise_loss(Alpha::Finite(200.0), r).unwrap();
            let limit = pairwise_loss(Alpha::InfinityLimit, r).unwrap();
            assert!((near - limit).abs() < 0.01, "r={r}: {near} vs {limit}");
        }
        assert_eq!(pairwise_loss(Alpha::Finite(200.0), 1.0).unwrap(), 1.0);
    }
}
