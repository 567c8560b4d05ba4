//! Named verification suites.
//!
//! Each suite bundles the property checks for one claim family into
//! machine-readable pass/fail results, so a single command can re-verify
//! the closed forms, propriety, gradients, cost-amnesia identities, and
//! the pathwise decomposition on demand.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::Rng;

use crate::baselines::{
    fixed_order_regret, log_loss, parallel_decision_cost, HaldaneParams,
};
use crate::math;
use crate::sampling;
use crate::scoring::{raw_expected_cost, Alpha, BaseCosts, Forecast, LabeledForecast};
use crate::search::RealizedCosts;
use crate::verify::{
    accuracy_loss_scorer, beta_scorer, gradient_check, mc_expected_cost,
    pairwise_decomposition_check, pandora_scorer, propriety_scan, CostPrior, ProprietyVerdict,
};
use crate::Result;

/// One machine-checkable verification outcome.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub details: String,
}

impl CheckResult {
    fn new(name: impl Into<String>, passed: bool, details: String) -> Self {
        Self { name: name.into(), passed, details }
    }
}

/// Suite selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// Monte Carlo oracle agreement with the closed-form expected costs.
    Oracle,
    /// Bayes-risk grid scans: strict propriety where claimed, flat
    /// plateaus where claimed.
    Propriety,
    /// Finite-difference checks of the analytic pairwise gradient.
    Gradient,
    /// Cost-amnesia identities of log loss (parallel and fixed-order).
    Amnesia,
    /// Pathwise pairwise decomposition of simulated search cost.
    Decomposition,
    All,
}

/// Options shared by the suites. `mc_samples` controls the Monte Carlo
/// sample count per oracle comparison.
#[derive(Debug, Clone, Copy)]
pub struct SuiteOptions {
    pub seed: u64,
    pub mc_samples: u64,
}

impl SuiteOptions {
    pub fn new(seed: u64) -> Self {
        Self { seed, mc_samples: 100_000 }
    }
}

fn random_instance<R: rand::Rng + ?Sized>(rng: &mut R, k: usize) -> LabeledForecast {
    let probs = sampling::uniform_simplex(rng, k);
    let truth = rng.random_range(0..k);
    LabeledForecast::new(Forecast::new(probs).expect("simplex draw is valid"), truth)
        .expect("class index in range")
}

/// Interior label distribution: a simplex draw mixed toward uniform so no
/// class is vanishingly rare.
fn random_interior_dist<R: rand::Rng + ?Sized>(rng: &mut R, k: usize) -> Forecast {
    let mut probs = sampling::uniform_simplex(rng, k);
    let total: f64 = probs.iter().map(|p| p + 0.1).sum();
    for p in &mut probs {
        *p = (*p + 0.1) / total;
    }
    Forecast::new(probs).expect("mixture stays on the simplex")
}

/// Visit every permutation of `0..n` (Heap's algorithm).
fn for_each_permutation(n: usize, mut visit: impl FnMut(&[usize])) {
    let mut items: Vec<usize> = (0..n).collect();
    let mut stack = alloc::vec![0usize; n];
    visit(&items);
    let mut i = 1;
    while i < n {
        if stack[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(stack[i], i);
            }
            visit(&items);
            stack[i] += 1;
            i = 1;
        } else {
            stack[i] = 0;
            i += 1;
        }
    }
}

/// Monte Carlo oracle agreement: for each Beta shape and cost setting,
/// the simulated expected cost must sit within three standard errors of
/// the closed form.
pub fn suite_oracle(opts: SuiteOptions) -> Result<Vec<CheckResult>> {
    let mut rng = sampling::stream_rng(opts.seed, 101);
    let mut results = Vec::new();

    // The worked binary anchor: uniform costs, even odds, expected 2/3.
    let inst = LabeledForecast::new(Forecast::new(alloc::vec![0.5, 0.5])?, 0)?;
    let est = mc_expected_cost(&inst, &CostPrior::uniform01(opts.seed), opts.mc_samples)?;
    let target = 2.0 / 3.0;
    results.push(CheckResult::new(
        "oracle/uniform01_even_odds",
        math::abs(est.mean - target) <= 3.0 * est.std_error,
        alloc::format!(
            "mc={:.6} closed={:.6} se={:.2e} rng={}",
            est.mean,
            target,
            est.std_error,
            est.rng_algorithm
        ),
    ));

    let non_unit = BaseCosts::new(alloc::vec![2.0, 0.7, 1.3])?;
    for &alpha in &[0.5, 1.0, 2.0, 5.0] {
        for unit_costs in [true, false] {
            for case in 0..3 {
                let inst = random_instance(&mut rng, 3);
                let (prior, costs) = if unit_costs {
                    if alpha == 1.0 {
                        // Beta(1,1) is the uniform prior; exercise that kind.
                        (CostPrior::uniform01(opts.seed ^ case), BaseCosts::unit(3))
                    } else {
                        (CostPrior::beta(alpha, opts.seed ^ case), BaseCosts::unit(3))
                    }
                } else {
                    (
                        CostPrior::scaled_beta(alpha, non_unit.clone(), opts.seed ^ case),
                        non_unit.clone(),
                    )
                };
                let est = mc_expected_cost(&inst, &prior, opts.mc_samples)?;
                let closed = raw_expected_cost(&inst, Alpha::Finite(alpha), &costs)?;
                let diff = math::abs(est.mean - closed);
                results.push(CheckResult::new(
                    alloc::format!(
                        "oracle/{}_alpha_{alpha}_case_{case}",
                        if unit_costs { "unit" } else { "scaled" }
                    ),
                    diff <= 3.0 * est.std_error,
                    alloc::format!(
                        "mc={:.6} closed={closed:.6} |diff|={diff:.2e} 3se={:.2e}",
                        est.mean,
                        3.0 * est.std_error
                    ),
                ));
            }
        }
    }
    Ok(results)
}

fn verdict_name(v: &ProprietyVerdict) -> &'static str {
    match v {
        ProprietyVerdict::Strict { .. } => "STRICT",
        ProprietyVerdict::NonStrict { .. } => "NON-STRICT",
        ProprietyVerdict::NotMinimal { .. } => "NOT-MINIMAL",
    }
}

/// Grid scans: the regret score, finite-alpha Beta scores, and the
/// lower-endpoint limit must be strictly proper; the rank limit and
/// accuracy must show flat plateaus.
pub fn suite_propriety(opts: SuiteOptions) -> Result<Vec<CheckResult>> {
    let mut rng = sampling::stream_rng(opts.seed, 202);
    let mut results = Vec::new();
    const RESOLUTION: f64 = 0.01;

    for k in [2usize, 3] {
        for case in 0..5 {
            let pi = random_interior_dist(&mut rng, k);
            let unit = BaseCosts::unit(k);

            let mut strict_scorers: Vec<(String, alloc::boxed::Box<dyn Fn(&Forecast, usize) -> Result<f64>>)> =
                Vec::new();
            strict_scorers.push(("pandora".to_string(), alloc::boxed::Box::new(pandora_scorer())));
            for &alpha in &[0.5, 1.0, 2.0] {
                strict_scorers.push((
                    alloc::format!("beta_alpha_{alpha}"),
                    alloc::boxed::Box::new(beta_scorer(Alpha::Finite(alpha), unit.clone())),
                ));
            }
            strict_scorers.push((
                "beta_zero_limit".to_string(),
                alloc::boxed::Box::new(beta_scorer(Alpha::ZeroLimit, unit.clone())),
            ));

            for (name, scorer) in &strict_scorers {
                let scan = propriety_scan(&pi, scorer, RESOLUTION)?;
                let passed = matches!(scan.verdict, ProprietyVerdict::Strict { .. });
                results.push(CheckResult::new(
                    alloc::format!("propriety/{name}_k{k}_case_{case}"),
                    passed,
                    alloc::format!("verdict={} pi={:?}", verdict_name(&scan.verdict), pi.probs()),
                ));
            }

            let flat_scorers: Vec<(String, alloc::boxed::Box<dyn Fn(&Forecast, usize) -> Result<f64>>)> = alloc::vec![
                (
                    "beta_infinity_limit".to_string(),
                    alloc::boxed::Box::new(beta_scorer(Alpha::InfinityLimit, unit.clone()))
                        as alloc::boxed::Box<dyn Fn(&Forecast, usize) -> Result<f64>>,
                ),
                ("accuracy".to_string(), alloc::boxed::Box::new(accuracy_loss_scorer())),
            ];
            for (name, scorer) in &flat_scorers {
                let scan = propriety_scan(&pi, scorer, RESOLUTION)?;
                let passed = matches!(scan.verdict, ProprietyVerdict::NonStrict { .. });
                results.push(CheckResult::new(
                    alloc::format!("propriety/{name}_k{k}_case_{case}"),
                    passed,
                    alloc::format!("verdict={} pi={:?}", verdict_name(&scan.verdict), pi.probs()),
                ));
            }
        }
    }
    Ok(results)
}

/// Analytic pairwise gradient vs central finite differences.
pub fn suite_gradient(opts: SuiteOptions) -> Result<Vec<CheckResult>> {
    let mut results = Vec::new();
    for &alpha in &[0.5, 1.0, 3.0, 5.0] {
        let report = gradient_check(alpha, 200, opts.seed)?;
        results.push(CheckResult::new(
            alloc::format!("gradient/alpha_{alpha}"),
            report.max_rel_error < 1e-5,
            alloc::format!(
                "max_rel_err={:.2e} (step={:.0e}, kink |delta|<{:.0e} excluded)",
                report.max_rel_error,
                report.step,
                report.kink_exclusion
            ),
        ));
    }
    Ok(results)
}

/// Cost-amnesia identities: order-invariance of the fixed-order regret at
/// the Haldane weights, the knife-edge spread away from them, and the
/// parallel-decision shift identity.
pub fn suite_amnesia(opts: SuiteOptions) -> Result<Vec<CheckResult>> {
    let mut rng = sampling::stream_rng(opts.seed, 303);
    let mut results = Vec::new();
    let haldane = HaldaneParams::new(1.0, 1.0)?;

    let mut worst_rel = 0.0_f64;
    let mut checked_orders = 0u64;
    for _ in 0..500 {
        let k = rng.random_range(2..=6usize);
        let inst = random_instance(&mut rng, k);
        let target = -math::ln(inst.forecast.clamped(inst.true_class));
        let mut record = |order: &[usize]| -> Result<()> {
            let regret = fixed_order_regret(&inst, order, haldane)?;
            worst_rel = worst_rel.max(math::abs(regret - target) / math::abs(target));
            checked_orders += 1;
            Ok(())
        };
        if k <= 4 {
            let mut failed = None;
            for_each_permutation(k, |order| {
                if failed.is_none() {
                    if let Err(e) = record(order) {
                        failed = Some(e);
                    }
                }
            });
            if let Some(e) = failed {
                return Err(e);
            }
        } else {
            for _ in 0..20 {
                let mut order: Vec<usize> = (0..k).collect();
                for i in (1..k).rev() {
                    order.swap(i, rng.random_range(0..=i));
                }
                record(&order)?;
            }
        }
    }
    results.push(CheckResult::new(
        "amnesia/fixed_order_invariance",
        worst_rel <= 1e-10,
        alloc::format!("max rel deviation from -ln p_true: {worst_rel:.2e} over {checked_orders} orders"),
    ));

    // Away from the Haldane weights the regret must depend on the order.
    let skewed = HaldaneParams::new(2.0, 1.0)?;
    let inst = LabeledForecast::new(Forecast::new(alloc::vec![0.5, 0.3, 0.2])?, 2)?;
    let truth_first = fixed_order_regret(&inst, &[2, 0, 1], skewed)?;
    let truth_last = fixed_order_regret(&inst, &[0, 1, 2], skewed)?;
    let spread = math::abs(truth_first - truth_last);
    results.push(CheckResult::new(
        "amnesia/knife_edge_spread",
        spread > 1e-3,
        alloc::format!("spread={spread:.6} between truth-first and truth-last at (a,b)=(2,1)"),
    ));

    let mut max_shift_dev = 0.0_f64;
    for _ in 0..10_000 {
        let k = rng.random_range(2..=6usize);
        let inst = random_instance(&mut rng, k);
        let dev = math::abs(parallel_decision_cost(&inst) - log_loss(&inst) - 1.0);
        max_shift_dev = max_shift_dev.max(dev);
    }
    results.push(CheckResult::new(
        "amnesia/parallel_shift_identity",
        max_shift_dev <= 1e-12,
        alloc::format!("max |parallel - logloss - 1| = {max_shift_dev:.2e}"),
    ));

    Ok(results)
}

/// Pathwise decomposition: per-draw deviation must be exactly zero for
/// continuous priors, and constructed ties must average the two orders.
pub fn suite_decomposition(opts: SuiteOptions) -> Result<Vec<CheckResult>> {
    let mut rng = sampling::stream_rng(opts.seed, 404);
    let mut results = Vec::new();
    let n = opts.mc_samples.max(1000);

    let base = BaseCosts::new(sampling::uniform_simplex(&mut rng, 4).iter().map(|p| p + 0.5).collect())?;
    let empirical_samples: Vec<RealizedCosts> = (0..5)
        .map(|_| {
            RealizedCosts::new(
                (0..4).map(|_| sampling::unit_uniform(&mut rng) + 0.1).collect(),
            )
        })
        .collect::<Result<_>>()?;
    let priors = [
        ("uniform01", CostPrior::uniform01(opts.seed ^ 1)),
        ("beta_2", CostPrior::beta(2.0, opts.seed ^ 2)),
        ("scaled_beta_0.5", CostPrior::scaled_beta(0.5, base, opts.seed ^ 3)),
        ("empirical", CostPrior::empirical(empirical_samples, opts.seed ^ 4)),
    ];
    for (name, prior) in priors {
        let inst = random_instance(&mut rng, 4);
        let report = pairwise_decomposition_check(&inst, &prior, n)?;
        let note = if matches!(prior.kind, crate::verify::CostPriorKind::Empirical { .. }) {
            " (empirical priors are proper but typically not strictly proper)"
        } else {
            ""
        };
        results.push(CheckResult::new(
            alloc::format!("decomposition/{name}"),
            report.max_abs_deviation == 0.0,
            alloc::format!(
                "max |direct - decomposed| = {:.1e} over {} draws, {} tied{note}",
                report.max_abs_deviation,
                report.n_samples,
                report.tie_draws
            ),
        ));
    }

    // Constructed exact tie: the decomposition charges half a cost, which
    // equals the average of the two tie orders.
    let inst = LabeledForecast::new(Forecast::new(alloc::vec![2.0 / 3.0, 1.0 / 3.0])?, 0)?;
    let tied = RealizedCosts::new(alloc::vec![2.0, 1.0])?;
    let prior = CostPrior::empirical(alloc::vec![tied], opts.seed ^ 5);
    let report = pairwise_decomposition_check(&inst, &prior, 1000)?;
    let passed = report.tie_draws == report.n_samples && report.mean_decomposed == 2.5;
    results.push(CheckResult::new(
        "decomposition/constructed_tie_averages_orders",
        passed,
        alloc::format!(
            "decomposed mean {:.3} vs tie-order average 2.5; simulator index rule pays {:.3}",
            report.mean_decomposed,
            report.mean_direct
        ),
    ));

    Ok(results)
}

/// Run one suite (or all of them) and collect the results in a fixed
/// order.
pub fn run_suite(suite: Suite, opts: SuiteOptions) -> Result<Vec<CheckResult>> {
    match suite {
        Suite::Oracle => suite_oracle(opts),
        Suite::Propriety => suite_propriety(opts),
        Suite::Gradient => suite_gradient(opts),
        Suite::Amnesia => suite_amnesia(opts),
        Suite::Decomposition => suite_decomposition(opts),
        Suite::All => {
            let mut all = suite_oracle(opts)?;
            all.extend(suite_propriety(opts)?);
            all.extend(suite_gradient(opts)?);
            all.extend(suite_amnesia(opts)?);
            all.extend(suite_decomposition(opts)?);
            Ok(all)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_visitor_covers_all_orders() {
        let mut seen = Vec::new();
        for_each_permutation(3, |p| seen.push(p.to_vec()));
        assert_eq!(seen.len(), 6);
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 6);
    }

    #[test]
    fn gradient_and_amnesia_suites_pass() {
        let opts = SuiteOptions { seed: 42, mc_samples: 2000 };
        for r in suite_gradient(opts).unwrap() {
            assert!(r.passed, "{}: {}", r.name, r.details);
        }
        for r in suite_amnesia(opts).unwrap() {
            assert!(r.passed, "{}: {}", r.name, r.details);
        }
    }

    #[test]
    fn decomposition_suite_passes() {
        let opts = SuiteOptions { seed: 42, mc_samples: 2000 };
        for r in suite_decomposition(opts).unwrap() {
            assert!(r.passed, "{}: {}", r.name, r.details);
        }
    }

    #[test]
    fn oracle_suite_passes_at_reduced_samples() {
        let opts = SuiteOptions { seed: 42, mc_samples: 20_000 };
        for r in suite_oracle(opts).unwrap() {
            assert!(r.passed, "{}: {}", r.name, r.details);
        }
    }

    #[test]
    fn propriety_suite_passes() {
        let opts = SuiteOptions { seed: 42, mc_samples: 1000 };
        for r in suite_propriety(opts).unwrap() {
            assert!(r.passed, "{}: {}", r.name, r.details);
        }
    }
}
