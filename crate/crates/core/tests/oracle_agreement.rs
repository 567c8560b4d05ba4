//! Monte Carlo oracle agreement with the closed-form expected costs.
//!
//! These are the heavy seeded checks: the simulator-driven estimate under
//! each cost prior must sit within three standard errors of the closed
//! form, at a million draws per comparison.

use pandora_core::sampling;
use pandora_core::scoring::{raw_expected_cost, Alpha, BaseCosts, Forecast, LabeledForecast};
use pandora_core::verify::{mc_expected_cost, pairwise_decomposition_check, CostPrior};
use rand::Rng;

fn random_instance(rng: &mut impl Rng, k: usize) -> LabeledForecast {
    let probs = sampling::uniform_simplex(rng, k);
    let truth = rng.random_range(0..k);
    LabeledForecast::new(Forecast::new(probs).unwrap(), truth).unwrap()
}

#[test]
fn beta_and_scaled_priors_match_closed_form_at_one_million_draws() {
    const N: u64 = 1_000_000;
    let mut rng = sampling::seeded_rng(20_240_601);
    let non_unit = BaseCosts::new(vec![2.0, 0.6, 1.4]).unwrap();
    let mut checked = 0;
    for &alpha in &[0.5f64, 1.0, 2.0, 5.0] {
        for unit_costs in [true, false] {
            for case in 0..20u64 {
                let lf = random_instance(&mut rng, 3);
                let seed = 1000 * case + alpha.to_bits() % 997;
                let (prior, costs) = if unit_costs {
                    (CostPrior::beta(alpha, seed), BaseCosts::unit(3))
                } else {
                    (CostPrior::scaled_beta(alpha, non_unit.clone(), seed), non_unit.clone())
                };
                let est = mc_expected_cost(&lf, &prior, N).unwrap();
                let closed = raw_expected_cost(&lf, Alpha::Finite(alpha), &costs).unwrap();
                assert!(
                    (est.mean - closed).abs() <= 3.0 * est.std_error,
                    "alpha={alpha} unit={unit_costs} case={case}: mc={} closed={closed} se={}",
                    est.mean,
                    est.std_error
                );
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 160);
}

#[test]
fn uniform_prior_means_match_alpha_one_closed_form() {
    // Empirical mean of simulated totals vs the alpha = 1 closed form,
    // 200 random instances at 1e5 uniform draws each.
    let mut rng = sampling::seeded_rng(55);
    for case in 0..200u64 {
        let k = rng.random_range(2..=5usize);
        let lf = random_instance(&mut rng, k);
        let prior = CostPrior::uniform01(case);
        let est = mc_expected_cost(&lf, &prior, 100_000).unwrap();
        let closed = raw_expected_cost(&lf, Alpha::Finite(1.0), &BaseCosts::unit(k)).unwrap();
        assert!(
            (est.mean - closed).abs() <= 3.0 * est.std_error,
            "case={case} k={k}: mc={} closed={closed} se={}",
            est.mean,
            est.std_error
        );
    }
}

#[test]
fn mc_estimates_are_bit_reproducible() {
    let lf = LabeledForecast::new(Forecast::new(vec![0.15, 0.25, 0.6]).unwrap(), 1).unwrap();
    for prior in [
        CostPrior::uniform01(31),
        CostPrior::beta(0.7, 31),
        CostPrior::scaled_beta(3.0, BaseCosts::new(vec![5.0, 1.0, 2.5]).unwrap(), 31),
    ] {
        let a = mc_expected_cost(&lf, &prior, 50_000).unwrap();
        let b = mc_expected_cost(&lf, &prior, 50_000).unwrap();
        assert_eq!(a, b);
        assert!(a.mean.to_bits() == b.mean.to_bits());
        assert!(a.std_error.to_bits() == b.std_error.to_bits());
    }
}

#[test]
fn decomposition_deviation_is_zero_across_priors_and_instances() {
    let mut rng = sampling::seeded_rng(77);
    for case in 0..50u64 {
        let k = rng.random_range(2..=6usize);
        let lf = random_instance(&mut rng, k);
        let prior = if case % 2 == 0 {
            CostPrior::uniform01(case)
        } else {
            CostPrior::beta(1.5, case)
        };
        let report = pairwise_decomposition_check(&lf, &prior, 100_000).unwrap();
        assert_eq!(report.max_abs_deviation, 0.0, "case {case}");
        assert_eq!(report.mean_deviation, 0.0);
        assert_eq!(report.tie_draws, 0);
    }
}
