//! Simulated expectations against the closed forms.

use kbc_core::oracle::deviator_expected_utility;
use kbc_core::{
    equilibrium_kappa, expected_utility, observer_posterior, optimal_noise_variance, pop_agents,
    pop_agents_with_common_noise, pop_aggregator_at, run_monte_carlo, solve, FormulaSet,
    GameParams, MonteCarloSettings, NoiseFamily, NoiseSpec, Population, PrivacyMeasure,
    StrategyProfile,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn settings(s: f64, replicates: u64, seed: u64) -> MonteCarloSettings {
    MonteCarloSettings::new(s, replicates, seed, PrivacyMeasure::Precision)
}

#[test]
fn expected_utility_matches_simulation() {
    let configs = [
        (GameParams::finite(2, 0.5, 1.0, 1.0).unwrap(), 4.0 / 9.0, 0.0),
        (GameParams::finite(5, 0.3, 2.0, 0.5).unwrap(), 0.6, 1.0),
        (GameParams::continuum(0.5, 1.0, 1.0).unwrap(), 1.0 / 3.0, -2.0),
        (GameParams::continuum(0.8, 0.5, 3.0).unwrap(), 0.1, 0.0),
    ];
    for (i, (p, kappa, s)) in configs.into_iter().enumerate() {
        let profile = StrategyProfile::deterministic(kappa).unwrap();
        let r = run_monte_carlo(&p, &profile, &settings(s, 200_000, 100 + i as u64)).unwrap();
        let exact = expected_utility(&p, kappa);
        assert!(r.base_utility().covers(exact, 3.0), "{p:?}: {:?} vs {exact}", r.base_utility());
    }
    let p = GameParams::finite(2, 0.5, 1.0, 1.0).unwrap();
    assert!((expected_utility(&p, 4.0 / 9.0) + 0.302469).abs() < 1e-6);
}

#[test]
fn noisy_utility_matches_closed_form_for_every_family() {
    let p = GameParams::finite(4, 0.4, 1.0, 2.0).unwrap();
    let families = [NoiseFamily::Gaussian, NoiseFamily::Uniform, NoiseFamily::TwoPoint { high: 2.0, prob_high: 0.2 }];
    for (i, family) in families.into_iter().enumerate() {
        let profile = StrategyProfile::new(0.35, Some(NoiseSpec::new(family, 0.9).unwrap())).unwrap();
        let r = run_monte_carlo(&p, &profile, &settings(0.0, 200_000, 7 + i as u64)).unwrap();
        let exact = deviator_expected_utility(&p, 0.35, 0.9, 0.35, 0.9, 0.0);
        assert!(r.base_utility().covers(exact, 3.0), "{family:?}");
        assert!(r.action().covers(0.0, 3.0), "{family:?}");
    }
}

#[test]
fn separability_holds_in_simulation() {
    for population in [Population::Finite(3), Population::Continuum] {
        for beta in [0.25, 0.5, 0.9] {
            let p = GameParams::new(0.6, beta, population, 1.0, 1.5).unwrap();
            let profile = solve(&p, PrivacyMeasure::Precision, FormulaSet::Consistent, NoiseFamily::Gaussian).unwrap();
            let r = run_monte_carlo(&p, &profile, &settings(0.0, 100_000, 3)).unwrap();
            assert!(r.separability_gap().covers(0.0, 3.0), "{population:?} beta={beta}: {:?}", r.separability_gap());
        }
    }
}

#[test]
fn prices_of_privacy_match_simulated_ratios() {
    let m = PrivacyMeasure::Precision;
    let f = FormulaSet::Consistent;
    // Continuum, or alpha = 1: own noise is the only cost.
    for p in [
        GameParams::continuum(1.0, 1.0, 1.0).unwrap().with_beta(0.5).unwrap(),
        GameParams::continuum(0.4, 2.0, 1.0).unwrap().with_beta(0.7).unwrap(),
        GameParams::finite(3, 1.0, 1.0, 0.5).unwrap().with_beta(0.3).unwrap(),
    ] {
        let profile = solve(&p, m, f, NoiseFamily::Gaussian).unwrap();
        let r = run_monte_carlo(&p, &profile, &settings(0.0, 200_000, 21)).unwrap();
        assert!(r.agents_utility_ratio.covers(pop_agents(&p, m, f), 3.0), "{p:?}: {:?}", r.agents_utility_ratio);
    }
    // Finite game with coordination: the others' noise adds to the cost.
    let p = GameParams::finite(4, 0.5, 1.0, 1.0).unwrap().with_beta(0.5).unwrap();
    let profile = solve(&p, m, f, NoiseFamily::Gaussian).unwrap();
    let r = run_monte_carlo(&p, &profile, &settings(0.0, 200_000, 22)).unwrap();
    assert!(r.agents_utility_ratio.covers(pop_agents_with_common_noise(&p, m, f), 3.0));
    assert!(!r.agents_utility_ratio.covers(pop_agents(&p, m, f), 3.0));

    let nu = optimal_noise_variance(&p, m, f);
    let agg = pop_aggregator_at(&p, equilibrium_kappa(&p), nu, 4).unwrap();
    assert!(r.aggregator_error_ratio.covers(agg, 3.0));
}

#[test]
fn gaussian_posterior_is_calibrated() {
    // The posterior variance is the mean squared error of the posterior mean.
    let p = GameParams::continuum(0.5, 1.5, 1.0).unwrap();
    let (kappa, nu, s) = (0.4, 0.6, 0.2);
    let noise = NoiseSpec::gaussian(nu).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 100_000;
    let (mut se, mut var) = (0.0, 0.0);
    let mut sq = Vec::with_capacity(n);
    for _ in 0..n {
        let y = s + rng.sample::<f64, _>(StandardNormal);
        let x = s + 1.5f64.sqrt() * rng.sample::<f64, _>(StandardNormal);
        let theta = kappa * x + (1.0 - kappa) * y + nu.sqrt() * rng.sample::<f64, _>(StandardNormal);
        let b = observer_posterior(theta, y, kappa, &noise, s, &p).unwrap();
        let e = (x - b.mean).powi(2);
        se += e;
        var = b.variance;
        sq.push(e);
    }
    let mean = se / n as f64;
    let sd = (sq.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
    assert!((mean - var).abs() < 3.0 * sd / (n as f64).sqrt(), "{mean} vs {var}");
}
