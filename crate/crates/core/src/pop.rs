//! Price of privacy: how much worse off agents and the aggregator are in the
//! noisy equilibrium than in the noiseless one.

use crate::equilibrium::{equilibrium_kappa, expected_utility, optimal_noise_variance, FormulaSet};
use crate::error::{invalid, Result};
use crate::game::{GameParams, Population};
use crate::inference::PrivacyMeasure;

/// Agents' price of privacy, `1 + nu* / |E[u]|`, with `E[u]` the noiseless
/// equilibrium utility. Infinite for `alpha = 0` and `beta > 0`, where the
/// noiseless equilibrium loses nothing.
pub fn pop_agents(params: &GameParams, measure: PrivacyMeasure, formulas: FormulaSet) -> f64 {
    if params.beta() == 0.0 {
        return 1.0;
    }
    let nu = optimal_noise_variance(params, measure, formulas);
    pop_agents_at(params, equilibrium_kappa(params), nu)
}

/// `1 + nu / |E[u(kappa)]|` for an arbitrary weight and noise variance.
pub fn pop_agents_at(params: &GameParams, kappa: f64, nu: f64) -> f64 {
    if nu == 0.0 {
        return 1.0;
    }
    1.0 + nu / expected_utility(params, kappa).abs()
}

/// Ratio of the noisy to the noiseless equilibrium utility when every agent
/// adds noise. In a finite game the others' noise also moves the average
/// action, which costs `(1 - alpha)(n - 1) nu / n` in total instead of the
/// `nu` of `pop_agents`; the two agree when `alpha = 1` and in the
/// continuum.
pub fn pop_agents_with_common_noise(params: &GameParams, measure: PrivacyMeasure, formulas: FormulaSet) -> f64 {
    if params.beta() == 0.0 {
        return 1.0;
    }
    let nu = optimal_noise_variance(params, measure, formulas);
    let a = params.alpha();
    let weight = match params.population() {
        Population::Finite(n) => {
            let n = f64::from(n);
            a + (1.0 - a) * (n - 1.0) / n
        }
        Population::Continuum => 1.0,
    };
    1.0 + weight * nu / expected_utility(params, equilibrium_kappa(params)).abs()
}

/// Mean squared error of the average of `n_obs` actions about `s`:
/// `kappa^2 sigma2_x / n + nu / n + (1 - kappa)^2 sigma2_y`.
pub fn aggregator_utility(params: &GameParams, kappa: f64, nu: f64, n_obs: u64) -> Result<f64> {
    if n_obs == 0 {
        return Err(invalid("n_obs", "the aggregator must observe at least one agent"));
    }
    let n = n_obs as f64;
    Ok(kappa * kappa * params.sigma2_x() / n + nu / n + (1.0 - kappa).powi(2) * params.sigma2_y())
}

/// Aggregator's price of privacy for an arbitrary weight and noise
/// variance: `1 + nu / (kappa^2 sigma2_x + n (1 - kappa)^2 sigma2_y)`.
pub fn pop_aggregator_at(params: &GameParams, kappa: f64, nu: f64, n_obs: u64) -> Result<f64> {
    if n_obs == 0 {
        return Err(invalid("n_obs", "the aggregator must observe at least one agent"));
    }
    if nu == 0.0 {
        return Ok(1.0);
    }
    let n = n_obs as f64;
    Ok(1.0 + nu / (kappa * kappa * params.sigma2_x() + n * (1.0 - kappa).powi(2) * params.sigma2_y()))
}

/// Aggregator's price of privacy at the equilibrium weight and variance.
pub fn pop_aggregator(params: &GameParams, measure: PrivacyMeasure, formulas: FormulaSet, n_obs: u64) -> Result<f64> {
    let nu = optimal_noise_variance(params, measure, formulas);
    pop_aggregator_at(params, equilibrium_kappa(params), nu, n_obs)
}
