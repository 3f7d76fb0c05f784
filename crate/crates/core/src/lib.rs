//! Numerical lab for a Keynesian beauty contest with privacy-seeking agents.
//!
//! Agents see a private and a public Gaussian signal of a state `s` and pick
//! an action balancing closeness to `s` against closeness to the average
//! action. With `beta > 0` they also value how poorly an observer can recover
//! their private signal from the action, and may add noise to it.

pub mod equilibrium;
pub mod error;
pub mod game;
pub mod inference;
pub mod noise;
pub mod oracle;
pub mod pop;
pub mod real;
pub mod rng;
pub mod search;
pub mod simulate;

pub use equilibrium::{
    comparative_static, equilibrium_kappa, expected_utility, expected_utility_finite,
    expected_utility_infinite, foc_residual, kappa_finite, kappa_infinite, optimal_noise_variance,
    penalty_coefficient, solve, FormulaSet, Sensitivity, StrategyProfile,
};
pub use error::{Error, Result};
pub use game::{
    posterior_state_mean, realized_base_utility, realized_privacy_utility, ActionProfile,
    GameParams, InformationSet, Population, SignalDraw,
};
pub use inference::{
    invert_action, observer_posterior, observer_posterior_numeric, rho, rho_for_noise,
    rho_simplified, Belief, PrivacyMeasure, Representation,
};
pub use noise::{Entropy, EntropyScale, NoiseFamily, NoiseSpec};
pub use simulate::{
    estimate_aggregator_error, run_monte_carlo, Estimate, MonteCarloReport, MonteCarloSettings,
    StandardErrors,
};
pub use oracle::{
    best_response_action, best_response_kappa, best_response_variance, certify_equilibrium,
    deviation_gain, deviator_expected_utility, fixed_point_kappa, Certificate,
    CertificationSettings, Deviation, EvaluatedDeviation, Gain, GainMethod,
};
pub use pop::{
    aggregator_utility, pop_agents, pop_agents_at, pop_agents_with_common_noise, pop_aggregator,
    pop_aggregator_at,
};
