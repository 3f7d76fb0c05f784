//! Closed-form symmetric linear equilibria of the base and privacy-aware
//! games.
//!
//! In equilibrium every player acts `kappa x_i + (1 - kappa) y + eta_i`,
//! where `eta_i` is mean-zero noise of variance `nu*` (absent in the base
//! game). The weight `kappa` is the same with and without privacy concerns.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::game::{GameParams, Population};
use crate::inference::PrivacyMeasure;
use crate::noise::{NoiseFamily, NoiseSpec};

/// Symmetric linear (noisy) strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrategyProfile {
    kappa: f64,
    noise: Option<NoiseSpec>,
}

impl StrategyProfile {
    pub fn new(kappa: f64, noise: Option<NoiseSpec>) -> Result<Self> {
        if !(0.0..=1.0).contains(&kappa) {
            return Err(invalid("kappa", format!("{kappa} is outside [0, 1]")));
        }
        Ok(Self { kappa, noise })
    }

    pub fn deterministic(kappa: f64) -> Result<Self> {
        Self::new(kappa, None)
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn noise(&self) -> Option<&NoiseSpec> {
        self.noise.as_ref()
    }

    /// Variance of the added noise, zero for deterministic play.
    pub fn nu(&self) -> f64 {
        self.noise.map_or(0.0, |n| n.variance())
    }
}

/// Which closed form to use for the optimal noise variance.
///
/// `Paper` keeps the original closed forms. `Consistent` is the maximizer of
/// `-(1 - beta) c nu + beta rho(nu)`, the objective those values are derived
/// from. The two agree only for the precision measure in the continuum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaSet {
    Paper,
    #[default]
    Consistent,
}

impl FormulaSet {
    pub fn name(&self) -> &'static str {
        match self {
            FormulaSet::Paper => "paper",
            FormulaSet::Consistent => "consistent",
        }
    }
}

/// Parameter a comparative static differentiates with respect to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sensitivity {
    Sigma2X,
    Sigma2Y,
    N,
}

fn require_finite(params: &GameParams) -> Result<f64> {
    params
        .population()
        .players()
        .map(f64::from)
        .ok_or_else(|| invalid("population", "operation needs a finite population"))
}

/// Equilibrium weight on the private signal with `n` players.
pub fn kappa_finite(params: &GameParams) -> Result<f64> {
    let n = require_finite(params)?;
    let a = params.alpha();
    let num = a * n * n * params.tau_x();
    let den = num + ((n - 1.0).powi(2) + a * (2.0 * n - 1.0)) * params.tau_y();
    Ok(num / den)
}

/// Equilibrium weight with a continuum of players, `alpha tau_x / (alpha tau_x + tau_y)`.
/// The population field of `params` is ignored.
pub fn kappa_infinite(params: &GameParams) -> f64 {
    let num = params.alpha() * params.tau_x();
    num / (num + params.tau_y())
}

pub fn equilibrium_kappa(params: &GameParams) -> f64 {
    match params.population() {
        Population::Finite(_) => kappa_finite(params).expect("finite population"),
        Population::Continuum => kappa_infinite(params),
    }
}

/// Expected base-game utility of the profile `kappa` given `s`, finite game.
pub fn expected_utility_finite(params: &GameParams, kappa: f64) -> Result<f64> {
    let n = require_finite(params)?;
    let a = params.alpha();
    let (sx, sy) = (params.sigma2_x(), params.sigma2_y());
    let k2 = kappa * kappa;
    Ok(-a * (k2 * sx + (1.0 - kappa).powi(2) * sy) - (1.0 - a) * k2 * (n - 1.0) / n * sx)
}

/// Expected base-game utility of the profile `kappa` given `s`, continuum game.
pub fn expected_utility_infinite(params: &GameParams, kappa: f64) -> f64 {
    -params.alpha() * (1.0 - kappa).powi(2) * params.sigma2_y() - kappa * kappa * params.sigma2_x()
}

pub fn expected_utility(params: &GameParams, kappa: f64) -> f64 {
    match params.population() {
        Population::Finite(_) => expected_utility_finite(params, kappa).expect("finite population"),
        Population::Continuum => expected_utility_infinite(params, kappa),
    }
}

/// Residual of the first-order condition on an agent's action.
///
/// For a finite game `e_others` is the agent's expectation of the *sum* of
/// the other actions; for the continuum it is the expectation of the
/// average action.
pub fn foc_residual(theta_i: f64, e_state: f64, e_others: f64, params: &GameParams) -> f64 {
    let a = params.alpha();
    match params.population() {
        Population::Finite(n) => {
            let n = f64::from(n);
            let den = a * (2.0 * n - 1.0) + (n - 1.0).powi(2);
            theta_i - (a * n * n * e_state + (1.0 - a) * (n - 1.0) * e_others) / den
        }
        Population::Continuum => theta_i - (a * e_state + (1.0 - a) * e_others),
    }
}

/// Coefficient of the own-noise variance penalty,
/// `alpha + (1 - alpha)(1 - 1/n)^2`, or 1 in the continuum.
pub fn penalty_coefficient(params: &GameParams) -> f64 {
    match params.population() {
        Population::Finite(n) => {
            let a = params.alpha();
            a + (1.0 - a) * (1.0 - 1.0 / f64::from(n)).powi(2)
        }
        Population::Continuum => 1.0,
    }
}

/// Optimal variance of the added noise.
pub fn optimal_noise_variance(params: &GameParams, measure: PrivacyMeasure, formulas: FormulaSet) -> f64 {
    let beta = params.beta();
    if beta == 0.0 {
        return 0.0;
    }
    let odds = beta / (1.0 - beta);
    let c = penalty_coefficient(params);
    match (formulas, measure) {
        (FormulaSet::Paper, PrivacyMeasure::Precision) => (odds * c).sqrt(),
        (FormulaSet::Paper, PrivacyMeasure::Entropy) => odds * c,
        (FormulaSet::Consistent, PrivacyMeasure::Precision) => (odds / c).sqrt(),
        (FormulaSet::Consistent, PrivacyMeasure::Entropy) => odds / (2.0 * c),
    }
}

/// The symmetric (noisy) linear equilibrium profile. The entropy measure
/// forces Gaussian noise; under the precision measure any family of the
/// right variance works and `family` picks one.
pub fn solve(
    params: &GameParams,
    measure: PrivacyMeasure,
    formulas: FormulaSet,
    family: NoiseFamily,
) -> Result<StrategyProfile> {
    let kappa = equilibrium_kappa(params);
    let nu = optimal_noise_variance(params, measure, formulas);
    let family = match measure {
        PrivacyMeasure::Entropy => NoiseFamily::Gaussian,
        PrivacyMeasure::Precision => family,
    };
    let noise = if nu > 0.0 {
        Some(NoiseSpec::new(family, nu)?)
    } else {
        None
    };
    StrategyProfile::new(kappa, noise)
}

/// Partial derivative of the expected utility, with the continuum weight
/// `kappa = alpha sigma2_y / (alpha sigma2_y + sigma2_x)` substituted into the
/// finite-game utility.
///
/// For `Sigma2X` the `Paper` form is the original expression, which does
/// not equal the derivative of that composite; `Consistent` is the exact
/// derivative. The other two derivatives have a single form.
pub fn comparative_static(params: &GameParams, wrt: Sensitivity, formulas: FormulaSet) -> Result<f64> {
    let n = require_finite(params)?;
    let a = params.alpha();
    let (x, y) = (params.sigma2_x(), params.sigma2_y());
    let d = a * y + x;
    let share = (n - 1.0) / n;
    Ok(match wrt {
        Sensitivity::Sigma2X => match formulas {
            FormulaSet::Paper => {
                -(a * y).powi(2) / d.powi(3)
                    * ((2.0 - a) * a * a * x * y + y - share * (1.0 - a) * (a * y - x))
            }
            FormulaSet::Consistent => {
                -(a * y).powi(2) / d.powi(3) * (x * (n + 1.0 - a) + a * y * (n + a - 1.0)) / n
            }
        },
        Sensitivity::Sigma2Y => {
            -a * x * x / d.powi(3) * (2.0 * a * a * y - a * y + x + share * 2.0 * a * (1.0 - a) * y)
        }
        Sensitivity::N => -(1.0 - a) * a * a * x * y * y / (n * n * d * d),
    })
}
