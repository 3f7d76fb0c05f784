//! The beauty-contest game itself: parameters, information structure, signal
//! draws and realized utilities.
//!
//! Expectations throughout the crate are conditional on a fixed true state
//! `s`. With an improper flat prior on the state, an agent who has seen the
//! public signal holds the same Gaussian belief as one who started from a
//! `N(y, sigma2_y)` prior, so fixing `s` and drawing signals around it is
//! equivalent to the flat-prior formulation.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Size of the player population.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Population {
    /// `n` players; each player's action moves the average by `1/n`.
    Finite(u32),
    /// A unit-interval continuum of players.
    Continuum,
}

impl Population {
    pub fn players(&self) -> Option<u32> {
        match self {
            Population::Finite(n) => Some(*n),
            Population::Continuum => None,
        }
    }

    pub fn is_continuum(&self) -> bool {
        matches!(self, Population::Continuum)
    }
}

/// Validated game parameterization.
///
/// `alpha` weighs guessing the state against coordinating with the average
/// action; `beta` is the relative value the players put on obfuscation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GameParams {
    alpha: f64,
    beta: f64,
    population: Population,
    sigma2_x: f64,
    sigma2_y: f64,
}

impl GameParams {
    pub fn new(
        alpha: f64,
        beta: f64,
        population: Population,
        sigma2_x: f64,
        sigma2_y: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(invalid("alpha", format!("{alpha} is outside [0, 1]")));
        }
        if !(0.0..1.0).contains(&beta) {
            return Err(invalid(
                "beta",
                format!("{beta} is outside [0, 1); beta = 1 prescribes unbounded noise"),
            ));
        }
        if let Population::Finite(n) = population {
            if n < 2 {
                return Err(invalid("n", format!("{n} players; at least 2 are required")));
            }
        }
        for (name, v) in [("sigma2_x", sigma2_x), ("sigma2_y", sigma2_y)] {
            // 1/v must stay a finite positive precision.
            if !(v.is_finite() && v > 0.0 && (1.0 / v).is_finite()) {
                return Err(invalid(name, format!("{v} is not a finite positive variance")));
            }
        }
        Ok(Self {
            alpha,
            beta,
            population,
            sigma2_x,
            sigma2_y,
        })
    }

    /// Continuum game with `beta = 0`.
    pub fn continuum(alpha: f64, sigma2_x: f64, sigma2_y: f64) -> Result<Self> {
        Self::new(alpha, 0.0, Population::Continuum, sigma2_x, sigma2_y)
    }

    /// Finite game with `beta = 0`.
    pub fn finite(n: u32, alpha: f64, sigma2_x: f64, sigma2_y: f64) -> Result<Self> {
        Self::new(alpha, 0.0, Population::Finite(n), sigma2_x, sigma2_y)
    }

    pub fn with_beta(self, beta: f64) -> Result<Self> {
        Self::new(self.alpha, beta, self.population, self.sigma2_x, self.sigma2_y)
    }

    pub fn with_alpha(self, alpha: f64) -> Result<Self> {
        Self::new(alpha, self.beta, self.population, self.sigma2_x, self.sigma2_y)
    }

    pub fn with_population(self, population: Population) -> Result<Self> {
        Self::new(self.alpha, self.beta, population, self.sigma2_x, self.sigma2_y)
    }

    pub fn with_variances(self, sigma2_x: f64, sigma2_y: f64) -> Result<Self> {
        Self::new(self.alpha, self.beta, self.population, sigma2_x, sigma2_y)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn population(&self) -> Population {
        self.population
    }

    pub fn sigma2_x(&self) -> f64 {
        self.sigma2_x
    }

    pub fn sigma2_y(&self) -> f64 {
        self.sigma2_y
    }

    /// Precision of a private signal.
    pub fn tau_x(&self) -> f64 {
        1.0 / self.sigma2_x
    }

    /// Precision of the public signal.
    pub fn tau_y(&self) -> f64 {
        1.0 / self.sigma2_y
    }
}

/// One realized world: the state, the public signal and a vector of private
/// signals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignalDraw {
    pub s: f64,
    pub y: f64,
    pub x: Vec<f64>,
}

impl SignalDraw {
    /// Draws `y = s + e_y` and `count` private signals `x_i = s + e_i`.
    pub fn generate<R: Rng + ?Sized>(
        params: &GameParams,
        s: f64,
        count: usize,
        rng: &mut R,
    ) -> Self {
        let sd_x = params.sigma2_x().sqrt();
        let sd_y = params.sigma2_y().sqrt();
        let y = s + sd_y * rng.sample::<f64, _>(StandardNormal);
        let x = (0..count)
            .map(|_| s + sd_x * rng.sample::<f64, _>(StandardNormal))
            .collect();
        Self { s, y, x }
    }

    pub fn information_set(&self, agent: usize, params: GameParams) -> InformationSet {
        InformationSet {
            x_i: self.x[agent],
            y: self.y,
            params,
        }
    }
}

/// What a single agent knows: its own private signal and the public signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InformationSet {
    pub x_i: f64,
    pub y: f64,
    pub params: GameParams,
}

/// Realized actions with their cached average.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActionProfile {
    actions: Vec<f64>,
    mean_action: f64,
}

impl ActionProfile {
    /// Finite profile; the average includes every listed action.
    pub fn new(actions: Vec<f64>) -> Self {
        let mean_action = if actions.is_empty() {
            f64::NAN
        } else {
            actions.iter().sum::<f64>() / actions.len() as f64
        };
        Self {
            actions,
            mean_action,
        }
    }

    /// Continuum profile: the average action is supplied rather than computed.
    pub fn with_mean(actions: Vec<f64>, mean_action: f64) -> Self {
        Self {
            actions,
            mean_action,
        }
    }

    pub fn actions(&self) -> &[f64] {
        &self.actions
    }

    pub fn mean_action(&self) -> f64 {
        self.mean_action
    }
}

/// Posterior mean of the state given `x_i` and `y`; also agent i's
/// expectation of any other agent's private signal.
pub fn posterior_state_mean(info: &InformationSet) -> f64 {
    let tx = info.params.tau_x();
    let ty = info.params.tau_y();
    (tx * info.x_i + ty * info.y) / (tx + ty)
}

/// `-(1 - alpha)(theta_i - mean)^2 - alpha (theta_i - s)^2`.
pub fn realized_base_utility(theta_i: f64, profile: &ActionProfile, s: f64, params: &GameParams) -> f64 {
    base_utility(theta_i, profile.mean_action(), s, params.alpha())
}

pub(crate) fn base_utility(theta_i: f64, mean_action: f64, s: f64, alpha: f64) -> f64 {
    let coord = theta_i - mean_action;
    let guess = theta_i - s;
    -(1.0 - alpha) * coord * coord - alpha * guess * guess
}

/// `(1 - beta) u + beta rho`. With `beta = 0` the privacy term is dropped
/// entirely, so an infinite `rho` cannot leak in as `0 * inf`.
pub fn realized_privacy_utility(base_u: f64, rho: f64, params: &GameParams) -> f64 {
    let beta = params.beta();
    if beta == 0.0 {
        base_u
    } else {
        (1.0 - beta) * base_u + beta * rho
    }
}
