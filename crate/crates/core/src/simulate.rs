//! Seeded Monte Carlo estimates of expected utilities, the separability
//! identity and the aggregator's squared error.
//!
//! Replicates are grouped in fixed-size blocks. Each block is accumulated
//! sequentially, blocks run in parallel, and block totals are merged by a
//! fixed pairwise tree, so results are bitwise identical for any number of
//! worker threads.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::equilibrium::{penalty_coefficient, StrategyProfile};
use crate::error::{invalid, Result};
use crate::game::{base_utility, realized_privacy_utility, GameParams, Population};
use crate::inference::{rho_for_noise, PrivacyMeasure};
use crate::noise::NoiseSpec;
use crate::rng::replicate_rng;

const BLOCK: u64 = 1024;

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    #[serde(serialize_with = "crate::real::serialize")]
    pub mean: f64,
    #[serde(serialize_with = "crate::real::serialize")]
    pub se: f64,
}

impl Estimate {
    /// Whether `target` lies within `k` standard errors.
    pub fn covers(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.se
    }
}

/// Running sums and cross-products of `K` per-replicate statistics.
#[derive(Debug, Clone)]
pub(crate) struct Moments<const K: usize> {
    count: u64,
    sum: [f64; K],
    cross: [[f64; K]; K],
}

impl<const K: usize> Moments<K> {
    fn new() -> Self {
        Self {
            count: 0,
            sum: [0.0; K],
            cross: [[0.0; K]; K],
        }
    }

    fn push(&mut self, v: &[f64; K]) {
        self.count += 1;
        for i in 0..K {
            self.sum[i] += v[i];
            for j in i..K {
                self.cross[i][j] += v[i] * v[j];
            }
        }
    }

    fn merge(mut self, other: &Self) -> Self {
        self.count += other.count;
        for i in 0..K {
            self.sum[i] += other.sum[i];
            for j in i..K {
                self.cross[i][j] += other.cross[i][j];
            }
        }
        self
    }

    pub(crate) fn count(&self) -> u64 {
        self.count
    }

    pub(crate) fn mean(&self, i: usize) -> f64 {
        self.sum[i] / self.count as f64
    }

    /// Sample covariance (denominator `N - 1`).
    pub(crate) fn cov(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let n = self.count as f64;
        if self.count < 2 {
            return f64::NAN;
        }
        let c = (self.cross[i][j] - self.sum[i] * self.sum[j] / n) / (n - 1.0);
        if i == j {
            c.max(0.0)
        } else {
            c
        }
    }

    pub(crate) fn estimate(&self, i: usize) -> Estimate {
        Estimate {
            mean: self.mean(i),
            se: (self.cov(i, i) / self.count as f64).sqrt(),
        }
    }

    /// `mean(a) / mean(b)` with a delta-method standard error.
    pub(crate) fn ratio(&self, a: usize, b: usize) -> Estimate {
        let (ma, mb) = (self.mean(a), self.mean(b));
        let r = ma / mb;
        let var = self.cov(a, a) - 2.0 * r * self.cov(a, b) + r * r * self.cov(b, b);
        Estimate {
            mean: r,
            se: (var.max(0.0) / self.count as f64).sqrt() / mb.abs(),
        }
    }
}

fn merge_pairwise<const K: usize>(parts: &[Moments<K>]) -> Moments<K> {
    match parts.len() {
        0 => Moments::new(),
        1 => parts[0].clone(),
        len => {
            let (l, r) = parts.split_at(len / 2);
            merge_pairwise(l).merge(&merge_pairwise(r))
        }
    }
}

/// Runs `kernel` once per replicate on that replicate's own stream and
/// accumulates the returned statistics.
pub(crate) fn run_blocks<const K: usize, F>(replicates: u64, seed: u64, kernel: F) -> Moments<K>
where
    F: Fn(&mut ChaCha8Rng, &mut Scratch) -> [f64; K] + Sync,
{
    let blocks = replicates.div_ceil(BLOCK);
    let parts: Vec<Moments<K>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut m = Moments::new();
            let mut scratch = Scratch::default();
            for r in b * BLOCK..((b + 1) * BLOCK).min(replicates) {
                let mut rng = replicate_rng(seed, r);
                m.push(&kernel(&mut rng, &mut scratch));
            }
            m
        })
        .collect();
    merge_pairwise(&parts)
}

#[derive(Default)]
pub(crate) struct Scratch {
    pub theta: Vec<f64>,
    pub eta: Vec<f64>,
}

pub(crate) fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub(crate) fn draw_noise<R: Rng + ?Sized>(noise: Option<&NoiseSpec>, rng: &mut R) -> f64 {
    noise.map_or(0.0, |n| n.draw(rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloSettings {
    /// True state the draws are conditioned on.
    pub s: f64,
    pub replicates: u64,
    pub seed: u64,
    pub measure: PrivacyMeasure,
    /// Number of agents the aggregator samples in the continuum game. The
    /// finite-game aggregator always observes all `n` agents.
    pub aggregator_sample: usize,
}

impl MonteCarloSettings {
    pub fn new(s: f64, replicates: u64, seed: u64, measure: PrivacyMeasure) -> Self {
        Self {
            s,
            replicates,
            seed,
            measure,
            aggregator_sample: 100,
        }
    }

    pub fn with_aggregator_sample(mut self, n_obs: usize) -> Self {
        self.aggregator_sample = n_obs;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StandardErrors {
    pub base_utility: f64,
    pub noiseless_utility: f64,
    pub own_clean_utility: f64,
    #[serde(serialize_with = "crate::real::serialize")]
    pub privacy_utility: f64,
    pub aggregator_sq_error: f64,
    pub noiseless_aggregator_sq_error: f64,
    pub action: f64,
    pub separability_gap: f64,
}

/// Monte Carlo summary of one strategy profile.
///
/// Utilities are per-agent averages within a replicate (finite game) or the
/// representative agent's (continuum), so each replicate contributes one
/// independent observation of every statistic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloReport {
    pub replicates: u64,
    pub seed: u64,
    pub s: f64,
    /// Privacy term used in `mean_privacy_utility`.
    #[serde(serialize_with = "crate::real::serialize")]
    pub rho: f64,
    /// Base-game utility of the played (noisy) profile.
    pub mean_base_utility: f64,
    /// Base-game utility had nobody added noise, on the same draws.
    pub mean_noiseless_utility: f64,
    /// Base-game utility of the agent's noiseless action against the others'
    /// noisy actions.
    pub mean_own_clean_utility: f64,
    /// `(1 - beta) u + beta rho` of the played profile.
    #[serde(serialize_with = "crate::real::serialize")]
    pub mean_privacy_utility: f64,
    pub mean_aggregator_sq_error: f64,
    pub mean_noiseless_aggregator_sq_error: f64,
    pub mean_action: f64,
    /// `v - [(1 - beta)(u_own_clean - c nu) + beta rho]`, per replicate.
    pub separability_gap: f64,
    pub standard_errors: StandardErrors,
    /// Noisy over noiseless base utility (agents' price of privacy).
    pub agents_utility_ratio: Estimate,
    /// Noisy over noiseless aggregator error (aggregator's price of privacy).
    pub aggregator_error_ratio: Estimate,
}

impl MonteCarloReport {
    pub fn base_utility(&self) -> Estimate {
        Estimate { mean: self.mean_base_utility, se: self.standard_errors.base_utility }
    }

    pub fn noiseless_utility(&self) -> Estimate {
        Estimate { mean: self.mean_noiseless_utility, se: self.standard_errors.noiseless_utility }
    }

    pub fn own_clean_utility(&self) -> Estimate {
        Estimate { mean: self.mean_own_clean_utility, se: self.standard_errors.own_clean_utility }
    }

    pub fn privacy_utility(&self) -> Estimate {
        Estimate { mean: self.mean_privacy_utility, se: self.standard_errors.privacy_utility }
    }

    pub fn aggregator_sq_error(&self) -> Estimate {
        Estimate { mean: self.mean_aggregator_sq_error, se: self.standard_errors.aggregator_sq_error }
    }

    pub fn action(&self) -> Estimate {
        Estimate { mean: self.mean_action, se: self.standard_errors.action }
    }

    pub fn separability_gap(&self) -> Estimate {
        Estimate { mean: self.separability_gap, se: self.standard_errors.separability_gap }
    }
}

const BASE: usize = 0;
const NOISELESS: usize = 1;
const OWN_CLEAN: usize = 2;
const PRIVACY: usize = 3;
const AGG: usize = 4;
const AGG_CLEAN: usize = 5;
const ACTION: usize = 6;
const GAP: usize = 7;

/// Simulates the whole population playing `profile`.
pub fn run_monte_carlo(
    params: &GameParams,
    profile: &StrategyProfile,
    settings: &MonteCarloSettings,
) -> Result<MonteCarloReport> {
    if settings.replicates == 0 {
        return Err(invalid("replicates", "at least one replicate is required"));
    }
    if params.population().is_continuum() && settings.aggregator_sample == 0 {
        return Err(invalid("n_obs", "the aggregator must observe at least one agent"));
    }
    let rho = rho_for_noise(profile.noise(), settings.measure)?;
    let s = settings.s;
    let alpha = params.alpha();
    let beta = params.beta();
    let kappa = profile.kappa();
    let noise = profile.noise().copied();
    let nu = profile.nu();
    let penalty = penalty_coefficient(params);
    let (sd_x, sd_y) = (params.sigma2_x().sqrt(), params.sigma2_y().sqrt());

    let m = match params.population() {
        Population::Finite(n) => {
            let n = n as usize;
            let nf = n as f64;
            run_blocks::<8, _>(settings.replicates, settings.seed, |rng, scratch| {
                let y = s + sd_y * normal(rng);
                scratch.theta.clear();
                scratch.eta.clear();
                for _ in 0..n {
                    let x = s + sd_x * normal(rng);
                    scratch.theta.push(kappa * x + (1.0 - kappa) * y);
                    scratch.eta.push(draw_noise(noise.as_ref(), rng));
                }
                let mean_clean = scratch.theta.iter().sum::<f64>() / nf;
                let mean_noisy = mean_clean + scratch.eta.iter().sum::<f64>() / nf;
                let (mut u, mut u0, mut uc) = (0.0, 0.0, 0.0);
                for (&t, &e) in scratch.theta.iter().zip(&scratch.eta) {
                    u += base_utility(t + e, mean_noisy, s, alpha);
                    u0 += base_utility(t, mean_clean, s, alpha);
                    uc += base_utility(t, mean_noisy - e / nf, s, alpha);
                }
                let (u, u0, uc) = (u / nf, u0 / nf, uc / nf);
                [
                    u,
                    u0,
                    uc,
                    realized_privacy_utility(u, rho, params),
                    (mean_noisy - s).powi(2),
                    (mean_clean - s).powi(2),
                    mean_noisy,
                    // rho cancels between v and the decomposition.
                    (1.0 - beta) * (u - uc + penalty * nu),
                ]
            })
        }
        Population::Continuum => {
            let m_obs = settings.aggregator_sample;
            let mf = m_obs as f64;
            run_blocks::<8, _>(settings.replicates, settings.seed, |rng, _| {
                let y = s + sd_y * normal(rng);
                let x = s + sd_x * normal(rng);
                let eta = draw_noise(noise.as_ref(), rng);
                let theta = kappa * x + (1.0 - kappa) * y;
                // Private signals and noise average out over the continuum.
                let mean_action = kappa * s + (1.0 - kappa) * y;
                let u = base_utility(theta + eta, mean_action, s, alpha);
                let u0 = base_utility(theta, mean_action, s, alpha);
                let (mut agg, mut agg0) = (0.0, 0.0);
                for _ in 0..m_obs {
                    let xk = s + sd_x * normal(rng);
                    let tk = kappa * xk + (1.0 - kappa) * y;
                    agg0 += tk;
                    agg += tk + draw_noise(noise.as_ref(), rng);
                }
                [
                    u,
                    u0,
                    u0,
                    realized_privacy_utility(u, rho, params),
                    (agg / mf - s).powi(2),
                    (agg0 / mf - s).powi(2),
                    theta + eta,
                    (1.0 - beta) * (u - u0 + penalty * nu),
                ]
            })
        }
    };

    Ok(MonteCarloReport {
        replicates: m.count(),
        seed: settings.seed,
        s,
        rho,
        mean_base_utility: m.mean(BASE),
        mean_noiseless_utility: m.mean(NOISELESS),
        mean_own_clean_utility: m.mean(OWN_CLEAN),
        mean_privacy_utility: m.mean(PRIVACY),
        mean_aggregator_sq_error: m.mean(AGG),
        mean_noiseless_aggregator_sq_error: m.mean(AGG_CLEAN),
        mean_action: m.mean(ACTION),
        separability_gap: m.mean(GAP),
        standard_errors: StandardErrors {
            base_utility: m.estimate(BASE).se,
            noiseless_utility: m.estimate(NOISELESS).se,
            own_clean_utility: m.estimate(OWN_CLEAN).se,
            privacy_utility: m.estimate(PRIVACY).se,
            aggregator_sq_error: m.estimate(AGG).se,
            noiseless_aggregator_sq_error: m.estimate(AGG_CLEAN).se,
            action: m.estimate(ACTION).se,
            separability_gap: m.estimate(GAP).se,
        },
        agents_utility_ratio: m.ratio(BASE, NOISELESS),
        aggregator_error_ratio: m.ratio(AGG, AGG_CLEAN),
    })
}

/// Mean squared error of the average of `n_obs` observed actions as an
/// estimate of `s`.
pub fn estimate_aggregator_error(
    params: &GameParams,
    profile: &StrategyProfile,
    s: f64,
    n_obs: usize,
    replicates: u64,
    seed: u64,
) -> Result<Estimate> {
    if n_obs == 0 {
        return Err(invalid("n_obs", "the aggregator must observe at least one agent"));
    }
    if replicates == 0 {
        return Err(invalid("replicates", "at least one replicate is required"));
    }
    if let Population::Finite(n) = params.population() {
        if n_obs > n as usize {
            return Err(invalid("n_obs", format!("{n_obs} exceeds the {n} players")));
        }
    }
    let kappa = profile.kappa();
    let noise = profile.noise().copied();
    let (sd_x, sd_y) = (params.sigma2_x().sqrt(), params.sigma2_y().sqrt());
    let nf = n_obs as f64;
    let m = run_blocks::<1, _>(replicates, seed, |rng, _| {
        let y = s + sd_y * normal(rng);
        let mut total = 0.0;
        for _ in 0..n_obs {
            let x = s + sd_x * normal(rng);
            total += kappa * x + (1.0 - kappa) * y + draw_noise(noise.as_ref(), rng);
        }
        [(total / nf - s).powi(2)]
    });
    Ok(m.estimate(0))
}
