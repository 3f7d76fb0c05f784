//! Brute-force ground truth for the closed forms: numeric best responses,
//! symmetric fixed points, the optimal noise variance by direct search, and
//! certification that no unilateral deviation pays.

use rayon::prelude::*;
use serde::Serialize;

use crate::equilibrium::StrategyProfile;
use crate::error::{invalid, Error, Result};
use crate::game::{base_utility, GameParams, Population};
use crate::inference::{rho_for_noise, rho_simplified, PrivacyMeasure};
use crate::noise::{NoiseFamily, NoiseSpec};
use crate::rng::derive_seed;
use crate::search::golden_section_max;
use crate::simulate::{draw_noise, normal, run_blocks, Estimate};

const KAPPA_TOL: f64 = 1e-10;
const FIXED_POINT_TOL: f64 = 1e-10;
const MAX_ITERATIONS: usize = 10_000;
/// Upper end of the noise-variance search.
pub const NU_MAX: f64 = 1e3;
const NU_MIN: f64 = 1e-12;

/// `((n - 1)/n)^2` and `(n - 1)/n^2` for a finite game.
fn finite_shares(n: u32) -> (f64, f64) {
    let n = f64::from(n);
    (((n - 1.0) / n).powi(2), (n - 1.0) / (n * n))
}

/// Expected base utility given `s` of one agent playing `kappa_i` on its
/// signals, plus noise of variance `nu_i` and mean `mu_i`, while everyone
/// else plays `kappa` with noise of variance `nu`.
pub fn deviator_expected_utility(
    params: &GameParams,
    kappa: f64,
    nu: f64,
    kappa_i: f64,
    nu_i: f64,
    mu_i: f64,
) -> f64 {
    let a = params.alpha();
    let (sx, sy) = (params.sigma2_x(), params.sigma2_y());
    let own = kappa_i * kappa_i * sx + nu_i + mu_i * mu_i;
    let guess = own + (1.0 - kappa_i).powi(2) * sy;
    let public_gap = (kappa - kappa_i).powi(2) * sy;
    let coordination = match params.population() {
        Population::Finite(n) => {
            let (d, e) = finite_shares(n);
            d * own + e * (kappa * kappa * sx + nu) + d * public_gap
        }
        Population::Continuum => own + public_gap,
    };
    -a * guess - (1.0 - a) * coordination
}

/// Best own weight on the private signal when everyone else uses
/// `others_kappa`, by golden-section search on `[0, 1]`.
pub fn best_response_kappa(params: &GameParams, others_kappa: f64) -> f64 {
    let f = |k: f64| deviator_expected_utility(params, others_kappa, 0.0, k, 0.0, 0.0);
    golden_section_max(f, 0.0, 1.0, KAPPA_TOL).x
}

/// Symmetric fixed point of `best_response_kappa`, iterated from 0.5.
pub fn fixed_point_kappa(params: &GameParams) -> Result<f64> {
    let mut kappa = 0.5;
    let mut trace = Vec::new();
    for _ in 0..MAX_ITERATIONS {
        let next = best_response_kappa(params, kappa);
        let step = (next - kappa).abs();
        trace.push(next);
        kappa = next;
        if step < FIXED_POINT_TOL {
            return Ok(kappa);
        }
    }
    let last_step = (trace[trace.len() - 1] - trace[trace.len() - 2]).abs();
    trace.drain(..trace.len().saturating_sub(20));
    Err(Error::NoConvergence {
        iterations: MAX_ITERATIONS,
        last_step,
        trace,
    })
}

/// Best realized action against the others' actions, which average
/// `others_mean` (finite game) or make up the average `others_mean`
/// (continuum).
pub fn best_response_action(params: &GameParams, s: f64, others_mean: f64) -> f64 {
    let a = params.alpha();
    let f = |theta: f64| {
        let mean = match params.population() {
            Population::Finite(n) => {
                let n = f64::from(n);
                (theta + (n - 1.0) * others_mean) / n
            }
            Population::Continuum => others_mean,
        };
        base_utility(theta, mean, s, a)
    };
    let lo = s.min(others_mean) - 1.0;
    let hi = s.max(others_mean) + 1.0;
    golden_section_max(f, lo, hi, 1e-12 * (hi - lo).max(1.0)).x
}

/// Maximizer over `nu` in `(0, NU_MAX]` of
/// `-(1 - beta) c nu + beta rho_simplified(nu)`, searched in `ln nu`.
pub fn best_response_variance(params: &GameParams, measure: PrivacyMeasure, c_n: f64) -> f64 {
    let beta = params.beta();
    if beta == 0.0 {
        return 0.0;
    }
    let g = |t: f64| {
        let nu = t.exp();
        -(1.0 - beta) * c_n * nu + beta * rho_simplified(nu, measure)
    };
    golden_section_max(g, NU_MIN.ln(), NU_MAX.ln(), KAPPA_TOL).x.exp()
}

/// A unilateral deviation: own weight, own noise and a noise mean shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Deviation {
    pub kappa: f64,
    pub noise: Option<NoiseSpec>,
    pub mean_shift: f64,
}

impl Deviation {
    pub fn new(kappa: f64, noise: Option<NoiseSpec>, mean_shift: f64) -> Self {
        Self {
            kappa,
            noise,
            mean_shift,
        }
    }

    /// Deviation that reproduces a symmetric profile.
    pub fn from_profile(profile: &StrategyProfile) -> Self {
        Self::new(profile.kappa(), profile.noise().copied(), 0.0)
    }

    fn nu(&self) -> f64 {
        self.noise.map_or(0.0, |n| n.variance())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GainMethod {
    ClosedForm,
    MonteCarlo,
}

/// Expected privacy-aware utility gain of a deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gain {
    #[serde(serialize_with = "crate::real::serialize")]
    pub gain: f64,
    /// Zero for closed-form evaluations.
    pub se: f64,
    pub method: GainMethod,
}

fn all_gaussian(noises: &[Option<&NoiseSpec>]) -> bool {
    noises.iter().all(|n| n.is_none_or(|n| n.is_gaussian() || n.is_degenerate()))
}

/// Difference `beta (rho_dev - rho_eq)`, treating two infinite penalties of
/// the same sign as equal and ignoring the term when `beta = 0`.
fn privacy_difference(beta: f64, rho_dev: f64, rho_eq: f64) -> f64 {
    if beta == 0.0 || rho_dev == rho_eq {
        0.0
    } else {
        beta * (rho_dev - rho_eq)
    }
}

/// Gain to one agent of switching from `equilibrium` to `candidate` while
/// everyone else keeps playing `equilibrium`. Observers are assumed to know
/// the deviator's strategy, so its privacy term is that of its own noise.
///
/// Exact when every noise involved is Gaussian or absent; otherwise a
/// paired Monte Carlo estimate on common random numbers.
pub fn deviation_gain(
    params: &GameParams,
    measure: PrivacyMeasure,
    equilibrium: &StrategyProfile,
    candidate: &Deviation,
    s: f64,
    replicates: u64,
    seed: u64,
) -> Result<Gain> {
    let beta = params.beta();
    let rho_eq = rho_for_noise(equilibrium.noise(), measure)?;
    let rho_dev = rho_for_noise(candidate.noise.as_ref(), measure)?;
    let privacy = privacy_difference(beta, rho_dev, rho_eq);
    if privacy == f64::NEG_INFINITY {
        return Ok(Gain { gain: f64::NEG_INFINITY, se: 0.0, method: GainMethod::ClosedForm });
    }
    let (kappa, nu) = (equilibrium.kappa(), equilibrium.nu());

    if all_gaussian(&[equilibrium.noise(), candidate.noise.as_ref()]) {
        let u_dev = deviator_expected_utility(
            params,
            kappa,
            nu,
            candidate.kappa,
            candidate.nu(),
            candidate.mean_shift,
        );
        let u_eq = deviator_expected_utility(params, kappa, nu, kappa, nu, 0.0);
        return Ok(Gain {
            gain: (1.0 - beta) * (u_dev - u_eq) + privacy,
            se: 0.0,
            method: GainMethod::ClosedForm,
        });
    }

    if replicates < 2 {
        return Err(invalid("replicates", "a Monte Carlo deviation check needs at least two replicates"));
    }
    let a = params.alpha();
    let (sd_x, sd_y) = (params.sigma2_x().sqrt(), params.sigma2_y().sqrt());
    let eq_noise = equilibrium.noise().copied();
    let dev_noise = candidate.noise;
    let (k_dev, mu) = (candidate.kappa, candidate.mean_shift);
    let m = run_blocks::<1, _>(replicates, seed, |rng, _| {
        let y = s + sd_y * normal(rng);
        let x = s + sd_x * normal(rng);
        let own_eq = kappa * x + (1.0 - kappa) * y + draw_noise(eq_noise.as_ref(), rng);
        let own_dev = k_dev * x + (1.0 - k_dev) * y + draw_noise(dev_noise.as_ref(), rng) + mu;
        let (u_dev, u_eq) = match params.population() {
            Population::Finite(n) => {
                let mut others = 0.0;
                for _ in 1..n {
                    let xj = s + sd_x * normal(rng);
                    others += kappa * xj + (1.0 - kappa) * y + draw_noise(eq_noise.as_ref(), rng);
                }
                let nf = f64::from(n);
                (
                    base_utility(own_dev, (own_dev + others) / nf, s, a),
                    base_utility(own_eq, (own_eq + others) / nf, s, a),
                )
            }
            Population::Continuum => {
                let mean = kappa * s + (1.0 - kappa) * y;
                (base_utility(own_dev, mean, s, a), base_utility(own_eq, mean, s, a))
            }
        };
        [(1.0 - beta) * (u_dev - u_eq)]
    });
    let e = m.estimate(0);
    Ok(Gain {
        gain: e.mean + privacy,
        se: e.se,
        method: GainMethod::MonteCarlo,
    })
}

/// Deviation grid and Monte Carlo effort for `certify_equilibrium`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificationSettings {
    pub s: f64,
    /// Replicates per Monte Carlo grid point.
    pub replicates: u64,
    pub seed: u64,
    pub kappa_points: usize,
    pub nu_points: usize,
    /// Upper end of the variance grid as a multiple of the equilibrium
    /// variance.
    pub nu_span: f64,
    pub mean_shifts: Vec<f64>,
    /// Non-Gaussian families checked by Monte Carlo at the equilibrium
    /// variance, over the weight and mean-shift grid.
    pub cross_families: Vec<NoiseFamily>,
    pub refine: bool,
    /// Allowed closed-form gain.
    pub closed_form_tolerance: f64,
    /// Allowed Monte Carlo gain in standard errors.
    pub se_multiple: f64,
}

impl CertificationSettings {
    pub fn new(s: f64, replicates: u64, seed: u64) -> Self {
        Self {
            s,
            replicates,
            seed,
            kappa_points: 21,
            nu_points: 21,
            nu_span: 4.0,
            mean_shifts: vec![-1.0, -0.5, 0.0, 0.5, 1.0],
            cross_families: Vec::new(),
            refine: true,
            closed_form_tolerance: 1e-9,
            se_multiple: 3.0,
        }
    }

    /// Families usable as cross-family deviations under `measure`. Discrete
    /// noise has no differential entropy, so the entropy measure only
    /// admits the uniform family.
    pub fn with_default_cross_families(mut self, measure: PrivacyMeasure) -> Self {
        self.cross_families = match measure {
            PrivacyMeasure::Precision => vec![
                NoiseFamily::Uniform,
                NoiseFamily::TwoPoint { high: 1.0, prob_high: 0.3 },
            ],
            PrivacyMeasure::Entropy => vec![NoiseFamily::Uniform],
        };
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvaluatedDeviation {
    pub deviation: Deviation,
    pub gain: Gain,
}

/// Outcome of a deviation search around a candidate equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub equilibrium: StrategyProfile,
    pub measure: PrivacyMeasure,
    pub grid_points: usize,
    pub monte_carlo_points: usize,
    /// Largest exactly evaluated gain, after refinement if enabled.
    pub max_closed_form: Option<EvaluatedDeviation>,
    /// Monte Carlo point with the largest gain in standard errors.
    pub max_monte_carlo: Option<EvaluatedDeviation>,
    pub closed_form_pass: bool,
    pub monte_carlo_pass: bool,
    pub pass: bool,
}

fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points)
            .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

fn z_score(g: &Gain) -> f64 {
    if g.se > 0.0 {
        g.gain / g.se
    } else if g.gain > 0.0 {
        f64::INFINITY
    } else if g.gain < 0.0 {
        f64::NEG_INFINITY
    } else {
        0.0
    }
}

/// Coordinate-wise golden-section ascent on the exact gain from a starting
/// deviation with Gaussian (or no) noise.
fn refine(
    params: &GameParams,
    measure: PrivacyMeasure,
    equilibrium: &StrategyProfile,
    start: EvaluatedDeviation,
    nu_hi: f64,
) -> Result<EvaluatedDeviation> {
    let eval = |k: f64, nu: f64, mu: f64| -> Result<Gain> {
        let noise = if nu > 0.0 { Some(NoiseSpec::gaussian(nu)?) } else { None };
        deviation_gain(params, measure, equilibrium, &Deviation::new(k, noise, mu), 0.0, 0, 0)
    };
    let (mut k, mut nu, mut mu) = (start.deviation.kappa, start.deviation.nu(), start.deviation.mean_shift);
    let finite = |g: Result<Gain>| g.map_or(f64::NEG_INFINITY, |g| g.gain);
    for _ in 0..4 {
        k = golden_section_max(|v| finite(eval(v, nu, mu)), 0.0, 1.0, 1e-12).x;
        if nu_hi > 0.0 {
            let t = golden_section_max(|t| finite(eval(t.exp(), nu, mu)), NU_MIN.ln(), nu_hi.ln(), 1e-12).x;
            let candidate = t.exp();
            if finite(eval(k, candidate, mu)) >= finite(eval(k, nu, mu)) {
                nu = candidate;
            }
        }
        mu = golden_section_max(|v| finite(eval(k, nu, v)), -1.0, 1.0, 1e-12).x;
    }
    let gain = eval(k, nu, mu)?;
    let noise = if nu > 0.0 { Some(NoiseSpec::gaussian(nu)?) } else { None };
    let refined = EvaluatedDeviation { deviation: Deviation::new(k, noise, mu), gain };
    Ok(if refined.gain.gain >= start.gain.gain { refined } else { start })
}

/// Searches a grid of unilateral deviations (weight in `[0, 1]`, Gaussian
/// noise variance in `[0, nu_span * nu]`, mean shifts) and, at the
/// equilibrium variance, deviations to other noise families. Passes when
/// no exact gain exceeds the tolerance and no Monte Carlo gain exceeds the
/// allowed number of standard errors.
pub fn certify_equilibrium(
    params: &GameParams,
    measure: PrivacyMeasure,
    equilibrium: &StrategyProfile,
    settings: &CertificationSettings,
) -> Result<Certificate> {
    let nu_eq = equilibrium.nu();
    let kappas = linspace(0.0, 1.0, settings.kappa_points);
    let nus = if nu_eq > 0.0 {
        linspace(0.0, settings.nu_span * nu_eq, settings.nu_points)
    } else {
        vec![0.0]
    };

    let mut grid = Vec::new();
    for &k in &kappas {
        for &nu in &nus {
            for &mu in &settings.mean_shifts {
                let noise = match equilibrium.noise() {
                    Some(n) if nu > 0.0 => Some(n.with_variance(nu)?),
                    None if nu > 0.0 => Some(NoiseSpec::gaussian(nu)?),
                    _ => None,
                };
                grid.push(Deviation::new(k, noise, mu));
            }
        }
    }
    if nu_eq > 0.0 {
        for family in &settings.cross_families {
            let noise = NoiseSpec::new(*family, nu_eq)?;
            for &k in &kappas {
                for &mu in &settings.mean_shifts {
                    grid.push(Deviation::new(k, Some(noise), mu));
                }
            }
        }
    }

    let evaluated: Vec<EvaluatedDeviation> = grid
        .par_iter()
        .enumerate()
        .map(|(i, d)| {
            let seed = derive_seed(settings.seed, i as u64);
            deviation_gain(params, measure, equilibrium, d, settings.s, settings.replicates, seed)
                .map(|gain| EvaluatedDeviation { deviation: *d, gain })
        })
        .collect::<Result<_>>()?;

    let mut best_exact: Option<EvaluatedDeviation> = None;
    let mut best_mc: Option<EvaluatedDeviation> = None;
    for e in &evaluated {
        match e.gain.method {
            GainMethod::ClosedForm => {
                if best_exact.is_none_or(|b| e.gain.gain > b.gain.gain) {
                    best_exact = Some(*e);
                }
            }
            GainMethod::MonteCarlo => {
                if best_mc.is_none_or(|b| z_score(&e.gain) > z_score(&b.gain)) {
                    best_mc = Some(*e);
                }
            }
        }
    }
    if settings.refine {
        if let Some(start) = best_exact {
            let nu_hi = if nu_eq > 0.0 { settings.nu_span * nu_eq } else { 0.0 };
            best_exact = Some(refine(params, measure, equilibrium, start, nu_hi)?);
        }
    }

    let closed_form_pass = best_exact.is_none_or(|b| b.gain.gain <= settings.closed_form_tolerance);
    let monte_carlo_pass = best_mc.is_none_or(|b| z_score(&b.gain) <= settings.se_multiple);
    let monte_carlo_points = evaluated.iter().filter(|e| e.gain.method == GainMethod::MonteCarlo).count();
    Ok(Certificate {
        equilibrium: *equilibrium,
        measure,
        grid_points: evaluated.len(),
        monte_carlo_points,
        max_closed_form: best_exact,
        max_monte_carlo: best_mc,
        closed_form_pass,
        monte_carlo_pass,
        pass: closed_form_pass && monte_carlo_pass,
    })
}

impl Gain {
    pub fn as_estimate(&self) -> Estimate {
        Estimate { mean: self.gain, se: self.se }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{
        expected_utility, foc_residual, kappa_finite, kappa_infinite, optimal_noise_variance,
        penalty_coefficient, solve, FormulaSet,
    };
    use proptest::prelude::*;

    fn finite(n: u32, alpha: f64, sx: f64, sy: f64) -> GameParams {
        GameParams::finite(n, alpha, sx, sy).unwrap()
    }

    #[test]
    fn deviator_utility_reduces_to_symmetric_closed_form() {
        for p in [finite(2, 0.5, 1.0, 1.0), finite(7, 0.2, 2.0, 0.5), GameParams::continuum(0.3, 1.5, 0.7).unwrap()] {
            let k = 0.37;
            let lhs = deviator_expected_utility(&p, k, 0.0, k, 0.0, 0.0);
            assert!((lhs - expected_utility(&p, k)).abs() < 1e-14);
        }
    }

    #[test]
    fn best_response_examples() {
        let p = finite(2, 0.5, 1.0, 1.0);
        let k = kappa_finite(&p).unwrap();
        assert!((best_response_kappa(&p, k) - k).abs() < 1e-8);
        let g = finite(4, 1.0, 2.0, 0.5);
        for others in [0.0, 0.3, 1.0] {
            assert!((best_response_kappa(&g, others) - g.tau_x() / (g.tau_x() + g.tau_y())).abs() < 1e-8);
        }
        assert!(best_response_kappa(&finite(3, 0.0, 1.0, 1.0), 0.0) < 1e-8);
    }

    #[test]
    fn fixed_point_examples() {
        assert!((fixed_point_kappa(&finite(2, 0.5, 1.0, 1.0)).unwrap() - 4.0 / 9.0).abs() < 1e-8);
        let c = GameParams::continuum(0.5, 1.0, 1.0).unwrap();
        assert!((fixed_point_kappa(&c).unwrap() - 1.0 / 3.0).abs() < 1e-8);
        assert!(fixed_point_kappa(&finite(5, 0.0, 1.0, 1.0)).unwrap() < 1e-8);
    }

    #[test]
    fn best_action_satisfies_first_order_condition() {
        for (p, s, m) in [
            (finite(2, 0.5, 1.0, 1.0), 0.3, -1.2),
            (finite(9, 0.1, 1.0, 1.0), 2.0, 5.0),
            (finite(3, 1.0, 1.0, 1.0), -1.0, 4.0),
        ] {
            let n = f64::from(p.population().players().unwrap());
            let theta = best_response_action(&p, s, m);
            assert!(foc_residual(theta, s, (n - 1.0) * m, &p).abs() < 1e-8);
        }
        let c = GameParams::continuum(0.25, 1.0, 1.0).unwrap();
        let theta = best_response_action(&c, 1.0, -3.0);
        assert!(foc_residual(theta, 1.0, -3.0, &c).abs() < 1e-8);
    }

    #[test]
    fn best_response_variance_examples() {
        let c = GameParams::continuum(0.5, 1.0, 1.0).unwrap();
        let at = |beta: f64, m| best_response_variance(&c.with_beta(beta).unwrap(), m, 1.0);
        assert!((at(0.5, PrivacyMeasure::Precision) - 1.0).abs() < 1e-8);
        assert!((at(0.5, PrivacyMeasure::Entropy) - 0.5).abs() < 1e-8);
        assert!((at(0.8, PrivacyMeasure::Precision) - 2.0).abs() < 1e-8);
        assert_eq!(at(0.0, PrivacyMeasure::Entropy), 0.0);
    }

    #[test]
    fn deviation_gain_examples() {
        let p = finite(3, 0.6, 1.0, 1.0).with_beta(0.5).unwrap();
        for m in PrivacyMeasure::ALL {
            let eq = solve(&p, m, FormulaSet::Consistent, NoiseFamily::Gaussian).unwrap();
            let g = deviation_gain(&p, m, &eq, &Deviation::from_profile(&eq), 0.0, 0, 0).unwrap();
            assert_eq!(g.gain, 0.0);
            let shifted = Deviation::new(eq.kappa(), eq.noise().copied(), 0.5);
            assert!(deviation_gain(&p, m, &eq, &shifted, 0.0, 0, 0).unwrap().gain < 0.0);
        }
        // Same mean shift, checked by simulation with non-Gaussian own noise.
        let eq = solve(&p, PrivacyMeasure::Precision, FormulaSet::Consistent, NoiseFamily::Gaussian).unwrap();
        let uni = NoiseSpec::uniform(eq.nu()).unwrap();
        let g = deviation_gain(&p, PrivacyMeasure::Precision, &eq, &Deviation::new(eq.kappa(), Some(uni), 0.5), 0.0, 200_000, 4)
            .unwrap();
        assert_eq!(g.method, GainMethod::MonteCarlo);
        assert!(g.gain + 3.0 * g.se < 0.0, "{g:?}");
        let exact = -(1.0 - 0.5) * penalty_coefficient(&p) * 0.25;
        assert!(g.as_estimate().covers(exact, 4.0), "{g:?} vs {exact}");
    }

    #[test]
    fn certificate_passes_at_equilibrium_and_fails_off_it() {
        let p = finite(3, 0.5, 1.0, 2.0).with_beta(0.25).unwrap();
        let m = PrivacyMeasure::Precision;
        let eq = solve(&p, m, FormulaSet::Consistent, NoiseFamily::Gaussian).unwrap();
        let settings = CertificationSettings::new(0.0, 4_000, 11).with_default_cross_families(m);
        let cert = certify_equilibrium(&p, m, &eq, &settings).unwrap();
        assert!(cert.pass, "{cert:?}");
        assert!(cert.max_closed_form.unwrap().gain.gain.abs() <= 1e-9);

        let off = StrategyProfile::new(eq.kappa() + 0.2, eq.noise().copied()).unwrap();
        let cert = certify_equilibrium(&p, m, &off, &CertificationSettings::new(0.0, 1_000, 11)).unwrap();
        assert!(!cert.pass);
        assert!(cert.max_closed_form.unwrap().gain.gain > 1e-3);

        let base = finite(3, 0.5, 1.0, 2.0);
        let eq0 = solve(&base, m, FormulaSet::Consistent, NoiseFamily::Gaussian).unwrap();
        assert!(eq0.noise().is_none());
        assert!(certify_equilibrium(&base, m, &eq0, &settings).unwrap().pass);
    }

    proptest! {
        #[test]
        fn fixed_point_matches_closed_form(
            alpha in 0.05f64..=1.0,
            sx in 0.1f64..10.0,
            sy in 0.1f64..10.0,
            n in 2u32..200,
        ) {
            let p = finite(n, alpha, sx, sy);
            prop_assert!((fixed_point_kappa(&p).unwrap() - kappa_finite(&p).unwrap()).abs() < 1e-8);
            let c = GameParams::continuum(alpha, sx, sy).unwrap();
            prop_assert!((fixed_point_kappa(&c).unwrap() - kappa_infinite(&c)).abs() < 1e-8);
        }

        #[test]
        fn best_variance_matches_consistent_formula(
            alpha in 0.0f64..=1.0,
            beta in 0.01f64..0.95,
            n in 2u32..50,
        ) {
            let p = finite(n, alpha, 1.0, 1.0).with_beta(beta).unwrap();
            for m in PrivacyMeasure::ALL {
                let numeric = best_response_variance(&p, m, penalty_coefficient(&p));
                let closed = optimal_noise_variance(&p, m, FormulaSet::Consistent);
                prop_assert!((numeric - closed).abs() < 1e-6 * closed.max(1.0));
            }
        }

        #[test]
        fn any_mean_shift_loses(alpha in 0.0f64..=1.0, beta in 0.0f64..0.9, mu in 0.01f64..1.0) {
            let p = finite(4, alpha, 1.0, 1.0).with_beta(beta).unwrap();
            let eq = solve(&p, PrivacyMeasure::Precision, FormulaSet::Consistent, NoiseFamily::Gaussian).unwrap();
            for shift in [mu, -mu] {
                let d = Deviation::new(eq.kappa(), eq.noise().copied(), shift);
                let g = deviation_gain(&p, PrivacyMeasure::Precision, &eq, &d, 0.0, 0, 0).unwrap();
                prop_assert!(g.gain < 0.0);
            }
        }
    }
}
