//! What an observer can infer about a player's private signal from her
//! (noisy) action, and the privacy terms built from that inference.
//!
//! The observer knows the true state `s`, the public signal, the announced
//! weight `kappa` and the announced noise distribution. Her prior on the
//! private signal is `N(s, sigma2_x)`.
//!
//! Sign convention: `rho` enters utility as `+beta * rho` and grows with
//! obscurity. Under the precision measure `rho = -1 / Var`, under the entropy
//! measure `rho` is the differential entropy of the belief.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::GameParams;
use crate::noise::{gaussian_entropy, EntropyScale, NoiseFamily, NoiseSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrivacyMeasure {
    Precision,
    Entropy,
}

impl PrivacyMeasure {
    pub const ALL: [PrivacyMeasure; 2] = [PrivacyMeasure::Precision, PrivacyMeasure::Entropy];

    pub fn name(&self) -> &'static str {
        match self {
            PrivacyMeasure::Precision => "precision",
            PrivacyMeasure::Entropy => "entropy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Representation {
    Gaussian,
    Grid { nodes: usize },
    /// Finite set of atoms; the entropy is a Shannon entropy.
    Discrete,
    /// Exact recovery; entropy is `-inf`.
    PointMass,
}

/// Summary of the observer's posterior over a private signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Belief {
    pub mean: f64,
    pub variance: f64,
    #[serde(serialize_with = "crate::real::serialize")]
    pub entropy: f64,
    pub representation: Representation,
}

impl Belief {
    pub fn gaussian(mean: f64, variance: f64) -> Self {
        Self {
            mean,
            variance,
            entropy: gaussian_entropy(variance),
            representation: Representation::Gaussian,
        }
    }

    pub fn point_mass(at: f64) -> Self {
        Self {
            mean: at,
            variance: 0.0,
            entropy: f64::NEG_INFINITY,
            representation: Representation::PointMass,
        }
    }
}

/// Recovers the private signal from a noiseless action.
pub fn invert_action(theta_tilde: f64, y: f64, kappa: f64) -> Result<f64> {
    if kappa == 0.0 {
        return Err(Error::UninformativeAction);
    }
    Ok((theta_tilde - (1.0 - kappa) * y) / kappa)
}

/// Posterior over `x_i` after seeing `theta_tilde = kappa x_i + (1 - kappa) y + eta`.
///
/// Gaussian noise gives a closed-form Gaussian with precision
/// `tau_x + kappa^2 / nu`. Uniform noise is handled by grid quadrature and
/// two-point noise yields a two-atom posterior.
pub fn observer_posterior(
    theta_tilde: f64,
    y: f64,
    kappa: f64,
    noise: &NoiseSpec,
    s: f64,
    params: &GameParams,
) -> Result<Belief> {
    if kappa <= 0.0 {
        return Err(Error::UninformativeAction);
    }
    let z = invert_action(theta_tilde, y, kappa)?;
    if noise.is_degenerate() {
        return Ok(Belief::point_mass(z));
    }
    let tau_x = params.tau_x();
    match noise.family() {
        NoiseFamily::Gaussian => {
            let tau_obs = kappa * kappa / noise.variance();
            let precision = tau_x + tau_obs;
            let mean = (tau_x * s + tau_obs * z) / precision;
            Ok(Belief::gaussian(mean, 1.0 / precision))
        }
        NoiseFamily::Uniform => grid_posterior(z, kappa, noise, s, params),
        NoiseFamily::TwoPoint { .. } => {
            let (atoms, probs) = noise.atoms().expect("two-point family");
            // x = z - eta / kappa for each atom of eta.
            let mut xs = [0.0; 2];
            let mut logw = [0.0; 2];
            for k in 0..2 {
                xs[k] = z - atoms[k] / kappa;
                let d = xs[k] - s;
                logw[k] = probs[k].ln() - 0.5 * tau_x * d * d;
            }
            let lmax = logw[0].max(logw[1]);
            let w0 = (logw[0] - lmax).exp();
            let w1 = (logw[1] - lmax).exp();
            let (p0, p1) = (w0 / (w0 + w1), w1 / (w0 + w1));
            let mean = p0 * xs[0] + p1 * xs[1];
            let variance = p0 * p1 * (xs[0] - xs[1]).powi(2);
            let entropy = [p0, p1]
                .iter()
                .filter(|&&p| p > 0.0)
                .map(|&p| -p * p.ln())
                .sum();
            Ok(Belief {
                mean,
                variance,
                entropy,
                representation: Representation::Discrete,
            })
        }
    }
}

/// Grid-quadrature posterior for any continuous noise family, including the
/// Gaussian one (useful for cross-checking the closed form).
pub fn observer_posterior_numeric(
    theta_tilde: f64,
    y: f64,
    kappa: f64,
    noise: &NoiseSpec,
    s: f64,
    params: &GameParams,
) -> Result<Belief> {
    if kappa <= 0.0 {
        return Err(Error::UninformativeAction);
    }
    let z = invert_action(theta_tilde, y, kappa)?;
    if noise.is_degenerate() {
        return Ok(Belief::point_mass(z));
    }
    if noise.density(0.0).is_none() {
        return Err(Error::IncomparableEntropy);
    }
    grid_posterior(z, kappa, noise, s, params)
}

const GRID_START: usize = 4096;
const GRID_MAX: usize = 1 << 22;
const GRID_TOL: f64 = 1e-8;
const GRID_WIDTH_SDS: f64 = 10.0;

fn grid_posterior(
    z: f64,
    kappa: f64,
    noise: &NoiseSpec,
    s: f64,
    params: &GameParams,
) -> Result<Belief> {
    let sd_x = params.sigma2_x().sqrt();
    let sd_obs = noise.variance().sqrt() / kappa;
    let (lo, hi) = match noise.family() {
        NoiseFamily::Uniform => {
            let half = noise.uniform_half_width() / kappa;
            let (slo, shi) = (z - half, z + half);
            let (plo, phi) = (s - GRID_WIDTH_SDS * sd_x, s + GRID_WIDTH_SDS * sd_x);
            if slo.max(plo) < shi.min(phi) {
                (slo.max(plo), shi.min(phi))
            } else {
                (slo, shi)
            }
        }
        _ => {
            let width = GRID_WIDTH_SDS * sd_x.max(sd_obs);
            (s.min(z) - width, s.max(z) + width)
        }
    };
    let tau_x = params.tau_x();
    let log_density = |x: f64| {
        let d = x - s;
        let h = noise.density(kappa * (z - x)).unwrap_or(0.0);
        if h > 0.0 {
            h.ln() - 0.5 * tau_x * d * d
        } else {
            f64::NEG_INFINITY
        }
    };

    let mut nodes = GRID_START;
    let mut prev = trapezoid_moments(&log_density, lo, hi, nodes)?;
    loop {
        let next_nodes = nodes * 2;
        let cur = trapezoid_moments(&log_density, lo, hi, next_nodes)?;
        nodes = next_nodes;
        let scale = cur.1.sqrt().max(f64::MIN_POSITIVE);
        let converged = (cur.0 - prev.0).abs() <= GRID_TOL * scale
            && (cur.1 - prev.1).abs() <= GRID_TOL * cur.1
            && (cur.2 - prev.2).abs() <= GRID_TOL;
        prev = cur;
        if converged || nodes >= GRID_MAX {
            break;
        }
    }
    Ok(Belief {
        mean: prev.0,
        variance: prev.1,
        entropy: prev.2,
        representation: Representation::Grid { nodes: nodes + 1 },
    })
}

/// Mean, variance and differential entropy of the density proportional to
/// `exp(log_density)` on `[lo, hi]`, by the trapezoid rule with `intervals`
/// panels.
fn trapezoid_moments(
    log_density: &impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    intervals: usize,
) -> Result<(f64, f64, f64)> {
    let h = (hi - lo) / intervals as f64;
    let logs: Vec<f64> = (0..=intervals)
        .map(|k| log_density(lo + k as f64 * h))
        .collect();
    let lmax = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !lmax.is_finite() {
        return Err(Error::ZeroLikelihood);
    }
    let (mut z0, mut z1, mut zl) = (0.0, 0.0, 0.0);
    for (k, &l) in logs.iter().enumerate() {
        let w = if k == 0 || k == intervals { 0.5 } else { 1.0 };
        let p = (l - lmax).exp();
        if p == 0.0 {
            continue;
        }
        let x = lo + k as f64 * h;
        z0 += w * p;
        z1 += w * p * x;
        zl += w * p * (l - lmax);
    }
    let mean = z1 / z0;
    let mut z2 = 0.0;
    for (k, &l) in logs.iter().enumerate() {
        let w = if k == 0 || k == intervals { 0.5 } else { 1.0 };
        let d = lo + k as f64 * h - mean;
        z2 += w * (l - lmax).exp() * d * d;
    }
    let norm = z0 * h;
    let variance = z2 / z0;
    // p = exp(l - lmax) / norm, so -E[ln p] = ln norm - E[l - lmax].
    let entropy = norm.ln() - zl / z0;
    Ok((mean, variance, entropy))
}

/// Privacy term of a belief.
///
/// A point-mass belief gives `-inf` under either measure. A discrete belief
/// has no differential entropy, so the entropy measure rejects it.
pub fn rho(belief: &Belief, measure: PrivacyMeasure) -> Result<f64> {
    if belief.variance == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    match measure {
        PrivacyMeasure::Precision => Ok(-1.0 / belief.variance),
        PrivacyMeasure::Entropy => match belief.representation {
            Representation::Discrete => Err(Error::IncomparableEntropy),
            _ => Ok(belief.entropy),
        },
    }
}

/// Privacy term with the posterior variance identified with the noise
/// variance: `-1/nu` or `0.5 ln(2 pi e nu)`. This is the form the
/// equilibrium conditions are built on.
pub fn rho_simplified(nu: f64, measure: PrivacyMeasure) -> f64 {
    if nu == 0.0 {
        return f64::NEG_INFINITY;
    }
    match measure {
        PrivacyMeasure::Precision => -1.0 / nu,
        PrivacyMeasure::Entropy => gaussian_entropy(nu),
    }
}

/// Simplified privacy term for an arbitrary noise family: the precision
/// measure only sees the variance, the entropy measure sees the family's
/// differential entropy.
pub fn rho_for_noise(noise: Option<&NoiseSpec>, measure: PrivacyMeasure) -> Result<f64> {
    let Some(noise) = noise.filter(|n| !n.is_degenerate()) else {
        return Ok(f64::NEG_INFINITY);
    };
    match measure {
        PrivacyMeasure::Precision => Ok(rho_simplified(noise.variance(), measure)),
        PrivacyMeasure::Entropy => {
            let e = noise.entropy()?;
            match e.scale {
                EntropyScale::Differential => Ok(e.nats),
                EntropyScale::Discrete => Err(Error::IncomparableEntropy),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Population;

    fn params(sigma2_x: f64) -> GameParams {
        GameParams::new(0.5, 0.0, Population::Continuum, sigma2_x, 1.0).unwrap()
    }

    #[test]
    fn invert_action_examples() {
        assert_eq!(invert_action(2.0, 1.0, 0.5).unwrap(), 3.0);
        assert!((invert_action(0.7, 0.7, 0.3).unwrap() - 0.7).abs() < 1e-15);
        assert_eq!(invert_action(-4.25, 9.0, 1.0).unwrap(), -4.25);
        assert_eq!(invert_action(1.0, 1.0, 0.0), Err(Error::UninformativeAction));
    }

    #[test]
    fn gaussian_posterior_example() {
        let noise = NoiseSpec::gaussian(1.0).unwrap();
        let b = observer_posterior(1.0, 0.0, 0.5, &noise, 0.0, &params(1.0)).unwrap();
        assert!((b.mean - 0.4).abs() < 1e-12);
        assert!((b.variance - 0.8).abs() < 1e-12);
        assert_eq!(b.representation, Representation::Gaussian);
    }

    #[test]
    fn noiseless_action_is_inverted_exactly() {
        let noise = NoiseSpec::gaussian(0.0).unwrap();
        let b = observer_posterior(2.0, 1.0, 0.5, &noise, 0.0, &params(1.0)).unwrap();
        assert_eq!(b.mean, 3.0);
        assert_eq!(b.variance, 0.0);
        assert_eq!(rho(&b, PrivacyMeasure::Precision).unwrap(), f64::NEG_INFINITY);
        assert_eq!(rho(&b, PrivacyMeasure::Entropy).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn huge_noise_returns_prior() {
        let noise = NoiseSpec::gaussian(1e8).unwrap();
        let b = observer_posterior(3.0, -1.0, 0.4, &noise, 0.25, &params(2.0)).unwrap();
        assert!((b.mean - 0.25).abs() < 1e-3);
        assert!((b.variance - 2.0).abs() < 1e-3);
    }

    #[test]
    fn numeric_path_matches_closed_form_for_gaussian_noise() {
        let p = params(1.5);
        let noise = NoiseSpec::gaussian(0.7).unwrap();
        let closed = observer_posterior(0.9, 0.2, 0.6, &noise, -0.3, &p).unwrap();
        let grid = observer_posterior_numeric(0.9, 0.2, 0.6, &noise, -0.3, &p).unwrap();
        assert!((closed.mean - grid.mean).abs() < 1e-9);
        assert!((closed.variance - grid.variance).abs() < 1e-9);
        assert!((closed.entropy - grid.entropy).abs() < 1e-8);
    }

    #[test]
    fn uniform_posterior_is_a_truncated_normal() {
        // Support of x is z +/- a/kappa; posterior is the prior restricted there.
        let p = params(1.0);
        let noise = NoiseSpec::uniform(3.0).unwrap(); // a = 3
        let kappa = 1.0;
        let b = observer_posterior(0.5, 0.0, kappa, &noise, 0.0, &p).unwrap();
        // Truncated standard normal on [-2.5, 3.5].
        let (lo, hi) = (-2.5f64, 3.5f64);
        let pdf = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let cdf = |x: f64| 0.5 * (1.0 + erf(x / 2f64.sqrt()));
        let mass = cdf(hi) - cdf(lo);
        let mean = (pdf(lo) - pdf(hi)) / mass;
        let var = 1.0 + (lo * pdf(lo) - hi * pdf(hi)) / mass - mean * mean;
        assert!((b.mean - mean).abs() < 1e-7, "{} vs {}", b.mean, mean);
        assert!((b.variance - var).abs() < 1e-7);
        assert!(b.variance < 1.0);
    }

    // Abramowitz-Stegun 7.1.26 is too coarse here; use a series/continued
    // fraction pair accurate to ~1e-15.
    fn erf(x: f64) -> f64 {
        if x.abs() < 3.0 {
            let mut sum = x;
            let mut term = x;
            let mut n = 0.0;
            loop {
                n += 1.0;
                term *= -x * x / n;
                let add = term / (2.0 * n + 1.0);
                sum += add;
                if add.abs() < 1e-17 {
                    break;
                }
            }
            sum * 2.0 / std::f64::consts::PI.sqrt()
        } else {
            let t = x.abs();
            let mut f = 0.0;
            for k in (1..60).rev() {
                f = (k as f64 / 2.0) / (t + f);
            }
            let erfc = (-t * t).exp() / std::f64::consts::PI.sqrt() / (t + f);
            (1.0 - erfc).copysign(x)
        }
    }

    #[test]
    fn two_point_posterior_is_discrete() {
        let p = params(1.0);
        let noise = NoiseSpec::two_point(1.0, 10.0, 0.1).unwrap();
        let b = observer_posterior(0.3, 0.0, 0.5, &noise, 0.0, &p).unwrap();
        assert_eq!(b.representation, Representation::Discrete);
        assert!(b.entropy >= 0.0 && b.entropy <= 2f64.ln());
        assert_eq!(rho(&b, PrivacyMeasure::Entropy), Err(Error::IncomparableEntropy));
        assert!(rho(&b, PrivacyMeasure::Precision).unwrap() < 0.0);
    }

    #[test]
    fn rho_examples() {
        let b = Belief::gaussian(0.0, 1.0);
        assert!((rho(&b, PrivacyMeasure::Entropy).unwrap() - 1.418_938_533_204_672_7).abs() < 1e-12);
        let b = Belief::gaussian(0.0, 2.0);
        assert_eq!(rho(&b, PrivacyMeasure::Precision).unwrap(), -0.5);
        assert_eq!(rho_simplified(1.0, PrivacyMeasure::Precision), -1.0);
        assert_eq!(rho_simplified(2.0, PrivacyMeasure::Precision), -0.5);
        assert!((rho_simplified(1.0, PrivacyMeasure::Entropy) - gaussian_entropy(1.0)).abs() < 1e-15);
        assert_eq!(rho_simplified(0.0, PrivacyMeasure::Precision), f64::NEG_INFINITY);
        assert_eq!(rho_simplified(0.0, PrivacyMeasure::Entropy), f64::NEG_INFINITY);
    }

    #[test]
    fn full_posterior_rho_differs_from_simplified() {
        let p = params(1.0);
        let nu = 1.0;
        let b = observer_posterior(0.0, 0.0, 0.5, &NoiseSpec::gaussian(nu).unwrap(), 0.0, &p).unwrap();
        let full = rho(&b, PrivacyMeasure::Precision).unwrap();
        let simple = rho_simplified(nu, PrivacyMeasure::Precision);
        assert!((full - (-1.25)).abs() < 1e-12);
        assert!((full - simple).abs() > 0.2);
    }

    #[test]
    fn rho_for_noise_by_family() {
        let u = NoiseSpec::uniform(2.0).unwrap();
        let g = NoiseSpec::gaussian(2.0).unwrap();
        let t = NoiseSpec::two_point(2.0, 5.0, 0.1).unwrap();
        let prec = PrivacyMeasure::Precision;
        let ent = PrivacyMeasure::Entropy;
        assert_eq!(rho_for_noise(Some(&u), prec).unwrap(), -0.5);
        assert_eq!(rho_for_noise(Some(&t), prec).unwrap(), -0.5);
        assert!(rho_for_noise(Some(&g), ent).unwrap() > rho_for_noise(Some(&u), ent).unwrap());
        assert_eq!(rho_for_noise(Some(&t), ent), Err(Error::IncomparableEntropy));
        assert_eq!(rho_for_noise(None, ent).unwrap(), f64::NEG_INFINITY);
    }

    proptest::proptest! {
        #[test]
        fn posterior_variance_increases_in_nu_and_is_bounded_by_prior(
            sigma2_x in 0.05f64..20.0,
            kappa in 0.01f64..1.0,
            nu in 1e-4f64..100.0,
            bump in 1.001f64..10.0,
        ) {
            let p = params(sigma2_x);
            let a = observer_posterior(0.0, 0.0, kappa, &NoiseSpec::gaussian(nu).unwrap(), 0.0, &p).unwrap();
            let b = observer_posterior(0.0, 0.0, kappa, &NoiseSpec::gaussian(nu * bump).unwrap(), 0.0, &p).unwrap();
            proptest::prop_assert!(a.variance < b.variance);
            proptest::prop_assert!(b.variance < sigma2_x);
            proptest::prop_assert!(a.entropy < b.entropy);
        }
    }
}
