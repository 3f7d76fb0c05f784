//! The five subcommands. Each turns a validated config into a `Body`.

use anyhow::{bail, Result};
use kbc_core::{
    aggregator_utility, best_response_variance, certify_equilibrium, deviator_expected_utility,
    equilibrium_kappa, expected_utility, fixed_point_kappa, optimal_noise_variance,
    penalty_coefficient, pop_agents_at, pop_agents_with_common_noise, pop_aggregator_at,
    rho_simplified, run_monte_carlo, CertificationSettings, FormulaSet, GameParams,
    MonteCarloSettings, NoiseSpec, Population, PrivacyMeasure, StrategyProfile,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::output::{real, Body, Table};

pub const FORMULA_NOTE: &str = "nu_consistent maximizes -(1-beta)*c_n*nu + beta*rho(nu); nu_paper is the original closed form, which differs except for the precision measure in the continuum";
pub const DEVIATION_NOTE: &str = "observers know the deviator's strategy; the privacy term is rho of the deviator's own noise";

fn params_json(p: &GameParams) -> Value {
    json!({
        "alpha": real(p.alpha()),
        "beta": real(p.beta()),
        "n": p.population().players(),
        "sigma2_x": real(p.sigma2_x()),
        "sigma2_y": real(p.sigma2_y()),
    })
}

/// Weight and noise the population plays: the equilibrium unless the config
/// overrides them.
fn played_profile(cfg: &ExperimentConfig, p: &GameParams) -> Result<StrategyProfile> {
    let kappa = cfg.kappa.unwrap_or_else(|| equilibrium_kappa(p));
    let nu = cfg.nu.unwrap_or_else(|| optimal_noise_variance(p, cfg.measure, cfg.formulas));
    let family = match cfg.measure {
        PrivacyMeasure::Entropy if cfg.nu.is_none() => kbc_core::NoiseFamily::Gaussian,
        _ => cfg.noise_family(),
    };
    let noise = if nu > 0.0 { Some(NoiseSpec::new(family, nu)?) } else { None };
    Ok(StrategyProfile::new(kappa, noise)?)
}

fn profile_json(profile: &StrategyProfile) -> Value {
    json!({
        "kappa": real(profile.kappa()),
        "nu": real(profile.nu()),
        "family": profile.noise().map(|n| n.family().name()),
    })
}

/// Expected privacy-aware utility `(1-beta)(E[u] - c nu) + beta rho(nu)`.
fn expected_privacy_utility(p: &GameParams, eu: f64, nu: f64, measure: PrivacyMeasure) -> f64 {
    if p.beta() == 0.0 {
        return eu - penalty_coefficient(p) * nu;
    }
    (1.0 - p.beta()) * (eu - penalty_coefficient(p) * nu) + p.beta() * rho_simplified(nu, measure)
}

pub fn solve(cfg: &ExperimentConfig) -> Result<Body> {
    let p = cfg.game_params()?;
    let m = cfg.measure;
    let kappa = equilibrium_kappa(&p);
    let kappa_oracle = fixed_point_kappa(&p)?;
    let c = penalty_coefficient(&p);
    let nu_paper = optimal_noise_variance(&p, m, FormulaSet::Paper);
    let nu_consistent = optimal_noise_variance(&p, m, FormulaSet::Consistent);
    let nu_oracle = best_response_variance(&p, m, c);
    let nu = optimal_noise_variance(&p, m, cfg.formulas);
    let eu = expected_utility(&p, kappa);
    let n_obs = cfg.n_obs();
    Ok(Body::Record(json!({
        "params": params_json(&p),
        "measure": m.name(),
        "formulas": cfg.formulas.name(),
        "kappa": real(kappa),
        "kappa_oracle": real(kappa_oracle),
        "kappa_residual": real((kappa - kappa_oracle).abs()),
        "c_n": real(c),
        "nu_paper": real(nu_paper),
        "nu_consistent": real(nu_consistent),
        "nu_oracle": real(nu_oracle),
        "nu_residual": real((nu_consistent - nu_oracle).abs()),
        "nu": real(nu),
        "expected_utility": real(eu),
        "expected_noisy_utility": real(deviator_expected_utility(&p, kappa, nu, kappa, nu, 0.0)),
        "expected_privacy_utility": real(expected_privacy_utility(&p, eu, nu, m)),
        "n_obs": n_obs,
        "pop_agents": real(pop_agents_at(&p, kappa, nu)),
        "pop_agents_common_noise": real(pop_agents_with_common_noise(&p, m, cfg.formulas)),
        "pop_aggregator": real(pop_aggregator_at(&p, kappa, nu, n_obs)?),
        "aggregator_error": real(aggregator_utility(&p, kappa, nu, n_obs)?),
        "aggregator_error_noiseless": real(aggregator_utility(&p, kappa, 0.0, n_obs)?),
    })))
}

pub fn simulate(cfg: &ExperimentConfig) -> Result<Body> {
    let seed = cfg.require_seed("simulate")?;
    let p = cfg.game_params()?;
    let profile = played_profile(cfg, &p)?;
    let n_obs = cfg.n_obs();
    let settings = MonteCarloSettings::new(cfg.s, cfg.replicates, seed, cfg.measure)
        .with_aggregator_sample(usize::try_from(n_obs)?);
    let report = run_monte_carlo(&p, &profile, &settings)?;
    let (k, nu) = (profile.kappa(), profile.nu());
    let agg_obs = p.population().players().map_or(n_obs, u64::from);
    Ok(Body::Record(json!({
        "params": params_json(&p),
        "measure": cfg.measure.name(),
        "profile": profile_json(&profile),
        "n_obs": agg_obs,
        "report": serde_json::to_value(&report)?,
        "closed_form": {
            "noiseless_utility": real(expected_utility(&p, k)),
            "base_utility": real(deviator_expected_utility(&p, k, nu, k, nu, 0.0)),
            "aggregator_sq_error": real(aggregator_utility(&p, k, nu, agg_obs)?),
            "noiseless_aggregator_sq_error": real(aggregator_utility(&p, k, 0.0, agg_obs)?),
            "separability_gap": 0.0,
        },
    })))
}

pub fn deviate(cfg: &ExperimentConfig) -> Result<Body> {
    let seed = cfg.require_seed("deviate")?;
    let p = cfg.game_params()?;
    let profile = played_profile(cfg, &p)?;
    let settings = CertificationSettings::new(cfg.s, cfg.replicates, seed)
        .with_default_cross_families(cfg.measure);
    let cert = certify_equilibrium(&p, cfg.measure, &profile, &settings)?;
    let worst = |e: Option<kbc_core::EvaluatedDeviation>| match e {
        Some(e) => json!({
            "gain": real(e.gain.gain),
            "se": real(e.gain.se),
            "kappa": real(e.deviation.kappa),
            "nu": real(e.deviation.noise.map_or(0.0, |n| n.variance())),
            "family": e.deviation.noise.map(|n| n.family().name()),
            "mean_shift": real(e.deviation.mean_shift),
        }),
        None => Value::Null,
    };
    Ok(Body::Record(json!({
        "params": params_json(&p),
        "measure": cfg.measure.name(),
        "profile": profile_json(&profile),
        "grid": {
            "kappa_points": settings.kappa_points,
            "nu_points": settings.nu_points,
            "nu_span": real(settings.nu_span),
            "mean_shifts": settings.mean_shifts.iter().map(|&m| real(m)).collect::<Vec<_>>(),
            "replicates_per_point": settings.replicates,
        },
        "grid_points": cert.grid_points,
        "monte_carlo_points": cert.monte_carlo_points,
        "max_closed_form": worst(cert.max_closed_form),
        "max_monte_carlo": worst(cert.max_monte_carlo),
        "closed_form_tolerance": real(settings.closed_form_tolerance),
        "se_multiple": real(settings.se_multiple),
        "closed_form_pass": cert.closed_form_pass,
        "monte_carlo_pass": cert.monte_carlo_pass,
        "verdict": if cert.pass { "PASS" } else { "FAIL" },
    })))
}

pub fn pop(cfg: &ExperimentConfig) -> Result<Body> {
    let p = cfg.game_params()?;
    let profile = played_profile(cfg, &p)?;
    let (k, nu) = (profile.kappa(), profile.nu());
    let n_obs = cfg.n_obs();
    let agg_obs = p.population().players().map_or(n_obs, u64::from);
    let mut record = json!({
        "params": params_json(&p),
        "measure": cfg.measure.name(),
        "formulas": cfg.formulas.name(),
        "profile": profile_json(&profile),
        "n_obs": n_obs,
        "expected_utility": real(expected_utility(&p, k)),
        "pop_agents": real(pop_agents_at(&p, k, nu)),
        "pop_aggregator": real(pop_aggregator_at(&p, k, nu, n_obs)?),
        "aggregator_error": real(aggregator_utility(&p, k, nu, n_obs)?),
        "aggregator_error_noiseless": real(aggregator_utility(&p, k, 0.0, n_obs)?),
    });
    if let Some(seed) = cfg.seed {
        let settings = MonteCarloSettings::new(cfg.s, cfg.replicates, seed, cfg.measure)
            .with_aggregator_sample(usize::try_from(n_obs)?);
        let report = run_monte_carlo(&p, &profile, &settings)?;
        record["monte_carlo"] = json!({
            "replicates": report.replicates,
            "seed": seed,
            "aggregator_n_obs": agg_obs,
            "agents_utility_ratio": serde_json::to_value(report.agents_utility_ratio)?,
            "aggregator_error_ratio": serde_json::to_value(report.aggregator_error_ratio)?,
        });
    }
    Ok(Body::Record(record))
}

pub const SWEEP_COLUMNS: [&str; 15] = [
    "alpha",
    "beta",
    "n",
    "sigma2_x",
    "sigma2_y",
    "measure",
    "formulas",
    "n_obs",
    "kappa",
    "nu_paper",
    "nu_consistent",
    "eu",
    "pop_agents",
    "pop_aggregator",
    "U_agg",
];

fn sweep_row(cfg: &ExperimentConfig) -> Result<Vec<Value>> {
    let p = cfg.game_params()?;
    let m = cfg.measure;
    let kappa = equilibrium_kappa(&p);
    let nu = optimal_noise_variance(&p, m, cfg.formulas);
    let n_obs = cfg.n_obs();
    Ok(vec![
        real(p.alpha()),
        real(p.beta()),
        match p.population() {
            Population::Finite(n) => json!(n),
            Population::Continuum => json!("continuum"),
        },
        real(p.sigma2_x()),
        real(p.sigma2_y()),
        json!(m.name()),
        json!(cfg.formulas.name()),
        json!(n_obs),
        real(kappa),
        real(optimal_noise_variance(&p, m, FormulaSet::Paper)),
        real(optimal_noise_variance(&p, m, FormulaSet::Consistent)),
        real(expected_utility(&p, kappa)),
        real(pop_agents_at(&p, kappa, nu)),
        real(pop_aggregator_at(&p, kappa, nu, n_obs)?),
        real(aggregator_utility(&p, kappa, nu, n_obs)?),
    ])
}

/// Cartesian product of the sweep axes, first axis slowest.
fn sweep_points(cfg: &ExperimentConfig) -> Vec<ExperimentConfig> {
    let mut points = vec![cfg.clone()];
    for axis in &cfg.sweep {
        points = points
            .iter()
            .flat_map(|c| axis.values.iter().map(|&v| c.with_parameter(&axis.name, v)))
            .collect();
    }
    points
}

pub fn sweep(cfg: &ExperimentConfig) -> Result<Body> {
    let points = sweep_points(cfg);
    for point in &points {
        if let Err(e) = point.game_params() {
            bail!("sweep point is invalid: {e}");
        }
    }
    let rows = points.par_iter().map(sweep_row).collect::<Result<Vec<_>>>()?;
    Ok(Body::Table(Table {
        columns: SWEEP_COLUMNS.to_vec(),
        rows,
    }))
}
