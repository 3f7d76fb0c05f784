//! Experiment configuration: JSON file, command-line overrides, validation.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use kbc_core::{FormulaSet, GameParams, NoiseFamily, Population, PrivacyMeasure};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    Gaussian,
    Uniform,
    TwoPoint,
}

/// Parameters a sweep axis may vary.
pub const SWEEP_NAMES: [&str; 5] = ["alpha", "beta", "n", "sigma2_x", "sigma2_y"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub name: String,
    pub values: Vec<f64>,
}

impl SweepAxis {
    /// Parses `name=v1,v2,...`.
    pub fn parse(text: &str) -> Result<Self> {
        let (name, values) = text
            .split_once('=')
            .with_context(|| format!("sweep axis `{text}` is not of the form name=v1,v2,..."))?;
        let values = values
            .split(',')
            .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad sweep value `{v}`")))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { name: name.trim().to_string(), values })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub alpha: f64,
    pub beta: f64,
    /// Number of players, `null` for the continuum.
    pub n: Option<u32>,
    pub sigma2_x: f64,
    pub sigma2_y: f64,
    pub measure: PrivacyMeasure,
    pub formulas: FormulaSet,
    pub family: FamilyName,
    pub two_point_high: f64,
    pub two_point_prob: f64,
    /// Played weight instead of the equilibrium one.
    pub kappa: Option<f64>,
    /// Played noise variance instead of the equilibrium one.
    pub nu: Option<f64>,
    pub s: f64,
    pub replicates: u64,
    pub seed: Option<u64>,
    /// Agents the aggregator observes; defaults to `n`, or 100 in the
    /// continuum.
    pub n_obs: Option<u64>,
    pub sweep: Vec<SweepAxis>,
    pub format: Option<Format>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            beta: 0.0,
            n: None,
            sigma2_x: 1.0,
            sigma2_y: 1.0,
            measure: PrivacyMeasure::Precision,
            formulas: FormulaSet::Consistent,
            family: FamilyName::Gaussian,
            two_point_high: 1.0,
            two_point_prob: 0.3,
            kappa: None,
            nu: None,
            s: 0.0,
            replicates: 100_000,
            seed: None,
            n_obs: None,
            sweep: Vec::new(),
            format: None,
        }
    }
}

impl ExperimentConfig {
    /// Reads a config file, or the config embedded in an earlier output
    /// (`meta.config` of a JSON output, the `# config:` line of a CSV one).
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let embedded = text
            .lines()
            .find_map(|l| l.strip_prefix(crate::output::CONFIG_PREFIX));
        let value: serde_json::Value = match embedded {
            Some(json) => serde_json::from_str(json),
            None => serde_json::from_str(&text),
        }
        .with_context(|| format!("{} is not a JSON config or a kbc output", path.display()))?;
        let value = match value.pointer("/meta/config") {
            Some(inner) => inner.clone(),
            None => value,
        };
        serde_json::from_value(value).with_context(|| format!("invalid config in {}", path.display()))
    }

    pub fn population(&self) -> Population {
        self.n.map_or(Population::Continuum, Population::Finite)
    }

    pub fn game_params(&self) -> Result<GameParams> {
        Ok(GameParams::new(self.alpha, self.beta, self.population(), self.sigma2_x, self.sigma2_y)?)
    }

    pub fn noise_family(&self) -> NoiseFamily {
        match self.family {
            FamilyName::Gaussian => NoiseFamily::Gaussian,
            FamilyName::Uniform => NoiseFamily::Uniform,
            FamilyName::TwoPoint => NoiseFamily::TwoPoint {
                high: self.two_point_high,
                prob_high: self.two_point_prob,
            },
        }
    }

    pub fn n_obs(&self) -> u64 {
        self.n_obs.unwrap_or_else(|| self.n.map_or(100, u64::from))
    }

    pub fn require_seed(&self, command: &str) -> Result<u64> {
        self.seed
            .with_context(|| format!("`{command}` is stochastic and needs --seed (or \"seed\" in the config)"))
    }

    /// Checks everything that does not depend on the command.
    pub fn validate(&self) -> Result<()> {
        self.game_params()?;
        if self.replicates < 1 {
            bail!("replicates must be at least 1");
        }
        if self.n_obs == Some(0) {
            bail!("n_obs must be at least 1");
        }
        if let Some(k) = self.kappa {
            if !(0.0..=1.0).contains(&k) {
                bail!("kappa = {k} is outside [0, 1]");
            }
        }
        if let Some(nu) = self.nu {
            if !(nu.is_finite() && nu >= 0.0) {
                bail!("nu = {nu} must be finite and non-negative");
            }
        }
        if self.family == FamilyName::TwoPoint && !(self.two_point_prob > 0.0 && self.two_point_prob < 1.0) {
            bail!("two_point_prob = {} must lie in (0, 1)", self.two_point_prob);
        }
        for axis in &self.sweep {
            if !SWEEP_NAMES.contains(&axis.name.as_str()) {
                bail!("unknown sweep parameter `{}` (expected one of {})", axis.name, SWEEP_NAMES.join(", "));
            }
            if axis.values.is_empty() {
                bail!("sweep axis `{}` has no values", axis.name);
            }
            if axis.name == "n" {
                for &v in &axis.values {
                    if v.fract() != 0.0 || !(2.0..=f64::from(u32::MAX)).contains(&v) {
                        bail!("sweep value n = {v} is not an integer of at least 2");
                    }
                }
            }
        }
        Ok(())
    }

    /// Copy with one sweep parameter set.
    pub fn with_parameter(&self, name: &str, value: f64) -> Self {
        let mut c = self.clone();
        match name {
            "alpha" => c.alpha = value,
            "beta" => c.beta = value,
            "n" => c.n = Some(value as u32),
            "sigma2_x" => c.sigma2_x = value,
            "sigma2_y" => c.sigma2_y = value,
            _ => unreachable!("validated sweep name {name}"),
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sweep_axes() {
        let a = SweepAxis::parse("beta=0, 0.25,0.5").unwrap();
        assert_eq!(a.name, "beta");
        assert_eq!(a.values, vec![0.0, 0.25, 0.5]);
        assert!(SweepAxis::parse("beta").is_err());
        assert!(SweepAxis::parse("beta=x").is_err());
    }

    #[test]
    fn validation() {
        let mut c = ExperimentConfig::default();
        c.validate().unwrap();
        c.n = Some(1);
        assert!(c.validate().is_err());
        c.n = Some(3);
        c.sweep = vec![SweepAxis { name: "gamma".into(), values: vec![1.0] }];
        assert!(c.validate().is_err());
        c.sweep = vec![SweepAxis { name: "n".into(), values: vec![2.5] }];
        assert!(c.validate().is_err());
        c.sweep.clear();
        c.beta = 1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn partial_json_uses_defaults() {
        let c: ExperimentConfig = serde_json::from_str(r#"{"alpha": 0.7, "n": 4}"#).unwrap();
        assert_eq!(c.alpha, 0.7);
        assert_eq!(c.n_obs(), 4);
        assert_eq!(c.beta, 0.0);
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"alpah": 0.7}"#).is_err());
    }
}
