//! Mean-zero noise-generating distributions.
//!
//! Every family is parameterized by its variance `nu`; the family-specific
//! shape parameters only control how that variance is spread. A variance of
//! zero is the degenerate "no noise" distribution.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum NoiseFamily {
    Gaussian,
    /// Uniform on `[-a, a]` with `a = sqrt(3 nu)`.
    Uniform,
    /// Two atoms. `high` is the nominal high value taken with probability
    /// `prob_high`; the low value is placed so the atoms have variance `nu`,
    /// then both atoms are shifted so the mean is zero.
    TwoPoint { high: f64, prob_high: f64 },
}

impl NoiseFamily {
    pub fn name(&self) -> &'static str {
        match self {
            NoiseFamily::Gaussian => "gaussian",
            NoiseFamily::Uniform => "uniform",
            NoiseFamily::TwoPoint { .. } => "two_point",
        }
    }
}

/// A mean-zero noise distribution with variance `nu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseSpec {
    family: NoiseFamily,
    nu: f64,
}

/// Which scale an entropy value lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyScale {
    Differential,
    /// Shannon entropy of a discrete distribution; not comparable with
    /// differential entropies.
    Discrete,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Entropy {
    pub nats: f64,
    pub scale: EntropyScale,
}

impl NoiseSpec {
    pub fn new(family: NoiseFamily, nu: f64) -> Result<Self> {
        if !(nu.is_finite() && nu >= 0.0) {
            return Err(invalid("nu", format!("{nu} is not a finite non-negative variance")));
        }
        if let NoiseFamily::TwoPoint { high, prob_high } = family {
            if !(prob_high > 0.0 && prob_high < 1.0) {
                return Err(invalid("prob_high", format!("{prob_high} is outside (0, 1)")));
            }
            if !high.is_finite() {
                return Err(invalid("high", "must be finite"));
            }
        }
        Ok(Self { family, nu })
    }

    pub fn gaussian(nu: f64) -> Result<Self> {
        Self::new(NoiseFamily::Gaussian, nu)
    }

    pub fn uniform(nu: f64) -> Result<Self> {
        Self::new(NoiseFamily::Uniform, nu)
    }

    pub fn two_point(nu: f64, high: f64, prob_high: f64) -> Result<Self> {
        Self::new(NoiseFamily::TwoPoint { high, prob_high }, nu)
    }

    /// The same family at a different variance.
    pub fn with_variance(&self, nu: f64) -> Result<Self> {
        Self::new(self.family, nu)
    }

    pub fn family(&self) -> NoiseFamily {
        self.family
    }

    pub fn variance(&self) -> f64 {
        self.nu
    }

    pub fn mean(&self) -> f64 {
        0.0
    }

    pub fn is_degenerate(&self) -> bool {
        self.nu == 0.0
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self.family, NoiseFamily::Gaussian)
    }

    /// Half-width of the uniform support.
    pub fn uniform_half_width(&self) -> f64 {
        (3.0 * self.nu).sqrt()
    }

    /// `(atoms, probabilities)` of the recentred two-point distribution.
    pub fn atoms(&self) -> Option<([f64; 2], [f64; 2])> {
        match self.family {
            NoiseFamily::TwoPoint { high, prob_high } => {
                let gap = (self.nu / (prob_high * (1.0 - prob_high))).sqrt();
                let low = high - gap;
                let shift = prob_high * high + (1.0 - prob_high) * low;
                Some(([high - shift, low - shift], [prob_high, 1.0 - prob_high]))
            }
            _ => None,
        }
    }

    /// Density of the noise at `z`; `None` for the discrete family.
    pub fn density(&self, z: f64) -> Option<f64> {
        match self.family {
            NoiseFamily::Gaussian => {
                Some((-0.5 * z * z / self.nu).exp() / (2.0 * std::f64::consts::PI * self.nu).sqrt())
            }
            NoiseFamily::Uniform => {
                let a = self.uniform_half_width();
                Some(if z.abs() <= a { 0.5 / a } else { 0.0 })
            }
            NoiseFamily::TwoPoint { .. } => None,
        }
    }

    /// Entropy in nats. Differential for continuous families, Shannon for
    /// the two-point family.
    pub fn entropy(&self) -> Result<Entropy> {
        if self.is_degenerate() {
            return Err(Error::DegenerateEntropy);
        }
        Ok(match self.family {
            NoiseFamily::Gaussian => Entropy {
                nats: gaussian_entropy(self.nu),
                scale: EntropyScale::Differential,
            },
            NoiseFamily::Uniform => Entropy {
                nats: (2.0 * self.uniform_half_width()).ln(),
                scale: EntropyScale::Differential,
            },
            NoiseFamily::TwoPoint { prob_high: p, .. } => Entropy {
                nats: -p * p.ln() - (1.0 - p) * (1.0 - p).ln(),
                scale: EntropyScale::Discrete,
            },
        })
    }

    /// One draw.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.is_degenerate() {
            return 0.0;
        }
        match self.family {
            NoiseFamily::Gaussian => self.nu.sqrt() * rng.sample::<f64, _>(StandardNormal),
            NoiseFamily::Uniform => {
                let a = self.uniform_half_width();
                a * (2.0 * rng.random::<f64>() - 1.0)
            }
            NoiseFamily::TwoPoint { prob_high, .. } => {
                let (atoms, _) = self.atoms().expect("two-point family");
                if rng.random::<f64>() < prob_high {
                    atoms[0]
                } else {
                    atoms[1]
                }
            }
        }
    }

    /// `count` reproducible draws from a ChaCha8 stream seeded with `seed`.
    pub fn sample(&self, seed: u64, count: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| self.draw(&mut rng)).collect()
    }
}

/// `0.5 ln(2 pi e nu)`.
pub fn gaussian_entropy(nu: f64) -> f64 {
    0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * nu).ln()
}
