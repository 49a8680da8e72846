use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Corruption applied to a clean signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NoiseKind {
    /// `g = f + z`, `z ~ N(0, σ²)` i.i.d. per vertex.
    Gaussian { sigma: f64 },
    /// `g = u·f`, `u ~ Unif[0, 1]`.
    UniformScale,
    /// Each entry is replaced by `fill` with probability `p`.
    BernoulliDropout {
        p: f64,
        #[serde(default)]
        fill: f64,
    },
    /// Each entry is replaced with probability `p` by `lo` or `hi`, equally likely.
    SaltPepper { p: f64, lo: f64, hi: f64 },
}

impl NoiseKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Gaussian { .. } => "gaussian",
            Self::UniformScale => "uniform-scale",
            Self::BernoulliDropout { .. } => "bernoulli-dropout",
            Self::SaltPepper { .. } => "salt-pepper",
        }
    }

    /// The scalar swept in experiment tables: σ or p (0 for uniform scaling).
    pub fn level(&self) -> f64 {
        match *self {
            Self::Gaussian { sigma } => sigma,
            Self::UniformScale => 0.0,
            Self::BernoulliDropout { p, .. } | Self::SaltPepper { p, .. } => p,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("probability must lie in [0, 1], got {p}")))
            }
        };
        match *self {
            Self::Gaussian { sigma } if !(sigma >= 0.0 && sigma.is_finite()) => {
                Err(Error::InvalidArgument(format!("sigma must be >= 0, got {sigma}")))
            }
            Self::BernoulliDropout { p, fill } => {
                prob(p)?;
                finite(fill)
            }
            Self::SaltPepper { p, lo, hi } => {
                prob(p)?;
                finite(lo)?;
                finite(hi)
            }
            _ => Ok(()),
        }
    }
}

fn finite(v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("noise parameter must be finite, got {v}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    #[serde(flatten)]
    pub kind: NoiseKind,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, seed: u64) -> Self {
        Self { kind, seed }
    }
}

pub fn add_noise(f: &[f64], spec: &NoiseSpec) -> Result<Vec<f64>> {
    spec.kind.validate()?;
    let mut rng = crate::rng::stream(spec.seed, &[crate::rng::label(spec.kind.name())]);
    Ok(match spec.kind {
        NoiseKind::Gaussian { sigma } => {
            if sigma == 0.0 {
                return Ok(f.to_vec());
            }
            let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            f.iter().map(|v| v + normal.sample(&mut rng)).collect()
        }
        NoiseKind::UniformScale => f.iter().map(|v| v * rng.random::<f64>()).collect(),
        NoiseKind::BernoulliDropout { p, fill } => f
            .iter()
            .map(|&v| if rng.random::<f64>() < p { fill } else { v })
            .collect(),
        NoiseKind::SaltPepper { p, lo, hi } => f
            .iter()
            .map(|&v| {
                if rng.random::<f64>() < p {
                    if rng.random::<bool>() {
                        hi
                    } else {
                        lo
                    }
                } else {
                    v
                }
            })
            .collect(),
    })
}
