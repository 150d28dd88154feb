use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma, Triangular, Uniform};
use serde::{Deserialize, Serialize};

use crate::model::{Model, ParamKind};

use super::SensitivityError;

/// Relative standard deviation assumed when a beta or gamma spec gives no
/// spread of its own.
pub const DEFAULT_RELATIVE_SD: f64 = 0.10;

/// Sampling family for one parameter. Beta and gamma without explicit
/// hyperparameters are moment-matched to the base value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    Beta {
        #[serde(default)]
        alpha: Option<f64>,
        #[serde(default)]
        beta: Option<f64>,
        /// Standard deviation; ignored when alpha and beta are given.
        #[serde(default)]
        sd: Option<f64>,
    },
    Gamma {
        #[serde(default)]
        shape: Option<f64>,
        #[serde(default)]
        scale: Option<f64>,
        #[serde(default)]
        sd: Option<f64>,
    },
    Uniform {
        low: f64,
        high: f64,
    },
    Triangular {
        low: f64,
        mode: f64,
        high: f64,
    },
    /// Point mass, at the base value unless given.
    Fixed {
        #[serde(default)]
        value: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    pub path: String,
    #[serde(flatten)]
    pub family: Family,
    /// Reserved for correlated sampling; currently ignored.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
}

impl DistributionSpec {
    pub fn new(path: &str, family: Family) -> Self {
        DistributionSpec {
            path: path.to_string(),
            family,
            group: None,
        }
    }

    pub fn fixed(path: &str) -> Self {
        DistributionSpec::new(path, Family::Fixed { value: None })
    }
}

/// A spec bound to concrete hyperparameters.
#[derive(Debug, Clone, Copy)]
pub enum Sampler {
    Point(f64),
    Beta(Beta<f64>),
    Gamma(Gamma<f64>),
    Uniform(Uniform<f64>),
    Triangular(Triangular<f64>),
}

impl Sampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Point(v) => *v,
            Sampler::Beta(d) => d.sample(rng),
            Sampler::Gamma(d) => d.sample(rng),
            Sampler::Uniform(d) => d.sample(rng),
            Sampler::Triangular(d) => d.sample(rng),
        }
    }
}

/// Default spread for a probability: relative to the nearer bound so that
/// values close to 1 keep a feasible beta.
fn default_beta_sd(mean: f64) -> f64 {
    DEFAULT_RELATIVE_SD * mean.min(1.0 - mean)
}

fn bad(spec: &DistributionSpec, message: impl Into<String>) -> SensitivityError {
    SensitivityError::Distribution {
        path: spec.path.clone(),
        message: message.into(),
    }
}

/// Resolves a spec against the model's base value of its parameter.
pub fn resolve(spec: &DistributionSpec, model: &Model) -> Result<Sampler, SensitivityError> {
    let base = model.get_param(&spec.path)?;
    let kind = model.param_kind(&spec.path)?;
    let sampler = match spec.family {
        Family::Fixed { value } => Sampler::Point(value.unwrap_or(base)),
        Family::Beta { alpha, beta, sd } => {
            if kind != ParamKind::Probability {
                return Err(bad(spec, "beta is only valid for probabilities"));
            }
            let (a, b) = match (alpha, beta) {
                (Some(a), Some(b)) => (a, b),
                (None, None) => {
                    let sd = sd.unwrap_or_else(|| default_beta_sd(base));
                    if sd == 0.0 || base == 0.0 || base == 1.0 {
                        return Ok(Sampler::Point(base));
                    }
                    let var = sd * sd;
                    if var >= base * (1.0 - base) {
                        return Err(bad(spec, format!("sd {sd} is too wide for a beta with mean {base}")));
                    }
                    let k = base * (1.0 - base) / var - 1.0;
                    (base * k, (1.0 - base) * k)
                }
                _ => return Err(bad(spec, "beta needs both alpha and beta")),
            };
            Sampler::Beta(Beta::new(a, b).map_err(|e| bad(spec, e.to_string()))?)
        }
        Family::Gamma { shape, scale, sd } => {
            if kind != ParamKind::NonNegative {
                return Err(bad(spec, "gamma is only valid for non-negative amounts"));
            }
            let (k, theta) = match (shape, scale) {
                (Some(k), Some(t)) => (k, t),
                (None, None) => {
                    let sd = sd.unwrap_or(DEFAULT_RELATIVE_SD * base);
                    if sd == 0.0 || base == 0.0 {
                        return Ok(Sampler::Point(base));
                    }
                    let k = (base / sd).powi(2);
                    (k, base / k)
                }
                _ => return Err(bad(spec, "gamma needs both shape and scale")),
            };
            Sampler::Gamma(Gamma::new(k, theta).map_err(|e| bad(spec, e.to_string()))?)
        }
        Family::Uniform { low, high } => {
            check_support(spec, kind, low, high)?;
            Sampler::Uniform(Uniform::new_inclusive(low, high).map_err(|e| bad(spec, e.to_string()))?)
        }
        Family::Triangular { low, mode, high } => {
            check_support(spec, kind, low, high)?;
            if low == high {
                Sampler::Point(low)
            } else {
                Sampler::Triangular(Triangular::new(low, high, mode).map_err(|e| bad(spec, e.to_string()))?)
            }
        }
    };
    Ok(sampler)
}

fn check_support(spec: &DistributionSpec, kind: ParamKind, low: f64, high: f64) -> Result<(), SensitivityError> {
    if !(low.is_finite() && high.is_finite() && low <= high) {
        return Err(bad(spec, format!("invalid range [{low}, {high}]")));
    }
    let ok = match kind {
        ParamKind::Probability => low >= 0.0 && high <= 1.0,
        ParamKind::NonNegative => low >= 0.0,
    };
    if ok {
        Ok(())
    } else {
        Err(bad(
            spec,
            format!("range [{low}, {high}] leaves the parameter's domain"),
        ))
    }
}
