//! Candidate jitter models: the exponential and gamma families.
//!
//! Densities are evaluated in log space throughout. The exponential support
//! includes `v = 0` (unit step taken as 1 there).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{digamma, ln_gamma, trigamma};

/// Relative convergence tolerance on the gamma shape.
pub const GAMMA_TOL: f64 = 1e-10;
/// Newton iteration budget for the gamma shape.
pub const GAMMA_MAX_NEWTON_ITERS: usize = 100;
/// Shapes above this are treated as a degenerate (near-constant) sample.
pub const GAMMA_SHAPE_CAP: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Exponential = 0,
    Gamma = 1,
}

impl ModelKind {
    pub const ALL: [ModelKind; 2] = [ModelKind::Exponential, ModelKind::Gamma];

    /// Stable integer id, shared with the wire format.
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(ModelKind::Exponential),
            1 => Some(ModelKind::Gamma),
            _ => None,
        }
    }

    pub fn param_count(self) -> usize {
        match self {
            ModelKind::Exponential => 1,
            ModelKind::Gamma => 2,
        }
    }

    /// Smallest subset an MLE can be computed from.
    pub fn min_samples(self) -> usize {
        match self {
            ModelKind::Exponential => 1,
            ModelKind::Gamma => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Exponential => "exponential",
            ModelKind::Gamma => "gamma",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parameters of one candidate model.
///
/// The exponential is parameterized by its rate (1/seconds), the gamma by a
/// dimensionless shape and a scale in seconds. Build through
/// [`ModelParams::exponential`] / [`ModelParams::gamma`] to get validation;
/// everything that consumes parameters re-validates them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelParams {
    Exponential { rate: f64 },
    Gamma { shape: f64, scale: f64 },
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::ParameterDomain(format!("{name} must be positive and finite, got {x}")))
    }
}

impl ModelParams {
    pub fn exponential(rate: f64) -> Result<Self> {
        positive("exponential rate", rate)?;
        Ok(ModelParams::Exponential { rate })
    }

    pub fn gamma(shape: f64, scale: f64) -> Result<Self> {
        positive("gamma shape", shape)?;
        positive("gamma scale", scale)?;
        Ok(ModelParams::Gamma { shape, scale })
    }

    /// Builds from the kind's ordered parameter list (`[rate]` or `[shape, scale]`).
    pub fn from_values(kind: ModelKind, values: &[f64]) -> Result<Self> {
        if values.len() != kind.param_count() {
            return Err(Error::ParameterDomain(format!(
                "{kind} takes {} parameters, got {}",
                kind.param_count(),
                values.len()
            )));
        }
        match kind {
            ModelKind::Exponential => Self::exponential(values[0]),
            ModelKind::Gamma => Self::gamma(values[0], values[1]),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ModelParams::Exponential { rate } => positive("exponential rate", rate),
            ModelParams::Gamma { shape, scale } => {
                positive("gamma shape", shape)?;
                positive("gamma scale", scale)
            }
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::Exponential { .. } => ModelKind::Exponential,
            ModelParams::Gamma { .. } => ModelKind::Gamma,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match *self {
            ModelParams::Exponential { rate } => vec![rate],
            ModelParams::Gamma { shape, scale } => vec![shape, scale],
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            ModelParams::Exponential { rate } => 1.0 / rate,
            ModelParams::Gamma { shape, scale } => shape * scale,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            ModelParams::Exponential { rate } => 1.0 / (rate * rate),
            ModelParams::Gamma { shape, scale } => shape * scale * scale,
        }
    }

    /// Log-density at `v` seconds.
    pub fn log_pdf(&self, v: f64) -> Result<f64> {
        self.validate()?;
        if !v.is_finite() {
            return Err(Error::ParameterDomain(format!("jitter value must be finite, got {v}")));
        }
        match *self {
            ModelParams::Exponential { rate } => {
                if v < 0.0 {
                    Ok(f64::NEG_INFINITY)
                } else {
                    Ok(rate.ln() - rate * v)
                }
            }
            ModelParams::Gamma { shape, scale } => {
                if v < 0.0 {
                    return Ok(f64::NEG_INFINITY);
                }
                if v == 0.0 {
                    return if shape > 1.0 {
                        Ok(f64::NEG_INFINITY)
                    } else if shape == 1.0 {
                        Ok(-scale.ln())
                    } else {
                        Err(Error::SingularDensity { shape })
                    };
                }
                Ok((shape - 1.0) * v.ln() - v / scale - shape * scale.ln() - ln_gamma(shape)?)
            }
        }
    }

    /// Sum of log-densities over `samples`.
    pub fn log_likelihood(&self, samples: &[f64]) -> Result<f64> {
        samples.iter().try_fold(0.0, |acc, &v| Ok(acc + self.log_pdf(v)?))
    }
}

impl fmt::Display for ModelParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelParams::Exponential { rate } => write!(f, "exponential(rate={rate})"),
            ModelParams::Gamma { shape, scale } => write!(f, "gamma(shape={shape}, scale={scale})"),
        }
    }
}

fn check_samples(samples: &[f64], needed: usize) -> Result<()> {
    if samples.len() < needed {
        return Err(Error::InsufficientData { needed, got: samples.len() });
    }
    if let Some((index, &value)) = samples.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::NonPositiveSample { index, value });
    }
    Ok(())
}

/// Closed-form exponential MLE: rate = 1 / mean.
pub fn mle_exponential(samples: &[f64]) -> Result<ModelParams> {
    check_samples(samples, ModelKind::Exponential.min_samples())?;
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    ModelParams::exponential(1.0 / mean)
}

/// Method-of-moments gamma guess `(shape, scale)` using the population
/// variance. Diagnostic only; the MLE does not start from it.
pub fn gamma_moment_guess(samples: &[f64]) -> Result<(f64, f64)> {
    check_samples(samples, ModelKind::Gamma.min_samples())?;
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    if var <= 0.0 {
        return Err(Error::DegenerateData("zero sample variance".into()));
    }
    Ok((mean * mean / var, var / mean))
}

/// The statistic `ln(mean) − mean(ln v)` the gamma shape equation is driven by.
pub fn gamma_shape_statistic(samples: &[f64]) -> f64 {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let mean_log = samples.iter().map(|v| v.ln()).sum::<f64>() / n;
    mean.ln() - mean_log
}

/// Gamma MLE with the package defaults for tolerance and iteration budget.
pub fn mle_gamma_default(samples: &[f64]) -> Result<ModelParams> {
    mle_gamma(samples, GAMMA_TOL, GAMMA_MAX_NEWTON_ITERS)
}

/// Gamma maximum-likelihood fit.
///
/// Solves `ln a − ψ(a) = s` for the shape by Newton's method from the
/// closed-form approximation `a₀ = (3 − s + √((s−3)² + 24s)) / (12s)`, then
/// sets `scale = mean / a`. Stops once successive shapes differ by at most
/// `tol · a`.
pub fn mle_gamma(samples: &[f64], tol: f64, max_newton_iters: usize) -> Result<ModelParams> {
    check_samples(samples, ModelKind::Gamma.min_samples())?;
    if samples.iter().all(|&v| v == samples[0]) {
        return Err(Error::DegenerateData("all samples are equal, gamma shape is unbounded".into()));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let s = gamma_shape_statistic(samples);
    if s.is_nan() || s <= 0.0 || !s.is_finite() {
        return Err(Error::DegenerateData(format!("shape statistic {s} is not positive")));
    }

    let mut shape = (3.0 - s + ((s - 3.0) * (s - 3.0) + 24.0 * s).sqrt()) / (12.0 * s);
    if shape > GAMMA_SHAPE_CAP {
        return Err(Error::DegenerateData(format!("gamma shape exceeds cap {GAMMA_SHAPE_CAP}")));
    }
    for _ in 0..max_newton_iters {
        let residual = shape.ln() - digamma(shape)? - s;
        let slope = 1.0 / shape - trigamma(shape)?;
        let mut next = shape - residual / slope;
        if next <= 0.0 {
            // The residual is convex and decreasing; an overshoot past zero
            // only happens from the right, so halving keeps the iterate bracketed.
            next = shape / 2.0;
        }
        if next > GAMMA_SHAPE_CAP {
            return Err(Error::DegenerateData(format!("gamma shape exceeds cap {GAMMA_SHAPE_CAP}")));
        }
        let done = (next - shape).abs() <= tol * shape;
        shape = next;
        if done {
            return ModelParams::gamma(shape, mean / shape);
        }
    }
    Err(Error::NonConvergence { iterations: max_newton_iters, last_shape: shape })
}

/// MLE for the given family with default settings.
pub fn fit(kind: ModelKind, samples: &[f64]) -> Result<ModelParams> {
    match kind {
        ModelKind::Exponential => mle_exponential(samples),
        ModelKind::Gamma => mle_gamma_default(samples),
    }
}
