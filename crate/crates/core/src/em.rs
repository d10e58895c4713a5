//! Hard-assignment EM over a fixed set of candidate models.
//!
//! Every candidate starts from an MLE on the whole trace. Each iteration
//! computes per-sample responsibilities (normalized densities, no mixing
//! weights), commits each sample to its argmax model, and refits every model
//! on the samples it owns. The loop stops once a refit leaves the label
//! vector unchanged, or after `max_iters` refits.

use serde::Serialize;

use crate::distributions::{self, ModelKind, ModelParams};
use crate::error::{Error, Result};
use crate::trace::JitterTrace;

pub const DEFAULT_MAX_ITERS: usize = 50;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmConfig {
    pub max_iters: usize,
    pub candidates: Vec<ModelKind>,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig { max_iters: DEFAULT_MAX_ITERS, candidates: vec![ModelKind::Exponential, ModelKind::Gamma] }
    }
}

impl EmConfig {
    pub fn with_max_iters(max_iters: usize) -> Self {
        EmConfig { max_iters, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        if self.candidates.len() < 2 {
            return Err(Error::InvalidConfig("at least two candidate models are required".into()));
        }
        for (i, k) in self.candidates.iter().enumerate() {
            if self.candidates[..i].contains(k) {
                return Err(Error::InvalidConfig(format!("candidate {k} listed twice")));
            }
        }
        Ok(())
    }
}

/// Row-major N×M matrix of per-sample responsibilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponsibilityMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    fallback_rows: Vec<usize>,
}

impl ResponsibilityMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.values[j * self.cols..(j + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.cols)
    }

    /// Samples to which every model assigned zero density; they were given
    /// entirely to model 0.
    pub fn fallback_rows(&self) -> &[usize] {
        &self.fallback_rows
    }

    /// Builds a matrix from explicit rows. Rows must be nonnegative and sum to 1.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if cols == 0 {
            return Err(Error::InvalidConfig("responsibility rows must be nonempty".into()));
        }
        let mut values = Vec::with_capacity(rows.len() * cols);
        for (j, r) in rows.iter().enumerate() {
            let sum: f64 = r.iter().sum();
            if r.len() != cols || r.iter().any(|z| z.is_nan() || *z < 0.0) || (sum - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidConfig(format!("row {j} is not a probability vector")));
            }
            values.extend_from_slice(r);
        }
        Ok(ResponsibilityMatrix { rows: rows.len(), cols, values, fallback_rows: Vec::new() })
    }
}

/// Softmax of one row of log-densities into `out`. Returns `true` when every
/// density was zero and the row fell back to model 0.
pub fn normalize_log_densities(log_densities: &[f64], out: &mut [f64]) -> bool {
    let max = log_densities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        out.fill(0.0);
        out[0] = 1.0;
        return true;
    }
    if max == f64::INFINITY {
        let hits = log_densities.iter().filter(|l| **l == f64::INFINITY).count() as f64;
        for (o, l) in out.iter_mut().zip(log_densities) {
            *o = if *l == f64::INFINITY { 1.0 / hits } else { 0.0 };
        }
        return false;
    }
    let mut sum = 0.0;
    for (o, l) in out.iter_mut().zip(log_densities) {
        *o = (l - max).exp();
        sum += *o;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
    false
}

fn log_density(params: &ModelParams, v: f64) -> f64 {
    // Samples are positive, so the only error (a singular gamma at zero) cannot occur.
    params.log_pdf(v).unwrap_or(f64::INFINITY)
}

/// E-step: responsibilities of each model for each sample.
pub fn e_step(trace: &JitterTrace, params: &[ModelParams]) -> Result<ResponsibilityMatrix> {
    if params.is_empty() {
        return Err(Error::InvalidConfig("no models to evaluate".into()));
    }
    for p in params {
        p.validate()?;
    }
    let cols = params.len();
    let mut values = vec![0.0; trace.len() * cols];
    let mut fallback_rows = Vec::new();
    let mut logs = vec![0.0; cols];
    for (j, (&v, out)) in trace.samples().iter().zip(values.chunks_exact_mut(cols)).enumerate() {
        for (l, p) in logs.iter_mut().zip(params) {
            *l = log_density(p, v);
        }
        if normalize_log_densities(&logs, out) {
            fallback_rows.push(j);
        }
    }
    Ok(ResponsibilityMatrix { rows: trace.len(), cols, values, fallback_rows })
}

/// Argmax per row; ties go to the lowest model index.
pub fn hard_assign(resp: &ResponsibilityMatrix) -> Vec<usize> {
    resp.iter_rows()
        .map(|row| {
            let mut best = 0;
            for (i, &z) in row.iter().enumerate().skip(1) {
                if z > row[best] {
                    best = i;
                }
            }
            best
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EmWarning {
    /// A model kept its previous parameters because its subset could not be fitted.
    Frozen { iteration: usize, model: usize, kind: ModelKind, subset_len: usize, reason: String },
    /// Samples with zero density under every model were given to model 0.
    ZeroDensity { iteration: usize, samples: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MStep {
    pub params: Vec<ModelParams>,
    pub warnings: Vec<EmWarning>,
}

/// M-step: refit each model on the samples it owns. A model whose subset is
/// too small or whose fit fails keeps `prev_params[i]`.
pub fn m_step(trace: &JitterTrace, labels: &[usize], prev_params: &[ModelParams]) -> Result<MStep> {
    m_step_at(trace, labels, prev_params, 0)
}

fn m_step_at(trace: &JitterTrace, labels: &[usize], prev_params: &[ModelParams], iteration: usize) -> Result<MStep> {
    if labels.len() != trace.len() {
        return Err(Error::InvalidConfig(format!(
            "{} labels for a trace of {} samples",
            labels.len(),
            trace.len()
        )));
    }
    let m = prev_params.len();
    if let Some(&bad) = labels.iter().find(|&&l| l >= m) {
        return Err(Error::InvalidConfig(format!("label {bad} does not name one of {m} models")));
    }
    let mut subsets: Vec<Vec<f64>> = vec![Vec::new(); m];
    for (&v, &l) in trace.samples().iter().zip(labels) {
        subsets[l].push(v);
    }
    let mut params = Vec::with_capacity(m);
    let mut warnings = Vec::new();
    for (i, (subset, prev)) in subsets.iter().zip(prev_params).enumerate() {
        let kind = prev.kind();
        let fitted = if subset.len() < kind.min_samples() {
            Err(Error::InsufficientData { needed: kind.min_samples(), got: subset.len() })
        } else {
            distributions::fit(kind, subset)
        };
        match fitted {
            Ok(p) => params.push(p),
            Err(e) => {
                warnings.push(EmWarning::Frozen {
                    iteration,
                    model: i,
                    kind,
                    subset_len: subset.len(),
                    reason: e.to_string(),
                });
                params.push(*prev);
            }
        }
    }
    Ok(MStep { params, warnings })
}

/// Σ_j log p_{label(j)}(v_j).
pub fn classification_loglik(trace: &JitterTrace, params: &[ModelParams], labels: &[usize]) -> f64 {
    trace.samples().iter().zip(labels).map(|(&v, &l)| log_density(&params[l], v)).sum()
}

/// Result of a fit.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// Owning model index per sample.
    pub labels: Vec<usize>,
    pub iterations_used: usize,
    pub converged: bool,
    pub final_params: Vec<ModelParams>,
    pub classification_loglik: f64,
    /// Classification log-likelihood after each refit.
    pub loglik_history: Vec<f64>,
    pub warnings: Vec<EmWarning>,
}

impl Assignment {
    pub fn label_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.final_params.len()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Fraction of samples owned by model 0.
    pub fn fraction_model0(&self) -> f64 {
        if self.labels.is_empty() {
            return 0.0;
        }
        self.labels.iter().filter(|&&l| l == 0).count() as f64 / self.labels.len() as f64
    }
}

/// Labels implied by `params`: one E-step followed by the hard assignment.
pub fn assign_labels(trace: &JitterTrace, params: &[ModelParams]) -> Result<Vec<usize>> {
    Ok(hard_assign(&e_step(trace, params)?))
}

/// One full E+M pass from `params`.
pub fn em_pass(trace: &JitterTrace, params: &[ModelParams]) -> Result<(Vec<usize>, Vec<ModelParams>)> {
    let labels = assign_labels(trace, params)?;
    let next = m_step(trace, &labels, params)?.params;
    Ok((labels, next))
}

/// Fits every candidate on the whole trace.
pub fn initial_params(trace: &JitterTrace, candidates: &[ModelKind]) -> Result<Vec<ModelParams>> {
    candidates
        .iter()
        .map(|&kind| {
            distributions::fit(kind, trace.samples())
                .map_err(|e| Error::Setup { model: kind, reason: Box::new(e) })
        })
        .collect()
}

/// Runs hard-assignment EM to stabilization or `config.max_iters` refits.
pub fn em_fit(trace: &JitterTrace, config: &EmConfig) -> Result<Assignment> {
    config.validate()?;
    let mut params = initial_params(trace, &config.candidates)?;
    let mut warnings = Vec::new();
    let mut loglik_history = Vec::with_capacity(config.max_iters);

    let resp = e_step(trace, &params)?;
    note_fallbacks(&resp, 1, &mut warnings);
    let mut labels = hard_assign(&resp);
    let mut converged = false;
    let mut iterations_used = 0;

    for iteration in 1..=config.max_iters {
        let step = m_step_at(trace, &labels, &params, iteration)?;
        params = step.params;
        warnings.extend(step.warnings);
        loglik_history.push(classification_loglik(trace, &params, &labels));
        iterations_used = iteration;

        // The E-step of the next iteration doubles as the stabilization check.
        let resp = e_step(trace, &params)?;
        let next = hard_assign(&resp);
        if next == labels {
            converged = true;
            break;
        }
        if iteration < config.max_iters {
            note_fallbacks(&resp, iteration + 1, &mut warnings);
            labels = next;
        }
    }

    Ok(Assignment {
        classification_loglik: *loglik_history.last().expect("at least one iteration"),
        labels,
        iterations_used,
        converged,
        final_params: params,
        loglik_history,
        warnings,
    })
}

fn note_fallbacks(resp: &ResponsibilityMatrix, iteration: usize, warnings: &mut Vec<EmWarning>) {
    if !resp.fallback_rows().is_empty() {
        warnings.push(EmWarning::ZeroDensity { iteration, samples: resp.fallback_rows().len() });
    }
}
