//! Jitter traces: file ingest, plot-ready indicator output and seeded
//! synthetic generation.
//!
//! Trace files are UTF-8 text with one jitter sample (seconds, plain
//! decimal) per line. Blank lines and lines starting with `#` are skipped;
//! LF and CRLF are both accepted, LF is always written.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;

use crate::distributions::ModelParams;
use crate::em::Assignment;
use crate::error::{Error, Result};

/// An ordered series of strictly positive jitter samples in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct JitterTrace {
    samples: Vec<f64>,
    source: String,
}

impl JitterTrace {
    pub fn new(samples: Vec<f64>, source: impl Into<String>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyTrace);
        }
        if let Some((index, &value)) = samples.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::NonPositiveSample { index, value });
        }
        Ok(JitterTrace { samples, source: source.into() })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Keeps only the most recent `cap` samples. No-op if the trace is shorter.
    pub fn most_recent(self, cap: usize) -> JitterTrace {
        if cap == 0 || self.samples.len() <= cap {
            return self;
        }
        let dropped = self.samples.len() - cap;
        JitterTrace {
            samples: self.samples[dropped..].to_vec(),
            source: format!("{} (most recent {cap} of {})", self.source, self.samples.len()),
        }
    }

    /// A trace over `samples[range]`, already known to be valid.
    pub(crate) fn window(&self, start: usize, end: usize) -> JitterTrace {
        JitterTrace {
            samples: self.samples[start..end].to_vec(),
            source: format!("{}[{start}..{end}]", self.source),
        }
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestOptions {
    /// Shift the trace so its minimum maps to a small positive epsilon
    /// instead of rejecting non-positive samples.
    pub offset: bool,
}

/// Parses trace text. `origin` names the input in the trace's source string.
pub fn parse_trace(text: &str, origin: &str, options: IngestOptions) -> Result<JitterTrace> {
    let mut samples = Vec::new();
    for (i, raw) in text.split('\n').enumerate() {
        let line_no = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw).trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let value: f64 = line
            .parse()
            .map_err(|_| Error::Parse { line: line_no, message: format!("not a number: {line:?}") })?;
        if !value.is_finite() {
            return Err(Error::Parse { line: line_no, message: format!("not a finite number: {line:?}") });
        }
        if value <= 0.0 && !options.offset {
            return Err(Error::Parse {
                line: line_no,
                message: format!("non-positive jitter {line} (enable the offset transform to shift the trace)"),
            });
        }
        samples.push(value);
    }
    if samples.is_empty() {
        return Err(Error::EmptyTrace);
    }
    if !options.offset {
        return JitterTrace::new(samples, origin);
    }

    let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let eps = if max > min { 1e-6 * (max - min) } else { 1e-9 };
    for v in &mut samples {
        *v = *v - min + eps;
    }
    JitterTrace::new(samples, format!("{origin} (offset: v - {min} + {eps})"))
}

/// Reads a trace file.
pub fn ingest_trace(path: impl AsRef<Path>, options: IngestOptions) -> Result<JitterTrace> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trace(&text, &path.display().to_string(), options).map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse { line, message: format!("{}: {message}", path.display()) },
        other => other,
    })
}

/// Writes samples one per line. `Display` for `f64` is the shortest string
/// that parses back to the same value, so this round-trips exactly.
pub fn write_trace<W: Write>(samples: &[f64], mut sink: W) -> io::Result<()> {
    for v in samples {
        writeln!(sink, "{v}")?;
    }
    sink.flush()
}

/// Writes the `index,z1,z2` indicator table for an assignment and returns
/// the number of data rows. `z1` is 1 exactly when model 0 owns the sample.
pub fn emit_indicator_csv<W: Write>(assignment: &Assignment, sink: W) -> io::Result<usize> {
    emit_label_indicators(&assignment.labels, sink)
}

pub fn emit_label_indicators<W: Write>(labels: &[usize], mut sink: W) -> io::Result<usize> {
    sink.write_all(b"index,z1,z2\n")?;
    for (j, &label) in labels.iter().enumerate() {
        let z1 = u8::from(label == 0);
        writeln!(sink, "{},{},{}", j + 1, z1, 1 - z1)?;
    }
    sink.flush()?;
    Ok(labels.len())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub params: ModelParams,
    pub length: usize,
}

/// Piecewise-stationary generator description.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeSpec {
    pub segments: Vec<Segment>,
    pub seed: u64,
}

impl RegimeSpec {
    pub fn total_len(&self) -> usize {
        self.segments.iter().map(|s| s.length).sum()
    }
}

/// A synthetic trace plus its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledTrace {
    pub trace: JitterTrace,
    /// Model id (0 = exponential, 1 = gamma) of the generating segment, per sample.
    pub truth_labels: Vec<usize>,
    /// Index of the generating segment, per sample.
    pub segment_ids: Vec<usize>,
}

/// Samples every segment i.i.d. from its model with a ChaCha8 stream seeded
/// from `spec.seed`. Exponential draws use the inverse CDF; gamma draws use
/// Marsaglia–Tsang rejection on the same stream.
pub fn generate_synthetic(spec: &RegimeSpec) -> Result<LabeledTrace> {
    if spec.segments.is_empty() {
        return Err(Error::InvalidConfig("regime spec has no segments".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let total = spec.total_len();
    let mut samples = Vec::with_capacity(total);
    let mut truth_labels = Vec::with_capacity(total);
    let mut segment_ids = Vec::with_capacity(total);

    for (seg_idx, seg) in spec.segments.iter().enumerate() {
        seg.params.validate()?;
        if seg.length == 0 {
            return Err(Error::InvalidConfig(format!("segment {seg_idx} has zero length")));
        }
        match seg.params {
            ModelParams::Exponential { rate } => {
                for _ in 0..seg.length {
                    samples.push(draw_exponential(&mut rng, rate));
                }
            }
            ModelParams::Gamma { shape, scale } => {
                let dist = rand_distr::Gamma::new(shape, scale)
                    .map_err(|e| Error::ParameterDomain(e.to_string()))?;
                for _ in 0..seg.length {
                    samples.push(draw_positive(&mut rng, &dist));
                }
            }
        }
        truth_labels.extend(std::iter::repeat(seg.params.kind().code() as usize).take(seg.length));
        segment_ids.extend(std::iter::repeat(seg_idx).take(seg.length));
    }

    let trace = JitterTrace::new(samples, format!("synthetic(seed={})", spec.seed))?;
    Ok(LabeledTrace { trace, truth_labels, segment_ids })
}

fn draw_exponential(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    loop {
        // 1 − U lies in (0, 1]; a zero draw is rejected to keep the support open.
        let u = 1.0 - rng.random::<f64>();
        let v = -u.ln() / rate;
        if v > 0.0 {
            return v;
        }
    }
}

fn draw_positive<D: Distribution<f64>>(rng: &mut ChaCha8Rng, dist: &D) -> f64 {
    loop {
        let v = dist.sample(rng);
        if v > 0.0 && v.is_finite() {
            return v;
        }
    }
}
