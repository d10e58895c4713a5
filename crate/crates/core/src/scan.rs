//! Sliding-window regime classification.
//!
//! Each window gets its own from-scratch EM fit; a window's dominant model
//! is the one owning the majority of its samples.

use std::io::{self, Write};

use crate::distributions::{ModelKind, ModelParams};
use crate::em::{em_fit, EmConfig};
use crate::error::{Error, Result};
use crate::trace::JitterTrace;

pub const DEFAULT_WINDOW: usize = 3500;
pub const MIN_WINDOW: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    pub size: usize,
    pub stride: usize,
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec { size: DEFAULT_WINDOW, stride: DEFAULT_WINDOW }
    }
}

impl WindowSpec {
    /// Non-overlapping windows of `size`.
    pub fn tiled(size: usize) -> Self {
        WindowSpec { size, stride: size }
    }

    pub fn validate(&self) -> Result<()> {
        if self.size < MIN_WINDOW {
            return Err(Error::InvalidConfig(format!("window size {} is below {MIN_WINDOW}", self.size)));
        }
        if self.stride == 0 {
            return Err(Error::InvalidConfig("stride must be at least 1".into()));
        }
        Ok(())
    }
}

/// Half-open `(start, end)` windows that fit entirely inside `[0, n)`.
pub fn sliding_windows(n: usize, size: usize, stride: usize) -> Result<Vec<(usize, usize)>> {
    if size == 0 || stride == 0 {
        return Err(Error::InvalidConfig("window size and stride must be at least 1".into()));
    }
    if n < size {
        return Err(Error::InsufficientData { needed: size, got: n });
    }
    Ok((0..=n - size).step_by(stride).map(|start| (start, start + size)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowReport {
    pub start: usize,
    pub end: usize,
    pub dominant: ModelKind,
    pub fraction_model0: f64,
    pub params: Vec<ModelParams>,
    pub converged: bool,
    pub iterations_used: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowFailure {
    pub start: usize,
    pub end: usize,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RegimeTimeline {
    pub reports: Vec<WindowReport>,
    pub failures: Vec<WindowFailure>,
    /// Start index of each report whose dominant model differs from the
    /// previous report's.
    pub change_points: Vec<usize>,
}

impl RegimeTimeline {
    fn from_parts(reports: Vec<WindowReport>, failures: Vec<WindowFailure>) -> Self {
        let change_points = reports
            .windows(2)
            .filter(|pair| pair[0].dominant != pair[1].dominant)
            .map(|pair| pair[1].start)
            .collect();
        RegimeTimeline { reports, failures, change_points }
    }
}

/// Model 0 dominates at a share of at least one half; otherwise the most
/// frequent of the remaining models, lowest index on ties.
fn dominant_index(labels: &[usize], models: usize) -> usize {
    let mut counts = vec![0usize; models];
    for &l in labels {
        counts[l] += 1;
    }
    if 2 * counts[0] >= labels.len() {
        return 0;
    }
    let mut best = 1;
    for i in 2..models {
        if counts[i] > counts[best] {
            best = i;
        }
    }
    best
}

/// Runs an independent EM fit on every window of `trace`.
///
/// A window whose fit cannot be initialized is recorded in `failures`
/// without stopping the scan; change points are taken between consecutive
/// successful windows.
pub fn scan_trace(trace: &JitterTrace, spec: &WindowSpec, config: &EmConfig) -> Result<RegimeTimeline> {
    spec.validate()?;
    config.validate()?;
    let windows = sliding_windows(trace.len(), spec.size, spec.stride)?;
    let mut reports = Vec::with_capacity(windows.len());
    let mut failures = Vec::new();
    for (start, end) in windows {
        let window = trace.window(start, end);
        match em_fit(&window, config) {
            Ok(a) => {
                let dominant = config.candidates[dominant_index(&a.labels, config.candidates.len())];
                reports.push(WindowReport {
                    start,
                    end,
                    dominant,
                    fraction_model0: a.fraction_model0(),
                    params: a.final_params,
                    converged: a.converged,
                    iterations_used: a.iterations_used,
                });
            }
            Err(error) => failures.push(WindowFailure { start, end, error }),
        }
    }
    Ok(RegimeTimeline::from_parts(reports, failures))
}

/// Writes `start,end,dominant,fraction_model0,converged`, one row per window
/// in start order. Failed windows carry `failed` as their dominant model and
/// an empty fraction.
pub fn write_window_csv<W: Write>(timeline: &RegimeTimeline, mut sink: W) -> io::Result<usize> {
    enum Row<'a> {
        Ok(&'a WindowReport),
        Failed(&'a WindowFailure),
    }
    let mut rows: Vec<(usize, Row)> = timeline.reports.iter().map(|r| (r.start, Row::Ok(r))).collect();
    rows.extend(timeline.failures.iter().map(|f| (f.start, Row::Failed(f))));
    rows.sort_by_key(|(start, _)| *start);

    sink.write_all(b"start,end,dominant,fraction_model0,converged\n")?;
    for (_, row) in &rows {
        match row {
            Row::Ok(r) => writeln!(sink, "{},{},{},{},{}", r.start, r.end, r.dominant, r.fraction_model0, r.converged)?,
            Row::Failed(f) => writeln!(sink, "{},{},failed,,false", f.start, f.end)?,
        }
    }
    sink.flush()?;
    Ok(rows.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{generate_synthetic, RegimeSpec, Segment};

    #[test]
    fn window_arithmetic() {
        assert_eq!(sliding_windows(10, 4, 3).unwrap(), vec![(0, 4), (3, 7), (6, 10)]);
        assert_eq!(sliding_windows(10, 4, 4).unwrap(), vec![(0, 4), (4, 8)]);
        assert_eq!(sliding_windows(3, 4, 1), Err(Error::InsufficientData { needed: 4, got: 3 }));
        assert_eq!(sliding_windows(4, 4, 7).unwrap(), vec![(0, 4)]);
    }

    #[test]
    fn window_spec_bounds() {
        assert!(WindowSpec::tiled(99).validate().is_err());
        assert!(WindowSpec { size: 100, stride: 0 }.validate().is_err());
        assert!(WindowSpec { size: 100, stride: 300 }.validate().is_ok());
        assert_eq!(WindowSpec::default(), WindowSpec { size: 3500, stride: 3500 });
    }

    #[test]
    fn dominance_tie_goes_to_model_zero() {
        assert_eq!(dominant_index(&[0, 1, 0, 1], 2), 0);
        assert_eq!(dominant_index(&[0, 1, 1, 1], 2), 1);
        assert_eq!(dominant_index(&[0, 1, 2, 2], 3), 2);
        assert_eq!(dominant_index(&[0, 1, 2], 3), 1);
    }

    #[test]
    fn whole_trace_window() {
        let spec = RegimeSpec {
            segments: vec![Segment { params: ModelParams::gamma(4.0, 1.0).unwrap(), length: 400 }],
            seed: 8,
        };
        let lt = generate_synthetic(&spec).unwrap();
        let tl = scan_trace(&lt.trace, &WindowSpec::tiled(400), &EmConfig::default()).unwrap();
        assert_eq!(tl.reports.len(), 1);
        assert!(tl.change_points.is_empty());
        let r = &tl.reports[0];
        assert_eq!((r.start, r.end), (0, 400));
    }

    #[test]
    fn failed_windows_do_not_abort() {
        let mut samples = vec![1.0; 100];
        samples.extend((1..=100).map(|i| i as f64 * 0.05));
        let t = JitterTrace::new(samples, "mixed").unwrap();
        let tl = scan_trace(&t, &WindowSpec::tiled(100), &EmConfig::default()).unwrap();
        assert_eq!(tl.failures.len(), 1);
        assert_eq!((tl.failures[0].start, tl.failures[0].end), (0, 100));
        assert!(matches!(tl.failures[0].error, Error::Setup { model: ModelKind::Gamma, .. }));
        assert_eq!(tl.reports.len(), 1);

        let mut out = Vec::new();
        assert_eq!(write_window_csv(&tl, &mut out).unwrap(), 2);
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("start,end,dominant,fraction_model0,converged\n0,100,failed,,false\n100,200,"));
    }

    #[test]
    fn change_points_follow_dominant_flips() {
        let report = |start: usize, dominant| WindowReport {
            start,
            end: start + 100,
            dominant,
            fraction_model0: 0.0,
            params: vec![],
            converged: true,
            iterations_used: 1,
        };
        let tl = RegimeTimeline::from_parts(
            vec![
                report(0, ModelKind::Gamma),
                report(100, ModelKind::Gamma),
                report(200, ModelKind::Exponential),
                report(300, ModelKind::Gamma),
            ],
            vec![],
        );
        assert_eq!(tl.change_points, vec![200, 300]);
    }
}
