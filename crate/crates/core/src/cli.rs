//! Command-line front end.
//!
//! Data goes to files or standard output; progress and errors go to
//! standard error. Every subcommand is deterministic given its flags.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::announce::RegimeAnnouncement;
use crate::distributions::{ModelKind, ModelParams};
use crate::em::{em_fit, EmConfig, EmWarning, DEFAULT_MAX_ITERS};
use crate::scan::{scan_trace, write_window_csv, WindowSpec, DEFAULT_WINDOW};
use crate::trace::{emit_indicator_csv, generate_synthetic, ingest_trace, write_trace, IngestOptions, JitterTrace, RegimeSpec, Segment};

pub const DEFAULT_HISTORY: usize = 30_000;

#[derive(Debug, Parser)]
#[command(
    name = "jitterem",
    version,
    about = "Classify VoIP delay jitter into exponential and gamma regimes with hard-assignment EM",
    long_about = "Classify VoIP delay jitter into exponential and gamma regimes with hard-assignment EM.\n\n\
        A monitoring deployment would re-run `scan` (or `fit`) over its most recent history at a \
        regular cadence, e.g. once every 10 seconds, and push the result to receivers as an \
        announcement record (see `announce-encode`)."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the candidate models to a whole trace and write per-packet indicators.
    Fit(FitArgs),
    /// Classify fixed-size windows slid across a trace and locate regime changes.
    Scan(ScanArgs),
    /// Generate a seeded synthetic trace with ground-truth labels.
    Gen(GenArgs),
    /// Encode a JSON announcement into its wire bytes (hex on stdout).
    AnnounceEncode(AnnounceEncodeArgs),
    /// Decode announcement wire bytes (hex) into JSON on stdout.
    AnnounceDecode(AnnounceDecodeArgs),
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    /// Trace file: one jitter sample in seconds per line, '#' comments allowed.
    pub input: PathBuf,

    /// Use only the most recent N samples when the trace is longer
    /// (the history length a monitoring proxy keeps; 0 keeps everything).
    #[arg(long, default_value_t = DEFAULT_HISTORY)]
    pub history: usize,

    /// Shift the trace so its minimum becomes a small positive value instead
    /// of rejecting non-positive samples.
    #[arg(long)]
    pub offset: bool,

    /// Maximum EM refits K per fit (real traces usually settle after a few).
    #[arg(short = 'k', long, default_value_t = DEFAULT_MAX_ITERS as u64, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_iters: u64,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub trace: TraceArgs,

    /// Indicator CSV (index,z1,z2). Defaults to <INPUT>.indicators.csv.
    #[arg(long)]
    pub indicators: Option<PathBuf>,

    /// JSON summary path. Defaults to standard output.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub trace: TraceArgs,

    /// Window size in packets.
    #[arg(short, long, default_value_t = DEFAULT_WINDOW)]
    pub window: usize,

    /// Distance between window starts in packets (default: the window size, no overlap).
    #[arg(long)]
    pub stride: Option<usize>,

    /// Per-window CSV (start,end,dominant,fraction_model0,converged). Defaults to <INPUT>.windows.csv.
    #[arg(long)]
    pub windows: Option<PathBuf>,

    /// JSON summary path (change points and per-window fits). Defaults to standard output.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Comma-separated segments, each "kind:param=value[:param=value]:length",
    /// e.g. "exp:mu=1:15000,gamma:a=4:b=1:15000".
    #[arg(short, long)]
    pub segments: String,

    /// Generator seed.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    /// Trace file to write.
    #[arg(short, long)]
    pub output: PathBuf,

    /// Ground-truth label file (one model id per line). Defaults to <OUTPUT>.labels.
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnnounceEncodeArgs {
    /// JSON announcement file; '-' or absent reads standard input.
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnnounceDecodeArgs {
    /// File holding the hex bytes; '-' or absent reads standard input.
    pub input: Option<PathBuf>,

    /// Hex bytes given directly on the command line.
    #[arg(long, conflicts_with = "input")]
    pub hex: Option<String>,
}

/// Parses `args` (including the program name) and runs the command. Returns
/// the process exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{rendered}");
            } else {
                let _ = write!(stdout, "{rendered}");
            }
            return code;
        }
    };
    match execute(&cli.command, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            1
        }
    }
}

pub fn execute(command: &Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    match command {
        Command::Fit(args) => cmd_fit(args, stdout, stderr),
        Command::Scan(args) => cmd_scan(args, stdout, stderr),
        Command::Gen(args) => cmd_gen(args, stderr),
        Command::AnnounceEncode(args) => cmd_announce_encode(args, stdout),
        Command::AnnounceDecode(args) => cmd_announce_decode(args, stdout),
    }
}

fn load_trace(args: &TraceArgs) -> Result<JitterTrace> {
    let trace = ingest_trace(&args.input, IngestOptions { offset: args.offset })?;
    Ok(trace.most_recent(args.history))
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display()))?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct FitSummary {
    pub source: String,
    pub samples: usize,
    pub converged: bool,
    pub iterations_used: usize,
    pub params: Vec<ModelParams>,
    pub label_counts: Vec<usize>,
    pub classification_loglik: f64,
    pub warnings: Vec<EmWarning>,
}

pub fn cmd_fit(args: &FitArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let trace = load_trace(&args.trace)?;
    let config = EmConfig::with_max_iters(args.trace.max_iters as usize);
    let assignment = em_fit(&trace, &config)?;

    let indicators = args.indicators.clone().unwrap_or_else(|| sibling(&args.trace.input, ".indicators.csv"));
    let rows = emit_indicator_csv(&assignment, create(&indicators)?)
        .with_context(|| format!("cannot write {}", indicators.display()))?;

    let summary = FitSummary {
        source: trace.source().to_string(),
        samples: trace.len(),
        converged: assignment.converged,
        iterations_used: assignment.iterations_used,
        params: assignment.final_params.clone(),
        label_counts: assignment.label_counts(),
        classification_loglik: assignment.classification_loglik,
        warnings: assignment.warnings.clone(),
    };
    write_json(&summary, args.summary.as_deref(), stdout)?;

    writeln!(
        stderr,
        "fit {} samples: {} after {} iteration(s)",
        trace.len(),
        if assignment.converged { "stabilized" } else { "iteration budget exhausted" },
        assignment.iterations_used
    )?;
    for (p, n) in assignment.final_params.iter().zip(assignment.label_counts()) {
        writeln!(stderr, "  {p}: {n} samples")?;
    }
    writeln!(stderr, "  indicators: {} rows -> {}", rows, indicators.display())?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct WindowSummary {
    pub start: usize,
    pub end: usize,
    pub dominant: ModelKind,
    pub fraction_model0: f64,
    pub converged: bool,
    pub iterations_used: usize,
    pub params: Vec<ModelParams>,
}

#[derive(Debug, Serialize)]
pub struct FailureSummary {
    pub start: usize,
    pub end: usize,
    pub error: String,
}

#[derive(Debug, Serialize)]
pub struct ScanSummary {
    pub source: String,
    pub samples: usize,
    pub window: usize,
    pub stride: usize,
    pub change_points: Vec<usize>,
    pub windows: Vec<WindowSummary>,
    pub failures: Vec<FailureSummary>,
}

pub fn cmd_scan(args: &ScanArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let trace = load_trace(&args.trace)?;
    let spec = WindowSpec { size: args.window, stride: args.stride.unwrap_or(args.window) };
    let config = EmConfig::with_max_iters(args.trace.max_iters as usize);
    let timeline = scan_trace(&trace, &spec, &config)?;

    let windows_path = args.windows.clone().unwrap_or_else(|| sibling(&args.trace.input, ".windows.csv"));
    write_window_csv(&timeline, create(&windows_path)?)
        .with_context(|| format!("cannot write {}", windows_path.display()))?;

    let summary = ScanSummary {
        source: trace.source().to_string(),
        samples: trace.len(),
        window: spec.size,
        stride: spec.stride,
        change_points: timeline.change_points.clone(),
        windows: timeline
            .reports
            .iter()
            .map(|r| WindowSummary {
                start: r.start,
                end: r.end,
                dominant: r.dominant,
                fraction_model0: r.fraction_model0,
                converged: r.converged,
                iterations_used: r.iterations_used,
                params: r.params.clone(),
            })
            .collect(),
        failures: timeline
            .failures
            .iter()
            .map(|f| FailureSummary { start: f.start, end: f.end, error: f.error.to_string() })
            .collect(),
    };
    write_json(&summary, args.summary.as_deref(), stdout)?;

    writeln!(stderr, "scanned {} windows of {} (stride {})", timeline.reports.len() + timeline.failures.len(), spec.size, spec.stride)?;
    for r in &timeline.reports {
        writeln!(stderr, "  [{}, {}) {} ({:.3} model 0)", r.start, r.end, r.dominant, r.fraction_model0)?;
    }
    for f in &timeline.failures {
        writeln!(stderr, "  [{}, {}) failed: {}", f.start, f.end, f.error)?;
    }
    writeln!(stderr, "  change points: {:?}", timeline.change_points)?;
    Ok(())
}

/// Parses the generator's segment mini-language.
pub fn parse_segments(text: &str) -> Result<Vec<Segment>> {
    let mut segments = Vec::new();
    for (n, entry) in text.split(',').enumerate() {
        let entry = entry.trim();
        let parts: Vec<&str> = entry.split(':').collect();
        if parts.len() < 3 {
            bail!("segment {}: {entry:?} is not kind:param=value[:param=value]:length", n + 1);
        }
        let length: usize = parts[parts.len() - 1]
            .parse()
            .map_err(|_| anyhow!("segment {}: bad length {:?}", n + 1, parts[parts.len() - 1]))?;
        let mut values = Vec::new();
        for kv in &parts[1..parts.len() - 1] {
            let (k, v) = kv.split_once('=').ok_or_else(|| anyhow!("segment {}: expected param=value, got {kv:?}", n + 1))?;
            let v: f64 = v.parse().map_err(|_| anyhow!("segment {}: bad value in {kv:?}", n + 1))?;
            values.push((k, v));
        }
        let lookup = |names: &[&str]| -> Result<f64> {
            let hits: Vec<f64> = values.iter().filter(|(k, _)| names.contains(k)).map(|(_, v)| *v).collect();
            match hits[..] {
                [v] => Ok(v),
                [] => bail!("segment {}: missing {}", n + 1, names[0]),
                _ => bail!("segment {}: {} given more than once", n + 1, names[0]),
            }
        };
        let (params, known): (ModelParams, &[&str]) = match parts[0] {
            "exp" | "exponential" => (ModelParams::exponential(lookup(&["mu", "rate"])?)?, &["mu", "rate"]),
            "gamma" => (ModelParams::gamma(lookup(&["a", "shape"])?, lookup(&["b", "scale"])?)?, &["a", "shape", "b", "scale"]),
            other => bail!("segment {}: unknown model {other:?} (expected exp or gamma)", n + 1),
        };
        if let Some((k, _)) = values.iter().find(|(k, _)| !known.contains(k)) {
            bail!("segment {}: unknown parameter {k:?} for {}", n + 1, params.kind());
        }
        if length == 0 {
            bail!("segment {}: length must be at least 1", n + 1);
        }
        segments.push(Segment { params, length });
    }
    Ok(segments)
}

pub fn cmd_gen(args: &GenArgs, stderr: &mut dyn Write) -> Result<()> {
    let spec = RegimeSpec { segments: parse_segments(&args.segments)?, seed: args.seed };
    let labeled = generate_synthetic(&spec)?;
    let labels_path = args.labels.clone().unwrap_or_else(|| sibling(&args.output, ".labels"));

    write_trace(labeled.trace.samples(), create(&args.output)?)
        .with_context(|| format!("cannot write {}", args.output.display()))?;
    let mut out = create(&labels_path)?;
    for l in &labeled.truth_labels {
        writeln!(out, "{l}")?;
    }
    out.flush().with_context(|| format!("cannot write {}", labels_path.display()))?;

    writeln!(
        stderr,
        "generated {} samples in {} segment(s), seed {} -> {} (+ {})",
        labeled.trace.len(),
        spec.segments.len(),
        spec.seed,
        args.output.display(),
        labels_path.display()
    )?;
    Ok(())
}

fn read_input(path: Option<&Path>) -> Result<String> {
    match path {
        Some(p) if p != Path::new("-") => fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display())),
        _ => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).context("cannot read standard input")?;
            Ok(s)
        }
    }
}

pub fn cmd_announce_encode(args: &AnnounceEncodeArgs, stdout: &mut dyn Write) -> Result<()> {
    let text = read_input(args.input.as_deref())?;
    let a: RegimeAnnouncement = serde_json::from_str(&text).context("invalid announcement JSON")?;
    let bytes = a.encode()?;
    writeln!(stdout, "{}", hex::encode(bytes))?;
    Ok(())
}

pub fn cmd_announce_decode(args: &AnnounceDecodeArgs, stdout: &mut dyn Write) -> Result<()> {
    let text = match &args.hex {
        Some(h) => h.clone(),
        None => read_input(args.input.as_deref())?,
    };
    let compact: String = text.split_whitespace().collect();
    let bytes = hex::decode(&compact).context("invalid hex")?;
    let a = RegimeAnnouncement::decode(&bytes)?;
    writeln!(stdout, "{}", serde_json::to_string(&a)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_grammar() {
        let segs = parse_segments("exp:mu=1:15000,gamma:a=4:b=1:15000").unwrap();
        assert_eq!(segs.len(), 2);
        assert_eq!(segs[0], Segment { params: ModelParams::exponential(1.0).unwrap(), length: 15000 });
        assert_eq!(segs[1], Segment { params: ModelParams::gamma(4.0, 1.0).unwrap(), length: 15000 });
        let alt = parse_segments("gamma:b=0.5:a=2:10").unwrap();
        assert_eq!(alt[0].params, ModelParams::gamma(2.0, 0.5).unwrap());
    }

    #[test]
    fn segment_grammar_errors() {
        for bad in [
            "",
            "exp:15000",
            "exp:mu=1",
            "exp:mu=x:10",
            "exp:mu=1:ten",
            "weibull:k=1:10",
            "gamma:a=1:10",
            "exp:mu=1:mu=2:10",
            "exp:mu=1:a=2:10",
            "exp:mu=-1:10",
            "exp:mu=1:0",
        ] {
            assert!(parse_segments(bad).is_err(), "{bad:?} should fail");
        }
    }

    #[test]
    fn help_documents_defaults() {
        let mut out = Vec::new();
        let mut err = Vec::new();
        assert_eq!(run(["jitterem", "scan", "--help"], &mut out, &mut err), 0);
        let help = String::from_utf8(out).unwrap();
        assert!(help.contains("3500"));
        assert!(help.contains("30000"));
        assert!(help.contains("50"));
    }

    #[test]
    fn usage_errors_exit_two() {
        let mut out = Vec::new();
        let mut err = Vec::new();
        assert_eq!(run(["jitterem", "fit"], &mut out, &mut err), 2);
        assert_eq!(run(["jitterem", "fit", "x", "-k", "0"], &mut out, &mut err), 2);
    }
}
