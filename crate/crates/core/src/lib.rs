//! Delay-jitter regime classification.
//!
//! Decides, per packet, whether observed jitter is better explained by an
//! i.i.d. exponential model or a gamma model, using hard-assignment EM
//! where each model is refit by maximum likelihood on the packets it owns.
//! On top of that sit a sliding-window regime scan, trace file I/O with a
//! seeded synthetic generator, and a compact wire record for announcing
//! the current regime to receivers.

pub mod announce;
pub mod cli;
pub mod distributions;
pub mod em;
pub mod error;
pub mod scan;
pub mod special;
pub mod trace;

pub use announce::RegimeAnnouncement;
pub use distributions::{mle_exponential, mle_gamma, ModelKind, ModelParams};
pub use em::{e_step, em_fit, hard_assign, m_step, Assignment, EmConfig, ResponsibilityMatrix};
pub use error::{Error, Result, WireError};
pub use scan::{scan_trace, sliding_windows, RegimeTimeline, WindowReport, WindowSpec};
pub use trace::{generate_synthetic, ingest_trace, IngestOptions, JitterTrace, LabeledTrace, RegimeSpec, Segment};
