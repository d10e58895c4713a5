//! C ABI over `jitterem`.
//!
//! Every fallible call returns a [`JemStatus`]. On failure the message is kept
//! per thread and can be copied out with [`jem_last_error_message`]. Traces,
//! fits and scan timelines are opaque handles owned by the caller and released
//! with their `_free` function. Panics never cross the boundary; they surface
//! as `JEM_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use jitterem::{
    em_fit, generate_synthetic, scan_trace, Assignment, EmConfig, Error, JitterTrace, ModelKind, ModelParams,
    RegimeAnnouncement, RegimeSpec, RegimeTimeline, Segment, WindowSpec,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JemStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A parameter or configuration value is out of its domain.
    InvalidArgument = 2,
    /// Too few samples for the requested operation.
    InsufficientData = 3,
    /// A sample was zero, negative or not finite.
    NonPositiveSample = 4,
    EmptyTrace = 5,
    /// Samples are all equal, or a fit diverged.
    DegenerateData = 6,
    NonConvergence = 7,
    /// A density is unbounded at a zero sample.
    SingularDensity = 8,
    /// A candidate could not be fitted to the whole trace.
    Setup = 9,
    /// Announcement bytes are malformed.
    Wire = 10,
    /// The caller's buffer is too small; the required size was reported.
    BufferTooSmall = 11,
    /// An index is past the end.
    OutOfRange = 12,
    Panic = 13,
    Internal = 14,
}

/// Model identifiers, as used in [`JemModelParams::model`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JemModel {
    Exponential = 0,
    Gamma = 1,
}

/// A parameterized model. Exponential uses `p0` = rate and ignores `p1`.
/// Gamma uses `p0` = shape and `p1` = scale.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JemModelParams {
    pub model: u8,
    pub p0: f64,
    pub p1: f64,
}

/// One segment of a synthetic trace.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JemSegment {
    pub params: JemModelParams,
    pub length: usize,
}

/// Summary of one scanned window.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JemWindowReport {
    pub start: usize,
    pub end: usize,
    pub dominant: u8,
    pub fraction_model0: f64,
    pub converged: bool,
    pub iterations_used: usize,
    pub exponential: JemModelParams,
    pub gamma: JemModelParams,
}

/// Opaque jitter trace.
pub struct JemTrace {
    inner: JitterTrace,
}

/// Opaque result of a whole-trace fit.
pub struct JemAssignment {
    inner: Assignment,
}

/// Opaque result of a sliding-window scan.
pub struct JemTimeline {
    inner: RegimeTimeline,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &Error) -> JemStatus {
    match err {
        Error::ParameterDomain(_) | Error::InvalidConfig(_) => JemStatus::InvalidArgument,
        Error::SingularDensity { .. } => JemStatus::SingularDensity,
        Error::InsufficientData { .. } => JemStatus::InsufficientData,
        Error::NonPositiveSample { .. } => JemStatus::NonPositiveSample,
        Error::DegenerateData(_) => JemStatus::DegenerateData,
        Error::NonConvergence { .. } => JemStatus::NonConvergence,
        Error::Setup { .. } => JemStatus::Setup,
        Error::EmptyTrace => JemStatus::EmptyTrace,
        Error::Wire(_) => JemStatus::Wire,
        _ => JemStatus::Internal,
    }
}

fn fail(status: JemStatus, msg: impl Into<String>) -> JemStatus {
    set_error(msg.into());
    status
}

fn fail_with(err: Error) -> JemStatus {
    let status = status_of(&err);
    fail(status, err.to_string())
}

/// Runs `body`, turning panics into `JEM_STATUS_PANIC` and clearing the last
/// error on success.
fn guard(body: impl FnOnce() -> JemStatus) -> JemStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(JemStatus::Ok) => {
            set_error(String::new());
            JemStatus::Ok
        }
        Ok(status) => status,
        Err(_) => fail(JemStatus::Panic, "internal panic"),
    }
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(JemStatus::NullPointer, concat!(stringify!($p), " is null"));
        })+
    };
}

fn to_params(p: &JemModelParams) -> Result<ModelParams, Error> {
    match ModelKind::from_code(p.model) {
        Some(ModelKind::Exponential) => ModelParams::exponential(p.p0),
        Some(ModelKind::Gamma) => ModelParams::gamma(p.p0, p.p1),
        None => Err(Error::ParameterDomain(format!("unknown model id {}", p.model))),
    }
}

fn from_params(p: &ModelParams) -> JemModelParams {
    match *p {
        ModelParams::Exponential { rate } => JemModelParams { model: 0, p0: rate, p1: 0.0 },
        ModelParams::Gamma { shape, scale } => JemModelParams { model: 1, p0: shape, p1: scale },
    }
}

/// Copies `src` into a caller buffer of `capacity` elements. Reports the
/// element count through `needed` (when non-null) in every case.
unsafe fn copy_out<T: Copy>(src: &[T], out: *mut T, capacity: usize, needed: *mut usize) -> JemStatus {
    if !needed.is_null() {
        *needed = src.len();
    }
    if src.is_empty() {
        return JemStatus::Ok;
    }
    if out.is_null() {
        return fail(JemStatus::NullPointer, "out is null");
    }
    if capacity < src.len() {
        return fail(JemStatus::BufferTooSmall, format!("buffer holds {capacity}, need {}", src.len()));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    JemStatus::Ok
}

/// Length in bytes of the last error message on this thread, excluding the
/// terminating NUL. Zero after a successful call.
#[no_mangle]
pub extern "C" fn jem_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().len())
}

/// Copies the last error message, NUL-terminated and truncated to fit, into
/// `buf`. Returns the number of bytes written excluding the NUL.
///
/// # Safety
/// `buf` must be null or valid for `capacity` bytes.
#[no_mangle]
pub unsafe extern "C" fn jem_last_error_message(buf: *mut c_char, capacity: usize) -> usize {
    if buf.is_null() || capacity == 0 {
        return 0;
    }
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let n = msg.len().min(capacity - 1);
        ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
        *buf.add(n) = 0;
        n
    })
}

/// Builds a trace from `len` samples. Every sample must be positive and finite.
///
/// # Safety
/// `samples` must be valid for `len` reads and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn jem_trace_new(samples: *const f64, len: usize, out: *mut *mut JemTrace) -> JemStatus {
    guard(|| {
        non_null!(out);
        *out = ptr::null_mut();
        if len == 0 {
            return fail_with(Error::EmptyTrace);
        }
        non_null!(samples);
        let data = slice::from_raw_parts(samples, len).to_vec();
        match JitterTrace::new(data, "ffi") {
            Ok(t) => {
                *out = Box::into_raw(Box::new(JemTrace { inner: t }));
                JemStatus::Ok
            }
            Err(e) => fail_with(e),
        }
    })
}

/// Generates a seeded synthetic trace from `count` segments. When `labels` is
/// non-null it receives one model id per sample and must hold the total length.
///
/// # Safety
/// `segments` must be valid for `count` reads, `labels` null or valid for the
/// total segment length, and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn jem_generate(
    segments: *const JemSegment,
    count: usize,
    seed: u64,
    labels: *mut u8,
    out: *mut *mut JemTrace,
) -> JemStatus {
    guard(|| {
        non_null!(out, segments);
        *out = ptr::null_mut();
        let mut segs = Vec::with_capacity(count);
        for s in slice::from_raw_parts(segments, count) {
            match to_params(&s.params) {
                Ok(params) => segs.push(Segment { params, length: s.length }),
                Err(e) => return fail_with(e),
            }
        }
        let labeled = match generate_synthetic(&RegimeSpec { segments: segs, seed }) {
            Ok(l) => l,
            Err(e) => return fail_with(e),
        };
        if !labels.is_null() {
            for (j, &l) in labeled.truth_labels.iter().enumerate() {
                *labels.add(j) = l as u8;
            }
        }
        *out = Box::into_raw(Box::new(JemTrace { inner: labeled.trace }));
        JemStatus::Ok
    })
}

/// Number of samples in `trace`, or 0 for null.
///
/// # Safety
/// `trace` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn jem_trace_len(trace: *const JemTrace) -> usize {
    trace.as_ref().map_or(0, |t| t.inner.len())
}

/// Releases a trace. Null is ignored.
///
/// # Safety
/// `trace` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn jem_trace_free(trace: *mut JemTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// Log-density of `params` at `v`.
///
/// # Safety
/// `params` must be valid for one read and `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn jem_log_pdf(params: *const JemModelParams, v: f64, out: *mut f64) -> JemStatus {
    guard(|| {
        non_null!(params, out);
        match to_params(&*params).and_then(|p| p.log_pdf(v)) {
            Ok(x) => {
                *out = x;
                JemStatus::Ok
            }
            Err(e) => fail_with(e),
        }
    })
}

/// Fits the exponential and gamma candidates to the whole trace with at most
/// `max_iters` refits.
///
/// # Safety
/// `trace` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn jem_fit(trace: *const JemTrace, max_iters: usize, out: *mut *mut JemAssignment) -> JemStatus {
    guard(|| {
        non_null!(trace, out);
        *out = ptr::null_mut();
        match em_fit(&(*trace).inner, &EmConfig::with_max_iters(max_iters)) {
            Ok(a) => {
                *out = Box::into_raw(Box::new(JemAssignment { inner: a }));
                JemStatus::Ok
            }
            Err(e) => fail_with(e),
        }
    })
}

/// Number of labels (equal to the trace length), or 0 for null.
///
/// # Safety
/// `fit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn jem_assignment_len(fit: *const JemAssignment) -> usize {
    fit.as_ref().map_or(0, |a| a.inner.labels.len())
}

/// Copies the per-sample model ids into `out`. `needed` (optional) receives
/// the label count.
///
/// # Safety
/// `fit` must be a live handle, `out` valid for `capacity` writes and `needed`
/// null or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn jem_assignment_labels(
    fit: *const JemAssignment,
    out: *mut u8,
    capacity: usize,
    needed: *mut usize,
) -> JemStatus {
    guard(|| {
        non_null!(fit);
        let labels: Vec<u8> = (*fit).inner.labels.iter().map(|&l| l as u8).collect();
        copy_out(&labels, out, capacity, needed)
    })
}

/// Final parameters of candidate `model` (0 = exponential, 1 = gamma).
///
/// # Safety
/// `fit` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn jem_assignment_params(
    fit: *const JemAssignment,
    model: usize,
    out: *mut JemModelParams,
) -> JemStatus {
    guard(|| {
        non_null!(fit, out);
        match (&*fit).inner.final_params.get(model) {
            Some(p) => {
                *out = from_params(p);
                JemStatus::Ok
            }
            None => fail(JemStatus::OutOfRange, format!("model {model} out of range")),
        }
    })
}

/// True when the labels stabilized before the iteration budget ran out.
///
/// # Safety
/// `fit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn jem_assignment_converged(fit: *const JemAssignment) -> bool {
    fit.as_ref().is_some_and(|a| a.inner.converged)
}

/// Number of refits performed, or 0 for null.
///
/// # Safety
/// `fit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn jem_assignment_iterations(fit: *const JemAssignment) -> usize {
    fit.as_ref().map_or(0, |a| a.inner.iterations_used)
}

/// Classification log-likelihood of the final labels, or NaN for null.
///
/// # Safety
/// `fit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn jem_assignment_loglik(fit: *const JemAssignment) -> f64 {
    fit.as_ref().map_or(f64::NAN, |a| a.inner.classification_loglik)
}

/// Releases a fit. Null is ignored.
///
/// # Safety
/// `fit` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn jem_assignment_free(fit: *mut JemAssignment) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// Fits every window of `window` samples whose starts are `stride` apart.
/// A `stride` of 0 means non-overlapping windows.
///
/// # Safety
/// `trace` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn jem_scan(
    trace: *const JemTrace,
    window: usize,
    stride: usize,
    max_iters: usize,
    out: *mut *mut JemTimeline,
) -> JemStatus {
    guard(|| {
        non_null!(trace, out);
        *out = ptr::null_mut();
        let spec = WindowSpec { size: window, stride: if stride == 0 { window } else { stride } };
        match scan_trace(&(*trace).inner, &spec, &EmConfig::with_max_iters(max_iters)) {
            Ok(t) => {
                *out = Box::into_raw(Box::new(JemTimeline { inner: t }));
                JemStatus::Ok
            }
            Err(e) => fail_with(e),
        }
    })
}

/// Number of successfully fitted windows, or 0 for null.
///
/// # Safety
/// `timeline` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn jem_timeline_report_count(timeline: *const JemTimeline) -> usize {
    timeline.as_ref().map_or(0, |t| t.inner.reports.len())
}

/// Number of windows whose fit failed, or 0 for null.
///
/// # Safety
/// `timeline` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn jem_timeline_failure_count(timeline: *const JemTimeline) -> usize {
    timeline.as_ref().map_or(0, |t| t.inner.failures.len())
}

/// The `index`-th successful window, in start order.
///
/// # Safety
/// `timeline` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn jem_timeline_report(
    timeline: *const JemTimeline,
    index: usize,
    out: *mut JemWindowReport,
) -> JemStatus {
    guard(|| {
        non_null!(timeline, out);
        let Some(r) = (&*timeline).inner.reports.get(index) else {
            return fail(JemStatus::OutOfRange, format!("window {index} out of range"));
        };
        let param = |kind: ModelKind| {
            r.params.iter().find(|p| p.kind() == kind).map_or(JemModelParams { model: kind.code(), p0: f64::NAN, p1: f64::NAN }, from_params)
        };
        *out = JemWindowReport {
            start: r.start,
            end: r.end,
            dominant: r.dominant.code(),
            fraction_model0: r.fraction_model0,
            converged: r.converged,
            iterations_used: r.iterations_used,
            exponential: param(ModelKind::Exponential),
            gamma: param(ModelKind::Gamma),
        };
        JemStatus::Ok
    })
}

/// Copies the change-point sample indices into `out`. `needed` (optional)
/// receives their count.
///
/// # Safety
/// `timeline` must be a live handle, `out` valid for `capacity` writes and
/// `needed` null or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn jem_timeline_change_points(
    timeline: *const JemTimeline,
    out: *mut usize,
    capacity: usize,
    needed: *mut usize,
) -> JemStatus {
    guard(|| {
        non_null!(timeline);
        copy_out(&(&*timeline).inner.change_points, out, capacity, needed)
    })
}

/// Releases a timeline. Null is ignored.
///
/// # Safety
/// `timeline` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn jem_timeline_free(timeline: *mut JemTimeline) {
    if !timeline.is_null() {
        drop(Box::from_raw(timeline));
    }
}

/// Encodes an announcement into `buf`. `written` receives the encoded length
/// (11 bytes plus 8 per parameter) even when the buffer is too small.
///
/// # Safety
/// `params` must be valid for one read, `buf` for `capacity` writes and
/// `written` for one write.
#[no_mangle]
pub unsafe extern "C" fn jem_announce_encode(
    params: *const JemModelParams,
    window_start: u32,
    window_len: u32,
    buf: *mut u8,
    capacity: usize,
    written: *mut usize,
) -> JemStatus {
    guard(|| {
        non_null!(params, written);
        let model = match to_params(&*params) {
            Ok(p) => p,
            Err(e) => return fail_with(e),
        };
        let bytes = match RegimeAnnouncement::new(&model, window_start, window_len).and_then(|a| a.encode()) {
            Ok(b) => b,
            Err(e) => return fail_with(Error::Wire(e)),
        };
        copy_out(&bytes, buf, capacity, written)
    })
}

/// Decodes announcement bytes.
///
/// # Safety
/// `bytes` must be valid for `len` reads and each out pointer for one write.
#[no_mangle]
pub unsafe extern "C" fn jem_announce_decode(
    bytes: *const u8,
    len: usize,
    params: *mut JemModelParams,
    window_start: *mut u32,
    window_len: *mut u32,
) -> JemStatus {
    guard(|| {
        non_null!(params, window_start, window_len);
        let data = if len == 0 {
            &[][..]
        } else {
            non_null!(bytes);
            slice::from_raw_parts(bytes, len)
        };
        let decoded = RegimeAnnouncement::decode(data).and_then(|a| Ok((a.model_params()?, a)));
        match decoded {
            Ok((p, a)) => {
                *params = from_params(&p);
                *window_start = a.window_start;
                *window_len = a.window_len;
                JemStatus::Ok
            }
            Err(e) => fail_with(Error::Wire(e)),
        }
    })
}
