mod common;

use std::fs;

use jitterem::em::EmConfig;
use jitterem::trace::{emit_indicator_csv, write_trace};
use jitterem::*;
use proptest::prelude::*;

use common::{single, two_regime};

#[test]
fn synthetic_round_trips_through_files() {
    let lt = two_regime(77, 2500);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.txt");
    write_trace(lt.trace.samples(), fs::File::create(&path).unwrap()).unwrap();
    let back = ingest_trace(&path, IngestOptions::default()).unwrap();
    assert_eq!(back.samples(), lt.trace.samples());
    let text = fs::read_to_string(&path).unwrap();
    assert!(!text.contains('\r'));
    assert!(text.lines().all(|l| !l.contains('e')), "plain decimal expected");
}

#[test]
fn missing_file_is_an_io_error() {
    let err = ingest_trace("/nonexistent/trace.txt", IngestOptions::default()).unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
}

#[test]
fn parse_errors_name_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    fs::write(&path, "0.1\n0.2\n-0.3\n").unwrap();
    match ingest_trace(&path, IngestOptions::default()) {
        Err(Error::Parse { line: 3, message }) => assert!(message.contains("bad.txt")),
        other => panic!("unexpected {other:?}"),
    }
    let shifted = ingest_trace(&path, IngestOptions { offset: true }).unwrap();
    assert_eq!(shifted.len(), 3);
}

fn within_three_se(samples: &[f64], mean: f64, var: f64) {
    let n = samples.len() as f64;
    let m = samples.iter().sum::<f64>() / n;
    let v = samples.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    assert!((m - mean).abs() <= 3.0 * (var / n).sqrt(), "mean {m} vs {mean}");
    // Standard error of the sample variance is sqrt((mu4 - var^2) / n). Gamma
    // excess kurtosis is 6 / shape, with shape = mean^2 / var.
    let mu4 = var * var * (3.0 + 6.0 * var / (mean * mean));
    assert!((v - var).abs() <= 3.0 * ((mu4 - var * var) / n).sqrt(), "var {v} vs {var}");
}

#[test]
fn generator_matches_analytic_moments() {
    let e = single(ModelParams::exponential(2.0).unwrap(), 100_000, 31).trace.into_samples();
    within_three_se(&e, 0.5, 0.25);
    let g = single(ModelParams::gamma(3.0, 1.5).unwrap(), 100_000, 32).trace.into_samples();
    within_three_se(&g, 4.5, 6.75);
    let small = single(ModelParams::gamma(0.4, 2.0).unwrap(), 100_000, 33).trace.into_samples();
    within_three_se(&small, 0.8, 1.6);
}

#[test]
fn indicator_rows_equal_trace_length() {
    let lt = two_regime(12, 700);
    let a = em_fit(&lt.trace, &EmConfig::default()).unwrap();
    let mut out = Vec::new();
    let rows = emit_indicator_csv(&a, &mut out).unwrap();
    assert_eq!(rows, lt.trace.len());
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().count(), lt.trace.len() + 1);
    let z1: usize = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<usize>().unwrap()).sum();
    assert_eq!(z1, a.label_counts()[0]);
}

proptest! {
    #[test]
    fn arbitrary_positive_samples_round_trip(samples in proptest::collection::vec(1e-300f64..1e300, 1..50)) {
        let mut buf = Vec::new();
        write_trace(&samples, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let back = jitterem::trace::parse_trace(&text, "mem", IngestOptions::default()).unwrap();
        prop_assert_eq!(back.samples(), &samples[..]);
    }
}
