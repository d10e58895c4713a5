//! Independent oracles shared by the integration suites. Nothing here calls
//! into the library's special functions or estimators.

#![allow(dead_code)]

use jitterem::{generate_synthetic, LabeledTrace, ModelParams, RegimeSpec, Segment};

/// Lanczos approximation (g = 7, 9 coefficients), ~1e-15 relative.
pub fn lanczos_ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - lanczos_ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Gamma log-likelihood from sufficient statistics.
fn gamma_loglik(n: f64, sum: f64, sum_log: f64, a: f64, b: f64, ln_gamma_a: f64) -> f64 {
    (a - 1.0) * sum_log - sum / b - n * a * b.ln() - n * ln_gamma_a
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

fn best_on(n: f64, sum: f64, sum_log: f64, a_grid: &[f64], b_grid: &[f64]) -> (f64, f64) {
    let ln_b: Vec<f64> = b_grid.iter().map(|b| b.ln()).collect();
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for &a in a_grid {
        let lga = lanczos_ln_gamma(a);
        for (&b, &lb) in b_grid.iter().zip(&ln_b) {
            let ll = (a - 1.0) * sum_log - sum / b - n * a * lb - n * lga;
            if ll > best.0 {
                best = (ll, a, b);
            }
        }
    }
    debug_assert!(gamma_loglik(n, sum, sum_log, best.1, best.2, lanczos_ln_gamma(best.1)).is_finite());
    (best.1, best.2)
}

/// Brute-force gamma MLE: grid over [0.1, 20]² at step 0.01, then one
/// refinement at step 0.001 over ±0.02 around the coarse optimum.
pub fn gamma_grid_oracle(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let sum: f64 = samples.iter().sum();
    let sum_log: f64 = samples.iter().map(|v| v.ln()).sum();
    let coarse = grid(0.1, 20.0, 0.01);
    let (a0, b0) = best_on(n, sum, sum_log, &coarse, &coarse);
    let fine_a = grid((a0 - 0.02).max(0.1), (a0 + 0.02).min(20.0), 0.001);
    let fine_b = grid((b0 - 0.02).max(0.1), (b0 + 0.02).min(20.0), 0.001);
    best_on(n, sum, sum_log, &fine_a, &fine_b)
}

/// Composite Simpson rule with `intervals` (even) subintervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, intervals: usize) -> f64 {
    let h = (hi - lo) / intervals as f64;
    let mut acc = f(lo) + f(hi);
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(lo + i as f64 * h);
    }
    acc * h / 3.0
}

/// 15000 samples of Gamma(4, 1) followed by 15000 of Exponential(1), seed 42.
pub fn reference_trace() -> LabeledTrace {
    two_regime(42, 15_000)
}

pub fn two_regime(seed: u64, half: usize) -> LabeledTrace {
    generate_synthetic(&RegimeSpec {
        segments: vec![
            Segment { params: ModelParams::gamma(4.0, 1.0).unwrap(), length: half },
            Segment { params: ModelParams::exponential(1.0).unwrap(), length: half },
        ],
        seed,
    })
    .unwrap()
}

pub fn single(params: ModelParams, len: usize, seed: u64) -> LabeledTrace {
    generate_synthetic(&RegimeSpec { segments: vec![Segment { params, length: len }], seed }).unwrap()
}
