//! Log-gamma, digamma and trigamma for positive real arguments.
//!
//! All three use the same scheme: shift the argument upward with the
//! functional recurrence until it is at least [`ASYMPTOTIC_FROM`], then sum
//! the Stirling-type asymptotic series. With the cutoff at 10 the truncated
//! series terms are below 1e-16 relative.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const ASYMPTOTIC_FROM: f64 = 10.0;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

fn check(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::ParameterDomain(format!("{name} requires a positive finite argument, got {x}")))
    }
}

/// Number of unit steps needed to lift `x` to the asymptotic region.
fn shift_count(x: f64) -> usize {
    if x >= ASYMPTOTIC_FROM {
        0
    } else {
        (ASYMPTOTIC_FROM - x).ceil() as usize
    }
}

/// Natural log of the gamma function.
pub fn ln_gamma(x: f64) -> Result<f64> {
    check("ln_gamma", x)?;
    let n = shift_count(x);
    // ln Γ(x) = ln Γ(x + n) − ln(x (x+1) ... (x+n−1))
    let mut prod = 1.0;
    for k in 0..n {
        prod *= x + k as f64;
    }
    let z = x + n as f64;
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    // Bernoulli terms B_2k / (2k (2k−1) z^(2k−1))
    let series = inv
        * (1.0 / 12.0
            + inv2
                * (-1.0 / 360.0
                    + inv2
                        * (1.0 / 1260.0
                            + inv2
                                * (-1.0 / 1680.0
                                    + inv2
                                        * (1.0 / 1188.0
                                            + inv2 * (-691.0 / 360_360.0 + inv2 * (1.0 / 156.0)))))));
    let stirling = (z - 0.5) * z.ln() - z + HALF_LN_2PI + series;
    Ok(stirling - prod.ln())
}

/// Digamma ψ(x), the derivative of ln Γ.
pub fn digamma(x: f64) -> Result<f64> {
    check("digamma", x)?;
    let n = shift_count(x);
    let mut shift = 0.0;
    for k in 0..n {
        shift += 1.0 / (x + k as f64);
    }
    let z = x + n as f64;
    let inv2 = 1.0 / (z * z);
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2
                                * (1.0 / 240.0
                                    - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32_760.0 - inv2 / 12.0))))));
    Ok(z.ln() - 0.5 / z - series - shift)
}

/// Trigamma ψ′(x).
pub fn trigamma(x: f64) -> Result<f64> {
    check("trigamma", x)?;
    let n = shift_count(x);
    let mut shift = 0.0;
    // Summed from the largest argument down so the 1/x² term is added last.
    for k in (0..n).rev() {
        let t = x + k as f64;
        shift += 1.0 / (t * t);
    }
    let z = x + n as f64;
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let series = inv
        + inv2 * 0.5
        + inv2
            * inv
            * (1.0 / 6.0
                - inv2
                    * (1.0 / 30.0
                        - inv2
                            * (1.0 / 42.0
                                - inv2
                                    * (1.0 / 30.0
                                        - inv2 * (5.0 / 66.0 - inv2 * (691.0 / 2730.0 - inv2 * 7.0 / 6.0))))));
    Ok(series + shift)
}

/// ψ′(1) = π²/6, handy in tests and as a sanity anchor.
pub const TRIGAMMA_ONE: f64 = PI * PI / 6.0;
