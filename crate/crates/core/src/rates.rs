//! Sample-complexity rate terms used by the tuning rules.
//!
//! All logarithms are natural. With `n` samples, dimension `d`, sparsity
//! `s`, contamination count `o`, and confidence level `delta`:
//!
//! - `r_d       = sqrt(log(d/s) / n)`
//! - `r_delta   = sqrt(log(1/delta) / n)`
//! - `r_o       = (o/n) * sqrt(log(n/o))`, zero when `o = 0`
//! - `r_o_prime = (o/n) * log(n/o)`, zero when `o = 0`

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The four rate terms entering the tuning formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateTerms {
    pub r_d: f64,
    pub r_delta: f64,
    pub r_o: f64,
    pub r_o_prime: f64,
}

/// Computes the rate terms for a problem of the given shape.
pub fn rate_terms(n: usize, d: usize, s: usize, o: usize, delta: f64) -> Result<RateTerms> {
    if n == 0 {
        return Err(Error::invalid("rate terms require n >= 1"));
    }
    if s == 0 {
        return Err(Error::invalid("rate terms require s >= 1"));
    }
    if s > d {
        return Err(Error::invalid(format!("sparsity s = {s} exceeds dimension d = {d}")));
    }
    if o > n {
        return Err(Error::invalid(format!("outlier count o = {o} exceeds n = {n}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta must lie in (0,1), got {delta}")));
    }
    let nf = n as f64;
    let r_d = ((d as f64 / s as f64).ln() / nf).sqrt();
    let r_delta = ((1.0 / delta).ln() / nf).sqrt();
    let (r_o, r_o_prime) = if o == 0 {
        (0.0, 0.0)
    } else {
        let frac = o as f64 / nf;
        let log_ratio = (nf / o as f64).ln();
        (frac * log_ratio.sqrt(), frac * log_ratio)
    };
    Ok(RateTerms { r_d, r_delta, r_o, r_o_prime })
}
