//! Huber loss primitives.
//!
//! The loss is quadratic inside the unit interval and linear outside:
//! `H(t) = t^2 / 2` for `|t| <= 1` and `H(t) = |t| - 1/2` otherwise. Its
//! derivative, the score, clips to `sign(t)` outside the unit interval.
//! Scaling to other transition points is done by the callers.

/// Huber loss `H(t)`.
#[inline]
pub fn huber_value(t: f64) -> f64 {
    let a = t.abs();
    if a <= 1.0 {
        0.5 * t * t
    } else {
        a - 0.5
    }
}

/// Huber score `H'(t)`: identity inside `[-1, 1]`, `sign(t)` outside.
#[inline]
pub fn huber_score(t: f64) -> f64 {
    t.clamp(-1.0, 1.0)
}
