//! Sample weight vectors on the capped probability simplex, Euclidean
//! projection onto that set, and the truncation step that snaps solved
//! weights to `{0, 1/n}`.
//!
//! The capped simplex with contamination parameter `eps` is
//! `{ w in [0, cap]^n : sum_i w_i = 1 }` with `cap = 1 / (n (1 - eps))`.
//! At `eps = 0` it degenerates to the single uniform vector.

use ndarray::Array1;

use crate::error::{Error, Result};

/// A point of the capped probability simplex, tagged with the `eps` that
/// defines its cap.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    w: Array1<f64>,
    eps: f64,
}

impl WeightVector {
    /// Wraps a weight vector after verifying simplex membership: entries in
    /// `[0, cap]` and total mass one, both up to small tolerances.
    pub fn new(w: Array1<f64>, eps: f64) -> Result<Self> {
        let n = w.len();
        if n == 0 {
            return Err(Error::invalid("weight vector must be non-empty"));
        }
        check_eps(eps)?;
        let cap = cap_for(n, eps);
        let tol = 1e-9;
        for (i, &wi) in w.iter().enumerate() {
            if !wi.is_finite() {
                return Err(Error::NonFinite(format!("weight {i}")));
            }
            if wi < -tol || wi > cap + tol {
                return Err(Error::invalid(format!(
                    "weight {i} = {wi:.6e} outside [0, {cap:.6e}]"
                )));
            }
        }
        let sum: f64 = w.sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("weights sum to {sum:.12} instead of 1")));
        }
        Ok(WeightVector { w, eps })
    }

    /// The uniform weighting `w_i = 1/n`, feasible for every `eps`.
    pub fn uniform(n: usize, eps: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("weight vector must be non-empty"));
        }
        check_eps(eps)?;
        Ok(WeightVector { w: Array1::from_elem(n, 1.0 / n as f64), eps })
    }

    pub fn values(&self) -> &Array1<f64> {
        &self.w
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn n(&self) -> usize {
        self.w.len()
    }

    /// Upper bound `1 / (n (1 - eps))` on individual weights.
    pub fn cap(&self) -> f64 {
        cap_for(self.w.len(), self.eps)
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps >= 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("eps must lie in [0, 1), got {eps}")));
    }
    Ok(())
}

fn cap_for(n: usize, eps: f64) -> f64 {
    1.0 / (n as f64 * (1.0 - eps))
}

/// Euclidean projection of `v` onto the capped simplex with parameter `eps`.
///
/// The projection is `w_i = clamp(v_i - theta, 0, cap)` for the unique
/// `theta` making the total mass one; `theta` is located by bisection and
/// then refined with one exact Newton step on the identified active sets.
pub fn project_capped_simplex(v: &Array1<f64>, eps: f64) -> Result<WeightVector> {
    let n = v.len();
    if n == 0 {
        return Err(Error::invalid("cannot project an empty vector"));
    }
    check_eps(eps)?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("projection input".into()));
    }
    let cap = cap_for(n, eps);

    let mass = |theta: f64| -> f64 { v.iter().map(|&x| (x - theta).clamp(0.0, cap)).sum() };
    let vmin = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let vmax = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut lo = vmin - cap; // mass(lo) = n * cap >= 1
    let mut hi = vmax; // mass(hi) = 0
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) >= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * (1.0 + hi.abs().max(lo.abs())) {
            break;
        }
    }
    let theta = 0.5 * (lo + hi);

    // Exact pivot given the active sets at the bisection solution.
    let mut free_sum = 0.0;
    let mut free_count = 0usize;
    let mut upper_count = 0usize;
    for &x in v.iter() {
        let t = x - theta;
        if t >= cap {
            upper_count += 1;
        } else if t > 0.0 {
            free_sum += x;
            free_count += 1;
        }
    }
    let theta = if free_count > 0 {
        (free_sum + cap * upper_count as f64 - 1.0) / free_count as f64
    } else {
        theta
    };

    let mut w = v.mapv(|x| (x - theta).clamp(0.0, cap));
    // Distribute any residual rounding mass over the interior coordinates.
    let residual = 1.0 - w.sum();
    if residual != 0.0 {
        let interior: Vec<usize> = (0..n)
            .filter(|&i| w[i] > 0.0 && w[i] < cap)
            .collect();
        if !interior.is_empty() {
            let bump = residual / interior.len() as f64;
            for i in interior {
                w[i] = (w[i] + bump).clamp(0.0, cap);
            }
        }
    }
    WeightVector::new(w, eps)
}

/// Result of snapping a solved weight vector to `{0, 1/n}`: rows whose
/// weight fell below `1/(2n)` are discarded, the rest get weight exactly
/// `1/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedWeights {
    w_prime: Array1<f64>,
    retained: Vec<usize>,
}

impl TruncatedWeights {
    /// All rows kept at weight `1/n` (used by unweighted baselines).
    pub fn uniform(n: usize) -> Self {
        TruncatedWeights {
            w_prime: Array1::from_elem(n, 1.0 / n as f64),
            retained: (0..n).collect(),
        }
    }

    pub fn values(&self) -> &Array1<f64> {
        &self.w_prime
    }

    /// Indices of retained rows, sorted ascending.
    pub fn retained(&self) -> &[usize] {
        &self.retained
    }

    pub fn n(&self) -> usize {
        self.w_prime.len()
    }

    pub fn n_retained(&self) -> usize {
        self.retained.len()
    }

    #[cfg(test)]
    pub(crate) fn from_parts(w_prime: Array1<f64>, retained: Vec<usize>) -> Self {
        TruncatedWeights { w_prime, retained }
    }
}

/// Truncates weights: `w'_i = 1/n` when `w_i >= 1/(2n)` and `0` otherwise.
///
/// For any feasible input, at most `2 n eps / (1 + eps)` rows fall below the
/// `1/(2n)` threshold, so truncation never discards more than `2 n eps`
/// rows, and `w'_i <= 2 w_i` holds coordinatewise.
pub fn truncate_weights(w: &WeightVector) -> TruncatedWeights {
    let n = w.n();
    let threshold = 1.0 / (2.0 * n as f64);
    let keep = 1.0 / n as f64;
    let mut w_prime = Array1::zeros(n);
    let mut retained = Vec::with_capacity(n);
    for (i, &wi) in w.values().iter().enumerate() {
        if wi >= threshold {
            w_prime[i] = keep;
            retained.push(i);
        }
    }
    TruncatedWeights { w_prime, retained }
}

/// The reference weighting used to audit solver output: uniform mass
/// `1/(n - |excluded|)` on the complement of `excluded`, zero on it. Errors
/// if the cap `1/(n(1-eps))` makes that infeasible.
pub fn comparator_weights(n: usize, excluded: &[usize], eps: f64) -> Result<WeightVector> {
    let mut is_excluded = vec![false; n];
    for &i in excluded {
        if i >= n {
            return Err(Error::invalid(format!("excluded index {i} out of range for n = {n}")));
        }
        is_excluded[i] = true;
    }
    let o = is_excluded.iter().filter(|&&b| b).count();
    if o >= n {
        return Err(Error::invalid("cannot exclude every sample"));
    }
    let value = 1.0 / (n - o) as f64;
    if value > cap_for(n, eps) * (1.0 + 1e-12) {
        return Err(Error::InfeasibleSimplex(format!(
            "mass 1/{} exceeds cap for eps = {eps}",
            n - o
        )));
    }
    let w = Array1::from_shape_fn(n, |i| if is_excluded[i] { 0.0 } else { value });
    WeightVector::new(w, eps)
}
