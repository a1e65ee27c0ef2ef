//! The adversarial weighting problem: a bilinear saddle point over sample
//! weights and candidate matrices.
//!
//! For weights `w` on the capped simplex and a matrix `M` in the feasible
//! set of [`crate::matrix_set`], the payoff is
//!
//! ```text
//! f(w, M) = sum_i w_i ( X_i^T M X_i - <Sigma, M> )     (known covariance)
//! f(w, M) = sum_i w_i   X_i^T M X_i                    (unknown covariance)
//! ```
//!
//! The weighting stage solves `min_w max_M f(w, M)`. The inner maximum at
//! the returned weights is the *certificate*: it upper-bounds how much any
//! feasible direction can distort the weighted second moment, and a run is
//! accepted exactly when the certificate is at most `tau_cut`.
//!
//! The solver is projected gradient descent/ascent with step sizes
//! `~ 1/sqrt(t)`, tail iterate averaging on the weight block, and periodic
//! certification of the averaged weights. Because the payoff is linear in
//! `M` for fixed `w`, certification is itself a projected-ascent run warm
//! started at the current matrix plus a closed-form rank-one candidate; the
//! largest payoff seen at any feasible candidate is a valid lower bound on
//! the true inner maximum, and the final report re-certifies the best
//! weights with a larger budget.
//!
//! Everything here is deterministic: no randomness enters the solver.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix_set::{project_feasible_matrix, CandidateMatrix};
use crate::tuning::TuningParams;
use crate::weights::{project_capped_simplex, WeightVector};

/// Budget and tolerance knobs for [`solve_weights`].
#[derive(Debug, Clone)]
pub struct SaddleOptions {
    /// Outer descent/ascent iterations.
    pub max_outer: usize,
    /// Certify the averaged weights every this many outer iterations.
    pub check_every: usize,
    /// Stop once the certificate is stable for this many consecutive checks.
    pub patience: usize,
    /// Relative stability tolerance between consecutive certificates.
    pub cert_rel_tol: f64,
    /// Ascent steps per periodic certification.
    pub cert_steps_check: usize,
    /// Ascent steps for the final certificate.
    pub cert_steps_final: usize,
    /// Dykstra sweep budget per matrix projection.
    pub dykstra_max_sweeps: usize,
    /// Dykstra convergence tolerance.
    pub dykstra_tol: f64,
    /// Multiplier on both step sizes.
    pub step_scale: f64,
}

impl Default for SaddleOptions {
    fn default() -> Self {
        SaddleOptions {
            max_outer: 400,
            check_every: 50,
            patience: 2,
            cert_rel_tol: 1e-3,
            cert_steps_check: 20,
            cert_steps_final: 150,
            dykstra_max_sweeps: 16,
            dykstra_tol: 1e-8,
            step_scale: 1.0,
        }
    }
}

/// Output of the weighting stage.
#[derive(Debug, Clone)]
pub struct SaddleReport {
    /// The solved weights (tail average of the descent iterates that
    /// certified best).
    pub weights: WeightVector,
    /// Best lower bound on `max_M f(weights, M)` found by the final
    /// certification pass.
    pub certificate_value: f64,
    /// The matrix achieving `certificate_value`.
    pub witness: CandidateMatrix,
    /// Outer iterations actually run.
    pub iterations: usize,
    /// Whether the certificate stabilized before the iteration budget.
    pub converged: bool,
    /// Whether the certificate exceeded `tau_cut` (the caller decides how
    /// to handle this; see the pipeline's fallback flag).
    pub failed: bool,
}

/// Payoff `sum_i w_i (X_i^T M X_i - <Sigma, M>)` for known covariance.
pub fn objective_known_sigma(
    x: &Array2<f64>,
    sigma: &Array2<f64>,
    w: &WeightVector,
    m: &CandidateMatrix,
) -> Result<f64> {
    let problem = Problem::new(x, Some(sigma))?;
    problem.check_weights(w)?;
    problem.check_matrix(m.matrix())?;
    Ok(problem.value(w.values(), m.matrix()))
}

/// Payoff `sum_i w_i X_i^T M X_i` for unknown covariance.
pub fn objective_unknown_sigma(
    x: &Array2<f64>,
    w: &WeightVector,
    m: &CandidateMatrix,
) -> Result<f64> {
    let problem = Problem::new(x, None)?;
    problem.check_weights(w)?;
    problem.check_matrix(m.matrix())?;
    Ok(problem.value(w.values(), m.matrix()))
}

/// Best lower bound on the inner maximum `max_M f(w, M)` at fixed weights,
/// found with `opts.cert_steps_final` ascent steps. Returns the bound and
/// the matrix witnessing it. This is the same certification routine
/// [`solve_weights`] uses, exposed so callers can score reference
/// weightings with an identical budget.
pub fn certify_weights(
    x: &Array2<f64>,
    sigma: Option<&Array2<f64>>,
    w: &WeightVector,
    params: &TuningParams,
    opts: &SaddleOptions,
) -> Result<(f64, CandidateMatrix)> {
    params.validate()?;
    let problem = Problem::new(x, sigma)?;
    problem.check_weights(w)?;
    let (value, m) = problem.inner_max(w.values(), params.r1, params.r2, opts.cert_steps_final, opts, None);
    Ok((value, CandidateMatrix::new_unchecked(m)))
}

/// Solves the weighting problem `min_w max_M f(w, M)` and certifies the
/// result against `params.tau_cut`.
///
/// Pass `sigma = Some(..)` to use the covariance-centered payoff and
/// `None` for the uncentered one.
pub fn solve_weights(
    x: &Array2<f64>,
    sigma: Option<&Array2<f64>>,
    params: &TuningParams,
    opts: &SaddleOptions,
) -> Result<SaddleReport> {
    params.validate()?;
    let problem = Problem::new(x, sigma)?;
    let n = problem.n;
    let eps = params.eps;
    let (r1, r2) = (params.r1, params.r2);

    // eps = 0 collapses the capped simplex to the uniform vector: nothing
    // to optimize on the weight block, only certification remains.
    if eps == 0.0 {
        let w = WeightVector::uniform(n, 0.0)?;
        let (cert, m) =
            problem.inner_max(w.values(), r1, r2, opts.cert_steps_final, opts, None);
        return Ok(SaddleReport {
            failed: cert > params.tau_cut,
            weights: w,
            certificate_value: cert,
            witness: CandidateMatrix::new_unchecked(m),
            iterations: 0,
            converged: true,
        });
    }

    // Step-size scales from coarse bounds on the payoff gradients:
    // |per-sample value| <= (||X_i||^2 + ||Sigma||_F) * ||M||_F, and the
    // matrix gradient is a w-average of the per-sample outer products.
    let mbound = (r2 * r2).min(r1 * r1);
    let q: Array1<f64> = problem.row_bound_scales();
    let g_w = q.dot(&q).sqrt().max(1e-12) * mbound;
    let g_m = q.iter().cloned().fold(0.0f64, f64::max).max(1e-12);
    let d_w = std::f64::consts::SQRT_2;
    let d_m = 2.0 * mbound;

    let mut w = Array1::from_elem(n, 1.0 / n as f64);
    let (cert0, mut m) = problem.inner_max(&w, r1, r2, opts.cert_steps_check, opts, None);
    let mut best_w = w.clone();
    let mut best_cert = cert0;
    let mut best_m = m.clone();
    let mut last_cert = cert0;
    let mut stable = 0usize;
    let mut converged = false;
    let mut iterations = 0usize;

    // Prefix sums of the weight iterates let any trailing-window average be
    // formed once a checkpoint is reached.
    let mut sum_w: Array1<f64> = Array1::zeros(n);
    let mut snapshots: Vec<(usize, Array1<f64>)> = vec![(0, sum_w.clone())];

    let tail_average = |t: usize, sum_w: &Array1<f64>, snaps: &[(usize, Array1<f64>)]| {
        let target = t / 2;
        let (t0, s0) = snaps
            .iter()
            .rev()
            .find(|(tk, _)| *tk <= target)
            .expect("snapshot at t = 0 always exists");
        (sum_w - s0) / (t - t0) as f64
    };

    let certify = |wbar: &Array1<f64>,
                       warm: &Array2<f64>,
                       problem: &Problem|
     -> Result<(WeightVector, f64, Array2<f64>)> {
        let wproj = project_capped_simplex(wbar, eps)?;
        let (cert, m_cert) =
            problem.inner_max(wproj.values(), r1, r2, opts.cert_steps_check, opts, Some(warm));
        Ok((wproj, cert, m_cert))
    };

    for t in 1..=opts.max_outer {
        iterations = t;
        let tf = t as f64;

        // Simultaneous descent/ascent step.
        let a = problem.per_sample_values(&m);
        let eta_w = opts.step_scale * d_w / (g_w * tf.sqrt());
        let w_next = project_capped_simplex(&(&w - &(eta_w * &a)), eps)?;

        let g = problem.grad_m(&w);
        let eta_m = opts.step_scale * d_m / (g_m * tf.sqrt());
        let proj = project_feasible_matrix(
            &(&m + &(eta_m * &g)),
            r1,
            r2,
            opts.dykstra_max_sweeps,
            opts.dykstra_tol,
        )?;
        m = proj.matrix.into_inner();

        w = w_next.values().clone();
        sum_w += &w;

        if t % opts.check_every == 0 {
            snapshots.push((t, sum_w.clone()));
            let wbar = tail_average(t, &sum_w, &snapshots);
            let (wproj, cert, m_cert) = certify(&wbar, &m, &problem)?;
            if cert < best_cert {
                best_w = wproj.values().clone();
                best_cert = cert;
                best_m = m_cert;
            }
            if (cert - last_cert).abs() <= opts.cert_rel_tol * cert.abs().max(1.0) {
                stable += 1;
            } else {
                stable = 0;
            }
            last_cert = cert;
            if stable >= opts.patience {
                converged = true;
                break;
            }
        }
    }

    // Check-time certificates are loose lower bounds of uneven tightness
    // (a short ascent, warm-started from a moving matrix), so the tracked
    // best can lock onto whichever candidate was scored most loosely
    // rather than the genuinely best weights. Settle the winner honestly:
    // re-certify both the tracked best and the final tail average with the
    // full final budget and keep the lower value.
    let (mut certificate, mut witness) =
        problem.inner_max(&best_w, r1, r2, opts.cert_steps_final, opts, Some(&best_m));
    let mut weights = best_w;
    if iterations > 0 {
        let wbar = tail_average(iterations, &sum_w, &snapshots);
        let wproj = project_capped_simplex(&wbar, eps)?;
        let (cert_avg, m_avg) =
            problem.inner_max(wproj.values(), r1, r2, opts.cert_steps_final, opts, Some(&m));
        if cert_avg < certificate {
            certificate = cert_avg;
            witness = m_avg;
            weights = wproj.values().clone();
        }
    }
    Ok(SaddleReport {
        weights: WeightVector::new(weights, eps)?,
        certificate_value: certificate,
        witness: CandidateMatrix::new_unchecked(witness),
        iterations,
        converged,
        failed: certificate > params.tau_cut,
    })
}

/// Problem data shared by the solver internals.
struct Problem<'a> {
    x: &'a Array2<f64>,
    sigma: Option<&'a Array2<f64>>,
    n: usize,
    d: usize,
}

impl<'a> Problem<'a> {
    fn new(x: &'a Array2<f64>, sigma: Option<&'a Array2<f64>>) -> Result<Self> {
        let (n, d) = x.dim();
        if n == 0 || d == 0 {
            return Err(Error::invalid("design matrix must be non-empty"));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("design matrix".into()));
        }
        if let Some(s) = sigma {
            if s.nrows() != d || s.ncols() != d {
                return Err(Error::dim(format!(
                    "covariance is {}x{} but design has {d} columns",
                    s.nrows(),
                    s.ncols()
                )));
            }
            if s.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("covariance".into()));
            }
        }
        Ok(Problem { x, sigma, n, d })
    }

    fn check_weights(&self, w: &WeightVector) -> Result<()> {
        if w.n() != self.n {
            return Err(Error::dim(format!(
                "weights cover {} rows but design has {}",
                w.n(),
                self.n
            )));
        }
        Ok(())
    }

    fn check_matrix(&self, m: &Array2<f64>) -> Result<()> {
        if m.nrows() != self.d || m.ncols() != self.d {
            return Err(Error::dim(format!(
                "matrix is {}x{} but design has {} columns",
                m.nrows(),
                m.ncols(),
                self.d
            )));
        }
        Ok(())
    }

    /// `a_i = X_i^T M X_i - <Sigma, M>` for every row.
    fn per_sample_values(&self, m: &Array2<f64>) -> Array1<f64> {
        let xm = self.x.dot(m);
        let mut a = Array1::zeros(self.n);
        for i in 0..self.n {
            a[i] = xm.row(i).dot(&self.x.row(i));
        }
        if let Some(s) = self.sigma {
            let shift: f64 = s.iter().zip(m.iter()).map(|(u, v)| u * v).sum();
            a -= shift;
        }
        a
    }

    /// Gradient in `M`: `sum_i w_i X_i X_i^T - (sum_i w_i) Sigma`.
    fn grad_m(&self, w: &Array1<f64>) -> Array2<f64> {
        let mut xs = self.x.to_owned();
        for (i, mut row) in xs.rows_mut().into_iter().enumerate() {
            row *= w[i];
        }
        let mut g = xs.t().dot(self.x);
        g = 0.5 * (&g + &g.t());
        if let Some(s) = self.sigma {
            let total: f64 = w.sum();
            g.scaled_add(-total, s);
        }
        g
    }

    fn value(&self, w: &Array1<f64>, m: &Array2<f64>) -> f64 {
        w.dot(&self.per_sample_values(m))
    }

    /// Per-row scale bounds `||X_i||^2 + ||Sigma||_F` used for step sizes.
    fn row_bound_scales(&self) -> Array1<f64> {
        let sig_f = self
            .sigma
            .map(|s| s.iter().map(|v| v * v).sum::<f64>().sqrt())
            .unwrap_or(0.0);
        Array1::from_shape_fn(self.n, |i| {
            let r = self.x.row(i);
            r.dot(&r) + sig_f
        })
    }

    /// Approximate `max_M <grad_m(w), M>` over the feasible set by
    /// projected ascent, seeded with a closed-form rank-one candidate and
    /// an optional warm start. Returns the best payoff seen and its
    /// (feasible) witness; the payoff at any feasible iterate is a valid
    /// lower bound on the maximum.
    fn inner_max(
        &self,
        w: &Array1<f64>,
        r1: f64,
        r2: f64,
        steps: usize,
        opts: &SaddleOptions,
        warm: Option<&Array2<f64>>,
    ) -> (f64, Array2<f64>) {
        let g = self.grad_m(w);
        let score = |m: &Array2<f64>| -> f64 { g.iter().zip(m.iter()).map(|(a, b)| a * b).sum() };

        // The zero matrix is always feasible, so the maximum is >= 0.
        let mut best_val = 0.0;
        let mut best_m = Array2::zeros((self.d, self.d));

        // Rank-one candidate along the top eigenvector, scaled to the
        // largest feasible multiple.
        let (lam, v) = linalg::top_eigpair(&g, 300, 1e-12);
        if lam > 0.0 {
            let l1 = v.iter().map(|z| z.abs()).sum::<f64>();
            let c = (r2 * r2).min(r1 * r1 / (l1 * l1));
            if c.is_finite() && c > 0.0 {
                let cand = c * &outer(&v);
                let val = score(&cand);
                if val > best_val {
                    best_val = val;
                    best_m = cand;
                }
            }
        }
        if let Some(m0) = warm {
            let val = score(m0);
            if val > best_val {
                best_val = val;
                best_m = m0.clone();
            }
        }

        let g_norm = g.iter().map(|z| z * z).sum::<f64>().sqrt().max(1e-12);
        let mut m = best_m.clone();
        let mut stall = 0usize;
        for t in 1..=steps {
            let eta = 2.0 * (r2 * r2).min(r1 * r1) / (g_norm * (t as f64).sqrt());
            let stepped = &m + &(eta * &g);
            let proj = match project_feasible_matrix(
                &stepped,
                r1,
                r2,
                opts.dykstra_max_sweeps,
                opts.dykstra_tol,
            ) {
                Ok(p) => p,
                Err(_) => break,
            };
            m = proj.matrix.into_inner();
            let val = score(&m);
            if val > best_val * (1.0 + 1e-9) + 1e-15 {
                best_val = val;
                best_m = m.clone();
                stall = 0;
            } else {
                stall += 1;
                if stall >= 8 {
                    break;
                }
            }
        }
        (best_val, best_m)
    }
}

fn outer(v: &Array1<f64>) -> Array2<f64> {
    let d = v.len();
    Array2::from_shape_fn((d, d), |(i, j)| v[i] * v[j])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::{arr1, arr2};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn toy_params(eps: f64, r1: f64, r2: f64, tau: f64) -> TuningParams {
        TuningParams::new(1.0, 0.0, eps, tau, r1, r2).unwrap()
    }

    #[test]
    fn objectives_match_hand_computation() {
        let x = arr2(&[[1.0, 0.0], [0.0, 2.0]]);
        let sigma = Array2::eye(2);
        let m = CandidateMatrix::new(arr2(&[[0.5, 0.0], [0.0, 0.25]]), 2.0, 1.0).unwrap();
        let w = WeightVector::new(arr1(&[0.3, 0.7]), 0.5).unwrap();
        // Known: a_1 = 0.5 - 0.75 = -0.25, a_2 = 1.0 - 0.75 = 0.25;
        // payoff = 0.3*(-0.25) + 0.7*0.25 = 0.1.
        let known = objective_known_sigma(&x, &sigma, &w, &m).unwrap();
        assert_abs_diff_eq!(known, 0.1, epsilon = 1e-14);
        // Unknown: 0.3*0.5 + 0.7*1.0 = 0.85.
        let unknown = objective_unknown_sigma(&x, &w, &m).unwrap();
        assert_abs_diff_eq!(unknown, 0.85, epsilon = 1e-14);
    }

    #[test]
    fn eps_zero_returns_uniform_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = Array2::from_shape_fn((12, 2), |_| rng.random_range(-1.0..1.0));
        let params = toy_params(0.0, 2.0, 1.0, 100.0);
        let rep = solve_weights(&x, None, &params, &SaddleOptions::default()).unwrap();
        assert_eq!(rep.iterations, 0);
        assert!(rep.converged);
        assert!(!rep.failed);
        for &wi in rep.weights.values() {
            assert_abs_diff_eq!(wi, 1.0 / 12.0, epsilon = 1e-15);
        }
    }

    fn contaminated_instance(n: usize, d: usize, scale: f64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut x = Array2::from_shape_fn((n, d), |_| {
            (0..12).map(|_| rng.random_range(-0.5..0.5)).sum::<f64>()
        });
        for j in 0..d {
            x[[0, j]] = scale; // one leverage row
        }
        x
    }

    #[test]
    fn solver_downweights_leverage_row() {
        let n = 30;
        let x = contaminated_instance(n, 3, 20.0);
        let params = toy_params(0.1, 2.0, 1.0, 1e9);
        let opts = SaddleOptions { max_outer: 300, check_every: 30, ..SaddleOptions::default() };
        let rep = solve_weights(&x, None, &params, &opts).unwrap();
        let w = rep.weights.values();
        assert!(
            w[0] < 1.0 / (2.0 * n as f64),
            "leverage row kept weight {}",
            w[0]
        );
        // Certificate must improve on the uniform weighting.
        let uniform = WeightVector::uniform(n, 0.1).unwrap();
        let (cert_u, _) = certify_weights(&x, None, &uniform, &params, &opts).unwrap();
        assert!(rep.certificate_value < cert_u);
    }

    #[test]
    fn certificate_is_consistent_with_witness() {
        let x = contaminated_instance(25, 3, 10.0);
        let params = toy_params(0.12, 2.0, 1.0, 1e9);
        let rep = solve_weights(&x, None, &params, &SaddleOptions::default()).unwrap();
        let payoff = objective_unknown_sigma(&x, &rep.weights, &rep.witness).unwrap();
        assert_abs_diff_eq!(payoff, rep.certificate_value, epsilon = 1e-9);
        assert!(rep.witness.membership_violation(params.r1, params.r2) <= 1e-6);
    }

    #[test]
    fn failure_flag_follows_tau_cut() {
        let x = contaminated_instance(20, 3, 15.0);
        let lenient = toy_params(0.1, 2.0, 1.0, 1e9);
        let strict = toy_params(0.1, 2.0, 1.0, 1e-12);
        let ok = solve_weights(&x, None, &lenient, &SaddleOptions::default()).unwrap();
        assert!(!ok.failed);
        let bad = solve_weights(&x, None, &strict, &SaddleOptions::default()).unwrap();
        assert!(bad.failed);
    }

    #[test]
    fn solver_is_deterministic() {
        let x = contaminated_instance(20, 3, 12.0);
        let params = toy_params(0.15, 2.0, 1.0, 10.0);
        let a = solve_weights(&x, None, &params, &SaddleOptions::default()).unwrap();
        let b = solve_weights(&x, None, &params, &SaddleOptions::default()).unwrap();
        assert_eq!(a.certificate_value.to_bits(), b.certificate_value.to_bits());
        assert_eq!(a.weights.values(), b.weights.values());
        assert_eq!(a.iterations, b.iterations);
    }

    #[test]
    fn known_sigma_centering_shrinks_clean_certificate() {
        // On clean unit-covariance data the centered payoff removes the
        // bulk term, so the certificate is much smaller than uncentered.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = Array2::from_shape_fn((80, 4), |_| {
            (0..12).map(|_| rng.random_range(-0.5..0.5)).sum::<f64>()
        });
        let sigma = Array2::eye(4);
        let params = toy_params(0.05, 2.0, 1.0, 1e9);
        let opts = SaddleOptions::default();
        let centered = solve_weights(&x, Some(&sigma), &params, &opts).unwrap();
        let uncentered = solve_weights(&x, None, &params, &opts).unwrap();
        assert!(centered.certificate_value < uncentered.certificate_value);
        assert!(centered.certificate_value >= 0.0);
    }

    #[test]
    fn rejects_shape_mismatches() {
        let x = Array2::<f64>::zeros((5, 3));
        let sigma = Array2::<f64>::eye(2);
        let params = toy_params(0.1, 2.0, 1.0, 1.0);
        assert!(solve_weights(&x, Some(&sigma), &params, &SaddleOptions::default()).is_err());
        let w = WeightVector::uniform(4, 0.1).unwrap();
        let m = CandidateMatrix::new(Array2::eye(3) * 0.1, 2.0, 1.0).unwrap();
        assert!(objective_unknown_sigma(&x, &w, &m).is_err());
    }
}
