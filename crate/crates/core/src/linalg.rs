//! Thin internal shim over `nalgebra` for the few dense factorizations the
//! solvers need. Public interfaces stay in `ndarray` types.

use nalgebra::DMatrix;
use ndarray::{Array1, Array2};

pub(crate) fn to_na(a: &Array2<f64>) -> DMatrix<f64> {
    let (r, c) = a.dim();
    DMatrix::from_fn(r, c, |i, j| a[[i, j]])
}

pub(crate) fn to_nd(m: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

/// Eigendecomposition of a symmetric matrix. Returns `(eigenvalues,
/// eigenvectors)` with eigenvectors stored as columns, in matching order.
pub(crate) fn sym_eigh(a: &Array2<f64>) -> (Array1<f64>, Array2<f64>) {
    let eig = to_na(a).symmetric_eigen();
    let vals = Array1::from_iter(eig.eigenvalues.iter().copied());
    (vals, to_nd(&eig.eigenvectors))
}

/// Lower Cholesky factor of a symmetric positive-definite matrix, or `None`
/// if the factorization fails.
pub(crate) fn cholesky(a: &Array2<f64>) -> Option<Array2<f64>> {
    nalgebra::Cholesky::new(to_na(a)).map(|ch| to_nd(&ch.l()))
}

/// Whether `a + shift * I` admits a Cholesky factorization. Used as a cheap
/// positive-semidefiniteness check with a small tolerance shift.
pub(crate) fn is_psd_within(a: &Array2<f64>, shift: f64) -> bool {
    let mut m = to_na(a);
    for i in 0..m.nrows() {
        m[(i, i)] += shift;
    }
    nalgebra::Cholesky::new(m).is_some()
}

/// Largest (signed) eigenvalue and its unit eigenvector for a symmetric
/// matrix, via shifted power iteration with a deterministic start.
pub(crate) fn top_eigpair(a: &Array2<f64>, max_iter: usize, tol: f64) -> (f64, Array1<f64>) {
    let d = a.nrows();
    // Gershgorin shift makes the operator PSD so power iteration targets the
    // largest signed eigenvalue rather than the largest magnitude.
    let shift = a
        .rows()
        .into_iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let mut v = Array1::from_elem(d, 1.0 / (d as f64).sqrt());
    v[0] += 1e-3; // break symmetry for sign-alternating structures
    let mut norm = v.dot(&v).sqrt();
    v /= norm;
    let mut lambda = 0.0;
    for _ in 0..max_iter {
        let mut w = a.dot(&v);
        w.scaled_add(shift, &v);
        norm = w.dot(&w).sqrt();
        if norm <= f64::MIN_POSITIVE {
            return (0.0, v); // a = -shift * I edge case: any unit vector works
        }
        w /= norm;
        let new_lambda = w.dot(&a.dot(&w));
        let done = (new_lambda - lambda).abs() <= tol * lambda.abs().max(1.0);
        v = w;
        lambda = new_lambda;
        if done {
            break;
        }
    }
    (lambda, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::arr2;

    #[test]
    fn eigh_reconstructs_matrix() {
        let a = arr2(&[[2.0, 1.0, 0.0], [1.0, 3.0, -1.0], [0.0, -1.0, 1.5]]);
        let (vals, vecs) = sym_eigh(&a);
        let lam = Array2::from_diag(&vals);
        let rebuilt = vecs.dot(&lam).dot(&vecs.t());
        for (x, y) in rebuilt.iter().zip(a.iter()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn cholesky_roundtrip() {
        let a = arr2(&[[4.0, 2.0], [2.0, 3.0]]);
        let l = cholesky(&a).unwrap();
        let rebuilt = l.dot(&l.t());
        for (x, y) in rebuilt.iter().zip(a.iter()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
        let not_psd = arr2(&[[1.0, 2.0], [2.0, 1.0]]);
        assert!(cholesky(&not_psd).is_none());
        assert!(!is_psd_within(&not_psd, 1e-9));
        assert!(is_psd_within(&a, 0.0));
    }

    #[test]
    fn top_eigpair_finds_largest_signed_eigenvalue() {
        // Eigenvalues -5 and 2: the largest signed one is 2, even though -5
        // dominates in magnitude.
        let a = arr2(&[[-5.0, 0.0], [0.0, 2.0]]);
        let (lambda, v) = top_eigpair(&a, 500, 1e-14);
        assert_abs_diff_eq!(lambda, 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(v[1].abs(), 1.0, epsilon = 1e-6);
    }
}
