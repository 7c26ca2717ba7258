//! Thin adapter over `faer` for the dense Hermitian linear algebra used everywhere else.
//!
//! faer is built without its rayon backend, so every kernel here is sequential and
//! bit-reproducible; parallelism lives one level up, across Monte Carlo samples.

use faer::linalg::solvers::DenseSolveCore;
use faer::{Mat, MatRef, Side};

use crate::{Error, Result, C64};

pub type CMat = Mat<C64>;

pub fn identity(n: usize) -> CMat {
    Mat::from_fn(n, n, |i, j| if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
}

/// `H - z I`.
pub fn shifted(h: MatRef<'_, C64>, z: C64) -> CMat {
    let mut out = h.to_owned();
    for i in 0..h.nrows() {
        out[(i, i)] -= z;
    }
    out
}

pub fn max_abs(m: MatRef<'_, C64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].norm());
        }
    }
    best
}

pub fn max_abs_diff(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut best = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            best = best.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    best
}

/// Induced 1-norm (max column sum).
pub fn norm_one(m: MatRef<'_, C64>) -> f64 {
    (0..m.ncols()).map(|j| (0..m.nrows()).map(|i| m[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn matmul(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> CMat {
    a * b
}

/// `a* b`.
pub fn adjoint_matmul(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> CMat {
    a.adjoint() * b
}

/// `a b*`.
pub fn matmul_adjoint(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> CMat {
    a * b.adjoint()
}

/// Dense inverse through partially pivoted LU.
///
/// Returns `NumericalFailure` when the factorisation produces non-finite entries or
/// the 1-norm condition estimate exceeds `1e15`.
pub fn inverse(m: MatRef<'_, C64>) -> Result<CMat> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::InvalidDimension(format!("{}x{} is not square", n, m.ncols())));
    }
    let inv = m.partial_piv_lu().inverse();
    let finite = (0..n).all(|j| (0..n).all(|i| inv[(i, j)].re.is_finite() && inv[(i, j)].im.is_finite()));
    let condition = if finite { norm_one(m) * norm_one(inv.as_ref()) } else { f64::INFINITY };
    if !condition.is_finite() || condition > 1e15 {
        return Err(Error::NumericalFailure { message: "LU inverse is unreliable".into(), condition });
    }
    Ok(inv)
}

/// Eigenvalues in increasing order with orthonormal eigenvectors as columns.
///
/// A real symmetric input (`real == true`) is routed through the real solver, which
/// is roughly three times faster; the eigenvectors are returned as complex columns
/// either way.
pub fn hermitian_eigen(h: MatRef<'_, C64>, real: bool) -> Result<(Vec<f64>, CMat)> {
    let n = h.nrows();
    let fail = |e: faer::linalg::evd::EvdError| Error::NumericalFailure {
        message: format!("Hermitian eigensolver did not converge: {e:?}"),
        condition: f64::NAN,
    };
    if real {
        let hr = Mat::<f64>::from_fn(n, n, |i, j| h[(i, j)].re);
        let evd = hr.self_adjoint_eigen(Side::Lower).map_err(fail)?;
        let s = evd.S().column_vector();
        let vals = (0..n).map(|i| s[i]).collect();
        let u = evd.U();
        let vecs = Mat::from_fn(n, n, |i, j| C64::new(u[(i, j)], 0.0));
        Ok((vals, vecs))
    } else {
        let evd = h.self_adjoint_eigen(Side::Lower).map_err(fail)?;
        let s = evd.S().column_vector();
        let vals = (0..n).map(|i| s[i].re).collect();
        Ok((vals, evd.U().to_owned()))
    }
}

/// Eigenvalues only, increasing.
pub fn hermitian_eigenvalues(h: MatRef<'_, C64>, real: bool) -> Result<Vec<f64>> {
    let n = h.nrows();
    let fail = |e: faer::linalg::evd::EvdError| Error::NumericalFailure {
        message: format!("Hermitian eigensolver did not converge: {e:?}"),
        condition: f64::NAN,
    };
    if real {
        let hr = Mat::<f64>::from_fn(n, n, |i, j| h[(i, j)].re);
        hr.self_adjoint_eigenvalues(Side::Lower).map_err(fail)
    } else {
        h.self_adjoint_eigenvalues(Side::Lower).map_err(fail)
    }
}

/// Determinant of a small dense real matrix by Gaussian elimination with partial pivoting.
pub fn det_real(mut a: Vec<f64>, n: usize) -> f64 {
    assert_eq!(a.len(), n * n);
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| a[x * n + col].abs().total_cmp(&a[y * n + col].abs())).unwrap();
        let p = a[pivot * n + col];
        if p == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            det = -det;
        }
        det *= p;
        for row in col + 1..n {
            let f = a[row * n + col] / p;
            if f != 0.0 {
                for k in col..n {
                    a[row * n + k] -= f * a[col * n + k];
                }
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_of_permutation_and_triangular() {
        assert_eq!(det_real(vec![0.0, 1.0, 1.0, 0.0], 2), -1.0);
        let a = vec![2.0, 1.0, 3.0, 0.0, 4.0, 5.0, 0.0, 0.0, 0.5];
        assert!((det_real(a, 3) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn inverse_of_diagonal() {
        let m = Mat::from_fn(3, 3, |i, j| if i == j { C64::new(i as f64 + 1.0, 1.0) } else { C64::new(0.0, 0.0) });
        let inv = inverse(m.as_ref()).unwrap();
        for i in 0..3 {
            let expect = C64::new(1.0, 0.0) / C64::new(i as f64 + 1.0, 1.0);
            assert!((inv[(i, i)] - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn singular_inverse_is_reported() {
        let m = Mat::from_fn(2, 2, |_, _| C64::new(1.0, 0.0));
        let r = inverse(m.as_ref());
        assert!(r.is_err(), "{:?}", r.map(|m| m[(0, 0)]));
    }
}
