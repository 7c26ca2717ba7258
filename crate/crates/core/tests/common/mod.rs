//! Independent reference computations shared by the integration tests. Nothing here
//! calls into the library's numerics: quadrature is adaptive Simpson, eigenproblems
//! go through a cyclic Jacobi sweep on the real embedding, inverses through
//! Gauss–Jordan elimination.

#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rmtlab_core::ensemble::HermitianMatrix;

pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Semicircle density written out independently.
pub fn rho(x: f64) -> f64 {
    if x.abs() >= 2.0 {
        0.0
    } else {
        (4.0 - x * x).sqrt() / (2.0 * PI)
    }
}

/// `∫ρ(x)/(x − z) dx` with `x = 2 sin θ`, so `ρ(x)dx = (2/π)cos²θ dθ` is smooth.
/// Splitting at the point closest to `Re z` keeps the near-pole peak resolved.
pub fn stieltjes_quadrature(z: C64) -> C64 {
    let theta_c = (z.re / 2.0).clamp(-1.0, 1.0).asin();
    let integrate = |part: fn(C64) -> f64| {
        let g = |t: f64| 2.0 / PI * t.cos().powi(2) * part(1.0 / (2.0 * t.sin() - z));
        simpson(&g, -PI / 2.0, theta_c, 1e-12) + simpson(&g, theta_c, PI / 2.0, 1e-12)
    };
    C64::new(integrate(|w| w.re), integrate(|w| w.im))
}

pub fn semicircle_measure(a: f64, b: f64) -> f64 {
    simpson(&rho, a.max(-2.0), b.min(2.0), 1e-13)
}

/// Dense complex matrix in row-major `Vec<Vec<_>>` form.
pub type Dense = Vec<Vec<C64>>;

pub fn dense(h: &HermitianMatrix) -> Dense {
    let n = h.n();
    (0..n).map(|i| (0..n).map(|j| h.get(i, j)).collect()).collect()
}

/// Eigen-pairs of a real symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

/// `f(H)` for Hermitian `H` through the real embedding `[[A, −B], [B, A]]` of
/// `H = A + iB`, whose spectral calculus restricts to `f(H)` blockwise.
pub fn spectral_function(h: &HermitianMatrix, f: &dyn Fn(f64) -> f64) -> Dense {
    let n = h.n();
    let m: Vec<Vec<f64>> = (0..2 * n)
        .map(|r| {
            (0..2 * n)
                .map(|c| {
                    let v = h.get(r % n, c % n);
                    match (r < n, c < n) {
                        (true, true) | (false, false) => v.re,
                        (true, false) => -v.im,
                        (false, true) => v.im,
                    }
                })
                .collect()
        })
        .collect();
    let (vals, vecs) = jacobi(m);
    let fm = |r: usize, c: usize| (0..2 * n).map(|k| vecs[r][k] * f(vals[k]) * vecs[c][k]).sum::<f64>();
    (0..n).map(|i| (0..n).map(|j| C64::new(fm(i, j), fm(n + i, j))).collect()).collect()
}

/// Eigenvalues of `H` in decreasing order (each appears twice in the embedding).
pub fn eigenvalues(h: &HermitianMatrix) -> Vec<f64> {
    let n = h.n();
    let m: Vec<Vec<f64>> = (0..2 * n)
        .map(|r| {
            (0..2 * n)
                .map(|c| {
                    let v = h.get(r % n, c % n);
                    match (r < n, c < n) {
                        (true, true) | (false, false) => v.re,
                        (true, false) => -v.im,
                        (false, true) => v.im,
                    }
                })
                .collect()
        })
        .collect();
    let (mut vals, _) = jacobi(m);
    vals.sort_by(|a, b| b.total_cmp(a));
    vals.into_iter().step_by(2).collect()
}

/// Gauss–Jordan inverse with partial pivoting.
pub fn invert(mut a: Dense) -> Dense {
    let n = a.len();
    let mut inv: Dense = (0..n).map(|i| (0..n).map(|j| C64::new(f64::from(u8::from(i == j)), 0.0)).collect()).collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| a[x][col].norm().total_cmp(&a[y][col].norm())).unwrap();
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col];
        for j in 0..n {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for r in 0..n {
            if r != col {
                let factor = a[r][col];
                if factor != C64::new(0.0, 0.0) {
                    for j in 0..n {
                        let (ac, ic) = (a[col][j], inv[col][j]);
                        a[r][j] -= factor * ac;
                        inv[r][j] -= factor * ic;
                    }
                }
            }
        }
    }
    inv
}

/// `(H − z)⁻¹` by elimination.
pub fn resolvent(h: &HermitianMatrix, z: C64) -> Dense {
    let mut a = dense(h);
    for (i, row) in a.iter_mut().enumerate() {
        row[i] -= z;
    }
    invert(a)
}

pub fn max_diff(a: &Dense, b: impl Fn(usize, usize) -> C64) -> f64 {
    let mut worst = 0.0f64;
    for (i, row) in a.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            worst = worst.max((v - b(i, j)).norm());
        }
    }
    worst
}
