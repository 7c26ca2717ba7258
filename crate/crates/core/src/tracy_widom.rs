//! GUE Tracy–Widom distribution `F₂(s) = det(I − K_Ai)` on `L²[s, ∞)`.
//!
//! Nyström discretization: Gauss–Legendre nodes `t ∈ (−1, 1)` are mapped to
//! `x = s + 10·tan(π(t + 1)/4)`, which sends the half-line onto the interval while
//! clustering nodes near `s` where the Airy kernel lives.

use std::f64::consts::PI;

use crate::airy;
use crate::linalg::det_real;
use crate::quadrature::GaussLegendre;
use crate::{Error, Result};

/// Order used when callers have no reason to pick one.
pub const DEFAULT_ORDER: usize = 40;

const MAP_SCALE: f64 = 10.0;

/// `K_Ai(x, y) = (Ai(x)Ai'(y) − Ai'(x)Ai(y))/(x − y)`, with the diagonal limit
/// `Ai'(x)² − x Ai(x)²`.
pub fn airy_kernel(x: f64, y: f64) -> f64 {
    let (ax, dx) = airy::ai_and_prime(x);
    let (ay, dy) = airy::ai_and_prime(y);
    kernel_from_values(x, ax, dx, y, ay, dy)
}

fn kernel_from_values(x: f64, ax: f64, dx: f64, y: f64, ay: f64, dy: f64) -> f64 {
    if x == y {
        dx * dx - x * ax * ax
    } else {
        (ax * dy - dx * ay) / (x - y)
    }
}

/// Fredholm determinant with `order` Nyström nodes, no convergence check.
pub fn f2_at_order(s: f64, order: usize) -> f64 {
    let gl = GaussLegendre::new(order);
    let mut nodes = Vec::with_capacity(order);
    for (&t, &w) in gl.nodes.iter().zip(&gl.weights) {
        let theta = PI * (t + 1.0) / 4.0;
        let x = s + MAP_SCALE * theta.tan();
        let jac = MAP_SCALE * PI / 4.0 / theta.cos().powi(2);
        let (a, d) = airy::ai_and_prime(x);
        nodes.push((x, (w * jac).sqrt(), a, d));
    }
    let mut m = vec![0.0; order * order];
    for (i, &(x, wx, ax, dx)) in nodes.iter().enumerate() {
        for (j, &(y, wy, ay, dy)) in nodes.iter().enumerate() {
            let k = kernel_from_values(x, ax, dx, y, ay, dy);
            m[i * order + j] = f64::from(u8::from(i == j)) - wx * k * wy;
        }
    }
    det_real(m, order).clamp(0.0, 1.0)
}

/// `F₂(s)` at order `2q`, after checking it agrees with order `q` to `1e-6`.
pub fn tracy_widom_f2(s: f64, order: usize) -> Result<f64> {
    if order < 10 {
        return Err(Error::InvalidParameter(format!("quadrature order {order} is below 10")));
    }
    let coarse = f2_at_order(s, order);
    let fine = f2_at_order(s, 2 * order);
    let difference = (coarse - fine).abs();
    if difference > 1e-6 {
        return Err(Error::AccuracyFailure { difference });
    }
    Ok(fine)
}
