//! Functional calculus for Hermitian matrices.
//!
//! * Helffer–Sjöstrand: `f(H) = π⁻¹ ∬ ∂̄(f̃_n χ)(x + iy) G(x + iy) dx dy` with the
//!   almost-analytic extension `f̃_n(x + iy) = Σ_{k≤n} (iy)^k f⁽ᵏ⁾(x)/k!` and a cutoff `χ`.
//! * Cauchy contour: `f(H) = −(2πi)⁻¹ ∮ f(z) G(z) dz` for holomorphic `f`.
//!
//! Green functions are always obtained by LU solves, so both routes are independent
//! of the spectral decomposition used to validate them.

use std::f64::consts::PI;

use crate::ensemble::HermitianMatrix;
use crate::linalg::{self, CMat};
use crate::quadrature::GaussLegendre;
use crate::{Error, Result, C64};

/// Compactly supported function with derivatives up to [`max_derivative`](Self::max_derivative).
pub trait SmoothFunction: Sync {
    /// `f⁽ᵏ⁾(x)`; zero outside the support.
    fn derivative(&self, k: usize, x: f64) -> f64;
    /// Highest order `k` for which `derivative(k, ·)` is available and bounded.
    fn max_derivative(&self) -> usize;
    fn support(&self) -> (f64, f64);

    /// Points where the highest derivatives may jump, including the support ends.
    fn breakpoints(&self) -> Vec<f64> {
        let (a, b) = self.support();
        vec![a, b]
    }

    fn value(&self, x: f64) -> f64 {
        self.derivative(0, x)
    }
}

/// `(1 − u²)^k` with `u = (x − c)/r` on `|u| < 1`; `C^{k−1}` with a bounded `k`-th derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyBump {
    pub center: f64,
    pub radius: f64,
    pub power: u32,
    /// Coefficients of `(1 − u²)^k` in powers of `u`.
    coeffs: Vec<f64>,
}

impl PolyBump {
    pub fn new(center: f64, radius: f64, power: u32) -> Self {
        assert!(radius > 0.0 && power >= 1);
        let k = power as usize;
        let mut coeffs = vec![0.0; 2 * k + 1];
        let mut binom = 1.0;
        for m in 0..=k {
            coeffs[2 * m] = if m % 2 == 0 { binom } else { -binom };
            binom = binom * (k - m) as f64 / (m + 1) as f64;
        }
        Self { center, radius, power, coeffs }
    }
}

impl SmoothFunction for PolyBump {
    fn derivative(&self, k: usize, x: f64) -> f64 {
        let u = (x - self.center) / self.radius;
        if u.abs() >= 1.0 || k >= self.coeffs.len() {
            return 0.0;
        }
        let mut direct = 0.0;
        for p in (k..self.coeffs.len()).filter(|&p| self.coeffs[p] != 0.0) {
            let falling: f64 = (p - k + 1..=p).map(|v| v as f64).product();
            direct += self.coeffs[p] * falling * u.powi((p - k) as i32);
        }
        direct / self.radius.powi(k as i32)
    }

    fn max_derivative(&self) -> usize {
        self.power as usize
    }

    fn support(&self) -> (f64, f64) {
        (self.center - self.radius, self.center + self.radius)
    }
}

/// Polynomial transition profile on `[0, 1]` rising from 0 to 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transition {
    /// `10t³ − 15t⁴ + 6t⁵`, `C²`; `max |S''| = 10/√3`.
    Quintic,
    /// `35t⁴ − 84t⁵ + 70t⁶ − 20t⁷`, `C³`.
    Septic,
}

impl Transition {
    fn coeffs(self) -> &'static [f64] {
        match self {
            Transition::Quintic => &[0.0, 0.0, 0.0, 10.0, -15.0, 6.0],
            Transition::Septic => &[0.0, 0.0, 0.0, 0.0, 35.0, -84.0, 70.0, -20.0],
        }
    }

    /// Orders with a continuous derivative.
    pub fn smoothness(self) -> usize {
        match self {
            Transition::Quintic => 2,
            Transition::Septic => 3,
        }
    }

    /// `S⁽ᵏ⁾(t)`, constant outside `[0, 1]`.
    pub fn derivative(self, k: usize, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return if k == 0 { 1.0 } else { 0.0 };
        }
        self.coeffs()
            .iter()
            .enumerate()
            .skip(k)
            .map(|(p, &c)| c * (p - k + 1..=p).map(|v| v as f64).product::<f64>() * t.powi((p - k) as i32))
            .sum()
    }
}

/// `1` on `[a, b]`, `0` at distance `≥ η` from it, polynomial transitions in between;
/// `‖f⁽ᵏ⁾‖_∞ = ‖S⁽ᵏ⁾‖_∞ / ηᵏ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothIndicator {
    pub a: f64,
    pub b: f64,
    pub eta: f64,
    pub transition: Transition,
}

impl SmoothIndicator {
    pub fn new(a: f64, b: f64, eta: f64, transition: Transition) -> Self {
        assert!(a <= b && eta > 0.0);
        Self { a, b, eta, transition }
    }
}

/// Quintic smoothed indicator of `[a, b]` at scale `eta_s`.
pub fn smoothed_indicator(a: f64, b: f64, eta_s: f64) -> SmoothIndicator {
    SmoothIndicator::new(a, b, eta_s, Transition::Quintic)
}

impl SmoothFunction for SmoothIndicator {
    fn derivative(&self, k: usize, x: f64) -> f64 {
        let scale = self.eta.powi(k as i32);
        if x < self.a {
            self.transition.derivative(k, (x - self.a + self.eta) / self.eta) / scale
        } else if x > self.b {
            let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * self.transition.derivative(k, (self.b + self.eta - x) / self.eta) / scale
        } else if k == 0 {
            1.0
        } else {
            0.0
        }
    }

    fn max_derivative(&self) -> usize {
        self.transition.smoothness() + 1
    }

    fn support(&self) -> (f64, f64) {
        (self.a - self.eta, self.b + self.eta)
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut p = vec![self.a - self.eta, self.a, self.b, self.b + self.eta];
        p.dedup();
        p
    }
}

/// Even cutoff `χ(x + iy) = χ_x(x) χ_y(y)`: `χ_y = 1` for `|y| ≤ inner` and `0` for
/// `|y| ≥ outer`; `χ_x = 1` on `[x_lo, x_hi]` and vanishes `outer − inner` beyond it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffChi {
    pub x_lo: f64,
    pub x_hi: f64,
    pub inner: f64,
    pub outer: f64,
}

impl CutoffChi {
    pub fn new(x_lo: f64, x_hi: f64, inner: f64, outer: f64) -> Result<Self> {
        if !(x_lo < x_hi && 0.0 < inner && inner < outer) {
            return Err(Error::InvalidCutoff(format!("need x_lo < x_hi and 0 < inner < outer, got [{x_lo}, {x_hi}], {inner}, {outer}")));
        }
        Ok(Self { x_lo, x_hi, inner, outer })
    }

    /// Cutoff whose x-plateau covers both a spectral bound of `h` and the support of `f`.
    pub fn covering(h: &HermitianMatrix, f: &dyn SmoothFunction, inner: f64, outer: f64) -> Result<Self> {
        let bound = spectral_bound(h) + 0.5;
        let (a, b) = f.support();
        Self::new(a.min(-bound), b.max(bound), inner, outer)
    }

    fn x_profile(&self) -> SmoothIndicator {
        SmoothIndicator::new(self.x_lo, self.x_hi, self.outer - self.inner, Transition::Septic)
    }

    fn y_profile(&self, y: f64) -> (f64, f64) {
        let w = self.outer - self.inner;
        let t = (self.outer - y.abs()) / w;
        let v = Transition::Septic.derivative(0, t);
        let d = -Transition::Septic.derivative(1, t) / w * y.signum();
        (v, d)
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        self.x_profile().value(x) * self.y_profile(y).0
    }

    /// `(∂_x χ, ∂_y χ)`.
    pub fn gradient(&self, x: f64, y: f64) -> (f64, f64) {
        let xp = self.x_profile();
        let (vy, dy) = self.y_profile(y);
        (xp.derivative(1, x) * vy, xp.value(x) * dy)
    }

    fn plateau_contains(&self, a: f64, b: f64) -> bool {
        self.x_lo <= a && b <= self.x_hi
    }
}

/// Upper bound on `‖H‖`: the smaller of the Gershgorin and Frobenius bounds.
pub fn spectral_bound(h: &HermitianMatrix) -> f64 {
    let n = h.n();
    let gersh = (0..n).map(|i| (0..n).map(|j| h.get(i, j).norm()).sum::<f64>()).fold(0.0, f64::max);
    gersh.min(h.trace_sq().sqrt())
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|v| v as f64).product()
}

/// `f̃_n(x + iy) = Σ_{k≤n} (iy)^k f⁽ᵏ⁾(x)/k!`.
pub fn almost_analytic(f: &dyn SmoothFunction, n: usize, x: f64, y: f64) -> C64 {
    let iy = C64::new(0.0, y);
    (0..=n).map(|k| iy.powu(k as u32) * f.derivative(k, x) / factorial(k)).sum()
}

/// `∂̄ f̃_n = (iy)ⁿ f⁽ⁿ⁺¹⁾(x)/(2·n!)`, with `∂̄ = (∂_x + i∂_y)/2`.
pub fn dbar_almost_analytic(f: &dyn SmoothFunction, n: usize, x: f64, y: f64) -> C64 {
    C64::new(0.0, y).powu(n as u32) * f.derivative(n + 1, x) / (2.0 * factorial(n))
}

/// `∂̄(f̃_n χ) = χ ∂̄f̃_n + f̃_n ∂̄χ`.
pub fn dbar_extension(f: &dyn SmoothFunction, n: usize, chi: &CutoffChi, x: f64, y: f64) -> C64 {
    let (cx, cy) = chi.gradient(x, y);
    dbar_almost_analytic(f, n, x, y) * chi.value(x, y) + almost_analytic(f, n, x, y) * C64::new(cx, cy) * 0.5
}

/// Integration grid. In `y`: midpoint cells, four on `[0, hx_min]`, then growing by
/// `y_ratio` until they reach width `dy_max`, uniform after that up to the cutoff's
/// outer radius. In `x`: 4-point Gauss–Legendre panels between the breakpoints of
/// `f`, each at most `4·clamp(y/4, hx_min, hx_max)` wide at height `y`, since
/// `G(x + iy)` varies on the scale `y`. Aligning panels with the breakpoints keeps
/// the derivative jumps of spline-type `f` out of the panel interiors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsGrid {
    pub hx_min: f64,
    pub hx_max: f64,
    pub dy_max: f64,
    pub y_ratio: f64,
}

impl Default for HsGrid {
    fn default() -> Self {
        Self { hx_min: 0.005, hx_max: 0.05, dy_max: 0.02, y_ratio: 1.15 }
    }
}

impl HsGrid {
    /// Halves every spacing.
    pub fn refined(&self) -> Self {
        Self { hx_min: self.hx_min / 2.0, hx_max: self.hx_max / 2.0, dy_max: self.dy_max / 2.0, y_ratio: self.y_ratio.sqrt() }
    }

    fn y_edges(&self, outer: f64) -> Vec<f64> {
        let mut edges: Vec<f64> = (0..=4).map(|k| self.hx_min * k as f64 / 4.0).collect();
        let mut y = self.hx_min;
        let mut width = self.hx_min / 4.0;
        while y < outer {
            width = (width * self.y_ratio).min(self.dy_max);
            y = (y + width).min(outer);
            edges.push(y);
        }
        edges
    }

    fn hx_at(&self, y: f64) -> f64 {
        (y / 4.0).clamp(self.hx_min, self.hx_max)
    }
}

#[derive(Debug, Clone)]
pub struct HsResult {
    /// Hermitian part of the integral.
    pub matrix: CMat,
    /// `max |X − X*|` of the assembled integral before taking the Hermitian part.
    pub skew: f64,
    /// Grid points where a Green function was evaluated.
    pub evaluations: usize,
}

/// Helffer–Sjöstrand evaluation of `f(H)`.
///
/// Green functions are only computed in the upper half-plane, using `G(z̄) = G(z)*`.
/// The lower half still gets its own weights `∂̄(f̃χ)(z̄)`, so `skew` measures how far
/// the assembled integral is from Hermitian before the Hermitian part is taken.
pub fn hs_evaluate(h: &HermitianMatrix, f: &dyn SmoothFunction, n: usize, chi: &CutoffChi, grid: &HsGrid) -> Result<HsResult> {
    if f.max_derivative() < n + 1 {
        return Err(Error::UnsupportedOrder(n));
    }
    let (a, b) = f.support();
    let bound = spectral_bound(h);
    if !chi.plateau_contains(a, b) || !chi.plateau_contains(-bound, bound) {
        return Err(Error::InvalidCutoff(format!(
            "plateau [{}, {}] must contain supp f = [{a}, {b}] and the spectral bound ±{bound:.4}",
            chi.x_lo, chi.x_hi
        )));
    }
    let dim = h.n();
    let y_edges = grid.y_edges(chi.outer);
    let mut breaks = f.breakpoints();
    breaks.retain(|&x| a <= x && x <= b);
    let gl = GaussLegendre::new(4);
    let mut upper = CMat::zeros(dim, dim);
    let mut lower = CMat::zeros(dim, dim);
    let mut evaluations = 0;
    for cell in y_edges.windows(2) {
        let (y, dy) = (0.5 * (cell[0] + cell[1]), cell[1] - cell[0]);
        let panel = 4.0 * grid.hx_at(y);
        for piece in breaks.windows(2) {
            let (p, q) = (piece[0], piece[1]);
            let panels = ((q - p) / panel).ceil().max(1.0) as usize;
            let width = (q - p) / panels as f64;
            for k in 0..panels {
                let left = p + k as f64 * width;
                for (&t, &wt) in gl.nodes.iter().zip(&gl.weights) {
                    let x = left + 0.5 * width * (t + 1.0);
                    let weight = dbar_extension(f, n, chi, x, y);
                    let mirrored = dbar_extension(f, n, chi, x, -y);
                    if weight == C64::default() && mirrored == C64::default() {
                        continue;
                    }
                    let g = linalg::inverse(linalg::shifted(h.as_ref(), C64::new(x, y)).as_ref())?;
                    evaluations += 1;
                    let scale = 0.5 * width * wt * dy / PI;
                    let (w, wm) = (weight * scale, mirrored * scale);
                    for j in 0..dim {
                        for i in 0..dim {
                            upper[(i, j)] += w * g[(i, j)];
                            // G(x − iy) = G(x + iy)*
                            lower[(i, j)] += wm * g[(j, i)].conj();
                        }
                    }
                }
            }
        }
    }
    let full = &upper + &lower;
    let skew =
        (0..dim).flat_map(|i| (0..dim).map(move |j| (i, j))).map(|(i, j)| (full[(i, j)] - full[(j, i)].conj()).norm()).fold(0.0, f64::max);
    let matrix = CMat::from_fn(dim, dim, |i, j| (full[(i, j)] + full[(j, i)].conj()) * 0.5);
    Ok(HsResult { matrix, skew, evaluations })
}

/// Square contour `[−R, R] × [−R, R]` traversed counterclockwise, each edge split into
/// `panels` Gauss–Legendre panels of `order` nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquareContour {
    pub radius: f64,
    pub panels: usize,
    pub order: usize,
}

impl SquareContour {
    pub fn new(radius: f64) -> Self {
        Self { radius, panels: 8, order: 20 }
    }
}

/// `−(2πi)⁻¹ ∮ f(z) G(z) dz`.
pub fn contour_evaluate(h: &HermitianMatrix, f: &dyn Fn(C64) -> C64, contour: &SquareContour) -> Result<CMat> {
    let r = contour.radius;
    let lambdas = linalg::hermitian_eigenvalues(h.as_ref(), h.is_real())?;
    for &l in &lambdas {
        if l.abs() >= r {
            return Err(Error::InvalidInput(format!("eigenvalue {l} lies outside the contour of radius {r}")));
        }
        let distance = r - l.abs();
        if distance < 1e-3 {
            return Err(Error::ContourTooClose { distance });
        }
    }
    let corners = [C64::new(r, -r), C64::new(r, r), C64::new(-r, r), C64::new(-r, -r)];
    let gl = GaussLegendre::new(contour.order);
    let dim = h.n();
    let mut acc = CMat::zeros(dim, dim);
    for e in 0..4 {
        let (p, q) = (corners[e], corners[(e + 1) % 4]);
        for panel in 0..contour.panels {
            let t0 = panel as f64 / contour.panels as f64;
            let t1 = (panel + 1) as f64 / contour.panels as f64;
            for (&t, &w) in gl.nodes.iter().zip(&gl.weights) {
                let s = t0 + (t1 - t0) * (t + 1.0) / 2.0;
                let z = p + (q - p) * s;
                let dz = (q - p) * (w * (t1 - t0) / 2.0);
                let g = linalg::inverse(linalg::shifted(h.as_ref(), z).as_ref())?;
                let c = f(z) * dz;
                for j in 0..dim {
                    for i in 0..dim {
                        acc[(i, j)] += c * g[(i, j)];
                    }
                }
            }
        }
    }
    let factor = -1.0 / C64::new(0.0, 2.0 * PI);
    Ok(CMat::from_fn(dim, dim, |i, j| acc[(i, j)] * factor))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_derivatives_match_finite_differences() {
        let f = PolyBump::new(0.3, 1.2, 6);
        for &x in &[-0.5, 0.1, 0.9, 1.3] {
            for k in 0..4 {
                let h = 1e-5;
                let fd = (f.derivative(k, x + h) - f.derivative(k, x - h)) / (2.0 * h);
                let exact = f.derivative(k + 1, x);
                assert!((fd - exact).abs() < 1e-5 * (1.0 + exact.abs()), "k={k} x={x}: {fd} vs {exact}");
            }
        }
        assert_eq!(f.value(2.0), 0.0);
        assert!((f.value(0.3) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn indicator_values() {
        let f = smoothed_indicator(-1.0, 2.0, 0.1);
        assert_eq!(f.value(0.5), 1.0);
        assert_eq!(f.value(2.0 + 0.2), 0.0);
        assert!((f.value(2.05) - 0.5).abs() < 1e-12);
        assert!((f.value(-1.05) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn quintic_second_derivative_constant() {
        // S''' vanishes at (3 ± √3)/6; the maximum 10/√3 of S'' sits at the smaller root
        let t = (3.0 - 3f64.sqrt()) / 6.0;
        assert!((Transition::Quintic.derivative(2, t) - 10.0 / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn extension_on_real_axis() {
        let f = PolyBump::new(0.0, 1.0, 5);
        for n in 0..3 {
            assert_eq!(almost_analytic(&f, n, 0.4, 0.0), C64::new(f.value(0.4), 0.0));
        }
        let e1 = almost_analytic(&f, 1, 0.4, 0.2);
        assert!((e1 - C64::new(f.value(0.4), 0.2 * f.derivative(1, 0.4))).norm() < 1e-15);
    }

    #[test]
    fn bad_cutoff_rejected() {
        assert!(matches!(CutoffChi::new(1.0, -1.0, 0.5, 1.0), Err(Error::InvalidCutoff(_))));
        let h = HermitianMatrix::diagonal(&[3.0, -3.0]);
        let f = PolyBump::new(0.0, 1.0, 6);
        let chi = CutoffChi::new(-2.0, 2.0, 0.5, 1.0).unwrap();
        assert!(matches!(hs_evaluate(&h, &f, 2, &chi, &HsGrid::default()), Err(Error::InvalidCutoff(_))));
    }

    #[test]
    fn contour_too_close() {
        let h = HermitianMatrix::diagonal(&[1.0, 2.9995]);
        let res = contour_evaluate(&h, &|z| z, &SquareContour::new(3.0));
        assert!(matches!(res, Err(Error::ContourTooClose { .. })));
    }
}
