//! Closed-form analytics of the semicircle law `ρ(x) = (2π)⁻¹ √(4 − x²)₊`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result, C64};

/// Spectral parameter `z = E + iη` in the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralParam {
    pub e: f64,
    pub eta: f64,
}

impl SpectralParam {
    pub fn new(e: f64, eta: f64) -> Result<Self> {
        if !(eta > 0.0) || !e.is_finite() || !eta.is_finite() {
            return Err(Error::InvalidParameter(format!("z = {e} + {eta}i is not in the upper half-plane")));
        }
        Ok(Self { e, eta })
    }

    pub fn z(&self) -> C64 {
        C64::new(self.e, self.eta)
    }
}

pub fn density(x: f64) -> f64 {
    if x.abs() >= 2.0 {
        0.0
    } else {
        (4.0 - x * x).sqrt() / (2.0 * PI)
    }
}

/// `m(z) = (−z + √(z−2)·√(z+2))/2`. Taking the product of principal roots (rather
/// than the principal root of `z² − 4`) keeps `m` in the upper half-plane for every
/// `Im z > 0`, including `Re z < 0`.
pub fn stieltjes(z: C64) -> C64 {
    let s = (z - 2.0).sqrt() * (z + 2.0).sqrt();
    let m = (-z + s) * 0.5;
    // the other root is 1/m; pick the form without cancellation
    if (-z - s).norm() > (-z + s).norm() && m.norm() > 0.0 {
        2.0 / (-z - s)
    } else {
        m
    }
}

pub fn stieltjes_m(z: SpectralParam) -> C64 {
    stieltjes(z.z())
}

/// The second root `m̃ = 1/m` of `m² + zm + 1 = 0`, lying in the lower half-plane.
pub fn m_tilde(z: SpectralParam) -> C64 {
    1.0 / stieltjes_m(z)
}

/// `ρ((−∞, x])` from the antiderivative `(x/2)√(4−x²)/(2π) + arcsin(x/2)/π`.
pub fn cdf(x: f64) -> f64 {
    if x <= -2.0 {
        return 0.0;
    }
    if x >= 2.0 {
        return 1.0;
    }
    0.5 + x * (4.0 - x * x).sqrt() / (4.0 * PI) + (x / 2.0).asin() / PI
}

/// `ρ([a, b])`, endpoints clamped to `[−2, 2]`.
pub fn measure(a: f64, b: f64) -> f64 {
    cdf(b) - cdf(a)
}

/// Solves `f(x) = 0` for increasing `f` with `f(lo) ≤ 0 ≤ f(hi)`: bisection until the
/// bracket is short, then secant steps kept inside the bracket.
fn increasing_root(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let (mut flo, mut fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return lo;
    }
    if fhi == 0.0 {
        return hi;
    }
    while hi - lo > 1e-4 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm < 0.0 {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let mut next = if fhi > flo { lo - flo * (hi - lo) / (fhi - flo) } else { 0.5 * (lo + hi) };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let fx = f(next);
        x = next;
        if fx.abs() <= tol || hi - lo <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            break;
        }
        if fx < 0.0 {
            lo = next;
            flo = fx;
        } else {
            hi = next;
            fhi = fx;
        }
        // one bisection after each secant step guarantees the bracket shrinks
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm < 0.0 {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    x
}

/// Root of `cdf(x) = p` for `p ≤ 1/2`, in `[−2, 0]`.
fn lower_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return -2.0;
    }
    increasing_root(|x| cdf(x) - p, -2.0, 0.0, 1e-14)
}

/// `Q(x)` with `ρ((−∞, Q(x)]) = x`. Upper quantiles are reflected from lower ones, so
/// `Q(x) + Q(1 − x) = 0` holds up to the rounding of `1 − x`.
pub fn quantile(x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::InvalidParameter(format!("quantile level {x} is outside (0, 1)")));
    }
    Ok(if x <= 0.5 { lower_quantile(x) } else { -lower_quantile(1.0 - x) })
}

/// Classical eigenvalue locations, largest first.
#[derive(Debug, Clone, PartialEq)]
pub struct TypicalLocations {
    pub n: usize,
    pub gamma: Vec<f64>,
}

impl TypicalLocations {
    /// `max_i |N ρ([γ_i, 2]) − (i − 1/2)|`.
    pub fn max_residual(&self) -> f64 {
        let n = self.n as f64;
        self.gamma.iter().enumerate().map(|(i, &g)| (n * measure(g, 2.0) - (i as f64 + 0.5)).abs()).fold(0.0, f64::max)
    }
}

/// `γ_i` defined by `N ρ([γ_i, 2]) = i − 1/2`, `i = 1..N`.
pub fn typical_locations(n: usize) -> Result<TypicalLocations> {
    if n == 0 {
        return Err(Error::InvalidDimension("typical locations need N ≥ 1".into()));
    }
    let nf = n as f64;
    let gamma = (1..=n)
        .map(|i| {
            let tail = (i as f64 - 0.5) / nf;
            // ρ([γ, 2]) = tail  ⇔  cdf(−γ) = tail by symmetry
            if tail <= 0.5 {
                -lower_quantile(tail)
            } else {
                let head = (n - i) as f64 + 0.5;
                lower_quantile(head / nf)
            }
        })
        .collect();
    Ok(TypicalLocations { n, gamma })
}

/// `N` i.i.d. semicircle variables by inverse-CDF sampling.
pub fn sample_iid_semicircle(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| loop {
            let u: f64 = rng.random();
            if u > 0.0 {
                break if u <= 0.5 { lower_quantile(u) } else { -lower_quantile(1.0 - u) };
            }
        })
        .collect()
}

/// Distance to the spectral edge `κ = ||E| − 2|`.
pub fn kappa(e: f64) -> f64 {
    (e.abs() - 2.0).abs()
}

/// `Ψ(z) = √(Im m(z)/(Nη)) + 1/(Nη)`.
pub fn psi(z: SpectralParam, n: usize) -> f64 {
    let neta = n as f64 * z.eta;
    (stieltjes_m(z).im / neta).sqrt() + 1.0 / neta
}

/// The two roots of `u² + zu + 1 + r = 0`, larger imaginary part first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityPair {
    pub m_plus: C64,
    pub m_minus: C64,
    pub gap: f64,
}

impl StabilityPair {
    fn from_roots(a: C64, b: C64) -> Self {
        let (m_plus, m_minus) = if a.im >= b.im { (a, b) } else { (b, a) };
        Self { m_plus, m_minus, gap: (m_plus - m_minus).norm() }
    }

    /// Roots of the unperturbed equation, `(m, m̃)`.
    pub fn unperturbed(z: SpectralParam) -> Self {
        let m = stieltjes_m(z);
        Self { m_plus: m, m_minus: 1.0 / m, gap: (m - 1.0 / m).norm() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbedSolution {
    pub roots: StabilityPair,
    /// `max` over both roots of `min(|u − m|, |u − m̃|)`.
    pub distance: f64,
    /// `C |r| / √(κ + η + |r|)`.
    pub bound: f64,
}

impl PerturbedSolution {
    pub fn within_bound(&self) -> bool {
        self.distance <= self.bound
    }
}

/// Default constant in the stability bound; the theory leaves it unspecified.
pub const STABILITY_CONSTANT: f64 = 10.0;

/// Roots of `u² + zu + 1 + r = 0` and their distance to the unperturbed pair.
pub fn solve_perturbed_quadratic(z: SpectralParam, r: C64, constant: f64) -> Result<PerturbedSolution> {
    if r.norm() > 1.0 {
        return Err(Error::OutOfRegime(format!("|r| = {} exceeds 1", r.norm())));
    }
    let zc = z.z();
    let c = 1.0 + r;
    let s = (zc * zc - 4.0 * c).sqrt();
    // larger-magnitude root first, the other from the product of the roots
    let q = if (zc + s).norm() >= (zc - s).norm() { -(zc + s) * 0.5 } else { -(zc - s) * 0.5 };
    let roots = StabilityPair::from_roots(q, c / q);
    let base = StabilityPair::unperturbed(z);
    let dist = |u: C64| (u - base.m_plus).norm().min((u - base.m_minus).norm());
    let distance = dist(roots.m_plus).max(dist(roots.m_minus));
    let bound = constant * r.norm() / (kappa(z.e) + z.eta + r.norm()).sqrt();
    Ok(PerturbedSolution { roots, distance, bound })
}

/// Catalan number `C_k = binom(2k, k)/(k + 1)`; `None` once it overflows `u128`.
pub fn catalan(k: u32) -> Option<u128> {
    let mut c: u128 = 1;
    for j in 0..k as u128 {
        // C_{j+1} = C_j · 2(2j+1)/(j+2), exact at every step
        c = c.checked_mul(2 * (2 * j + 1))? / (j + 2);
    }
    Some(c)
}

/// `∫ x^k ρ(dx)`: `C_{k/2}` for even `k`, zero for odd `k`.
pub fn semicircle_moment(k: u32) -> f64 {
    if k % 2 == 1 {
        0.0
    } else {
        catalan(k / 2).map_or(f64::INFINITY, |c| c as f64)
    }
}

/// Cauchy kernel `θ_η(x) = (η/π)/(x² + η²)`.
pub fn theta_kernel(x: f64, eta: f64) -> f64 {
    eta / PI / (x * x + eta * eta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_values() {
        assert!((density(0.0) - 1.0 / PI).abs() < 1e-15);
        assert_eq!(density(2.0), 0.0);
        assert_eq!(density(-2.0), 0.0);
        assert_eq!(density(3.0), 0.0);
        assert!((density(1.0) - 3f64.sqrt() / (2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn golden_ratio_at_i() {
        let m = stieltjes_m(SpectralParam::new(0.0, 1.0).unwrap());
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        assert!(m.re.abs() < 1e-15);
        assert!((m.im - golden).abs() < 1e-12);
    }

    #[test]
    fn large_z_asymptotics() {
        let z = C64::new(100.0, 1.0);
        assert!((stieltjes(z) * z + 1.0).norm() <= 1e-3);
    }

    #[test]
    fn branch_in_left_half_plane() {
        for e in [-50.0, -3.0, -2.0, -1.0, -1e-3] {
            let m = stieltjes(C64::new(e, 1e-6));
            assert!(m.im > 0.0, "E = {e}: {m}");
            assert!((m * m + C64::new(e, 1e-6) * m + 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn measure_values() {
        assert!((measure(-2.0, 2.0) - 1.0).abs() < 1e-15);
        assert!((measure(0.0, 2.0) - 0.5).abs() < 1e-15);
        assert!((measure(-5.0, 5.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quantile_values() {
        assert!(quantile(0.5).unwrap().abs() < 1e-14);
        for x in [1e-9, 0.01, 0.2, 0.37] {
            let q = quantile(x).unwrap();
            assert!((cdf(q) - x).abs() <= 1e-10);
            assert!((q + quantile(1.0 - x).unwrap()).abs() <= 1e-10);
        }
        assert!(matches!(quantile(0.0), Err(Error::InvalidParameter(_))));
        assert!(matches!(quantile(1.0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn kappa_values() {
        assert_eq!(kappa(2.5), 0.5);
        assert_eq!(kappa(-2.0), 0.0);
        assert_eq!(kappa(0.0), 2.0);
    }

    #[test]
    fn catalan_numbers() {
        let first: Vec<u128> = (0..5).map(|k| catalan(k).unwrap()).collect();
        assert_eq!(first, vec![1, 1, 2, 5, 14]);
        assert_eq!(catalan(10), Some(16796));
        assert_eq!(semicircle_moment(3), 0.0);
        assert_eq!(semicircle_moment(4), 2.0);
        assert!(catalan(70).is_none());
    }

    #[test]
    fn unperturbed_roots_recovered() {
        let z = SpectralParam::new(0.5, 0.01).unwrap();
        let sol = solve_perturbed_quadratic(z, C64::default(), STABILITY_CONSTANT).unwrap();
        assert!(sol.distance <= 1e-12);
        let base = StabilityPair::unperturbed(z);
        assert!((sol.roots.m_plus - base.m_plus).norm() <= 1e-12);
        assert!((sol.roots.m_minus - base.m_minus).norm() <= 1e-12);
        assert!(matches!(solve_perturbed_quadratic(z, C64::new(1.5, 0.0), 10.0), Err(Error::OutOfRegime(_))));
    }

    #[test]
    fn theta_kernel_peak() {
        assert!((theta_kernel(0.0, 0.1) - 1.0 / (PI * 0.1)).abs() < 1e-14);
    }
}
