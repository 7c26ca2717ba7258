//! Airy function of the first kind and its derivative on the real line.
//!
//! Both come from the contour integral
//!
//! ```text
//! Ai(x) = 1/(2πi) ∫_C exp(t³/3 − x t) dt,     Ai'(x) = 1/(2πi) ∫_C (−t) exp(t³/3 − x t) dt
//! ```
//!
//! with `C` running from `∞·e^{−iπ/3}` to `∞·e^{iπ/3}`. The path is pinned to the
//! saddle points: for `x ≥ 0` it leaves the real saddle `√x` along two rays at angle
//! `±π/3`, for `x < 0` it follows the imaginary axis between the saddles `±i√|x|`
//! and then leaves along the same rays. On this path the integrand never exceeds the
//! size of the result by more than O(1), so plain composite Gauss–Legendre gives
//! ~1e-14 absolute accuracy on [−10, 10] and full relative accuracy for `x > 0`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::quadrature::GaussLegendre;
use crate::C64;

fn rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(40))
}

/// `(Ai(x), Ai'(x))`.
pub fn ai_and_prime(x: f64) -> (f64, f64) {
    if x.is_nan() {
        return (f64::NAN, f64::NAN);
    }
    let rule = rule();
    let a = x.max(0.0).sqrt();
    let b = (-x).max(0.0).sqrt();
    let p = C64::new(a, b);
    let w = C64::from_polar(1.0, PI / 3.0);
    let phi = |t: C64| t * t * t / 3.0 - t * x;

    // Outbound upper ray. The lower ray is its mirror image, traversed inward.
    let reach = 12.0 / (1.0 + x.abs().powf(0.25)) + 6.0;
    const RAY_PANELS: usize = 8;
    let h = reach / RAY_PANELS as f64;
    let mut up = (C64::default(), C64::default());
    for k in 0..RAY_PANELS {
        let lo = h * k as f64;
        let seg = integrate_pair(rule, lo, lo + h, |r| {
            let t = p + w * r;
            let e = phi(t).exp() * w;
            (e, -t * e)
        });
        up.0 += seg.0;
        up.1 += seg.1;
    }

    let mut vertical = (C64::default(), C64::default());
    if b > 0.0 {
        let panels = 8 + (b * b * b / 4.0).ceil() as usize;
        let h = 2.0 * b / panels as f64;
        for k in 0..panels {
            let lo = -b + h * k as f64;
            let seg: (C64, C64) = integrate_pair(rule, lo, lo + h, |u| {
                let t = C64::new(a, u);
                let e = phi(t).exp() * C64::new(0.0, 1.0);
                (e, -t * e)
            });
            vertical.0 += seg.0;
            vertical.1 += seg.1;
        }
    }

    let total_ai = up.0 + vertical.0 - up.0.conj();
    let total_aip = up.1 + vertical.1 - up.1.conj();
    let scale = C64::new(0.0, 2.0 * PI);
    ((total_ai / scale).re, (total_aip / scale).re)
}

pub fn ai(x: f64) -> f64 {
    ai_and_prime(x).0
}

pub fn ai_prime(x: f64) -> f64 {
    ai_and_prime(x).1
}

fn integrate_pair<F>(rule: &GaussLegendre, lo: f64, hi: f64, f: F) -> (C64, C64)
where
    F: Fn(f64) -> (C64, C64),
{
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let mut acc = (C64::default(), C64::default());
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        let (v, d) = f(mid + half * x);
        acc.0 += v * (w * half);
        acc.1 += d * (w * half);
    }
    acc
}
