//! Small descriptive-statistics toolkit: order statistics, Kolmogorov–Smirnov
//! distances and straight-line fits.

/// Sorted copy with NaNs dropped.
fn sorted(data: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = data.iter().copied().filter(|x| !x.is_nan()).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Empirical quantile with linear interpolation between order statistics; NaN for
/// empty input.
pub fn quantile(data: &[f64], q: f64) -> f64 {
    quantile_sorted(&sorted(data), q)
}

pub fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

pub fn median(data: &[f64]) -> f64 {
    quantile(data, 0.5)
}

pub fn mean(data: &[f64]) -> f64 {
    data.iter().sum::<f64>() / data.len() as f64
}

/// Sample mean and its standard error `s/√n`.
pub fn mean_and_stderr(data: &[f64]) -> (f64, f64) {
    let n = data.len() as f64;
    let m = mean(data);
    if data.len() < 2 {
        return (m, f64::NAN);
    }
    let var = data.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// Fraction of entries strictly above `threshold`.
pub fn exceed_fraction(data: &[f64], threshold: f64) -> f64 {
    data.iter().filter(|&&x| x > threshold).count() as f64 / data.len() as f64
}

/// `sup_x |F_n(x) − F(x)|` for a continuous reference CDF.
pub fn ks_one_sample(data: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let v = sorted(data);
    let n = v.len() as f64;
    v.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = cdf(x);
        d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n)
    })
}

/// `sup_x |F_a(x) − F_b(x)|` between two empirical CDFs.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (a, b) = (sorted(a), sorted(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
}

/// Ordinary least squares `y ≈ intercept + slope·x`; the slope's standard error comes
/// from the residual variance with `n − 2` degrees of freedom.
pub fn least_squares(x: &[f64], y: &[f64]) -> LinearFit {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let slope_stderr = if n > 2.0 { (rss / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    LinearFit { slope, intercept, slope_stderr }
}

/// Weighted least squares with known per-point standard deviations `sigma`; the
/// slope's standard error is `(Σ w (x − x̄_w)²)^{-1/2}` with `w = σ⁻²`.
pub fn weighted_least_squares(x: &[f64], y: &[f64], sigma: &[f64]) -> LinearFit {
    assert!(x.len() == y.len() && y.len() == sigma.len());
    let w: Vec<f64> = sigma.iter().map(|s| 1.0 / (s * s)).collect();
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(&w).map(|(a, w)| a * w).sum::<f64>() / sw;
    let my = y.iter().zip(&w).map(|(b, w)| b * w).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(&w).map(|(a, w)| w * (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).zip(&w).map(|((a, b), w)| w * (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    LinearFit { slope, intercept: my - slope * mx, slope_stderr: (1.0 / sxx).sqrt() }
}
