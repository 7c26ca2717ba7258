//! Monte Carlo harness for the probabilistic statements: spectral-domain grids,
//! local-law sweeps, empirical stochastic domination, scaling fits, fluctuation
//! averaging and large-deviation bounds.
//!
//! Stochastic domination `X ≺ Y` is asymptotic, so it is probed two ways: the
//! fraction of samples with `X > N^ε Y` at a fixed `N`, and the exponent of a
//! log–log fit of medians across several `N`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::ensemble::{EnsembleSpec, EntryDistribution};
use crate::resolvent::{self, ResolventMethod};
use crate::semicircle::{self, SpectralParam};
use crate::spectral;
use crate::stats::{self, LinearFit};
use crate::{Error, Result, C64};

/// Energies and resolutions covering `S(τ) = {|E| ≤ 1/τ, N^{−1+τ} ≤ η ≤ 1/τ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDomainGrid {
    pub tau: f64,
    pub n: usize,
    /// Uniform on `[−1/τ, 1/τ]`.
    pub e_points: Vec<f64>,
    /// Log-uniform on `[N^{−1+τ}, 1/τ]`.
    pub eta_points: Vec<f64>,
}

impl SpectralDomainGrid {
    pub fn contains(&self, e: f64, eta: f64) -> bool {
        let slack = 1e-12;
        e.abs() <= 1.0 / self.tau + slack && eta >= (self.n as f64).powf(-1.0 + self.tau) * (1.0 - slack) && eta <= 1.0 / self.tau + slack
    }

    /// All `(E, η)` pairs, energies varying fastest.
    pub fn points(&self) -> Vec<SpectralParam> {
        self.eta_points.iter().flat_map(|&eta| self.e_points.iter().map(move |&e| SpectralParam { e, eta })).collect()
    }
}

pub fn build_domain(tau: f64, n: usize, n_e: usize, n_eta: usize) -> Result<SpectralDomainGrid> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidParameter(format!("τ = {tau} is outside (0, 1)")));
    }
    if n_e < 2 || n_eta < 2 {
        return Err(Error::InvalidParameter("grids need at least two points per axis".into()));
    }
    let eta_lo = (n as f64).powf(-1.0 + tau);
    let eta_hi = 1.0 / tau;
    if eta_lo > eta_hi {
        return Err(Error::EmptyDomain(format!("N^(-1+τ) = {eta_lo} exceeds 1/τ = {eta_hi}")));
    }
    let e_points = (0..n_e).map(|k| -eta_hi + 2.0 * eta_hi * k as f64 / (n_e - 1) as f64).collect();
    let (l0, l1) = (eta_lo.ln(), eta_hi.ln());
    let eta_points = (0..n_eta)
        .map(|k| match k {
            0 => eta_lo,
            k if k == n_eta - 1 => eta_hi,
            k => (l0 + (l1 - l0) * k as f64 / (n_eta - 1) as f64).exp(),
        })
        .collect();
    Ok(SpectralDomainGrid { tau, n, e_points, eta_points })
}

/// Monte Carlo run parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MCConfig {
    pub samples: usize,
    pub base_seed: u64,
    pub workers: usize,
}

impl MCConfig {
    pub fn new(samples: usize, base_seed: u64) -> Self {
        Self { samples, base_seed, workers: 1 }
    }

    pub fn with_workers(self, workers: usize) -> Self {
        Self { workers: workers.max(1), ..self }
    }

    pub fn seed(&self, index: usize) -> u64 {
        sample_seed(self.base_seed, index)
    }
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn splitmix64(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of sample `index`: `splitmix64(base + γ·(index + 1))` with `γ` the 64-bit
/// golden-ratio increment, i.e. the `(index + 1)`-th output of a SplitMix64 stream
/// started at `base`.
pub fn sample_seed(base_seed: u64, index: usize) -> u64 {
    splitmix64(base_seed.wrapping_add(GOLDEN_GAMMA.wrapping_mul(index as u64 + 1)))
}

/// Runs `task(index, seed)` for every sample on `mc.workers` threads and returns
/// the results in sample order, so the output does not depend on the worker count.
pub fn run_samples<T, F>(mc: &MCConfig, task: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, u64) -> T + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(mc.workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| (0..mc.samples).into_par_iter().map(|i| task(i, mc.seed(i))).collect()))
}

/// One `(sample, z)` evaluation of the local law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalLawRow {
    pub n: usize,
    pub seed: u64,
    pub e: f64,
    pub eta: f64,
    pub lambda: f64,
    pub lambda_star: f64,
    pub theta: f64,
    pub psi: f64,
    pub inv_n_eta: f64,
    /// Set when the sample or its Green function failed numerically; metrics are NaN.
    pub failed: bool,
}

/// `Λ, Λ*, Θ` against `Ψ` on every grid point for every sample. One eigendecomposition
/// per sample feeds all grid points; numerical failures become flagged rows.
pub fn run_local_law(spec: &EnsembleSpec, grid: &SpectralDomainGrid, mc: &MCConfig) -> Result<Vec<LocalLawRow>> {
    if grid.n != spec.n {
        return Err(Error::InvalidInput(format!("grid built for N = {} but ensemble has N = {}", grid.n, spec.n)));
    }
    let points = grid.points();
    let n = spec.n;
    let per_sample = run_samples(mc, |_, seed| {
        let decomposed = spec.sample(seed).and_then(|h| spectral::decompose(&h).map(|d| (h, d)));
        points
            .iter()
            .map(|&z| {
                let psi = semicircle::psi(z, n);
                let inv_n_eta = 1.0 / (n as f64 * z.eta);
                let metrics = decomposed.as_ref().ok().and_then(|(h, d)| {
                    resolvent::green_from_decomposition(h, d, z).ok().map(|g| resolvent::error_metrics(&g, semicircle::stieltjes_m(z)))
                });
                match metrics {
                    Some(m) => LocalLawRow {
                        n,
                        seed,
                        e: z.e,
                        eta: z.eta,
                        lambda: m.lambda,
                        lambda_star: m.lambda_star,
                        theta: m.theta,
                        psi,
                        inv_n_eta,
                        failed: false,
                    },
                    None => LocalLawRow {
                        n,
                        seed,
                        e: z.e,
                        eta: z.eta,
                        lambda: f64::NAN,
                        lambda_star: f64::NAN,
                        theta: f64::NAN,
                        psi,
                        inv_n_eta,
                        failed: true,
                    },
                }
            })
            .collect::<Vec<_>>()
    })?;
    Ok(per_sample.into_iter().flatten().collect())
}

/// Per grid point: `(E, η, median Θ·Nη, median Λ/Ψ)` over the non-failed rows.
pub fn local_law_point_medians(rows: &[LocalLawRow]) -> Vec<(f64, f64, f64, f64)> {
    let mut keys: Vec<(f64, f64)> = Vec::new();
    for r in rows {
        if !keys.iter().any(|&(e, eta)| e == r.e && eta == r.eta) {
            keys.push((r.e, r.eta));
        }
    }
    keys.into_iter()
        .map(|(e, eta)| {
            let sel: Vec<&LocalLawRow> = rows.iter().filter(|r| r.e == e && r.eta == eta && !r.failed).collect();
            let theta: Vec<f64> = sel.iter().map(|r| r.theta / r.inv_n_eta).collect();
            let ratio: Vec<f64> = sel.iter().map(|r| r.lambda / r.psi).collect();
            (e, eta, stats::median(&theta), stats::median(&ratio))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominationEstimate {
    pub epsilon: f64,
    pub exceed_fraction: f64,
    pub samples: usize,
}

/// Fraction of samples with `X > N^ε Y`.
pub fn estimate_domination(x: &[f64], y: &[f64], epsilon: f64, n: usize) -> Result<DominationEstimate> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::InvalidInput(format!("{} X samples against {} Y values", x.len(), y.len())));
    }
    if y.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidInput("Y values must be positive".into()));
    }
    let factor = (n as f64).powf(epsilon);
    let exceed = x.iter().zip(y).filter(|(a, b)| **a > factor * **b).count();
    Ok(DominationEstimate { epsilon, exceed_fraction: exceed as f64 / x.len() as f64, samples: x.len() })
}

/// Log–log least-squares fit of a statistic's medians against `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub n_values: Vec<usize>,
    pub medians: Vec<f64>,
    pub exponent: f64,
    pub stderr: f64,
}

pub fn fit_scaling(per_n: &[(usize, Vec<f64>)]) -> Result<ScalingFit> {
    let medians: Vec<(usize, f64)> = per_n.iter().map(|(n, v)| (*n, stats::median(v))).collect();
    fit_power_law(&medians)
}

/// Fit of `value ≈ c N^exponent` through already-aggregated points.
pub fn fit_power_law(points: &[(usize, f64)]) -> Result<ScalingFit> {
    let mut distinct: Vec<usize> = points.iter().map(|p| p.0).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::InsufficientData(format!("{} distinct N values; need at least 3", distinct.len())));
    }
    if points.iter().any(|p| !(p.1 > 0.0)) {
        return Err(Error::InsufficientData("non-positive statistic cannot be fitted in log scale".into()));
    }
    let x: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let LinearFit { slope, slope_stderr, .. } = stats::least_squares(&x, &y);
    Ok(ScalingFit {
        n_values: points.iter().map(|p| p.0).collect(),
        medians: points.iter().map(|p| p.1).collect(),
        exponent: slope,
        stderr: slope_stderr,
    })
}

/// Weighted log–log fit through `(N, value, standard error)`; the log-scale error of
/// each point is `se/value`.
pub fn fit_power_law_weighted(points: &[(usize, f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!("{} points; need at least 3", points.len())));
    }
    if points.iter().any(|p| !(p.1 > 0.0 && p.2 > 0.0)) {
        return Err(Error::InsufficientData("values and errors must be positive for a log fit".into()));
    }
    let x: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let s: Vec<f64> = points.iter().map(|p| p.2 / p.1).collect();
    let fit = stats::weighted_least_squares(&x, &y, &s);
    Ok(ScalingFit {
        n_values: points.iter().map(|p| p.0).collect(),
        medians: points.iter().map(|p| p.1).collect(),
        exponent: fit.slope,
        stderr: fit.slope_stderr,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluctuationRow {
    pub sample: usize,
    pub seed: u64,
    /// `|N⁻¹ Σ_i Q_i(1/G_ii)|`.
    pub avg_q: f64,
    /// `max_i |Q_i(1/G_ii)|`.
    pub max_q: f64,
    pub lambda_star: f64,
}

/// Average against maximum of the fluctuation terms `Q_i(1/G_ii)` at a fixed `z`.
pub fn fluctuation_averaging_experiment(spec: &EnsembleSpec, z: SpectralParam, mc: &MCConfig) -> Result<Vec<FluctuationRow>> {
    let m = semicircle::stieltjes_m(z);
    run_samples(mc, |sample, seed| -> Result<FluctuationRow> {
        let h = spec.sample(seed)?;
        let g = resolvent::green(&h, z, ResolventMethod::DirectSolve)?;
        let q = resolvent::fluctuation_q_all(&g);
        let avg = q.iter().sum::<C64>() / q.len() as f64;
        let max_q = q.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let lambda_star = resolvent::error_metrics(&g, m).lambda_star;
        Ok(FluctuationRow { sample, seed, avg_q: avg.norm(), max_q, lambda_star })
    })?
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LargeDeviationKind {
    /// `Σ_i b_i X_i`.
    Linear,
    /// `Σ_{i≠j} a_ij X_i X_j`.
    QuadraticOffdiag,
    /// `Σ_{i,j} a_ij X_i Y_j` with `Y` an independent copy of `X`.
    Bilinear,
}

impl LargeDeviationKind {
    pub fn name(self) -> &'static str {
        match self {
            LargeDeviationKind::Linear => "linear",
            LargeDeviationKind::QuadraticOffdiag => "quadratic-offdiag",
            LargeDeviationKind::Bilinear => "bilinear",
        }
    }
}

/// Deterministic coefficients: a constant `b_i = c` / `a_ij = c`, or an explicit
/// vector (`N` entries for linear sums, `N²` row-major entries otherwise).
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficients {
    Constant(f64),
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LargeDeviationReport {
    pub kind: LargeDeviationKind,
    pub n: usize,
    /// `ℓ²` norm of the coefficients entering the sum.
    pub psi: f64,
    pub values: Vec<f64>,
    pub p50: f64,
    pub p90: f64,
    pub p99: f64,
}

impl LargeDeviationReport {
    /// Fraction of samples with `|sum| > N^ε Ψ`.
    pub fn exceed_fraction(&self, epsilon: f64) -> f64 {
        stats::exceed_fraction(&self.values, (self.n as f64).powf(epsilon) * self.psi)
    }
}

pub fn large_deviation_experiment(
    kind: LargeDeviationKind,
    n: usize,
    mc: &MCConfig,
    coefficients: &Coefficients,
    dist: &EntryDistribution,
) -> Result<LargeDeviationReport> {
    if n < 2 {
        return Err(Error::InvalidDimension(format!("N = {n} is too small")));
    }
    let expected = if kind == LargeDeviationKind::Linear { n } else { n * n };
    if let Coefficients::Explicit(c) = coefficients {
        if c.len() != expected {
            return Err(Error::InvalidInput(format!("{} coefficients given, {} expected", c.len(), expected)));
        }
    }
    let psi = match (kind, coefficients) {
        (LargeDeviationKind::Linear, Coefficients::Constant(c)) => c.abs() * (n as f64).sqrt(),
        (LargeDeviationKind::QuadraticOffdiag, Coefficients::Constant(c)) => c.abs() * ((n * (n - 1)) as f64).sqrt(),
        (LargeDeviationKind::Bilinear, Coefficients::Constant(c)) => c.abs() * n as f64,
        (LargeDeviationKind::QuadraticOffdiag, Coefficients::Explicit(a)) => {
            (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i * n + j].powi(2)).sum::<f64>().sqrt()
        }
        (_, Coefficients::Explicit(c)) => c.iter().map(|v| v * v).sum::<f64>().sqrt(),
    };
    let values = run_samples(mc, |_, seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<C64> = (0..n).map(|_| dist.sample(&mut rng)).collect();
        let sum = match (kind, coefficients) {
            (LargeDeviationKind::Linear, Coefficients::Constant(c)) => x.iter().sum::<C64>() * *c,
            (LargeDeviationKind::Linear, Coefficients::Explicit(b)) => x.iter().zip(b).map(|(x, b)| x * b).sum(),
            (LargeDeviationKind::QuadraticOffdiag, Coefficients::Constant(c)) => {
                let s: C64 = x.iter().sum();
                let sq: C64 = x.iter().map(|v| v * v).sum();
                (s * s - sq) * *c
            }
            (LargeDeviationKind::QuadraticOffdiag, Coefficients::Explicit(a)) => {
                (0..n).map(|i| (0..n).filter(|&j| j != i).map(|j| x[j] * a[i * n + j]).sum::<C64>() * x[i]).sum()
            }
            (LargeDeviationKind::Bilinear, coeffs) => {
                let y: Vec<C64> = (0..n).map(|_| dist.sample(&mut rng)).collect();
                match coeffs {
                    Coefficients::Constant(c) => x.iter().sum::<C64>() * y.iter().sum::<C64>() * *c,
                    Coefficients::Explicit(a) => (0..n).map(|i| (0..n).map(|j| y[j] * a[i * n + j]).sum::<C64>() * x[i]).sum(),
                }
            }
        };
        sum.norm()
    })?;
    let sorted = {
        let mut v = values.clone();
        v.sort_by(f64::total_cmp);
        v
    };
    Ok(LargeDeviationReport {
        kind,
        n,
        psi,
        p50: stats::quantile_sorted(&sorted, 0.5),
        p90: stats::quantile_sorted(&sorted, 0.9),
        p99: stats::quantile_sorted(&sorted, 0.99),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_bounds() {
        let g = build_domain(0.1, 1000, 5, 4).unwrap();
        assert!((g.eta_points[0] - 1000f64.powf(-0.9)).abs() < 1e-15);
        assert!((g.eta_points[3] - 10.0).abs() < 1e-12);
        assert!(g.points().iter().all(|z| g.contains(z.e, z.eta)));
        let corners = build_domain(0.5, 100, 2, 2).unwrap().points();
        assert_eq!(corners.len(), 4);
        assert!(matches!(build_domain(0.9, 1, 2, 2), Err(Error::EmptyDomain(_)) | Ok(_)));
        assert!(matches!(build_domain(0.2, 1000, 1, 2), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn seeds_are_distinct_and_stable() {
        let a: Vec<u64> = (0..100).map(|i| sample_seed(7, i)).collect();
        let mut b = a.clone();
        b.sort_unstable();
        b.dedup();
        assert_eq!(b.len(), 100);
        assert_eq!(sample_seed(7, 3), a[3]);
    }

    #[test]
    fn domination_edge_cases() {
        let y = vec![1.0; 10];
        assert_eq!(estimate_domination(&y, &y, 0.1, 100).unwrap().exceed_fraction, 0.0);
        let x2: Vec<f64> = y.iter().map(|v| 2.0 * v).collect();
        assert_eq!(estimate_domination(&x2, &y, 0.1, 100).unwrap().exceed_fraction, 1.0);
        assert!(estimate_domination(&x2, &[1.0], 0.1, 100).is_err());
    }

    #[test]
    fn exact_power_laws() {
        let pts: Vec<(usize, f64)> = [100usize, 200, 400, 800].iter().map(|&n| (n, 1.0 / n as f64)).collect();
        let fit = fit_power_law(&pts).unwrap();
        assert!((fit.exponent + 1.0).abs() <= 1e-12);
        let pts: Vec<(usize, f64)> = [100usize, 200, 400].iter().map(|&n| (n, 3.0 * (n as f64).powf(-2.0 / 3.0))).collect();
        assert!((fit_power_law(&pts).unwrap().exponent + 2.0 / 3.0).abs() < 1e-12);
        assert!(matches!(fit_power_law(&pts[..2]), Err(Error::InsufficientData(_))));
    }
}
