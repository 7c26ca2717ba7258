//! Eigenvalue and eigenvector statistics: rigidity, delocalization, counting,
//! extreme eigenvalues, bulk unfolding, two-point correlations and the
//! Green-function-comparison traces.

use std::f64::consts::PI;

use faer::MatRef;

use crate::ensemble::HermitianMatrix;
use crate::linalg::{self, CMat};
use crate::semicircle::{self, TypicalLocations};
use crate::stats;
use crate::{Error, Result, C64};

/// Eigenpairs with eigenvalues in decreasing order `λ_1 ≥ … ≥ λ_N`; column `i` of
/// `vectors` is `u_{i+1}`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub lambdas: Vec<f64>,
    pub vectors: CMat,
}

impl SpectralDecomposition {
    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    /// `max_i ‖H u_i − λ_i u_i‖`.
    pub fn max_residual(&self, h: &HermitianMatrix) -> f64 {
        let hu = linalg::matmul(h.as_ref(), self.vectors.as_ref());
        let n = self.n();
        (0..n)
            .map(|i| (0..n).map(|k| (hu[(k, i)] - self.vectors[(k, i)] * self.lambdas[i]).norm_sqr()).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// `max_ij |⟨u_i, u_j⟩ − δ_ij|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let gram = linalg::adjoint_matmul(self.vectors.as_ref(), self.vectors.as_ref());
        linalg::max_abs_diff(gram.as_ref(), linalg::identity(self.n()).as_ref())
    }
}

/// Full eigendecomposition, reordered to decreasing eigenvalues.
pub fn decompose(h: &HermitianMatrix) -> Result<SpectralDecomposition> {
    let (mut lambdas, vecs) = linalg::hermitian_eigen(h.as_ref(), h.is_real())?;
    let n = lambdas.len();
    lambdas.reverse();
    let vectors = CMat::from_fn(n, n, |k, i| vecs[(k, n - 1 - i)]);
    Ok(SpectralDecomposition { lambdas, vectors })
}

/// Eigenvalues only, decreasing.
pub fn eigenvalues(h: &HermitianMatrix) -> Result<Vec<f64>> {
    let mut l = linalg::hermitian_eigenvalues(h.as_ref(), h.is_real())?;
    l.reverse();
    Ok(l)
}

/// Empirical Stieltjes transform `N⁻¹ Σ 1/(λ_i − z)`.
pub fn empirical_stieltjes(lambdas: &[f64], z: C64) -> C64 {
    lambdas.iter().map(|&l| 1.0 / (l - z)).sum::<C64>() / lambdas.len() as f64
}

/// `N⁻¹ Σ λ_i^k = N⁻¹ Tr H^k`.
pub fn trace_moment(lambdas: &[f64], k: i32) -> f64 {
    lambdas.iter().map(|l| l.powi(k)).sum::<f64>() / lambdas.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidityRow {
    /// 1-based eigenvalue index.
    pub i: usize,
    pub lambda: f64,
    pub gamma: f64,
    pub dev: f64,
    /// `dev · N^{2/3} (i ∧ (N+1−i))^{1/3}`.
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RigidityReport {
    pub rows: Vec<RigidityRow>,
    pub max_normalized: f64,
}

pub fn rigidity_report(lambdas: &[f64], gammas: &TypicalLocations) -> Result<RigidityReport> {
    let n = lambdas.len();
    if gammas.n != n {
        return Err(Error::InvalidInput(format!("{} eigenvalues but {} typical locations", n, gammas.n)));
    }
    let scale = (n as f64).powf(2.0 / 3.0);
    let rows: Vec<RigidityRow> = (0..n)
        .map(|k| {
            let i = k + 1;
            let dev = (lambdas[k] - gammas.gamma[k]).abs();
            let edge_rank = i.min(n + 1 - i) as f64;
            RigidityRow { i, lambda: lambdas[k], gamma: gammas.gamma[k], dev, normalized: dev * scale * edge_rank.cbrt() }
        })
        .collect();
    let max_normalized = rows.iter().map(|r| r.normalized).fold(0.0, f64::max);
    Ok(RigidityReport { rows, max_normalized })
}

/// `sup_k N |u_i(k)|²` for every eigenvector, in eigenvalue order.
pub fn delocalization_report(decomp: &SpectralDecomposition) -> Vec<f64> {
    sup_statistics(decomp.vectors.as_ref())
}

/// `sup_k N |v(k)|²` for each column of a matrix of unit vectors.
pub fn sup_statistics(vectors: MatRef<'_, C64>) -> Vec<f64> {
    let n = vectors.nrows() as f64;
    (0..vectors.ncols()).map(|i| (0..vectors.nrows()).map(|k| vectors[(k, i)].norm_sqr()).fold(0.0, f64::max) * n).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountingRow {
    pub a: f64,
    pub b: f64,
    /// Fraction of eigenvalues in `[a, b]`.
    pub mu: f64,
    pub rho: f64,
    /// `N |μ(I) − ρ(I)|`.
    pub deviation: f64,
}

pub fn counting_law(lambdas: &[f64], intervals: &[(f64, f64)]) -> Result<Vec<CountingRow>> {
    let n = lambdas.len() as f64;
    intervals
        .iter()
        .map(|&(a, b)| {
            if !(a <= b) {
                return Err(Error::InvalidParameter(format!("interval [{a}, {b}] is reversed")));
            }
            let count = lambdas.iter().filter(|&&l| a <= l && l <= b).count() as f64;
            let mu = count / n;
            let rho = semicircle::measure(a, b);
            Ok(CountingRow { a, b, mu, rho, deviation: n * (mu - rho).abs() })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeRow {
    pub l1: f64,
    pub ln: f64,
    /// `N^{2/3}(λ_1 − 2)`.
    pub scaled1: f64,
    /// `N^{2/3}(−2 − λ_N)`.
    pub scaled_n: f64,
}

impl EdgeRow {
    /// From decreasing eigenvalues.
    pub fn new(lambdas: &[f64]) -> Self {
        let s = (lambdas.len() as f64).powf(2.0 / 3.0);
        let l1 = lambdas[0];
        let ln = lambdas[lambdas.len() - 1];
        Self { l1, ln, scaled1: s * (l1 - 2.0), scaled_n: s * (-2.0 - ln) }
    }

    /// `‖H‖ = max(|λ_1|, |λ_N|)`.
    pub fn norm(&self) -> f64 {
        self.l1.abs().max(self.ln.abs())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeStatistics {
    pub rows: Vec<EdgeRow>,
    /// 5%, 50%, 95% quantiles of the scaled top eigenvalue.
    pub scaled1_quantiles: [f64; 3],
    pub scaled_n_quantiles: [f64; 3],
    /// Two-sample KS distance between the scaled top and bottom edges.
    pub edge_symmetry_ks: f64,
}

pub fn edge_statistics(samples: &[Vec<f64>]) -> EdgeStatistics {
    let rows: Vec<EdgeRow> = samples.iter().map(|l| EdgeRow::new(l)).collect();
    let top: Vec<f64> = rows.iter().map(|r| r.scaled1).collect();
    let bottom: Vec<f64> = rows.iter().map(|r| r.scaled_n).collect();
    let q = |v: &[f64]| [stats::quantile(v, 0.05), stats::quantile(v, 0.5), stats::quantile(v, 0.95)];
    EdgeStatistics {
        scaled1_quantiles: q(&top),
        scaled_n_quantiles: q(&bottom),
        edge_symmetry_ks: stats::ks_two_sample(&top, &bottom),
        rows,
    }
}

/// Bulk spectrum rescaled around `E` so that the local mean spacing is one.
#[derive(Debug, Clone, PartialEq)]
pub struct UnfoldedSpectrum {
    pub e: f64,
    pub rho_e: f64,
    pub window: f64,
    /// `N ρ(E)(λ_i − E)` for the eigenvalues with `|u| ≤ window`, in eigenvalue order.
    pub u: Vec<f64>,
}

pub fn unfold(lambdas: &[f64], e: f64, window: f64) -> Result<UnfoldedSpectrum> {
    let rho_e = semicircle::density(e);
    if !(rho_e > 0.0) {
        return Err(Error::InvalidEnergy(e));
    }
    let scale = lambdas.len() as f64 * rho_e;
    let u = lambdas.iter().map(|&l| scale * (l - e)).filter(|u| u.abs() <= window).collect();
    Ok(UnfoldedSpectrum { e, rho_e, window, u })
}

/// GUE bulk pair correlation `1 − (sin πr/(πr))²`.
pub fn sine_kernel_prediction(r: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let k = (PI * r).sin() / (PI * r);
    1.0 - k * k
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoPointEstimate {
    /// Bin centres.
    pub bins: Vec<f64>,
    pub values: Vec<f64>,
    pub prediction: Vec<f64>,
    /// Unordered pairs counted per bin (all samples).
    pub counts: Vec<usize>,
    pub samples: usize,
}

impl TwoPointEstimate {
    /// `sup |estimate − prediction|` over bins whose centre lies in `[lo, hi]`.
    pub fn sup_error(&self, lo: f64, hi: f64) -> f64 {
        self.bins
            .iter()
            .zip(self.values.iter().zip(&self.prediction))
            .filter(|(r, _)| **r >= lo && **r <= hi)
            .map(|(_, (v, p))| (v - p).abs())
            .fold(0.0, f64::max)
    }
}

fn check_edges(edges: &[f64]) -> Result<()> {
    if edges.len() < 2 || edges[0] < 0.0 || edges.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("bin edges must be nonnegative and strictly increasing".into()));
    }
    Ok(())
}

/// Pair-separation histogram normalized to a pair density.
///
/// With unit-density points on `[−W, W]`, an unordered pair separation `r` is seen
/// with weight `2W − r`, so a bin `[r₀, r₁)` holding `c` pairs over `S` samples gives
/// `ĝ = c / (S (r₁ − r₀)(2W − (r₀ + r₁)/2))`.
pub fn two_point_estimate(samples: &[UnfoldedSpectrum], edges: &[f64]) -> Result<TwoPointEstimate> {
    check_edges(edges)?;
    let nb = edges.len() - 1;
    let rmax = edges[nb];
    let mut counts = vec![0usize; nb];
    let mut window = f64::NAN;
    for s in samples {
        if window.is_nan() {
            window = s.window;
        } else if window != s.window {
            return Err(Error::InvalidInput("unfolded samples use different windows".into()));
        }
        let mut u = s.u.clone();
        u.sort_by(f64::total_cmp);
        for a in 0..u.len() {
            for b in a + 1..u.len() {
                let d = u[b] - u[a];
                if d >= rmax {
                    break;
                }
                if d >= edges[0] {
                    let bin = edges.partition_point(|&e| e <= d) - 1;
                    counts[bin] += 1;
                }
            }
        }
    }
    let bins: Vec<f64> = edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let values = (0..nb)
        .map(|k| {
            let width = edges[k + 1] - edges[k];
            counts[k] as f64 / (samples.len() as f64 * width * (2.0 * window - bins[k]))
        })
        .collect();
    let prediction = bins.iter().map(|&r| sine_kernel_prediction(r)).collect();
    Ok(TwoPointEstimate { bins, values, prediction, counts, samples: samples.len() })
}

/// Smeared estimator: each pair separation `d` contributes a Cauchy bump
/// `θ_η̃(r − d)` instead of a bin indicator (η̃ in unfolded units). `counts` holds the
/// number of pairs within `η̃` of each evaluation point.
pub fn two_point_smeared(samples: &[UnfoldedSpectrum], points: &[f64], eta_u: f64) -> Result<TwoPointEstimate> {
    if !(eta_u > 0.0) {
        return Err(Error::InvalidParameter(format!("smearing width {eta_u} must be positive")));
    }
    let window = samples.first().map_or(f64::NAN, |s| s.window);
    let mut sums = vec![0.0; points.len()];
    let mut counts = vec![0usize; points.len()];
    for s in samples {
        for a in 0..s.u.len() {
            for b in a + 1..s.u.len() {
                let d = (s.u[b] - s.u[a]).abs();
                for (k, &r) in points.iter().enumerate() {
                    sums[k] += semicircle::theta_kernel(r - d, eta_u);
                    if (r - d).abs() <= eta_u {
                        counts[k] += 1;
                    }
                }
            }
        }
    }
    let values = points.iter().zip(&sums).map(|(&r, &acc)| acc / (samples.len() as f64 * (2.0 * window - r))).collect();
    Ok(TwoPointEstimate {
        bins: points.to_vec(),
        values,
        prediction: points.iter().map(|&r| sine_kernel_prediction(r)).collect(),
        counts,
        samples: samples.len(),
    })
}

/// `(t1, t2) = (N⁻² Tr G(z) Tr G(w), N⁻² Tr G(z)G(w))` from eigenvalues.
pub fn gfc_from_eigenvalues(lambdas: &[f64], z: C64, w: C64) -> Result<(C64, C64)> {
    if z.im == 0.0 || w.im == 0.0 {
        return Err(Error::InvalidParameter("spectral parameters must be off the real axis".into()));
    }
    let n2 = (lambdas.len() as f64).powi(2);
    let (mut tz, mut tw, mut tzw) = (C64::default(), C64::default(), C64::default());
    for &l in lambdas {
        let a = 1.0 / (l - z);
        let b = 1.0 / (l - w);
        tz += a;
        tw += b;
        tzw += a * b;
    }
    Ok((tz * tw / n2, tzw / n2))
}

pub fn gfc_statistic(h: &HermitianMatrix, z: C64, w: C64) -> Result<(C64, C64)> {
    gfc_from_eigenvalues(&eigenvalues(h)?, z, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decomposition_is_decreasing() {
        let h = HermitianMatrix::diagonal(&[3.0, 1.0, 2.0]);
        let d = decompose(&h).unwrap();
        assert_eq!(d.lambdas, vec![3.0, 2.0, 1.0]);
        // u_1 = e_1, u_2 = e_3, u_3 = e_2 up to phase
        assert!((d.vectors[(0, 0)].norm() - 1.0).abs() < 1e-14);
        assert!((d.vectors[(2, 1)].norm() - 1.0).abs() < 1e-14);
        assert!((d.vectors[(1, 2)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sine_kernel_values() {
        assert_eq!(sine_kernel_prediction(0.0), 0.0);
        assert!((sine_kernel_prediction(0.5) - (1.0 - (2.0 / PI).powi(2))).abs() < 1e-15);
        assert!((sine_kernel_prediction(50.0) - 1.0).abs() <= 1e-3);
    }

    #[test]
    fn unfolding() {
        let u = unfold(&[0.0], 0.0, 10.0).unwrap();
        assert_eq!(u.u, vec![0.0]);
        assert!(matches!(unfold(&[0.0], 2.5, 10.0), Err(Error::InvalidEnergy(_))));
        let lambdas = [0.001, -0.002];
        let a = unfold(&lambdas, 0.0, 100.0).unwrap();
        let doubled: Vec<f64> = lambdas.iter().chain(&[5.0, 5.0]).copied().collect();
        let b = unfold(&doubled, 0.0, 100.0).unwrap();
        assert!((b.u[0] - 2.0 * a.u[0]).abs() < 1e-15);
    }

    #[test]
    fn gfc_scalar_case() {
        let i = C64::new(0.0, 1.0);
        // H = 0: G = iI, so t1 = N⁻²(Ni)² = −1 and t2 = N⁻² N i² = −1/N
        let (t1, t2) = gfc_from_eigenvalues(&[0.0], i, i).unwrap();
        assert!((t1 + 1.0).norm() < 1e-15 && (t2 + 1.0).norm() < 1e-15);
        let (t1, t2) = gfc_from_eigenvalues(&[0.0; 4], i, i).unwrap();
        assert!((t1 + 1.0).norm() < 1e-15);
        assert!((t2 + 0.25).norm() < 1e-15);
    }

    #[test]
    fn whole_line_counting() {
        let rows = counting_law(&[0.5, -0.5, 1.9], &[(f64::NEG_INFINITY, f64::INFINITY)]).unwrap();
        assert_eq!(rows[0].mu, 1.0);
        assert_eq!(rows[0].rho, 1.0);
        assert_eq!(rows[0].deviation, 0.0);
    }
}
