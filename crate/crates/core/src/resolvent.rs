//! Green functions `G(z) = (H − z)⁻¹`, minors, and numerical checks of the exact
//! resolvent identities.
//!
//! Index arguments are 0-based original labels throughout; minors keep the labels of
//! the surviving rows so `G^{(T)}_{ij}` is addressed exactly as `G_{ij}`.

use faer::Mat;

use crate::ensemble::HermitianMatrix;
use crate::linalg::{self, CMat};
use crate::semicircle::SpectralParam;
use crate::spectral::SpectralDecomposition;
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ResolventMethod {
    /// LU inverse of `H − z`.
    DirectSolve,
    /// `Σ u_i u_i*/(λ_i − z)` from a spectral decomposition.
    EigenReconstruction,
}

/// Matrices up to this size get a full residual check; larger ones are checked on a
/// fixed set of evenly spaced columns.
const FULL_RESIDUAL_LIMIT: usize = 300;
const RESIDUAL_COLUMNS: usize = 16;

#[derive(Debug, Clone)]
pub struct Resolvent {
    pub z: SpectralParam,
    pub g: CMat,
    /// `N⁻¹ Tr G`.
    pub s: C64,
    pub method: ResolventMethod,
    /// Measured `‖(H − z)G − I‖_max` (over the checked columns).
    pub residual: f64,
}

impl Resolvent {
    pub fn n(&self) -> usize {
        self.g.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.g[(i, j)]
    }

    fn new(h: &HermitianMatrix, z: SpectralParam, g: CMat, method: ResolventMethod) -> Result<Self> {
        let n = g.nrows();
        let s = (0..n).map(|i| g[(i, i)]).sum::<C64>() / n as f64;
        let residual = residual(h, z.z(), &g);
        let tolerance = 1e-8 * (1.0 + 1.0 / z.eta);
        if !(residual <= tolerance) || !(s.im > 0.0) {
            return Err(Error::NumericalFailure {
                message: format!("resolvent residual {residual:.3e} exceeds {tolerance:.3e} at z = {}", z.z()),
                condition: residual / f64::EPSILON,
            });
        }
        Ok(Self { z, g, s, method, residual })
    }
}

fn residual(h: &HermitianMatrix, z: C64, g: &CMat) -> f64 {
    let n = g.nrows();
    let cols: Vec<usize> = if n <= FULL_RESIDUAL_LIMIT {
        (0..n).collect()
    } else {
        (0..RESIDUAL_COLUMNS).map(|k| k * (n - 1) / (RESIDUAL_COLUMNS - 1)).collect()
    };
    let mut worst = 0.0f64;
    for &j in &cols {
        for i in 0..n {
            let mut acc = -z * g[(i, j)];
            for k in 0..n {
                acc += h.get(i, k) * g[(k, j)];
            }
            if i == j {
                acc -= 1.0;
            }
            worst = worst.max(acc.norm());
        }
    }
    worst
}

/// `G(z)` by the requested method; eigen-reconstruction decomposes `H` first.
pub fn green(h: &HermitianMatrix, z: SpectralParam, method: ResolventMethod) -> Result<Resolvent> {
    match method {
        ResolventMethod::DirectSolve => {
            let g = linalg::inverse(linalg::shifted(h.as_ref(), z.z()).as_ref())?;
            Resolvent::new(h, z, g, method)
        }
        ResolventMethod::EigenReconstruction => {
            let d = crate::spectral::decompose(h)?;
            green_from_decomposition(h, &d, z)
        }
    }
}

/// `G(z)` from an existing decomposition of `h`, for sweeps over many `z`.
pub fn green_from_decomposition(h: &HermitianMatrix, d: &SpectralDecomposition, z: SpectralParam) -> Result<Resolvent> {
    let n = d.n();
    let zc = z.z();
    let weights: Vec<C64> = d.lambdas.iter().map(|&l| 1.0 / (l - zc)).collect();
    let g = if h.is_real() {
        // real eigenvectors: two real products instead of one complex one
        let u = Mat::<f64>::from_fn(n, n, |k, a| d.vectors[(k, a)].re);
        let re = Mat::<f64>::from_fn(n, n, |k, a| u[(k, a)] * weights[a].re);
        let im = Mat::<f64>::from_fn(n, n, |k, a| u[(k, a)] * weights[a].im);
        let (gr, gi) = (&re * u.transpose(), &im * u.transpose());
        CMat::from_fn(n, n, |i, j| C64::new(gr[(i, j)], gi[(i, j)]))
    } else {
        let scaled = CMat::from_fn(n, n, |k, a| d.vectors[(k, a)] * weights[a]);
        linalg::matmul_adjoint(scaled.as_ref(), d.vectors.as_ref())
    };
    Resolvent::new(h, z, g, ResolventMethod::EigenReconstruction)
}

/// Set `T` of removed indices, kept sorted and free of duplicates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct MinorIndexSet {
    removed: Vec<usize>,
}

impl MinorIndexSet {
    pub fn new(mut removed: Vec<usize>) -> Self {
        removed.sort_unstable();
        removed.dedup();
        Self { removed }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// `T ∪ {k}`.
    pub fn with(&self, k: usize) -> Self {
        let mut r = self.removed.clone();
        r.push(k);
        Self::new(r)
    }

    pub fn contains(&self, k: usize) -> bool {
        self.removed.binary_search(&k).is_ok()
    }

    pub fn len(&self) -> usize {
        self.removed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.removed.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.removed
    }
}

/// `H^{(T)}` together with the original labels of its rows.
#[derive(Debug, Clone)]
pub struct Minor {
    pub matrix: HermitianMatrix,
    /// `labels[local] = original`.
    pub labels: Vec<usize>,
}

impl Minor {
    /// Local position of an original label, `None` if it was removed.
    pub fn local(&self, original: usize) -> Option<usize> {
        self.labels.binary_search(&original).ok()
    }
}

pub fn minor(h: &HermitianMatrix, t: &MinorIndexSet) -> Result<Minor> {
    let n = h.n();
    if let Some(&bad) = t.indices().iter().find(|&&k| k >= n) {
        return Err(Error::InvalidIndices(format!("index {bad} is out of range for N = {n}")));
    }
    let labels: Vec<usize> = (0..n).filter(|&k| !t.contains(k)).collect();
    if labels.is_empty() {
        return Err(Error::EmptyMinor);
    }
    let matrix = HermitianMatrix::from_upper_fn(labels.len(), h.symmetry(), |a, b| h.get(labels[a], labels[b]));
    Ok(Minor { matrix, labels })
}

/// Green function of a minor, addressed by original labels.
#[derive(Debug, Clone)]
pub struct MinorResolvent {
    pub minor: Minor,
    pub resolvent: Resolvent,
}

impl MinorResolvent {
    /// `G^{(T)}_{ij}`; panics if `i` or `j` is in `T`.
    pub fn get(&self, i: usize, j: usize) -> C64 {
        let a = self.minor.local(i).expect("row index lies in the removed set");
        let b = self.minor.local(j).expect("column index lies in the removed set");
        self.resolvent.get(a, b)
    }

    pub fn labels(&self) -> &[usize] {
        &self.minor.labels
    }
}

/// `G^{(T)}(z)` by direct solve.
pub fn minor_green(h: &HermitianMatrix, t: &MinorIndexSet, z: SpectralParam) -> Result<MinorResolvent> {
    let minor = minor(h, t)?;
    let resolvent = green(&minor.matrix, z, ResolventMethod::DirectSolve)?;
    Ok(MinorResolvent { minor, resolvent })
}

/// Largest residual of an identity together with the magnitude it is measured against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityCheck {
    pub violation: f64,
    /// Typical size of the terms entering the identity (at least 1).
    pub scale: f64,
}

impl IdentityCheck {
    fn new() -> Self {
        Self { violation: 0.0, scale: 1.0 }
    }

    fn record(&mut self, lhs: C64, rhs: C64) {
        self.violation = self.violation.max((lhs - rhs).norm());
        self.scale = self.scale.max(lhs.norm()).max(rhs.norm());
    }

    pub fn merge(self, other: Self) -> Self {
        Self { violation: self.violation.max(other.violation), scale: self.scale.max(other.scale) }
    }

    /// `violation ≤ tol · scale`.
    pub fn passes(&self, tol: f64) -> bool {
        self.violation <= tol * self.scale
    }
}

/// `max_i |Σ_j |G_ij|² − Im G_ii/η|`.
pub fn check_ward(h: &HermitianMatrix, z: SpectralParam) -> Result<IdentityCheck> {
    let g = green(h, z, ResolventMethod::DirectSolve)?;
    Ok(ward_violation(&g))
}

pub fn ward_violation(g: &Resolvent) -> IdentityCheck {
    let n = g.n();
    let mut check = IdentityCheck::new();
    for i in 0..n {
        let lhs: f64 = (0..n).map(|j| g.get(i, j).norm_sqr()).sum();
        let rhs = g.get(i, i).im / g.z.eta;
        check.record(C64::new(lhs, 0.0), C64::new(rhs, 0.0));
    }
    check
}

fn require_outside(t: &MinorIndexSet, n: usize, idx: &[(char, usize)]) -> Result<()> {
    for &(name, v) in idx {
        if v >= n {
            return Err(Error::InvalidIndices(format!("{name} = {v} is out of range for N = {n}")));
        }
        if t.contains(v) {
            return Err(Error::InvalidIndices(format!("{name} = {v} lies in the removed set")));
        }
    }
    Ok(())
}

/// Residual of `G^{(T)}_ij = −G^{(T)}_ii Σ_{l∉T∪{i}} H_il G^{(Ti)}_lj`.
fn expansion_left(h: &HermitianMatrix, gt: &MinorResolvent, gti: &MinorResolvent, i: usize, j: usize) -> (C64, C64) {
    let sum: C64 = gti.labels().iter().map(|&l| h.get(i, l) * gti.get(l, j)).sum();
    (gt.get(i, j), -gt.get(i, i) * sum)
}

/// Residual of `G^{(T)}_ij = −G^{(T)}_jj Σ_{l∉T∪{j}} G^{(Tj)}_il H_lj`.
fn expansion_right(h: &HermitianMatrix, gt: &MinorResolvent, gtj: &MinorResolvent, i: usize, j: usize) -> (C64, C64) {
    let sum: C64 = gtj.labels().iter().map(|&l| gtj.get(i, l) * h.get(l, j)).sum();
    (gt.get(i, j), -gt.get(j, j) * sum)
}

/// Checks, for one triple,
/// `G^{(T)}_ij = G^{(Tk)}_ij + G^{(T)}_ik G^{(T)}_kj / G^{(T)}_kk` (needs `i, j ≠ k`) and,
/// when `i ≠ j`, both one-row expansions of `G^{(T)}_ij` and their mutual agreement.
pub fn check_resolvent_identities(
    h: &HermitianMatrix,
    z: SpectralParam,
    i: usize,
    j: usize,
    k: usize,
    t: &MinorIndexSet,
) -> Result<IdentityCheck> {
    require_outside(t, h.n(), &[('i', i), ('j', j), ('k', k)])?;
    if i == k || j == k {
        return Err(Error::InvalidIndices(format!("i = {i}, j = {j} must differ from k = {k}")));
    }
    let gt = minor_green(h, t, z)?;
    let gtk = minor_green(h, &t.with(k), z)?;
    let mut check = IdentityCheck::new();
    check.record(gt.get(i, j), gtk.get(i, j) + gt.get(i, k) * gt.get(k, j) / gt.get(k, k));
    if i != j {
        let gti = minor_green(h, &t.with(i), z)?;
        let gtj = minor_green(h, &t.with(j), z)?;
        let (a, b) = expansion_left(h, &gt, &gti, i, j);
        let (_, c) = expansion_right(h, &gt, &gtj, i, j);
        check.record(a, b);
        check.record(a, c);
        check.record(b, c);
    }
    Ok(check)
}

/// Both identities over every admissible `(i, j)` for each `k` in `ks`. The one-row
/// expansions reuse the minors `G^{(Tk)}`, so the left form is checked for `i ∈ ks`
/// and the right form for `j ∈ ks`.
pub fn check_resolvent_identities_all(h: &HermitianMatrix, z: SpectralParam, t: &MinorIndexSet, ks: &[usize]) -> Result<IdentityCheck> {
    let n = h.n();
    let gt = minor_green(h, t, z)?;
    let mut check = IdentityCheck::new();
    for &k in ks {
        require_outside(t, n, &[('k', k)])?;
        let gtk = minor_green(h, &t.with(k), z)?;
        let gkk = gt.get(k, k);
        for &i in gtk.labels() {
            for &j in gtk.labels() {
                check.record(gt.get(i, j), gtk.get(i, j) + gt.get(i, k) * gt.get(k, j) / gkk);
            }
        }
        for &other in gtk.labels() {
            let (a, b) = expansion_left(h, &gt, &gtk, k, other);
            check.record(a, b);
            let (a, b) = expansion_right(h, &gt, &gtk, other, k);
            check.record(a, b);
        }
    }
    Ok(check)
}

fn inverse_checked(m: &CMat, limit: f64) -> Result<CMat> {
    let inv = linalg::inverse(m.as_ref()).map_err(|e| Error::SingularInput(e.to_string()))?;
    let cond = linalg::norm_one(m.as_ref()) * linalg::norm_one(inv.as_ref());
    if !(cond <= limit) {
        return Err(Error::SingularInput(format!("condition estimate {cond:.3e} exceeds {limit:.0e}")));
    }
    Ok(inv)
}

/// Block inverse of `M = [[A, B], [C, D]]` with `A` of size `split`, built from the
/// Schur complement `S = A − B D⁻¹ C`, compared entrywise with the direct inverse.
pub fn check_schur(m: &CMat, split: usize) -> Result<IdentityCheck> {
    let n = m.nrows();
    if m.ncols() != n || split == 0 || split >= n {
        return Err(Error::InvalidInput(format!("split {split} is invalid for a {}x{} matrix", n, m.ncols())));
    }
    const LIMIT: f64 = 1e10;
    let r = n - split;
    let a = m.as_ref().submatrix(0, 0, split, split).to_owned();
    let b = m.as_ref().submatrix(0, split, split, r).to_owned();
    let c = m.as_ref().submatrix(split, 0, r, split).to_owned();
    let d = m.as_ref().submatrix(split, split, r, r).to_owned();
    let direct = inverse_checked(m, LIMIT)?;
    let d_inv = inverse_checked(&d, LIMIT)?;
    let s = &a - &b * &d_inv * &c;
    let s_inv = inverse_checked(&s, LIMIT)?;
    let top_right = -(&s_inv * &b * &d_inv);
    let bottom_left = -(&d_inv * &c * &s_inv);
    let bottom_right = &d_inv + &d_inv * &c * &s_inv * &b * &d_inv;
    let mut check = IdentityCheck::new();
    for i in 0..n {
        for j in 0..n {
            let block = match (i < split, j < split) {
                (true, true) => s_inv[(i, j)],
                (true, false) => top_right[(i, j - split)],
                (false, true) => bottom_left[(i - split, j)],
                (false, false) => bottom_right[(i - split, j - split)],
            };
            check.record(direct[(i, j)], block);
        }
    }
    Ok(check)
}

/// The `1 + (N−1)` split at row `i`:
/// `1/G_ii = H_ii − z − Σ_{k,l≠i} H_ik G^{(i)}_kl H_li`.
pub fn check_schur_row(h: &HermitianMatrix, g: &Resolvent, i: usize) -> Result<IdentityCheck> {
    let gi = minor_green(h, &MinorIndexSet::new(vec![i]), g.z)?;
    let mut check = IdentityCheck::new();
    check.record(1.0 / g.get(i, i), h.get(i, i) - g.z.z() - quadratic_form(h, &gi, i));
    Ok(check)
}

/// `Σ_{k,l≠i} H_ik G^{(i)}_kl H_li`.
fn quadratic_form(h: &HermitianMatrix, gi: &MinorResolvent, i: usize) -> C64 {
    let labels = gi.labels();
    let mut acc = C64::default();
    for (a, &k) in labels.iter().enumerate() {
        let mut row = C64::default();
        for (b, &l) in labels.iter().enumerate() {
            row += gi.resolvent.get(a, b) * h.get(l, i);
        }
        acc += h.get(i, k) * row;
    }
    acc
}

/// Terms of `1/G_ii = −z − s + Y_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluctuationTerms {
    pub i: usize,
    /// `N⁻¹ Σ_k G_ki G_ik / G_ii`.
    pub a: C64,
    /// Centred quadratic form `Σ^{(i)} H_ik G^{(i)}_kl H_li − N⁻¹ Σ^{(i)}_k G^{(i)}_kk`.
    pub z_term: C64,
    /// `H_ii + A_i − Z_i`.
    pub y: C64,
    /// `Q_i(1/G_ii) = H_ii − Z_i`.
    pub q_inv_gii: C64,
}

/// Direct evaluation through the minor `H^{(i)}`.
pub fn fluctuation_terms(h: &HermitianMatrix, g: &Resolvent, i: usize) -> Result<FluctuationTerms> {
    let n = h.n();
    let gi = minor_green(h, &MinorIndexSet::new(vec![i]), g.z)?;
    let gii = g.get(i, i);
    let a = (0..n).map(|k| g.get(k, i) * g.get(i, k)).sum::<C64>() / (n as f64 * gii);
    let minor_trace: C64 = (0..n - 1).map(|k| gi.resolvent.get(k, k)).sum();
    let z_term = quadratic_form(h, &gi, i) - minor_trace / n as f64;
    let hii = h.get(i, i);
    Ok(FluctuationTerms { i, a, z_term, y: hii + a - z_term, q_inv_gii: hii - z_term })
}

/// `Q_i(1/G_ii)` for every `i` without forming minors.
///
/// With `Σ_{k≠i} G^{(i)}_kk = N(s − A_i)` and `Σ H_ik G^{(i)}_kl H_li = H_ii − z − 1/G_ii`,
/// `Q_i(1/G_ii) = z + 1/G_ii + s − A_i`.
pub fn fluctuation_q_all(g: &Resolvent) -> Vec<C64> {
    let n = g.n();
    let z = g.z.z();
    (0..n)
        .map(|i| {
            let gii = g.get(i, i);
            let a = (0..n).map(|k| g.get(i, k) * g.get(k, i)).sum::<C64>() / (n as f64 * gii);
            z + 1.0 / gii + g.s - a
        })
        .collect()
}

/// `Λ = max |G_ij − m δ_ij|`, `Λ* = max_{i≠j} |G_ij|`, `Θ = |s − m|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorMetrics {
    pub lambda: f64,
    pub lambda_star: f64,
    pub theta: f64,
}

pub fn error_metrics(g: &Resolvent, m: C64) -> ErrorMetrics {
    let n = g.n();
    let (mut diag, mut off) = (0.0f64, 0.0f64);
    for j in 0..n {
        for i in 0..n {
            if i == j {
                diag = diag.max((g.get(i, i) - m).norm());
            } else {
                off = off.max(g.get(i, j).norm());
            }
        }
    }
    ErrorMetrics { lambda: diag.max(off), lambda_star: off, theta: (g.s - m).norm() }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(e: f64, eta: f64) -> SpectralParam {
        SpectralParam::new(e, eta).unwrap()
    }

    #[test]
    fn zero_matrix_resolvent() {
        let h = HermitianMatrix::diagonal(&[0.0; 3]);
        let g = green(&h, z(0.0, 1.0), ResolventMethod::DirectSolve).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { C64::new(0.0, 1.0) } else { C64::default() };
                assert!((g.get(i, j) - want).norm() < 1e-15);
            }
        }
        let m = error_metrics(&g, C64::new(0.0, 1.0));
        assert_eq!((m.lambda, m.lambda_star, m.theta), (0.0, 0.0, 0.0));
    }

    #[test]
    fn ward_on_two_by_two() {
        let h = HermitianMatrix::diagonal(&[1.0, -1.0]);
        let g = green(&h, z(0.0, 1.0), ResolventMethod::DirectSolve).unwrap();
        for i in 0..2 {
            let row: f64 = (0..2).map(|j| g.get(i, j).norm_sqr()).sum();
            assert!((row - 0.5).abs() < 1e-15);
            assert!((g.get(i, i).im - 0.5).abs() < 1e-15);
        }
        assert!(ward_violation(&g).violation < 1e-15);
    }

    #[test]
    fn minor_labels() {
        let h = HermitianMatrix::from_upper_fn(3, crate::ensemble::Symmetry::RealSymmetric, |i, j| C64::new((10 * i + j) as f64, 0.0));
        let m = minor(&h, &MinorIndexSet::new(vec![1])).unwrap();
        assert_eq!(m.labels, vec![0, 2]);
        assert_eq!(m.matrix.get(0, 1), h.get(0, 2));
        assert_eq!(m.matrix.get(1, 1), h.get(2, 2));
        assert!(matches!(minor(&h, &MinorIndexSet::new(vec![0, 1, 2])), Err(Error::EmptyMinor)));
        let same = minor(&h, &MinorIndexSet::empty()).unwrap();
        assert!(same.matrix.bit_identical(&h));
    }

    #[test]
    fn scalar_schur_matches_closed_form() {
        let m = CMat::from_fn(2, 2, |i, j| C64::new([[4.0, 1.0], [2.0, 3.0]][i][j], 0.0));
        assert!(check_schur(&m, 1).unwrap().violation < 1e-15);
        let singular = CMat::from_fn(2, 2, |i, j| C64::new([[1.0, 2.0], [2.0, 4.0]][i][j], 0.0));
        assert!(matches!(check_schur(&singular, 1), Err(Error::SingularInput(_))));
    }

    #[test]
    fn index_collisions_rejected() {
        let h = HermitianMatrix::diagonal(&[1.0, 2.0, 3.0, 4.0]);
        let t = MinorIndexSet::new(vec![3]);
        assert!(matches!(check_resolvent_identities(&h, z(0.0, 1.0), 0, 1, 1, &t), Err(Error::InvalidIndices(_))));
        assert!(matches!(check_resolvent_identities(&h, z(0.0, 1.0), 0, 3, 1, &t), Err(Error::InvalidIndices(_))));
        let ok = check_resolvent_identities(&h, z(0.0, 1.0), 0, 2, 1, &t).unwrap();
        assert!(ok.violation < 1e-15);
    }
}
