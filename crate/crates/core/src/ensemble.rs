//! Random matrix ensembles: Wigner matrices with arbitrary entry laws, GOE/GUE,
//! four-moment-matched partners, the telescoping interpolation between two samples,
//! and normalized Erdős–Rényi adjacency matrices.
//!
//! Sampling is a pure function of `(spec, seed)`: a `ChaCha8Rng` is seeded with the
//! 64-bit seed and the upper triangle is filled in row-major order (`i ≤ j`), one draw
//! per entry. Gaussian variates come from `rand_distr::StandardNormal` (ziggurat);
//! complex Gaussians draw the real part first, then the imaginary part.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use faer::{Mat, MatRef};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::CMat;
use crate::{Error, Result, C64};

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Highest total order `k + l` kept in a [`MomentTable`].
pub const MAX_MOMENT_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EntryKind {
    GaussianReal,
    GaussianComplex,
    TernaryReal,
    TernaryComplex,
    BernoulliSym,
    CustomTable,
}

impl EntryKind {
    pub fn name(self) -> &'static str {
        match self {
            EntryKind::GaussianReal => "gaussian-real",
            EntryKind::GaussianComplex => "gaussian-complex",
            EntryKind::TernaryReal => "ternary-real",
            EntryKind::TernaryComplex => "ternary-complex",
            EntryKind::BernoulliSym => "bernoulli-sym",
            EntryKind::CustomTable => "custom-table",
        }
    }
}

impl fmt::Display for EntryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Mixed moments `m_{k,l} = E[X^k conj(X)^l]` for `k + l ≤ 4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentTable {
    values: [[C64; MAX_MOMENT_ORDER + 1]; MAX_MOMENT_ORDER + 1],
}

impl MomentTable {
    fn from_fn(mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut values = [[C64::default(); MAX_MOMENT_ORDER + 1]; MAX_MOMENT_ORDER + 1];
        for (k, row) in values.iter_mut().enumerate() {
            for (l, v) in row.iter_mut().enumerate() {
                if k + l <= MAX_MOMENT_ORDER {
                    *v = f(k, l);
                }
            }
        }
        Self { values }
    }

    fn from_atoms(atoms: &[(C64, f64)]) -> Self {
        Self::from_fn(|k, l| atoms.iter().map(|&(x, p)| x.powu(k as u32) * x.conj().powu(l as u32) * p).sum())
    }

    /// `m_{k,l}`; panics if `k + l > 4`.
    pub fn get(&self, k: usize, l: usize) -> C64 {
        assert!(k + l <= MAX_MOMENT_ORDER, "moment ({k},{l}) is beyond order 4");
        self.values[k][l]
    }

    fn scaled(&self, s: f64) -> Self {
        Self::from_fn(|k, l| self.values[k][l] * s.powi((k + l) as i32))
    }

    /// All `(k, l)` with `1 ≤ k + l ≤ order`.
    pub fn indices(order: usize) -> impl Iterator<Item = (usize, usize)> {
        (1..=order).flat_map(|total| (0..=total).map(move |k| (k, total - k)))
    }
}

/// Law of a single standardized matrix entry `X` (the matrix entry is `X/√N`).
#[derive(Debug, Clone, PartialEq)]
pub struct EntryDistribution {
    pub name: String,
    pub kind: EntryKind,
    /// Standard deviation of the entry; 1 for standardized laws.
    pub scale: f64,
    /// Support of discrete laws at unit scale.
    atoms: Vec<(C64, f64)>,
    moments: MomentTable,
    third_abs_moment: f64,
}

impl EntryDistribution {
    pub fn gaussian_real() -> Self {
        Self {
            name: EntryKind::GaussianReal.name().into(),
            kind: EntryKind::GaussianReal,
            scale: 1.0,
            atoms: Vec::new(),
            moments: MomentTable::from_fn(|k, l| match k + l {
                2 => C64::new(1.0, 0.0),
                4 => C64::new(3.0, 0.0),
                0 => C64::new(1.0, 0.0),
                _ => C64::default(),
            }),
            // E|g|³ = 2√(2/π)
            third_abs_moment: 2.0 * (2.0 / PI).sqrt(),
        }
    }

    /// `(a + i b)/√2` with `a, b` independent standard normals.
    pub fn gaussian_complex() -> Self {
        Self {
            name: EntryKind::GaussianComplex.name().into(),
            kind: EntryKind::GaussianComplex,
            scale: 1.0,
            atoms: Vec::new(),
            moments: MomentTable::from_fn(|k, l| if k == l { C64::new((1..=k).product::<usize>() as f64, 0.0) } else { C64::default() }),
            // |X|² ~ Exp(1), so E|X|³ = Γ(5/2) = 3√π/4
            third_abs_moment: 0.75 * PI.sqrt(),
        }
    }

    /// `±√3` with probability 1/6 each, `0` with probability 2/3.
    pub fn ternary_real() -> Self {
        let p = 1.0 / 6.0;
        Self::discrete(
            EntryKind::TernaryReal,
            EntryKind::TernaryReal.name(),
            vec![(C64::new(-SQRT_3, 0.0), p), (C64::new(0.0, 0.0), 4.0 * p), (C64::new(SQRT_3, 0.0), p)],
        )
    }

    /// `(a + i b)/√2` with `a, b` independent [`ternary_real`](Self::ternary_real).
    pub fn ternary_complex() -> Self {
        let real = Self::ternary_real();
        let mut atoms = Vec::with_capacity(9);
        for &(a, pa) in &real.atoms {
            for &(b, pb) in &real.atoms {
                atoms.push((C64::new(a.re, b.re) / SQRT_2, pa * pb));
            }
        }
        Self::discrete(EntryKind::TernaryComplex, EntryKind::TernaryComplex.name(), atoms)
    }

    /// Symmetric `±1`.
    pub fn bernoulli_sym() -> Self {
        Self::discrete(EntryKind::BernoulliSym, EntryKind::BernoulliSym.name(), vec![(C64::new(-1.0, 0.0), 0.5), (C64::new(1.0, 0.0), 0.5)])
    }

    /// Finite discrete law given by `(value, probability)` atoms.
    ///
    /// The law must be centred with unit variance (to `1e-12`). Moments are validated
    /// through order 6; the table itself only stores orders ≤ 4.
    pub fn custom_table(name: &str, atoms: Vec<(C64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidParameter("custom table has no atoms".into()));
        }
        if atoms.iter().any(|&(x, p)| !(p >= 0.0) || !x.re.is_finite() || !x.im.is_finite()) {
            return Err(Error::InvalidParameter("custom table has a negative probability or non-finite atom".into()));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("probabilities sum to {total}, not 1")));
        }
        // finite support makes every moment finite; orders through 6 are checked for overflow
        let sixth: f64 = atoms.iter().map(|&(x, p)| x.norm().powi(6) * p).sum();
        if !sixth.is_finite() {
            return Err(Error::InvalidParameter("custom table has a non-finite sixth moment".into()));
        }
        let d = Self::discrete(EntryKind::CustomTable, name, atoms);
        let mean = d.moments.get(1, 0);
        let var = d.moments.get(1, 1).re;
        if mean.norm() > 1e-12 || (var - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("custom table must be centred with unit variance (mean {mean}, variance {var})")));
        }
        Ok(d)
    }

    fn discrete(kind: EntryKind, name: &str, atoms: Vec<(C64, f64)>) -> Self {
        let moments = MomentTable::from_atoms(&atoms);
        let third_abs_moment = atoms.iter().map(|&(x, p)| x.norm().powi(3) * p).sum();
        Self { name: name.into(), kind, scale: 1.0, atoms, moments, third_abs_moment }
    }

    /// Same law with standard deviation `scale` instead of 1.
    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    /// Whether every draw is real.
    pub fn is_real(&self) -> bool {
        match self.kind {
            EntryKind::GaussianReal | EntryKind::TernaryReal | EntryKind::BernoulliSym => true,
            EntryKind::GaussianComplex | EntryKind::TernaryComplex => false,
            EntryKind::CustomTable => self.atoms.iter().all(|a| a.0.im == 0.0),
        }
    }

    /// Real law with the same second moment, used as the default diagonal law.
    ///
    /// Complex custom tables have no canonical real counterpart; they fall back to
    /// the standard Gaussian.
    pub fn real_counterpart(&self) -> Self {
        let base = match self.kind {
            EntryKind::GaussianComplex => Self::gaussian_real(),
            EntryKind::TernaryComplex => Self::ternary_real(),
            EntryKind::CustomTable if !self.is_real() => Self::gaussian_real(),
            _ => return self.clone(),
        };
        base.with_scale(self.scale)
    }

    /// Moment table at the current scale.
    pub fn moments(&self) -> MomentTable {
        self.moments.scaled(self.scale)
    }

    /// `E|X|³` at the current scale.
    pub fn third_abs_moment(&self) -> f64 {
        self.third_abs_moment * self.scale.powi(3)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> C64 {
        let x = match self.kind {
            EntryKind::GaussianReal => C64::new(rng.sample(StandardNormal), 0.0),
            EntryKind::GaussianComplex => {
                let a: f64 = rng.sample(StandardNormal);
                let b: f64 = rng.sample(StandardNormal);
                C64::new(a, b) / SQRT_2
            }
            EntryKind::TernaryReal => C64::new(ternary(rng), 0.0),
            EntryKind::TernaryComplex => {
                let a = ternary(rng);
                let b = ternary(rng);
                C64::new(a, b) / SQRT_2
            }
            EntryKind::BernoulliSym => C64::new(if rng.random_bool(0.5) { 1.0 } else { -1.0 }, 0.0),
            EntryKind::CustomTable => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut pick = self.atoms[self.atoms.len() - 1].0;
                for &(x, p) in &self.atoms {
                    acc += p;
                    if u < acc {
                        pick = x;
                        break;
                    }
                }
                pick
            }
        };
        x * self.scale
    }

    /// Largest z-score `|empirical − declared| / stderr` over all moments of order
    /// `1..=4`, from `samples` draws with a fixed seed.
    pub fn empirical_moment_check(&self, samples: usize, seed: u64) -> MomentCheck {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let idx: Vec<(usize, usize)> = MomentTable::indices(MAX_MOMENT_ORDER).collect();
        let mut sum = vec![C64::default(); idx.len()];
        let mut sum_sq = vec![0.0; idx.len()];
        for _ in 0..samples {
            let x = self.sample(&mut rng);
            for (t, &(k, l)) in idx.iter().enumerate() {
                let v = x.powu(k as u32) * x.conj().powu(l as u32);
                sum[t] += v;
                sum_sq[t] += v.norm_sqr();
            }
        }
        let n = samples as f64;
        let table = self.moments();
        let mut max_z: f64 = 0.0;
        let mut worst = (0, 0);
        for (t, &(k, l)) in idx.iter().enumerate() {
            let mean = sum[t] / n;
            let var = (sum_sq[t] / n - mean.norm_sqr()).max(0.0);
            let se = (var / n).sqrt();
            let dev = (mean - table.get(k, l)).norm();
            let z = if se > 0.0 {
                dev / se
            } else if dev < 1e-12 {
                0.0
            } else {
                f64::INFINITY
            };
            if z > max_z {
                max_z = z;
                worst = (k, l);
            }
        }
        MomentCheck { samples, max_z, worst }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentCheck {
    pub samples: usize,
    pub max_z: f64,
    pub worst: (usize, usize),
}

fn ternary<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    match rng.random_range(0..6u32) {
        0 => -SQRT_3,
        1 => SQRT_3,
        _ => 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Goe,
    Gue,
    WignerCustom,
    ErdosRenyi,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Goe => "GOE",
            Family::Gue => "GUE",
            Family::WignerCustom => "wigner-custom",
            Family::ErdosRenyi => "erdos-renyi",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub family: Family,
    pub n: usize,
    pub offdiag: EntryDistribution,
    pub diag: EntryDistribution,
    /// Edge probability, Erdős–Rényi only.
    pub er_p: Option<f64>,
    /// Subtract the entrywise expectation, Erdős–Rényi only.
    pub center_er: bool,
}

impl EnsembleSpec {
    /// Real symmetric Gaussian; `N E|H_ij|² = 1 + δ_ij`.
    pub fn goe(n: usize) -> Self {
        Self {
            family: Family::Goe,
            n,
            offdiag: EntryDistribution::gaussian_real(),
            diag: EntryDistribution::gaussian_real().with_scale(SQRT_2),
            er_p: None,
            center_er: false,
        }
    }

    /// Complex Hermitian Gaussian; `N E|H_ij|² = 1`.
    pub fn gue(n: usize) -> Self {
        Self {
            family: Family::Gue,
            n,
            offdiag: EntryDistribution::gaussian_complex(),
            diag: EntryDistribution::gaussian_real(),
            er_p: None,
            center_er: false,
        }
    }

    /// Wigner matrix with the given off-diagonal law and its real counterpart on the diagonal.
    pub fn wigner(n: usize, offdiag: EntryDistribution) -> Self {
        let diag = offdiag.real_counterpart();
        Self::wigner_with_diag(n, offdiag, diag)
    }

    pub fn wigner_with_diag(n: usize, offdiag: EntryDistribution, diag: EntryDistribution) -> Self {
        Self { family: Family::WignerCustom, n, offdiag, diag, er_p: None, center_er: false }
    }

    pub fn erdos_renyi(n: usize, p: f64, center: bool) -> Self {
        Self {
            family: Family::ErdosRenyi,
            n,
            offdiag: EntryDistribution::bernoulli_sym(),
            diag: EntryDistribution::bernoulli_sym(),
            er_p: Some(p),
            center_er: center,
        }
    }

    /// Same ensemble at a different dimension.
    pub fn with_n(&self, n: usize) -> Self {
        Self { n, ..self.clone() }
    }

    pub fn symmetry(&self) -> Symmetry {
        if self.family == Family::ErdosRenyi || (self.offdiag.is_real() && self.diag.is_real()) {
            Symmetry::RealSymmetric
        } else {
            Symmetry::ComplexHermitian
        }
    }

    /// Samples one matrix, dispatching on the family.
    pub fn sample(&self, seed: u64) -> Result<HermitianMatrix> {
        match self.family {
            Family::ErdosRenyi => {
                let p = self.er_p.ok_or_else(|| Error::InvalidParameter("erdos-renyi ensemble needs an edge probability".into()))?;
                let mut h = sample_erdos_renyi(self.n, p, self.center_er, seed)?;
                h.provenance = Some(Provenance { spec: self.clone(), seed });
                Ok(h)
            }
            _ => sample_wigner(self, seed),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symmetry {
    RealSymmetric,
    ComplexHermitian,
}

impl Symmetry {
    fn tag(self) -> u64 {
        match self {
            Symmetry::RealSymmetric => 0,
            Symmetry::ComplexHermitian => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub spec: EnsembleSpec,
    pub seed: u64,
}

/// Dense Hermitian matrix. The upper triangle is the source of truth and the lower
/// triangle is always its exact conjugate mirror.
#[derive(Debug, Clone)]
pub struct HermitianMatrix {
    data: CMat,
    symmetry: Symmetry,
    pub provenance: Option<Provenance>,
}

impl HermitianMatrix {
    /// Builds a matrix from its upper triangle; `upper(i, j)` is only called for `i ≤ j`.
    /// Diagonal entries keep their real part only, and real-symmetric matrices drop
    /// all imaginary parts.
    pub fn from_upper_fn(n: usize, symmetry: Symmetry, mut upper: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Mat::<C64>::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut v = upper(i, j);
                if i == j || symmetry == Symmetry::RealSymmetric {
                    v.im = 0.0;
                }
                data[(i, j)] = v;
                data[(j, i)] = v.conj();
            }
        }
        Self { data, symmetry, provenance: None }
    }

    /// Wraps a dense matrix after checking exact Hermitian symmetry.
    pub fn from_dense(m: MatRef<'_, C64>) -> Result<Self> {
        let n = m.nrows();
        if n != m.ncols() || n == 0 {
            return Err(Error::InvalidDimension(format!("{}x{} is not a square matrix", n, m.ncols())));
        }
        let mut real = true;
        for i in 0..n {
            for j in i..n {
                if m[(i, j)] != m[(j, i)].conj() {
                    return Err(Error::InvalidInput(format!("entry ({i},{j}) breaks Hermitian symmetry")));
                }
                real &= m[(i, j)].im == 0.0;
            }
        }
        let symmetry = if real { Symmetry::RealSymmetric } else { Symmetry::ComplexHermitian };
        Ok(Self { data: m.to_owned(), symmetry, provenance: None })
    }

    /// Real diagonal matrix.
    pub fn diagonal(values: &[f64]) -> Self {
        Self::from_upper_fn(values.len(), Symmetry::RealSymmetric, |i, j| if i == j { C64::new(values[i], 0.0) } else { C64::default() })
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn is_real(&self) -> bool {
        self.symmetry == Symmetry::RealSymmetric
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[(i, j)]
    }

    pub fn as_ref(&self) -> MatRef<'_, C64> {
        self.data.as_ref()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n()).map(|i| self.data[(i, i)].re).sum()
    }

    /// `Tr H² = Σ_ij |H_ij|²`.
    pub fn trace_sq(&self) -> f64 {
        let n = self.n();
        (0..n).flat_map(|j| (0..n).map(move |i| (i, j))).map(|(i, j)| self.data[(i, j)].norm_sqr()).sum()
    }

    /// `max_ij |H_ij − conj(H_ji)|`; zero by construction.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.data[(i, j)] - self.data[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Entrywise equality, bit for bit.
    pub fn bit_identical(&self, other: &Self) -> bool {
        let n = self.n();
        n == other.n()
            && (0..n).all(|i| {
                (0..n).all(|j| {
                    let (a, b) = (self.data[(i, j)], other.data[(i, j)]);
                    a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits()
                })
            })
    }

    /// Binary layout: 16-byte header (`N` as u64 LE, symmetry tag as u64 LE; 0 = real
    /// symmetric, 1 = complex Hermitian) followed by the upper triangle in row-major
    /// order (`i ≤ j`), each entry as two little-endian f64 (re, im).
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let n = self.n();
        w.write_all(&(n as u64).to_le_bytes())?;
        w.write_all(&self.symmetry.tag().to_le_bytes())?;
        for i in 0..n {
            for j in i..n {
                let v = self.data[(i, j)];
                w.write_all(&v.re.to_le_bytes())?;
                w.write_all(&v.im.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut word = [0u8; 8];
        r.read_exact(&mut word)?;
        let n = u64::from_le_bytes(word) as usize;
        r.read_exact(&mut word)?;
        let symmetry = match u64::from_le_bytes(word) {
            0 => Symmetry::RealSymmetric,
            1 => Symmetry::ComplexHermitian,
            t => return Err(Error::Format(format!("unknown symmetry tag {t}"))),
        };
        if n == 0 || n > 1 << 20 {
            return Err(Error::Format(format!("implausible dimension {n}")));
        }
        let mut upper = Vec::with_capacity(n * (n + 1) / 2);
        for _ in 0..n * (n + 1) / 2 {
            r.read_exact(&mut word)?;
            let re = f64::from_le_bytes(word);
            r.read_exact(&mut word)?;
            let im = f64::from_le_bytes(word);
            upper.push(C64::new(re, im));
        }
        let mut it = upper.into_iter();
        Ok(Self::from_upper_fn(n, symmetry, |_, _| it.next().unwrap()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(f))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(f))
    }
}

/// Wigner sample `H_ij = X_ij/√N` with `X_ij` from the off-diagonal law (`i < j`) or
/// the diagonal law (`i = j`).
pub fn sample_wigner(spec: &EnsembleSpec, seed: u64) -> Result<HermitianMatrix> {
    if spec.family == Family::ErdosRenyi {
        return Err(Error::InvalidParameter("erdos-renyi ensembles are sampled by sample_erdos_renyi".into()));
    }
    if spec.n < 2 {
        return Err(Error::InvalidDimension(format!("N = {} but Wigner matrices need N ≥ 2", spec.n)));
    }
    if !spec.diag.is_real() {
        return Err(Error::InvalidParameter("diagonal law of a Hermitian matrix must be real".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let norm = 1.0 / (spec.n as f64).sqrt();
    let mut h = HermitianMatrix::from_upper_fn(spec.n, spec.symmetry(), |i, j| {
        let x = if i == j { spec.diag.sample(&mut rng) } else { spec.offdiag.sample(&mut rng) };
        x * norm
    });
    h.provenance = Some(Provenance { spec: spec.clone(), seed });
    Ok(h)
}

/// `A/√(Np(1−p))` for the adjacency matrix `A` of `G(N, p)` (zero diagonal), minus its
/// expectation `p/√(Np(1−p))` off the diagonal when `center` is set.
pub fn sample_erdos_renyi(n: usize, p: f64, center: bool, seed: u64) -> Result<HermitianMatrix> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("edge probability {p} is outside (0, 1)")));
    }
    if n < 2 {
        return Err(Error::InvalidDimension(format!("N = {n} but graphs need N ≥ 2")));
    }
    let variance = n as f64 * p * (1.0 - p);
    if variance < 1.0 {
        return Err(Error::InvalidParameter(format!("N p (1 − p) = {variance} < 1")));
    }
    let norm = 1.0 / variance.sqrt();
    let shift = if center { p * norm } else { 0.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(HermitianMatrix::from_upper_fn(n, Symmetry::RealSymmetric, |i, j| {
        if i == j {
            C64::default()
        } else {
            let a = if rng.random_bool(p) { 1.0 } else { 0.0 };
            C64::new(a * norm - shift, 0.0)
        }
    }))
}

/// Non-Gaussian law agreeing with a Gaussian reference in every moment of order ≤ 4.
pub fn four_moment_matched(reference: &EntryDistribution) -> Result<EntryDistribution> {
    let matched = match reference.kind {
        EntryKind::GaussianReal => EntryDistribution::ternary_real(),
        EntryKind::GaussianComplex => EntryDistribution::ternary_complex(),
        other => return Err(Error::UnsupportedReference(other.name().into())),
    };
    Ok(matched.with_scale(reference.scale))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchReport {
    pub matched: bool,
    pub max_discrepancy: f64,
    /// Moment `(k, l)` attaining the largest discrepancy.
    pub worst: (usize, usize),
}

/// Compares the moment tables through `order`; match means every discrepancy ≤ 1e-12.
pub fn verify_matching(d1: &EntryDistribution, d2: &EntryDistribution, order: usize) -> Result<MatchReport> {
    if order > MAX_MOMENT_ORDER {
        return Err(Error::UnsupportedOrder(order));
    }
    let (m1, m2) = (d1.moments(), d2.moments());
    let mut report = MatchReport { matched: true, max_discrepancy: 0.0, worst: (0, 0) };
    for (k, l) in MomentTable::indices(order) {
        let diff = (m1.get(k, l) - m2.get(k, l)).norm();
        if diff > report.max_discrepancy {
            report.max_discrepancy = diff;
            report.worst = (k, l);
        }
    }
    report.matched = report.max_discrepancy <= 1e-12;
    Ok(report)
}

/// Position `φ(i, j) ∈ 1..=N(N+1)/2` of the upper-triangular pair `i ≤ j` (0-based
/// indices) in row-major order.
pub fn upper_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < n);
    // rows 0..i hold n + (n−1) + … + (n−i+1) entries
    i * n - i * (i.max(1) - 1) / 2 + (j - i) + 1
}

/// Inverse of [`upper_index`].
pub fn upper_pair(n: usize, gamma: usize) -> (usize, usize) {
    assert!(gamma >= 1 && gamma <= n * (n + 1) / 2);
    let mut start = 0;
    for i in 0..n {
        let len = n - i;
        if gamma <= start + len {
            return (i, i + gamma - start - 1);
        }
        start += len;
    }
    unreachable!()
}

/// `H^γ`: entry `(i, j)` comes from `hpp` when `φ(i, j) ≤ γ` and from `hp` otherwise,
/// so `H^0 = hp` and `H^{N(N+1)/2} = hpp`.
pub fn telescoping_interpolation(hp: &HermitianMatrix, hpp: &HermitianMatrix, gamma: usize) -> Result<HermitianMatrix> {
    let n = hp.n();
    if hpp.n() != n {
        return Err(Error::InvalidInput(format!("dimension mismatch: {} vs {}", n, hpp.n())));
    }
    let total = n * (n + 1) / 2;
    if gamma > total {
        return Err(Error::InvalidInput(format!("gamma = {gamma} exceeds N(N+1)/2 = {total}")));
    }
    let symmetry = if hp.is_real() && hpp.is_real() { Symmetry::RealSymmetric } else { Symmetry::ComplexHermitian };
    Ok(HermitianMatrix::from_upper_fn(n, symmetry, |i, j| if upper_index(n, i, j) <= gamma { hpp.get(i, j) } else { hp.get(i, j) }))
}

/// `δ_N = N sup E|H_ij|³ = E|X|³/√N`.
pub fn delta_diagnostic(dist: &EntryDistribution, n: usize) -> f64 {
    dist.third_abs_moment() / (n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upper_index_is_row_major() {
        let n = 3;
        let order: Vec<_> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
        for (pos, &(i, j)) in order.iter().enumerate() {
            assert_eq!(upper_index(n, i, j), pos + 1);
            assert_eq!(upper_pair(n, pos + 1), (i, j));
        }
    }

    #[test]
    fn gaussian_complex_moments() {
        let m = EntryDistribution::gaussian_complex().moments();
        assert_eq!(m.get(1, 1), C64::new(1.0, 0.0));
        assert_eq!(m.get(2, 2), C64::new(2.0, 0.0));
        assert_eq!(m.get(2, 0), C64::default());
        assert_eq!(m.get(3, 1), C64::default());
    }

    #[test]
    fn custom_table_must_be_standardized() {
        let skewed = vec![(C64::new(1.0, 0.0), 0.5), (C64::new(0.0, 0.0), 0.5)];
        assert!(EntryDistribution::custom_table("skewed", skewed).is_err());
        let ok = vec![(C64::new(-1.0, 0.0), 0.5), (C64::new(1.0, 0.0), 0.5)];
        let d = EntryDistribution::custom_table("pm1", ok).unwrap();
        assert!(verify_matching(&d, &EntryDistribution::bernoulli_sym(), 4).unwrap().matched);
    }

    #[test]
    fn diagonal_defaults() {
        let goe = EnsembleSpec::goe(4);
        assert!((goe.diag.moments().get(1, 1).re - 2.0).abs() < 1e-15);
        let gue = EnsembleSpec::gue(4);
        assert!(gue.diag.is_real());
        assert_eq!(gue.symmetry(), Symmetry::ComplexHermitian);
        let tern = EnsembleSpec::wigner(4, EntryDistribution::ternary_complex());
        assert_eq!(tern.diag.kind, EntryKind::TernaryReal);
    }
}
