//! The named experiments. Each one samples through the Monte Carlo runner, merges
//! results in sample order and returns its tables, criteria and headline metrics.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rmtlab_core::ensemble::{four_moment_matched, EnsembleSpec, HermitianMatrix};
use rmtlab_core::hs::{self, CutoffChi, HsGrid, PolyBump, SmoothFunction, SmoothIndicator, SquareContour, Transition};
use rmtlab_core::linalg::{self, CMat};
use rmtlab_core::resolvent::{self, IdentityCheck, MinorIndexSet, ResolventMethod};
use rmtlab_core::semicircle::{self, SpectralParam};
use rmtlab_core::spectral::{self, EdgeRow, SpectralDecomposition};
use rmtlab_core::verification::{self as ver, Coefficients, LargeDeviationKind, MCConfig};
use rmtlab_core::{stats, tracy_widom, Result, C64};

use crate::catalog::entry;
use crate::config::{Experiment, ExperimentConfig};
use crate::output::{Cell, Criterion, CsvTable, Outcome};

pub fn run(cfg: &ExperimentConfig, threads: usize) -> Result<Outcome> {
    let mc = MCConfig::new(cfg.samples, cfg.seed).with_workers(threads);
    match cfg.experiment {
        Experiment::IdentitySuite => identity_suite(cfg, &mc),
        Experiment::GlobalLaw => global_law(cfg, &mc),
        Experiment::LocalLaw => local_law(cfg, &mc),
        Experiment::Rigidity => rigidity(cfg, &mc),
        Experiment::Delocalization => delocalization(cfg, &mc),
        Experiment::Counting => counting(cfg, &mc),
        Experiment::EdgeScaling => edge_scaling(cfg, &mc),
        Experiment::FluctAvg => fluct_avg(cfg, &mc),
        Experiment::LargeDev => large_dev(cfg, &mc),
        Experiment::SineKernel => sine_kernel(cfg, &mc),
        Experiment::Gfc => gfc(cfg, &mc),
        Experiment::HsCheck => hs_check(cfg, &mc),
        Experiment::RepulsionContrast => repulsion_contrast(cfg, &mc),
    }
}

fn table(experiment: Experiment) -> CsvTable {
    let e = entry(experiment);
    CsvTable::new(e.csv, e.header)
}

/// Independent Monte Carlo stream for a sub-experiment (another N, ensemble or kind).
fn substream(mc: &MCConfig, tag: u64) -> MCConfig {
    MCConfig { base_seed: ver::sample_seed(mc.base_seed, (1 << 32) + tag as usize), ..*mc }
}

/// Uniform on `[0, 1)` from a seed.
fn uniform(seed: u64) -> f64 {
    (ver::splitmix64(seed) >> 11) as f64 / (1u64 << 53) as f64
}

fn sp(e: f64, eta: f64) -> SpectralParam {
    SpectralParam { e, eta }
}

type EigenvalueSamples = Vec<(u64, Vec<f64>)>;

static SAMPLE_CACHE: OnceLock<Mutex<HashMap<String, EigenvalueSamples>>> = OnceLock::new();

/// Keeps eigenvalue samples for the rest of the process so that experiments sharing an
/// ensemble and base seed reuse them. Samples depend only on their seeds, so outputs are
/// unchanged; this only saves time when many experiments run in one process.
pub fn enable_sample_cache() {
    SAMPLE_CACHE.get_or_init(Default::default);
}

fn eigenvalue_samples(spec: &EnsembleSpec, mc: &MCConfig) -> Result<EigenvalueSamples> {
    let compute = || -> Result<EigenvalueSamples> {
        ver::run_samples(mc, |_, seed| spec.sample(seed).and_then(|h| spectral::eigenvalues(&h)).map(|l| (seed, l)))?.into_iter().collect()
    };
    let Some(cache) = SAMPLE_CACHE.get() else {
        return compute();
    };
    let key = format!("{spec:?}/{}", mc.base_seed);
    if let Some(hit) = cache.lock().expect("cache lock").get(&key) {
        if hit.len() >= mc.samples {
            return Ok(hit[..mc.samples].to_vec());
        }
    }
    let fresh = compute()?;
    cache.lock().expect("cache lock").insert(key, fresh.clone());
    Ok(fresh)
}

/// `V f(Λ) V*`.
pub fn apply_spectral(d: &SpectralDecomposition, f: impl Fn(f64) -> C64) -> CMat {
    let n = d.lambdas.len();
    let fl: Vec<C64> = d.lambdas.iter().map(|&l| f(l)).collect();
    CMat::from_fn(n, n, |i, j| (0..n).map(|k| d.vectors[(i, k)] * fl[k] * d.vectors[(j, k)].conj()).sum())
}

fn max_entry_diff(a: &CMat, b: &CMat) -> f64 {
    linalg::max_abs_diff(a.as_ref(), b.as_ref())
}

fn fit_exponent(points: &[(usize, f64)]) -> Result<ver::ScalingFit> {
    ver::fit_power_law(points)
}

/// Dimensions used for scaling fits, always including the main `N`.
fn scaling_dims(cfg: &ExperimentConfig) -> Option<Vec<usize>> {
    cfg.n_values.as_ref().map(|v| {
        let mut v = v.clone();
        v.sort_unstable();
        v.dedup();
        v
    })
}

/// Spread of row indices used by the minor-based identity checks.
fn probe_indices(n: usize) -> Vec<usize> {
    let mut idx = vec![0, n / 3, (2 * n) / 3, n - 1];
    idx.dedup();
    idx
}

const IDENTITY_TOL: f64 = 1e-8;
const HS_TOL: f64 = 1e-4;
const CONTOUR_TOL: f64 = 1e-8;

/// The five Helffer–Sjöstrand test functions.
pub fn hs_test_functions() -> Vec<(&'static str, Box<dyn SmoothFunction>)> {
    vec![
        ("bump(0,1.5,6)", Box::new(PolyBump::new(0.0, 1.5, 6))),
        ("bump(0.5,1,8)", Box::new(PolyBump::new(0.5, 1.0, 8))),
        ("indicator(-1,0.5;0.5)", Box::new(SmoothIndicator::new(-1.0, 0.5, 0.5, Transition::Septic))),
        ("indicator(-4,4;1)", Box::new(SmoothIndicator::new(-4.0, 4.0, 1.0, Transition::Septic))),
        ("bump(-1,2,5)", Box::new(PolyBump::new(-1.0, 2.0, 5))),
    ]
}

/// Max-entry error of `hs_evaluate` against the spectral reference.
pub fn hs_error(h: &HermitianMatrix, d: &SpectralDecomposition, f: &dyn SmoothFunction, order: usize) -> Result<(f64, hs::HsResult)> {
    let chi = CutoffChi::covering(h, f, 1.0, 2.0)?;
    let out = hs::hs_evaluate(h, f, order, &chi, &HsGrid::default())?;
    let reference = apply_spectral(d, |x| C64::new(f.value(x), 0.0));
    Ok((max_entry_diff(&out.matrix, &reference), out))
}

type ContourFn = (&'static str, fn(C64) -> C64, fn(f64) -> f64);

const CONTOUR_FUNCTIONS: [ContourFn; 3] = [("z", |z| z, |x| x), ("z^2", |z| z * z, |x| x * x), ("exp", |z| z.exp(), f64::exp)];

pub fn contour_error(h: &HermitianMatrix, d: &SpectralDecomposition, f: &ContourFn) -> Result<f64> {
    let contour = SquareContour::new(hs::spectral_bound(h) + 1.0);
    let out = hs::contour_evaluate(h, &f.1, &contour)?;
    let reference = apply_spectral(d, |x| C64::new((f.2)(x), 0.0));
    Ok(max_entry_diff(&out, &reference))
}

/// Named check, its residual and the tolerance it must meet.
type NamedCheck = (String, IdentityCheck, f64);

fn identity_checks(h: &HermitianMatrix) -> Result<Vec<NamedCheck>> {
    let n = h.n();
    let idx = probe_indices(n);
    let mut out = Vec::new();
    for (k, z) in [sp(0.3, 0.05), sp(-1.5, 0.01), sp(2.5, 0.5)].into_iter().enumerate() {
        let g = resolvent::green(h, z, ResolventMethod::DirectSolve)?;
        out.push((format!("ward@z{k}"), resolvent::ward_violation(&g), IDENTITY_TOL));

        let mut expansions = resolvent::check_resolvent_identities_all(h, z, &MinorIndexSet::empty(), &idx)?;
        if n >= 4 {
            let t = MinorIndexSet::new(vec![n / 2]);
            let ks: Vec<usize> = idx.iter().copied().filter(|&i| i != n / 2).collect();
            expansions = expansions.merge(resolvent::check_resolvent_identities_all(h, z, &t, &ks)?);
        }
        out.push((format!("resolvent-expansion@z{k}"), expansions, IDENTITY_TOL));

        let shifted = linalg::shifted(h.as_ref(), z.z());
        let mut block = resolvent::check_schur(&shifted, 1)?;
        if n >= 4 {
            block = block.merge(resolvent::check_schur(&shifted, n / 2)?);
        }
        out.push((format!("schur-block@z{k}"), block, IDENTITY_TOL));

        let mut rows = IdentityCheck { violation: 0.0, scale: 1.0 };
        let mut decomposition = IdentityCheck { violation: 0.0, scale: 1.0 };
        for &i in &idx {
            rows = rows.merge(resolvent::check_schur_row(h, &g, i)?);
            let t = resolvent::fluctuation_terms(h, &g, i)?;
            let lhs = 1.0 / g.get(i, i);
            let rhs = -z.z() - g.s + t.y;
            let parts = h.get(i, i) + t.a - t.z_term;
            decomposition = decomposition.merge(IdentityCheck {
                violation: (lhs - rhs).norm().max((t.y - parts).norm()),
                scale: lhs.norm().max(rhs.norm()).max(t.y.norm()).max(1.0),
            });
        }
        out.push((format!("schur-row@z{k}"), rows, IDENTITY_TOL));
        out.push((format!("inverse-diagonal@z{k}"), decomposition, IDENTITY_TOL));
    }

    // contour calculus on the leading 8×8 block, which is itself a Hermitian matrix
    let b = n.min(8);
    let block = if b < n { resolvent::minor(h, &MinorIndexSet::new((b..n).collect()))?.matrix } else { h.clone() };
    let d = spectral::decompose(&block)?;
    let exp = &CONTOUR_FUNCTIONS[2];
    let err = contour_error(&block, &d, exp)?;
    let scale = linalg::max_abs(apply_spectral(&d, |x| C64::new(x.exp(), 0.0)).as_ref()).max(1.0);
    out.push(("contour-exp".into(), IdentityCheck { violation: err, scale }, CONTOUR_TOL));
    Ok(out)
}

fn identity_suite(cfg: &ExperimentConfig, mc: &MCConfig) -> Result<Outcome> {
    let spec = cfg.ensemble()?;
    let per_sample: Vec<(u64, Vec<NamedCheck>)> =
        ver::run_samples(mc, |_, seed| spec.sample(seed).and_then(|h| identity_checks(&h)).map(|c| (seed, c)))?
            .into_iter()
            .collect::<Result<_>>()?;
    let mut t = table(Experiment::IdentitySuite);
    let (mut worst_identity, mut worst_contour) = (0.0f64, 0.0f64);
    for (seed, checks) in &per_sample {
        for (name, check, tol) in checks {
            t.push(vec![
                cfg.n.into(),
                (*seed).into(),
                name.as_str().into(),
                check.violation.into(),
                check.scale.into(),
                check.passes(*tol).into(),
            ]);
            let rel = check.violation / check.scale;
            match name.as_str() {
                "contour-exp" => worst_contour = worst_contour.max(rel),
                _ => worst_identity = worst_identity.max(rel),
            }
        }
    }
    let mut o = Outcome { tables: vec![t], ..Default::default() };
    o.criteria.push(Criterion::at_most(
        "exact identities",
        worst_identity,
        IDENTITY_TOL,
        "max relative violation of Ward, resolvent expansion, Schur and 1/G_ii identities",
    ));
    o.criteria.push(Criterion::at_most(
        "contour",
        worst_contour,
        CONTOUR_TOL,
        "relative max-entry error of exp(H) on the leading 8×8 block",
    ));
    o.metric("max_identity_violation", worst_identity);
    Ok(o)
}

fn global_law(cfg: &ExperimentConfig, mc: &MCConfig) -> Result<Outcome> {
    let spec = cfg.ensemble()?;
    let points = cfg.domain()?.points();
    let n = cfg.n as f64;
    let samples = eigenvalue_samples(&spec, mc)?;
    let mut t = table(Experiment::GlobalLaw);
    let mut scaled: Vec<Vec<f64>> = vec![Vec::new(); points.len()];
    for (seed, l) in &samples {
        for (k, z) in points.iter().enumerate() {
            let s = spectral::empirical_stieltjes(l, z.z());
            let m = semicircle::stieltjes_m(*z);
            let err = (s - m).norm();
            scaled[k].push(err * n * z.eta);
            t.push(vec![
                cfg.n.into(),
                (*seed).into(),
                z.e.into(),
                z.eta.into(),
                s.re.into(),
                s.im.into(),
                m.re.into(),
                m.im.into(),
                err.into(),
            ]);
        }
    }
    let worst = scaled.iter().map(|v| stats::median(v)).fold(0.0, f64::max);
    let pooled: Vec<f64> = samples.iter().flat_map(|(_, l)| l.iter().copied()).collect();
    let ks = stats::ks_one_sample(&pooled, semicircle::cdf);
    let mut o = Outcome { tables: vec![t], ..Default::default() };
    o.criteria.push(Criterion::at_most("median |s−m|·Nη", worst, 10.0, "largest per-point median over the grid"));
    o.criteria.push(Criterion::at_most("spectral distribution KS", ks, 0.05, "pooled eigenvalues against the semicircle CDF"));
    o.metric("max_median_err_times_N_eta", worst);
    o.metric("ks_semicircle", ks);
    Ok(o)
}

fn local_law(cfg: &ExperimentConfig, mc: &MCConfig) -> Result<Outcome> {
    let spec = cfg.ensemble()?;
    let grid = cfg.domain()?;
    let rows = ver::run_local_law(&spec, &grid, mc)?;
    let n = cfg.n as f64;
    let mut t = table(Experiment::LocalLaw);
    for r in &rows {
        t.push(vec![
            r.n.into(),
            r.seed.into(),
            r.e.into(),
            r.eta.into(),
            r.lambda.into(),
            r.lambda_star.into(),
            r.theta.into(),
            r.psi.into(),
            r.inv_n_eta.into(),
            r.failed.into(),
        ]);
    }
    let ok: Vec<_> = rows.iter().filter(|r| !r.failed).collect();
    let failed = rows.len() - ok.len();
    let threshold = n.powf(0.2);
    let exceed = ok.iter().filter(|r| r.lambda > threshold * r.psi).count() as f64 / ok.len().max(1) as f64;
    let medians = ver::local_law_point_medians(&rows);
    let worst_theta = medians.iter().map(|m| m.2).fold(0.0, f64::max);

    // weak-law shape: median Λ ≤ (Nη)^{-1/4} N^{0.1}
    let weak = medians
        .iter()
        .map(|&(e, eta, _, _)| {
            let lam: Vec<f64> = ok.iter().filter(|r| r.e == e && r.eta == eta).map(|r| r.lambda).collect();
            stats::median(&lam) / ((n * eta).powf(-0.25) * n.powf(0.1))
        })
        .fold(0.0, f64::max);

    // Λ against Nη along the energy closest to the band centre
    let e0 = grid.e_points.iter().copied().min_by(|a, b| a.abs().total_cmp(&b.abs())).unwrap_or(0.0);
    let (x, y): (Vec<f64>, Vec<f64>) = grid
        .eta_points
        .iter()
        .map(|&eta| {
            let lam: Vec<f64> = ok.iter().filter(|r| r.e == e0 && r.eta == eta).map(|r| r.lambda).collect();
            ((n * eta).ln(), stats::median(&lam).ln())
        })
        .unzip();
    let lambda_fit = stats::least_squares(&x, &y);

    let mut o = Outcome { tables: vec![t], ..Default::default() };
    o.criteria.push(Criterion::at_most("median Θ·Nη", worst_theta, 10.0, "largest per-point median over the grid"));
    o.criteria.push(Criterion::at_most(
        "Λ > N^0.2·Ψ exceedance",
        exceed,
        0.02,
        format!("fraction of {} rows; {failed} failed rows excluded", ok.len()),
    ));
    o.criteria.push(Criterion::at_most("weak law", weak, 1.0, "largest median Λ / ((Nη)^{-1/4} N^{0.1})"));
    o.metric("failed_rows", failed as f64);
    o.metric("max_median_theta_times_N_eta", worst_theta);
    o.metric("lambda_exceed_fraction", exceed);
    o.metric("lambda_exponent_vs_N_eta", lambda_fit.slope);
    o.metric("lambda_exponent_stderr", lambda_fit.slope_stderr);
    Ok(o)
}

/// Mean of `|λ_i − γ_i|` over the bulk indices `N/4 ≤ i < 3N/4`.
pub fn bulk_deviation(l: &[f64], g: &semicircle::TypicalLocations) -> f64 {
    let n = l.len();
    let range = n / 4..(3 * n) / 4;
    let len = range.len() as f64;
    range.map(|k| (l[k] - g.gamma[k]).abs()).sum::<f64>() / len
}

fn rigidity(cfg: &ExperimentConfig, mc: &MCConfig) -> Result<Outcome> {
    let spec = cfg.ensemble()?;
    let mut dims = scaling_dims(cfg).unwrap_or_default();
    if !dims.contains(&cfg.n) {
        dims.push(cfg.n);
    }
    let mut t = table(Experiment::Rigidity);
    let mut o = Outcome::default();
    let mut bulk = Vec::new();
    for &n in &dims {
        let mc_n = if n == cfg.n { *mc } else { substream(mc, n as u64) };
        let gammas = semicircle::typical_locations(n)?;
        let samples = eigenvalue_samples(&spec.with_n(n), &mc_n)?;
        let mut maxima = Vec::new();
        let mut devs = Vec::new();
        for (seed, l) in &samples {
            let report = spectral::rigidity_report(l, &gammas)?;
            for r in &report.rows {
                t.push(vec![n.into(), (*seed).into(), r.i.into(), r.lambda.into(), r.gamma.into(), r.dev.into(), r.normalized.into()]);
            }
            maxima.push(report.max_normalized);
            devs.push(bulk_deviation(l, &gammas));
        }
        bulk.push((n, stats::median(&devs)));
        if n == cfg.n {
            let med = stats::median(&maxima);
            let bound = (n as f64).powf(0.15);
            o.criteria.push(Criterion::at_most(
                "rigidity max",
                med,
                bound,
                format!("median over samples of max_i N^(2/3)(i∧(N+1−i))^(1/3)|λ_i−γ_i| against N^0.15 at N = {n}"),
            ));
            o.metric("median_max_normalized", med);
        }
    }
    if cfg.n_values.is_some() {
        let fit = fit_exponent(&bulk)?;
        o.criteria.push(Criterion {
            name: "bulk deviation exponent".into(),
            passed: (-1.15..=-0.85).contains(&fit.exponent),
            measured: fit.exponent,
            threshold: -1.0,
            detail: format!("fit of median bulk |λ_i−γ_i| vs N must lie in [−1.15, −0.85] (stderr {:.3})", fit.stderr),
        });
        o.metric("bulk_deviation_exponent", fit.exponent);
    }
    o.tables.push(t);
    Ok(o)
}

fn delocalization(cfg: &ExperimentConfig, mc: &MCConfig) -> Result<Outcome> {
    let spec = cfg.ensemble()?;
    let per_sample: Vec<(u64, Vec<f64>)> = ver::run_samples(mc, |_, seed| {
        let h = spec.sample(seed)?;
        Ok((seed, spectral::delocalization_report(&spectral::decompose(&h)?)))
    })?
    .into_iter()
    .collect::<Result<_>>()?;
    let bound = 4.0 * (cfg.n as f64).ln();
    let mut t = table(Experiment::Delocalization);
    let mut within = 0;
    let mut maxima = Vec::new();
    for (seed, sup) in &per_sample {
        for (k, v) in sup.iter().enumerate() {
            t.push(vec![cfg.n.into(), (*seed).into(), (k + 1).into(), (*v).into()]);
        }
        let max = sup.iter().copied().fold(0.0, f64::max);
        maxima.push(max);
        if max <= bound {
            within += 1;
        }
    }
    let frac = within as f64 / per_sample.len() as f64;
    let mut o = Outcome { tables: vec![t], ..Default::default() };
    o.criteria.push(Criterion::at_least("delocalization", frac, 0.95, "fraction of samples with max_{i,k} N|u_i(k)|² ≤ 4 log N"));
    o.metric("median_max_supstat", stats::median(&maxima));
    o.metric("four_log_n", bound);
    Ok(o)
}

fn random_intervals(seed: u64, count: usize, limit: f64) -> Vec<(f64, f64)> {
    (0..count)
        .map(|k| {
            let a = -limit + 2.0 * limit * uniform(ver::sample_seed(seed, 2 * k));
            let b = -limit + 2.0 * limit * uniform(ver::sample_seed(seed, 2 * k + 1));
            (a.min(b), a.max(b))
        })
        .collect()
}

fn counting(cfg: &ExperimentConfig, mc: &MCConfig) -> Result<Outcome> {
    let spec = cfg.ensemble()?;
    let c = cfg.counting.clone().unwrap_or_default();
    let mut t = table(Experiment::Counting);
    let mut o = Outcome::default();
    let push = |t: &mut CsvTable, n: usize, seed: u64, source: &str, rows: &[spectral::CountingRow]| {
        for (k, r) in rows.iter().enumerate() {
            t.push(vec![
                n.into(),
                seed.into(),
                source.into(),
                k.into(),
                r.a.into(),
                r.b.into(),
                r.mu.into(),
                r.rho.into(),
                r.deviation.into(),
            ]);
        }
    };

    let samples = eigenvalue_samples(&spec, mc)?;
    let bound = (cfg.n as f64).powf(c.epsilon);
    let mut within = 0usize;
    let mut total = 0usize;
    for (seed, l) in &samples {
        let rows = spectral::counting_law(l, &random_intervals(*seed, c.intervals, c.limit))?;
        within += rows.iter().filter(|r| r.deviation <= bound).count();
        total += rows.len();
        push(&mut t, cfg.n, *seed, "ensemble", &rows);
    }
    let frac = within as f64 / total as f64;
    o.criteria.push(Criterion::at_least(
        "counting",
        frac,
        0.99,
        format!("fraction of (sample, interval) pairs with N|μ(I)−ρ(I)| ≤ N^{}", c.epsilon),
    ));
    o.metric("counting_within_fraction", frac);

    // i.i.d. semicircle points: deviations grow like √N instead of staying logarithmic
    let iid_dims = scaling_dims(cfg).unwrap_or_else(|| vec![cfg.n]);
    let mut iid_medians = Vec::new();
    for &n in &iid_dims {
        let mc_n = substream(mc, n as u64);
        let per_sample: Vec<(u64, Vec<spectral::CountingRow>)> = ver::run_samples(&mc_n, |_, seed| {
            let pts = semicircle::sample_iid_semicircle(n, seed);
            spectral::counting_law(&pts, &random_intervals(seed, c.intervals, c.limit)).map(|r| (seed, r))
        })?
        .into_iter()
        .collect::<Result<_>>()?;
        let devs: Vec<f64> = per_sample.iter().flat_map(|(_, r)| r.iter().map(|x| x.deviation)).collect();
        iid_medians.push((n, stats::median(&devs)));
        for (seed, rows) in &per_sample {
            push(&mut t, n, *seed, "iid", rows);
        }
    }
    if cfg.n_values.is_some() {
        let fit = fit_exponent(&iid_medians)?;
        o.criteria.push(Criterion {
            name: "i.i.d. control exponent".into(),
            passed: (fit.exponent - 0.5).abs() <= 0.1,
            measured: fit.exponent,
            threshold: 0.5,
            detail: format!("fit of median N|μ(I)−ρ(I)| vs N for i.i.d. points must be 0.5 ± 0.1 (stderr {:.3})", fit.stderr),
        });
        o.metric("iid_deviation_exponent", fit.exponent);
    }
    o.tables.push(t);
    Ok(o)
}

fn edge_scaling(cfg: &ExperimentConfig, mc: &MCConfig) -> Result<Outcome> {
    let spec = cfg.ensemble()?;
    let mut dims = scaling_dims(cfg).unwrap_or_default();
    if !dims.contains(&cfg.n) {
        dims.push(cfg.n);
    }
    let mut t = table(Experiment::EdgeScaling);
    let mut o = Outcome::default();
    let mut gaps = Vec::new();
    let mut worst_bounded = 1.0f64;
    for &n in &dims {
        let mc_n = if n == cfg.n { *mc } else { substream(mc, n as u64) };
        let samples = eigenvalue_samples(&spec.with_n(n), &mc_n)?;
        let rows: Vec<EdgeRow> = samples.iter().map(|(_, l)| EdgeRow::new(l)).collect();
        for ((seed, _), r) in samples.iter().zip(&rows) {
            t.push(vec![n.into(), (*seed).into(), r.l1.into(), r.ln.into(), r.scaled1.into(), r.scaled_n.into()]);
        }
        let dist: Vec<f64> = rows.iter().map(|r| (r.l1 - 2.0).abs()).collect();
        gaps.push((n, stats::median(&dist)));
        let bounded = rows.iter().filter(|r| r.norm() <= 2.5).count() as f64 / rows.len() as f64;
        o.metric(&format!("norm_bound_fraction_N{n}"), bounded);
        worst_bounded = worst_bounded.min(bounded);
        if n == cfg.n {
            let top: Vec<f64> = rows.iter().map(|r| r.scaled1).collect();
            let ks = stats::ks_one_sample(&top, |s| tracy_widom::f2_at_order(s, tracy_widom::DEFAULT_ORDER));
            o.criteria.push(Criterion::at_most("Tracy–Widom KS", ks, 0.1, format!("KS distance of N^(2/3)(λ_1−2) to F₂ at N = {n}")));
            o.metric("ks_tracy_widom", ks);
            o.metric("median_scaled_top", stats::median(&top));
        }
    }
    o.criteria.insert(0, Criterion::at_least("norm bound", worst_bounded, 0.99, "smallest fraction over N of samples with ‖H‖ ≤ 2.5"));
    if cfg.n_values.is_some() {
        let fit = fit_exponent(&gaps)?;
        o.criteria.push(Criterion {
            name: "edge exponent".into(),
            passed: (-0.8..=-0.55).contains(&fit.exponent),
            measured: fit.exponent,
            threshold: -2.0 / 3.0,
            detail: format!("fit of median |λ_1−2| vs N must lie in [−0.8, −0.55] (stderr {:.3})", fit.stderr),
        });
        o.metric("edge_exponent", fit.exponent);
    }
    o.tables.push(t);
    Ok(o)
}

fn fluct_avg(cfg: &ExperimentConfig, mc: &MCConfig) -> Result<Outcome> {
    let spec = cfg.ensemble()?;
    let dims = scaling_dims(cfg).unwrap_or_default();
    let mut t = table(Experiment::FluctAvg);
    let (mut avg, mut max) = (Vec::new(), Vec::new());
    let mut last_ratio = f64::NAN;
    for &n in &dims {
        let z = SpectralParam::new(0.0, (n as f64).powf(-0.5))?;
        let rows = ver::fluctuation_averaging_experiment(&spec.with_n(n), z, &substream(mc, n as u64))?;
        for r in &rows {
            t.push(vec![n.into(), r.seed.into(), z.eta.into(), r.avg_q.into(), r.max_q.into(), r.lambda_star.into()]);
        }
        let a: Vec<f64> = rows.iter().map(|r| r.avg_q).collect();
        let phi: Vec<f64> = rows.iter().map(|r| r.lambda_star).collect();
        last_ratio = stats::median(&a) / stats::median(&phi).powi(2);
        avg.push((n, a));
        max.push((n, rows.iter().map(|r| r.max_q).collect::<Vec<_>>()));
    }
    let fa = ver::fit_scaling(&avg)?;
    let fm = ver::fit_scaling(&max)?;
    let mut o = Outcome { tables: vec![t], ..Default::default() };
    o.criteria.push(Criterion::at_most(
        "fluctuation averaging gain",
        fa.exponent,
        fm.exponent - 0.3,
        format!(
            "exponent of median |N⁻¹ΣQ_i| ({:.3} ± {:.3}) against exponent of median max|Q_i| ({:.3} ± {:.3}) minus 0.3",
            fa.exponent, fa.stderr, fm.exponent, fm.stderr
        ),
    ));
    o.metric("avg_q_exponent", fa.exponent);
    o.metric("max_q_exponent", fm.exponent);
    o.metric("avg_q_over_lambda_star_sq_at_max_n", last_ratio);
    Ok(o)
}

fn large_dev(cfg: &ExperimentConfig, mc: &MCConfig) -> Result<Outcome> {
    let spec = cfg.ensemble()?;
    let eps = cfg.large_dev.clone().unwrap_or_default().epsilon;
    let n = cfg.n;
    let mut t = table(Experiment::LargeDev);
    let mut o = Outcome::default();
    let kinds = [
        (LargeDeviationKind::Linear, Coefficients::Constant((n as f64).powf(-0.5))),
        (LargeDeviationKind::QuadraticOffdiag, Coefficients::Constant(1.0 / n as f64)),
        (LargeDeviationKind::Bilinear, Coefficients::Constant(1.0 / n as f64)),
    ];
    for (k, (kind, coeffs)) in kinds.iter().enumerate() {
        let mc_k = substream(mc, k as u64);
        let r = ver::large_deviation_experiment(*kind, n, &mc_k, coeffs, &spec.offdiag)?;
        for (i, v) in r.values.iter().enumerate() {
            t.push(vec![kind.name().into(), n.into(), mc_k.seed(i).into(), (*v).into(), r.psi.into()]);
        }
        let frac = r.exceed_fraction(eps);
        o.criteria.push(Criterion::at_most(
            &format!("{} exceedance", kind.name()),
            frac,
            0.01,
            format!("fraction of samples above N^{eps}·Ψ"),
        ));
        o.metric(&format!("{}_p50_over_psi", kind.name()), r.p50 / r.psi);
        o.metric(&format!("{}_p99_over_psi", kind.name()), r.p99 / r.psi);
        if *kind == LargeDeviationKind::Linear {
            o.criteria.push(Criterion::at_most("linear p99/Ψ", r.p99 / r.psi, 3.0, "99th percentile of |Σ b_i X_i| over Ψ"));
        }
    }
    o.tables.push(t);
    Ok(o)
}

/// Mean nearest-neighbour spacing of unfolded points.
pub fn mean_unfolded_spacing(samples: &[spectral::UnfoldedSpectrum]) -> f64 {
    let gaps: Vec<f64> = samples
        .iter()
        .flat_map(|s| {
            let mut u = s.u.clone();
            u.sort_by(f64::total_cmp);
            u.windows(2).map(|w| w[1] - w[0]).collect::<Vec<_>>()
        })
        .collect();
    stats::mean(&gaps)
}

fn sine_kernel(cfg: &ExperimentConfig, mc: &MCConfig) -> Result<Outcome> {
    let spec = cfg.ensemble()?;
    let s = cfg.sine.clone().unwrap_or_default();
    let samples = eigenvalue_samples(&spec, mc)?;
    let unfolded: Vec<_> = samples.iter().map(|(_, l)| spectral::unfold(l, s.e, s.window)).collect::<Result<_>>()?;
    let edges: Vec<f64> = (0..=s.bins).map(|k| s.r_min + (s.r_max - s.r_min) * k as f64 / s.bins as f64).collect();
    let est = spectral::two_point_estimate(&unfolded, &edges)?;
    let mut t = table(Experiment::SineKernel);
    for k in 0..est.bins.len() {
        t.push(vec![est.bins[k].into(), est.values[k].into(), est.prediction[k].into(), est.counts[k].into()]);
    }
    let sup = est.sup_error(s.r_min, s.r_max);
    let mut o = Outcome { tables: vec![t], ..Default::default() };
    o.criteria.push(Criterion::at_most(
        "sine kernel",
        sup,
        0.1,
        format!("sup over bins in [{}, {}] of |ĝ(r) − (1 − K(r)²)|", s.r_min, s.r_max),
    ));
    o.metric("sup_error", sup);
    o.metric("mean_unfolded_spacing", mean_unfolded_spacing(&unfolded));
    Ok(o)
}

/// Mean of complex samples and the standard error of each part.
fn complex_mean(v: &[C64]) -> (C64, f64, f64) {
    let re: Vec<f64> = v.iter().map(|c| c.re).collect();
    let im: Vec<f64> = v.iter().map(|c| c.im).collect();
    let (mr, sr) = stats::mean_and_stderr(&re);
    let (mi, si) = stats::mean_and_stderr(&im);
    (C64::new(mr, mi), sr, si)
}

fn gfc(cfg: &ExperimentConfig, mc: &MCConfig) -> Result<Outcome> {
    let spec = cfg.ensemble()?;
    let matched_law = four_moment_matched(&spec.offdiag)?;
    let g = cfg.gfc.clone().unwrap_or_default();
    let dims = scaling_dims(cfg).unwrap_or_default();
    let mut t = table(Experiment::Gfc);
    let mut o = Outcome::default();
    let mut points = Vec::new();
    for &n in &dims {
        let eta = (n as f64).powf(-g.eta_exponent);
        let z = C64::new(g.e, eta);
        let ensembles =
            [(spec.family.name().to_string(), spec.with_n(n)), (matched_law.name.clone(), EnsembleSpec::wigner(n, matched_law.clone()))];
        let mut t1_by_ensemble = Vec::new();
        for (k, (label, ens)) in ensembles.iter().enumerate() {
            let mc_k = substream(mc, 2 * n as u64 + k as u64);
            let stats_k: Vec<(u64, (C64, C64))> = ver::run_samples(&mc_k, |_, seed| {
                let l = spectral::eigenvalues(&ens.sample(seed)?)?;
                spectral::gfc_from_eigenvalues(&l, z, z.conj()).map(|v| (seed, v))
            })?
            .into_iter()
            .collect::<Result<_>>()?;
            for (seed, (t1, t2)) in &stats_k {
                t.push(vec![
                    n.into(),
                    Cell::Empty,
                    label.as_str().into(),
                    t1.re.into(),
                    t1.im.into(),
                    t2.re.into(),
                    t2.im.into(),
                    (*seed).into(),
                ]);
            }
            t1_by_ensemble.push(stats_k.iter().map(|(_, (t1, _))| *t1).collect::<Vec<_>>());
        }
        let (m0, r0, i0) = complex_mean(&t1_by_ensemble[0]);
        let (m1, r1, i1) = complex_mean(&t1_by_ensemble[1]);
        let diff = (m0 - m1).norm();
        let se = (r0 * r0 + r1 * r1 + i0 * i0 + i1 * i1).sqrt();
        o.metric(&format!("delta_mean_t1_N{n}"), diff);
        o.metric(&format!("delta_mean_t1_se_N{n}"), se);
        points.push((n, diff, se));
    }
    let fit = ver::fit_power_law_weighted(&points)?;
    let upper = fit.exponent + 1.645 * fit.stderr;
    o.criteria.push(Criterion::at_most(
        "GFC decay",
        upper,
        0.0,
        format!(
            "one-sided 95% upper bound of the decay exponent of |Δ mean t1| (exponent {:.3} ± {:.3}) must be negative",
            fit.exponent, fit.stderr
        ),
    ));
    o.metric("delta_t1_exponent", fit.exponent);
    o.metric("delta_t1_exponent_stderr", fit.stderr);
    o.tables.push(t);
    Ok(o)
}

fn hs_check(cfg: &ExperimentConfig, mc: &MCConfig) -> Result<Outcome> {
    let spec = cfg.ensemble()?;
    let order = cfg.hs.clone().unwrap_or_default().order;
    type Row = (u64, &'static str, String, f64, f64, usize);
    let per_sample: Vec<Vec<Row>> = ver::run_samples(mc, |_, seed| -> Result<Vec<Row>> {
        let h = spec.sample(seed)?;
        let d = spectral::decompose(&h)?;
        let mut rows = Vec::new();
        for (name, f) in hs_test_functions() {
            let (err, out) = hs_error(&h, &d, f.as_ref(), order)?;
            rows.push((seed, "helffer-sjostrand", name.to_string(), err, out.skew, out.evaluations));
        }
        for f in &CONTOUR_FUNCTIONS {
            rows.push((seed, "contour", f.0.to_string(), contour_error(&h, &d, f)?, 0.0, 0));
        }
        Ok(rows)
    })?
    .into_iter()
    .collect::<Result<_>>()?;
    let mut t = table(Experiment::HsCheck);
    let (mut worst_hs, mut worst_contour, mut worst_skew) = (0.0f64, 0.0f64, 0.0f64);
    for (seed, method, function, err, skew, evals) in per_sample.into_iter().flatten() {
        t.push(vec![cfg.n.into(), seed.into(), method.into(), function.into(), err.into(), skew.into(), evals.into()]);
        if method == "contour" {
            worst_contour = worst_contour.max(err);
        } else {
            worst_hs = worst_hs.max(err);
            worst_skew = worst_skew.max(skew);
        }
    }
    let mut o = Outcome { tables: vec![t], ..Default::default() };
    o.criteria.push(Criterion::at_most(
        "helffer-sjostrand",
        worst_hs,
        HS_TOL,
        "max-entry error against the spectral reference over 5 test functions",
    ));
    o.criteria.push(Criterion::at_most("helffer-sjostrand skew", worst_skew, 1e-6, "max |X − X*| before symmetrization"));
    o.criteria.push(Criterion::at_most("contour", worst_contour, CONTOUR_TOL, "max-entry error for z, z² and exp"));
    o.metric("max_hs_error", worst_hs);
    o.metric("max_contour_error", worst_contour);
    Ok(o)
}

/// Nearest-neighbour spacings of points in `[−1, 1]`, unfolded with the semicircle density
/// at the pair midpoint.
pub fn bulk_spacings(points: &[f64]) -> Vec<f64> {
    let n = points.len() as f64;
    let mut p: Vec<f64> = points.iter().copied().filter(|x| x.abs() <= 1.0).collect();
    p.sort_by(f64::total_cmp);
    p.windows(2).map(|w| (w[1] - w[0]) * n * semicircle::density(0.5 * (w[0] + w[1]))).collect()
}

fn repulsion_contrast(cfg: &ExperimentConfig, mc: &MCConfig) -> Result<Outcome> {
    let spec = cfg.ensemble()?;
    let samples = eigenvalue_samples(&spec, mc)?;
    let iid_mc = substream(mc, 0);
    let iid: Vec<(u64, Vec<f64>)> = ver::run_samples(&iid_mc, |_, seed| (seed, semicircle::sample_iid_semicircle(cfg.n, seed)))?;
    let mut t = table(Experiment::RepulsionContrast);
    let mut small = [0usize; 2];
    let mut total = [0usize; 2];
    for (k, (source, set)) in [("ensemble", &samples), ("iid", &iid)].into_iter().enumerate() {
        for (seed, pts) in set {
            for s in bulk_spacings(pts) {
                t.push(vec![cfg.n.into(), (*seed).into(), source.into(), s.into()]);
                total[k] += 1;
                if s < 0.1 {
                    small[k] += 1;
                }
            }
        }
    }
    let frac = |k: usize| small[k] as f64 / total[k].max(1) as f64;
    let mut o = Outcome { tables: vec![t], ..Default::default() };
    o.criteria.push(Criterion::at_most("ensemble repulsion", frac(0), 0.02, "fraction of unfolded spacings below 0.1 (≈ 0.001 for GUE)"));
    o.criteria.push(Criterion::at_least(
        "i.i.d. clustering",
        frac(1),
        0.05,
        "fraction of unfolded spacings below 0.1 (≈ 0.095 for Poisson points)",
    ));
    o.metric("ensemble_small_spacing_fraction", frac(0));
    o.metric("iid_small_spacing_fraction", frac(1));
    Ok(o)
}
