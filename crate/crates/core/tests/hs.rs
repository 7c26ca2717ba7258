mod common;

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rmtlab_core::ensemble::{EnsembleSpec, HermitianMatrix};
use rmtlab_core::hs::*;
use rmtlab_core::linalg::CMat;
use rmtlab_core::{spectral, Error};

fn err_vs_oracle(m: &CMat, oracle: &common::Dense) -> f64 {
    common::max_diff(oracle, |i, j| m[(i, j)])
}

fn hs_error(h: &HermitianMatrix, f: &dyn SmoothFunction, n: usize, grid: &HsGrid) -> (f64, HsResult) {
    let chi = CutoffChi::covering(h, f, 1.0, 2.0).unwrap();
    let out = hs_evaluate(h, f, n, &chi, grid).unwrap();
    let oracle = common::spectral_function(h, &|x| f.value(x));
    (err_vs_oracle(&out.matrix, &oracle), out)
}

#[test]
fn extension_reduces_to_f_on_the_axis() {
    let f = PolyBump::new(0.2, 1.0, 5);
    for &x in &[-0.5, 0.0, 0.7] {
        for n in 0..4 {
            let v = almost_analytic(&f, n, x, 0.0);
            assert!((v - C64::new(f.value(x), 0.0)).norm() < 1e-15);
        }
        let y = 0.3;
        let first = almost_analytic(&f, 1, x, y);
        let expect = C64::new(f.value(x), y * f.derivative(1, x));
        assert!((first - expect).norm() < 1e-14);
    }
}

#[test]
fn dbar_matches_finite_differences() {
    let f = PolyBump::new(0.0, 1.5, 6);
    let chi = CutoffChi::new(-2.0, 2.0, 0.4, 0.9).unwrap();
    let h = 1e-5;
    for n in 0..3 {
        for &(x, y) in &[(0.3, 0.2), (-0.8, 0.5), (1.1, 0.7), (0.0, -0.6)] {
            let g = |x: f64, y: f64| almost_analytic(&f, n, x, y) * chi.value(x, y);
            let dx = (g(x + h, y) - g(x - h, y)) / (2.0 * h);
            let dy = (g(x, y + h) - g(x, y - h)) / (2.0 * h);
            let fd = (dx + C64::i() * dy) * 0.5;
            let exact = dbar_extension(&f, n, &chi, x, y);
            assert!((fd - exact).norm() < 1e-6, "n={n} ({x},{y}): {fd} vs {exact}");

            let fa = |x: f64, y: f64| almost_analytic(&f, n, x, y);
            let fd = ((fa(x + h, y) - fa(x - h, y)) + C64::i() * (fa(x, y + h) - fa(x, y - h))) / (4.0 * h);
            assert!((fd - dbar_almost_analytic(&f, n, x, y)).norm() < 1e-6);
        }
    }
}

#[test]
fn smooth_identity_gives_identity() {
    let h = EnsembleSpec::gue(8).sample(3).unwrap();
    let f = SmoothIndicator::new(-4.0, 4.0, 1.0, Transition::Septic);
    let chi = CutoffChi::covering(&h, &f, 1.0, 2.0).unwrap();
    let out = hs_evaluate(&h, &f, 2, &chi, &HsGrid::default()).unwrap();
    let err = (0..8)
        .flat_map(|i| (0..8).map(move |j| (i, j)))
        .map(|(i, j)| (out.matrix[(i, j)] - if i == j { 1.0 } else { 0.0 }).norm())
        .fold(0.0, f64::max);
    assert!(err < 1e-4, "identity error {err}");
    assert!(out.skew < 1e-6);
}

#[test]
fn bump_matches_spectral_oracle() {
    let h = EnsembleSpec::gue(8).sample(11).unwrap();
    let f = PolyBump::new(0.0, 1.5, 6);
    let (err, out) = hs_error(&h, &f, 2, &HsGrid::default());
    assert!(err < 1e-4, "bump error {err}");
    assert!(out.skew < 1e-6, "skew {}", out.skew);
    assert!(out.evaluations > 0);
}

#[test]
fn real_symmetric_matrix_and_n1() {
    let h = EnsembleSpec::goe(6).sample(5).unwrap();
    let f = PolyBump::new(0.5, 1.0, 8);
    let (err, out) = hs_error(&h, &f, 1, &HsGrid::default());
    assert!(err < 1e-4, "n=1 error {err}");
    assert!(out.skew < 1e-6);
}

#[test]
fn refinement_reduces_error() {
    let h = EnsembleSpec::gue(6).sample(21).unwrap();
    let f = SmoothIndicator::new(-1.0, 0.5, 0.5, Transition::Septic);
    let grid = HsGrid { hx_min: 0.02, hx_max: 0.2, dy_max: 0.08, y_ratio: 1.3 };
    let (coarse, _) = hs_error(&h, &f, 2, &grid);
    let (fine, _) = hs_error(&h, &f, 2, &grid.refined());
    assert!(fine <= 0.5 * coarse, "coarse {coarse}, refined {fine}");
}

#[test]
fn diagonal_matrix_entries() {
    let h = HermitianMatrix::diagonal(&[-1.2, 0.0, 0.4, 1.9]);
    let f = PolyBump::new(0.0, 1.5, 6);
    let chi = CutoffChi::covering(&h, &f, 1.0, 2.0).unwrap();
    let out = hs_evaluate(&h, &f, 2, &chi, &HsGrid::default()).unwrap();
    for (i, &l) in [-1.2, 0.0, 0.4, 1.9].iter().enumerate() {
        assert!((out.matrix[(i, i)].re - f.value(l)).abs() < 1e-4);
        assert!(out.matrix[(i, i)].im.abs() < 1e-10);
    }
    assert!(out.matrix[(0, 1)].norm() < 1e-10);
}

#[test]
fn contour_polynomials_and_exponential() {
    let h = EnsembleSpec::gue(10).sample(2).unwrap();
    let c = SquareContour::new(spectral_bound(&h) + 1.0);
    let d = common::dense(&h);
    let z1 = contour_evaluate(&h, &|z| z, &c).unwrap();
    assert!(err_vs_oracle(&z1, &d) < 1e-10);

    let z2 = contour_evaluate(&h, &|z| z * z, &c).unwrap();
    let sq = common::spectral_function(&h, &|x| x * x);
    assert!(err_vs_oracle(&z2, &sq) < 1e-10);

    let ex = contour_evaluate(&h, &|z| z.exp(), &c).unwrap();
    let oracle = common::spectral_function(&h, &f64::exp);
    assert!(err_vs_oracle(&ex, &oracle) < 1e-8);
}

#[test]
fn contour_error_cases() {
    let h = HermitianMatrix::diagonal(&[-1.0, 0.5, 1.0]);
    assert!(matches!(contour_evaluate(&h, &|z| z, &SquareContour::new(0.9)), Err(Error::InvalidInput(_))));
    assert!(matches!(contour_evaluate(&h, &|z| z, &SquareContour::new(1.0005)), Err(Error::ContourTooClose { .. })));
}

#[test]
fn hs_error_cases() {
    let h = HermitianMatrix::diagonal(&[-1.0, 1.0]);
    let f = PolyBump::new(0.0, 1.0, 2);
    let chi = CutoffChi::covering(&h, &f, 1.0, 2.0).unwrap();
    // a power-2 bump has a bounded second derivative only
    assert!(matches!(hs_evaluate(&h, &f, 2, &chi, &HsGrid::default()), Err(Error::UnsupportedOrder(2))));

    let narrow = CutoffChi::new(-0.5, 0.5, 1.0, 2.0).unwrap();
    assert!(matches!(hs_evaluate(&h, &f, 1, &narrow, &HsGrid::default()), Err(Error::InvalidCutoff(_))));
    assert!(matches!(CutoffChi::new(1.0, -1.0, 1.0, 2.0), Err(Error::InvalidCutoff(_))));
    assert!(matches!(CutoffChi::new(-1.0, 1.0, 2.0, 1.0), Err(Error::InvalidCutoff(_))));
}

#[test]
fn smoothed_indicator_examples() {
    let (a, b, eta) = (-0.5, 1.5, 0.05);
    let f = smoothed_indicator(a, b, eta);
    assert_eq!(f.value(0.5 * (a + b)), 1.0);
    assert_eq!(f.value(b + 2.0 * eta), 0.0);
    assert_eq!(f.value(a - 2.0 * eta), 0.0);
    let mut max2: f64 = 0.0;
    for k in 0..=20_000 {
        let x = a - 1.5 * eta + 3.0 * eta * k as f64 / 20_000.0;
        max2 = max2.max(f.derivative(2, x).abs());
        let y = b - 1.5 * eta + 3.0 * eta * k as f64 / 20_000.0;
        max2 = max2.max(f.derivative(2, y).abs());
    }
    assert!(max2 * eta * eta <= 16.0, "{}", max2 * eta * eta);
}

#[test]
fn smoothed_counting_bound() {
    let n = 200;
    let h = EnsembleSpec::gue(n).sample(8).unwrap();
    let lambdas = spectral::eigenvalues(&h).unwrap();
    for &(a, b, eta) in &[(-0.5, 0.5, 0.02), (-2.5, 0.0, 0.05), (1.0, 1.8, 0.01)] {
        let f = smoothed_indicator(a, b, eta);
        let smooth: f64 = lambdas.iter().map(|&l| f.value(l)).sum::<f64>() / n as f64;
        let sharp = lambdas.iter().filter(|&&l| a <= l && l <= b).count() as f64 / n as f64;
        let near = lambdas.iter().filter(|&&l| (l < a && l > a - eta) || (l > b && l < b + eta)).count() as f64 / n as f64;
        assert!((smooth - sharp).abs() <= near + 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn hs_is_hermitian_and_accurate(seed in any::<u64>(), c in -0.8f64..0.8, r in 0.6f64..1.5) {
        let h = EnsembleSpec::gue(4).sample(seed).unwrap();
        let f = PolyBump::new(c, r, 6);
        let (err, out) = hs_error(&h, &f, 2, &HsGrid::default());
        prop_assert!(out.skew < 1e-6);
        prop_assert!(err < 1e-4);
    }

    #[test]
    fn extension_is_reflection_symmetric(x in -2.0f64..2.0, y in 0.0f64..2.0, n in 0usize..3) {
        let f = PolyBump::new(0.1, 1.4, 5);
        let chi = CutoffChi::new(-2.5, 2.5, 0.5, 1.5).unwrap();
        let up = dbar_extension(&f, n, &chi, x, y);
        let down = dbar_extension(&f, n, &chi, x, -y);
        prop_assert!((up.conj() - down).norm() <= 1e-12 * (1.0 + up.norm()));
    }

    #[test]
    fn n1_cancellation(x in -1.5f64..1.5, y in -1.0f64..1.0) {
        // inside the cutoff plateau only the (iy)ⁿ f⁽ⁿ⁺¹⁾ term survives
        let f = PolyBump::new(0.0, 1.5, 6);
        let chi = CutoffChi::new(-3.0, 3.0, 1.0, 2.0).unwrap();
        let d = dbar_extension(&f, 1, &chi, x, y);
        let expect = C64::new(0.0, y) * f.derivative(2, x) * 0.5;
        prop_assert!((d - expect).norm() < 1e-12);
    }
}
