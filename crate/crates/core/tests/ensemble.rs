mod common;

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rmtlab_core::ensemble::*;
use rmtlab_core::Error;

fn all_distributions() -> Vec<EntryDistribution> {
    vec![
        EntryDistribution::gaussian_real(),
        EntryDistribution::gaussian_complex(),
        EntryDistribution::ternary_real(),
        EntryDistribution::ternary_complex(),
        EntryDistribution::bernoulli_sym(),
        EntryDistribution::custom_table("skewed", vec![(C64::new(-FRAC_1_SQRT_2, 0.0), 2.0 / 3.0), (C64::new(SQRT_2, 0.0), 1.0 / 3.0)])
            .unwrap(),
    ]
}

#[test]
fn goe_variance_profile() {
    let spec = EnsembleSpec::goe(2);
    let samples = 100_000;
    let (mut d, mut d2, mut o, mut o2) = (0.0, 0.0, 0.0, 0.0);
    for seed in 0..samples {
        let h = spec.sample(seed).unwrap();
        let (a, b) = (h.get(0, 0).re.powi(2), h.get(0, 1).norm_sqr());
        d += a;
        d2 += a * a;
        o += b;
        o2 += b * b;
    }
    let n = samples as f64;
    let check = |s: f64, s2: f64, expected: f64| {
        let mean = s / n;
        let se = ((s2 / n - mean * mean) / n).sqrt();
        assert!((mean - expected).abs() <= 5.0 * se, "{mean} vs {expected} (se {se})");
    };
    check(d, d2, 2.0 / 2.0);
    check(o, o2, 1.0 / 2.0);
}

#[test]
fn gue_offdiagonal_variance() {
    let spec = EnsembleSpec::gue(500);
    let v: f64 = (0..10_000u64).map(|s| spec.sample(s).unwrap().get(0, 1).norm_sqr()).sum::<f64>() / 10_000.0;
    assert!((500.0 * v - 1.0).abs() <= 0.05, "N·Var(H_12) = {}", 500.0 * v);
}

#[test]
fn sampling_is_deterministic() {
    for spec in [EnsembleSpec::gue(40), EnsembleSpec::goe(40), EnsembleSpec::wigner(40, EntryDistribution::ternary_complex())] {
        let (a, b) = (spec.sample(99).unwrap(), spec.sample(99).unwrap());
        assert!(a.bit_identical(&b));
        assert!(!a.bit_identical(&spec.sample(100).unwrap()));
    }
    let er = EnsembleSpec::erdos_renyi(40, 0.3, true);
    assert!(er.sample(1).unwrap().bit_identical(&er.sample(1).unwrap()));
}

#[test]
fn sampled_matrices_are_exactly_hermitian() {
    for spec in [EnsembleSpec::gue(30), EnsembleSpec::goe(30), EnsembleSpec::wigner(30, EntryDistribution::ternary_complex())] {
        let h = spec.sample(3).unwrap();
        assert_eq!(h.hermitian_defect(), 0.0);
        for i in 0..30 {
            assert_eq!(h.get(i, i).im, 0.0);
        }
    }
    let h = EnsembleSpec::goe(30).sample(4).unwrap();
    assert!((0..30).all(|i| (0..30).all(|j| h.get(i, j).im == 0.0)));
}

#[test]
fn wigner_rejects_tiny_dimension() {
    assert!(matches!(EnsembleSpec::gue(1).sample(0), Err(Error::InvalidDimension(_))));
}

#[test]
fn erdos_renyi_centred_support() {
    let (n, p) = (4usize, 0.5);
    let scale = 1.0 / (n as f64 * p * (1.0 - p)).sqrt();
    let mut sum = 0.0;
    let samples = 20_000;
    for seed in 0..samples {
        let h = sample_erdos_renyi(n, p, true, seed).unwrap();
        for i in 0..n {
            assert_eq!(h.get(i, i), C64::new(0.0, 0.0));
            for j in i + 1..n {
                let v = h.get(i, j).re;
                assert!((v - scale * (1.0 - p)).abs() < 1e-15 || (v + scale * p).abs() < 1e-15);
                sum += v;
            }
        }
    }
    let mean = sum / (samples as f64 * 6.0);
    assert!(mean.abs() < 5.0 * scale * 0.5 / (samples as f64 * 6.0).sqrt());
}

#[test]
fn erdos_renyi_uncentred_diagonal_and_variance() {
    let (n, p) = (10usize, 0.3);
    let samples = 100_000u64;
    let (mut s, mut s2) = (0.0, 0.0);
    for seed in 0..samples {
        let h = sample_erdos_renyi(n, p, false, seed).unwrap();
        assert!((0..n).all(|i| h.get(i, i) == C64::new(0.0, 0.0)));
        let v = h.get(0, 1).re;
        s += v;
        s2 += v * v;
    }
    let m = samples as f64;
    let var = s2 / m - (s / m).powi(2);
    // Var(A_12) = p(1 − p), so the normalization leaves N·Var(B_12) = 1
    assert!((n as f64 * var - 1.0).abs() < 0.02, "N Var(B_12) = {}", n as f64 * var);
    assert!((n as f64 * p * (1.0 - p) * var - p * (1.0 - p)).abs() < 0.005);
}

#[test]
fn erdos_renyi_parameter_errors() {
    assert!(matches!(sample_erdos_renyi(10, 0.0, false, 1), Err(Error::InvalidParameter(_))));
    assert!(matches!(sample_erdos_renyi(10, 1.0, false, 1), Err(Error::InvalidParameter(_))));
    assert!(matches!(sample_erdos_renyi(10, 0.01, false, 1), Err(Error::InvalidParameter(_))));
}

#[test]
fn ternary_matches_gaussian_through_four() {
    let t = EntryDistribution::ternary_real();
    let m = t.moments();
    assert!((m.get(2, 0).re - 1.0).abs() < 1e-15);
    assert!((m.get(4, 0).re - 3.0).abs() < 1e-14);
    assert!(m.get(1, 0).norm() < 1e-15 && m.get(3, 0).norm() < 1e-15);
    let r = verify_matching(&t, &EntryDistribution::gaussian_real(), 4).unwrap();
    assert!(r.matched, "{r:?}");
    let matched = four_moment_matched(&EntryDistribution::gaussian_real()).unwrap();
    assert_eq!(matched.kind, EntryKind::TernaryReal);
}

#[test]
fn ternary_complex_mixed_moments() {
    // product-law oracle: enumerate (a, b) over the real ternary atoms
    let atoms = [(-3f64.sqrt(), 1.0 / 6.0), (0.0, 2.0 / 3.0), (3f64.sqrt(), 1.0 / 6.0)];
    let moment = |k: u32, l: u32| {
        let mut acc = C64::new(0.0, 0.0);
        for &(a, pa) in &atoms {
            for &(b, pb) in &atoms {
                let x = C64::new(a, b) / 2f64.sqrt();
                acc += x.powu(k) * x.conj().powu(l) * pa * pb;
            }
        }
        acc
    };
    let c = four_moment_matched(&EntryDistribution::gaussian_complex()).unwrap();
    let g = EntryDistribution::gaussian_complex().moments();
    for (k, l) in [(2, 2), (2, 0), (0, 2), (1, 1), (3, 1), (4, 0)] {
        let oracle = moment(k as u32, l as u32);
        assert!((c.moments().get(k, l) - oracle).norm() < 1e-14);
        assert!((g.get(k, l) - oracle).norm() < 1e-12, "({k},{l}): {} vs {oracle}", g.get(k, l));
    }
    assert!(verify_matching(&c, &EntryDistribution::gaussian_complex(), 4).unwrap().matched);
}

#[test]
fn matching_examples() {
    let b = EntryDistribution::bernoulli_sym();
    let g = EntryDistribution::gaussian_real();
    assert!(verify_matching(&b, &g, 2).unwrap().matched);
    let r = verify_matching(&b, &g, 4).unwrap();
    assert!(!r.matched);
    assert!((r.max_discrepancy - 2.0).abs() < 1e-12);
    assert!(matches!(verify_matching(&b, &g, 5), Err(Error::UnsupportedOrder(5))));
    assert!(matches!(four_moment_matched(&b), Err(Error::UnsupportedReference(_))));
}

#[test]
fn declared_moments_match_samples() {
    for d in all_distributions() {
        let check = d.empirical_moment_check(1_000_000, 2024);
        assert!(check.max_z <= 5.0, "{}: z = {} at {:?}", d.name, check.max_z, check.worst);
    }
}

#[test]
fn standardized_tables() {
    for d in all_distributions() {
        let m = d.moments();
        assert!((m.get(0, 0) - 1.0).norm() < 1e-15);
        assert!(m.get(1, 0).norm() < 1e-12 && m.get(0, 1).norm() < 1e-12);
        assert!((m.get(1, 1) - 1.0).norm() < 1e-12, "{}", d.name);
    }
}

#[test]
fn custom_table_validation() {
    let off_centre = EntryDistribution::custom_table("bad", vec![(C64::new(1.0, 0.0), 1.0)]);
    assert!(matches!(off_centre, Err(Error::InvalidParameter(_))));
    let bad_mass = EntryDistribution::custom_table("bad", vec![(C64::new(-1.0, 0.0), 0.5), (C64::new(1.0, 0.0), 0.6)]);
    assert!(matches!(bad_mass, Err(Error::InvalidParameter(_))));
    let wide = EntryDistribution::custom_table("wide", vec![(C64::new(-2.0, 0.0), 0.5), (C64::new(2.0, 0.0), 0.5)]);
    assert!(matches!(wide, Err(Error::InvalidParameter(_))));
}

#[test]
fn delta_examples() {
    let integrand = |x: f64| x.powi(3) * (-x * x / 2.0).exp() / (2.0 * PI).sqrt();
    let half_normal_third: f64 = 2.0 * (0..16).map(|k| common::simpson(&integrand, k as f64, k as f64 + 1.0, 1e-15)).sum::<f64>();
    assert!((half_normal_third - 2.0 * (2.0 / PI).sqrt()).abs() < 1e-10);
    let g = delta_diagnostic(&EntryDistribution::gaussian_real(), 100);
    assert!((g - half_normal_third / 10.0).abs() < 1e-10);
    assert!((g - 0.1596).abs() < 1e-4);
    let t = delta_diagnostic(&EntryDistribution::ternary_real(), 900);
    assert!((t - 3f64.sqrt() / 30.0).abs() < 1e-14);
    for d in all_distributions() {
        assert!((delta_diagnostic(&d, 400) - 2.0 * delta_diagnostic(&d, 1600)).abs() < 1e-14);
    }
}

#[test]
fn telescoping_boundaries() {
    let n = 6;
    let hp = EnsembleSpec::gue(n).sample(1).unwrap();
    let hpp = EnsembleSpec::wigner(n, EntryDistribution::ternary_complex()).sample(2).unwrap();
    assert!(telescoping_interpolation(&hp, &hpp, 0).unwrap().bit_identical(&hp));
    assert!(telescoping_interpolation(&hp, &hpp, n * (n + 1) / 2).unwrap().bit_identical(&hpp));
    let other = EnsembleSpec::gue(n + 1).sample(1).unwrap();
    assert!(matches!(telescoping_interpolation(&hp, &other, 0), Err(Error::InvalidInput(_))));
}

#[test]
fn telescoping_by_hand() {
    let hp = HermitianMatrix::from_upper_fn(3, Symmetry::RealSymmetric, |_, _| C64::new(1.0, 0.0));
    let hpp = HermitianMatrix::from_upper_fn(3, Symmetry::RealSymmetric, |_, _| C64::new(2.0, 0.0));
    let h = telescoping_interpolation(&hp, &hpp, 2).unwrap();
    let expected = [[2.0, 2.0, 1.0], [2.0, 1.0, 1.0], [1.0, 1.0, 1.0]];
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(h.get(i, j).re, expected[i][j], "({i},{j})");
        }
    }
}

#[test]
fn binary_round_trip() {
    for spec in [EnsembleSpec::gue(17), EnsembleSpec::goe(9)] {
        let h = spec.sample(5).unwrap();
        let mut buf = Vec::new();
        h.write_to(&mut buf).unwrap();
        let n = h.n();
        assert_eq!(buf.len(), 16 + 16 * n * (n + 1) / 2);
        assert_eq!(u64::from_le_bytes(buf[..8].try_into().unwrap()), n as u64);
        let back = HermitianMatrix::read_from(buf.as_slice()).unwrap();
        assert!(back.bit_identical(&h));
        assert_eq!(back.symmetry(), h.symmetry());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn upper_index_is_a_bijection(n in 1usize..40) {
        let mut seen = vec![false; n * (n + 1) / 2 + 1];
        for i in 0..n {
            for j in i..n {
                let g = upper_index(n, i, j);
                prop_assert!(g >= 1 && g <= n * (n + 1) / 2);
                prop_assert!(!seen[g]);
                seen[g] = true;
                prop_assert_eq!(upper_pair(n, g), (i, j));
            }
        }
    }

    #[test]
    fn telescoping_steps_change_one_pair(n in 2usize..9, seed in any::<u64>(), frac in 0.0f64..1.0) {
        let total = n * (n + 1) / 2;
        let gamma = 1 + ((total - 1) as f64 * frac) as usize;
        let hp = EnsembleSpec::gue(n).sample(seed).unwrap();
        let hpp = EnsembleSpec::gue(n).sample(seed.wrapping_add(1)).unwrap();
        let a = telescoping_interpolation(&hp, &hpp, gamma).unwrap();
        let b = telescoping_interpolation(&hp, &hpp, gamma - 1).unwrap();
        let (pi, pj) = upper_pair(n, gamma);
        for i in 0..n {
            for j in 0..n {
                let on_pair = (i, j) == (pi, pj) || (j, i) == (pi, pj);
                prop_assert_eq!(a.get(i, j) != b.get(i, j), on_pair);
            }
        }
    }

    #[test]
    fn samplers_are_pure(seed in any::<u64>(), n in 2usize..20) {
        let spec = EnsembleSpec::wigner(n, EntryDistribution::bernoulli_sym());
        prop_assert!(spec.sample(seed).unwrap().bit_identical(&spec.sample(seed).unwrap()));
        prop_assert_eq!(spec.sample(seed).unwrap().hermitian_defect(), 0.0);
    }
}
