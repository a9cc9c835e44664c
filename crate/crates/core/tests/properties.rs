use proptest::prelude::*;
use steincond::bounds::{self, BoundReport, CompanionSpectralData};
use steincond::canonical::{self, CompanionSpec};
use steincond::colored::{self, NoiseModel};
use steincond::ensemble::{self, EnsembleKind, EnsembleSpec};
use steincond::matrix::{CMat, ComplexMatrix, InputPair, Spectrum};
use steincond::normal_form::{self, bilinear_transform};
use steincond::{linalg, stein, Complex64};

fn generic(n: usize, d: usize, seed: u64) -> InputPair {
    let mut spec = EnsembleSpec::new(EnsembleKind::Generic, n, 1, seed);
    spec.d = d;
    spec.draw(0).unwrap().pair
}

fn rel_err(a: &CMat, b: &CMat) -> f64 {
    (a - b).norm() / b.norm()
}

fn kind_strategy() -> impl Strategy<Value = EnsembleKind> {
    prop::sample::select(vec![
        EnsembleKind::Generic,
        EnsembleKind::NormalDiag,
        EnsembleKind::CompanionRandomB,
        EnsembleKind::CompanionAr,
        EnsembleKind::ArObservability,
    ])
}

fn complex(range: f64) -> impl Strategy<Value = Complex64> {
    (-range..range, -range..range).prop_map(|(re, im)| Complex64::new(re, im))
}

fn companion_spec() -> impl Strategy<Value = CompanionSpec> {
    (3usize..=24).prop_flat_map(|n| {
        (complex(2.0), prop::collection::vec(complex(2.0), n - 1), any::<bool>(), 2usize..=n - 1).prop_map(
            |(c0, c, gamma, p)| if gamma { CompanionSpec::projected(c0, c, p) } else { CompanionSpec::frobenius(c0, c) },
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn draws_are_reproducible(kind in kind_strategy(), n in 3usize..12, seed in any::<u64>(), index in 0u64..1000) {
        let spec = EnsembleSpec::new(kind, n, 1, seed);
        let first = spec.draw(index).unwrap();
        let second = spec.draw(index).unwrap();
        prop_assert_eq!(first.pair, second.pair);
        prop_assert_eq!(first.rejections, second.rejections);
    }

    #[test]
    fn emitted_pairs_are_stable_and_controllable(kind in kind_strategy(), n in 2usize..14, seed in any::<u64>()) {
        let n = if kind == EnsembleKind::Generic || kind == EnsembleKind::NormalDiag { n } else { n.max(3) };
        let draw = EnsembleSpec::new(kind, n, 1, seed).draw(0).unwrap();
        prop_assert!(draw.pair.spectral_radius().unwrap() < 1.0);
        // The companion forms are controllable by construction; see the ensemble module.
        if matches!(kind, EnsembleKind::Generic | EnsembleKind::NormalDiag | EnsembleKind::CompanionRandomB) {
            prop_assert!(canonical::pbh_controllable(&draw.pair, draw.spectrum.eigenvalues(), 1e-12));
        }
        prop_assert!(stein::solve(&draw.pair).is_ok());
    }

    #[test]
    fn generic_spectra_are_conjugate_closed(n in 2usize..24, seed in any::<u64>()) {
        let draw = EnsembleSpec::new(EnsembleKind::Generic, n, 1, seed).draw(0).unwrap();
        prop_assert!(ensemble::max_conjugate_mismatch(draw.spectrum.eigenvalues()) <= 1e-10);
    }

    #[test]
    fn companion_round_trip(n in 2usize..=24, seed in any::<u64>()) {
        let draw = EnsembleSpec::new(EnsembleKind::Generic, n, 1, seed).draw(0).unwrap();
        prop_assume!(draw.spectrum.radius() <= 0.95);
        let a = canonical::build_companion(&canonical::charpoly_from_spectrum(&draw.spectrum)).unwrap();
        let mut got = linalg::eigenvalues(a.as_dmatrix()).unwrap();
        for lambda in draw.spectrum.eigenvalues() {
            let (k, dist) = got.iter().enumerate()
                .map(|(k, z)| (k, (z - lambda).norm()))
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .unwrap();
            prop_assert!(dist <= 1e-8 * lambda.norm().max(1e-3), "{} vs {}", lambda, got[k]);
            got.remove(k);
        }
    }

    #[test]
    fn doubling_matches_oracle(n in 1usize..=8, d in 1usize..=2, seed in any::<u64>()) {
        let pair = generic(n, d.min(n), seed);
        let direct = stein::solve_stein_direct(&pair).unwrap();
        let sol = stein::solve(&pair).unwrap();
        prop_assert!(rel_err(&sol.grammian(), direct.as_dmatrix()) <= 1e-8);
    }

    #[test]
    fn factor_has_positive_diagonal_and_small_residual(n in 1usize..=24, seed in any::<u64>()) {
        let pair = generic(n, 1, seed);
        let sol = stein::solve(&pair).unwrap();
        let l = sol.factor_l.as_dmatrix();
        for i in 0..n {
            prop_assert!(l[(i, i)].re > 0.0 && l[(i, i)].im == 0.0);
        }
        if sol.log_kappa_factor() <= 7.0 * std::f64::consts::LN_10 && pair.spectral_radius().unwrap() <= 0.95 {
            prop_assert!(sol.residual_rel <= 1e-10);
        }
    }

    #[test]
    fn doubling_factor_norm_is_monotone(n in 1usize..=16, seed in any::<u64>()) {
        let (_, trace) = stein::solve_stein_sqrt_doubling_traced(&generic(n, 1, seed), 1e-16, 60).unwrap();
        for w in trace.windows(2) {
            prop_assert!(w[1] >= w[0] * (1.0 - 1e-12));
        }
    }

    #[test]
    fn condition_from_factor_matches_grammian(n in 1usize..=10, seed in any::<u64>()) {
        let sol = stein::solve(&generic(n, 1, seed)).unwrap();
        prop_assume!(sol.log_kappa_factor() <= 6.0 * std::f64::consts::LN_10);
        let s = linalg::singular_values(&sol.grammian());
        prop_assert!((sol.log_kappa - (s[0] / s[n - 1]).ln()).abs() <= 1e-6);
    }

    #[test]
    fn input_normal_properties(n in 1usize..=16, d in 1usize..=2, seed in any::<u64>()) {
        let d = d.min(n);
        let pair = generic(n, d, seed);
        let tr = normal_form::to_input_normal(&pair).unwrap();
        let lk = stein::solve(&pair).unwrap().log_kappa;
        if lk <= 27.0 {
            prop_assert!(tr.residual() <= 1e-8 * n as f64);
            let before = pair.spectrum().unwrap();
            let after = Spectrum::new(linalg::eigenvalues(tr.a_tilde.as_dmatrix()).unwrap());
            for z in before.eigenvalues() {
                let dist = after.eigenvalues().iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min);
                prop_assert!(dist <= 1e-8 * z.norm().max(1e-8) + 1e-12);
            }
            let s = linalg::jacobi_singular_values(tr.a_tilde.as_dmatrix());
            let log_small: f64 = s[n - d..].iter().map(|x| 2.0 * x.ln()).sum();
            let log_det = 2.0 * before.log_abs_det();
            prop_assert!((log_small - log_det).abs() <= 1e-8 * log_det.abs().max(1.0));
            prop_assert!(s[n - 1].ln() <= before.log_abs_det() / d as f64 + 1e-8);
        }
    }

    #[test]
    fn bilinear_map_preserves_grammian(n in 1usize..=8, seed in any::<u64>(), w in prop::sample::select(vec![
        Complex64::new(0.0, 0.0), Complex64::new(0.3, 0.0), Complex64::new(-0.3, 0.0),
        Complex64::new(0.0, 0.7), Complex64::new(0.0, -0.7), Complex64::new(0.5, 0.4),
    ])) {
        let pair = generic(n, 1, seed);
        let mapped = bilinear_transform(&pair, w).unwrap();
        let p = stein::solve_stein_direct(&pair).unwrap();
        let q = stein::solve_stein_direct(&mapped).unwrap();
        prop_assert!(rel_err(q.as_dmatrix(), p.as_dmatrix()) <= 1e-8);
    }

    #[test]
    fn bounds_hold_on_samples(kind in kind_strategy(), n in 3usize..=12, seed in any::<u64>()) {
        let pair = EnsembleSpec::new(kind, n, 1, seed).draw(0).unwrap().pair;
        let sol = stein::solve(&pair).unwrap();
        prop_assume!(sol.log_kappa < 60.0);
        let sn = linalg::jacobi_singular_values(normal_form::to_input_normal(&pair).unwrap().a_tilde.as_dmatrix());
        let report = BoundReport::evaluate(&pair, sn.last().copied()).unwrap();
        prop_assert!(report.violations(sol.log_kappa, 1e-6).is_empty(), "{:?} vs {}", report, sol.log_kappa);
    }

    #[test]
    fn companion_roots_reproduce_svd(spec in companion_spec()) {
        let (data, predicted) = bounds::companion_singular_values(&spec).unwrap();
        let actual = canonical::build_companion(&spec).unwrap().singular_values();
        for (p, a) in predicted.iter().zip(&actual) {
            prop_assert!((p - a).abs() <= 1e-10 * a.max(1.0), "{:?} vs {:?}", predicted, actual);
        }
        prop_assert!(CompanionSpectralData::new(&spec).chain_holds(spec.projected_c_norm_sqr(), 1e-12));
        prop_assert_eq!(data, CompanionSpectralData::new(&spec));
    }

    #[test]
    fn frac_normal_at_origin_is_general_normal_term(n in 2usize..12, d in 1usize..3, seed in any::<u64>()) {
        let draw = EnsembleSpec::new(EnsembleKind::NormalDiag, n, 1, seed).draw(0).unwrap();
        let ev = draw.spectrum.eigenvalues();
        let expected = 2.0 * ev[n - 1].norm().ln() - 2.0 * draw.spectrum.log_abs_det() / d as f64;
        let got = bounds::frac_normal_bound(&draw.spectrum, Complex64::new(0.0, 0.0), d).unwrap();
        prop_assert!((got - expected).abs() <= 1e-12 * expected.abs().max(1.0));
    }

    #[test]
    fn adi_rank_is_at_most_kd(n in 4usize..10, k in 1usize..4, seed in any::<u64>()) {
        let g = generic(n, 1, seed);
        let a = linalg::hermitian_part(g.a.as_dmatrix());
        let r = linalg::hermitian_eigenvalues(&a).iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let pair = InputPair::from_dmatrices(a / Complex64::new(r / 0.9, 0.0), g.b.as_dmatrix().clone()).unwrap();
        let c = normal_form::cayley(&pair).unwrap();
        let (lo, hi) = bounds::symmetric_spectrum_range(c.a.as_dmatrix()).unwrap();
        let state = bounds::adi_iterate(&c, &bounds::penzl_shifts(lo, hi / lo, k)).unwrap();
        let s = linalg::singular_values(&state.approximation());
        prop_assert!(s.iter().filter(|x| **x > 1e-12 * s[0]).count() <= k);
    }

    #[test]
    fn colored_noise_bound(n in 1usize..=12, seed in any::<u64>(), a in -0.95f64..0.95, ar in any::<bool>()) {
        let pair = generic(n, 1, seed);
        let noise = if ar { NoiseModel::ar1(a).unwrap() } else { NoiseModel::ma1(a).unwrap() };
        let (lhs, rhs) = colored::colored_condition_bound(&pair, &noise).unwrap();
        prop_assert!(lhs <= rhs + 1e-6);
        let tr = normal_form::to_input_normal(&pair).unwrap();
        prop_assume!(tr.residual() <= 1e-10);
        let w = colored::log_kappa_w(&tr.pair(), &noise, colored::DEFAULT_TOL).unwrap();
        prop_assert!(w <= noise.log_density_ratio() + 1e-6);
    }
}

#[test]
fn jordan_strong_dominates_weak_on_grid() {
    for i in 1..=9 {
        for n in 3..=32 {
            let (s, w) = bounds::jordan_bound(Complex64::new(i as f64 / 10.0, 0.0), n).unwrap();
            assert!(s >= w);
        }
    }
}

#[test]
fn pair_files_round_trip() {
    let pair = generic(5, 2, 9);
    let json = serde_json::to_string(&pair).unwrap();
    let back: InputPair = serde_json::from_str(&json).unwrap();
    assert_eq!(back, pair);
    let unstable = r#"{"a":{"rows":1,"cols":1,"entries":[[1.5,0]]},"b":{"rows":1,"cols":1,"entries":[[1,0]]}}"#;
    let parsed: InputPair = serde_json::from_str(unstable).unwrap();
    assert!(matches!(parsed.ensure_stable(), Err(steincond::Error::Unstable { .. })));
    assert!(ComplexMatrix::new(2, 2, vec![Complex64::new(0.0, 0.0); 3]).is_err());
}
