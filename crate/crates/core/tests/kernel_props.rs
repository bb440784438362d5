use proptest::prelude::*;
use susyrmt::detkernels::{generating_function_det, sqrt_berezinian, BerezinianForm};
use susyrmt::ensembles::{mc_generating_function, EnsembleSpec, SourceKappa};
use susyrmt::quadrature::{integrate_1d, ExpPoly, QuadratureSpec};
use susyrmt::C64;

fn point() -> impl Strategy<Value = C64> {
    (-2.0f64..2.0, -1.0f64..1.0).prop_map(|(re, im)| C64::new(re, im))
}

fn separated(m: usize, sep: f64) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec(point(), m).prop_filter("points too close", move |v| {
        (0..v.len()).all(|a| (a + 1..v.len()).all(|b| (v[a] - v[b]).norm() >= sep))
    })
}

fn lower(re: std::ops::Range<f64>) -> impl Strategy<Value = C64> {
    (re, -1.0f64..-0.2).prop_map(|(x, y)| C64::new(x, y))
}

fn shape() -> impl Strategy<Value = (usize, usize)> {
    prop::sample::select(vec![(1usize, 1usize), (2, 1), (2, 2), (3, 2)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn berezinian_forms_agree((p, q, pts) in shape().prop_flat_map(|(p, q)| (Just(p), Just(q), separated(p + q, 0.1)))) {
        let (bos, ferm) = pts.split_at(p);
        prop_assert_eq!(ferm.len(), q);
        let ratio = sqrt_berezinian(bos, ferm, BerezinianForm::Ratio).unwrap().value;
        for form in [BerezinianForm::Mixed, BerezinianForm::CauchyVdm] {
            let v = sqrt_berezinian(bos, ferm, form).unwrap().value;
            prop_assert!((v - ratio).norm() <= 1e-10 * ratio.norm(), "{form:?}: {v} vs {ratio}");
        }
    }

    #[test]
    fn swapping_bosonic_arguments_flips_sign(pts in separated(5, 0.1), form_ix in 0usize..3) {
        let form = [BerezinianForm::Ratio, BerezinianForm::Mixed, BerezinianForm::CauchyVdm][form_ix];
        let (bos, ferm) = pts.split_at(3);
        let a = sqrt_berezinian(bos, ferm, form).unwrap().value;
        let swapped = [bos[1], bos[0], bos[2]];
        let b = sqrt_berezinian(&swapped, ferm, form).unwrap().value;
        prop_assert!((a + b).norm() <= 1e-14 * a.norm(), "{a} vs {b}");
    }

    #[test]
    fn determinant_is_symmetric_within_blocks(
        bos in prop::collection::vec(lower(-1.5..1.5), 2),
        ferm in prop::collection::vec((-1.5f64..1.5).prop_map(|x| C64::new(x, 0.0)), 2),
    ) {
        prop_assume!((bos[0] - bos[1]).norm() > 0.1 && (ferm[0] - ferm[1]).norm() > 0.1);
        let ens = EnsembleSpec::gue(3).unwrap();
        let z = generating_function_det(&ens, &SourceKappa::new(bos.clone(), ferm.clone()), None).unwrap();
        let permuted = SourceKappa::new(vec![bos[1], bos[0]], vec![ferm[1], ferm[0]]);
        let zp = generating_function_det(&ens, &permuted, None).unwrap();
        prop_assert!((z - zp).norm() <= 1e-10 * z.norm());
    }

    #[test]
    fn kernel_order_is_irrelevant(
        bos in prop::collection::vec(lower(-1.5..1.5), 2),
        ferm in (-1.5f64..1.5).prop_map(|x| C64::new(x, 0.0)),
    ) {
        prop_assume!((bos[0] - bos[1]).norm() > 0.1);
        let ens = EnsembleSpec::gue(4).unwrap();
        let kappa = SourceKappa::new(bos, vec![ferm]);
        // d = N + k2 - k1 = 3
        let a = generating_function_det(&ens, &kappa, Some(3)).unwrap();
        let b = generating_function_det(&ens, &kappa, Some(4)).unwrap();
        prop_assert!((a - b).norm() <= 1e-10 * a.norm(), "{a} vs {b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn coincident_sources_average_to_one(k in lower(-1.0..1.0), n in 1usize..=4, seed in any::<u64>()) {
        let ens = EnsembleSpec::gue(n).unwrap();
        let est = mc_generating_function(&ens, &SourceKappa::new(vec![k], vec![k]), 2000, seed).unwrap();
        prop_assert_eq!(est.mean, C64::new(1.0, 0.0));
        prop_assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn monte_carlo_is_reproducible_and_conjugation_covariant(
        k1 in lower(-1.0..1.0),
        k2 in -1.0f64..1.0,
        seed in any::<u64>(),
    ) {
        let ens = EnsembleSpec::gue(2).unwrap();
        let kappa = SourceKappa::new(vec![k1], vec![C64::new(k2, 0.0)]);
        let a = mc_generating_function(&ens, &kappa, 3000, seed).unwrap();
        prop_assert_eq!(a, mc_generating_function(&ens, &kappa, 3000, seed).unwrap());
        let c = mc_generating_function(&ens, &kappa.conj(), 3000, seed).unwrap();
        prop_assert!((c.mean - a.mean.conj()).norm() <= 3.0 * a.stderr.hypot(c.stderr));
    }

    #[test]
    fn exp_poly_derivatives_compose(
        poly in prop::collection::vec(-3i32..=3, 1..5),
        a in -2i32..=0,
        b in -2i32..=2,
        m in 0usize..4,
        n in 0usize..4,
    ) {
        let p = ExpPoly::new(
            poly.iter().map(|&c| C64::new(c as f64, 0.0)).collect(),
            C64::new(a as f64, 0.0),
            C64::new(b as f64, 0.0),
        );
        prop_assert_eq!(p.diff_n(m).diff_n(n), p.diff_n(m + n));
    }

    #[test]
    fn quadrature_is_conservative_and_stable(shift in -1.5f64..1.5, width in 0.6f64..1.5, tol_exp in 4i32..9) {
        // int exp(-x^2/(2 w^2) - i s x) dx = w sqrt(2 pi) exp(-s^2 w^2 / 2)
        let g = |x: f64| C64::new(-x * x / (2.0 * width * width), -shift * x).exp();
        let exact = width * (2.0 * std::f64::consts::PI).sqrt() * (-shift * shift * width * width / 2.0).exp();
        let tol = 10f64.powi(-tol_exp);
        let coarse = integrate_1d(g, &QuadratureSpec::full_line().with_rel_tol(tol)).unwrap();
        prop_assert!((coarse.value - exact).norm() <= coarse.error + 1e-15);
        let fine = integrate_1d(g, &QuadratureSpec::full_line().with_rel_tol(tol / 2.0)).unwrap();
        prop_assert!((coarse.value - fine.value).norm() <= tol * fine.value.norm());
    }
}
