//! Acceptance criteria, one test each. Run with `--nocapture` to see the
//! summary line printed by every criterion.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use susyrmt::detkernels::{generating_function_det, hciz_closed_form, moment_matrix, sqrt_berezinian, BerezinianForm};
use susyrmt::driver::{run_compute, ComputeRequest, Method, Params, Task};
use susyrmt::ensembles::{
    mc_external_field, mc_generating_function, mc_hciz, EnsembleSpec, ExternalField, SourceKappa,
};
use susyrmt::linalg::{factorial, i_pow};
use susyrmt::superfns::{
    check_gaussian_u11, d_operator_apply, d_operator_grassmann, laplace_sqrtber, DOperatorForm, SuperEigenPoint,
    SuperFn, DEFAULT_PSI, GAUSSIAN_U11_CONSTANT,
};
use susyrmt::susyreps::{
    efetov_wegner_z2, generating_function_alpha0, generating_function_external, generating_function_susy,
    ingham_siegel_action, z11_hubbard_stratonovich_grassmann, z11_superspace, SusyOptions, Z11Form,
};
use susyrmt::C64;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}

fn rng(criterion: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_0000 + criterion)
}

fn far_apart(pts: &[C64], sep: f64) -> bool {
    (0..pts.len()).all(|a| (a + 1..pts.len()).all(|b| (pts[a] - pts[b]).norm() >= sep))
}

/// Prints the summary line and fails the test when any measured quantity
/// exceeds its bound.
fn conclude(id: u32, title: &str, measured: &[(String, f64, f64)]) {
    let pass = measured.iter().all(|(_, v, tol)| v <= tol);
    println!("criterion {id:>2} {}: {title}", if pass { "PASS" } else { "FAIL" });
    for (name, v, tol) in measured {
        println!("    {name}: {v:.3e} (bound {tol:.0e})");
    }
    let failed: Vec<&String> = measured.iter().filter(|(_, v, tol)| v > tol).map(|(n, _, _)| n).collect();
    assert!(failed.is_empty(), "criterion {id} failed: {failed:?}");
}

#[test]
fn criterion_01_berezinian_forms() {
    let mut r = rng(1);
    let mut out = Vec::new();
    for (p, q) in [(1, 1), (2, 1), (2, 2), (3, 2)] {
        let mut worst = 0.0f64;
        let mut drawn = 0;
        while drawn < 200 {
            let pts: Vec<C64> = (0..p + q).map(|_| c(r.random_range(-2.0..2.0), r.random_range(-1.0..1.0))).collect();
            if !far_apart(&pts, 0.1) {
                continue;
            }
            drawn += 1;
            let (bos, ferm) = pts.split_at(p);
            let ratio = sqrt_berezinian(bos, ferm, BerezinianForm::Ratio).unwrap().value;
            for form in [BerezinianForm::Mixed, BerezinianForm::CauchyVdm] {
                worst = worst.max(rel(sqrt_berezinian(bos, ferm, form).unwrap().value, ratio));
            }
        }
        out.push((format!("({p},{q}) worst relative difference"), worst, 1e-10));
    }
    conclude(1, "square-root Berezinian in three forms", &out);
}

#[test]
fn criterion_02_moment_matrix() {
    let ens = EnsembleSpec::gue(1).unwrap();
    let (mut diag, mut det) = (0.0f64, 0.0f64);
    for d in 1..=8 {
        let m = moment_matrix(&ens, d);
        for j in 1..=d {
            let exact = i_pow(-(j as i64 - 1)) * factorial(j - 1);
            diag = diag.max((m.get(j, j) - exact).norm());
        }
        let exact = i_pow(-((d * (d - 1) / 2) as i64)) * (1..=d).map(|j| factorial(j - 1)).product::<f64>();
        det = det.max(rel(m.determinant(), exact));
    }
    conclude(
        2,
        "Gaussian moment matrix",
        &[
            ("diagonal absolute deviation".into(), diag, 0.0),
            ("determinant relative deviation".into(), det, 1e-12),
        ],
    );
}

#[test]
fn criterion_03_hciz_against_haar() {
    let configs: [(&[f64], &[f64]); 4] = [
        (&[0.5, -0.3], &[1.0, 0.2]),
        (&[1.2, 0.1], &[-0.7, 0.9]),
        (&[0.6, -0.2, 0.3], &[0.8, 0.1, -0.5]),
        (&[1.0, 0.0, -1.0], &[0.4, -0.6, 1.1]),
    ];
    let mut out = Vec::new();
    for (i, (e, et)) in configs.into_iter().enumerate() {
        let exact = hciz_closed_form(e, et).unwrap();
        let mc = mc_hciz(e, et, 200_000, 300 + i as u64).unwrap();
        out.push((format!("N={} config {i} sigma", e.len()), mc.sigma_distance(exact), 3.0));
    }
    conclude(3, "closed-form HCIZ against Haar Monte Carlo", &out);
}

#[test]
fn criterion_04_gaussian_u11_identity() {
    let mut r = rng(4);
    let (mut identity, mut spread) = (0.0f64, 0.0f64);
    let mut first = None;
    for _ in 0..20 {
        let k1 = c(r.random_range(-1.5..1.5), 0.0);
        let k2 = c(r.random_range(-1.5..1.5), 0.0);
        let rep = check_gaussian_u11(k1, k2).unwrap();
        identity = identity.max(rep.diff);
        let c0 = *first.get_or_insert(rep.constant);
        spread = spread.max((rep.constant - c0).norm());
    }
    let k = c(0.4, 0.0);
    let same = check_gaussian_u11(k, k).unwrap();
    conclude(
        4,
        "Gaussian U(1/1) superintegral identity",
        &[
            ("worst |lhs / C - rhs| over 20 pairs".into(), identity, 1e-8),
            ("spread of the constant C".into(), spread, 1e-8),
            ("coincident sources |lhs / C - 1|".into(), (same.lhs / GAUSSIAN_U11_CONSTANT - 1.0).norm(), 1e-8),
        ],
    );
}

#[test]
fn criterion_05_efetov_wegner_term() {
    let out: Vec<_> = (1..=4)
        .map(|n| {
            let ens = EnsembleSpec::gue(n).unwrap();
            let z2 = efetov_wegner_z2(&ens, n, c(0.3, -0.5), c(-0.2, 0.0)).unwrap();
            (format!("N={n} |Z2 - 1|"), (z2 - 1.0).norm(), 1e-8)
        })
        .collect();
    conclude(5, "Efetov-Wegner term equals one", &out);
}

#[test]
fn criterion_06_three_routes_for_one_pair() {
    let mut r = rng(6);
    let mut out = Vec::new();
    for n in 2..=4 {
        let ens = EnsembleSpec::gue(n).unwrap();
        let (mut route, mut mc_det, mut mc_susy, mut hs) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for i in 0..5 {
            let (k1, k2) = loop {
                let k1 = c(r.random_range(-1.5..1.5), -0.5);
                let k2 = c(r.random_range(-1.5..1.5), 0.0);
                if (k1 - k2).norm() >= 0.3 {
                    break (k1, k2);
                }
            };
            let kappa = SourceKappa::new(vec![k1], vec![k2]);
            let det = generating_function_det(&ens, &kappa, None).unwrap();
            let susy = z11_superspace(&ens, n, k1, k2, Z11Form::EfetovWegner).unwrap();
            route = route.max(rel(susy, det));
            let mc = mc_generating_function(&ens, &kappa, 1_000_000, 600 + 10 * n as u64 + i).unwrap();
            mc_det = mc_det.max(mc.sigma_distance(det));
            mc_susy = mc_susy.max(mc.sigma_distance(susy));
            if n <= 2 {
                hs = hs.max(rel(z11_hubbard_stratonovich_grassmann(&ens, n, k1, k2).unwrap(), susy));
            }
        }
        out.push((format!("N={n} |det - susy| / |det|"), route, 1e-6));
        out.push((format!("N={n} MC sigma vs det"), mc_det, 3.0));
        out.push((format!("N={n} MC sigma vs susy"), mc_susy, 3.0));
        if n <= 2 {
            out.push((format!("N={n} Hubbard-Stratonovich vs susy"), hs, 1e-6));
        }
    }
    conclude(6, "Z_1/1 by determinant, superspace and Monte Carlo", &out);
}

#[test]
fn criterion_07_kernel_order_invariance() {
    let mut r = rng(7);
    let ens = EnsembleSpec::gue(4).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let kappa = loop {
            let bos = vec![
                c(r.random_range(-1.5..1.5), r.random_range(-1.0..-0.2)),
                c(r.random_range(-1.5..1.5), r.random_range(-1.0..-0.2)),
            ];
            let ferm = vec![c(r.random_range(-1.5..1.5), 0.0)];
            if far_apart(&[bos[0], bos[1], ferm[0]], 0.3) {
                break SourceKappa::new(bos, ferm);
            }
        };
        let a = generating_function_det(&ens, &kappa, Some(3)).unwrap();
        let b = generating_function_det(&ens, &kappa, Some(4)).unwrap();
        worst = worst.max(rel(b, a));
    }
    conclude(7, "determinant independent of the kernel order", &[("worst relative difference".into(), worst, 1e-10)]);
}

#[test]
fn criterion_08_d_operator_chain() {
    let mut r = rng(8);
    let f = SuperFn::gaussian(1.0, DEFAULT_PSI);
    let (mut sum_dev, mut grass_dev) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let p = SuperEigenPoint::new(vec![r.random_range(-2.0..2.0)], vec![r.random_range(-2.0..2.0)], DEFAULT_PSI)
            .unwrap();
        let compact = d_operator_apply(&f, &p, DOperatorForm::Compact).unwrap();
        let sum = d_operator_apply(&f, &p, DOperatorForm::Sum).unwrap();
        let grass = d_operator_grassmann(&f, &p).unwrap();
        sum_dev = sum_dev.max(rel(sum, compact));
        grass_dev = grass_dev.max(rel(compact, grass));
    }
    conclude(
        8,
        "differential operator replacing the Grassmann integral",
        &[
            ("binomial sum vs product form".into(), sum_dev, 1e-6),
            ("product form vs Grassmann engine".into(), grass_dev, 1e-5),
        ],
    );
}

#[test]
fn criterion_09_laplacian_annihilation() {
    let mut r = rng(9);
    let mut out = Vec::new();
    for l in 1..=2usize {
        let mut worst = 0.0f64;
        let mut drawn = 0;
        while drawn < 20 {
            let pts: Vec<C64> =
                (0..2 * l).map(|_| c(r.random_range(-2.0..2.0), r.random_range(-1.0..1.0))).collect();
            if !far_apart(&pts, 0.3) {
                continue;
            }
            drawn += 1;
            let res = laplace_sqrtber(&pts[..l], &pts[l..], 1e-2).unwrap();
            worst = worst.max(res.residual.norm() / res.scale);
        }
        out.push((format!("l={l} worst residual / largest second derivative"), worst, 1e-4));
    }
    conclude(9, "supertrace Laplacian annihilates the square-root Berezinian", &out);
}

#[test]
fn criterion_10_ingham_siegel_normalization() {
    let f = SuperFn::gaussian(1.0, DEFAULT_PSI);
    let out: Vec<_> = (1..=4)
        .map(|n| {
            let v = ingham_siegel_action(&f, n, 1).unwrap();
            (format!("N={n} |action - F(0)|"), (v - f.at_origin(1, 1)).norm(), 1e-8)
        })
        .collect();
    conclude(10, "Ingham-Siegel action returns F(0)", &out);
}

#[test]
fn criterion_11_two_pairs() {
    let mut r = rng(11);
    let ens = EnsembleSpec::gue(3).unwrap();
    let (mut route, mut mc_det, mut mc_susy) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..3 {
        let kappa = loop {
            let bos: Vec<C64> = (0..2).map(|_| c(r.random_range(-1.5..1.5), r.random_range(-1.0..-0.3))).collect();
            let ferm: Vec<C64> = (0..2).map(|_| c(r.random_range(-1.5..1.5), 0.0)).collect();
            if far_apart(&[bos[0], bos[1], ferm[0], ferm[1]], 0.3) {
                break SourceKappa::new(bos, ferm);
            }
        };
        let det = generating_function_det(&ens, &kappa, None).unwrap();
        let susy = generating_function_susy(&ens, &kappa, &SusyOptions::default()).unwrap();
        route = route.max(rel(susy, det));
        let mc = mc_generating_function(&ens, &kappa, 1_000_000, 1100 + i).unwrap();
        mc_det = mc_det.max(mc.sigma_distance(det));
        mc_susy = mc_susy.max(mc.sigma_distance(susy));
    }
    conclude(
        11,
        "k = 2 superspace determinant against the determinantal route",
        &[
            ("|susy - det| / |det|".into(), route, 1e-5),
            ("MC sigma vs det".into(), mc_det, 3.0),
            ("MC sigma vs susy".into(), mc_susy, 3.0),
        ],
    );
}

#[test]
fn criterion_12_external_field() {
    let sources = [(c(0.3, -0.5), c(-0.2, 0.0)), (c(-0.6, -0.8), c(0.5, 0.0))];
    let mut out = Vec::new();
    for n in 2..=3usize {
        let ens = EnsembleSpec::gue(n).unwrap();
        let e0: Vec<f64> = (0..n).map(|j| 1.0 - 0.9 * j as f64).collect();
        for (s, &(k1, k2)) in sources.iter().enumerate() {
            let kappa = SourceKappa::new(vec![k1], vec![k2]);
            for (a, alpha) in [0.0, 0.5].into_iter().enumerate() {
                let field = ExternalField::new(alpha, e0.clone());
                let z = generating_function_external(&ens, &kappa, &field).unwrap();
                let seed = 1200 + 100 * n as u64 + 10 * s as u64 + a as u64;
                let mc = mc_external_field(&ens, &kappa, &field, 1_000_000, seed).unwrap();
                out.push((format!("N={n} source {s} alpha={alpha} MC sigma"), mc.sigma_distance(z), 3.0));
            }
            let z0 = generating_function_external(&ens, &kappa, &ExternalField::new(0.0, e0.clone())).unwrap();
            let a0 = generating_function_alpha0(&ens, &kappa).unwrap();
            let s6 = generating_function_susy(&ens, &kappa, &SusyOptions::default()).unwrap();
            out.push((format!("N={n} source {s} alpha=0 consistency"), rel(z0, a0).max(rel(z0, s6)), 1e-6));
        }
        let same = SourceKappa::new(vec![sources[0].0], vec![sources[0].0]);
        let one = generating_function_external(&ens, &same, &ExternalField::new(0.5, e0)).unwrap();
        out.push((format!("N={n} coincident sources |Z - 1|"), (one - 1.0).norm(), 1e-6));
    }
    conclude(12, "generating function with an external field", &out);
}

#[test]
fn criterion_13_reproducibility() {
    let mut params = Params::new(2, &[c(0.3, -0.5)], &[c(-0.2, 0.0)]);
    params.n_samples = 20_000;
    params.seed = Some(13);
    let req = ComputeRequest::new(Task::GeneratingFunction, Method::All, params);
    let a = run_compute(&req).unwrap().payload_json().unwrap();
    let b = run_compute(&req).unwrap().payload_json().unwrap();
    let differing = a.bytes().zip(b.bytes()).filter(|(x, y)| x != y).count() + a.len().abs_diff(b.len());
    conclude(13, "identical seeds give identical payloads", &[("differing bytes".into(), differing as f64, 0.0)]);
}
