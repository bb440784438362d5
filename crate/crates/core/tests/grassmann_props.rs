use proptest::prelude::*;
use susyrmt::grassmann::{GrassmannElement, GrassmannMatrix};
use susyrmt::C64;

/// Sparse element with small Gaussian-integer coefficients, so products are
/// exact in floating point and equalities can be tested with `==`.
fn element(n_gen: usize) -> impl Strategy<Value = GrassmannElement> {
    let masks = 1u32 << n_gen;
    prop::collection::vec((0..masks, -3i32..=3, -3i32..=3), 0..10).prop_map(move |terms| {
        let mut e = GrassmannElement::zero(n_gen);
        for (mask, re, im) in terms {
            let idx: Vec<usize> = (0..n_gen).filter(|i| mask & (1 << i) != 0).collect();
            e = &e + &GrassmannElement::from_terms(n_gen, &[(&idx, C64::new(re as f64, im as f64))]);
        }
        e
    })
}

fn triple() -> impl Strategy<Value = (GrassmannElement, GrassmannElement, GrassmannElement)> {
    (1usize..=8).prop_flat_map(|n| (element(n), element(n), element(n)))
}

fn parity_part(e: &GrassmannElement, odd: bool) -> GrassmannElement {
    let mut out = GrassmannElement::zero(e.n_gen());
    for (m, c) in e.terms() {
        if (m.count_ones() % 2 == 1) == odd {
            let idx: Vec<usize> = (0..e.n_gen()).filter(|i| m & (1 << i) != 0).collect();
            out = &out + &GrassmannElement::from_terms(e.n_gen(), &[(&idx, c)]);
        }
    }
    out
}

/// Even supermatrix of shape `k1/k2` over `2 k1 k2` generators whose body is
/// small, so the exponential series converges quickly.
fn supermatrix() -> impl Strategy<Value = GrassmannMatrix> {
    prop::sample::select(vec![(1usize, 1usize), (2, 1), (1, 2), (2, 2)]).prop_flat_map(|(k1, k2)| {
        let n_gen = 2 * k1 * k2;
        let dim = k1 + k2;
        (
            prop::collection::vec((-0.6f64..0.6, -0.6f64..0.6), dim * dim),
            prop::collection::vec(element(n_gen), dim * dim),
        )
            .prop_map(move |(bodies, souls)| {
                let entries = (0..dim * dim)
                    .map(|ix| {
                        let (r, c) = (ix / dim, ix % dim);
                        let odd_block = (r < k1) != (c < k1);
                        let soul = parity_part(&souls[ix], odd_block).scale(C64::new(0.2, 0.0));
                        if odd_block {
                            soul
                        } else {
                            let body = GrassmannElement::scalar(n_gen, C64::new(bodies[ix].0, bodies[ix].1));
                            &body + &parity_part(&soul, false)
                        }
                    })
                    .collect();
                GrassmannMatrix::new(k1, k2, entries).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_is_associative((a, b, c) in triple()) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
    }

    #[test]
    fn generators_anticommute(n in 1usize..=12) {
        for i in 0..n {
            for j in 0..n {
                let (x, y) = (GrassmannElement::generator(n, i), GrassmannElement::generator(n, j));
                prop_assert!((&(&x * &y) + &(&y * &x)).is_zero());
            }
        }
    }

    #[test]
    fn berezin_integral_is_linear(
        (a, b, order) in (1usize..=8).prop_flat_map(|n| (element(n), element(n), Just((0..n).collect::<Vec<_>>()).prop_shuffle())),
        alpha in (-4i32..=4, -4i32..=4),
        beta in (-4i32..=4, -4i32..=4),
    ) {
        let (al, be) = (C64::new(alpha.0 as f64, alpha.1 as f64), C64::new(beta.0 as f64, beta.1 as f64));
        let combo = &a.scale(al) + &b.scale(be);
        let lhs = combo.berezin_integrate(&order).unwrap();
        let rhs = &a.berezin_integrate(&order).unwrap().scale(al) + &b.berezin_integrate(&order).unwrap().scale(be);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn berezin_integral_kills_derivatives((a, i) in (1usize..=8).prop_flat_map(|n| (element(n), 0..n))) {
        let d = a.derivative(i).unwrap();
        prop_assert!(d.berezin_integrate(&[i]).unwrap().is_zero());
    }

    #[test]
    fn sdet_of_exp_is_exp_of_str(m in supermatrix()) {
        let lhs = m.exp().unwrap().sdet().unwrap();
        let rhs = m.str().gexp();
        let diff = (&lhs - &rhs).max_abs();
        prop_assert!(diff <= 1e-12 * rhs.max_abs().max(1.0), "difference {diff:e}");
    }
}
