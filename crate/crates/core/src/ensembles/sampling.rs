use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

/// Complex normal with `E|z|^2 = 1` (real and imaginary variance 1/2 each).
pub fn sample_complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// GUE matrix with density proportional to `exp(-tr H^2 / 2)`: unit-variance
/// real diagonal, off-diagonal real and imaginary parts of variance 1/2.
pub fn sample_gue<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<C64> {
    let mut h = DMatrix::zeros(n, n);
    for a in 0..n {
        let d: f64 = rng.sample(StandardNormal);
        h[(a, a)] = C64::new(d, 0.0);
        for b in a + 1..n {
            let z = sample_complex_normal(rng);
            h[(a, b)] = z;
            h[(b, a)] = z.conj();
        }
    }
    h
}

/// Haar-distributed unitary: QR of a Ginibre matrix, with the phases of the
/// diagonal of `R` moved into `Q` so the distribution is exactly invariant.
pub fn sample_haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<C64> {
    let z = DMatrix::from_fn(n, n, |_, _| sample_complex_normal(rng));
    let qr = z.qr();
    let (mut q, r) = qr.unpack();
    for c in 0..n {
        let d = r[(c, c)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for row in 0..n {
            q[(row, c)] *= phase;
        }
    }
    q
}
