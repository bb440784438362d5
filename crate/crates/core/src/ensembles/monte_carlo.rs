use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{sample_haar_unitary, EnsembleSpec, ExternalField, SourceKappa};
use crate::error::{Error, Result};

/// Samples per RNG stream. Chunk `c` always draws from stream `c` of the
/// seeded generator, so results do not depend on the thread count.
pub const CHUNK_SIZE: usize = 4096;

/// Monte Carlo mean of a complex quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub mean: C64,
    /// Euclidean norm of the standard errors of the real and imaginary parts.
    pub stderr: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl MCEstimate {
    /// Distance to `x` in units of the standard error; zero error and exact
    /// agreement give 0, zero error and disagreement give infinity.
    pub fn sigma_distance(&self, x: C64) -> f64 {
        let d = (self.mean - x).norm();
        if d == 0.0 {
            0.0
        } else {
            d / self.stderr
        }
    }
}

/// Welford accumulator for one component.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.n;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0.0 {
            return other;
        }
        if other.n == 0.0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + delta * other.n / n,
            m2: self.m2 + other.m2 + delta * delta * self.n * other.n / n,
        }
    }

    fn stderr(&self) -> f64 {
        if self.n < 2.0 {
            return 0.0;
        }
        (self.m2 / (self.n - 1.0) / self.n).sqrt()
    }
}

/// Mean of `draw` over `n_samples` independent draws, reproducible in `seed`.
pub fn mc_mean<F>(n_samples: usize, seed: u64, draw: F) -> Result<MCEstimate>
where
    F: Fn(&mut ChaCha8Rng) -> C64 + Sync,
{
    if n_samples < 2 {
        return Err(Error::validation("Monte Carlo needs at least two samples"));
    }
    let n_chunks = n_samples.div_ceil(CHUNK_SIZE);
    let partials: Vec<(Moments, Moments)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = CHUNK_SIZE.min(n_samples - c * CHUNK_SIZE);
            let (mut re, mut im) = (Moments::default(), Moments::default());
            for _ in 0..count {
                let z = draw(&mut rng);
                re.push(z.re);
                im.push(z.im);
            }
            (re, im)
        })
        .collect();
    let (re, im) = partials
        .into_iter()
        .fold((Moments::default(), Moments::default()), |(ar, ai), (br, bi)| {
            (ar.merge(br), ai.merge(bi))
        });
    let mean = C64::new(re.mean, im.mean);
    if !mean.re.is_finite() || !mean.im.is_finite() {
        return Err(Error::numerical("Monte Carlo mean is not finite", f64::INFINITY));
    }
    Ok(MCEstimate {
        mean,
        stderr: re.stderr().hypot(im.stderr()),
        n_samples,
        seed,
    })
}

fn eigenvalues(h: DMatrix<C64>) -> Vec<f64> {
    h.symmetric_eigenvalues().iter().copied().collect()
}

/// `prod_j det(H - kappa_j2) / prod_j det(H - kappa_j1)` from the spectrum of `H`.
fn characteristic_ratio(spectrum: &[f64], kappa: &SourceKappa) -> C64 {
    let mut num = C64::new(1.0, 0.0);
    let mut den = C64::new(1.0, 0.0);
    for k in &kappa.ferm {
        for &l in spectrum {
            num *= C64::new(l, 0.0) - k;
        }
    }
    for k in &kappa.bos {
        for &l in spectrum {
            den *= C64::new(l, 0.0) - k;
        }
    }
    num / den
}

/// Monte Carlo estimate of the generating function, the ensemble average of
/// the characteristic-polynomial ratio.
pub fn mc_generating_function(
    ens: &EnsembleSpec,
    kappa: &SourceKappa,
    n_samples: usize,
    seed: u64,
) -> Result<MCEstimate> {
    kappa.check_off_axis()?;
    let n = ens.n();
    mc_mean(n_samples, seed, |rng| {
        let h = ens.sampler().sample(n, rng);
        characteristic_ratio(&eigenvalues(h), kappa)
    })
}

/// Monte Carlo estimate with `H` replaced by `H + alpha H0`, `H0 = diag(E0)`.
pub fn mc_external_field(
    ens: &EnsembleSpec,
    kappa: &SourceKappa,
    field: &ExternalField,
    n_samples: usize,
    seed: u64,
) -> Result<MCEstimate> {
    kappa.check_off_axis()?;
    if kappa.k1() != kappa.k2() {
        return Err(Error::validation("the external-field generating function needs k1 = k2"));
    }
    let n = ens.n();
    if field.e0.len() != n {
        return Err(Error::validation(format!(
            "external field needs {n} eigenvalues, got {}",
            field.e0.len()
        )));
    }
    mc_mean(n_samples, seed, |rng| {
        let mut h = ens.sampler().sample(n, rng);
        if field.alpha != 0.0 {
            for a in 0..n {
                h[(a, a)] += C64::new(field.alpha * field.e0[a], 0.0);
            }
        }
        characteristic_ratio(&eigenvalues(h), kappa)
    })
}

/// Haar average of `exp(-i tr(E U Et U^dagger))`.
pub fn mc_hciz(e: &[f64], et: &[f64], n_samples: usize, seed: u64) -> Result<MCEstimate> {
    let n = e.len();
    if n == 0 || et.len() != n {
        return Err(Error::validation("HCIZ needs two nonempty eigenvalue lists of equal length"));
    }
    mc_mean(n_samples, seed, |rng| {
        let u = sample_haar_unitary(n, rng);
        let mut phase = 0.0;
        for a in 0..n {
            for b in 0..n {
                phase += e[a] * et[b] * u[(a, b)].norm_sqr();
            }
        }
        C64::from_polar(1.0, -phase)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::sample_gue;

    #[test]
    fn coincident_sources_give_exact_one() {
        let ens = EnsembleSpec::gue(3).unwrap();
        let k = C64::new(0.3, -0.5);
        let kappa = SourceKappa::new(vec![k], vec![k]);
        let est = mc_generating_function(&ens, &kappa, 5000, 11).unwrap();
        assert_eq!(est.mean, C64::new(1.0, 0.0));
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn reproducible_in_seed() {
        let ens = EnsembleSpec::gue(2).unwrap();
        let kappa = SourceKappa::new(vec![C64::new(0.3, -0.5)], vec![C64::new(-0.2, 0.0)]);
        let a = mc_generating_function(&ens, &kappa, 20_000, 7).unwrap();
        let b = mc_generating_function(&ens, &kappa, 20_000, 7).unwrap();
        assert_eq!(a, b);
        let c = mc_generating_function(&ens, &kappa, 20_000, 8).unwrap();
        assert_ne!(a.mean, c.mean);
    }

    #[test]
    fn zero_field_is_bit_identical() {
        let ens = EnsembleSpec::gue(2).unwrap();
        let kappa = SourceKappa::new(vec![C64::new(0.3, -0.5)], vec![C64::new(-0.2, 0.0)]);
        let a = mc_generating_function(&ens, &kappa, 10_000, 4).unwrap();
        let b = mc_external_field(&ens, &kappa, &ExternalField::new(0.0, vec![1.0, -1.0]), 10_000, 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn trace_square_moment() {
        let est = mc_mean(100_000, 1, |rng| {
            let h = sample_gue(2, rng);
            C64::new((&h * &h).trace().re, 0.0)
        })
        .unwrap();
        assert!((est.mean.re - 4.0).abs() < 3.0 * est.stderr);
    }

    #[test]
    fn haar_second_moment() {
        for n in [2usize, 3] {
            let est = mc_mean(100_000, 2, |rng| C64::new(sample_haar_unitary(n, rng)[(0, 0)].norm_sqr(), 0.0))
                .unwrap();
            assert!((est.mean.re - 1.0 / n as f64).abs() < 3.0 * est.stderr);
        }
    }

    #[test]
    fn hciz_trivial_cases() {
        let est = mc_hciz(&[0.7], &[1.3], 100, 1).unwrap();
        assert!((est.mean - C64::from_polar(1.0, -0.91)).norm() < 1e-14);
        let est = mc_hciz(&[1.0, 2.0], &[0.0, 0.0], 100, 1).unwrap();
        assert_eq!(est.mean, C64::new(1.0, 0.0));
    }
}
