//! Globally adaptive Gauss-Kronrod (7, 15) quadrature for complex integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

// Kronrod abscissae (positive half, descending) and weights for the 15-point
// rule; every other node is shared with the embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Result of one quadrature call.
#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: C64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: C64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).norm();
    Panel { a, b, value, error }
}

/// Integrate `f` over `[a, b]` split into `initial_panels` equal pieces, then
/// refine the worst panel until `error <= max(abs_tol, rel_tol * |value|)`.
pub fn adaptive<F: Fn(f64) -> C64>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    initial_panels: usize,
    max_panels: usize,
) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate {
            value: C64::new(0.0, 0.0),
            error: 0.0,
            evaluations: 0,
        });
    }
    let n0 = initial_panels.max(1);
    let step = (b - a) / n0 as f64;
    let mut heap = BinaryHeap::with_capacity(2 * max_panels);
    let mut evaluations = 0;
    for k in 0..n0 {
        let lo = a + step * k as f64;
        let hi = if k + 1 == n0 { b } else { lo + step };
        heap.push(gk15(f, lo, hi));
        evaluations += 15;
    }
    loop {
        let (value, error) = heap
            .iter()
            .fold((C64::new(0.0, 0.0), 0.0), |(v, e), p| (v + p.value, e + p.error));
        if error <= abs_tol.max(rel_tol * value.norm()) {
            return Ok(Estimate {
                value,
                error,
                evaluations,
            });
        }
        if heap.len() >= max_panels {
            return Err(Error::numerical(
                format!("adaptive quadrature on [{a}, {b}] hit the panel budget {max_panels}"),
                error,
            ));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel can no longer be split in floating point; accept what we have.
            heap.push(worst);
            let (value, error) = heap
                .iter()
                .fold((C64::new(0.0, 0.0), 0.0), |(v, e), p| (v + p.value, e + p.error));
            return Err(Error::numerical(
                "adaptive quadrature reached floating-point resolution",
                error.max(value.norm() * rel_tol),
            ));
        }
        heap.push(gk15(f, worst.a, mid));
        heap.push(gk15(f, mid, worst.b));
        evaluations += 30;
    }
}
