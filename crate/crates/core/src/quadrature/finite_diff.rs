use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Default base step for derivative estimates.
pub const DEFAULT_FD_STEP: f64 = 1e-2;

const MAX_ORDER: usize = 6;

#[derive(Debug, Clone, Copy)]
pub struct FdEstimate {
    pub value: C64,
    /// Difference between the last two extrapolation levels.
    pub error: f64,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Central difference `delta^n g(x) / h^n`, sampling at `x + (n/2 - j) h`.
/// Its error expands in even powers of `h`.
fn central<F: Fn(f64) -> C64>(g: &F, x: f64, n: usize, h: f64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..=n {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let t = x + (n as f64 / 2.0 - j as f64) * h;
        acc += g(t) * (sign * binomial(n, j));
    }
    acc / h.powi(n as i32)
}

/// n-th derivative of `g` at `x` by a central stencil with three Richardson
/// levels at steps `4h, 2h, h`, so the finest level uses the base step.
pub fn fd_derivative<F: Fn(f64) -> C64>(g: F, x: f64, n: usize, h: f64) -> Result<FdEstimate> {
    if n > MAX_ORDER {
        return Err(Error::validation(format!("finite-difference order {n} exceeds {MAX_ORDER}")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::validation("finite-difference step must be positive"));
    }
    if n == 0 {
        return Ok(FdEstimate { value: g(x), error: 0.0 });
    }
    let d: Vec<C64> = [4.0, 2.0, 1.0].iter().map(|s| central(&g, x, n, s * h)).collect();
    let r1 = [(d[1] * 4.0 - d[0]) / 3.0, (d[2] * 4.0 - d[1]) / 3.0];
    let r2 = (r1[1] * 16.0 - r1[0]) / 15.0;
    Ok(FdEstimate {
        value: r2,
        error: (r2 - r1[1]).norm(),
    })
}

/// Mixed partial derivative `prod_j d^(orders[j]) / dx_j^(orders[j])` of a
/// multivariate `g` at `x`, by nesting `fd_derivative` one variable at a time.
pub fn fd_partial<F: Fn(&[f64]) -> C64>(g: &F, x: &[f64], orders: &[usize], h: f64) -> Result<C64> {
    if orders.len() != x.len() {
        return Err(Error::validation("one derivative order per variable is required"));
    }
    let Some(j) = orders.iter().position(|&o| o > 0) else {
        return Ok(g(x));
    };
    let mut rest = orders.to_vec();
    rest[j] = 0;
    let failure = std::cell::RefCell::new(None::<Error>);
    let slice = |t: f64| {
        let mut y = x.to_vec();
        y[j] = t;
        match fd_partial(g, &y, &rest, h) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                C64::new(0.0, 0.0)
            }
        }
    };
    let est = fd_derivative(slice, x[j], orders[j], h)?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(est.value)
}
