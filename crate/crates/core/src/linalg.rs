//! Small dense helpers shared by the determinant formulas.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

/// All permutations of `0..n` with their signs, in lexicographic order.
pub fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn recurse(n: usize, current: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<(Vec<usize>, f64)>) {
        if current.len() == n {
            out.push((current.clone(), permutation_sign(current)));
            return;
        }
        for j in 0..n {
            if !used[j] {
                used[j] = true;
                current.push(j);
                recurse(n, current, used, out);
                current.pop();
                used[j] = false;
            }
        }
    }
    recurse(n, &mut current, &mut used, &mut out);
    out
}

pub fn permutation_sign(p: &[usize]) -> f64 {
    let mut inversions = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Determinant of a row-major square matrix given as nested rows.
pub fn det(rows: &[Vec<C64>]) -> C64 {
    let n = rows.len();
    if n == 0 {
        return C64::new(1.0, 0.0);
    }
    DMatrix::from_fn(n, n, |r, c| rows[r][c]).determinant()
}

/// `prod_{a<b} (x_a - x_b)`.
pub fn vandermonde(x: &[C64]) -> C64 {
    let mut acc = C64::new(1.0, 0.0);
    for a in 0..x.len() {
        for b in a + 1..x.len() {
            acc *= x[a] - x[b];
        }
    }
    acc
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, j| acc * j as f64)
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// `i^n` exactly.
pub fn i_pow(n: i64) -> C64 {
    match n.rem_euclid(4) {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// `(-1)^n`.
pub fn sign_pow(n: i64) -> f64 {
    if n.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_counts_and_signs() {
        let p = permutations(3);
        assert_eq!(p.len(), 6);
        assert_eq!(p.iter().map(|(_, s)| s).sum::<f64>(), 0.0);
        assert_eq!(permutations(0).len(), 1);
    }

    #[test]
    fn det_matches_leibniz() {
        let rows = vec![
            vec![C64::new(1.0, 0.5), C64::new(2.0, 0.0), C64::new(0.0, -1.0)],
            vec![C64::new(0.3, 0.0), C64::new(-1.0, 1.0), C64::new(4.0, 0.0)],
            vec![C64::new(0.0, 2.0), C64::new(1.0, 0.0), C64::new(0.5, 0.5)],
        ];
        let leibniz: C64 = permutations(3)
            .iter()
            .map(|(p, s)| p.iter().enumerate().fold(C64::new(*s, 0.0), |acc, (r, &c)| acc * rows[r][c]))
            .sum();
        assert!((det(&rows) - leibniz).norm() < 1e-12);
    }
}
