use num_complex::Complex64 as C64;

use super::element::GrassmannElement;
use crate::error::{Error, Result};

/// Square supermatrix with a `k1` bosonic and a `k2` fermionic block. Entries
/// are stored row-major; diagonal blocks hold even elements, off-diagonal
/// blocks odd ones.
#[derive(Debug, Clone, PartialEq)]
pub struct GrassmannMatrix {
    k1: usize,
    k2: usize,
    n_gen: usize,
    entries: Vec<GrassmannElement>,
}

impl GrassmannMatrix {
    pub fn new(k1: usize, k2: usize, entries: Vec<GrassmannElement>) -> Result<Self> {
        let dim = k1 + k2;
        if entries.len() != dim * dim {
            return Err(Error::validation(format!(
                "supermatrix of size {dim} needs {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        let n_gen = entries.first().map(|e| e.n_gen()).unwrap_or(0);
        if entries.iter().any(|e| e.n_gen() != n_gen) {
            return Err(Error::validation("supermatrix entries over different generator sets"));
        }
        let m = GrassmannMatrix {
            k1,
            k2,
            n_gen,
            entries,
        };
        m.check_grading()?;
        Ok(m)
    }

    /// Purely numeric supermatrix from a row-major array of values.
    pub fn numeric(k1: usize, k2: usize, n_gen: usize, values: &[C64]) -> Result<Self> {
        let entries = values.iter().map(|&v| GrassmannElement::scalar(n_gen, v)).collect();
        Self::new(k1, k2, entries)
    }

    pub fn identity(k1: usize, k2: usize, n_gen: usize) -> Self {
        let dim = k1 + k2;
        let entries = (0..dim * dim)
            .map(|ix| {
                if ix / dim == ix % dim {
                    GrassmannElement::one(n_gen)
                } else {
                    GrassmannElement::zero(n_gen)
                }
            })
            .collect();
        GrassmannMatrix {
            k1,
            k2,
            n_gen,
            entries,
        }
    }

    pub fn k1(&self) -> usize {
        self.k1
    }

    pub fn k2(&self) -> usize {
        self.k2
    }

    pub fn dim(&self) -> usize {
        self.k1 + self.k2
    }

    pub fn n_gen(&self) -> usize {
        self.n_gen
    }

    pub fn get(&self, row: usize, col: usize) -> &GrassmannElement {
        &self.entries[row * self.dim() + col]
    }

    fn is_diagonal_block(&self, row: usize, col: usize) -> bool {
        (row < self.k1) == (col < self.k1)
    }

    /// Every diagonal-block entry even, every off-diagonal-block entry odd.
    pub fn check_grading(&self) -> Result<()> {
        let dim = self.dim();
        for r in 0..dim {
            for c in 0..dim {
                let e = self.get(r, c);
                let ok = if self.is_diagonal_block(r, c) {
                    e.is_even()
                } else {
                    e.is_odd()
                };
                if !ok {
                    return Err(Error::validation(format!("entry ({r}, {c}) has the wrong parity")));
                }
            }
        }
        Ok(())
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.k1 != other.k1 || self.k2 != other.k2 || self.n_gen != other.n_gen {
            return Err(Error::validation("supermatrix shapes or generator sets differ"));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        Ok(GrassmannMatrix { entries, ..self.clone() })
    }

    pub fn scale(&self, s: C64) -> Self {
        let entries = self.entries.iter().map(|e| e.scale(s)).collect();
        GrassmannMatrix { entries, ..self.clone() }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let dim = self.dim();
        let mut entries = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                let mut acc = GrassmannElement::zero(self.n_gen);
                for k in 0..dim {
                    acc = &acc + &(self.get(r, k) * other.get(k, c));
                }
                entries.push(acc);
            }
        }
        Ok(GrassmannMatrix { entries, ..self.clone() })
    }

    /// Transpose combined with the element conjugation; `(eta^dagger)^dagger = -eta`
    /// holds for the off-diagonal blocks.
    pub fn adjoint(&self) -> Self {
        let dim = self.dim();
        let mut entries = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                entries.push(self.get(c, r).star());
            }
        }
        GrassmannMatrix { entries, ..self.clone() }
    }

    /// Supertrace: trace of the bosonic block minus trace of the fermionic block.
    pub fn str(&self) -> GrassmannElement {
        let mut acc = GrassmannElement::zero(self.n_gen);
        for j in 0..self.dim() {
            if j < self.k1 {
                acc = &acc + self.get(j, j);
            } else {
                acc = &acc - self.get(j, j);
            }
        }
        acc
    }

    fn block(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Vec<Vec<GrassmannElement>> {
        rows.map(|r| cols.clone().map(|c| self.get(r, c).clone()).collect()).collect()
    }

    /// Superdeterminant `det(A - B D^-1 C) / det(D)`.
    pub fn sdet(&self) -> Result<GrassmannElement> {
        let (k1, dim) = (self.k1, self.dim());
        let a = self.block(0..k1, 0..k1);
        let b = self.block(0..k1, k1..dim);
        let c = self.block(k1..dim, 0..k1);
        let d = self.block(k1..dim, k1..dim);
        if self.k2 == 0 {
            return Ok(even_det(&a, self.n_gen));
        }
        let d_inv = even_inverse(&d, self.n_gen)?;
        let bdc = mat_mul(&mat_mul(&b, &d_inv, self.n_gen), &c, self.n_gen);
        let schur_rows = if k1 == 0 { Vec::new() } else { bdc };
        let schur: Vec<Vec<GrassmannElement>> = a
            .iter()
            .zip(&schur_rows)
            .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x - y).collect())
            .collect();
        let num = even_det(&schur, self.n_gen);
        let den = even_det(&d, self.n_gen);
        Ok(&num * &den.inverse()?)
    }

    /// Matrix exponential by scaling and squaring of a truncated Taylor series.
    pub fn exp(&self) -> Result<Self> {
        let norm = self.entries.iter().map(|e| e.max_abs()).fold(0.0, f64::max) * self.dim() as f64;
        let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
        let scaled = self.scale(C64::new(0.5f64.powi(squarings as i32), 0.0));
        let id = Self::identity(self.k1, self.k2, self.n_gen);
        let mut sum = id.clone();
        let mut term = id;
        for k in 1..=24 {
            term = term.mul(&scaled)?.scale(C64::new(1.0 / k as f64, 0.0));
            sum = sum.add(&term)?;
        }
        for _ in 0..squarings {
            sum = sum.mul(&sum)?;
        }
        Ok(sum)
    }
}

fn mat_mul(
    x: &[Vec<GrassmannElement>],
    y: &[Vec<GrassmannElement>],
    n_gen: usize,
) -> Vec<Vec<GrassmannElement>> {
    let inner = y.len();
    let cols = y.first().map(|r| r.len()).unwrap_or(0);
    x.iter()
        .map(|row| {
            (0..cols)
                .map(|c| {
                    (0..inner).fold(GrassmannElement::zero(n_gen), |acc, k| &acc + &(&row[k] * &y[k][c]))
                })
                .collect()
        })
        .collect()
}

/// Leibniz determinant of a matrix of mutually commuting (even) elements.
fn even_det(m: &[Vec<GrassmannElement>], n_gen: usize) -> GrassmannElement {
    let n = m.len();
    let mut total = GrassmannElement::zero(n_gen);
    for (perm, sign) in crate::linalg::permutations(n) {
        let mut term = GrassmannElement::scalar(n_gen, C64::new(sign, 0.0));
        for (r, &c) in perm.iter().enumerate() {
            term = &term * &m[r][c];
        }
        total = &total + &term;
    }
    total
}

/// Gauss-Jordan inverse of a matrix of even elements, pivoting on the body.
fn even_inverse(m: &[Vec<GrassmannElement>], n_gen: usize) -> Result<Vec<Vec<GrassmannElement>>> {
    let n = m.len();
    let mut a: Vec<Vec<GrassmannElement>> = m.to_vec();
    let mut inv: Vec<Vec<GrassmannElement>> = (0..n)
        .map(|r| {
            (0..n)
                .map(|c| {
                    if r == c {
                        GrassmannElement::one(n_gen)
                    } else {
                        GrassmannElement::zero(n_gen)
                    }
                })
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].body().norm().total_cmp(&a[j][col].body().norm()))
            .expect("non-empty range");
        if a[pivot][col].body().norm() < 1e-300 {
            return Err(Error::singular("fermion-fermion block has a singular numeric part"));
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p_inv = a[col][col].inverse()?;
        for c in 0..n {
            a[col][c] = &a[col][c] * &p_inv;
            inv[col][c] = &inv[col][c] * &p_inv;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = a[r][col].clone();
            if factor.is_zero() {
                continue;
            }
            for c in 0..n {
                a[r][c] = &a[r][c] - &(&factor * &a[col][c]);
                inv[r][c] = &inv[r][c] - &(&factor * &inv[col][c]);
            }
        }
    }
    Ok(inv)
}
