//! Determinants whose entries are distributions in the eigenvalue variables.
//!
//! Every entry records which integration variables it depends on. When each
//! permutation term of the Leibniz expansion uses every variable exactly once,
//! a separable weight lets the integral move inside the determinant, and each
//! entry can be replaced by its integrated value. The expansion keeps the
//! terms grouped by how many Dirac (Efetov-Wegner) factors they contain.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{factorial, permutations, vandermonde};
use crate::TOL_EQUAL;

/// Largest `n!` the expansion will enumerate.
pub const TERM_BUDGET: usize = 720;

/// An integration variable: a bosonic eigenvalue `r_j1` or a fermionic `r_j2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Var {
    Bos(usize),
    Ferm(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryKind {
    /// `delta(r_b1) delta(r_a2)` contribution, evaluated at the origin.
    DeltaPair,
    /// Ordinary integral of a smooth (or integrably singular) kernel.
    Smooth,
    /// Derivatives of `delta(r_a2)`, reduced analytically.
    DeltaDerivativeRow,
    /// Half-line integral of a power-series tail.
    SeriesColumn,
    /// Number independent of the integration variables.
    Constant,
}

/// One determinant entry after integration: a list of parts sharing the
/// same consumed variables.
#[derive(Debug, Clone, PartialEq)]
pub struct DistDetEntry {
    pub consumes: Vec<Var>,
    pub parts: Vec<(EntryKind, C64)>,
}

impl DistDetEntry {
    pub fn new(consumes: Vec<Var>) -> Self {
        DistDetEntry {
            consumes,
            parts: Vec::new(),
        }
    }

    pub fn with(mut self, kind: EntryKind, value: C64) -> Self {
        self.parts.push((kind, value));
        self
    }

    pub fn value(&self) -> C64 {
        self.parts.iter().map(|(_, v)| v).sum()
    }

    fn split(&self) -> (C64, C64) {
        let mut delta = C64::new(0.0, 0.0);
        let mut rest = C64::new(0.0, 0.0);
        for (k, v) in &self.parts {
            if *k == EntryKind::DeltaPair {
                delta += v;
            } else {
                rest += v;
            }
        }
        (delta, rest)
    }
}

/// Result of the permutation expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    pub value: C64,
    /// `by_delta_count[l]`: sum of the terms with exactly `l` Dirac pairs.
    pub by_delta_count: Vec<C64>,
    pub terms: usize,
}

/// Square matrix of integrated entries over a fixed set of variables.
#[derive(Debug, Clone)]
pub struct DistDet {
    dim: usize,
    vars: Vec<Var>,
    entries: Vec<DistDetEntry>,
}

impl DistDet {
    pub fn new(dim: usize, vars: Vec<Var>, entries: Vec<DistDetEntry>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::validation(format!(
                "determinant of size {dim} needs {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        if factorial(dim) > TERM_BUDGET as f64 {
            return Err(Error::Resource(format!(
                "determinant expansion of size {dim} exceeds the budget of {TERM_BUDGET} terms"
            )));
        }
        Ok(DistDet { dim, vars, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> &DistDetEntry {
        &self.entries[row * self.dim + col]
    }

    /// Every permutation term must consume each variable exactly once.
    /// Returns the number of terms checked.
    pub fn check_well_formed(&self) -> Result<usize> {
        let mut expected = self.vars.clone();
        expected.sort();
        let perms = permutations(self.dim);
        for (p, _) in &perms {
            let mut used: Vec<Var> = p
                .iter()
                .enumerate()
                .flat_map(|(r, &c)| self.get(r, c).consumes.iter().copied())
                .collect();
            used.sort();
            if used != expected {
                return Err(Error::validation(format!(
                    "permutation {p:?} consumes {used:?}, expected each of {expected:?} once"
                )));
            }
        }
        Ok(perms.len())
    }

    /// Leibniz expansion; with `include_delta = false` every Dirac part is
    /// dropped before multiplying out.
    pub fn expand(&self, include_delta: bool) -> Result<Expansion> {
        self.check_well_formed()?;
        let n = self.dim;
        let split: Vec<(C64, C64)> = self.entries.iter().map(|e| e.split()).collect();
        let perms = permutations(n);
        let per_term: Vec<Vec<C64>> = perms
            .par_iter()
            .map(|(p, sign)| {
                // polynomial in the number of Dirac factors
                let mut poly = vec![C64::new(*sign, 0.0)];
                for (r, &c) in p.iter().enumerate() {
                    let (delta, rest) = split[r * n + c];
                    let delta = if include_delta { delta } else { C64::new(0.0, 0.0) };
                    let mut next = vec![C64::new(0.0, 0.0); poly.len() + 1];
                    for (l, v) in poly.iter().enumerate() {
                        next[l] += v * rest;
                        next[l + 1] += v * delta;
                    }
                    poly = next;
                }
                poly
            })
            .collect();
        let mut by_delta_count = vec![C64::new(0.0, 0.0); n + 1];
        for poly in &per_term {
            for (l, v) in poly.iter().enumerate() {
                by_delta_count[l] += v;
            }
        }
        Ok(Expansion {
            value: by_delta_count.iter().sum(),
            by_delta_count,
            terms: perms.len(),
        })
    }
}

/// Coincident source pairs `kappa_b1 = kappa_a2` and the inverse square-root
/// Berezinian with their vanishing cross factors removed.
///
/// A row `a` of fermion-boson entries carries a pole `1 / (kappa_b1 - kappa_a2)`
/// in its Dirac part. At a coincidence the product of that pole with the
/// vanishing factor of `1 / sqrt(Ber)` leaves only the residue, so row `a`
/// collapses onto column `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceLimit {
    pub pairs: Vec<(usize, usize)>,
    pub inv_sqrt_ber: C64,
}

impl CoincidenceLimit {
    pub fn new(bos: &[C64], ferm: &[C64]) -> Result<Self> {
        let vdm = vandermonde(bos) * vandermonde(ferm);
        if vdm.norm() <= TOL_EQUAL {
            return Err(Error::singular("sources of the same kind coincide"));
        }
        let mut pairs = Vec::new();
        let mut cross = C64::new(1.0, 0.0);
        for (a, y) in ferm.iter().enumerate() {
            for (b, x) in bos.iter().enumerate() {
                if (x - y).norm() <= TOL_EQUAL {
                    pairs.push((a, b));
                } else {
                    cross *= x - y;
                }
            }
        }
        Ok(CoincidenceLimit {
            pairs,
            inv_sqrt_ber: cross / vdm,
        })
    }

    /// `residue / (kb - ka)`, or the bare residue at a coincidence.
    pub fn pole(residue: C64, kb: C64, ka: C64) -> C64 {
        if (kb - ka).norm() <= TOL_EQUAL {
            residue
        } else {
            residue / (kb - ka)
        }
    }

    /// Collapse the rows of coincident pairs in a row-major `dim x dim` set of
    /// entries whose first rows are indexed by the fermionic label.
    pub fn reduce(&self, entries: &mut [DistDetEntry], dim: usize) {
        for &(a, b) in &self.pairs {
            for c in 0..dim {
                let e = &mut entries[a * dim + c];
                if c == b {
                    e.parts.retain(|(k, _)| *k == EntryKind::DeltaPair);
                } else {
                    e.parts.clear();
                }
            }
        }
    }
}
