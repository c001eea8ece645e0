//! Matrices over `Z_q`: exact rank and rank factorization over prime
//! fields, residue projection, triangular-pattern certification, and the
//! CRT pigeonhole step used by composite-modulus lower bounds.
//!
//! Rank over composite `q` is deliberately not defined; every rank
//! operation takes a prime `p` and reduces entries mod `p` first. Composite
//! reasoning goes through [`residue_matrix`] and [`pigeonhole_factor`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::modmath::{is_prime, Modulus};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinAlgError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{p} is not a factor of the matrix modulus {q}")]
    NotAFactor { p: u64, q: u64 },
    #[error("invalid row/column selection: {0}")]
    BadPermutation(&'static str),
    #[error("matrix is not triangular with a non-zero diagonal under the given orders")]
    NotTriangular,
    #[error("modulus mismatch: matrix has q={left}, argument has q={right}")]
    ModulusMismatch { left: u64, right: u64 },
    #[error("bad matrix: {0}")]
    BadMatrix(&'static str),
}

/// A dense row-major matrix with entries in `[0, q)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ZqMatrix {
    rows: usize,
    cols: usize,
    q: u64,
    entries: Vec<u64>,
}

impl<'de> Deserialize<'de> for ZqMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            rows: usize,
            cols: usize,
            q: u64,
            entries: Vec<u64>,
        }
        let raw = Raw::deserialize(deserializer)?;
        ZqMatrix::new(raw.rows, raw.cols, raw.q, raw.entries)
            .map_err(|e| serde::de::Error::custom(e.to_string()))
    }
}

impl ZqMatrix {
    pub fn new(rows: usize, cols: usize, q: u64, entries: Vec<u64>) -> Result<Self, LinAlgError> {
        if q < 2 {
            return Err(LinAlgError::BadMatrix("modulus must be at least 2"));
        }
        if entries.len() != rows * cols {
            return Err(LinAlgError::BadMatrix("entry count does not match dimensions"));
        }
        if entries.iter().any(|&e| e >= q) {
            return Err(LinAlgError::BadMatrix("entry not reduced modulo q"));
        }
        Ok(ZqMatrix { rows, cols, q, entries })
    }

    pub fn zero(rows: usize, cols: usize, q: u64) -> Self {
        ZqMatrix { rows, cols, q, entries: vec![0; rows * cols] }
    }

    pub fn identity(n: usize, q: u64) -> Self {
        let mut m = Self::zero(n, n, q);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// All-ones matrix.
    pub fn ones(n: usize, q: u64) -> Self {
        ZqMatrix { rows: n, cols: n, q, entries: vec![1 % q; n * n] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.entries[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        debug_assert!(v < self.q);
        self.entries[r * self.cols + c] = v;
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zero(self.cols, self.rows, self.q);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self, LinAlgError> {
        if self.q != rhs.q {
            return Err(LinAlgError::ModulusMismatch { left: self.q, right: rhs.q });
        }
        if self.cols != rhs.rows {
            return Err(LinAlgError::BadMatrix("incompatible shapes for multiplication"));
        }
        let mut out = Self::zero(self.rows, rhs.cols, self.q);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc: u128 = 0;
                for k in 0..self.cols {
                    acc += self.get(i, k) as u128 * rhs.get(k, j) as u128;
                    acc %= self.q as u128;
                }
                out.set(i, j, acc as u64);
            }
        }
        Ok(out)
    }

    /// Entries reduced modulo a new modulus `p`.
    pub fn reduced(&self, p: u64) -> Self {
        ZqMatrix {
            rows: self.rows,
            cols: self.cols,
            q: p,
            entries: self.entries.iter().map(|&e| e % p).collect(),
        }
    }
}

/// `F = U · V (mod p)` with inner dimension `r = rank of F over Z_p`.
#[derive(Debug, Clone)]
pub struct RankFactorization {
    pub u: ZqMatrix,
    pub v: ZqMatrix,
    pub rank: usize,
    pub p: u64,
}

/// Orders under which a matrix is lower-zero triangular with a non-zero
/// diagonal: `row_order[i]`/`col_order[i]` select the i-th diagonal cell.
///
/// The orders may select any equal-length subsets of rows and columns, so a
/// witness can also exhibit a triangular submatrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriangularWitness {
    pub row_order: Vec<usize>,
    pub col_order: Vec<usize>,
    pub diag_len: usize,
}

impl TriangularWitness {
    pub fn new(row_order: Vec<usize>, col_order: Vec<usize>) -> Self {
        let diag_len = row_order.len();
        TriangularWitness { row_order, col_order, diag_len }
    }

    /// Identity orders for a square matrix of side `n`.
    pub fn identity(n: usize) -> Self {
        Self::new((0..n).collect(), (0..n).collect())
    }

    fn validate(&self, rows: usize, cols: usize) -> Result<(), LinAlgError> {
        if self.diag_len == 0
            || self.row_order.len() != self.diag_len
            || self.col_order.len() != self.diag_len
        {
            return Err(LinAlgError::BadPermutation("order lengths do not match diag_len"));
        }
        let mut seen_r = vec![false; rows];
        for &r in &self.row_order {
            if r >= rows || seen_r[r] {
                return Err(LinAlgError::BadPermutation("row order is not injective in range"));
            }
            seen_r[r] = true;
        }
        let mut seen_c = vec![false; cols];
        for &c in &self.col_order {
            if c >= cols || seen_c[c] {
                return Err(LinAlgError::BadPermutation("column order is not injective in range"));
            }
            seen_c[c] = true;
        }
        Ok(())
    }
}

fn powmod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc: u64 = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = (acc as u128 * base as u128 % m as u128) as u64;
        }
        base = (base as u128 * base as u128 % m as u128) as u64;
        exp >>= 1;
    }
    acc
}

fn inv_mod_p(a: u64, p: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(p));
    powmod(a, p - 2, p)
}

/// Row-reduced echelon form over `Z_p`. Returns `(rref, pivot_cols)`.
///
/// Pivoting is deterministic: columns are scanned left to right and the
/// pivot is the first (lowest-index) non-zero row at or below the current
/// position, so repeated runs produce identical factorizations.
fn rref_mod_p(f: &ZqMatrix, p: u64) -> (ZqMatrix, Vec<usize>) {
    let mut m = f.reduced(p);
    let (rows, cols) = (m.rows, m.cols);
    let mut pivots = Vec::new();
    let mut pivot_row = 0usize;
    for col in 0..cols {
        if pivot_row == rows {
            break;
        }
        let Some(src) = (pivot_row..rows).find(|&r| m.get(r, col) != 0) else {
            continue;
        };
        if src != pivot_row {
            for c in 0..cols {
                let (a, b) = (m.get(pivot_row, c), m.get(src, c));
                m.set(pivot_row, c, b);
                m.set(src, c, a);
            }
        }
        let inv = inv_mod_p(m.get(pivot_row, col), p);
        for c in 0..cols {
            let v = (m.get(pivot_row, c) as u128 * inv as u128 % p as u128) as u64;
            m.set(pivot_row, c, v);
        }
        for r in 0..rows {
            if r != pivot_row && m.get(r, col) != 0 {
                let factor = m.get(r, col);
                for c in 0..cols {
                    let sub = (factor as u128 * m.get(pivot_row, c) as u128 % p as u128) as u64;
                    let v = (m.get(r, c) + p - sub) % p;
                    m.set(r, c, v);
                }
            }
        }
        pivots.push(col);
        pivot_row += 1;
    }
    (m, pivots)
}

/// Rank of `F` over the field `Z_p` (entries reduced mod `p` first).
pub fn rank_mod_p(f: &ZqMatrix, p: u64) -> Result<usize, LinAlgError> {
    if !is_prime(p) {
        return Err(LinAlgError::NotPrime(p));
    }
    let (_, pivots) = rref_mod_p(f, p);
    Ok(pivots.len())
}

/// Canonical rank factorization `F = U·V (mod p)`.
///
/// `U` is the pivot-column basis (the columns of `F` at the pivot columns
/// of its RREF) and `V` is the non-zero rows of the RREF, so the inner
/// dimension equals `rank_mod_p(f, p)` and the output is deterministic.
pub fn factor_rank(f: &ZqMatrix, p: u64) -> Result<RankFactorization, LinAlgError> {
    if !is_prime(p) {
        return Err(LinAlgError::NotPrime(p));
    }
    let reduced = f.reduced(p);
    let (rref, pivots) = rref_mod_p(f, p);
    let r = pivots.len();
    let mut u = ZqMatrix::zero(f.rows, r, p);
    for (j, &pc) in pivots.iter().enumerate() {
        for i in 0..f.rows {
            u.set(i, j, reduced.get(i, pc));
        }
    }
    let mut v = ZqMatrix::zero(r, f.cols, p);
    for i in 0..r {
        for j in 0..f.cols {
            v.set(i, j, rref.get(i, j));
        }
    }
    debug_assert_eq!(u.mul(&v).unwrap(), reduced);
    Ok(RankFactorization { u, v, rank: r, p })
}

/// Entrywise reduction of `F` modulo a prime factor `p` of its modulus.
pub fn residue_matrix(f: &ZqMatrix, p: u64) -> Result<ZqMatrix, LinAlgError> {
    if p < 2 || !f.q.is_multiple_of(p) || !is_prime(p) {
        return Err(LinAlgError::NotAFactor { p, q: f.q });
    }
    Ok(f.reduced(p))
}

/// True iff under `(row_order, col_order)` the selected submatrix is
/// lower-zero triangular with every diagonal entry non-zero mod `q`.
pub fn check_triangular(f: &ZqMatrix, w: &TriangularWitness) -> Result<bool, LinAlgError> {
    w.validate(f.rows, f.cols)?;
    for i in 0..w.diag_len {
        if f.get(w.row_order[i], w.col_order[i]) == 0 {
            return Ok(false);
        }
        for j in 0..i {
            if f.get(w.row_order[i], w.col_order[j]) != 0 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The CRT pigeonhole step: given a triangular matrix with a non-zero
/// diagonal mod `q = p_1···p_k`, finds a prime factor `p_i` under which at
/// least `⌈n/k⌉` diagonal entries stay non-zero. The surviving principal
/// submatrix of `F mod p_i` is again triangular with a non-zero diagonal,
/// hence has rank at least `⌈n/k⌉` over `Z_{p_i}`.
///
/// Returns the factor and the surviving diagonal positions (indices into
/// the witness orders). Ties between factors pick the smallest prime.
pub fn pigeonhole_factor(
    f: &ZqMatrix,
    w: &TriangularWitness,
    m: &Modulus,
) -> Result<(u64, Vec<usize>), LinAlgError> {
    if m.q() != f.q {
        return Err(LinAlgError::ModulusMismatch { left: f.q, right: m.q() });
    }
    if !check_triangular(f, w)? {
        return Err(LinAlgError::NotTriangular);
    }
    let mut best: Option<(u64, Vec<usize>)> = None;
    for &p in m.factors() {
        let surviving: Vec<usize> = (0..w.diag_len)
            .filter(|&i| !f.get(w.row_order[i], w.col_order[i]).is_multiple_of(p))
            .collect();
        match &best {
            Some((_, s)) if s.len() >= surviving.len() => {}
            _ => best = Some((p, surviving)),
        }
    }
    let (p, surviving) = best.expect("modulus has at least one factor");
    // Every diagonal entry is non-zero mod q, hence non-zero mod some
    // factor; the best factor keeps at least ⌈n/k⌉ of them.
    debug_assert!(surviving.len() * m.k() >= w.diag_len);
    Ok((p, surviving))
}
