//! Exact modular arithmetic on machine words.
//!
//! All arithmetic is over `u64` with explicit `u128` widening for products;
//! operations that would leave the supported range return
//! [`ModMathError::Overflow`] instead of wrapping. Primality is decided by a
//! fixed-witness Miller-Rabin test that is deterministic for the entire
//! `u64` range, so every answer here is unconditional.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModMathError {
    /// `q` has a repeated prime factor (`p^2 | q`); only square-free moduli
    /// are supported.
    #[error("modulus {0} is not square-free: {1}^2 divides it")]
    NotSquareFree(u64, u64),
    #[error("arithmetic overflow: {0}")]
    Overflow(&'static str),
    #[error("parameter out of range: {0}")]
    OutOfRange(&'static str),
}

/// A square-free modulus `q = p_1 · … · p_k` with `p_1 < … < p_k` prime.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Modulus {
    q: u64,
    factors: Vec<u64>,
}

impl Modulus {
    pub fn q(&self) -> u64 {
        self.q
    }

    /// The distinct prime factors in increasing order.
    pub fn factors(&self) -> &[u64] {
        &self.factors
    }

    /// Number of distinct prime factors; `k == 1` iff `q` is prime.
    pub fn k(&self) -> usize {
        self.factors.len()
    }

    pub fn is_prime(&self) -> bool {
        self.factors.len() == 1
    }

    /// Builds a modulus directly from a list of distinct primes.
    pub fn from_primes(primes: &[u64]) -> Result<Self, ModMathError> {
        let mut q: u64 = 1;
        for &p in primes {
            if !is_prime(p) {
                return Err(ModMathError::OutOfRange("factor is not prime"));
            }
            q = q
                .checked_mul(p)
                .ok_or(ModMathError::Overflow("product of primes"))?;
        }
        factorize(q)
    }
}

/// Factors `q ≥ 2` into distinct primes by trial division.
///
/// Rejects moduli with a repeated prime factor: the composite-modulus
/// machinery in this crate (CRT residues, the pigeonhole factor step) is
/// only meaningful for square-free `q`.
pub fn factorize(q: u64) -> Result<Modulus, ModMathError> {
    if q < 2 {
        return Err(ModMathError::OutOfRange("modulus must be at least 2"));
    }
    let mut factors = Vec::new();
    let mut rest = q;
    let mut d: u64 = 2;
    while (d as u128) * (d as u128) <= rest as u128 {
        if rest.is_multiple_of(d) {
            rest /= d;
            if rest.is_multiple_of(d) {
                return Err(ModMathError::NotSquareFree(q, d));
            }
            factors.push(d);
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        factors.push(rest);
    }
    debug_assert!(factors.windows(2).all(|w| w[0] < w[1]));
    debug_assert_eq!(factors.iter().product::<u64>(), q);
    Ok(Modulus { q, factors })
}

/// Prime factorization with multiplicity (ascending). Unlike [`factorize`]
/// this accepts any `n ≥ 2`; used for reporting factors of arbitrary moduli.
pub fn prime_factors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut rest = n;
    let mut d: u64 = 2;
    while (d as u128) * (d as u128) <= rest as u128 {
        while rest.is_multiple_of(d) {
            out.push(d);
            rest /= d;
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        out.push(rest);
    }
    out
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc: u64 = 1;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, base, m);
        }
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic primality test for the full `u64` range.
///
/// Miller-Rabin with the witness set `{2, 3, 5, 7, 11, 13, 17, 19, 23, 29,
/// 31, 37}`, which decides primality exactly for all `n < 3.3 · 10^24`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    // n - 1 = d * 2^s with d odd
    let mut d = n - 1;
    let mut s = 0u32;
    while d & 1 == 0 {
        d >>= 1;
        s += 1;
    }
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// The smallest prime `p` with `p ≡ 1 (mod m)` and `p > lower_bound`.
pub fn dirichlet_prime(m: u64, lower_bound: u64) -> Result<u64, ModMathError> {
    if m < 2 {
        return Err(ModMathError::OutOfRange("progression modulus must be >= 2"));
    }
    // First candidate > lower_bound that is ≡ 1 (mod m).
    let start = lower_bound
        .checked_add(1)
        .ok_or(ModMathError::Overflow("progression start"))?;
    let rem = start % m;
    let offset = if rem <= 1 { 1 - rem } else { m + 1 - rem };
    let mut candidate = start
        .checked_add(offset)
        .ok_or(ModMathError::Overflow("progression start"))?;
    loop {
        if is_prime(candidate) {
            return Ok(candidate);
        }
        candidate = candidate
            .checked_add(m)
            .ok_or(ModMathError::Overflow("progression search"))?;
    }
}

/// Residues of `v` modulo each prime factor of `m`, in factor order.
///
/// Expects `0 ≤ v < m.q()`; then `v ≡ 0 (mod q)` iff every residue is 0.
pub fn crt_residues(v: u64, m: &Modulus) -> Vec<u64> {
    debug_assert!(v < m.q());
    m.factors().iter().map(|&p| v % p).collect()
}
