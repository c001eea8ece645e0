//! Deterministic inner-product encodings and the exhaustive verifier.
//!
//! An [`Encoding`] materializes both maps over the predicate's canonical
//! domain order: `x_vector(i)` is the vector for the element with canonical
//! index `i`. Every constructor here either provably satisfies
//! `P(x,y) = 1 ⟺ ⟨vx,vy⟩ ≡ 0 (mod q)` under its stated preconditions or is
//! meant to be run through [`verify`], which checks the equivalence over
//! every pair.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::modmath::{self, is_prime, Modulus};
use crate::predicates::{
    monomials, oreq_poly, threshold_poly, builtin_reduction, BuiltinReduction, Domain, Element,
    MultilinearPoly, Predicate, PredicateError, Reduction, DEFAULT_CELL_CAP,
};
use crate::zqlinalg::{factor_rank, LinAlgError, ZqMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EncodeError {
    #[error("modulus {q} is too small: this construction needs q >= {min}")]
    QTooSmall { q: u64, min: u64 },
    #[error("k = {k} prime factors exceed n = {n}")]
    KExceedsN { k: usize, n: usize },
    #[error("bad factor count: {0}")]
    BadK(String),
    #[error("overflow at {step}")]
    Overflow { step: String },
    #[error("matrix does not match the predicate's zero pattern mod {0}")]
    PatternMismatch(u64),
    #[error("modulus mismatch: expected {expected}, got {got}")]
    ModulusMismatch { expected: u64, got: u64 },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("bad encoding: {0}")]
    BadEncoding(String),
    #[error(transparent)]
    Predicate(#[from] PredicateError),
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
}

/// Inner product of two vectors modulo `q`.
pub fn inner_product(a: &[u64], b: &[u64], q: u64) -> u64 {
    debug_assert_eq!(a.len(), b.len());
    let q = q as u128;
    let mut acc: u128 = 0;
    for (&x, &y) in a.iter().zip(b) {
        acc = (acc + x as u128 * y as u128) % q;
    }
    acc as u64
}

/// A pair of maps `x ↦ vx`, `y ↦ vy` into `Z_q^length`, materialized over
/// the canonical domain orders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encoding {
    q: u64,
    length: usize,
    provenance: String,
    x_vectors: Vec<Vec<u64>>,
    y_vectors: Vec<Vec<u64>>,
}

impl Encoding {
    pub fn new(
        q: u64,
        length: usize,
        provenance: impl Into<String>,
        x_vectors: Vec<Vec<u64>>,
        y_vectors: Vec<Vec<u64>>,
    ) -> Result<Self, EncodeError> {
        if q < 2 {
            return Err(EncodeError::BadEncoding("modulus must be at least 2".into()));
        }
        for v in x_vectors.iter().chain(&y_vectors) {
            if v.len() != length {
                return Err(EncodeError::BadEncoding("vector length mismatch".into()));
            }
            if v.iter().any(|&e| e >= q) {
                return Err(EncodeError::BadEncoding("entry not reduced modulo q".into()));
            }
        }
        Ok(Encoding { q, length, provenance: provenance.into(), x_vectors, y_vectors })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn x_count(&self) -> usize {
        self.x_vectors.len()
    }

    pub fn y_count(&self) -> usize {
        self.y_vectors.len()
    }

    pub fn x_vector(&self, i: usize) -> &[u64] {
        &self.x_vectors[i]
    }

    pub fn y_vector(&self, i: usize) -> &[u64] {
        &self.y_vectors[i]
    }

    pub fn pair_inner_product(&self, xi: usize, yi: usize) -> u64 {
        inner_product(&self.x_vectors[xi], &self.y_vectors[yi], self.q)
    }
}

/// Disk shape: `{"q":Q,"factors":[..],"length":L,"provenance":"..",
/// "x":{"<index>":[..]},"y":{..}}`. Factors are the prime factorization of
/// `q` with multiplicity.
#[derive(Serialize, Deserialize)]
struct EncodingFile {
    factors: Vec<u64>,
    length: usize,
    provenance: String,
    q: u64,
    x: BTreeMap<String, Vec<u64>>,
    y: BTreeMap<String, Vec<u64>>,
}

impl Serialize for Encoding {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let to_map = |vectors: &[Vec<u64>]| {
            vectors
                .iter()
                .enumerate()
                .map(|(i, v)| (i.to_string(), v.clone()))
                .collect::<BTreeMap<_, _>>()
        };
        EncodingFile {
            factors: modmath::prime_factors(self.q),
            length: self.length,
            provenance: self.provenance.clone(),
            q: self.q,
            x: to_map(&self.x_vectors),
            y: to_map(&self.y_vectors),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Encoding {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let file = EncodingFile::deserialize(deserializer)?;
        let from_map = |map: BTreeMap<String, Vec<u64>>, side: &str| {
            let mut vectors = vec![None; map.len()];
            for (key, v) in map {
                let idx: usize = key
                    .parse()
                    .map_err(|_| D::Error::custom(format!("bad {side} index {key:?}")))?;
                if idx >= vectors.len() || vectors[idx].is_some() {
                    return Err(D::Error::custom(format!("{side} indices are not dense")));
                }
                vectors[idx] = Some(v);
            }
            Ok(vectors.into_iter().map(Option::unwrap).collect::<Vec<_>>())
        };
        let x = from_map(file.x, "x")?;
        let y = from_map(file.y, "y")?;
        Encoding::new(file.q, file.length, file.provenance, x, y)
            .map_err(|e| D::Error::custom(e.to_string()))
    }
}

/// A pair where `[⟨vx,vy⟩ = 0]` disagrees with the predicate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub x_index: u64,
    pub y_index: u64,
    pub inner_product: u64,
    /// The predicate's truth value for the pair.
    pub expected: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checked_pairs: u64,
    pub mismatches: Vec<Mismatch>,
}

impl VerificationReport {
    pub fn is_correct(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Exhaustively checks `P(x,y) = 1 ⟺ ⟨vx,vy⟩ ≡ 0 (mod q)` over every pair.
/// Mismatches are reported in (x, y) enumeration order, so the report is
/// identical however the pairs are scheduled.
pub fn verify(p: &Predicate, e: &Encoding) -> Result<VerificationReport, EncodeError> {
    verify_capped(p, e, DEFAULT_CELL_CAP)
}

pub fn verify_capped(
    p: &Predicate,
    e: &Encoding,
    cap: u64,
) -> Result<VerificationReport, EncodeError> {
    let pairs = p
        .pair_count()
        .ok_or(PredicateError::TooLarge { cells: u128::MAX, cap })?;
    if pairs > cap as u128 {
        return Err(PredicateError::TooLarge { cells: pairs, cap }.into());
    }
    let xs = p.x_domain().size().unwrap() as usize;
    let ys = p.y_domain().size().unwrap() as usize;
    if e.x_count() != xs || e.y_count() != ys {
        return Err(EncodeError::BadEncoding(format!(
            "encoding covers {}x{} elements, predicate needs {xs}x{ys}",
            e.x_count(),
            e.y_count()
        )));
    }
    let mut mismatches = Vec::new();
    for xi in 0..xs {
        for yi in 0..ys {
            let ip = e.pair_inner_product(xi, yi);
            let expected = p.eval_index(xi as u128, yi as u128);
            if (ip == 0) != expected {
                mismatches.push(Mismatch {
                    x_index: xi as u64,
                    y_index: yi as u64,
                    inner_product: ip,
                    expected,
                });
            }
        }
    }
    Ok(VerificationReport { checked_pairs: pairs as u64, mismatches })
}

/// Equality over `[n]` mod 2 with length `n`: `vx = e_x`, `vy = 1^n − e_y`.
pub fn encode_eq_mod2(n: usize) -> Result<Encoding, EncodeError> {
    Predicate::eq(n); // validates n >= 1 by construction
    let x_vectors: Vec<Vec<u64>> = (0..n)
        .map(|x| (0..n).map(|i| u64::from(i == x)).collect())
        .collect();
    let y_vectors: Vec<Vec<u64>> = (0..n)
        .map(|y| (0..n).map(|i| u64::from(i != y)).collect())
        .collect();
    Encoding::new(2, n, "eq_mod2", x_vectors, y_vectors)
}

/// Equality over `[n]` with `q ≥ n` and length 2: `vx = (1, x)`,
/// `vy = (y, −1)`; the inner product is `y − x`, which cannot wrap since
/// `|x − y| < n ≤ q`.
pub fn encode_eq_large_q(n: usize, q: u64) -> Result<Encoding, EncodeError> {
    if q < n as u64 {
        return Err(EncodeError::QTooSmall { q, min: n as u64 });
    }
    let x_vectors: Vec<Vec<u64>> = (1..=n as u64).map(|x| vec![1 % q, x % q]).collect();
    let y_vectors: Vec<Vec<u64>> = (1..=n as u64).map(|y| vec![y % q, q - 1]).collect();
    Encoding::new(q, 2, "eq_pair", x_vectors, y_vectors)
}

/// Data matrix for the block constructions: `n` is padded up to
/// `blocks * k` and the pad positions get `pad_bit`.
fn block_bits(word: u64, n: usize, blocks: usize, k: usize, pad_bit: u64) -> Vec<Vec<u64>> {
    (0..blocks)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let pos = i * k + j; // 0-based bit position
                    if pos < n {
                        word >> pos & 1
                    } else {
                        pad_bit
                    }
                })
                .collect()
        })
        .collect()
}

fn encode_index_impl(
    n: usize,
    m: &Modulus,
    set_bit: bool,
    provenance: &str,
) -> Result<Encoding, EncodeError> {
    let k = m.k();
    if k > n {
        return Err(EncodeError::KExceedsN { k, n });
    }
    let q = m.q();
    let blocks = n.div_ceil(k);
    let primes = m.factors();
    // Pad data bits with 1: padded positions are never indexed, and under
    // the complement exponent they contribute no prime factor.
    let x_vectors: Vec<Vec<u64>> = (0..1u64 << n)
        .map(|xi| {
            let Element::Bits { word, .. } = (Domain::Bitstrings { n }).element(xi as u128) else {
                unreachable!()
            };
            block_bits(word, n, blocks, k, 1)
                .iter()
                .map(|row| {
                    let mut acc: u128 = 1;
                    for (j, &bit) in row.iter().enumerate() {
                        let exp = if set_bit { bit } else { 1 - bit };
                        if exp == 1 {
                            acc = acc * primes[j] as u128 % q as u128;
                        }
                    }
                    acc as u64
                })
                .collect()
        })
        .collect();
    let y_vectors: Vec<Vec<u64>> = (1..=n)
        .map(|y| {
            let block = (y - 1) / k;
            let j = (y - 1) % k;
            let mut v = vec![0u64; blocks];
            v[block] = q / primes[j];
            v
        })
        .collect();
    Encoding::new(q, blocks, provenance, x_vectors, y_vectors)
}

/// The index predicate at a square-free modulus with `k ≤ n` prime
/// factors, length `⌈n/k⌉`: data bits are laid out as a `⌈n/k⌉ × k` matrix
/// `X`, `vx_i = Π_j p_j^{1−X_{i,j}}`, and `vy` puts `q/p_j` on the block
/// addressed by `y`.
///
/// The exponent `1−X` makes the product vanish mod `q` exactly when the
/// addressed bit is 0, which is the index predicate. See
/// [`encode_index_set_bit`] for the opposite convention.
pub fn encode_index(n: usize, m: &Modulus) -> Result<Encoding, EncodeError> {
    encode_index_impl(n, m, false, "index_blocks")
}

/// Same block construction with exponent `X_{i,j}` instead of `1−X_{i,j}`.
/// The inner product then vanishes exactly when the addressed bit is 1, so
/// this encodes the complement `[x_y = 1]`, not the index predicate.
pub fn encode_index_set_bit(n: usize, m: &Modulus) -> Result<Encoding, EncodeError> {
    encode_index_impl(n, m, true, "index_blocks_set_bit")
}

/// Disjointness with a self-selected modulus: picks `p_1 < … < p_k` by the
/// inductive recipe (`p_1` the smallest prime above `n`, each later `p_i`
/// the smallest prime exceeding `blocks · (p_1…p_{i−1})^2` that is
/// `≡ 1 mod p_1…p_{i−1}`) and encodes both sets as
/// `v_i = Π_j p_j^{1−X_{i,j}}` over `⌈n/k⌉` blocks.
pub fn encode_disj(n: usize, k: usize) -> Result<(Modulus, Encoding), EncodeError> {
    if k == 0 || k > n {
        return Err(EncodeError::BadK(format!("k must be in 1..={n}, got {k}")));
    }
    let blocks = n.div_ceil(k);
    let mut primes: Vec<u64> = Vec::with_capacity(k);
    let mut product: u64 = 1;
    for i in 0..k {
        let p = if i == 0 {
            let mut c = n as u64 + 1;
            while !is_prime(c) {
                c = c
                    .checked_add(1)
                    .ok_or(EncodeError::Overflow { step: "search for p_1".into() })?;
            }
            c
        } else {
            let lower = (blocks as u64)
                .checked_mul(product)
                .and_then(|v| v.checked_mul(product))
                .ok_or(EncodeError::Overflow { step: format!("lower bound for p_{}", i + 1) })?;
            modmath::dirichlet_prime(product, lower)
                .map_err(|_| EncodeError::Overflow { step: format!("search for p_{}", i + 1) })?
        };
        product = product
            .checked_mul(p)
            .ok_or(EncodeError::Overflow { step: format!("product p_1..p_{}", i + 1) })?;
        primes.push(p);
    }
    let m = Modulus::from_primes(&primes)
        .map_err(|e| EncodeError::Overflow { step: e.to_string() })?;
    let q = m.q();

    // Sets are padded with 0 bits: padded positions never intersect.
    let side: Vec<Vec<u64>> = (0..1u128 << n)
        .map(|i| {
            let Element::Set { mask, .. } = (Domain::Subsets { n }).element(i) else {
                unreachable!()
            };
            block_bits(mask, n, blocks, k, 0)
                .iter()
                .map(|row| {
                    let mut acc: u128 = 1;
                    for (j, &bit) in row.iter().enumerate() {
                        if bit == 0 {
                            acc = acc * primes[j] as u128 % q as u128;
                        }
                    }
                    acc as u64
                })
                .collect()
        })
        .collect();
    let enc = Encoding::new(q, blocks, "disj_primes", side.clone(), side)?;
    Ok((m, enc))
}

/// Greater-than at prime (in fact any) modulus, length `n`: `vx = e_x`,
/// `vy = Σ_{i≤y} e_i`, so the inner product is `[x ≤ y]`.
pub fn encode_gt_prime(n: usize, q: u64) -> Result<Encoding, EncodeError> {
    if q < 2 {
        return Err(EncodeError::QTooSmall { q, min: 2 });
    }
    let x_vectors: Vec<Vec<u64>> = (0..n)
        .map(|x| (0..n).map(|i| u64::from(i == x)).collect())
        .collect();
    let y_vectors: Vec<Vec<u64>> = (0..n)
        .map(|y| (0..n).map(|i| u64::from(i <= y)).collect())
        .collect();
    Encoding::new(q, n, "gt_prime", x_vectors, y_vectors)
}

/// Greater-than at a modulus with exactly `n` prime factors, length 1:
/// `vx = Π_{i<x} p_i`, `vy = Π_{i>y} p_i`; the product covers all of `q`
/// exactly when `x > y`.
pub fn encode_gt_kprimes(n: usize, m: &Modulus) -> Result<Encoding, EncodeError> {
    if m.k() != n {
        return Err(EncodeError::BadK(format!(
            "this form needs exactly n = {n} prime factors, modulus has {}",
            m.k()
        )));
    }
    let q = m.q();
    let primes = m.factors();
    let prefix = |upto: usize| {
        let mut acc: u128 = 1;
        for &p in &primes[..upto] {
            acc = acc * p as u128 % q as u128;
        }
        acc as u64
    };
    let suffix = |from: usize| {
        let mut acc: u128 = 1;
        for &p in &primes[from..] {
            acc = acc * p as u128 % q as u128;
        }
        acc as u64
    };
    let x_vectors: Vec<Vec<u64>> = (1..=n).map(|x| vec![prefix(x - 1)]).collect();
    let y_vectors: Vec<Vec<u64>> = (1..=n).map(|y| vec![suffix(y)]).collect();
    Encoding::new(q, 1, "gt_kprimes", x_vectors, y_vectors)
}

/// Greater-than at any square-free modulus via the index route, length
/// `⌈n/k⌉`.
pub fn encode_gt(n: usize, m: &Modulus) -> Result<Encoding, EncodeError> {
    let r = builtin_reduction(BuiltinReduction::IndexToGt { n })?;
    apply_reduction(&r, &encode_index(n, m)?)
}

/// Inequality at any square-free modulus via the index route, length
/// `⌈n/k⌉`.
pub fn encode_neq(n: usize, m: &Modulus) -> Result<Encoding, EncodeError> {
    let r = builtin_reduction(BuiltinReduction::IndexToNeq { n })?;
    apply_reduction(&r, &encode_index(n, m)?)
}

fn subset_masks(n: usize) -> impl Iterator<Item = u64> {
    (0..1u128 << n).map(move |i| {
        let Element::Set { mask, .. } = (Domain::Subsets { n }).element(i) else {
            unreachable!()
        };
        mask
    })
}

/// Exact threshold. Picks the shortest applicable form: length 2 for
/// `t = n`, the three-coordinate table for `t = n−1` when `q ≥ n+2` and it
/// is shorter than `n+1`, otherwise the general length-`n+1` form.
pub fn encode_ethr(n: usize, t: usize, q: u64) -> Result<Encoding, EncodeError> {
    Predicate::ethr(n, t)?;
    if t == n {
        return encode_ethr_full(n, q);
    }
    if t + 1 == n && q >= n as u64 + 2 && n + 1 > 3 {
        return encode_ethr_almost_full(n, q);
    }
    encode_ethr_general(n, t, q)
}

/// The general form regardless of `t`: `vx = (χ(S), 1)`,
/// `vy = (χ(T), −t)`, inner product `|S ∩ T| − t`. Needs `q ≥ n`, and
/// `q ≥ n+1` when `t = n` (otherwise `|∅ ∩ T| − n` wraps to 0 at `q = n`).
pub fn encode_ethr_general(n: usize, t: usize, q: u64) -> Result<Encoding, EncodeError> {
    Predicate::ethr(n, t)?;
    let min = if t == n { n as u64 + 1 } else { n as u64 };
    if q < min {
        return Err(EncodeError::QTooSmall { q, min });
    }
    let chi = |mask: u64| (0..n).map(|i| mask >> i & 1).collect::<Vec<u64>>();
    let x_vectors: Vec<Vec<u64>> = subset_masks(n)
        .map(|mask| {
            let mut v = chi(mask);
            v.push(1);
            v
        })
        .collect();
    let y_vectors: Vec<Vec<u64>> = subset_masks(n)
        .map(|mask| {
            let mut v = chi(mask);
            v.push(q - t as u64 % q);
            v
        })
        .collect();
    Encoding::new(q, n + 1, "ethr_plus_one", x_vectors, y_vectors)
}

/// `t = n`: `vx = (1, [S = [n]])`, `vy = (1, −[T = [n]])`, length 2.
fn encode_ethr_full(n: usize, q: u64) -> Result<Encoding, EncodeError> {
    if q < 2 {
        return Err(EncodeError::QTooSmall { q, min: 2 });
    }
    let full = (1u64 << n) - 1;
    let x_vectors: Vec<Vec<u64>> = subset_masks(n)
        .map(|mask| vec![1, u64::from(mask == full)])
        .collect();
    let y_vectors: Vec<Vec<u64>> = subset_masks(n)
        .map(|mask| vec![1, if mask == full { q - 1 } else { 0 }])
        .collect();
    Encoding::new(q, 2, "ethr_pair", x_vectors, y_vectors)
}

/// `t = n−1`: the three-coordinate table; needs `q ≥ n+2` so the sums
/// `i + 1 ≤ n + 1` stay non-zero.
fn encode_ethr_almost_full(n: usize, q: u64) -> Result<Encoding, EncodeError> {
    if q < n as u64 + 2 {
        return Err(EncodeError::QTooSmall { q, min: n as u64 + 2 });
    }
    let full = (1u64 << n) - 1;
    let x_vectors: Vec<Vec<u64>> = subset_masks(n)
        .map(|mask| {
            if mask == full {
                vec![1, 0, 0]
            } else if mask.count_ones() as usize == n - 1 {
                let i = (full ^ mask).trailing_zeros() as u64 + 1;
                vec![0, i, 1]
            } else {
                vec![1, q - 1, 1]
            }
        })
        .collect();
    let y_vectors: Vec<Vec<u64>> = subset_masks(n)
        .map(|mask| {
            if mask == full {
                vec![1, 0, 0]
            } else if mask.count_ones() as usize == n - 1 {
                let i = (full ^ mask).trailing_zeros() as u64 + 1;
                vec![0, 1, q - i]
            } else {
                vec![1, 1, 1]
            }
        })
        .collect();
    Encoding::new(q, 3, "ethr_three", x_vectors, y_vectors)
}

fn monomial_eval(mask: u64, v: &[u64], q: u64) -> u64 {
    let mut acc: u128 = 1;
    let mut bits = mask;
    while bits != 0 {
        let i = bits.trailing_zeros() as usize;
        acc = acc * (v[i] as u128) % q as u128;
        bits &= bits - 1;
    }
    acc as u64
}

fn mpoly_x_vector(monos: &[u64], v: &[u64], q: u64) -> Vec<u64> {
    monos.iter().map(|&m| monomial_eval(m, v, q)).collect()
}

fn mpoly_y_vector(monos: &[u64], p: &MultilinearPoly) -> Vec<u64> {
    monos.iter().map(|&m| p.coeff(m)).collect()
}

/// Multilinear polynomial evaluation, length `C(n, ≤d)`: `vx_S = X_S(x)`
/// and `vy_S = a_S`, so the inner product is exactly `p(x) mod q`.
pub fn encode_mpoly(n: usize, d: usize, q: u64) -> Result<Encoding, EncodeError> {
    encode_mpoly_capped(n, d, q, DEFAULT_CELL_CAP)
}

pub fn encode_mpoly_capped(
    n: usize,
    d: usize,
    q: u64,
    cap: u64,
) -> Result<Encoding, EncodeError> {
    let pred = Predicate::mpoly(n, d, q)?;
    let xd = pred.x_domain();
    let yd = pred.y_domain();
    let (Some(xs), Some(ys)) = (xd.size(), yd.size()) else {
        return Err(PredicateError::TooLarge { cells: u128::MAX, cap }.into());
    };
    if xs > cap as u128 || ys > cap as u128 {
        return Err(PredicateError::TooLarge { cells: xs.max(ys), cap }.into());
    }
    let monos = monomials(n, d);
    let x_vectors: Vec<Vec<u64>> = (0..xs)
        .map(|i| {
            let Element::Vector(v) = xd.element(i) else { unreachable!() };
            mpoly_x_vector(&monos, &v, q)
        })
        .collect();
    let y_vectors: Vec<Vec<u64>> = (0..ys)
        .map(|i| {
            let Element::Poly(p) = yd.element(i) else { unreachable!() };
            mpoly_y_vector(&monos, &p)
        })
        .collect();
    Encoding::new(q, monos.len(), "mpoly_monomials", x_vectors, y_vectors)
}

/// Threshold via the expanded threshold polynomial, length
/// `C(n, ≤ n−t+1)`. Needs a prime `q > n` so the non-vanishing factors
/// `|S∩T| − j` stay non-zero mod `q`.
pub fn encode_thr(n: usize, t: usize, q: u64) -> Result<Encoding, EncodeError> {
    Predicate::thr(n, t)?;
    if !is_prime(q) {
        return Err(EncodeError::NotPrime(q));
    }
    if q <= n as u64 {
        return Err(EncodeError::QTooSmall { q, min: n as u64 + 1 });
    }
    let monos = monomials(n, n - t + 1);
    let x_vectors: Vec<Vec<u64>> = subset_masks(n)
        .map(|mask| {
            let chi: Vec<u64> = (0..n).map(|i| mask >> i & 1).collect();
            mpoly_x_vector(&monos, &chi, q)
        })
        .collect();
    let y_vectors: Vec<Vec<u64>> = subset_masks(n)
        .map(|mask| mpoly_y_vector(&monos, &threshold_poly(n, t, q, mask)))
        .collect();
    Encoding::new(q, monos.len(), "thr_poly", x_vectors, y_vectors)
}

/// Disjunction of equality tests, length `2^n`: `vx_S = Π_{i∈S} x_i`,
/// `vy_S = Π_{i∉S} (−y_i)`, so the inner product is `Π (x_i − y_i)`.
/// The formula is total for any `q ≥ 2`; it represents the predicate when
/// `q` is prime (a product of non-zero factors can vanish mod a composite).
pub fn encode_oreq(n: usize, q: u64) -> Result<Encoding, EncodeError> {
    encode_oreq_capped(n, q, DEFAULT_CELL_CAP)
}

pub fn encode_oreq_capped(n: usize, q: u64, cap: u64) -> Result<Encoding, EncodeError> {
    let pred = Predicate::or_eq(n, q)?;
    let xd = pred.x_domain();
    let Some(xs) = xd.size() else {
        return Err(PredicateError::TooLarge { cells: u128::MAX, cap }.into());
    };
    if xs > cap as u128 {
        return Err(PredicateError::TooLarge { cells: xs, cap }.into());
    }
    let monos = monomials(n, n);
    let mut x_vectors = Vec::with_capacity(xs as usize);
    let mut y_vectors = Vec::with_capacity(xs as usize);
    for i in 0..xs {
        let Element::Vector(v) = xd.element(i) else { unreachable!() };
        x_vectors.push(mpoly_x_vector(&monos, &v, q));
        y_vectors.push(mpoly_y_vector(&monos, &oreq_poly(n, q, &v)));
    }
    Encoding::new(q, monos.len(), "oreq_product", x_vectors, y_vectors)
}

/// The constructive half of the rank characterization: factor a matrix
/// that represents `P` mod a prime into `F = U·V` and read the encoding
/// off the rows of `U` and columns of `V`; the length equals `rank(F)`.
pub fn encode_from_matrix(
    pred: &Predicate,
    f: &ZqMatrix,
    p: u64,
) -> Result<Encoding, EncodeError> {
    let z = pred.zero_pattern()?;
    if !z.matches(f, p) {
        return Err(EncodeError::PatternMismatch(p));
    }
    let fact = factor_rank(f, p)?;
    let x_vectors: Vec<Vec<u64>> = (0..fact.u.rows())
        .map(|r| (0..fact.rank).map(|c| fact.u.get(r, c)).collect())
        .collect();
    let y_vectors: Vec<Vec<u64>> = (0..fact.v.cols())
        .map(|c| (0..fact.rank).map(|r| fact.v.get(r, c)).collect())
        .collect();
    Encoding::new(p, fact.rank, "matrix_rank_factorization", x_vectors, y_vectors)
}

/// Transports an encoding of the reduction's target predicate to its
/// source: `vx(x) = e(f(x))`, `vy(y) = e(g(y))` (sides crossed when the
/// reduction is swapped). Length and modulus are preserved exactly.
pub fn apply_reduction(r: &Reduction, e: &Encoding) -> Result<Encoding, EncodeError> {
    apply_reduction_capped(r, e, DEFAULT_CELL_CAP)
}

pub fn apply_reduction_capped(
    r: &Reduction,
    e: &Encoding,
    cap: u64,
) -> Result<Encoding, EncodeError> {
    if let Some(q) = r.target().embedded_modulus() {
        if q != e.q() {
            return Err(EncodeError::ModulusMismatch { expected: q, got: e.q() });
        }
    }
    let (tx, ty) = (r.target().x_domain(), r.target().y_domain());
    let sizes_ok = tx.size().is_some_and(|s| s == e.x_count() as u128)
        && ty.size().is_some_and(|s| s == e.y_count() as u128);
    if !sizes_ok {
        return Err(EncodeError::BadEncoding(
            "encoding does not cover the reduction target's domains".into(),
        ));
    }
    let (sx, sy) = (r.source().x_domain(), r.source().y_domain());
    let (Some(sxs), Some(sys)) = (sx.size(), sy.size()) else {
        return Err(PredicateError::TooLarge { cells: u128::MAX, cap }.into());
    };
    if sxs > cap as u128 || sys > cap as u128 {
        return Err(PredicateError::TooLarge { cells: sxs.max(sys), cap }.into());
    }
    let lookup = |mapped: Element, into_y: bool| -> Result<Vec<u64>, EncodeError> {
        let idx = if into_y {
            ty.index_of(&mapped)
        } else {
            tx.index_of(&mapped)
        }
        .ok_or(PredicateError::DomainMismatch)?;
        Ok(if into_y {
            e.y_vector(idx as usize).to_vec()
        } else {
            e.x_vector(idx as usize).to_vec()
        })
    };
    let mut x_vectors = Vec::with_capacity(sxs as usize);
    for i in 0..sxs {
        let fx = r.map_x(&sx.element(i))?;
        x_vectors.push(lookup(fx, r.swapped())?);
    }
    let mut y_vectors = Vec::with_capacity(sys as usize);
    for i in 0..sys {
        let gy = r.map_y(&sy.element(i))?;
        y_vectors.push(lookup(gy, !r.swapped())?);
    }
    let provenance = format!(
        "reduce({}=>{}):{}",
        r.target().id(),
        r.source().id(),
        e.provenance()
    );
    Encoding::new(e.q(), e.length(), provenance, x_vectors, y_vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modmath::factorize;
    use crate::rng::DetRng;

    fn assert_verifies(p: &Predicate, e: &Encoding) {
        let report = verify(p, e).unwrap();
        assert!(
            report.is_correct(),
            "{} has {} mismatches (first: {:?})",
            e.provenance(),
            report.mismatches.len(),
            report.mismatches.first()
        );
    }

    #[test]
    fn eq_mod2_examples() {
        let e = encode_eq_mod2(3).unwrap();
        // x = y = 2: vx = (0,1,0), vy = (1,0,1), ip = 0.
        assert_eq!(e.x_vector(1), &[0, 1, 0]);
        assert_eq!(e.y_vector(1), &[1, 0, 1]);
        assert_eq!(e.pair_inner_product(1, 1), 0);
        assert_eq!(e.pair_inner_product(0, 1), 1);
        assert_verifies(&Predicate::eq(3), &e);
        // n = 1: both maps are constant and the product is always 0.
        let e1 = encode_eq_mod2(1).unwrap();
        assert_eq!(e1.pair_inner_product(0, 0), 0);
    }

    #[test]
    fn eq_large_q_examples() {
        let e = encode_eq_large_q(3, 5).unwrap();
        assert_eq!(e.pair_inner_product(2, 2), 0); // x = y = 3
        assert_eq!(e.pair_inner_product(0, 2), 2); // x = 1, y = 3
        assert_verifies(&Predicate::eq(3), &e);
        // Boundary q = n still works since |x - y| <= n - 1 < q.
        let e = encode_eq_large_q(5, 5).unwrap();
        assert_verifies(&Predicate::eq(5), &e);
        assert_eq!(
            encode_eq_large_q(6, 5),
            Err(EncodeError::QTooSmall { q: 5, min: 6 })
        );
    }

    #[test]
    fn index_blocks_verify_and_warmup_values() {
        let m6 = factorize(6).unwrap();
        let index = Predicate::index(2).unwrap();
        let e = encode_index(2, &m6).unwrap();
        assert_eq!(e.length(), 1);
        assert_verifies(&index, &e);

        // Warm-up values: x = "10" gives vx = 2^0 * 3^1 = 3; y = 1 gives
        // vy = q/p_1 = 3; the product 9 ≡ 3 mod 6 is non-zero and
        // INDEX("10", 1) = false.
        let xd = Domain::Bitstrings { n: 2 };
        let xi = xd.index_of(&Element::bits_from_slice(&[1, 0])).unwrap() as usize;
        assert_eq!(e.x_vector(xi), &[3]);
        assert_eq!(e.y_vector(0), &[3]);
        assert_eq!(e.pair_inner_product(xi, 0), 3);

        // Every y vector has exactly one non-zero coordinate.
        let m30 = factorize(30).unwrap();
        let e = encode_index(7, &m30).unwrap();
        assert_eq!(e.length(), 3); // ceil(7/3), padding in play
        assert_verifies(&Predicate::index(7).unwrap(), &e);
        for yi in 0..e.y_count() {
            let nonzero = e.y_vector(yi).iter().filter(|&&v| v != 0).count();
            assert_eq!(nonzero, 1);
        }
    }

    #[test]
    fn index_exponent_conventions_encode_complements() {
        // With exponent 1 - X the product vanishes iff the addressed bit
        // is 0 (the index predicate); with exponent X it vanishes iff the
        // bit is 1. The two conventions disagree on every pair.
        let m6 = factorize(6).unwrap();
        for n in [2usize, 3, 4] {
            let index = Predicate::index(n).unwrap();
            let e = encode_index(n, &m6).unwrap();
            assert_verifies(&index, &e);

            let e_set = encode_index_set_bit(n, &m6).unwrap();
            let against_index = verify(&index, &e_set).unwrap();
            assert_eq!(against_index.mismatches.len() as u64, against_index.checked_pairs);

            // It encodes the complement truth table exactly.
            let bits: Vec<bool> = (0..1u128 << n)
                .flat_map(|xi| {
                    (0..n as u128).map(move |yi| (xi, yi))
                })
                .map(|(xi, yi)| !index.eval_index(xi, yi))
                .collect();
            let complement = Predicate::table(1 << n, n, bits).unwrap();
            assert_verifies(&complement, &e_set);
        }
    }

    #[test]
    fn disj_selects_minimal_primes() {
        let (m, e) = encode_disj(4, 1).unwrap();
        assert_eq!(m.q(), 5);
        assert_eq!(e.length(), 4);
        assert_verifies(&Predicate::disj(4).unwrap(), &e);

        let (m, e) = encode_disj(4, 2).unwrap();
        assert_eq!(m.factors(), &[5, 61]);
        assert_eq!(m.q(), 305);
        assert_eq!(e.length(), 2);
        // S = {1}, T = {2}: vx = (61, 0), vy = (5, 0), ip = 305 ≡ 0.
        let d = Domain::Subsets { n: 4 };
        let s = d.index_of(&Element::set_from_members(4, &[1])).unwrap() as usize;
        let t = d.index_of(&Element::set_from_members(4, &[2])).unwrap() as usize;
        assert_eq!(e.x_vector(s), &[61, 0]);
        assert_eq!(e.y_vector(t), &[5, 0]);
        assert_eq!(e.pair_inner_product(s, t), 0);
        assert_verifies(&Predicate::disj(4).unwrap(), &e);

        // k = n: length 1, disjoint iff the product covers all primes.
        let (_, e) = encode_disj(3, 3).unwrap();
        assert_eq!(e.length(), 1);
        assert_verifies(&Predicate::disj(3).unwrap(), &e);

        // Three-prime tower with padding (k does not divide n).
        let (m, e) = encode_disj(5, 3).unwrap();
        assert_eq!(m.k(), 3);
        assert_eq!(e.length(), 2);
        assert_verifies(&Predicate::disj(5).unwrap(), &e);
    }

    #[test]
    fn gt_prime_examples() {
        let e = encode_gt_prime(3, 5).unwrap();
        assert_eq!(e.pair_inner_product(2, 1), 0); // 3 > 2
        assert_eq!(e.pair_inner_product(1, 1), 1); // 2 > 2 is false
        for y in 0..3 {
            assert_eq!(e.pair_inner_product(0, y), 1); // 1 is never greater
        }
        assert_verifies(&Predicate::gt(3), &e);
    }

    #[test]
    fn gt_kprimes_examples() {
        let m6 = factorize(6).unwrap();
        let e = encode_gt_kprimes(2, &m6).unwrap();
        assert_eq!(e.length(), 1);
        // x=2, y=1: vx = 2, vy = 3, product 6 ≡ 0.
        assert_eq!(e.x_vector(1), &[2]);
        assert_eq!(e.y_vector(0), &[3]);
        assert_eq!(e.pair_inner_product(1, 0), 0);
        // x=1: vx is the empty product 1; against y=1 the product is 3.
        assert_eq!(e.pair_inner_product(0, 0), 3);
        // x=1, y=n: both empty products, ip = 1.
        assert_eq!(e.pair_inner_product(0, 1), 1);
        assert_verifies(&Predicate::gt(2), &e);

        let m30 = factorize(30).unwrap();
        assert_verifies(&Predicate::gt(3), &encode_gt_kprimes(3, &m30).unwrap());
        assert!(matches!(encode_gt_kprimes(4, &m30), Err(EncodeError::BadK(_))));
    }

    #[test]
    fn gt_composite_via_index() {
        let m30 = factorize(30).unwrap();
        let e = encode_gt(6, &m30).unwrap();
        assert_eq!(e.length(), 2);
        assert_verifies(&Predicate::gt(6), &e);
    }

    #[test]
    fn neq_via_index() {
        let m11 = factorize(11).unwrap();
        let e = encode_neq(5, &m11).unwrap();
        assert_eq!(e.length(), 5);
        assert_verifies(&Predicate::neq(5), &e);
        let m30 = factorize(30).unwrap();
        let e = encode_neq(6, &m30).unwrap();
        assert_eq!(e.length(), 2);
        assert_verifies(&Predicate::neq(6), &e);
    }

    #[test]
    fn ethr_general_example() {
        // n=2, t=1, q=5, S={1}, T={1,2}: vx=(1,0,1), vy=(1,1,4), ip ≡ 0.
        let e = encode_ethr(2, 1, 5).unwrap();
        assert_eq!(e.length(), 3);
        assert_eq!(e.provenance(), "ethr_plus_one");
        let d = Domain::Subsets { n: 2 };
        let s = d.index_of(&Element::set_from_members(2, &[1])).unwrap() as usize;
        let t = d.index_of(&Element::set_from_members(2, &[1, 2])).unwrap() as usize;
        assert_eq!(e.x_vector(s), &[1, 0, 1]);
        assert_eq!(e.y_vector(t), &[1, 1, 4]);
        assert_eq!(e.pair_inner_product(s, t), 0);
        assert_verifies(&Predicate::ethr(2, 1).unwrap(), &e);
    }

    #[test]
    fn ethr_full_form() {
        // t = n: (1, [S=[n]]) · (1, -[T=[n]]) = 1 - [S=[n]][T=[n]].
        let e = encode_ethr(3, 3, 7).unwrap();
        assert_eq!(e.length(), 2);
        assert_eq!(e.provenance(), "ethr_pair");
        let full = (1u128 << 3) - 1;
        assert_eq!(e.pair_inner_product(full as usize, full as usize), 0);
        assert_verifies(&Predicate::ethr(3, 3).unwrap(), &e);
    }

    #[test]
    fn ethr_almost_full_form() {
        // t = n-1 = 2, n = 3, q = 7: S = [3]\{2} has vx = (0,2,1); T = [3]
        // has vy = (1,0,0); ip = 0 and the intersection size is 2.
        let e = encode_ethr(3, 2, 7).unwrap();
        assert_eq!(e.length(), 3);
        assert_eq!(e.provenance(), "ethr_three");
        let d = Domain::Subsets { n: 3 };
        let s = d.index_of(&Element::set_from_members(3, &[1, 3])).unwrap() as usize;
        let t = d.index_of(&Element::set_from_members(3, &[1, 2, 3])).unwrap() as usize;
        assert_eq!(e.x_vector(s), &[0, 2, 1]);
        assert_eq!(e.y_vector(t), &[1, 0, 0]);
        assert_eq!(e.pair_inner_product(s, t), 0);
        assert_verifies(&Predicate::ethr(3, 2).unwrap(), &e);
        // Too-small q falls back to the general form.
        let e = encode_ethr(4, 3, 5).unwrap();
        assert_eq!(e.provenance(), "ethr_plus_one");
        assert_verifies(&Predicate::ethr(4, 3).unwrap(), &e);
    }

    #[test]
    fn ethr_too_small_q() {
        assert_eq!(
            encode_ethr_general(5, 2, 4),
            Err(EncodeError::QTooSmall { q: 4, min: 5 })
        );
        // t = n needs one more than n in the general form.
        assert_eq!(
            encode_ethr_general(5, 5, 5),
            Err(EncodeError::QTooSmall { q: 5, min: 6 })
        );
        assert_verifies(
            &Predicate::ethr(5, 5).unwrap(),
            &encode_ethr_general(5, 5, 6).unwrap(),
        );
    }

    #[test]
    fn mpoly_examples() {
        // n=2, d=1, q=3, p = x_1 + 2 at x = (1,0): vx = (1,1,0),
        // vy = (2,1,0), ip = 3 ≡ 0 and p(x) ≡ 0.
        let e = encode_mpoly(2, 1, 3).unwrap();
        assert_eq!(e.length(), 3);
        let pred = Predicate::mpoly(2, 1, 3).unwrap();
        let xd = pred.x_domain();
        let yd = pred.y_domain();
        let xi = xd.index_of(&Element::Vector(vec![1, 0])).unwrap() as usize;
        let poly = MultilinearPoly::new(2, 3, BTreeMap::from([(0, 2), (0b01, 1)])).unwrap();
        let yi = yd.index_of(&Element::Poly(poly)).unwrap() as usize;
        assert_eq!(e.x_vector(xi), &[1, 1, 0]);
        assert_eq!(e.y_vector(yi), &[2, 1, 0]);
        assert_eq!(e.pair_inner_product(xi, yi), 0);
        assert_verifies(&pred, &e);

        // Zero polynomial: all-zero vy, inner product 0 for every x.
        let zero_yi = yd.index_of(&Element::Poly(MultilinearPoly::zero(2, 3))).unwrap() as usize;
        assert!(e.y_vector(zero_yi).iter().all(|&v| v == 0));

        // Non-zero constant c: ip = c for every x.
        let c_poly = MultilinearPoly::new(2, 3, BTreeMap::from([(0, 2)])).unwrap();
        let c_yi = yd.index_of(&Element::Poly(c_poly)).unwrap() as usize;
        for xi in 0..e.x_count() {
            assert_eq!(e.pair_inner_product(xi, c_yi), 2);
        }
    }

    #[test]
    fn thr_lengths_and_verify() {
        // n=4, t=3: length C(4, <=2) = 11.
        let e = encode_thr(4, 3, 5).unwrap();
        assert_eq!(e.length(), 11);
        assert_verifies(&Predicate::thr(4, 3).unwrap(), &e);
        // Smallest admissible prime: q = 3 > n = 2.
        assert_verifies(&Predicate::thr(2, 1).unwrap(), &encode_thr(2, 1, 3).unwrap());
        assert_eq!(encode_thr(4, 1, 6), Err(EncodeError::NotPrime(6)));
        assert_eq!(
            encode_thr(4, 1, 3),
            Err(EncodeError::QTooSmall { q: 3, min: 5 })
        );
    }

    #[test]
    fn oreq_examples() {
        // n=1, q=3: vx = (1, x_1), vy = (-y_1, 1).
        let e = encode_oreq(1, 3).unwrap();
        assert_eq!(e.length(), 2);
        let pred = Predicate::or_eq(1, 3).unwrap();
        let xd = pred.x_domain();
        let xi = xd.index_of(&Element::Vector(vec![2])).unwrap() as usize;
        assert_eq!(e.x_vector(xi), &[1, 2]);
        let yi = xd.index_of(&Element::Vector(vec![2])).unwrap() as usize;
        assert_eq!(e.y_vector(yi), &[1, 1]); // (-2 mod 3, 1)
        assert_verifies(&pred, &e);

        // n=2, q=3, x=(1,2), y=(1,0): matches on the first coordinate.
        let e = encode_oreq(2, 3).unwrap();
        let pred = Predicate::or_eq(2, 3).unwrap();
        let xd = pred.x_domain();
        let xi = xd.index_of(&Element::Vector(vec![1, 2])).unwrap() as usize;
        let yi = xd.index_of(&Element::Vector(vec![1, 0])).unwrap() as usize;
        assert_eq!(e.pair_inner_product(xi, yi), 0);
        assert_verifies(&pred, &e);
    }

    #[test]
    fn from_matrix_examples() {
        // J_3 - I_3 over Z_2 represents EQ_3 and has rank 2.
        let mut f = ZqMatrix::ones(3, 2);
        for i in 0..3 {
            f.set(i, i, 0);
        }
        let e = encode_from_matrix(&Predicate::eq(3), &f, 2).unwrap();
        assert_eq!(e.length(), 2);
        assert_verifies(&Predicate::eq(3), &e);

        // Identity mod 3 represents NEQ_3 with rank 3.
        let e = encode_from_matrix(&Predicate::neq(3), &ZqMatrix::identity(3, 3), 3).unwrap();
        assert_eq!(e.length(), 3);
        assert_verifies(&Predicate::neq(3), &e);

        // Upper-triangular all-ones mod 5 represents GT_3 with full rank.
        let mut f = ZqMatrix::zero(3, 3, 5);
        for r in 0..3 {
            for c in r..3 {
                f.set(r, c, 1);
            }
        }
        let e = encode_from_matrix(&Predicate::gt(3), &f, 5).unwrap();
        assert_eq!(e.length(), 3);
        assert_verifies(&Predicate::gt(3), &e);

        // A matrix violating the pattern is rejected.
        let wrong = ZqMatrix::identity(3, 3);
        assert_eq!(
            encode_from_matrix(&Predicate::eq(3), &wrong, 3),
            Err(EncodeError::PatternMismatch(3))
        );
    }

    #[test]
    fn reduction_examples() {
        // NEQ_3 from INDEX_3 at prime q = 5: length 3, exhaustively correct.
        let m5 = factorize(5).unwrap();
        let r = builtin_reduction(BuiltinReduction::IndexToNeq { n: 3 }).unwrap();
        let e = apply_reduction(&r, &encode_index(3, &m5).unwrap()).unwrap();
        assert_eq!(e.length(), 3);
        assert_verifies(&Predicate::neq(3), &e);

        // GT_2 from INDEX_2 at q = 6: length 1.
        let m6 = factorize(6).unwrap();
        let r = builtin_reduction(BuiltinReduction::IndexToGt { n: 2 }).unwrap();
        let e = apply_reduction(&r, &encode_index(2, &m6).unwrap()).unwrap();
        assert_eq!(e.length(), 1);
        assert_verifies(&Predicate::gt(2), &e);

        // Identity returns the same tables.
        let gt = encode_gt_prime(4, 7).unwrap();
        let rid = builtin_reduction(BuiltinReduction::Identity { pred: Predicate::gt(4) }).unwrap();
        let e = apply_reduction(&rid, &gt).unwrap();
        assert_eq!(e.length(), gt.length());
        for i in 0..e.x_count() {
            assert_eq!(e.x_vector(i), gt.x_vector(i));
        }

        // Length is preserved by construction.
        let r = builtin_reduction(BuiltinReduction::DisjToIndex { n: 4 }).unwrap();
        let (_, disj) = encode_disj(4, 2).unwrap();
        let e = apply_reduction(&r, &disj).unwrap();
        assert_eq!(e.length(), disj.length());
        assert_verifies(&Predicate::index(4).unwrap(), &e);
    }

    #[test]
    fn reduction_modulus_mismatch() {
        let r = builtin_reduction(BuiltinReduction::MpolyToOrEq { n: 2, q: 3 }).unwrap();
        let e = encode_mpoly(2, 2, 5).unwrap();
        assert_eq!(
            apply_reduction(&r, &e),
            Err(EncodeError::ModulusMismatch { expected: 3, got: 5 })
        );
    }

    #[test]
    fn verify_reports_corrupted_pairs() {
        let mut e = encode_gt_prime(3, 5).unwrap();
        // Corrupt the vector of x = 2 (index 1): exactly its row of pairs
        // can mismatch, and at least one does.
        e.x_vectors[1] = vec![4, 4, 4];
        let report = verify(&Predicate::gt(3), &e).unwrap();
        assert!(!report.is_correct());
        assert!(report.mismatches.iter().all(|m| m.x_index == 1));
        assert!(!report.mismatches.is_empty());
        // Mismatches are sorted by (x, y).
        let sorted: Vec<_> = report
            .mismatches
            .iter()
            .map(|m| (m.x_index, m.y_index))
            .collect();
        let mut resorted = sorted.clone();
        resorted.sort_unstable();
        assert_eq!(sorted, resorted);
    }

    #[test]
    fn verify_rejects_wrong_shape() {
        let e = encode_gt_prime(3, 5).unwrap();
        assert!(matches!(
            verify(&Predicate::gt(4), &e),
            Err(EncodeError::BadEncoding(_))
        ));
        assert!(matches!(
            verify(&Predicate::or_eq(4, 7).unwrap(), &e),
            Err(EncodeError::Predicate(PredicateError::TooLarge { .. })) | Err(EncodeError::BadEncoding(_))
        ));
    }

    #[test]
    fn encoding_json_roundtrip() {
        let e = encode_gt_prime(3, 11).unwrap();
        let s = serde_json::to_string(&e).unwrap();
        let back: Encoding = serde_json::from_str(&s).unwrap();
        assert_eq!(e, back);
        assert!(s.contains("\"factors\":[11]"));
        assert!(s.contains("\"provenance\":\"gt_prime\""));

        // Sparse or inconsistent files are rejected.
        let bad = r#"{"factors":[5],"length":1,"provenance":"x","q":5,"x":{"0":[1],"2":[2]},"y":{"0":[0]}}"#;
        assert!(serde_json::from_str::<Encoding>(bad).is_err());
        let bad = r#"{"factors":[5],"length":1,"provenance":"x","q":5,"x":{"0":[7]},"y":{"0":[0]}}"#;
        assert!(serde_json::from_str::<Encoding>(bad).is_err());
    }

    #[test]
    fn matrix_derived_length_never_exceeds_hand_construction() {
        // The Gram matrix of a correct encoding represents the predicate,
        // and its rank is at most the encoding length, so re-deriving an
        // encoding from it can only shorten.
        let cases: Vec<(Predicate, Encoding)> = vec![
            (Predicate::gt(4), encode_gt_prime(4, 5).unwrap()),
            (Predicate::eq(4), encode_eq_mod2(4).unwrap()),
            (Predicate::eq(4), encode_eq_large_q(4, 5).unwrap()),
            (Predicate::ethr(3, 1).unwrap(), encode_ethr_general(3, 1, 5).unwrap()),
        ];
        for (pred, hand) in cases {
            let p = hand.q();
            let xs = hand.x_count();
            let ys = hand.y_count();
            let mut gram = ZqMatrix::zero(xs, ys, p);
            for xi in 0..xs {
                for yi in 0..ys {
                    gram.set(xi, yi, hand.pair_inner_product(xi, yi));
                }
            }
            let derived = encode_from_matrix(&pred, &gram, p).unwrap();
            assert!(
                derived.length() <= hand.length(),
                "{}: derived {} > hand {}",
                hand.provenance(),
                derived.length(),
                hand.length()
            );
            assert_verifies(&pred, &derived);
        }
    }

    #[test]
    fn crt_zero_test_on_random_vectors() {
        // ⟨vx,vy⟩ ≡ 0 mod q iff it is ≡ 0 mod every prime factor.
        let mut rng = DetRng::new(0xc47);
        for q in [6u64, 30, 105] {
            let m = factorize(q).unwrap();
            for _ in 0..200 {
                let len = 1 + rng.next_below(6) as usize;
                let a: Vec<u64> = (0..len).map(|_| rng.next_below(q)).collect();
                let b: Vec<u64> = (0..len).map(|_| rng.next_below(q)).collect();
                let ip = inner_product(&a, &b, q);
                let all_zero = modmath::crt_residues(ip, &m).iter().all(|&r| r == 0);
                assert_eq!(ip == 0, all_zero);
            }
        }
    }
}
