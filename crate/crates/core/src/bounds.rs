//! Lower-bound certificates on encoding length.
//!
//! Every encoding of `P` mod `q` induces a matrix `F` (the inner products)
//! that is zero exactly on the true cells of `P` — the [`ZeroPattern`].
//! For prime `q`, the minimum encoding length equals the minimum rank of a
//! matrix matching the pattern ([`min_rank_oracle`] computes it exactly on
//! small instances). For square-free composite `q`, a triangular pattern
//! with a forced non-zero diagonal of side `n` yields a `⌈n/k⌉` bound via
//! the CRT pigeonhole argument. Bounds travel upward through reductions.
//!
//! Certificates carry a machine-checkable witness; [`check`] replays the
//! witness from scratch and accepts only if the bound is re-derived.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::modmath::{is_prime, Modulus};
use crate::predicates::{
    binomial, binomial_sum, builtin_reduction, BuiltinReduction, Predicate, PredicateError,
    Reduction, DEFAULT_CELL_CAP,
};
use crate::zqlinalg::{rank_mod_p, ZqMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("enumeration needs {needed} assignments, cap is {cap}")]
    CapExceeded { needed: u128, cap: u128 },
    #[error("{cells} free cells exceed the budget of {budget}")]
    FreeCellBudget { cells: usize, budget: usize },
    #[error("pattern is not triangular with a forced non-zero diagonal under the given orders")]
    NotTriangularPattern,
    #[error("pattern is not a diagonal non-zero pattern")]
    NotDiagonalPattern,
    #[error("reduction could not be verified: {0}")]
    UnverifiedReduction(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("modulus mismatch: expected {expected}, got {got}")]
    ModulusMismatch { expected: u64, got: u64 },
    #[error(transparent)]
    Predicate(#[from] PredicateError),
}

/// The forced zero/non-zero layout every representing matrix must match:
/// `forced_zero(x, y)` is true exactly where the predicate is true.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroPattern {
    rows: usize,
    cols: usize,
    forced_zero: Vec<bool>,
}

impl ZeroPattern {
    pub fn new(rows: usize, cols: usize, forced_zero: Vec<bool>) -> Self {
        assert_eq!(forced_zero.len(), rows * cols, "incomplete pattern");
        ZeroPattern { rows, cols, forced_zero }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_forced_zero(&self, r: usize, c: usize) -> bool {
        self.forced_zero[r * self.cols + c]
    }

    /// Positions that must hold a non-zero value.
    pub fn nonzero_cells(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for r in 0..self.rows {
            for c in 0..self.cols {
                if !self.is_forced_zero(r, c) {
                    out.push((r, c));
                }
            }
        }
        out
    }

    /// Whether `f` (entries taken mod `modulus`) realizes this pattern.
    pub fn matches(&self, f: &ZqMatrix, modulus: u64) -> bool {
        if f.rows() != self.rows || f.cols() != self.cols {
            return false;
        }
        for r in 0..self.rows {
            for c in 0..self.cols {
                if f.get(r, c).is_multiple_of(modulus) != self.is_forced_zero(r, c) {
                    return false;
                }
            }
        }
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    ExactMinRank,
    TriangularPigeonhole,
    DiagonalNonzero,
    ReductionLift,
    #[serde(rename = "CountingMPOLY")]
    CountingMpoly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Witness {
    /// Replay: rerun the exact oracle at prime `p` under the same cap.
    MinRank { p: u64, max_assignments: u128 },
    /// Replay: confirm the pattern is triangular under these orders.
    Triangular { row_order: Vec<usize>, col_order: Vec<usize> },
    /// Replay: confirm forced non-zero exactly at `(r, col_of_row[r])`.
    Diagonal { col_of_row: Vec<usize> },
    /// Replay: re-verify the reduction exhaustively, then check the inner
    /// certificate against the source predicate's own pattern.
    Lift { reduction: BuiltinReduction, inner: Box<Certificate> },
    /// Replay: the injective-map count `q^bound ≥ q^C(n,≤d)`.
    Counting { n: usize, d: usize },
}

/// A lower-bound claim `DI(P, q) ≥ bound` with a machine-checkable witness.
///
/// Bounds that arise as `x/k` are stored `⌈x/k⌉`-resolved: encoding lengths
/// are integers, so the ceiling is the comparable form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub predicate: Predicate,
    pub q: u64,
    pub bound: u64,
    pub method: Method,
    pub witness: Witness,
}

/// Caps for the exact oracle enumeration.
#[derive(Debug, Clone, Copy)]
pub struct OracleCap {
    /// Budget on the number of free (forced non-zero) cells, if any.
    pub max_free_cells: Option<usize>,
    /// Budget on `(p-1)^cells` total assignments.
    pub max_assignments: u128,
}

impl Default for OracleCap {
    fn default() -> Self {
        OracleCap { max_free_cells: None, max_assignments: 1 << 24 }
    }
}

/// Size of a triangular sub-pattern found greedily: a valid lower bound on
/// the rank of every matrix matching `z` over any prime, used to
/// short-circuit the oracle. Exactness never depends on it.
fn greedy_triangular_size(z: &ZeroPattern) -> usize {
    let mut row_used = vec![false; z.rows];
    let mut col_used = vec![false; z.cols];
    let mut cols_sel: Vec<usize> = Vec::new();
    loop {
        let mut extended = false;
        'scan: for r in 0..z.rows {
            if row_used[r] {
                continue;
            }
            for c in 0..z.cols {
                if col_used[c] || z.is_forced_zero(r, c) {
                    continue;
                }
                if cols_sel.iter().all(|&cj| z.is_forced_zero(r, cj)) {
                    row_used[r] = true;
                    col_used[c] = true;
                    cols_sel.push(c);
                    extended = true;
                    break 'scan;
                }
            }
        }
        if !extended {
            return cols_sel.len();
        }
    }
}

/// Exact minimum of `rank_mod_p(F, p)` over every matrix `F` matching the
/// pattern (forced-zero cells are 0; each forced non-zero cell ranges over
/// `Z_p \ {0}`). For prime `q = p` this equals the minimum encoding length.
///
/// Enumeration walks assignments in odometer order and stops early once the
/// running minimum meets the greedy triangular lower bound; partitioning
/// the assignment range across workers would return the same exact minimum.
pub fn min_rank_oracle(z: &ZeroPattern, p: u64, cap: &OracleCap) -> Result<u64, BoundsError> {
    if !is_prime(p) {
        return Err(BoundsError::NotPrime(p));
    }
    let cells = z.nonzero_cells();
    if let Some(budget) = cap.max_free_cells {
        if cells.len() > budget {
            return Err(BoundsError::FreeCellBudget { cells: cells.len(), budget });
        }
    }
    let choices = (p - 1) as u128;
    let mut needed: u128 = 1;
    for _ in 0..cells.len() {
        needed = needed
            .checked_mul(choices)
            .ok_or(BoundsError::CapExceeded { needed: u128::MAX, cap: cap.max_assignments })?;
    }
    if needed > cap.max_assignments {
        return Err(BoundsError::CapExceeded { needed, cap: cap.max_assignments });
    }

    let lower = greedy_triangular_size(z) as u64;
    let mut digits = vec![0u64; cells.len()];
    let mut f = ZqMatrix::zero(z.rows, z.cols, p);
    let mut min_rank = u64::MAX;
    loop {
        for (i, &(r, c)) in cells.iter().enumerate() {
            f.set(r, c, digits[i] + 1);
        }
        let rank = rank_mod_p(&f, p).expect("p was checked prime") as u64;
        min_rank = min_rank.min(rank);
        if min_rank <= lower {
            return Ok(min_rank);
        }
        // Advance the odometer.
        let mut i = 0;
        loop {
            if i == digits.len() {
                return Ok(min_rank);
            }
            digits[i] += 1;
            if digits[i] < p - 1 {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

fn validate_orders(
    z: &ZeroPattern,
    row_order: &[usize],
    col_order: &[usize],
) -> Result<(), BoundsError> {
    let ok = !row_order.is_empty()
        && row_order.len() == col_order.len()
        && is_injective_in_range(row_order, z.rows)
        && is_injective_in_range(col_order, z.cols);
    if ok {
        Ok(())
    } else {
        Err(BoundsError::NotTriangularPattern)
    }
}

fn is_injective_in_range(order: &[usize], len: usize) -> bool {
    let mut seen = vec![false; len];
    order.iter().all(|&i| {
        if i >= len || seen[i] {
            false
        } else {
            seen[i] = true;
            true
        }
    })
}

fn pattern_is_triangular(z: &ZeroPattern, row_order: &[usize], col_order: &[usize]) -> bool {
    for i in 0..row_order.len() {
        if z.is_forced_zero(row_order[i], col_order[i]) {
            return false;
        }
        for j in 0..i {
            if !z.is_forced_zero(row_order[i], col_order[j]) {
                return false;
            }
        }
    }
    true
}

/// Certifies `bound = ⌈d/k⌉` from a pattern that is structurally lower-zero
/// triangular with a forced non-zero diagonal of length `d` under the given
/// orders. The quantifier over "every representing matrix" is established
/// by the pattern itself, never by enumerating matrices: any matrix
/// matching the pattern is triangular with a non-zero diagonal, so the
/// pigeonhole argument applies to all of them at once.
pub fn triangular_bound(
    predicate: &Predicate,
    z: &ZeroPattern,
    m: &Modulus,
    row_order: Vec<usize>,
    col_order: Vec<usize>,
) -> Result<Certificate, BoundsError> {
    validate_orders(z, &row_order, &col_order)?;
    if !pattern_is_triangular(z, &row_order, &col_order) {
        return Err(BoundsError::NotTriangularPattern);
    }
    let bound = (row_order.len() as u64).div_ceil(m.k() as u64);
    Ok(Certificate {
        predicate: predicate.clone(),
        q: m.q(),
        bound,
        method: Method::TriangularPigeonhole,
        witness: Witness::Triangular { row_order, col_order },
    })
}

fn detect_diagonal_pairing(z: &ZeroPattern) -> Option<Vec<usize>> {
    if z.rows != z.cols {
        return None;
    }
    let mut col_of_row = Vec::with_capacity(z.rows);
    let mut col_used = vec![false; z.cols];
    for r in 0..z.rows {
        let nonzero: Vec<usize> = (0..z.cols).filter(|&c| !z.is_forced_zero(r, c)).collect();
        let [c] = nonzero[..] else {
            return None;
        };
        if col_used[c] {
            return None;
        }
        col_used[c] = true;
        col_of_row.push(c);
    }
    Some(col_of_row)
}

/// Certifies `bound = ⌈n/k⌉` from a pattern whose forced non-zero cells
/// form exactly a (permuted) diagonal.
pub fn diagonal_bound(
    predicate: &Predicate,
    z: &ZeroPattern,
    m: &Modulus,
) -> Result<Certificate, BoundsError> {
    let col_of_row = detect_diagonal_pairing(z).ok_or(BoundsError::NotDiagonalPattern)?;
    let bound = (z.rows as u64).div_ceil(m.k() as u64);
    Ok(Certificate {
        predicate: predicate.clone(),
        q: m.q(),
        bound,
        method: Method::DiagonalNonzero,
        witness: Witness::Diagonal { col_of_row },
    })
}

/// Transports a certificate for the reduction's source predicate to its
/// target: `DI(target, q) ≥ DI(source, q)`. The reduction is re-verified
/// exhaustively before lifting.
pub fn lift_bound(r: &Reduction, inner: Certificate) -> Result<Certificate, BoundsError> {
    lift_bound_capped(r, inner, DEFAULT_CELL_CAP)
}

pub fn lift_bound_capped(
    r: &Reduction,
    inner: Certificate,
    cap: u64,
) -> Result<Certificate, BoundsError> {
    if inner.predicate != *r.source() {
        return Err(BoundsError::UnverifiedReduction(
            "certificate predicate does not match the reduction source".into(),
        ));
    }
    if let Some(q) = r.target().embedded_modulus() {
        if q != inner.q {
            return Err(BoundsError::ModulusMismatch { expected: q, got: inner.q });
        }
    }
    r.verify_exhaustive(cap)
        .map_err(|e| BoundsError::UnverifiedReduction(e.to_string()))?;
    Ok(Certificate {
        predicate: r.target().clone(),
        q: inner.q,
        bound: inner.bound,
        method: Method::ReductionLift,
        witness: Witness::Lift { reduction: r.kind().clone(), inner: Box::new(inner) },
    })
}

/// The injective-map counting bound for multilinear polynomial evaluation
/// at prime `q`: distinct polynomials need distinct vectors, and there are
/// `q^C(n,≤d)` of them, so the length is at least `C(n,≤d)`.
pub fn mpoly_counting_bound(n: usize, d: usize, q: u64) -> Result<Certificate, BoundsError> {
    if !is_prime(q) {
        return Err(BoundsError::NotPrime(q));
    }
    let predicate = Predicate::mpoly(n, d, q)?;
    let bound = u64::try_from(binomial_sum(n, d))
        .map_err(|_| BoundsError::Unsupported("counting bound exceeds u64".into()))?;
    Ok(Certificate {
        predicate,
        q,
        bound,
        method: Method::CountingMpoly,
        witness: Witness::Counting { n, d },
    })
}

/// The strongest shipped lower-bound argument for a builtin predicate at
/// the given modulus.
pub fn builtin_bound(p: &Predicate, m: &Modulus) -> Result<Certificate, BoundsError> {
    use crate::predicates::PredicateKind::*;
    match *p.kind() {
        Eq { .. } => {
            if !m.is_prime() {
                return Err(BoundsError::Unsupported(
                    "equality bounds at composite moduli are not covered by the shipped arguments"
                        .into(),
                ));
            }
            let z = p.zero_pattern()?;
            let cap = OracleCap::default();
            let bound = min_rank_oracle(&z, m.q(), &cap)?;
            Ok(Certificate {
                predicate: p.clone(),
                q: m.q(),
                bound,
                method: Method::ExactMinRank,
                witness: Witness::MinRank { p: m.q(), max_assignments: cap.max_assignments },
            })
        }
        Gt { n } => {
            let z = p.zero_pattern()?;
            triangular_bound(p, &z, m, (0..n).collect(), (0..n).collect())
        }
        Neq { .. } => {
            let z = p.zero_pattern()?;
            diagonal_bound(p, &z, m)
        }
        Index { n } => {
            let neq = Predicate::neq(n);
            let inner = diagonal_bound(&neq, &neq.zero_pattern()?, m)?;
            let r = builtin_reduction(BuiltinReduction::IndexToNeq { n })?;
            lift_bound(&r, inner)
        }
        Disj { n } => {
            let index = Predicate::index(n)?;
            let inner = builtin_bound(&index, m)?;
            let r = builtin_reduction(BuiltinReduction::DisjToIndex { n })?;
            lift_bound(&r, inner)
        }
        OrEq { n, q } => {
            if q != m.q() {
                return Err(BoundsError::ModulusMismatch { expected: q, got: m.q() });
            }
            let neq = Predicate::neq(1usize << n);
            let inner = diagonal_bound(&neq, &neq.zero_pattern()?, m)?;
            let r = builtin_reduction(BuiltinReduction::OrEqToNeq { n, q })?;
            lift_bound(&r, inner)
        }
        Ethr { n, t } => {
            // Chain (a): through ETHR_{n-t+1}^1 and GT_{n-t+2}.
            let gt = Predicate::gt(n - t + 2);
            let gt_cert = builtin_bound(&gt, m)?;
            let r1 = builtin_reduction(BuiltinReduction::EthrOneToGt { m: n - t + 1 })?;
            let mid = lift_bound(&r1, gt_cert)?;
            let r2 = builtin_reduction(BuiltinReduction::EthrPadToThresholdOne { n, t })?;
            let chain_a = lift_bound(&r2, mid)?;
            // Chain (b): through ETHR_{t+2}^t and NEQ_{t+2}, valid when
            // t <= n - 2.
            if t + 2 <= n {
                let neq = Predicate::neq(t + 2);
                let inner = diagonal_bound(&neq, &neq.zero_pattern()?, m)?;
                let r3 = builtin_reduction(BuiltinReduction::EthrToNeq { m: t + 2 })?;
                let mid = lift_bound(&r3, inner)?;
                let r4 = builtin_reduction(BuiltinReduction::EthrRestrictGround { n, t })?;
                let chain_b = lift_bound(&r4, mid)?;
                if chain_b.bound > chain_a.bound {
                    return Ok(chain_b);
                }
            }
            Ok(chain_a)
        }
        Thr { n, t } => {
            let m1 = n - t + 1;
            let thr1 = Predicate::thr(m1, 1)?;
            let z1 = thr1.zero_pattern()?;
            let side = 1usize << m1;
            // Rows in canonical subset order; the column paired with row i
            // is the complement of its set, which is index reversal.
            let inner = triangular_bound(
                &thr1,
                &z1,
                m,
                (0..side).collect(),
                (0..side).rev().collect(),
            )?;
            if t == 1 {
                return Ok(inner);
            }
            let r = builtin_reduction(BuiltinReduction::ThrPadToThresholdOne { n, t })?;
            lift_bound(&r, inner)
        }
        Mpoly { n, d, q } => {
            if q != m.q() {
                return Err(BoundsError::ModulusMismatch { expected: q, got: m.q() });
            }
            if m.is_prime() {
                mpoly_counting_bound(n, d, q)
            } else {
                let count = usize::try_from(binomial(n, d))
                    .map_err(|_| BoundsError::Unsupported("C(n, d) exceeds usize".into()))?;
                let neq = Predicate::neq(count);
                let inner = diagonal_bound(&neq, &neq.zero_pattern()?, m)?;
                let r = builtin_reduction(BuiltinReduction::MpolyToNeq { n, d, q })?;
                lift_bound(&r, inner)
            }
        }
        Table { .. } => Err(BoundsError::Unsupported(
            "no generic argument for arbitrary tables; use min_rank_oracle".into(),
        )),
    }
}

/// Replays a certificate's witness against the pattern and modulus; true
/// iff the claimed bound is re-derived from scratch.
pub fn check(c: &Certificate, z: &ZeroPattern, m: &Modulus) -> bool {
    if c.q != m.q() {
        return false;
    }
    // The pattern must have the predicate's dimensions.
    let dims_ok = c
        .predicate
        .x_domain()
        .size()
        .zip(c.predicate.y_domain().size())
        .is_some_and(|(sx, sy)| sx == z.rows() as u128 && sy == z.cols() as u128);
    if !dims_ok {
        return false;
    }
    match (&c.method, &c.witness) {
        (Method::ExactMinRank, Witness::MinRank { p, max_assignments }) => {
            if *p != m.q() || !m.is_prime() {
                return false;
            }
            let cap = OracleCap { max_free_cells: None, max_assignments: *max_assignments };
            min_rank_oracle(z, *p, &cap).is_ok_and(|r| r == c.bound)
        }
        (Method::TriangularPigeonhole, Witness::Triangular { row_order, col_order }) => {
            validate_orders(z, row_order, col_order).is_ok()
                && pattern_is_triangular(z, row_order, col_order)
                && c.bound == (row_order.len() as u64).div_ceil(m.k() as u64)
        }
        (Method::DiagonalNonzero, Witness::Diagonal { col_of_row }) => {
            let Some(detected) = detect_diagonal_pairing(z) else {
                return false;
            };
            detected == *col_of_row && c.bound == (z.rows() as u64).div_ceil(m.k() as u64)
        }
        (Method::ReductionLift, Witness::Lift { reduction, inner }) => {
            let Ok(r) = builtin_reduction(reduction.clone()) else {
                return false;
            };
            if *r.target() != c.predicate
                || r.verify_exhaustive(DEFAULT_CELL_CAP).is_err()
                || inner.bound != c.bound
                || inner.q != c.q
            {
                return false;
            }
            let Ok(inner_z) = r.source().zero_pattern() else {
                return false;
            };
            check(inner, &inner_z, m)
        }
        (Method::CountingMpoly, Witness::Counting { n, d }) => {
            let expected = Predicate::mpoly(*n, *d, m.q());
            expected.is_ok_and(|p| p == c.predicate)
                && m.is_prime()
                && u64::try_from(binomial_sum(*n, *d)).is_ok_and(|b| b == c.bound)
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modmath::factorize;
    use crate::rng::DetRng;

    fn oracle(z: &ZeroPattern, p: u64) -> u64 {
        min_rank_oracle(z, p, &OracleCap::default()).unwrap()
    }

    #[test]
    fn oracle_eq_pattern() {
        // The unique representing matrix of EQ_4 over Z_2 is J - I, which
        // is invertible, so the exact minimum is 4.
        let z = Predicate::eq(4).zero_pattern().unwrap();
        assert_eq!(oracle(&z, 2), 4);
    }

    #[test]
    fn oracle_gt_pattern() {
        let z = Predicate::gt(3).zero_pattern().unwrap();
        assert_eq!(oracle(&z, 2), 3);
    }

    #[test]
    fn oracle_all_forced_zero() {
        let z = ZeroPattern::new(3, 3, vec![true; 9]);
        assert_eq!(oracle(&z, 2), 0);
    }

    #[test]
    fn oracle_caps() {
        let z = Predicate::eq(4).zero_pattern().unwrap(); // 12 free cells
        let cap = OracleCap { max_free_cells: Some(4), max_assignments: 1 << 24 };
        assert_eq!(
            min_rank_oracle(&z, 2, &cap),
            Err(BoundsError::FreeCellBudget { cells: 12, budget: 4 })
        );
        let cap = OracleCap { max_free_cells: None, max_assignments: 16 };
        assert!(matches!(
            min_rank_oracle(&z, 3, &cap),
            Err(BoundsError::CapExceeded { .. })
        ));
        assert_eq!(
            min_rank_oracle(&z, 6, &OracleCap::default()),
            Err(BoundsError::NotPrime(6))
        );
    }

    #[test]
    fn oracle_matches_unpruned_enumeration_on_random_patterns() {
        // Independent route: enumerate without the greedy short-circuit.
        fn brute(z: &ZeroPattern, p: u64) -> u64 {
            let cells = z.nonzero_cells();
            let total = (p - 1).pow(cells.len() as u32);
            let mut best = u64::MAX;
            for assignment in 0..total {
                let mut a = assignment;
                let mut f = ZqMatrix::zero(z.rows(), z.cols(), p);
                for &(r, c) in &cells {
                    f.set(r, c, a % (p - 1) + 1);
                    a /= p - 1;
                }
                best = best.min(rank_mod_p(&f, p).unwrap() as u64);
            }
            if best == u64::MAX {
                0
            } else {
                best
            }
        }
        let mut rng = DetRng::new(0x0bac1e);
        for p in [2u64, 3] {
            for _ in 0..40 {
                let rows = 1 + rng.next_below(3) as usize;
                let cols = 1 + rng.next_below(3) as usize;
                let bits = (0..rows * cols).map(|_| rng.next_below(2) == 0).collect();
                let z = ZeroPattern::new(rows, cols, bits);
                assert_eq!(oracle(&z, p), brute(&z, p), "p={p} pattern={z:?}");
            }
        }
    }

    #[test]
    fn oracle_monotone_under_pattern_growth() {
        // Appending a row and column of forced non-zero cells never lowers
        // the minimum: restricting a representing matrix to the old cells
        // matches the old pattern, and restriction cannot raise rank.
        let mut rng = DetRng::new(0x97011);
        for p in [2u64, 3] {
            for _ in 0..25 {
                let rows = 1 + rng.next_below(3) as usize;
                let cols = 1 + rng.next_below(3) as usize;
                let bits: Vec<bool> = (0..rows * cols).map(|_| rng.next_below(2) == 0).collect();
                let z = ZeroPattern::new(rows, cols, bits.clone());
                let mut grown = Vec::new();
                for r in 0..rows {
                    grown.extend_from_slice(&bits[r * cols..(r + 1) * cols]);
                    grown.push(false); // new forced non-zero column cell
                }
                grown.extend(std::iter::repeat_n(false, cols + 1)); // new row
                let zg = ZeroPattern::new(rows + 1, cols + 1, grown);
                assert!(oracle(&zg, p) >= oracle(&z, p), "p={p}");
            }
        }
    }

    #[test]
    fn triangular_bound_gt() {
        let m11 = factorize(11).unwrap();
        let gt = Predicate::gt(6);
        let z = gt.zero_pattern().unwrap();
        let c = triangular_bound(&gt, &z, &m11, (0..6).collect(), (0..6).collect()).unwrap();
        assert_eq!(c.bound, 6);
        assert!(check(&c, &z, &m11));

        let m6 = factorize(6).unwrap();
        let c = triangular_bound(&gt, &z, &m6, (0..6).collect(), (0..6).collect()).unwrap();
        assert_eq!(c.bound, 3);
        let m30 = factorize(30).unwrap();
        let c = triangular_bound(&gt, &z, &m30, (0..6).collect(), (0..6).collect()).unwrap();
        assert_eq!(c.bound, 2);
    }

    #[test]
    fn triangular_bound_rejects_wrong_orders() {
        let m11 = factorize(11).unwrap();
        let gt = Predicate::gt(3);
        let z = gt.zero_pattern().unwrap();
        // Reversed row order puts forced non-zero cells below the diagonal.
        assert_eq!(
            triangular_bound(&gt, &z, &m11, (0..3).rev().collect(), (0..3).collect()),
            Err(BoundsError::NotTriangularPattern)
        );
    }

    #[test]
    fn diagonal_bound_neq() {
        let neq = Predicate::neq(5);
        let z = neq.zero_pattern().unwrap();
        let m5 = factorize(5).unwrap();
        let c = diagonal_bound(&neq, &z, &m5).unwrap();
        assert_eq!(c.bound, 5);
        assert!(check(&c, &z, &m5));

        let neq6 = Predicate::neq(6);
        let z6 = neq6.zero_pattern().unwrap();
        let m30 = factorize(30).unwrap();
        assert_eq!(diagonal_bound(&neq6, &z6, &m30).unwrap().bound, 2);

        // 1x1 non-zero pattern.
        let one = Predicate::table(1, 1, vec![false]).unwrap();
        let z1 = one.zero_pattern().unwrap();
        assert_eq!(diagonal_bound(&one, &z1, &m5).unwrap().bound, 1);

        // GT's pattern is not diagonal.
        let zgt = Predicate::gt(3).zero_pattern().unwrap();
        assert_eq!(
            diagonal_bound(&Predicate::gt(3), &zgt, &m5),
            Err(BoundsError::NotDiagonalPattern)
        );
    }

    #[test]
    fn threshold_complement_ordering_is_triangular() {
        // THR_3^1 with rows in canonical subset order and columns paired to
        // complements (index reversal) is triangular: star cells (forced
        // non-zero) sit exactly where the row set misses the column set.
        let stars: [[u8; 8]; 8] = [
            [1, 1, 1, 1, 1, 1, 1, 1],
            [0, 1, 0, 0, 1, 1, 0, 1],
            [0, 0, 1, 0, 1, 0, 1, 1],
            [0, 0, 0, 1, 0, 1, 1, 1],
            [0, 0, 0, 0, 1, 0, 0, 1],
            [0, 0, 0, 0, 0, 1, 0, 1],
            [0, 0, 0, 0, 0, 0, 1, 1],
            [0, 0, 0, 0, 0, 0, 0, 1],
        ];
        let thr = Predicate::thr(3, 1).unwrap();
        let z = thr.zero_pattern().unwrap();
        for (i, row) in stars.iter().enumerate() {
            for (j, &star) in row.iter().enumerate() {
                // Column j of the triangular arrangement is pattern column
                // 7 - j (complement pairing).
                assert_eq!(!z.is_forced_zero(i, 7 - j), star == 1, "cell ({i},{j})");
            }
        }
        let m6 = factorize(6).unwrap();
        let c =
            triangular_bound(&thr, &z, &m6, (0..8).collect(), (0..8).rev().collect()).unwrap();
        assert_eq!(c.bound, 4); // ceil(8 / 2)

        // A concrete star matrix with arbitrary non-zero values passes the
        // matrix-level triangular check under identity orders.
        let mut f = ZqMatrix::zero(8, 8, 5);
        for (i, row) in stars.iter().enumerate() {
            for (j, &star) in row.iter().enumerate() {
                if star == 1 {
                    f.set(i, j, 1 + ((i + j) as u64 % 4));
                }
            }
        }
        let w = crate::zqlinalg::TriangularWitness::identity(8);
        assert!(crate::zqlinalg::check_triangular(&f, &w).unwrap());
    }

    #[test]
    fn counting_bound_values() {
        assert_eq!(mpoly_counting_bound(2, 1, 3).unwrap().bound, 3);
        assert_eq!(mpoly_counting_bound(3, 0, 3).unwrap().bound, 1);
        assert_eq!(mpoly_counting_bound(3, 3, 3).unwrap().bound, 8);
        assert_eq!(mpoly_counting_bound(2, 1, 6), Err(BoundsError::NotPrime(6)));
    }

    #[test]
    fn ethr_bound_takes_the_max_chain() {
        let m7 = factorize(7).unwrap();
        // n=6, t=1: max{n-t+2, t+2} = 7.
        let c = builtin_bound(&Predicate::ethr(6, 1).unwrap(), &m7).unwrap();
        assert_eq!(c.bound, 7);
        // n=6, t=4: max{4, 6} = 6.
        let c = builtin_bound(&Predicate::ethr(6, 4).unwrap(), &m7).unwrap();
        assert_eq!(c.bound, 6);
        // n=6, t=3: max{5, 5} = 5.
        let c = builtin_bound(&Predicate::ethr(6, 3).unwrap(), &m7).unwrap();
        assert_eq!(c.bound, 5);
        // Composite: ceil(max{...} / k).
        let m6 = factorize(6).unwrap();
        let c = builtin_bound(&Predicate::ethr(6, 1).unwrap(), &m6).unwrap();
        assert_eq!(c.bound, 4); // ceil(7/2)
    }

    #[test]
    fn thr_bound_is_two_to_the_chain() {
        let m7 = factorize(7).unwrap();
        for (n, t, want) in [(5, 3, 8u64), (5, 5, 2), (4, 1, 16)] {
            let p = Predicate::thr(n, t).unwrap();
            let c = builtin_bound(&p, &m7).unwrap();
            assert_eq!(c.bound, want, "n={n} t={t}");
            let z = p.zero_pattern().unwrap();
            assert!(check(&c, &z, &m7));
        }
    }

    #[test]
    fn builtin_bounds_match_formulas() {
        let m7 = factorize(7).unwrap();
        let m30 = factorize(30).unwrap();
        assert_eq!(builtin_bound(&Predicate::gt(6), &m7).unwrap().bound, 6);
        assert_eq!(builtin_bound(&Predicate::gt(6), &m30).unwrap().bound, 2);
        assert_eq!(builtin_bound(&Predicate::neq(6), &m30).unwrap().bound, 2);
        assert_eq!(
            builtin_bound(&Predicate::index(6).unwrap(), &m30).unwrap().bound,
            2
        );
        assert_eq!(
            builtin_bound(&Predicate::disj(6).unwrap(), &m30).unwrap().bound,
            2
        );
        let c = builtin_bound(&Predicate::or_eq(3, 7).unwrap(), &m7).unwrap();
        assert_eq!(c.bound, 8);
        let m15 = factorize(15).unwrap();
        let c = builtin_bound(&Predicate::or_eq(3, 15).unwrap(), &m15).unwrap();
        assert_eq!(c.bound, 4); // ceil(8/2)
        // MPOLY: counting at primes, lifted NEQ at composites.
        assert_eq!(
            builtin_bound(&Predicate::mpoly(4, 2, 7).unwrap(), &m7).unwrap().bound,
            11
        );
        assert_eq!(
            builtin_bound(&Predicate::mpoly(4, 2, 15).unwrap(), &m15).unwrap().bound,
            3 // ceil(C(4,2) / 2)
        );
    }

    #[test]
    fn check_rejects_tampering() {
        let m7 = factorize(7).unwrap();
        let gt = Predicate::gt(4);
        let z = gt.zero_pattern().unwrap();
        let c = builtin_bound(&gt, &m7).unwrap();
        assert!(check(&c, &z, &m7));

        let mut tampered = c.clone();
        tampered.bound += 1;
        assert!(!check(&tampered, &z, &m7));

        let mut tampered = c.clone();
        if let Witness::Triangular { row_order, .. } = &mut tampered.witness {
            row_order.swap(0, 1);
        }
        assert!(!check(&tampered, &z, &m7));

        // Wrong modulus.
        let m11 = factorize(11).unwrap();
        assert!(!check(&c, &z, &m11));
    }

    #[test]
    fn check_replays_lift_chains() {
        let m6 = factorize(6).unwrap();
        let p = Predicate::ethr(5, 2).unwrap();
        let c = builtin_bound(&p, &m6).unwrap();
        let z = p.zero_pattern().unwrap();
        assert!(check(&c, &z, &m6));

        let mut tampered = c.clone();
        tampered.bound += 1;
        assert!(!check(&tampered, &z, &m6));
    }

    #[test]
    fn identity_lift_keeps_bound() {
        let m7 = factorize(7).unwrap();
        let gt = Predicate::gt(4);
        let c = builtin_bound(&gt, &m7).unwrap();
        let r = builtin_reduction(BuiltinReduction::Identity { pred: gt.clone() }).unwrap();
        let lifted = lift_bound(&r, c.clone()).unwrap();
        assert_eq!(lifted.bound, c.bound);
        assert_eq!(lifted.predicate, gt);
        let z = gt.zero_pattern().unwrap();
        assert!(check(&lifted, &z, &m7));
    }

    #[test]
    fn certificate_json_roundtrip() {
        let m30 = factorize(30).unwrap();
        let c = builtin_bound(&Predicate::index(6).unwrap(), &m30).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        let back: Certificate = serde_json::from_str(&s).unwrap();
        assert_eq!(c, back);
        assert!(s.contains("\"ReductionLift\""));
    }
}
