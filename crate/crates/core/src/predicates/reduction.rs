//! Predicate reductions: mappings `f, g` with
//! `P2(f(x), g(y)) = P1(x, y)` (written `P2 ⇒ P1`), or the swapped variant
//! `P2(g(y), f(x)) = P1(x, y)` when the sides cross.
//!
//! An encoding for the target `P2` becomes an encoding for the source `P1`,
//! and a lower bound for `P1` lifts to `P2`.

use serde::{Deserialize, Serialize};

use super::domain::{binomial, lex_subset_of_size, Domain, Element};
use super::poly::{oreq_poly, threshold_poly, MultilinearPoly};
use super::{Predicate, PredicateError};
use crate::modmath::{is_prime, prime_factors};

/// The named reductions this crate ships. Names read `target ⇒ source`:
/// an encoding of the first predicate yields an encoding of the second.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum BuiltinReduction {
    /// `P ⇒ P` with `f = g = id`.
    Identity { pred: Predicate },
    /// `DISJ_n ⇒ INDEX_n`: `INDEX_n(x, i) = DISJ_n(χ⁻¹(x), {i})`.
    DisjToIndex { n: usize },
    /// `INDEX_n ⇒ NEQ_n`: `NEQ_n(i, j) = INDEX_n(e_i, j)`.
    IndexToNeq { n: usize },
    /// `INDEX_n ⇒ GT_n` (swapped): `GT_n(x, y) = INDEX_n(χ([y]), x)`.
    IndexToGt { n: usize },
    /// `INDEX_{min(|X|,|Y|)} ⇒ P` through the truth table of `P`.
    TruthTable { pred: Predicate },
    /// `ETHR_n^t ⇒ ETHR_{n-t+1}^1` by padding both sets with `t-1`
    /// fixed common elements.
    EthrPadToThresholdOne { n: usize, t: usize },
    /// `ETHR_m^1 ⇒ GT_{m+1}` via `x ↦ [x-1]`, `y ↦ {y}`.
    EthrOneToGt { m: usize },
    /// `ETHR_n^t ⇒ ETHR_{t+2}^t` by restricting the ground set.
    EthrRestrictGround { n: usize, t: usize },
    /// `ETHR_m^{m-2} ⇒ NEQ_m` via `x ↦ [m] \ {x}`.
    EthrToNeq { m: usize },
    /// `MPOLY_n^{n-t+1,q} ⇒ THR_n^t` via the threshold polynomial.
    /// Requires every prime factor of `q` to exceed `n`.
    MpolyToThr { n: usize, t: usize, q: u64 },
    /// `MPOLY_n^{n,q} ⇒ OR-EQ_n^q` via `p_y(x) = Π(x_i - y_i)`.
    /// Requires prime `q`.
    MpolyToOrEq { n: usize, q: u64 },
    /// `MPOLY_n^{d,q} ⇒ NEQ_{C(n,d)}` via `x ↦ χ(S(x))`, `y ↦ X_{S(y)}`
    /// with `S` the lexicographic bijection onto size-`d` subsets.
    MpolyToNeq { n: usize, d: usize, q: u64 },
    /// `OR-EQ_n^q ⇒ NEQ_{2^n}` via `x ↦ bin(x)`, `y ↦ bin(y) ⊕ 1^n`.
    OrEqToNeq { n: usize, q: u64 },
    /// `THR_n^t ⇒ THR_{n-t+1}^1` by padding with `t-1` common elements.
    ThrPadToThresholdOne { n: usize, t: usize },
}

/// A verified-shape reduction between two predicates.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    source: Predicate,
    target: Predicate,
    swapped: bool,
    kind: BuiltinReduction,
}

/// Builds one of the named reductions, validating its parameters.
pub fn builtin_reduction(kind: BuiltinReduction) -> Result<Reduction, PredicateError> {
    let bad = |msg: String| PredicateError::BadParams(msg);
    let (source, target, swapped) = match &kind {
        BuiltinReduction::Identity { pred } => (pred.clone(), pred.clone(), false),
        BuiltinReduction::DisjToIndex { n } => {
            (Predicate::index(*n)?, Predicate::disj(*n)?, false)
        }
        BuiltinReduction::IndexToNeq { n } => (Predicate::neq(*n), Predicate::index(*n)?, false),
        BuiltinReduction::IndexToGt { n } => (Predicate::gt(*n), Predicate::index(*n)?, true),
        BuiltinReduction::TruthTable { pred } => {
            let sx = pred
                .x_domain()
                .size()
                .ok_or_else(|| bad("domain too large for a truth table".into()))?;
            let sy = pred
                .y_domain()
                .size()
                .ok_or_else(|| bad("domain too large for a truth table".into()))?;
            let m = sx.min(sy);
            if m > 63 {
                return Err(bad(format!(
                    "truth-table reduction needs min(|X|,|Y|) <= 63, got {m}"
                )));
            }
            // Address the smaller side as the index argument.
            if sy <= sx {
                (pred.clone(), Predicate::index(sy as usize)?, false)
            } else {
                (pred.clone(), Predicate::index(sx as usize)?, true)
            }
        }
        BuiltinReduction::EthrPadToThresholdOne { n, t } => (
            Predicate::ethr(n - t + 1, 1)?,
            Predicate::ethr(*n, *t)?,
            false,
        ),
        BuiltinReduction::EthrOneToGt { m } => {
            (Predicate::gt(m + 1), Predicate::ethr(*m, 1)?, false)
        }
        BuiltinReduction::EthrRestrictGround { n, t } => {
            if *n < t + 2 {
                return Err(bad("ground-set restriction needs n >= t + 2".into()));
            }
            (Predicate::ethr(t + 2, *t)?, Predicate::ethr(*n, *t)?, false)
        }
        BuiltinReduction::EthrToNeq { m } => {
            if *m < 3 {
                return Err(bad("complement reduction needs m >= 3".into()));
            }
            (Predicate::neq(*m), Predicate::ethr(*m, m - 2)?, false)
        }
        BuiltinReduction::MpolyToThr { n, t, q } => {
            let source = Predicate::thr(*n, *t)?;
            let target = Predicate::mpoly(*n, n - t + 1, *q)?;
            // The factor product stays non-zero only when no prime factor of
            // q can appear in it, i.e. every prime factor exceeds n.
            if prime_factors(*q).first().is_none_or(|&p| p <= *n as u64) {
                return Err(bad(format!(
                    "threshold polynomial needs every prime factor of q={q} to exceed n={n}"
                )));
            }
            (source, target, false)
        }
        BuiltinReduction::MpolyToOrEq { n, q } => {
            if !is_prime(*q) {
                return Err(bad(format!(
                    "product-of-differences reduction needs prime q, got {q}"
                )));
            }
            (Predicate::or_eq(*n, *q)?, Predicate::mpoly(*n, *n, *q)?, false)
        }
        BuiltinReduction::MpolyToNeq { n, d, q } => {
            let count = binomial(*n, *d);
            if count == 0 {
                return Err(bad("d must be at most n".into()));
            }
            let count = usize::try_from(count)
                .map_err(|_| bad("C(n, d) does not fit the supported range".into()))?;
            (Predicate::neq(count), Predicate::mpoly(*n, *d, *q)?, false)
        }
        BuiltinReduction::OrEqToNeq { n, q } => {
            let target = Predicate::or_eq(*n, *q)?;
            (Predicate::neq(1usize << n), target, false)
        }
        BuiltinReduction::ThrPadToThresholdOne { n, t } => (
            Predicate::thr(n - t + 1, 1)?,
            Predicate::thr(*n, *t)?,
            false,
        ),
    };
    Ok(Reduction { source, target, swapped, kind })
}

impl Reduction {
    /// `P1` — the predicate an encoding is produced for and a bound lifts
    /// from.
    pub fn source(&self) -> &Predicate {
        &self.source
    }

    /// `P2` — the predicate whose encoding is consumed.
    pub fn target(&self) -> &Predicate {
        &self.target
    }

    /// Whether the mappings cross sides (`f : X1 → Y2`, `g : Y1 → X2`).
    pub fn swapped(&self) -> bool {
        self.swapped
    }

    pub fn kind(&self) -> &BuiltinReduction {
        &self.kind
    }

    /// The map `f` applied to an `x` element of the source predicate.
    pub fn map_x(&self, x: &Element) -> Result<Element, PredicateError> {
        if !self.source.x_domain().contains(x) {
            return Err(PredicateError::DomainMismatch);
        }
        Ok(match (&self.kind, x) {
            (BuiltinReduction::Identity { .. }, x) => x.clone(),
            (BuiltinReduction::DisjToIndex { n }, Element::Bits { word, .. }) => {
                Element::Set { n: *n, mask: *word }
            }
            (BuiltinReduction::IndexToNeq { n }, Element::Num(i)) => {
                Element::Bits { n: *n, word: 1u64 << (i - 1) }
            }
            // Swapped: x lands on the index side of INDEX_n.
            (BuiltinReduction::IndexToGt { .. }, Element::Num(x)) => Element::Num(*x),
            (BuiltinReduction::TruthTable { pred }, x) => {
                if !self.swapped {
                    // Row of the complemented truth table, addressed by y.
                    let ylen = pred.y_domain().size().expect("validated") as usize;
                    let mut word = 0u64;
                    for (j, yj) in enumerate(pred.y_domain(), ylen) {
                        if !pred.eval(x, &yj)? {
                            word |= 1u64 << j;
                        }
                    }
                    Element::Bits { n: ylen, word }
                } else {
                    let xi = pred.x_domain().index_of(x).expect("checked");
                    Element::Num(xi as u64 + 1)
                }
            }
            (
                BuiltinReduction::EthrPadToThresholdOne { n, t }
                | BuiltinReduction::ThrPadToThresholdOne { n, t },
                Element::Set { mask, .. },
            ) => pad_with_commons(*n, *t, *mask),
            (BuiltinReduction::EthrOneToGt { m }, Element::Num(x)) => {
                let mask = if *x == 1 { 0 } else { (1u64 << (x - 1)) - 1 };
                Element::Set { n: *m, mask }
            }
            (BuiltinReduction::EthrRestrictGround { n, .. }, Element::Set { mask, .. }) => {
                Element::Set { n: *n, mask: *mask }
            }
            (BuiltinReduction::EthrToNeq { m }, Element::Num(x)) => {
                let full = (1u64 << m) - 1;
                Element::Set { n: *m, mask: full ^ (1u64 << (x - 1)) }
            }
            (BuiltinReduction::MpolyToThr { n, .. }, Element::Set { mask, .. }) => {
                Element::Vector((0..*n).map(|i| mask >> i & 1).collect())
            }
            (BuiltinReduction::MpolyToOrEq { .. }, Element::Vector(v)) => {
                Element::Vector(v.clone())
            }
            (BuiltinReduction::MpolyToNeq { n, d, q }, Element::Num(x)) => {
                let mask = lex_subset_of_size(*n, *d, (*x - 1) as u128);
                let _ = q;
                Element::Vector((0..*n).map(|i| mask >> i & 1).collect())
            }
            (BuiltinReduction::OrEqToNeq { n, .. }, Element::Num(x)) => {
                Element::Vector((0..*n).map(|i| (x - 1) >> i & 1).collect())
            }
            _ => unreachable!("domain membership was checked"),
        })
    }

    /// The map `g` applied to a `y` element of the source predicate.
    pub fn map_y(&self, y: &Element) -> Result<Element, PredicateError> {
        if !self.source.y_domain().contains(y) {
            return Err(PredicateError::DomainMismatch);
        }
        Ok(match (&self.kind, y) {
            (BuiltinReduction::Identity { .. }, y) => y.clone(),
            (BuiltinReduction::DisjToIndex { n }, Element::Num(i)) => {
                Element::Set { n: *n, mask: 1u64 << (i - 1) }
            }
            (BuiltinReduction::IndexToNeq { .. }, Element::Num(j)) => Element::Num(*j),
            // Swapped: y becomes the data string χ([y]).
            (BuiltinReduction::IndexToGt { n }, Element::Num(y)) => {
                Element::Bits { n: *n, word: (1u64 << y) - 1 }
            }
            (BuiltinReduction::TruthTable { pred }, y) => {
                if !self.swapped {
                    let yi = pred.y_domain().index_of(y).expect("checked");
                    Element::Num(yi as u64 + 1)
                } else {
                    // Column of the complemented truth table, addressed by x.
                    let xlen = pred.x_domain().size().expect("validated") as usize;
                    let mut word = 0u64;
                    for (i, xi) in enumerate(pred.x_domain(), xlen) {
                        if !pred.eval(&xi, y)? {
                            word |= 1u64 << i;
                        }
                    }
                    Element::Bits { n: xlen, word }
                }
            }
            (
                BuiltinReduction::EthrPadToThresholdOne { n, t }
                | BuiltinReduction::ThrPadToThresholdOne { n, t },
                Element::Set { mask, .. },
            ) => pad_with_commons(*n, *t, *mask),
            (BuiltinReduction::EthrOneToGt { m }, Element::Num(y)) => {
                let mask = if *y == (*m as u64 + 1) { 0 } else { 1u64 << (y - 1) };
                Element::Set { n: *m, mask }
            }
            (BuiltinReduction::EthrRestrictGround { n, .. }, Element::Set { mask, .. }) => {
                Element::Set { n: *n, mask: *mask }
            }
            (BuiltinReduction::EthrToNeq { m }, Element::Num(y)) => {
                let full = (1u64 << m) - 1;
                Element::Set { n: *m, mask: full ^ (1u64 << (y - 1)) }
            }
            (BuiltinReduction::MpolyToThr { n, t, q }, Element::Set { mask, .. }) => {
                Element::Poly(threshold_poly(*n, *t, *q, *mask))
            }
            (BuiltinReduction::MpolyToOrEq { n, q }, Element::Vector(v)) => {
                Element::Poly(oreq_poly(*n, *q, v))
            }
            (BuiltinReduction::MpolyToNeq { n, d, q }, Element::Num(y)) => {
                let mask = lex_subset_of_size(*n, *d, (*y - 1) as u128);
                Element::Poly(MultilinearPoly::monomial(*n, *q, mask).expect("valid monomial"))
            }
            (BuiltinReduction::OrEqToNeq { n, .. }, Element::Num(y)) => {
                Element::Vector((0..*n).map(|i| 1 - ((y - 1) >> i & 1)).collect())
            }
            _ => unreachable!("domain membership was checked"),
        })
    }

    /// Evaluates the composed predicate `P2(f(x), g(y))` (sides crossed when
    /// swapped).
    pub fn eval_through(&self, x: &Element, y: &Element) -> Result<bool, PredicateError> {
        let fx = self.map_x(x)?;
        let gy = self.map_y(y)?;
        if self.swapped {
            self.target.eval(&gy, &fx)
        } else {
            self.target.eval(&fx, &gy)
        }
    }

    /// Exhaustively checks `P2(f(x), g(y)) = P1(x, y)` over the source
    /// domains. Errors with [`PredicateError::TooLarge`] past the cap and
    /// [`PredicateError::InvariantViolated`] on the first failing pair.
    pub fn verify_exhaustive(&self, cap: u64) -> Result<(), PredicateError> {
        let pairs = self
            .source
            .pair_count()
            .ok_or(PredicateError::TooLarge { cells: u128::MAX, cap })?;
        if pairs > cap as u128 {
            return Err(PredicateError::TooLarge { cells: pairs, cap });
        }
        let xd = self.source.x_domain();
        let yd = self.source.y_domain();
        for xi in 0..xd.size().unwrap() {
            let x = xd.element(xi);
            for yi in 0..yd.size().unwrap() {
                let y = yd.element(yi);
                if self.eval_through(&x, &y)? != self.source.eval(&x, &y)? {
                    return Err(PredicateError::InvariantViolated { x: xi, y: yi });
                }
            }
        }
        Ok(())
    }
}

/// Adds the `t-1` fixed elements `{n-t+2, …, n}` to a set over `[n-t+1]`,
/// viewed inside `[n]`.
fn pad_with_commons(n: usize, t: usize, mask: u64) -> Element {
    let pad = if t >= 1 { ((1u64 << (t - 1)) - 1) << (n - t + 1) } else { 0 };
    Element::Set { n, mask: mask | pad }
}

fn enumerate(domain: Domain, len: usize) -> impl Iterator<Item = (usize, Element)> {
    (0..len).map(move |i| (i, domain.element(i as u128)))
}

#[cfg(test)]
mod tests {
    use super::*;

    const CAP: u64 = 1 << 16;

    #[test]
    fn index_to_gt_spot_check() {
        // GT_3(2, 1) routes through INDEX_3(χ([1]), 2) = [bit 2 of "100" = 0].
        let r = builtin_reduction(BuiltinReduction::IndexToGt { n: 3 }).unwrap();
        assert!(r.swapped());
        let g = r.map_y(&Element::Num(1)).unwrap();
        assert_eq!(g, Element::bits_from_slice(&[1, 0, 0]));
        assert!(r.eval_through(&Element::Num(2), &Element::Num(1)).unwrap());
        r.verify_exhaustive(CAP).unwrap();
    }

    #[test]
    fn ethr_to_neq_spot_check() {
        // m = 3: 1 ↦ {2,3}, 2 ↦ {1,3}; intersection size 1 = m - 2.
        let r = builtin_reduction(BuiltinReduction::EthrToNeq { m: 3 }).unwrap();
        assert_eq!(
            r.map_x(&Element::Num(1)).unwrap(),
            Element::set_from_members(3, &[2, 3])
        );
        assert!(r.eval_through(&Element::Num(1), &Element::Num(2)).unwrap());
        r.verify_exhaustive(CAP).unwrap();
    }

    #[test]
    fn ethr_one_to_gt_spot_check() {
        // x = 1 maps to the empty set, so the composed value is false.
        let r = builtin_reduction(BuiltinReduction::EthrOneToGt { m: 2 }).unwrap();
        assert_eq!(r.map_x(&Element::Num(1)).unwrap(), Element::Set { n: 2, mask: 0 });
        for y in 1..=3u64 {
            assert!(!r.eval_through(&Element::Num(1), &Element::Num(y)).unwrap());
        }
        r.verify_exhaustive(CAP).unwrap();
    }

    #[test]
    fn all_builtin_reductions_hold_exhaustively() {
        let mut reductions = vec![
            BuiltinReduction::Identity { pred: Predicate::gt(5) },
            BuiltinReduction::TruthTable { pred: Predicate::gt(5) },
            BuiltinReduction::TruthTable { pred: Predicate::ethr(3, 2).unwrap() },
            BuiltinReduction::TruthTable {
                pred: Predicate::table(3, 2, vec![true, false, false, true, true, true]).unwrap(),
            },
            BuiltinReduction::TruthTable {
                // |X| < |Y| exercises the swapped truth-table direction.
                pred: Predicate::table(2, 3, vec![true, false, false, true, true, false]).unwrap(),
            },
            BuiltinReduction::MpolyToOrEq { n: 2, q: 3 },
            BuiltinReduction::MpolyToOrEq { n: 2, q: 5 },
            BuiltinReduction::OrEqToNeq { n: 3, q: 3 },
            BuiltinReduction::OrEqToNeq { n: 2, q: 6 },
        ];
        for n in 1..=5 {
            reductions.push(BuiltinReduction::DisjToIndex { n });
            reductions.push(BuiltinReduction::IndexToNeq { n });
            reductions.push(BuiltinReduction::IndexToGt { n });
            for t in 1..=n {
                reductions.push(BuiltinReduction::EthrPadToThresholdOne { n, t });
                reductions.push(BuiltinReduction::ThrPadToThresholdOne { n, t });
                if n >= t + 2 {
                    reductions.push(BuiltinReduction::EthrRestrictGround { n, t });
                }
                reductions.push(BuiltinReduction::MpolyToThr { n, t, q: 7 });
            }
            reductions.push(BuiltinReduction::EthrOneToGt { m: n });
            if n >= 3 {
                reductions.push(BuiltinReduction::EthrToNeq { m: n });
            }
            for d in 0..=n.min(3) {
                reductions.push(BuiltinReduction::MpolyToNeq { n, d, q: 3 });
                reductions.push(BuiltinReduction::MpolyToNeq { n, d, q: 6 });
            }
        }
        // Composite modulus with all prime factors above n.
        reductions.push(BuiltinReduction::MpolyToThr { n: 2, t: 1, q: 15 });

        for kind in reductions {
            let r = builtin_reduction(kind.clone()).expect("valid parameters");
            r.verify_exhaustive(CAP)
                .unwrap_or_else(|e| panic!("{kind:?}: {e}"));
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(builtin_reduction(BuiltinReduction::EthrToNeq { m: 2 }).is_err());
        assert!(builtin_reduction(BuiltinReduction::EthrRestrictGround { n: 3, t: 2 }).is_err());
        // q = 6 has the prime factor 2 <= n, which breaks the threshold
        // polynomial's non-vanishing argument.
        assert!(builtin_reduction(BuiltinReduction::MpolyToThr { n: 3, t: 1, q: 6 }).is_err());
        assert!(builtin_reduction(BuiltinReduction::MpolyToOrEq { n: 2, q: 6 }).is_err());
    }

    #[test]
    fn composite_q_breaks_product_of_differences() {
        // Witness for why MpolyToOrEq demands a prime: over q = 6 the
        // mapped polynomial vanishes at x = (2, 3), y = (0, 0) although no
        // coordinate matches.
        let p = oreq_poly(2, 6, &[0, 0]);
        assert_eq!(p.eval(&[2, 3]), 0);
    }
}
