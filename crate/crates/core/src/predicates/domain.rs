//! Enumerable domains with canonical element indexing.
//!
//! Every domain element has a canonical index in `[0, size)`:
//! - `Range(n)`: `1..=n` ascending;
//! - `Bitstrings(n)`: lexicographic, `x_1` most significant;
//! - `Subsets(n)`: by (set size, then mask value), so that the complement
//!   map is exactly index reversal — the order triangular threshold
//!   witnesses rely on;
//! - `VectorsModQ(n, q)`: lexicographic, first coordinate most significant;
//! - `MultilinearPolys(n, d, q)`: lexicographic by coefficient vector over
//!   the monomial list (subsets of size ≤ d in the subset order above).

use std::collections::BTreeMap;

use super::poly::MultilinearPoly;

/// Saturating binomial coefficient.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// `Σ_{i=0}^{d} C(n, i)` — the number of monomials of degree at most `d`.
pub fn binomial_sum(n: usize, d: usize) -> u128 {
    (0..=d.min(n)).map(|i| binomial(n, i)).sum()
}

/// Rank of `mask` among same-popcount masks in increasing value order.
fn mask_rank_within_size(n: usize, mask: u64) -> u128 {
    let mut rank: u128 = 0;
    let mut remaining = mask.count_ones() as usize;
    for j in (0..n).rev() {
        if mask >> j & 1 == 1 {
            rank += binomial(j, remaining);
            remaining -= 1;
        }
    }
    rank
}

/// Inverse of [`mask_rank_within_size`]: the `rank`-th popcount-`size` mask.
fn mask_unrank_within_size(n: usize, size: usize, mut rank: u128) -> u64 {
    let mut mask: u64 = 0;
    let mut remaining = size;
    for j in (0..n).rev() {
        if remaining == 0 {
            break;
        }
        let c = binomial(j, remaining);
        if c <= rank {
            mask |= 1u64 << j;
            rank -= c;
            remaining -= 1;
        }
    }
    debug_assert_eq!(remaining, 0);
    mask
}

/// Canonical index of a subset mask: sets sorted by (size, mask value).
pub fn subset_index(n: usize, mask: u64) -> u128 {
    let size = mask.count_ones() as usize;
    let before: u128 = (0..size).map(|s| binomial(n, s)).sum();
    before + mask_rank_within_size(n, mask)
}

/// Inverse of [`subset_index`].
pub fn subset_at(n: usize, mut index: u128) -> u64 {
    for size in 0..=n {
        let c = binomial(n, size);
        if index < c {
            return mask_unrank_within_size(n, size, index);
        }
        index -= c;
    }
    panic!("subset index out of range");
}

/// The `k`-th (0-based) size-`d` subset of `[n]` in lexicographic order of
/// sorted element tuples, as a mask.
pub fn lex_subset_of_size(n: usize, d: usize, mut k: u128) -> u64 {
    debug_assert!(k < binomial(n, d));
    let mut mask: u64 = 0;
    let mut next = 1usize;
    for slot in (1..=d).rev() {
        let mut v = next;
        loop {
            let c = binomial(n - v, slot - 1);
            if k < c {
                mask |= 1u64 << (v - 1);
                next = v + 1;
                break;
            }
            k -= c;
            v += 1;
        }
    }
    mask
}

/// Monomial masks of degree ≤ `d` in canonical subset order.
pub fn monomials(n: usize, d: usize) -> Vec<u64> {
    let count = binomial_sum(n, d);
    (0..count).map(|i| subset_at(n, i)).collect()
}

/// An element of one of the enumerable domains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Element {
    /// A number in `1..=n`.
    Num(u64),
    /// A bit string `x_1..x_n`; bit `i-1` of the word holds `x_i`.
    Bits { n: usize, word: u64 },
    /// A subset of `[n]`; bit `i-1` of the mask holds `[i ∈ S]`.
    Set { n: usize, mask: u64 },
    /// A vector in `Z_q^n`.
    Vector(Vec<u64>),
    Poly(MultilinearPoly),
}

impl Element {
    pub fn num(v: u64) -> Self {
        Element::Num(v)
    }

    pub fn bits_from_slice(vals: &[u8]) -> Self {
        let mut word = 0u64;
        for (i, &b) in vals.iter().enumerate() {
            if b != 0 {
                word |= 1u64 << i;
            }
        }
        Element::Bits { n: vals.len(), word }
    }

    pub fn set_from_members(n: usize, members: &[usize]) -> Self {
        let mut mask = 0u64;
        for &m in members {
            debug_assert!(m >= 1 && m <= n);
            mask |= 1u64 << (m - 1);
        }
        Element::Set { n, mask }
    }

    /// The bit `x_i` (1-based) of a bit string or characteristic vector.
    pub fn bit(&self, i: usize) -> Option<u64> {
        match self {
            Element::Bits { n, word } | Element::Set { n, mask: word } if i >= 1 && i <= *n => {
                Some(word >> (i - 1) & 1)
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Range { n: usize },
    Bitstrings { n: usize },
    Subsets { n: usize },
    VectorsModQ { n: usize, q: u64 },
    MultilinearPolys { n: usize, d: usize, q: u64 },
}

impl Domain {
    /// Cardinality, or `None` when it exceeds `u128`.
    pub fn size(&self) -> Option<u128> {
        match *self {
            Domain::Range { n } => Some(n as u128),
            Domain::Bitstrings { n } | Domain::Subsets { n } => {
                if n < 128 {
                    Some(1u128 << n)
                } else {
                    None
                }
            }
            Domain::VectorsModQ { n, q } => checked_pow(q as u128, n as u32),
            Domain::MultilinearPolys { n, d, q } => {
                let m = binomial_sum(n, d);
                let m32 = u32::try_from(m).ok()?;
                checked_pow(q as u128, m32)
            }
        }
    }

    /// The element with the given canonical index.
    ///
    /// Panics when the index is out of range; enumeration code always stays
    /// below [`Domain::size`].
    pub fn element(&self, index: u128) -> Element {
        match *self {
            Domain::Range { n } => {
                assert!(index < n as u128, "index out of range");
                Element::Num(index as u64 + 1)
            }
            Domain::Bitstrings { n } => {
                assert!(index < 1u128 << n, "index out of range");
                // Lexicographic: x_1 is the most significant digit.
                let mut word = 0u64;
                for i in 1..=n {
                    if index >> (n - i) & 1 == 1 {
                        word |= 1u64 << (i - 1);
                    }
                }
                Element::Bits { n, word }
            }
            Domain::Subsets { n } => Element::Set { n, mask: subset_at(n, index) },
            Domain::VectorsModQ { n, q } => {
                let mut digits = vec![0u64; n];
                let mut rest = index;
                for i in (0..n).rev() {
                    digits[i] = (rest % q as u128) as u64;
                    rest /= q as u128;
                }
                assert_eq!(rest, 0, "index out of range");
                Element::Vector(digits)
            }
            Domain::MultilinearPolys { n, d, q } => {
                let masks = monomials(n, d);
                let mut coeffs = BTreeMap::new();
                let mut rest = index;
                for &mask in masks.iter().rev() {
                    let c = (rest % q as u128) as u64;
                    rest /= q as u128;
                    if c != 0 {
                        coeffs.insert(mask, c);
                    }
                }
                assert_eq!(rest, 0, "index out of range");
                Element::Poly(MultilinearPoly::new(n, q, coeffs).expect("digits are reduced"))
            }
        }
    }

    /// Canonical index of an element, or `None` when it is not a member.
    pub fn index_of(&self, e: &Element) -> Option<u128> {
        match (*self, e) {
            (Domain::Range { n }, Element::Num(v)) => {
                (*v >= 1 && *v <= n as u64).then(|| *v as u128 - 1)
            }
            (Domain::Bitstrings { n }, Element::Bits { n: en, word }) if *en == n => {
                let mut idx: u128 = 0;
                for i in 1..=n {
                    idx = idx << 1 | (word >> (i - 1) & 1) as u128;
                }
                Some(idx)
            }
            (Domain::Subsets { n }, Element::Set { n: en, mask }) if *en == n => {
                Some(subset_index(n, *mask))
            }
            (Domain::VectorsModQ { n, q }, Element::Vector(v))
                if v.len() == n && v.iter().all(|&x| x < q) =>
            {
                Some(v.iter().fold(0u128, |acc, &x| acc * q as u128 + x as u128))
            }
            (Domain::MultilinearPolys { n, d, q }, Element::Poly(p))
                if p.n() == n && p.q() == q && p.degree() <= d =>
            {
                let masks = monomials(n, d);
                Some(
                    masks
                        .iter()
                        .fold(0u128, |acc, &m| acc * q as u128 + p.coeff(m) as u128),
                )
            }
            _ => None,
        }
    }

    pub fn contains(&self, e: &Element) -> bool {
        self.index_of(e).is_some()
    }
}

fn checked_pow(base: u128, exp: u32) -> Option<u128> {
    base.checked_pow(exp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(2, 3), 0);
        assert_eq!(binomial_sum(2, 1), 3); // C(2,0) + C(2,1)
        assert_eq!(binomial_sum(3, 3), 8);
        assert_eq!(binomial_sum(4, 2), 11);
    }

    #[test]
    fn subset_order_is_by_size_then_value() {
        let order: Vec<u64> = (0..8).map(|i| subset_at(3, i)).collect();
        assert_eq!(order, vec![0b000, 0b001, 0b010, 0b100, 0b011, 0b101, 0b110, 0b111]);
    }

    #[test]
    fn subset_complement_is_index_reversal() {
        for n in 1..=6 {
            let total = 1u128 << n;
            let full = (1u64 << n) - 1;
            for i in 0..total {
                let mask = subset_at(n, i);
                assert_eq!(subset_index(n, full ^ mask), total - 1 - i);
            }
        }
    }

    #[test]
    fn codecs_are_bijections() {
        let domains = [
            Domain::Range { n: 9 },
            Domain::Bitstrings { n: 5 },
            Domain::Subsets { n: 5 },
            Domain::VectorsModQ { n: 3, q: 4 },
            Domain::MultilinearPolys { n: 2, d: 1, q: 3 },
        ];
        for d in domains {
            let size = d.size().unwrap();
            for i in 0..size {
                let e = d.element(i);
                assert_eq!(d.index_of(&e), Some(i), "domain {d:?} index {i}");
            }
        }
    }

    #[test]
    fn bitstrings_are_lexicographic() {
        let d = Domain::Bitstrings { n: 3 };
        // index 0 -> 000, 1 -> 001, 4 -> 100 (x_1 most significant)
        assert_eq!(d.element(0), Element::bits_from_slice(&[0, 0, 0]));
        assert_eq!(d.element(1), Element::bits_from_slice(&[0, 0, 1]));
        assert_eq!(d.element(4), Element::bits_from_slice(&[1, 0, 0]));
    }

    #[test]
    fn vectors_are_lexicographic() {
        let d = Domain::VectorsModQ { n: 2, q: 3 };
        assert_eq!(d.element(0), Element::Vector(vec![0, 0]));
        assert_eq!(d.element(5), Element::Vector(vec![1, 2]));
        assert_eq!(d.size(), Some(9));
    }

    #[test]
    fn poly_domain_size_and_membership() {
        let d = Domain::MultilinearPolys { n: 2, d: 1, q: 3 };
        assert_eq!(d.size(), Some(27)); // 3^C(2,<=1) = 3^3
        let too_big = Element::Poly(
            MultilinearPoly::new(2, 3, BTreeMap::from([(0b11, 1)])).unwrap(),
        );
        assert!(!d.contains(&too_big)); // degree 2 > 1
    }

    #[test]
    fn lex_subsets_of_fixed_size() {
        let got: Vec<u64> = (0..6).map(|k| lex_subset_of_size(4, 2, k)).collect();
        // {1,2},{1,3},{1,4},{2,3},{2,4},{3,4}
        assert_eq!(got, vec![0b0011, 0b0101, 0b1001, 0b0110, 0b1010, 0b1100]);
    }

    #[test]
    fn out_of_domain_elements_have_no_index() {
        assert_eq!(Domain::Range { n: 3 }.index_of(&Element::Num(4)), None);
        assert_eq!(Domain::Range { n: 3 }.index_of(&Element::Num(0)), None);
        assert_eq!(
            Domain::VectorsModQ { n: 2, q: 3 }.index_of(&Element::Vector(vec![3, 0])),
            None
        );
        assert_eq!(
            Domain::Subsets { n: 3 }.index_of(&Element::Bits { n: 3, word: 0 }),
            None
        );
    }
}
