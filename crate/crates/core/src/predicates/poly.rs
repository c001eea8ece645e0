//! Multilinear polynomials over `Z_q` in sparse monomial form.

use std::collections::BTreeMap;

use super::PredicateError;

/// A multilinear polynomial `p(x_1..x_n) = Σ_S a_S · Π_{i∈S} x_i` with
/// coefficients in `Z_q`. Monomials are keyed by the subset mask of their
/// variables (bit `i-1` set means `x_i` occurs); zero coefficients are not
/// stored, so equal polynomials compare equal structurally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultilinearPoly {
    n: usize,
    q: u64,
    coeffs: BTreeMap<u64, u64>,
}

impl MultilinearPoly {
    pub fn new(n: usize, q: u64, coeffs: BTreeMap<u64, u64>) -> Result<Self, PredicateError> {
        if q < 2 {
            return Err(PredicateError::BadParams("polynomial modulus must be at least 2".into()));
        }
        if n > 63 {
            return Err(PredicateError::BadParams("at most 63 variables are supported".into()));
        }
        let full: u64 = (1u64 << n) - 1;
        let mut canon = BTreeMap::new();
        for (&mask, &c) in &coeffs {
            if mask & !full != 0 {
                return Err(PredicateError::BadParams(
                    "monomial uses a variable outside [n]".into(),
                ));
            }
            if c >= q {
                return Err(PredicateError::BadParams(
                    "coefficient not reduced modulo q".into(),
                ));
            }
            if c != 0 {
                canon.insert(mask, c);
            }
        }
        Ok(MultilinearPoly { n, q, coeffs: canon })
    }

    pub fn zero(n: usize, q: u64) -> Self {
        MultilinearPoly { n, q, coeffs: BTreeMap::new() }
    }

    /// The single monomial `Π_{i∈S} x_i` with coefficient 1.
    pub fn monomial(n: usize, q: u64, mask: u64) -> Result<Self, PredicateError> {
        Self::new(n, q, BTreeMap::from([(mask, 1 % q)]))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn coeffs(&self) -> &BTreeMap<u64, u64> {
        &self.coeffs
    }

    pub fn coeff(&self, mask: u64) -> u64 {
        self.coeffs.get(&mask).copied().unwrap_or(0)
    }

    /// Largest monomial size with a non-zero coefficient (0 for constants
    /// and the zero polynomial).
    pub fn degree(&self) -> usize {
        self.coeffs
            .keys()
            .map(|m| m.count_ones() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, x: &[u64]) -> u64 {
        debug_assert_eq!(x.len(), self.n);
        let q = self.q as u128;
        let mut acc: u128 = 0;
        for (&mask, &c) in &self.coeffs {
            let mut term = c as u128;
            let mut bits = mask;
            while bits != 0 {
                let i = bits.trailing_zeros() as usize;
                term = term * (x[i] as u128 % q) % q;
                bits &= bits - 1;
            }
            acc = (acc + term) % q;
        }
        acc as u64
    }

    /// Multiplies by the affine factor `(Σ_{i∈vars} x_i + constant)`,
    /// reducing powers via `x_i^2 = x_i` (inputs are 0/1 characteristic
    /// vectors wherever this is used).
    pub fn mul_affine_factor(&self, vars: u64, constant: u64) -> Self {
        let q = self.q;
        let mut out: BTreeMap<u64, u64> = BTreeMap::new();
        let mut add = |mask: u64, v: u64| {
            if v == 0 {
                return;
            }
            let e = out.entry(mask).or_insert(0);
            *e = (*e + v) % q;
        };
        for (&mask, &c) in &self.coeffs {
            let mut bits = vars;
            while bits != 0 {
                let i = bits.trailing_zeros();
                add(mask | (1u64 << i), c);
                bits &= bits - 1;
            }
            add(mask, (c as u128 * constant as u128 % q as u128) as u64);
        }
        out.retain(|_, v| *v != 0);
        MultilinearPoly { n: self.n, q, coeffs: out }
    }
}

/// The threshold polynomial `Π_{j=t}^{n} (Σ_{i∈T} x_i − j)` expanded to
/// multilinear form; on characteristic vectors its value is 0 exactly when
/// `|S ∩ T| ≥ t`.
pub fn threshold_poly(n: usize, t: usize, q: u64, t_mask: u64) -> MultilinearPoly {
    let mut p = MultilinearPoly::new(n, q, BTreeMap::from([(0, 1 % q)])).expect("valid constant");
    for j in t..=n {
        let neg_j = (q - (j as u64 % q)) % q;
        p = p.mul_affine_factor(t_mask, neg_j);
    }
    p
}

/// The polynomial `Π_{i=1}^{n} (x_i − y_i)`, already multilinear since each
/// factor touches a distinct variable. Its coefficient on `X_S` is
/// `Π_{i∉S} (−y_i)`.
pub fn oreq_poly(n: usize, q: u64, y: &[u64]) -> MultilinearPoly {
    debug_assert_eq!(y.len(), n);
    let mut p = MultilinearPoly::new(n, q, BTreeMap::from([(0, 1 % q)])).expect("valid constant");
    for (i, &yi) in y.iter().enumerate() {
        let neg_yi = (q - yi % q) % q;
        p = p.mul_affine_factor(1u64 << i, neg_yi);
    }
    p
}
