//! Predicate families with enumerable domains, zero-pattern extraction,
//! and predicate reductions.
//!
//! A predicate is a finite Boolean function `P : X × Y → {0,1}`. In this
//! crate "true" corresponds to an inner product of 0 mod q, which is why
//! e.g. the index predicate is defined as `[x_i = 0]`.

mod domain;
mod poly;
mod reduction;

pub use domain::{
    binomial, binomial_sum, lex_subset_of_size, monomials, subset_at, subset_index, Domain,
    Element,
};
pub use poly::{oreq_poly, threshold_poly, MultilinearPoly};
pub use reduction::{builtin_reduction, BuiltinReduction, Reduction};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::ZeroPattern;

/// Default cap on `|X| · |Y|` for exhaustive enumeration.
pub const DEFAULT_CELL_CAP: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PredicateError {
    #[error("element does not belong to the expected domain")]
    DomainMismatch,
    #[error("enumerating {cells} cells exceeds the cap of {cap}")]
    TooLarge { cells: u128, cap: u64 },
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("reduction invariant violated at pair ({x}, {y})")]
    InvariantViolated { x: u128, y: u128 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PredicateKind {
    /// `EQ_n(x, y) = [x = y]` on `[n] × [n]`.
    Eq { n: usize },
    /// `GT_n(x, y) = [x > y]` on `[n] × [n]`.
    Gt { n: usize },
    /// `NEQ_n(x, y) = [x ≠ y]` on `[n] × [n]`.
    Neq { n: usize },
    /// `INDEX_n(x, i) = [x_i = 0]` on `{0,1}^n × [n]`.
    Index { n: usize },
    /// `DISJ_n(S, T) = [S ∩ T = ∅]` on subsets of `[n]`.
    Disj { n: usize },
    /// `ETHR_n^t(S, T) = [|S ∩ T| = t]`, `1 ≤ t ≤ n`.
    Ethr { n: usize, t: usize },
    /// `THR_n^t(S, T) = [|S ∩ T| ≥ t]`, `1 ≤ t ≤ n`.
    Thr { n: usize, t: usize },
    /// `MPOLY_n^{d,q}(x, p) = [p(x) ≡ 0 mod q]` on `Z_q^n ×` (multilinear
    /// polynomials of degree ≤ d).
    Mpoly { n: usize, d: usize, q: u64 },
    /// `OR-EQ_n^q(x, y) = [∃i: x_i = y_i]` on `Z_q^n × Z_q^n`.
    OrEq { n: usize, q: u64 },
    /// An explicit truth table on `[rows] × [cols]`.
    Table { rows: usize, cols: usize, bits: Vec<bool> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Predicate {
    kind: PredicateKind,
}

impl Predicate {
    pub fn new(kind: PredicateKind) -> Result<Self, PredicateError> {
        let bad = |msg: &str| Err(PredicateError::BadParams(msg.into()));
        match &kind {
            PredicateKind::Eq { n } | PredicateKind::Gt { n } | PredicateKind::Neq { n } => {
                if *n == 0 {
                    return bad("n must be at least 1");
                }
            }
            PredicateKind::Index { n } | PredicateKind::Disj { n } => {
                if *n == 0 || *n > 63 {
                    return bad("n must be in 1..=63");
                }
            }
            PredicateKind::Ethr { n, t } | PredicateKind::Thr { n, t } => {
                if *n == 0 || *n > 63 {
                    return bad("n must be in 1..=63");
                }
                if *t == 0 || *t > *n {
                    return bad("threshold t must satisfy 1 <= t <= n");
                }
            }
            PredicateKind::Mpoly { n, d, q } => {
                if *n == 0 || *n > 63 {
                    return bad("n must be in 1..=63");
                }
                if *d > *n {
                    return bad("degree bound d must be at most n");
                }
                if *q < 2 {
                    return bad("modulus must be at least 2");
                }
            }
            PredicateKind::OrEq { n, q } => {
                if *n == 0 || *n > 63 {
                    return bad("n must be in 1..=63");
                }
                if *q < 2 {
                    return bad("modulus must be at least 2");
                }
            }
            PredicateKind::Table { rows, cols, bits } => {
                if *rows == 0 || *cols == 0 {
                    return bad("table dimensions must be positive");
                }
                if bits.len() != rows * cols {
                    return bad("table bit count does not match dimensions");
                }
            }
        }
        Ok(Predicate { kind })
    }

    pub fn eq(n: usize) -> Self {
        Self::new(PredicateKind::Eq { n }).expect("valid")
    }

    pub fn gt(n: usize) -> Self {
        Self::new(PredicateKind::Gt { n }).expect("valid")
    }

    pub fn neq(n: usize) -> Self {
        Self::new(PredicateKind::Neq { n }).expect("valid")
    }

    pub fn index(n: usize) -> Result<Self, PredicateError> {
        Self::new(PredicateKind::Index { n })
    }

    pub fn disj(n: usize) -> Result<Self, PredicateError> {
        Self::new(PredicateKind::Disj { n })
    }

    pub fn ethr(n: usize, t: usize) -> Result<Self, PredicateError> {
        Self::new(PredicateKind::Ethr { n, t })
    }

    pub fn thr(n: usize, t: usize) -> Result<Self, PredicateError> {
        Self::new(PredicateKind::Thr { n, t })
    }

    pub fn mpoly(n: usize, d: usize, q: u64) -> Result<Self, PredicateError> {
        Self::new(PredicateKind::Mpoly { n, d, q })
    }

    pub fn or_eq(n: usize, q: u64) -> Result<Self, PredicateError> {
        Self::new(PredicateKind::OrEq { n, q })
    }

    pub fn table(rows: usize, cols: usize, bits: Vec<bool>) -> Result<Self, PredicateError> {
        Self::new(PredicateKind::Table { rows, cols, bits })
    }

    pub fn kind(&self) -> &PredicateKind {
        &self.kind
    }

    pub fn id(&self) -> &'static str {
        match self.kind {
            PredicateKind::Eq { .. } => "EQ",
            PredicateKind::Gt { .. } => "GT",
            PredicateKind::Neq { .. } => "NEQ",
            PredicateKind::Index { .. } => "INDEX",
            PredicateKind::Disj { .. } => "DISJ",
            PredicateKind::Ethr { .. } => "ETHR",
            PredicateKind::Thr { .. } => "THR",
            PredicateKind::Mpoly { .. } => "MPOLY",
            PredicateKind::OrEq { .. } => "OR_EQ",
            PredicateKind::Table { .. } => "TABLE",
        }
    }

    pub fn x_domain(&self) -> Domain {
        match self.kind {
            PredicateKind::Eq { n } | PredicateKind::Gt { n } | PredicateKind::Neq { n } => {
                Domain::Range { n }
            }
            PredicateKind::Index { n } => Domain::Bitstrings { n },
            PredicateKind::Disj { n }
            | PredicateKind::Ethr { n, .. }
            | PredicateKind::Thr { n, .. } => Domain::Subsets { n },
            PredicateKind::Mpoly { n, q, .. } => Domain::VectorsModQ { n, q },
            PredicateKind::OrEq { n, q } => Domain::VectorsModQ { n, q },
            PredicateKind::Table { rows, .. } => Domain::Range { n: rows },
        }
    }

    pub fn y_domain(&self) -> Domain {
        match self.kind {
            PredicateKind::Eq { n } | PredicateKind::Gt { n } | PredicateKind::Neq { n } => {
                Domain::Range { n }
            }
            PredicateKind::Index { n } => Domain::Range { n },
            PredicateKind::Disj { n }
            | PredicateKind::Ethr { n, .. }
            | PredicateKind::Thr { n, .. } => Domain::Subsets { n },
            PredicateKind::Mpoly { n, d, q } => Domain::MultilinearPolys { n, d, q },
            PredicateKind::OrEq { n, q } => Domain::VectorsModQ { n, q },
            PredicateKind::Table { cols, .. } => Domain::Range { n: cols },
        }
    }

    /// The modulus baked into the predicate definition, when there is one.
    pub fn embedded_modulus(&self) -> Option<u64> {
        match self.kind {
            PredicateKind::Mpoly { q, .. } | PredicateKind::OrEq { q, .. } => Some(q),
            _ => None,
        }
    }

    pub fn eval(&self, x: &Element, y: &Element) -> Result<bool, PredicateError> {
        if !self.x_domain().contains(x) || !self.y_domain().contains(y) {
            return Err(PredicateError::DomainMismatch);
        }
        Ok(match (&self.kind, x, y) {
            (PredicateKind::Eq { .. }, Element::Num(a), Element::Num(b)) => a == b,
            (PredicateKind::Gt { .. }, Element::Num(a), Element::Num(b)) => a > b,
            (PredicateKind::Neq { .. }, Element::Num(a), Element::Num(b)) => a != b,
            (PredicateKind::Index { .. }, Element::Bits { word, .. }, Element::Num(i)) => {
                word >> (i - 1) & 1 == 0
            }
            (PredicateKind::Disj { .. }, Element::Set { mask: s, .. }, Element::Set { mask: t, .. }) => {
                s & t == 0
            }
            (
                PredicateKind::Ethr { t, .. },
                Element::Set { mask: s, .. },
                Element::Set { mask: tt, .. },
            ) => (s & tt).count_ones() as usize == *t,
            (
                PredicateKind::Thr { t, .. },
                Element::Set { mask: s, .. },
                Element::Set { mask: tt, .. },
            ) => (s & tt).count_ones() as usize >= *t,
            (PredicateKind::Mpoly { .. }, Element::Vector(v), Element::Poly(p)) => {
                p.eval(v) == 0
            }
            (PredicateKind::OrEq { .. }, Element::Vector(a), Element::Vector(b)) => {
                a.iter().zip(b).any(|(u, v)| u == v)
            }
            (PredicateKind::Table { cols, bits, .. }, Element::Num(a), Element::Num(b)) => {
                bits[(*a as usize - 1) * cols + (*b as usize - 1)]
            }
            _ => unreachable!("domain membership was checked"),
        })
    }

    /// Evaluation by canonical indices.
    pub fn eval_index(&self, xi: u128, yi: u128) -> bool {
        let x = self.x_domain().element(xi);
        let y = self.y_domain().element(yi);
        self.eval(&x, &y).expect("canonical elements are in-domain")
    }

    /// Number of `(x, y)` pairs, or `None` on overflow.
    pub fn pair_count(&self) -> Option<u128> {
        self.x_domain().size()?.checked_mul(self.y_domain().size()?)
    }

    /// The forced zero/non-zero pattern every representing matrix must
    /// match: forced-zero exactly where the predicate is true.
    pub fn zero_pattern(&self) -> Result<ZeroPattern, PredicateError> {
        self.zero_pattern_capped(DEFAULT_CELL_CAP)
    }

    pub fn zero_pattern_capped(&self, cap: u64) -> Result<ZeroPattern, PredicateError> {
        let cells = self
            .pair_count()
            .ok_or(PredicateError::TooLarge { cells: u128::MAX, cap })?;
        if cells > cap as u128 {
            return Err(PredicateError::TooLarge { cells, cap });
        }
        let rows = self.x_domain().size().unwrap() as usize;
        let cols = self.y_domain().size().unwrap() as usize;
        let mut forced_zero = Vec::with_capacity(rows * cols);
        for xi in 0..rows {
            for yi in 0..cols {
                forced_zero.push(self.eval_index(xi as u128, yi as u128));
            }
        }
        Ok(ZeroPattern::new(rows, cols, forced_zero))
    }
}

/// JSON shape: `{"id":"GT","n":8}`, `{"id":"ETHR","n":5,"t":2}`,
/// `{"id":"MPOLY","n":2,"d":1,"q":3}`, `{"id":"TABLE","rows":2,"cols":2,"bits":[1,0,0,1]}`.
#[derive(Serialize, Deserialize)]
#[serde(tag = "id")]
enum PredicateJson {
    #[serde(rename = "EQ")]
    Eq { n: usize },
    #[serde(rename = "GT")]
    Gt { n: usize },
    #[serde(rename = "NEQ")]
    Neq { n: usize },
    #[serde(rename = "INDEX")]
    Index { n: usize },
    #[serde(rename = "DISJ")]
    Disj { n: usize },
    #[serde(rename = "ETHR")]
    Ethr { n: usize, t: usize },
    #[serde(rename = "THR")]
    Thr { n: usize, t: usize },
    #[serde(rename = "MPOLY")]
    Mpoly { n: usize, d: usize, q: u64 },
    #[serde(rename = "OR_EQ")]
    OrEq { n: usize, q: u64 },
    #[serde(rename = "TABLE")]
    Table { rows: usize, cols: usize, bits: Vec<u8> },
}

impl Serialize for Predicate {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let json = match self.kind.clone() {
            PredicateKind::Eq { n } => PredicateJson::Eq { n },
            PredicateKind::Gt { n } => PredicateJson::Gt { n },
            PredicateKind::Neq { n } => PredicateJson::Neq { n },
            PredicateKind::Index { n } => PredicateJson::Index { n },
            PredicateKind::Disj { n } => PredicateJson::Disj { n },
            PredicateKind::Ethr { n, t } => PredicateJson::Ethr { n, t },
            PredicateKind::Thr { n, t } => PredicateJson::Thr { n, t },
            PredicateKind::Mpoly { n, d, q } => PredicateJson::Mpoly { n, d, q },
            PredicateKind::OrEq { n, q } => PredicateJson::OrEq { n, q },
            PredicateKind::Table { rows, cols, bits } => PredicateJson::Table {
                rows,
                cols,
                bits: bits.into_iter().map(u8::from).collect(),
            },
        };
        json.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Predicate {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let json = PredicateJson::deserialize(deserializer)?;
        let kind = match json {
            PredicateJson::Eq { n } => PredicateKind::Eq { n },
            PredicateJson::Gt { n } => PredicateKind::Gt { n },
            PredicateJson::Neq { n } => PredicateKind::Neq { n },
            PredicateJson::Index { n } => PredicateKind::Index { n },
            PredicateJson::Disj { n } => PredicateKind::Disj { n },
            PredicateJson::Ethr { n, t } => PredicateKind::Ethr { n, t },
            PredicateJson::Thr { n, t } => PredicateKind::Thr { n, t },
            PredicateJson::Mpoly { n, d, q } => PredicateKind::Mpoly { n, d, q },
            PredicateJson::OrEq { n, q } => PredicateKind::OrEq { n, q },
            PredicateJson::Table { rows, cols, bits } => PredicateKind::Table {
                rows,
                cols,
                bits: bits.into_iter().map(|b| b != 0).collect(),
            },
        };
        Predicate::new(kind).map_err(serde::de::Error::custom)
    }
}
