//! Inner-product predicate encodings over `Z_q`.
//!
//! A predicate `P : X × Y → {0,1}` is *encoded* by a pair of maps
//! `x ↦ vx, y ↦ vy` into `Z_q^ℓ` when `P(x,y) = 1 ⟺ ⟨vx,vy⟩ ≡ 0 (mod q)`.
//! This crate builds such encodings for a family of standard predicates
//! (equality, greater-than, index, disjointness, thresholds, multilinear
//! polynomial evaluation, disjunctions of equality tests), verifies them
//! exhaustively, and produces machine-checkable lower-bound certificates on
//! the minimum encoding length via matrix rank over prime fields and a
//! CRT pigeonhole step for square-free composite moduli.
//!
//! Module map:
//! - [`modmath`]: exact modular arithmetic, deterministic primality,
//!   square-free factorization, primes in arithmetic progressions.
//! - [`zqlinalg`]: matrices over `Z_q`, rank and rank factorization over
//!   `Z_p`, triangular witnesses, the pigeonhole factor step.
//! - [`predicates`]: predicate families, enumerable domains with canonical
//!   element indexing, and predicate reductions.
//! - [`encoders`]: every deterministic construction plus the generic
//!   matrix-derived encoder and the exhaustive verifier.
//! - [`bounds`]: zero patterns, the exact minimum-rank oracle, and
//!   lower-bound certificates.
//! - [`randomized`]: probabilistic encodings for EQ/NEQ/GT with exact and
//!   Monte-Carlo error evaluation.

pub mod bounds;
pub mod encoders;
pub mod modmath;
pub mod predicates;
pub mod randomized;
pub mod rng;
pub mod zqlinalg;

pub use bounds::{Certificate, ZeroPattern};
pub use encoders::{Encoding, VerificationReport};
pub use modmath::Modulus;
pub use predicates::{Domain, Element, Predicate, Reduction};
pub use zqlinalg::ZqMatrix;
