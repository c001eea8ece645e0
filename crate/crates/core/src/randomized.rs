//! Probabilistic inner-product encodings for EQ, NEQ, and GT.
//!
//! A probabilistic encoding is a seeded distribution over ordinary
//! encodings: sampling is a pure function of the seed, every sampled
//! encoding has length at most `max_length`, and for each pair `(x, y)`
//! the probability that `[⟨vx,vy⟩ = 0]` disagrees with the predicate is at
//! most the target ε. The hash families here make that per-pair
//! probability an exact closed form (hash values are tabulated uniformly,
//! not approximated), so reports can be exact as well as Monte-Carlo.
//!
//! Reports carry both the worst per-pair error and the average over the
//! pair grid (the error under a uniform random pair); which quantifier the
//! ε definition intends is ambiguous, so both are stated.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoders::Encoding;
use crate::modmath::is_prime;
use crate::predicates::Predicate;
use crate::rng::DetRng;
use crate::zqlinalg::{rank_mod_p, ZqMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RandError {
    #[error("epsilon must be strictly between 0 and 1, got {0}")]
    BadEps(f64),
    #[error("modulus {q} is too small for the error analysis: need q > {m}")]
    QTooSmallForError { q: u64, m: usize },
    #[error("exact error evaluation is unavailable for this encoding")]
    ExactUnavailable,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("bad support: {0}")]
    BadSupport(String),
    #[error("at least one trial is required")]
    NoTrials,
    #[error("bad parameters: {0}")]
    BadParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorSide {
    /// Never errs when `x = y`.
    OneSidedOnEqual,
    TwoSided,
}

/// The seeded constructions: tabulated uniform hash functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `vx = e_{h(x)}`, `vy = e_{h(y)}` for a uniform `h : [n] → [c]`;
    /// errs on `x ≠ y` exactly when `h` collides, probability `1/c`.
    NeqHash { n: usize, c: u64 },
    /// `vx = (1, e_{h(x)})`, `vy = (1, −e_{h(y)})`; inner product
    /// `1 − [h(x) = h(y)]`.
    EqHash { n: usize, c: u64 },
    /// Prefix hashing for greater-than on `m = ⌈log₂ n⌉`-bit numbers:
    /// block `i` compares the length-`(i−1)` prefixes through a uniform
    /// hash into `[c]`, gated by `x_i = 1` on one side and `y_i = 0` on
    /// the other; a constant coordinate subtracts the one genuine witness.
    GtPrefixHash { n: usize, m: usize, c: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilisticEncoding {
    q: u64,
    max_length: usize,
    target_eps: f64,
    error_side: ErrorSide,
    family: Family,
}

fn bucket_count(eps: f64) -> Result<u64, RandError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(RandError::BadEps(eps));
    }
    let c = (1.0 / eps).ceil() as u64;
    if !(1..=1 << 32).contains(&c) {
        return Err(RandError::BadEps(eps));
    }
    Ok(c)
}

/// Inequality over `[n]` with one-sided error `1/⌈1/ε⌉ ≤ ε` and length
/// `c = ⌈1/ε⌉`.
pub fn rand_encode_neq(n: usize, q: u64, eps: f64) -> Result<ProbabilisticEncoding, RandError> {
    if n == 0 || q < 2 {
        return Err(RandError::BadParams("need n >= 1 and q >= 2".into()));
    }
    let c = bucket_count(eps)?;
    Ok(ProbabilisticEncoding {
        q,
        max_length: c as usize,
        target_eps: eps,
        error_side: ErrorSide::OneSidedOnEqual,
        family: Family::NeqHash { n, c },
    })
}

/// Equality over `[n]` with one-sided error `1/⌈1/ε⌉ ≤ ε` and length
/// `c + 1`.
pub fn rand_encode_eq(n: usize, q: u64, eps: f64) -> Result<ProbabilisticEncoding, RandError> {
    if n == 0 || q < 2 {
        return Err(RandError::BadParams("need n >= 1 and q >= 2".into()));
    }
    let c = bucket_count(eps)?;
    Ok(ProbabilisticEncoding {
        q,
        max_length: c as usize + 1,
        target_eps: eps,
        error_side: ErrorSide::OneSidedOnEqual,
        family: Family::EqHash { n, c },
    })
}

/// Greater-than over `[n]` with per-pair error at most `m/c ≤ ε` for
/// `m = ⌈log₂ n⌉`, `c = ⌈m/ε⌉`, and length `1 + m·c`. Needs `q > m` so
/// the spurious-collision counts never wrap to a false zero.
pub fn rand_encode_gt(n: usize, q: u64, eps: f64) -> Result<ProbabilisticEncoding, RandError> {
    if n == 0 || q < 2 {
        return Err(RandError::BadParams("need n >= 1 and q >= 2".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(RandError::BadEps(eps));
    }
    let m = (n as u64).next_power_of_two().trailing_zeros() as usize;
    if q <= m as u64 {
        return Err(RandError::QTooSmallForError { q, m });
    }
    let c = if m == 0 { 1 } else { (m as f64 / eps).ceil() as u64 };
    if c > 1 << 32 {
        return Err(RandError::BadEps(eps));
    }
    Ok(ProbabilisticEncoding {
        q,
        max_length: 1 + m * c as usize,
        target_eps: eps,
        error_side: ErrorSide::TwoSided,
        family: Family::GtPrefixHash { n, m, c },
    })
}

/// The `i`-th bit (1-based, most significant first) of `x - 1` in `m` bits.
fn gt_bit(m: usize, x: u64, i: usize) -> u64 {
    (x - 1) >> (m - i) & 1
}

/// The length-`(i-1)` prefix of `x - 1` as an integer.
fn gt_prefix(m: usize, x: u64, i: usize) -> u64 {
    (x - 1) >> (m - i + 1)
}

impl ProbabilisticEncoding {
    pub fn q(&self) -> u64 {
        self.q
    }

    /// Length of the longest encoding in the distribution's support; every
    /// sample has exactly this length.
    pub fn max_length(&self) -> usize {
        self.max_length
    }

    pub fn target_eps(&self) -> f64 {
        self.target_eps
    }

    pub fn error_side(&self) -> ErrorSide {
        self.error_side
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn predicate(&self) -> Predicate {
        match self.family {
            Family::NeqHash { n, .. } => Predicate::neq(n),
            Family::EqHash { n, .. } => Predicate::eq(n),
            Family::GtPrefixHash { n, .. } => Predicate::gt(n),
        }
    }

    /// Materializes the encoding for one seed; identical seeds produce
    /// identical tables bit for bit.
    pub fn sample(&self, seed: u64) -> Encoding {
        let q = self.q;
        let mut rng = DetRng::new(seed);
        match self.family {
            Family::NeqHash { n, c } => {
                let h: Vec<u64> = (0..n).map(|_| rng.next_below(c)).collect();
                let unit = |b: u64| {
                    let mut v = vec![0u64; c as usize];
                    v[b as usize] = 1;
                    v
                };
                let x_vectors: Vec<Vec<u64>> = h.iter().map(|&b| unit(b)).collect();
                let y_vectors = x_vectors.clone();
                Encoding::new(q, c as usize, "rand_neq_hash", x_vectors, y_vectors)
                    .expect("entries are 0/1")
            }
            Family::EqHash { n, c } => {
                let h: Vec<u64> = (0..n).map(|_| rng.next_below(c)).collect();
                let x_vectors: Vec<Vec<u64>> = h
                    .iter()
                    .map(|&b| {
                        let mut v = vec![0u64; c as usize + 1];
                        v[0] = 1;
                        v[1 + b as usize] = 1;
                        v
                    })
                    .collect();
                let y_vectors: Vec<Vec<u64>> = h
                    .iter()
                    .map(|&b| {
                        let mut v = vec![0u64; c as usize + 1];
                        v[0] = 1;
                        v[1 + b as usize] = q - 1;
                        v
                    })
                    .collect();
                Encoding::new(q, c as usize + 1, "rand_eq_hash", x_vectors, y_vectors)
                    .expect("entries reduced")
            }
            Family::GtPrefixHash { n, m, c } => {
                // One table per bit position, indexed by the prefix value.
                let tables: Vec<Vec<u64>> = (1..=m)
                    .map(|i| (0..1u64 << (i - 1)).map(|_| rng.next_below(c)).collect())
                    .collect();
                let len = 1 + m * c as usize;
                let x_vectors: Vec<Vec<u64>> = (1..=n as u64)
                    .map(|x| {
                        let mut v = vec![0u64; len];
                        v[0] = 1;
                        for i in 1..=m {
                            if gt_bit(m, x, i) == 1 {
                                let h = tables[i - 1][gt_prefix(m, x, i) as usize];
                                v[1 + (i - 1) * c as usize + h as usize] = 1;
                            }
                        }
                        v
                    })
                    .collect();
                let y_vectors: Vec<Vec<u64>> = (1..=n as u64)
                    .map(|y| {
                        let mut v = vec![0u64; len];
                        v[0] = q - 1;
                        for i in 1..=m {
                            if gt_bit(m, y, i) == 0 {
                                let h = tables[i - 1][gt_prefix(m, y, i) as usize];
                                v[1 + (i - 1) * c as usize + h as usize] = 1;
                            }
                        }
                        v
                    })
                    .collect();
                Encoding::new(q, len, "rand_gt_prefix_hash", x_vectors, y_vectors)
                    .expect("entries reduced")
            }
        }
    }

    /// Exact per-pair error probability (`x`, `y` are 1-based elements).
    pub fn pair_error_exact(&self, x: u64, y: u64) -> f64 {
        match self.family {
            Family::NeqHash { c, .. } | Family::EqHash { c, .. } => {
                // Errs exactly when the hash collides on a distinct pair.
                if x == y {
                    0.0
                } else {
                    1.0 / c as f64
                }
            }
            Family::GtPrefixHash { m, c, .. } => {
                if x == y {
                    return 0.0;
                }
                // Positions that can contribute a spurious collision:
                // differing prefixes with the witness bit pattern (1, 0).
                let mut spurious = 0u32;
                for i in 1..=m {
                    if gt_prefix(m, x, i) != gt_prefix(m, y, i)
                        && gt_bit(m, x, i) == 1
                        && gt_bit(m, y, i) == 0
                    {
                        spurious += 1;
                    }
                }
                let p = 1.0 / c as f64;
                let s = spurious;
                if x > y {
                    // One genuine witness; errs iff any spurious collision.
                    1.0 - (1.0 - p).powi(s as i32)
                } else {
                    // No witness; errs iff exactly one spurious collision.
                    s as f64 * p * (1.0 - p).powi(s as i32 - 1)
                }
            }
        }
    }

    fn domain_size(&self) -> usize {
        match self.family {
            Family::NeqHash { n, .. } | Family::EqHash { n, .. } | Family::GtPrefixHash { n, .. } => n,
        }
    }

    /// One Monte-Carlo observation of the pair `(x, y)`: whether the
    /// sampled inner product's zero-test disagrees with the predicate.
    /// Only the hash values the pair touches are drawn, which matches the
    /// distribution of sampling a full encoding and restricting it.
    fn pair_trial_errs(&self, x: u64, y: u64, rng: &mut DetRng) -> bool {
        match self.family {
            Family::NeqHash { c, .. } => {
                let hx = rng.next_below(c);
                let hy = if x == y { hx } else { rng.next_below(c) };
                // ip = [hx = hy]; predicate is x ≠ y.
                ((hx == hy) as u64 != 1) != (x != y)
            }
            Family::EqHash { c, .. } => {
                let hx = rng.next_below(c);
                let hy = if x == y { hx } else { rng.next_below(c) };
                // ip = 1 - [hx = hy]; predicate is x = y.
                (hx == hy) != (x == y)
            }
            Family::GtPrefixHash { m, c, .. } => {
                let mut witnesses = 0u64;
                for i in 1..=m {
                    if gt_bit(m, x, i) != 1 || gt_bit(m, y, i) != 0 {
                        continue;
                    }
                    let collide = if gt_prefix(m, x, i) == gt_prefix(m, y, i) {
                        true
                    } else {
                        rng.next_below(c) == rng.next_below(c)
                    };
                    if collide {
                        witnesses += 1;
                    }
                }
                let ip = (witnesses + self.q - 1) % self.q;
                (ip == 0) != (x > y)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorMode {
    Exact,
    MonteCarlo,
}

/// Error evaluation summary. `worst_pair_error` is the maximum per-pair
/// error over the grid; `avg_error` is the mean (the error of a uniform
/// random pair). Exact mode reports true probabilities; Monte-Carlo
/// reports empirical frequencies with a 3σ radius for the worst pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub mode: ErrorMode,
    pub worst_pair_error: f64,
    pub avg_error: f64,
    pub trials: u64,
    pub pairs_checked: u64,
    pub confidence_radius: Option<f64>,
}

/// Maximum number of pairs evaluated per report; larger grids are
/// subsampled deterministically (evenly spaced elements).
const MC_GRID_SIDE: usize = 64;

fn pair_grid(n: usize) -> Vec<u64> {
    if n <= MC_GRID_SIDE {
        (1..=n as u64).collect()
    } else {
        (0..MC_GRID_SIDE).map(|i| 1 + (i * (n - 1) / (MC_GRID_SIDE - 1)) as u64).collect()
    }
}

/// Evaluates the per-pair error of a probabilistic encoding.
///
/// Exact mode walks the full pair grid with the closed-form collision
/// probabilities. Monte-Carlo samples `trials` independent seed-derived
/// encodings per pair; per-(pair, trial) substreams make the result
/// independent of evaluation order.
pub fn estimate_error(
    pe: &ProbabilisticEncoding,
    mode: ErrorMode,
    trials: u64,
    seed: u64,
) -> Result<ErrorReport, RandError> {
    let n = pe.domain_size();
    match mode {
        ErrorMode::Exact => {
            let mut worst = 0.0f64;
            let mut total = 0.0f64;
            for x in 1..=n as u64 {
                for y in 1..=n as u64 {
                    let e = pe.pair_error_exact(x, y);
                    worst = worst.max(e);
                    total += e;
                }
            }
            let pairs = (n * n) as u64;
            Ok(ErrorReport {
                mode,
                worst_pair_error: worst,
                avg_error: total / pairs as f64,
                trials: 0,
                pairs_checked: pairs,
                confidence_radius: None,
            })
        }
        ErrorMode::MonteCarlo => {
            if trials == 0 {
                return Err(RandError::NoTrials);
            }
            let grid = pair_grid(n);
            let mut worst = 0.0f64;
            let mut total = 0.0f64;
            let mut pairs = 0u64;
            for (xi, &x) in grid.iter().enumerate() {
                for (yi, &y) in grid.iter().enumerate() {
                    let pair_id = (xi * grid.len() + yi) as u64;
                    let mut errors = 0u64;
                    for trial in 0..trials {
                        let mut rng = DetRng::substream(seed, &[pair_id, trial]);
                        if pe.pair_trial_errs(x, y, &mut rng) {
                            errors += 1;
                        }
                    }
                    let freq = errors as f64 / trials as f64;
                    worst = worst.max(freq);
                    total += freq;
                    pairs += 1;
                }
            }
            let sigma = (worst * (1.0 - worst) / trials as f64).sqrt();
            Ok(ErrorReport {
                mode,
                worst_pair_error: worst,
                avg_error: total / pairs as f64,
                trials,
                pairs_checked: pairs,
                confidence_radius: Some(3.0 * sigma),
            })
        }
    }
}

/// The probabilistic-rank upper bound: the maximum rank over the support
/// of an explicit matrix distribution. Any member of the support defines
/// an encoding of its own rank (via rank factorization), so a distribution
/// computing a representing matrix entrywise with error ε yields a
/// probabilistic encoding of at most this length.
pub fn prob_rank_upper(support: &[(ZqMatrix, f64)]) -> Result<usize, RandError> {
    if support.is_empty() {
        return Err(RandError::BadSupport("empty support".into()));
    }
    let q = support[0].0.q();
    if !is_prime(q) {
        return Err(RandError::NotPrime(q));
    }
    let mut max_rank = 0;
    for (m, w) in support {
        if m.q() != q {
            return Err(RandError::BadSupport("mixed moduli in support".into()));
        }
        // NaN weights fail this comparison and are rejected too.
        if w.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(RandError::BadSupport("weights must be positive".into()));
        }
        let r = rank_mod_p(m, q).map_err(|_| RandError::NotPrime(q))?;
        max_rank = max_rank.max(r);
    }
    Ok(max_rank)
}
