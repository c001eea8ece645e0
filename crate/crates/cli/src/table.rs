//! Desk-scale reproduction of the upper/lower bounds summary: for each
//! predicate family and small `n`, the constructed encoding length against
//! the certified lower bound, at a prime and at a two-factor composite
//! modulus. Cells where the exact small-case value is sharper than the
//! general formula are annotated rather than treated as failures: the
//! formulas are one-sided bounds, so a sharper exact value is consistent.

use serde::Serialize;

use ipe_core::bounds::{self, min_rank_oracle, OracleCap};
use ipe_core::encoders::{self, verify, Encoding};
use ipe_core::modmath::{factorize, is_prime};
use ipe_core::predicates::{binomial, binomial_sum, Predicate};

#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub predicate: String,
    pub n: usize,
    /// Extra parameters, e.g. "t=2" or "d=2".
    pub params: String,
    /// Modulus description, e.g. "q=11 (prime)" or "q=6 (k=2)".
    pub modulus: String,
    /// Constructed encoding length; absent when no construction applies
    /// at this modulus.
    pub upper: Option<u64>,
    /// Certified lower bound.
    pub lower: Option<u64>,
    /// Whether the constructed encoding passed exhaustive verification.
    pub verified: bool,
    pub note: String,
}

fn smallest_prime_at_least(n: u64) -> u64 {
    let mut c = n.max(2);
    while !is_prime(c) {
        c += 1;
    }
    c
}

fn verified_len(p: &Predicate, e: &Encoding) -> (Option<u64>, bool) {
    match verify(p, e) {
        Ok(report) if report.is_correct() => (Some(e.length() as u64), true),
        // A failed verification is reported, never silently patched.
        Ok(_) => (Some(e.length() as u64), false),
        Err(_) => (Some(e.length() as u64), false),
    }
}

struct RowBuilder {
    rows: Vec<TableRow>,
}

impl RowBuilder {
    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        predicate: &str,
        n: usize,
        params: &str,
        modulus: String,
        upper: Option<u64>,
        lower: Option<u64>,
        verified: bool,
        note: String,
    ) {
        self.rows.push(TableRow {
            predicate: predicate.into(),
            n,
            params: params.into(),
            modulus,
            upper,
            lower,
            verified,
            note,
        });
    }
}

/// Builds the rows for every predicate family at `2..=max_n`.
pub fn build_table(max_n: usize) -> Result<Vec<TableRow>, String> {
    let err = |e: &dyn std::fmt::Display| e.to_string();
    let mut b = RowBuilder { rows: Vec::new() };
    let m6 = factorize(6).unwrap();

    for n in 2..=max_n {
        let nu = n as u64;

        // EQ at q = 2: length-n construction against the n-1 rank
        // argument; the exact minimum (the unique representing matrix) is
        // n for even n, which is sharper than the formula.
        {
            let p = Predicate::eq(n);
            let e = encoders::encode_eq_mod2(n).map_err(|e| err(&e))?;
            let (upper, verified) = verified_len(&p, &e);
            let z = p.zero_pattern().map_err(|e| err(&e))?;
            let exact = min_rank_oracle(&z, 2, &OracleCap::default()).map_err(|e| err(&e))?;
            let formula = nu - 1;
            let note = if exact > formula {
                format!("exact minimum is {exact}, sharper than the {formula} rank argument")
            } else {
                String::new()
            };
            b.push("EQ", n, "", "q=2 (prime)".into(), upper, Some(formula), verified, note);
        }

        // EQ at a prime q >= n: the length-2 pair construction. The exact
        // minimum is enumerable only at tiny n.
        {
            let q = smallest_prime_at_least(nu.max(3));
            let p = Predicate::eq(n);
            let e = encoders::encode_eq_large_q(n, q).map_err(|e| err(&e))?;
            let (upper, verified) = verified_len(&p, &e);
            let (lower, note) = if n <= 3 {
                let z = p.zero_pattern().map_err(|e| err(&e))?;
                let exact = min_rank_oracle(&z, q, &OracleCap::default()).map_err(|e| err(&e))?;
                (Some(exact), "lower bound from the exact minimum-rank search".to_string())
            } else {
                (None, "exact search not run at this size".to_string())
            };
            b.push("EQ", n, "", format!("q={q} (prime)"), upper, lower, verified, note);
        }

        // GT, NEQ, INDEX: n at primes, ceil(n/k) at composites, both tight.
        let m11 = factorize(11).unwrap();
        {
            let p = Predicate::gt(n);
            let e = encoders::encode_gt_prime(n, 11).map_err(|e| err(&e))?;
            let (upper, verified) = verified_len(&p, &e);
            let c = bounds::builtin_bound(&p, &m11).map_err(|e| err(&e))?;
            b.push("GT", n, "", "q=11 (prime)".into(), upper, Some(c.bound), verified, String::new());

            let e = encoders::encode_gt(n, &m6).map_err(|e| err(&e))?;
            let (upper, verified) = verified_len(&p, &e);
            let c = bounds::builtin_bound(&p, &m6).map_err(|e| err(&e))?;
            b.push("GT", n, "", "q=6 (k=2)".into(), upper, Some(c.bound), verified, String::new());
        }
        {
            let p = Predicate::neq(n);
            let e = encoders::encode_neq(n, &m11).map_err(|e| err(&e))?;
            let (upper, verified) = verified_len(&p, &e);
            let c = bounds::builtin_bound(&p, &m11).map_err(|e| err(&e))?;
            b.push("NEQ", n, "", "q=11 (prime)".into(), upper, Some(c.bound), verified, String::new());

            let e = encoders::encode_neq(n, &m6).map_err(|e| err(&e))?;
            let (upper, verified) = verified_len(&p, &e);
            let c = bounds::builtin_bound(&p, &m6).map_err(|e| err(&e))?;
            b.push("NEQ", n, "", "q=6 (k=2)".into(), upper, Some(c.bound), verified, String::new());
        }
        {
            let p = Predicate::index(n).map_err(|e| err(&e))?;
            let e = encoders::encode_index(n, &m11).map_err(|e| err(&e))?;
            let (upper, verified) = verified_len(&p, &e);
            let c = bounds::builtin_bound(&p, &m11).map_err(|e| err(&e))?;
            b.push("INDEX", n, "", "q=11 (prime)".into(), upper, Some(c.bound), verified, String::new());

            let e = encoders::encode_index(n, &m6).map_err(|e| err(&e))?;
            let (upper, verified) = verified_len(&p, &e);
            let c = bounds::builtin_bound(&p, &m6).map_err(|e| err(&e))?;
            b.push("INDEX", n, "", "q=6 (k=2)".into(), upper, Some(c.bound), verified, String::new());
        }

        // DISJ constructs its own modulus per k.
        for k in [1usize, 2] {
            if k > n {
                continue;
            }
            let p = Predicate::disj(n).map_err(|e| err(&e))?;
            let (m, e) = encoders::encode_disj(n, k).map_err(|e| err(&e))?;
            let (upper, verified) = verified_len(&p, &e);
            let c = bounds::builtin_bound(&p, &m).map_err(|e| err(&e))?;
            b.push(
                "DISJ",
                n,
                "",
                format!("q={} (k={k}, constructed)", m.q()),
                upper,
                Some(c.bound),
                verified,
                format!("primes {:?}", m.factors()),
            );
        }

        // ETHR at a mid threshold: general form n+1 against
        // max{n-t+2, t+2}/k.
        {
            let t = (n / 2).clamp(1, n.saturating_sub(2).max(1));
            let p = Predicate::ethr(n, t).map_err(|e| err(&e))?;
            let params = format!("t={t}");
            let q = smallest_prime_at_least(nu + 2);
            let e = encoders::encode_ethr(n, t, q).map_err(|e| err(&e))?;
            let mq = factorize(q).unwrap();
            let c = bounds::builtin_bound(&p, &mq).map_err(|e| err(&e))?;
            let (upper, verified) = verified_len(&p, &e);
            b.push("ETHR", n, &params, format!("q={q} (prime)"), upper, Some(c.bound), verified, String::new());

            if 6 >= nu {
                let e = encoders::encode_ethr(n, t, 6).map_err(|e| err(&e))?;
                let c = bounds::builtin_bound(&p, &m6).map_err(|e| err(&e))?;
                let (upper, verified) = verified_len(&p, &e);
                b.push("ETHR", n, &params, "q=6 (k=2)".into(), upper, Some(c.bound), verified, String::new());
            }
        }

        // MPOLY at degree 2: C(n, <=2) against the counting bound at a
        // prime and the lifted C(n, 2)/k bound at a composite.
        {
            let d = 2.min(n);
            let p3 = Predicate::mpoly(n, d, 3).map_err(|e| err(&e))?;
            let params = format!("d={d}");
            let formula = binomial_sum(n, d) as u64;
            let m3 = factorize(3).unwrap();
            let c = bounds::builtin_bound(&p3, &m3).map_err(|e| err(&e))?;
            let (upper, verified, note) = match encoders::encode_mpoly(n, d, 3) {
                Ok(e) => {
                    let (u, v) = verified_len(&p3, &e);
                    let note = if v { String::new() } else { "verification skipped (cap)".into() };
                    (u, v, note)
                }
                Err(_) => (Some(formula), false, "not materialized (enumeration cap)".into()),
            };
            b.push("MPOLY", n, &params, "q=3 (prime)".into(), upper, Some(c.bound), verified, note);

            // The evaluation encoder is exact at any modulus; verify when
            // the pair grid fits the cap.
            let p6 = Predicate::mpoly(n, d, 6).map_err(|e| err(&e))?;
            let c = bounds::builtin_bound(&p6, &m6).map_err(|e| err(&e))?;
            let (upper, verified, note) = match encoders::encode_mpoly(n, d, 6) {
                Ok(e) => match verify(&p6, &e) {
                    Ok(report) if report.is_correct() => {
                        (Some(e.length() as u64), true, String::new())
                    }
                    Ok(_) => (Some(e.length() as u64), false, "verification failed".into()),
                    Err(_) => (
                        Some(e.length() as u64),
                        false,
                        "verification skipped (enumeration cap)".into(),
                    ),
                },
                Err(_) => (Some(formula), false, "not materialized (enumeration cap)".into()),
            };
            b.push("MPOLY", n, &params, "q=6 (k=2)".into(), upper, Some(c.bound), verified, note);
        }

        // THR at a mid threshold: C(n, <= n-t+1) against 2^(n-t+1)/k.
        {
            let t = (n / 2).max(1);
            let p = Predicate::thr(n, t).map_err(|e| err(&e))?;
            let params = format!("t={t}");
            let q = smallest_prime_at_least(nu + 1);
            let e = encoders::encode_thr(n, t, q).map_err(|e| err(&e))?;
            let mq = factorize(q).unwrap();
            let c = bounds::builtin_bound(&p, &mq).map_err(|e| err(&e))?;
            let (upper, verified) = verified_len(&p, &e);
            b.push("THR", n, &params, format!("q={q} (prime)"), upper, Some(c.bound), verified, String::new());

            let c = bounds::builtin_bound(&p, &m6).map_err(|e| err(&e))?;
            let formula = binomial_sum(n, n - t + 1) as u64;
            b.push(
                "THR",
                n,
                &params,
                "q=6 (k=2)".into(),
                Some(formula),
                Some(c.bound),
                false,
                "construction needs every prime factor above n".into(),
            );
        }

        // OR_EQ: 2^n against 2^n/k. The product construction represents
        // the predicate at primes only.
        {
            let p3 = Predicate::or_eq(n, 3).map_err(|e| err(&e))?;
            let m3 = factorize(3).unwrap();
            let c = bounds::builtin_bound(&p3, &m3).map_err(|e| err(&e))?;
            let (upper, verified, note) = match encoders::encode_oreq(n, 3) {
                Ok(e) => {
                    let (u, v) = verified_len(&p3, &e);
                    (u, v, String::new())
                }
                Err(_) => (Some(1 << n), false, "not materialized (enumeration cap)".into()),
            };
            b.push("OR_EQ", n, "", "q=3 (prime)".into(), upper, Some(c.bound), verified, note);

            let p6 = Predicate::or_eq(n, 6).map_err(|e| err(&e))?;
            let c = bounds::builtin_bound(&p6, &m6).map_err(|e| err(&e))?;
            b.push(
                "OR_EQ",
                n,
                "",
                "q=6 (k=2)".into(),
                Some(1 << n),
                Some(c.bound),
                false,
                "product construction needs a prime modulus".into(),
            );
        }
    }

    Ok(b.rows)
}

/// Renders the rows as a Markdown table.
pub fn render_markdown(rows: &[TableRow]) -> String {
    let mut out = String::new();
    out.push_str("# Inner-product encoding bounds at desk scale\n\n");
    out.push_str(
        "Constructed encoding lengths (upper) against certified lower bounds.\n\
         A check mark means the construction passed exhaustive verification\n\
         at that size; formula-only cells are noted.\n\n",
    );
    out.push_str("| predicate | n | params | modulus | upper (len) | lower (bound) | verified | notes |\n");
    out.push_str("|---|---|---|---|---|---|---|---|\n");
    for r in rows {
        let upper = r.upper.map_or("—".to_string(), |v| v.to_string());
        let lower = r.lower.map_or("—".to_string(), |v| v.to_string());
        let verified = if r.verified { "yes" } else { "" };
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} | {} | {} |\n",
            r.predicate, r.n, r.params, r.modulus, upper, lower, verified, r.note
        ));
    }
    out
}

/// Convenience accessors used by the acceptance suite.
pub fn expected_formulas(n: usize, k: usize) -> ExpectedFormulas {
    let nu = n as u64;
    let ku = k as u64;
    ExpectedFormulas {
        gt: nu.div_ceil(ku),
        neq: nu.div_ceil(ku),
        index: nu.div_ceil(ku),
        disj: nu.div_ceil(ku),
        or_eq_upper: 1 << n,
        or_eq_lower: (1u64 << n).div_ceil(ku),
        mpoly_upper: binomial_sum(n, 2.min(n)) as u64,
        mpoly_lower_prime: binomial_sum(n, 2.min(n)) as u64,
        mpoly_lower_composite: (binomial(n, 2.min(n)) as u64).div_ceil(ku),
    }
}

pub struct ExpectedFormulas {
    pub gt: u64,
    pub neq: u64,
    pub index: u64,
    pub disj: u64,
    pub or_eq_upper: u64,
    pub or_eq_lower: u64,
    pub mpoly_upper: u64,
    pub mpoly_lower_prime: u64,
    pub mpoly_lower_composite: u64,
}
