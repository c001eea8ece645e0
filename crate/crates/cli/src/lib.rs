//! Batch front end: construct encodings, verify them exhaustively, emit
//! bound certificates, run the randomized error harness, and reproduce the
//! bounds summary table at desk scale.
//!
//! Exit codes: 0 success, 1 verification found mismatches, 2 usage or
//! parameter errors, 3 enumeration caps or overflow. Errors are printed as
//! JSON on stderr. All outputs are byte-stable for identical flags and
//! seed: JSON is emitted with sorted keys and files are written atomically.

pub mod table;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use ipe_core::bounds::{self, BoundsError, OracleCap};
use ipe_core::encoders::{self, EncodeError, Encoding};
use ipe_core::modmath::{factorize, Modulus};
use ipe_core::predicates::{
    builtin_reduction, BuiltinReduction, Predicate, PredicateError, DEFAULT_CELL_CAP,
};
use ipe_core::randomized::{self, ErrorMode};
use ipe_core::zqlinalg::{factor_rank, rank_mod_p, ZqMatrix};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAP: i32 = 3;

#[derive(Parser)]
#[command(
    name = "ipe",
    version,
    about = "Inner-product predicate encodings over Z_q: construct, verify, bound"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct an encoding for a builtin predicate
    Encode(EncodeArgs),
    /// Exhaustively verify an encoding file against a predicate
    Verify(VerifyArgs),
    /// Emit a lower-bound certificate for a builtin predicate
    Bound(BoundArgs),
    /// Exact minimum encoding length via the minimum-rank search
    Minrank(MinrankArgs),
    /// Rank (or rank factorization) of a matrix file over a prime
    Rank(RankArgs),
    /// Transport an encoding through a builtin reduction
    Reduce(ReduceArgs),
    /// Error evaluation for the randomized encodings
    Rand(RandArgs),
    /// Desk-scale table of constructed lengths vs certified bounds
    Table(TableArgs),
}

#[derive(Args, Clone)]
struct PredicateSpec {
    /// Builtin predicate name: eq, gt, neq, index, disj, ethr, thr,
    /// mpoly, oreq
    #[arg(long)]
    predicate: Option<String>,
    /// Predicate JSON file (supports TABLE predicates)
    #[arg(long)]
    pred_file: Option<PathBuf>,
    /// Domain size parameter
    #[arg(long)]
    n: Option<usize>,
    /// Threshold parameter for ethr/thr
    #[arg(long)]
    t: Option<usize>,
    /// Degree bound for mpoly
    #[arg(long)]
    d: Option<usize>,
}

#[derive(Args)]
struct EncodeArgs {
    #[command(flatten)]
    pred: PredicateSpec,
    /// Modulus (not used by disj, which selects its own primes)
    #[arg(long)]
    q: Option<u64>,
    /// Number of prime factors for the disj construction
    #[arg(long)]
    k: Option<usize>,
    /// Force the general length-(n+1) form for ethr
    #[arg(long)]
    general: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    pred: PredicateSpec,
    /// Modulus parameter for mpoly/oreq predicates
    #[arg(long)]
    q: Option<u64>,
    /// Encoding JSON file to verify
    #[arg(long)]
    enc: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    #[command(flatten)]
    pred: PredicateSpec,
    /// Modulus the bound is certified against
    #[arg(long)]
    q: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MinrankArgs {
    /// Predicate JSON file
    #[arg(long = "table")]
    table_file: Option<PathBuf>,
    #[command(flatten)]
    pred: PredicateSpec,
    /// Predicate modulus parameter for mpoly/oreq
    #[arg(long)]
    q: Option<u64>,
    /// Prime to minimize rank over
    #[arg(long)]
    p: u64,
    /// Budget on the number of free (forced non-zero) cells
    #[arg(long)]
    cap: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RankArgs {
    /// Matrix JSON file
    #[arg(long)]
    matrix: PathBuf,
    /// Prime modulus for the elimination
    #[arg(long)]
    p: u64,
    /// Also emit the rank factorization U, V
    #[arg(long)]
    factor: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReduceArgs {
    /// Predicate the input encoding is for (the reduction target)
    #[arg(long)]
    from: String,
    /// Predicate to produce an encoding for (the reduction source)
    #[arg(long)]
    to: String,
    /// Parameter of the produced predicate (see README for each pair)
    #[arg(long)]
    n: usize,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    /// Modulus parameter where the reduction needs one (mpoly/oreq)
    #[arg(long)]
    q: Option<u64>,
    /// Encoding JSON file of the `--from` predicate
    #[arg(long)]
    enc: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RandMode {
    Exact,
    MonteCarlo,
}

#[derive(Args)]
struct RandArgs {
    /// eq, neq, or gt
    #[arg(long)]
    predicate: String,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    q: u64,
    /// Target error probability in (0, 1)
    #[arg(long)]
    eps: f64,
    #[arg(long, value_enum)]
    mode: RandMode,
    /// Seed for all sampling (required: no ambient randomness)
    #[arg(long)]
    seed: u64,
    /// Trials per pair in monte-carlo mode
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TableArgs {
    /// Largest domain parameter to instantiate each row at
    #[arg(long, default_value_t = 6)]
    max_n: usize,
    /// Markdown output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the rows as JSON
    #[arg(long)]
    json: Option<PathBuf>,
}

struct CliError {
    code: i32,
    kind: String,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError { code: EXIT_USAGE, kind: "usage".into(), message: message.into() }
    }
}

impl From<PredicateError> for CliError {
    fn from(e: PredicateError) -> Self {
        let code = match e {
            PredicateError::TooLarge { .. } => EXIT_CAP,
            _ => EXIT_USAGE,
        };
        CliError { code, kind: "predicate".into(), message: e.to_string() }
    }
}

impl From<EncodeError> for CliError {
    fn from(e: EncodeError) -> Self {
        let code = match e {
            EncodeError::Overflow { .. }
            | EncodeError::Predicate(PredicateError::TooLarge { .. }) => EXIT_CAP,
            _ => EXIT_USAGE,
        };
        CliError { code, kind: "encode".into(), message: e.to_string() }
    }
}

impl From<BoundsError> for CliError {
    fn from(e: BoundsError) -> Self {
        let code = match e {
            BoundsError::CapExceeded { .. }
            | BoundsError::FreeCellBudget { .. }
            | BoundsError::Predicate(PredicateError::TooLarge { .. }) => EXIT_CAP,
            _ => EXIT_USAGE,
        };
        CliError { code, kind: "bounds".into(), message: e.to_string() }
    }
}

impl From<randomized::RandError> for CliError {
    fn from(e: randomized::RandError) -> Self {
        CliError { code: EXIT_USAGE, kind: "rand".into(), message: e.to_string() }
    }
}

impl From<ipe_core::zqlinalg::LinAlgError> for CliError {
    fn from(e: ipe_core::zqlinalg::LinAlgError) -> Self {
        CliError { code: EXIT_USAGE, kind: "linalg".into(), message: e.to_string() }
    }
}

impl From<ipe_core::modmath::ModMathError> for CliError {
    fn from(e: ipe_core::modmath::ModMathError) -> Self {
        let code = match e {
            ipe_core::modmath::ModMathError::Overflow(_) => EXIT_CAP,
            _ => EXIT_USAGE,
        };
        CliError { code, kind: "modmath".into(), message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError { code: EXIT_USAGE, kind: "io".into(), message: e.to_string() }
    }
}

/// Enumeration cell cap, overridable through IPE_CAP_CELLS.
pub fn cell_cap() -> u64 {
    std::env::var("IPE_CAP_CELLS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_CELL_CAP)
}

/// JSON with sorted keys and a trailing newline.
fn to_sorted_json<T: Serialize>(value: &T) -> String {
    // serde_json maps are BTreeMaps, so going through Value sorts keys.
    let v: Value = serde_json::to_value(value).expect("serializable");
    let mut s = serde_json::to_string_pretty(&v).expect("printable");
    s.push('\n');
    s
}

/// Writes atomically: temp file next to the destination, then rename.
fn write_atomic(path: &Path, contents: &str) -> Result<(), std::io::Error> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), CliError> {
    let s = to_sorted_json(value);
    match out {
        Some(path) => write_atomic(path, &s)?,
        None => print!("{s}"),
    }
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T, CliError> {
    let data = std::fs::read_to_string(path)?;
    serde_json::from_str(&data)
        .map_err(|e| CliError::usage(format!("bad {what} file {}: {e}", path.display())))
}

impl PredicateSpec {
    fn build(&self, q: Option<u64>) -> Result<Predicate, CliError> {
        if let Some(path) = &self.pred_file {
            return read_json(path, "predicate");
        }
        let name = self
            .predicate
            .as_deref()
            .ok_or_else(|| CliError::usage("one of --predicate or --pred-file is required"))?;
        let n = || self.n.ok_or_else(|| CliError::usage("--n is required"));
        let t = || self.t.ok_or_else(|| CliError::usage("--t is required"));
        let d = || self.d.ok_or_else(|| CliError::usage("--d is required"));
        let q = || q.ok_or_else(|| CliError::usage("--q is required for this predicate"));
        Ok(match name.to_ascii_lowercase().as_str() {
            "eq" => Predicate::eq(n()?),
            "gt" => Predicate::gt(n()?),
            "neq" => Predicate::neq(n()?),
            "index" => Predicate::index(n()?)?,
            "disj" => Predicate::disj(n()?)?,
            "ethr" => Predicate::ethr(n()?, t()?)?,
            "thr" => Predicate::thr(n()?, t()?)?,
            "mpoly" => Predicate::mpoly(n()?, d()?, q()?)?,
            "oreq" | "or_eq" => Predicate::or_eq(n()?, q()?)?,
            other => return Err(CliError::usage(format!("unknown predicate {other:?}"))),
        })
    }
}

fn require_q(q: Option<u64>) -> Result<u64, CliError> {
    q.ok_or_else(|| CliError::usage("--q is required"))
}

fn modulus(q: u64) -> Result<Modulus, CliError> {
    Ok(factorize(q)?)
}

fn run_encode(args: &EncodeArgs) -> Result<i32, CliError> {
    let pred = args.pred.build(args.q)?;
    let n = || args.pred.n.ok_or_else(|| CliError::usage("--n is required"));
    let encoding: Encoding = match pred.id() {
        "EQ" => {
            let q = require_q(args.q)?;
            if q == 2 {
                encoders::encode_eq_mod2(n()?)?
            } else {
                encoders::encode_eq_large_q(n()?, q)?
            }
        }
        "GT" => {
            let m = modulus(require_q(args.q)?)?;
            let n = n()?;
            if m.k() == 1 {
                encoders::encode_gt_prime(n, m.q())?
            } else if m.k() == n {
                encoders::encode_gt_kprimes(n, &m)?
            } else {
                encoders::encode_gt(n, &m)?
            }
        }
        "NEQ" => encoders::encode_neq(n()?, &modulus(require_q(args.q)?)?)?,
        "INDEX" => encoders::encode_index(n()?, &modulus(require_q(args.q)?)?)?,
        "DISJ" => {
            let k = args.k.ok_or_else(|| CliError::usage("--k is required for disj"))?;
            let (_, e) = encoders::encode_disj(n()?, k)?;
            e
        }
        "ETHR" => {
            let q = require_q(args.q)?;
            let t = args.pred.t.expect("validated by build");
            if args.general {
                encoders::encode_ethr_general(n()?, t, q)?
            } else {
                encoders::encode_ethr(n()?, t, q)?
            }
        }
        "THR" => encoders::encode_thr(n()?, args.pred.t.expect("validated"), require_q(args.q)?)?,
        "MPOLY" => encoders::encode_mpoly_capped(
            n()?,
            args.pred.d.expect("validated"),
            require_q(args.q)?,
            cell_cap(),
        )?,
        "OR_EQ" => encoders::encode_oreq_capped(n()?, require_q(args.q)?, cell_cap())?,
        "TABLE" => {
            // Generic truth-table route: reduce to INDEX over the smaller
            // side and use the block construction there.
            let q = require_q(args.q)?;
            let m = modulus(q)?;
            let r = builtin_reduction(BuiltinReduction::TruthTable { pred: pred.clone() })?;
            let index_n = match r.target().kind() {
                ipe_core::predicates::PredicateKind::Index { n } => *n,
                _ => unreachable!("truth-table reductions target INDEX"),
            };
            let base = encoders::encode_index(index_n, &m)?;
            encoders::apply_reduction_capped(&r, &base, cell_cap())?
        }
        other => return Err(CliError::usage(format!("no encoder for {other}"))),
    };
    emit(&encoding, args.out.as_deref())?;
    Ok(EXIT_OK)
}

fn run_verify(args: &VerifyArgs) -> Result<i32, CliError> {
    let encoding: Encoding = read_json(&args.enc, "encoding")?;
    let pred = args.pred.build(args.q.or(Some(encoding.q())))?;
    let report = encoders::verify_capped(&pred, &encoding, cell_cap())?;
    let ok = report.is_correct();
    emit(&report, args.out.as_deref())?;
    Ok(if ok { EXIT_OK } else { EXIT_MISMATCH })
}

fn run_bound(args: &BoundArgs) -> Result<i32, CliError> {
    let pred = args.pred.build(Some(args.q))?;
    let m = modulus(args.q)?;
    let cert = bounds::builtin_bound(&pred, &m)?;
    emit(&cert, args.out.as_deref())?;
    Ok(EXIT_OK)
}

fn run_minrank(args: &MinrankArgs) -> Result<i32, CliError> {
    let pred: Predicate = if let Some(path) = &args.table_file {
        read_json(path, "predicate")?
    } else {
        args.pred.build(args.q)?
    };
    let z = pred.zero_pattern_capped(cell_cap())?;
    let cap = OracleCap {
        max_free_cells: args.cap,
        max_assignments: OracleCap::default().max_assignments,
    };
    let bound = bounds::min_rank_oracle(&z, args.p, &cap)?;
    let cert = bounds::Certificate {
        predicate: pred,
        q: args.p,
        bound,
        method: bounds::Method::ExactMinRank,
        witness: bounds::Witness::MinRank { p: args.p, max_assignments: cap.max_assignments },
    };
    emit(&cert, args.out.as_deref())?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct RankOutput {
    p: u64,
    rank: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    u: Option<ZqMatrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    v: Option<ZqMatrix>,
}

fn run_rank(args: &RankArgs) -> Result<i32, CliError> {
    let matrix: ZqMatrix = read_json(&args.matrix, "matrix")?;
    let output = if args.factor {
        let fact = factor_rank(&matrix, args.p)?;
        RankOutput { p: args.p, rank: fact.rank, u: Some(fact.u), v: Some(fact.v) }
    } else {
        RankOutput { p: args.p, rank: rank_mod_p(&matrix, args.p)?, u: None, v: None }
    };
    emit(&output, args.out.as_deref())?;
    Ok(EXIT_OK)
}

fn reduction_for(args: &ReduceArgs) -> Result<BuiltinReduction, CliError> {
    let t = || args.t.ok_or_else(|| CliError::usage("--t is required for this pair"));
    let d = || args.d.ok_or_else(|| CliError::usage("--d is required for this pair"));
    let q = || args.q.ok_or_else(|| CliError::usage("--q is required for this pair"));
    let n = args.n;
    Ok(match (args.from.as_str(), args.to.as_str()) {
        ("disj", "index") => BuiltinReduction::DisjToIndex { n },
        ("index", "neq") => BuiltinReduction::IndexToNeq { n },
        ("index", "gt") => BuiltinReduction::IndexToGt { n },
        // --n names the produced GT_n, so the exact-threshold side has
        // ground set m = n - 1.
        ("ethr", "gt") => BuiltinReduction::EthrOneToGt { m: n - 1 },
        ("ethr", "neq") => BuiltinReduction::EthrToNeq { m: n },
        ("mpoly", "thr") => BuiltinReduction::MpolyToThr { n, t: t()?, q: q()? },
        ("mpoly", "oreq") => BuiltinReduction::MpolyToOrEq { n, q: q()? },
        ("mpoly", "neq") => BuiltinReduction::MpolyToNeq { n, d: d()?, q: q()? },
        ("oreq", "neq") => BuiltinReduction::OrEqToNeq { n, q: q()? },
        (from, to) => {
            return Err(CliError::usage(format!("no builtin reduction for {from} => {to}")))
        }
    })
}

fn run_reduce(args: &ReduceArgs) -> Result<i32, CliError> {
    let encoding: Encoding = read_json(&args.enc, "encoding")?;
    let r = builtin_reduction(reduction_for(args)?)?;
    let lifted = encoders::apply_reduction_capped(&r, &encoding, cell_cap())?;
    emit(&lifted, args.out.as_deref())?;
    Ok(EXIT_OK)
}

fn run_rand(args: &RandArgs) -> Result<i32, CliError> {
    let pe = match args.predicate.to_ascii_lowercase().as_str() {
        "eq" => randomized::rand_encode_eq(args.n, args.q, args.eps)?,
        "neq" => randomized::rand_encode_neq(args.n, args.q, args.eps)?,
        "gt" => randomized::rand_encode_gt(args.n, args.q, args.eps)?,
        other => {
            return Err(CliError::usage(format!(
                "no randomized construction for {other:?} (supported: eq, neq, gt)"
            )))
        }
    };
    let mode = match args.mode {
        RandMode::Exact => ErrorMode::Exact,
        RandMode::MonteCarlo => ErrorMode::MonteCarlo,
    };
    let report = randomized::estimate_error(&pe, mode, args.trials, args.seed)?;
    emit(&report, args.out.as_deref())?;
    Ok(EXIT_OK)
}

fn run_table(args: &TableArgs) -> Result<i32, CliError> {
    if args.max_n < 2 {
        return Err(CliError::usage("--max-n must be at least 2"));
    }
    let rows = table::build_table(args.max_n)
        .map_err(|e| CliError { code: EXIT_USAGE, kind: "table".into(), message: e })?;
    if let Some(json) = &args.json {
        let s = to_sorted_json(&rows);
        write_atomic(json, &s)?;
    }
    let md = table::render_markdown(&rows);
    match &args.out {
        Some(path) => write_atomic(path, &md)?,
        None => print!("{md}"),
    }
    Ok(EXIT_OK)
}

/// Dispatches a parsed command line; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Encode(args) => run_encode(args),
        Command::Verify(args) => run_verify(args),
        Command::Bound(args) => run_bound(args),
        Command::Minrank(args) => run_minrank(args),
        Command::Rank(args) => run_rank(args),
        Command::Reduce(args) => run_reduce(args),
        Command::Rand(args) => run_rand(args),
        Command::Table(args) => run_table(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let payload = serde_json::json!({ "error": e.message, "kind": e.kind });
            eprintln!("{payload}");
            e.code
        }
    }
}
