//! `cantor` command-line front end.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::betaexp::{self, BetaSystem};
use crate::digitset::DigitSet;
use crate::equivalence::{self, SearchBounds};
use crate::error::{Error, Result};
use crate::intervals::{self, interval_floats, DEFAULT_BUDGET};
use crate::kernel;
use crate::radix::{self, parse_number, parse_rational, rational_to_f64, Alphabet, PeriodicCode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "cantor", version, about = "Intersections of deleted-digits Cantor sets with their translates")]
pub struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Base n.
    #[arg(long, global = true)]
    base: Option<i64>,
    /// Digit set D, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    digits: Option<Vec<i64>>,
    /// TOML file with base, digits, depth, budget, format.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Interval budget; overrides CANTOR_BUDGET and the config file.
    #[arg(long, global = true)]
    budget: Option<u64>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Alphabet for --num style codes: nary, delta, delta_plus, d_only.
    #[arg(long, global = true, default_value = "nary")]
    alphabet: String,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sparse / regular / uniform flags of D.
    Classify,
    /// The σ trace, μ and ℓ per level.
    Sigma {
        #[arg(long, allow_hyphen_values = true)]
        num: String,
    },
    /// Oracle intersection C_k ∩ (C_k + t).
    Intersect {
        #[arg(long, allow_hyphen_values = true)]
        num: String,
        /// Emit the box-count curve up to this level instead.
        #[arg(long)]
        boxcount: Option<usize>,
    },
    /// Canonical forms of a number.
    Canon {
        #[arg(long, allow_hyphen_values = true)]
        num: String,
    },
    /// Translation equivalence of two codes.
    Equiv {
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
    },
    /// Self-similar structure report.
    Selfsim {
        #[arg(long, allow_hyphen_values = true)]
        num: String,
    },
    /// Exact dimension.
    Dim {
        #[arg(long, allow_hyphen_values = true)]
        num: String,
    },
    /// Exact measure, when a closed form applies.
    Measure {
        #[arg(long, allow_hyphen_values = true)]
        num: String,
    },
    /// β-expansion transport.
    Beta {
        #[arg(long = "N")]
        big_n: i64,
        #[arg(long, value_delimiter = ',')]
        omega: Vec<i64>,
        #[arg(long)]
        beta: String,
        #[arg(long)]
        num: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Prefix of a number equivalent to no rational.
    Genirr {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        delta: i64,
        /// `thue-morse` or `file:PATH` with 0/1 characters.
        #[arg(long, default_value = "thue-morse")]
        bits: String,
        /// Subset-condition search bound for the audit.
        #[arg(long, default_value_t = 12)]
        qmax: usize,
    },
}

/// Resolved settings for one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub base: Option<i64>,
    pub digits: Option<Vec<i64>>,
    pub depth: usize,
    pub budget: u64,
    #[serde(skip)]
    pub format: Format,
    pub output: Option<PathBuf>,
}

pub const DEFAULT_DEPTH: usize = 8;

fn load_config(path: &Path) -> Result<toml::Table> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    text.parse::<toml::Table>().map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn config_digits(v: &toml::Value) -> Result<Vec<i64>> {
    match v {
        toml::Value::Array(a) => a
            .iter()
            .map(|x| x.as_integer().ok_or_else(|| Error::Parse("digits must be integers".into())))
            .collect(),
        toml::Value::String(s) => s
            .split(',')
            .map(|x| x.trim().parse().map_err(|_| Error::Parse(format!("bad digit '{x}'"))))
            .collect(),
        _ => Err(Error::Parse("digits must be a list or a comma string".into())),
    }
}

impl RunConfig {
    fn resolve(c: &Common, env_budget: Option<&str>) -> Result<Self> {
        let table = match &c.config {
            Some(p) => load_config(p)?,
            None => toml::Table::new(),
        };
        let int = |key: &str| table.get(key).and_then(|v| v.as_integer());
        let env_budget = env_budget
            .map(|s| s.trim().parse::<u64>().map_err(|_| Error::Parse(format!("CANTOR_BUDGET '{s}' is not an integer"))))
            .transpose()?;
        let format = match (c.format, table.get("format").and_then(|v| v.as_str())) {
            (Some(f), _) => f,
            (None, Some("csv")) => Format::Csv,
            (None, Some("json")) | (None, None) => Format::Json,
            (None, Some(other)) => return Err(Error::Parse(format!("unknown format '{other}'"))),
        };
        let digits = match (&c.digits, table.get("digits")) {
            (Some(d), _) => Some(d.clone()),
            (None, Some(v)) => Some(config_digits(v)?),
            (None, None) => None,
        };
        Ok(RunConfig {
            base: c.base.or(int("base")),
            digits,
            depth: c.depth.or(int("depth").map(|d| d as usize)).unwrap_or(DEFAULT_DEPTH),
            budget: c.budget.or(env_budget).or(int("budget").map(|b| b as u64)).unwrap_or(DEFAULT_BUDGET),
            format,
            output: c.output.clone(),
        })
    }

    fn digit_set(&self) -> Result<DigitSet> {
        match (self.base, &self.digits) {
            (Some(b), Some(d)) => DigitSet::new(b, d.clone()),
            _ => Err(Error::Parse("--base and --digits are required (flags or config)".into())),
        }
    }
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn csv_of(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

fn f64_str(x: f64) -> String {
    format!("{x:.17e}")
}

struct Ctx {
    cfg: RunConfig,
    alphabet: Alphabet,
}

impl Ctx {
    fn num(&self, ds: &DigitSet, s: &str) -> Result<radix::ParsedNumber> {
        parse_number(s, ds, self.alphabet)
    }
}

fn negated_note(negative: bool) -> Value {
    if negative {
        json!("input was negative: results describe |t|; C∩(C−t) = (C∩(C+t)) − t")
    } else {
        Value::Null
    }
}

fn cmd_sigma(ctx: &Ctx, num: &str) -> Result<String> {
    let ds = ctx.cfg.digit_set()?;
    let p = ctx.num(&ds, num)?;
    let code = abs_if_delta(&ds, &p.code)?;
    let depth = ctx.cfg.depth;
    let trace = kernel::sigma_trace(&ds, &code, depth)?;
    let ell: Vec<Option<String>> = (0..trace.values.len())
        .map(|k| kernel::ell(&ds, &code, k).ok().map(|r| radix::fmt_rational(&r)))
        .collect();
    Ok(match ctx.cfg.format {
        Format::Json => to_json(&json!({
            "code": code,
            "value": radix::fmt_rational(&radix::value_of(&code)),
            "trace": trace,
            "ell": ell,
            "note": negated_note(p.negative),
        })),
        Format::Csv => csv_of(
            &["k", "sigma", "mu", "ell"],
            trace
                .values
                .iter()
                .enumerate()
                .map(|(k, s)| {
                    vec![
                        k.to_string(),
                        s.symbol().to_string(),
                        trace.mu[k].as_ref().map_or(String::new(), |m| m.to_string()),
                        ell[k].clone().unwrap_or_default(),
                    ]
                })
                .collect(),
        ),
    })
}

fn abs_if_delta(ds: &DigitSet, code: &PeriodicCode) -> Result<PeriodicCode> {
    if code.alphabet() == Alphabet::Delta {
        radix::abs_canonicalize(ds, code)
    } else {
        Ok(code.clone())
    }
}

fn cmd_intersect(ctx: &Ctx, num: &str, boxcount: Option<usize>) -> Result<String> {
    let ds = ctx.cfg.digit_set()?;
    let p = ctx.num(&ds, num)?;
    let code = abs_if_delta(&ds, &p.code)?;
    if let Some(kmax) = boxcount {
        let bc = intervals::boxcount_curve(&ds, &code, kmax, ctx.cfg.budget)?;
        return Ok(match ctx.cfg.format {
            Format::Json => to_json(&bc),
            Format::Csv => csv_of(
                &["k", "count", "ell", "oracle_count", "slope"],
                bc.rows
                    .iter()
                    .map(|r| {
                        vec![
                            r.k.to_string(),
                            r.count.to_string(),
                            radix::fmt_rational(&r.ell),
                            r.oracle_count.map_or(String::new(), |c| c.to_string()),
                            r.slope.map_or(String::new(), f64_str),
                        ]
                    })
                    .collect(),
            ),
        });
    }
    let il = intervals::intersect_level(&ds, &code, ctx.cfg.depth, ctx.cfg.budget)?;
    Ok(match ctx.cfg.format {
        Format::Json => to_json(&json!({
            "code": code,
            "level": ctx.cfg.depth,
            "cases": il.cases,
            "pieces": il.pieces,
            "tight": il.tight,
            "note": negated_note(p.negative),
        })),
        Format::Csv => csv_of(
            &["lo", "hi", "lo_float", "hi_float", "case"],
            il.pieces
                .iter()
                .map(|pc| {
                    let (a, b) = interval_floats(&pc.interval);
                    vec![
                        radix::fmt_rational(&pc.interval.lo),
                        radix::fmt_rational(&pc.interval.hi),
                        f64_str(a),
                        f64_str(b),
                        pc.case.name().to_string(),
                    ]
                })
                .collect(),
        ),
    })
}

fn cmd_canon(ctx: &Ctx, num: &str) -> Result<String> {
    let ds = ctx.cfg.digit_set()?;
    let p = ctx.num(&ds, num)?;
    let value = radix::value_of(&p.code);
    let nary = if p.code.is_prefix() {
        None
    } else {
        radix::code_from_rational(&value, ds.base(), Alphabet::Nary, None).ok()
    };
    let dplus = if p.code.is_prefix() || !ds.is_sparse() {
        None
    } else {
        equivalence::to_delta_plus(&ds, &p.code).ok()
    };
    let psi = if p.code.alphabet() == Alphabet::Nary {
        kernel::psi(&ds, &p.code).ok()
    } else {
        None
    };
    Ok(to_json(&json!({
        "input": p.code,
        "negative": p.negative,
        "value": radix::fmt_rational(&value),
        "float": rational_to_f64(&value),
        "nary": nary,
        "delta_plus": dplus,
        "psi": psi,
    })))
}

fn cmd_equiv(ctx: &Ctx, a: &str, b: &str) -> Result<String> {
    let ds = ctx.cfg.digit_set()?;
    let (pa, pb) = (ctx.num(&ds, a)?, ctx.num(&ds, b)?);
    let e = equivalence::equivalent(&ds, &pa.code, &pb.code)?;
    Ok(to_json(&json!({ "a": pa.code, "b": pb.code, "result": e })))
}

fn cmd_selfsim(ctx: &Ctx, num: &str) -> Result<String> {
    let ds = ctx.cfg.digit_set()?;
    let p = ctx.num(&ds, num)?;
    if p.code.is_prefix() {
        let re = equivalence::rational_equivalent(&ds, &p.code, SearchBounds::default())?;
        return Ok(to_json(&json!({ "verdict": re.verdict, "rational_equivalent": re })));
    }
    let rep = equivalence::self_similar_report(&ds, &p.code)?;
    let mut v = serde_json::to_value(&rep).expect("serializable");
    if p.negative {
        v["note"] = negated_note(true);
    }
    Ok(to_json(&v))
}

fn cmd_dim(ctx: &Ctx, num: &str) -> Result<String> {
    let ds = ctx.cfg.digit_set()?;
    let p = ctx.num(&ds, num)?;
    Ok(to_json(&equivalence::dimension(&ds, &p.code)?))
}

fn cmd_measure(ctx: &Ctx, num: &str) -> Result<String> {
    let ds = ctx.cfg.digit_set()?;
    let p = ctx.num(&ds, num)?;
    let rep = equivalence::self_similar_report(&ds, &p.code)?;
    match rep.measure {
        Some(m) => Ok(to_json(&m)),
        None => Err(Error::NotApplicable(rep.measure_reason.unwrap_or_default())),
    }
}

fn cmd_beta(ctx: &Ctx, n: i64, omega: Vec<i64>, beta: &str, num: &str, samples: usize) -> Result<String> {
    let sys = BetaSystem::new(n, omega, parse_rational(beta)?)?;
    let code = radix::parse_code(num, n, ctx.alphabet)?;
    let g = betaexp::g_beta(&sys, &code)?;
    let d = betaexp::sparse_multiplier(&sys)?;
    let scale = betaexp::gamma_scale(&sys);
    let point = betaexp::gamma_point(&sys, &code)?;
    let dset: Vec<i64> = sys.omega().iter().map(|w| w * d).collect();
    let transport = match DigitSet::new(n, dset.clone()) {
        Ok(ds) => {
            let c = code.map_digits(code.alphabet(), |x| x * d)?;
            Some(betaexp::transport_report(&sys, &ds, &c, samples)?)
        }
        Err(_) => None,
    };
    Ok(to_json(&json!({
        "system": sys,
        "g_beta": radix::fmt_rational(&g),
        "g_beta_float": rational_to_f64(&g),
        "gamma_scale": radix::fmt_rational(&scale),
        "gamma_point": radix::fmt_rational(&point),
        "d": d,
        "digits": dset,
        "transport": transport,
    })))
}

fn read_bits(source: &str, len: usize) -> Result<Vec<bool>> {
    if source == "thue-morse" {
        return Ok(equivalence::thue_morse(len));
    }
    let path = source
        .strip_prefix("file:")
        .ok_or_else(|| Error::Parse(format!("bits must be thue-morse or file:PATH, got '{source}'")))?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{path}: {e}")))?;
    text.chars()
        .filter(|c| !c.is_whitespace() && *c != ',')
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(Error::Parse(format!("bad bit '{c}'"))),
        })
        .collect()
}

fn cmd_genirr(ctx: &Ctx, alpha: &str, delta: i64, bits: &str, qmax: usize) -> Result<String> {
    let ds = ctx.cfg.digit_set()?;
    let p = ctx.num(&ds, alpha)?;
    let depth = ctx.cfg.depth;
    let bits = read_bits(bits, depth + 1)?;
    let g = equivalence::generate_nonequivalent(&ds, &p.code, delta, &bits, depth)?;
    let audit = equivalence::rational_equivalent(&ds, &g.gamma, SearchBounds { kmax: depth, qmax })?;
    Ok(to_json(&json!({ "generated": g, "rational_equivalent": audit })))
}

fn dispatch(cli: Cli, env_budget: Option<&str>) -> Result<String> {
    let cfg = RunConfig::resolve(&cli.common, env_budget)?;
    let alphabet = Alphabet::parse(&cli.common.alphabet)?;
    let ctx = Ctx { cfg, alphabet };
    match cli.cmd {
        Command::Classify => {
            let ds = ctx.cfg.digit_set()?;
            Ok(to_json(&ds.classify()))
        }
        Command::Sigma { num } => cmd_sigma(&ctx, &num),
        Command::Intersect { num, boxcount } => cmd_intersect(&ctx, &num, boxcount),
        Command::Canon { num } => cmd_canon(&ctx, &num),
        Command::Equiv { a, b } => cmd_equiv(&ctx, &a, &b),
        Command::Selfsim { num } => cmd_selfsim(&ctx, &num),
        Command::Dim { num } => cmd_dim(&ctx, &num),
        Command::Measure { num } => cmd_measure(&ctx, &num),
        Command::Beta {
            big_n,
            omega,
            beta,
            num,
            samples,
        } => cmd_beta(&ctx, big_n, omega, &beta, &num, samples),
        Command::Genirr { alpha, delta, bits, qmax } => cmd_genirr(&ctx, &alpha, delta, &bits, qmax),
    }
    .and_then(|out| match &ctx.cfg.output {
        Some(path) => write_atomic(path, &out).map(|_| String::new()),
        None => Ok(out),
    })
}

fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let tmp = path.with_extension("tmp~");
    std::fs::write(&tmp, text)
        .and_then(|_| std::fs::rename(&tmp, path))
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Runs one invocation; `env_budget` is the value of `CANTOR_BUDGET`.
pub fn run<I, T>(args: I, env_budget: Option<&str>) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match dispatch(cli, env_budget) {
        Ok(stdout) => Outcome {
            code: 0,
            stdout,
            stderr: String::new(),
        },
        Err(e) => Outcome {
            code: e.exit_code(),
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}
