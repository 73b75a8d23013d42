//! Command-line interface: sequence dumps, certified constants, continued
//! fractions, bound evaluators, reductions, searches, and the full verified
//! replay with certificate output.
//!
//! Exit codes: 0 on success (and verdict true for `verify`), 1 on a false
//! verdict or runtime failure, 2 on usage errors.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use pnp_core::algebraic::{
    alpha_lazy, alpha_root, c_alpha_of, gamma_of, g_k_at, height_from_minpoly, large_k_mu,
    large_k_tau, phi_ball, phi_lazy, small_k_mu, small_k_tau,
};
use pnp_core::certreal::{CertReal, LazyReal, PrecisionPolicy};
use pnp_core::contfrac::CfExpander;
use pnp_core::linforms::{lemma31_bounds, matveev_rhs, MatveevParams};
use pnp_core::pipeline::{
    certificate_to_canonical_json, verify_theorem, BallJson, RunConfig, RunMode, SearchBox,
};
use pnp_core::reduction::{
    dujella_petho, large_k_chain, small_k_reduce, ReductionInstance, ReductionOutcome,
};
use pnp_core::search::{intersect_box, BoxQuery};
use pnp_core::sequences::{fibonacci, narayana, KPellSequence};

#[derive(Parser)]
#[command(name = "pnp", version, about = "Prover toolkit for the common terms of k-generalized Pell and Narayana sequences")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GlobalOpts {
    /// Starting working precision in bits
    #[arg(long, global = true, default_value_t = 256)]
    precision_start: u32,
    /// Hard precision cap in bits
    #[arg(long, global = true, default_value_t = 1 << 20)]
    precision_cap: u32,
    /// Worker threads for the small-k sweep
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Emit JSON (default)
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    /// Emit CSV where supported
    #[arg(long, global = true)]
    csv: bool,
    /// Write output to a file instead of stdout
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

impl GlobalOpts {
    fn policy(&self) -> Result<PrecisionPolicy> {
        if self.precision_start == 0 || self.precision_start > self.precision_cap {
            bail!("invalid precision policy");
        }
        Ok(PrecisionPolicy::new(self.precision_start, self.precision_cap))
    }

    fn writer(&self) -> Result<Box<dyn Write>> {
        match &self.output {
            Some(path) => Ok(Box::new(
                File::create(path).with_context(|| format!("creating {}", path.display()))?,
            )),
            None => Ok(Box::new(io::stdout())),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Dump sequence terms
    Seq {
        /// Sequence family
        #[arg(long, value_enum)]
        family: Family,
        /// Order k (k-Pell only)
        #[arg(long)]
        k: Option<u32>,
        /// First index
        #[arg(long, default_value_t = 0)]
        from: i64,
        /// Last index (inclusive)
        #[arg(long)]
        to: i64,
    },
    /// Print certified root enclosures and heights for one order
    Roots {
        #[arg(long)]
        k: u32,
    },
    /// Expand the continued fraction of a named constant
    Cf {
        /// Constant: gamma:K, alpha, phi, sqrt:N, tau-small:K, tau-large, mu-small:K, mu-large
        #[arg(long)]
        constant: String,
        /// Expand at least this many partial quotients
        #[arg(long, conflicts_with = "min_q")]
        count: Option<usize>,
        /// Expand until a convergent denominator exceeds this threshold
        #[arg(long)]
        min_q: Option<String>,
    },
    /// Evaluate the bound machinery
    Bound {
        #[command(subcommand)]
        which: BoundCommand,
    },
    /// Run a reduction (named preset or explicit instance)
    Reduce {
        #[command(subcommand)]
        which: ReduceCommand,
    },
    /// Exhaustive intersection search
    Search {
        /// k range as lo:hi
        #[arg(long, default_value = "2:360")]
        k_range: String,
        /// n range as lo:hi
        #[arg(long, default_value = "4:265")]
        n_range: String,
        /// m range as lo:hi
        #[arg(long, default_value = "3:329")]
        m_range: String,
        /// Disable the deep-regime filters
        #[arg(long)]
        no_filter: bool,
    },
    /// Run the replay and emit a certificate
    Verify {
        #[arg(long, value_enum, default_value_t = ModeArg::Full)]
        mode: ModeArg,
        /// Small-k range for partial runs, as lo:hi
        #[arg(long)]
        k_range: Option<String>,
        /// Override the search box as klo:khi:nlo:nhi:mlo:mhi
        #[arg(long)]
        search_box: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Kpell,
    Narayana,
    Fibonacci,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Full,
    SmallK,
    LargeK,
    SearchOnly,
}

impl From<ModeArg> for RunMode {
    fn from(m: ModeArg) -> RunMode {
        match m {
            ModeArg::Full => RunMode::Full,
            ModeArg::SmallK => RunMode::SmallK,
            ModeArg::LargeK => RunMode::LargeK,
            ModeArg::SearchOnly => RunMode::SearchOnly,
        }
    }
}

#[derive(Subcommand)]
enum BoundCommand {
    /// Full lower-bound right-hand side
    Matveev {
        #[arg(long)]
        s: u32,
        #[arg(long)]
        degree: u32,
        /// Coefficient bound D (decimal or rational)
        #[arg(long)]
        coeff_bound: String,
        /// B values, one per logarithm
        #[arg(long = "b", required = true)]
        b_values: Vec<String>,
    },
    /// Per-k search bounds
    Lemma31 {
        #[arg(long)]
        k: u32,
    },
}

#[derive(Subcommand)]
enum ReduceCommand {
    /// Per-k preset
    SmallK {
        #[arg(long)]
        k: u32,
    },
    /// The three-stage k-independent chain
    LargeKChain,
    /// Explicit instance; tau/mu accept `p/q` or `p/q+r/s*sqrt(D)`
    Custom {
        #[arg(long)]
        tau: String,
        #[arg(long)]
        mu: String,
        #[arg(long)]
        a: String,
        #[arg(long)]
        c: String,
        #[arg(long)]
        m: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let opts = cli.global.clone();
    let mut out = opts.writer()?;
    match cli.command {
        Command::Seq { family, k, from, to } => {
            cmd_seq(&opts, &mut out, family, k, from, to)?;
        }
        Command::Roots { k } => cmd_roots(&opts, &mut out, k)?,
        Command::Cf { constant, count, min_q } => {
            cmd_cf(&opts, &mut out, &constant, count, min_q.as_deref())?;
        }
        Command::Bound { which } => cmd_bound(&opts, &mut out, which)?,
        Command::Reduce { which } => cmd_reduce(&opts, &mut out, which)?,
        Command::Search { k_range, n_range, m_range, no_filter } => {
            cmd_search(&opts, &mut out, &k_range, &n_range, &m_range, no_filter)?;
        }
        Command::Verify { mode, k_range, search_box } => {
            return cmd_verify(&opts, &mut out, mode, k_range.as_deref(), search_box.as_deref());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_seq(
    opts: &GlobalOpts,
    out: &mut dyn Write,
    family: Family,
    k: Option<u32>,
    from: i64,
    to: i64,
) -> Result<()> {
    if to < from {
        bail!("empty index range");
    }
    let (name, k) = match family {
        Family::Kpell => {
            let k = k.ok_or_else(|| anyhow!("--k is required for the k-Pell family"))?;
            if k < 2 {
                bail!("order must be at least 2");
            }
            ("kpell", Some(k))
        }
        Family::Narayana => ("narayana", None),
        Family::Fibonacci => ("fibonacci", None),
    };
    if opts.csv {
        writeln!(out, "family,k,index,value")?;
    }
    let mut seq = k.map(KPellSequence::new);
    for i in from..=to {
        let value = match family {
            Family::Kpell => seq.as_mut().unwrap().term(i)?.to_string(),
            Family::Narayana => {
                if i < 0 {
                    bail!("negative index for the Narayana sequence");
                }
                narayana(i as u64).to_string()
            }
            Family::Fibonacci => {
                if i < 0 {
                    bail!("negative index for the Fibonacci sequence");
                }
                fibonacci(i as u64).to_string()
            }
        };
        if opts.csv {
            let kf = k.map(|v| v.to_string()).unwrap_or_default();
            writeln!(out, "{name},{kf},{i},{value}")?;
        } else {
            let mut obj = serde_json::Map::new();
            obj.insert("family".into(), name.into());
            if let Some(kv) = k {
                obj.insert("k".into(), kv.into());
            }
            obj.insert("index".into(), i.into());
            obj.insert("value".into(), value.into());
            writeln!(out, "{}", serde_json::Value::Object(obj))?;
        }
    }
    Ok(())
}

fn ball_json(x: &CertReal) -> serde_json::Value {
    let b = BallJson::from_ball(x);
    serde_json::json!({ "mid": b.mid, "rad": b.rad })
}

fn cmd_roots(opts: &GlobalOpts, out: &mut dyn Write, k: u32) -> Result<()> {
    if k < 2 {
        bail!("order must be at least 2");
    }
    let prec = opts.policy()?.start;
    let target = BigRational::new(BigInt::one(), BigInt::one() << prec as u64);
    let gamma = gamma_of(k, &target)?;
    let g = g_k_at(k, &gamma)?;
    let (alpha, beta_mod) = alpha_root(&target)?;
    let c_a = c_alpha_of(&alpha)?;
    let phi = phi_ball(prec)?;
    let h_gamma = gamma.log()?.mul(&CertReal::from_rational(
        &BigRational::new(BigInt::one(), BigInt::from(k)),
        prec,
    ));
    let h_alpha = height_from_minpoly(&BigInt::one(), &[alpha.clone(), beta_mod.clone(), beta_mod.clone()])?;
    let h_phi = height_from_minpoly(&BigInt::one(), &[phi.clone(), phi.recip()?])?;
    let value = serde_json::json!({
        "k": k,
        "gamma": ball_json(&gamma),
        "g_k_gamma": ball_json(&g),
        "alpha": ball_json(&alpha),
        "beta_modulus": ball_json(&beta_mod),
        "c_alpha": ball_json(&c_a),
        "phi": ball_json(&phi),
        "heights": {
            "gamma": ball_json(&h_gamma),
            "alpha": ball_json(&h_alpha.value),
            "phi": ball_json(&h_phi.value),
        },
    });
    writeln!(out, "{value}")?;
    Ok(())
}

fn named_constant(name: &str) -> Result<LazyReal> {
    if let Some(k) = name.strip_prefix("gamma:") {
        let k: u32 = k.parse().context("order in gamma:K")?;
        if k < 2 {
            bail!("order must be at least 2");
        }
        return Ok(LazyReal::new(move |prec| {
            let target = BigRational::new(BigInt::one(), BigInt::one() << (prec as u64 + 16));
            Ok(gamma_of(k, &target)?.with_precision(prec))
        }));
    }
    if let Some(k) = name.strip_prefix("tau-small:") {
        return Ok(small_k_tau(k.parse().context("order in tau-small:K")?));
    }
    if let Some(k) = name.strip_prefix("mu-small:") {
        return Ok(small_k_mu(k.parse().context("order in mu-small:K")?));
    }
    if let Some(d) = name.strip_prefix("sqrt:") {
        let d: BigInt = d.parse().context("radicand in sqrt:N")?;
        if !d.is_positive() {
            bail!("radicand must be positive");
        }
        return Ok(LazyReal::quadratic(BigRational::zero(), BigRational::one(), d));
    }
    match name {
        "alpha" => Ok(alpha_lazy()),
        "phi" => Ok(phi_lazy()),
        "tau-large" => Ok(large_k_tau()),
        "mu-large" => Ok(large_k_mu()),
        other => bail!("unknown constant {other:?}"),
    }
}

fn cmd_cf(
    opts: &GlobalOpts,
    out: &mut dyn Write,
    constant: &str,
    count: Option<usize>,
    min_q: Option<&str>,
) -> Result<()> {
    let lazy = named_constant(constant)?;
    let policy = opts.policy()?;
    let mut expander = CfExpander::new(lazy, policy);
    match (count, min_q) {
        (Some(n), None) => expander.ensure_len(n)?,
        (None, Some(q)) => {
            let q: BigInt = parse_big_decimal(q)?;
            expander.ensure_denominator_exceeds(&q)?;
        }
        _ => bail!("exactly one of --count or --min-q is required"),
    };
    let cf = expander.snapshot();
    if opts.csv {
        writeln!(out, "index,quotient,p,q")?;
        for (i, (a, (p, q))) in cf.quotients().iter().zip(cf.convergents()).enumerate() {
            writeln!(out, "{i},{a},{p},{q}")?;
        }
    } else {
        for (i, (a, (p, q))) in cf.quotients().iter().zip(cf.convergents()).enumerate() {
            writeln!(
                out,
                "{}",
                serde_json::json!({
                    "index": i,
                    "quotient": a.to_string(),
                    "p": p.to_string(),
                    "q": q.to_string(),
                })
            )?;
        }
    }
    Ok(())
}

/// Parse integers given as decimals with optional exponent, e.g. `7.95e112`.
fn parse_big_decimal(s: &str) -> Result<BigInt> {
    let q = parse_rational(s)?;
    if !q.is_integer() {
        bail!("expected an integer value, got {s:?}");
    }
    Ok(q.to_integer())
}

/// Rational parser accepting `p/q`, plain decimals, and exponent notation.
fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().context("numerator")?;
        let d: BigInt = d.trim().parse().context("denominator")?;
        if d.is_zero() {
            bail!("zero denominator");
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i64>().context("exponent")?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        bail!("empty numeric literal");
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        bail!("invalid numeric literal {s:?}");
    }
    let joined: BigInt = format!("{int_part}{frac_part}").parse()?;
    let scale = exp - frac_part.len() as i64;
    let ten = BigInt::from(10u8);
    let mut value = BigRational::from_integer(joined);
    if scale >= 0 {
        value *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    if neg {
        value = -value;
    }
    Ok(value)
}

/// Quadratic-irrational parser: `p/q` or `p/q+r/s*sqrt(D)` (also `-` joins).
fn parse_lazy_real(s: &str) -> Result<LazyReal> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some(idx) = s.find("sqrt(") {
        let close = s[idx..]
            .find(')')
            .ok_or_else(|| anyhow!("unclosed sqrt("))?
            + idx;
        let d: BigInt = s[idx + 5..close].parse().context("radicand")?;
        if !d.is_positive() {
            bail!("radicand must be positive");
        }
        // split "<r>+<scale>*sqrt(D)" (scale may carry its own sign)
        let head = &s[..idx];
        let (r_str, scale_str) = match head.rfind(['+', '-']) {
            Some(0) | None => ("0", head.trim_end_matches('*')),
            Some(pos) => (&head[..pos], (&head[pos..]).trim_end_matches('*')),
        };
        let r = if r_str.is_empty() { BigRational::zero() } else { parse_rational(r_str)? };
        let scale = match scale_str {
            "" | "+" => BigRational::one(),
            "-" => -BigRational::one(),
            other => parse_rational(other)?,
        };
        return Ok(LazyReal::quadratic(r, scale, d));
    }
    Ok(LazyReal::from_rational(parse_rational(&s)?))
}

fn outcome_json(out: &ReductionOutcome) -> serde_json::Value {
    serde_json::json!({
        "q": out.q.to_string(),
        "convergent_index": out.convergent_index,
        "epsilon": { "mid": BallJson::from_ball(&out.epsilon).mid, "rad": BallJson::from_ball(&out.epsilon).rad },
        "t_bound": { "mid": BallJson::from_ball(&out.t_bound).mid, "rad": BallJson::from_ball(&out.t_bound).rad },
        "t_bound_int": out.t_bound_int().to_string(),
        "attempts": out.attempts,
    })
}

fn cmd_bound(opts: &GlobalOpts, out: &mut dyn Write, which: BoundCommand) -> Result<()> {
    let prec = opts.policy()?.start;
    match which {
        BoundCommand::Matveev { s, degree, coeff_bound, b_values } => {
            let params = MatveevParams {
                s,
                degree,
                coeff_bound: CertReal::from_rational(&parse_rational(&coeff_bound)?, prec),
                b_values: b_values
                    .iter()
                    .map(|b| Ok(CertReal::from_rational(&parse_rational(b)?, prec)))
                    .collect::<Result<Vec<_>>>()?,
            };
            let rhs = matveev_rhs(&params)?;
            writeln!(out, "{}", serde_json::json!({ "matveev_rhs": ball_json(&rhs) }))?;
        }
        BoundCommand::Lemma31 { k } => {
            if k < 2 {
                bail!("order must be at least 2");
            }
            let (n_max, m_max) = lemma31_bounds(k, prec)?;
            writeln!(
                out,
                "{}",
                serde_json::json!({
                    "k": k,
                    "n_max": n_max.to_string(),
                    "m_max": m_max.to_string(),
                })
            )?;
        }
    }
    Ok(())
}

fn cmd_reduce(opts: &GlobalOpts, out: &mut dyn Write, which: ReduceCommand) -> Result<()> {
    let policy = opts.policy()?;
    match which {
        ReduceCommand::SmallK { k } => {
            if !(2..=360).contains(&k) {
                bail!("the per-k preset covers k in [2, 360]");
            }
            let red = small_k_reduce(k, policy)?;
            writeln!(
                out,
                "{}",
                serde_json::json!({
                    "preset": format!("small-k:{k}"),
                    "m_k": red.m_k.to_string(),
                    "outcome": outcome_json(&red.outcome),
                    "m_bound": red.m_bound.to_string(),
                })
            )?;
        }
        ReduceCommand::LargeKChain => {
            let stages = large_k_chain(policy)?;
            for (i, st) in stages.iter().enumerate() {
                writeln!(
                    out,
                    "{}",
                    serde_json::json!({
                        "preset": "large-k-chain",
                        "stage": i + 1,
                        "m_used": st.m_used.to_string(),
                        "outcome": outcome_json(&st.outcome),
                        "k_bound": st.k_bound.to_string(),
                    })
                )?;
            }
        }
        ReduceCommand::Custom { tau, mu, a, c, m } => {
            let inst = ReductionInstance {
                tau: parse_lazy_real(&tau)?,
                mu: parse_lazy_real(&mu)?,
                a_const: parse_rational(&a)?,
                c_base: parse_lazy_real(&c)?,
                m_bound: parse_big_decimal(&m)?,
            };
            let outcome = dujella_petho(&inst, policy)?;
            writeln!(out, "{}", serde_json::json!({ "outcome": outcome_json(&outcome) }))?;
        }
    }
    Ok(())
}

fn parse_range(s: &str) -> Result<(i64, i64)> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| anyhow!("range must be lo:hi, got {s:?}"))?;
    Ok((lo.parse()?, hi.parse()?))
}

fn cmd_search(
    opts: &GlobalOpts,
    out: &mut dyn Write,
    k_range: &str,
    n_range: &str,
    m_range: &str,
    no_filter: bool,
) -> Result<()> {
    let (k_lo, k_hi) = parse_range(k_range)?;
    let (n_lo, n_hi) = parse_range(n_range)?;
    let (m_lo, m_hi) = parse_range(m_range)?;
    if k_lo < 2 || k_hi < k_lo {
        bail!("invalid k range");
    }
    let query = BoxQuery {
        k_lo: k_lo as u32,
        k_hi: k_hi as u32,
        n_lo,
        n_hi,
        m_lo,
        m_hi,
        filters: !no_filter,
    };
    let records = intersect_box(&query);
    if opts.csv {
        writeln!(out, "n,k,m,value,kind")?;
        for r in &records {
            writeln!(out, "{},{},{},{},{:?}", r.n, r.k, r.m, r.value, r.kind)?;
        }
    } else {
        for r in &records {
            writeln!(out, "{}", serde_json::to_string(r)?)?;
        }
    }
    Ok(())
}

fn cmd_verify(
    opts: &GlobalOpts,
    out: &mut dyn Write,
    mode: ModeArg,
    k_range: Option<&str>,
    search_box: Option<&str>,
) -> Result<ExitCode> {
    let mode: RunMode = mode.into();
    let (k_lo, k_hi) = match k_range {
        Some(r) => {
            let (lo, hi) = parse_range(r)?;
            (lo as u32, hi as u32)
        }
        None => (2, 360),
    };
    let search_box = match search_box {
        Some(s) => {
            let parts: Vec<i64> =
                s.split(':').map(|p| p.parse::<i64>()).collect::<Result<_, _>>()?;
            if parts.len() != 6 {
                bail!("search box must be klo:khi:nlo:nhi:mlo:mhi");
            }
            Some(SearchBox {
                k_lo: parts[0] as u32,
                k_hi: parts[1] as u32,
                n_lo: parts[2],
                n_hi: parts[3],
                m_lo: parts[4],
                m_hi: parts[5],
            })
        }
        None => None,
    };
    let cfg = RunConfig {
        policy: opts.policy()?,
        threads: opts.threads,
        mode,
        k_lo,
        k_hi,
        search_box,
    };
    let cert = verify_theorem(&cfg);
    writeln!(out, "{}", certificate_to_canonical_json(&cert))?;
    let ok = match mode {
        RunMode::Full => cert.verdict.theorem_holds,
        _ => cert.diagnostics.is_empty(),
    };
    for d in &cert.diagnostics {
        eprintln!("diagnostic: {d}");
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
