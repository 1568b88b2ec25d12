//! `ddseq`: division sequences attached to Laurent polynomials.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 parse or input error, 3 resource
//! cap exceeded, 4 internal invariant violated.

mod cache;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ddseq::analytics::MahlerConfig;
use ddseq::symbolic::Support;
use ddseq::{Error, Execution, FiniteSubgroup, LaurentPoly, Limits};

use cache::{Cache, CacheKey};
use commands::{Format, GenericWhat, PtCheck};

#[derive(Parser, Debug)]
#[command(name = "ddseq", version, about = "Division sequences W_f(Lambda) over finite subgroups of the torus")]
struct Cli {
    /// Emit JSON.
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    /// Emit CSV.
    #[arg(long, global = true)]
    csv: bool,
    /// Directory of the JSONL result cache.
    #[arg(long, global = true, value_name = "DIR")]
    cache: Option<PathBuf>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long, global = true, value_name = "K")]
    threads: Option<usize>,
    /// Cap on the number of group elements enumerated.
    #[arg(long, global = true, value_name = "COUNT")]
    max_elements: Option<u64>,
    #[command(subcommand)]
    cmd: Command,
}

/// A finite subgroup, either `mu_n^N` or an explicit canonical form.
#[derive(Args, Debug, Clone)]
struct GroupArgs {
    /// Use mu_n^N with N the polynomial's arity.
    #[arg(long, conflicts_with = "group")]
    n: Option<u64>,
    /// Subgroup as `N=2;m=6;gens=(1,0),(0,3)`.
    #[arg(long)]
    group: Option<String>,
}

/// A second subgroup for comparisons.
#[derive(Args, Debug, Clone)]
struct SecondGroupArgs {
    #[arg(long, conflicts_with = "group2")]
    n2: Option<u64>,
    #[arg(long)]
    group2: Option<String>,
}

#[derive(Subcommand, Debug, Clone)]
enum Command {
    /// Print W_f(Lambda) and its factorization.
    W {
        #[arg(allow_hyphen_values = true)]
        poly: String,
        #[command(flatten)]
        g: GroupArgs,
    },
    /// Print the orbit factorization of W_f(Lambda) into C_f^|S| factors.
    ///
    /// CSV columns: order,group,generator,c,exponent,vanishes
    Factor {
        #[arg(allow_hyphen_values = true)]
        poly: String,
        #[command(flatten)]
        g: GroupArgs,
    },
    /// Ranks of apparition of a prime: minimal Lambda with p | V_f(Lambda).
    ///
    /// CSV columns: p,order,cyclic,group
    Ra {
        #[arg(allow_hyphen_values = true)]
        poly: String,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 30)]
        max_order: u64,
        /// Scan every subgroup, not only cyclic ones.
        #[arg(long)]
        all_subgroups: bool,
    },
    /// Primitive parts of V_f over cyclic subgroups.
    ///
    /// CSV columns: order,group,w,primitive_part,in_zsigmondy_set
    Zsig {
        #[arg(allow_hyphen_values = true)]
        poly: String,
        #[arg(long, default_value_t = 20)]
        max_order: u64,
    },
    /// log|W_f(mu_n^N)| / n^N against log M(f).
    ///
    /// CSV columns: n,sign,bits,log_abs_w,normalized,estimate,reference_log_m,residual,vanishing,head
    Growth {
        #[arg(allow_hyphen_values = true)]
        poly: String,
        /// Largest n.
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 2)]
        refine: u32,
    },
    /// Estimate the Mahler measure M(f), optionally of f restricted to a subtorus.
    ///
    /// CSV columns: value,log_value,nodes,error_indicator,converged,method,root_formula
    Mahler {
        #[arg(allow_hyphen_values = true)]
        poly: String,
        /// Integer matrix `a,b;c,d` parametrizing a subtorus, one row per variable.
        #[arg(long)]
        param: Option<String>,
        #[arg(long, default_value_t = 2)]
        refine: u32,
    },
    /// The two-variable family P_T = X + 1/X + Y + 1/Y + T.
    Ptfamily {
        #[arg(long)]
        n: u64,
        #[arg(long, value_enum, default_value_t = PtCheck::All)]
        check: PtCheck,
    },
    /// Compare gcd(W(L1), W(L2)) with W(L1 cap L2).
    Strongdiv {
        #[arg(allow_hyphen_values = true)]
        poly: String,
        #[command(flatten)]
        g: GroupArgs,
        #[command(flatten)]
        g2: SecondGroupArgs,
    },
    /// Generic polynomial f_M with symbolic coefficients a(m), m in M.
    Generic {
        /// Exponent vectors `0,0;1,0;0,1`.
        #[arg(long, allow_hyphen_values = true)]
        support: String,
        #[command(flatten)]
        g: GroupArgs,
        #[command(flatten)]
        g2: SecondGroupArgs,
        #[arg(long, value_enum, default_value_t = GenericWhat::V)]
        what: GenericWhat,
    },
    /// Audit the divisor-counting inequality over subgroups of order <= x.
    ///
    /// CSV rows: key,value
    Romanoff {
        #[arg(allow_hyphen_values = true)]
        poly: String,
        #[arg(long, default_value_t = 12)]
        x: u64,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
    },
    /// Partial sums of p^-theta over primes with a rank of apparition.
    ///
    /// CSV columns: p,min_order,partial_sum
    Density {
        #[arg(allow_hyphen_values = true)]
        poly: String,
        #[arg(long, default_value_t = 0.5)]
        theta: f64,
        /// Largest prime scanned.
        #[arg(long, default_value_t = 50)]
        p: u64,
        #[arg(long, default_value_t = 12)]
        max_order: u64,
    },
    /// Number of subgroups of order n in the N-dimensional torus.
    Nu {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        n: u64,
    },
}

impl Command {
    /// Moves the polynomial text out, leaving the remaining arguments as the
    /// operation tag.
    fn take_poly(&mut self) -> Option<String> {
        match self {
            Command::W { poly, .. }
            | Command::Factor { poly, .. }
            | Command::Ra { poly, .. }
            | Command::Zsig { poly, .. }
            | Command::Growth { poly, .. }
            | Command::Mahler { poly, .. }
            | Command::Strongdiv { poly, .. }
            | Command::Romanoff { poly, .. }
            | Command::Density { poly, .. } => Some(std::mem::take(poly)),
            Command::Ptfamily { .. } | Command::Generic { .. } | Command::Nu { .. } => None,
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ResourceCap { .. } => 3,
        Error::Invariant(_) => 4,
        _ => 2,
    }
}

fn resolve_group(g: &GroupArgs, arity: usize) -> Result<Option<FiniteSubgroup>, Error> {
    match (g.n, &g.group) {
        (Some(n), _) => FiniteSubgroup::mu_n(arity, n).map(Some),
        (None, Some(text)) => text.parse().map(Some),
        (None, None) => Ok(None),
    }
}

fn resolve_second(g: &SecondGroupArgs, arity: usize) -> Result<Option<FiniteSubgroup>, Error> {
    resolve_group(
        &GroupArgs {
            n: g.n2,
            group: g.group2.clone(),
        },
        arity,
    )
}

fn require(g: Option<FiniteSubgroup>, flag: &str) -> Result<FiniteSubgroup, Error> {
    g.ok_or_else(|| Error::InvalidInput(format!("a subgroup is required ({flag})")))
}

/// Arity of the explicit group, if one was given, else of the polynomial.
fn lift(f: LaurentPoly, g: &GroupArgs) -> Result<LaurentPoly, Error> {
    match &g.group {
        Some(text) => {
            let group: FiniteSubgroup = text.parse()?;
            if group.arity() > f.arity() {
                f.with_arity(group.arity())
            } else {
                Ok(f)
            }
        }
        None => Ok(f),
    }
}

struct Ctx {
    fmt: Format,
    limits: Limits,
    mahler: MahlerConfig,
}

/// Canonical key of the subgroups a command runs over, `-` when none.
fn group_key(cmd: &Command, f: Option<&LaurentPoly>) -> Result<String, Error> {
    let arity = |g: &GroupArgs| -> Result<usize, Error> {
        Ok(match f {
            Some(f) => lift(f.clone(), g)?.arity(),
            None => 1,
        })
    };
    let keys = |a: Option<FiniteSubgroup>, b: Option<FiniteSubgroup>| {
        let ks: Vec<String> = a.iter().chain(b.iter()).map(FiniteSubgroup::key).collect();
        if ks.is_empty() {
            "-".to_string()
        } else {
            ks.join("|")
        }
    };
    Ok(match cmd {
        Command::W { g, .. } | Command::Factor { g, .. } => keys(resolve_group(g, arity(g)?)?, None),
        Command::Strongdiv { g, g2, .. } => {
            let n = arity(g)?;
            keys(resolve_group(g, n)?, resolve_second(g2, n)?)
        }
        Command::Generic { support, g, g2, .. } => {
            let n = commands::parse_matrix(support)?[0].len();
            keys(resolve_group(g, n)?, resolve_second(g2, n)?)
        }
        _ => "-".to_string(),
    })
}

fn run(cmd: Command, f: Option<LaurentPoly>, ctx: &Ctx) -> Result<String, Error> {
    let fmt = ctx.fmt;
    let limits = &ctx.limits;
    let poly = || f.clone().ok_or_else(|| Error::InvalidInput("missing polynomial".into()));
    let mahler_cfg = |refine: u32| MahlerConfig {
        refinement: refine,
        ..ctx.mahler
    };
    Ok(match cmd {
        Command::W { g, .. } => {
            let f = lift(poly()?, &g)?;
            let group = require(resolve_group(&g, f.arity())?, "--n or --group")?;
            commands::w(&f, &group, fmt, limits)?
        }
        Command::Factor { g, .. } => {
            let f = lift(poly()?, &g)?;
            let group = require(resolve_group(&g, f.arity())?, "--n or --group")?;
            commands::factor(&f, &group, fmt, limits)?
        }
        Command::Ra {
            p,
            max_order,
            all_subgroups,
            ..
        } => commands::ra(&poly()?, p, max_order, all_subgroups, fmt, limits)?,
        Command::Zsig { max_order, .. } => commands::zsig(&poly()?, max_order, fmt, limits)?,
        Command::Growth { n, refine, .. } => {
            commands::growth(&poly()?, n, &mahler_cfg(refine), fmt, limits)?
        }
        Command::Mahler { param, refine, .. } => {
            commands::mahler(&poly()?, param.as_deref(), &mahler_cfg(refine), fmt)?
        }
        Command::Ptfamily { n, check } => commands::ptfamily(n, check, fmt, limits)?,
        Command::Strongdiv { g, g2, .. } => {
            let mut f = lift(poly()?, &g)?;
            if let Some(text) = &g2.group2 {
                let other: FiniteSubgroup = text.parse()?;
                if other.arity() > f.arity() {
                    f = f.with_arity(other.arity())?;
                }
            }
            let a = require(resolve_group(&g, f.arity())?, "--n or --group")?;
            let b = require(resolve_second(&g2, f.arity())?, "--n2 or --group2")?;
            commands::strongdiv(&f, &a, &b, fmt, limits)?
        }
        Command::Generic { support, g, g2, what } => {
            let rows = commands::parse_matrix(&support)?;
            let s = Support::new(rows[0].len(), &rows)?;
            let arity = rows[0].len();
            let a = require(resolve_group(&g, arity)?, "--n or --group")?;
            let b = resolve_second(&g2, arity)?;
            commands::generic(&s, &a, b.as_ref(), what, fmt, limits)?
        }
        Command::Romanoff { x, eps, .. } => commands::romanoff(&poly()?, x, eps, fmt, limits)?,
        Command::Density {
            theta, p, max_order, ..
        } => commands::density(&poly()?, theta, p, max_order, fmt, limits)?,
        Command::Nu { dim, n } => commands::nu_cmd(dim, n, fmt, limits)?,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let fmt = if cli.json {
        Format::Json
    } else if cli.csv {
        Format::Csv
    } else {
        Format::Text
    };
    let mut limits = Limits::default();
    if let Some(m) = cli.max_elements {
        limits.max_elements = m;
    }
    if let Some(k) = cli.threads {
        if k == 1 {
            limits.exec = Execution::Sequential;
        } else if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    let ctx = Ctx {
        fmt,
        mahler: MahlerConfig {
            exec: limits.exec,
            ..MahlerConfig::default()
        },
        limits,
    };

    let mut tag_cmd = cli.cmd.clone();
    let poly_text = tag_cmd.take_poly();
    let f = match poly_text.as_deref().map(str::parse::<LaurentPoly>).transpose() {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let canonical = f.as_ref().map_or("-".to_string(), |f| f.to_string());
    let op = format!("{tag_cmd:?}|{fmt:?}");
    let group = match group_key(&cli.cmd, f.as_ref()) {
        Ok(k) => k,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };

    let mut cache = match &cli.cache {
        Some(dir) => match Cache::open(dir) {
            Ok(c) => Some(c),
            Err(e) => {
                eprintln!("error: cache: {e}");
                return ExitCode::from(1);
            }
        },
        None => None,
    };

    let key = CacheKey::new(&canonical, &group, &op);
    if let Some(hit) = cache.as_ref().and_then(|c| c.get(&key)) {
        print!("{hit}");
        return ExitCode::SUCCESS;
    }

    match run(cli.cmd, f, &ctx) {
        Ok(out) => {
            print!("{out}");
            if let Some(c) = cache.as_mut() {
                if let Err(e) = c.put(key, &out) {
                    eprintln!("warning: cache write failed: {e}");
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
