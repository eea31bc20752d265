//! `pgrav`: command-line driver for the planar-gravity library.

mod commands;
mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use config::Params;

const AFTER_HELP: &str = "\
CSV layouts:
  enumerate   N,m,count
  gf          order,numerator,denominator  (coefficients of S(x) = W(x, y)[y^2])
  boundary    m,simulated,stationary
  nonlinear   N,m,value
  trees       index,tree,code  (balanced parentheses with type digits; hex canonical code)
  internal    quantity,value,ci_low,ci_high
  onedim      quantity,value,ci_low,ci_high
  reproduce   criterion,title,pass,detail
Every CSV starts with a '# pgrav <version> <command> seed=<seed>' line.

Exit codes: 0 ok, 1 runtime failure, 2 usage, 3 resource cap, 4 acceptance failure.";

#[derive(Debug, Parser)]
#[command(name = "pgrav", version, about = "Planar pure gravity: enumeration, series, dynamics", after_help = AFTER_HELP)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Master seed; every replica draws from its own substream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (written atomically); standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true)]
    replicas: Option<usize>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// File of key=value lines overriding the defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Counts C(N, m) of rooted disk triangulations.
    Enumerate {
        #[arg(long)]
        nmax: Option<usize>,
        #[arg(long)]
        mmax: Option<usize>,
        /// recurrence or brute
        #[arg(long)]
        source: Option<String>,
    },
    /// Series of the canonical equation and its critical data.
    Gf {
        /// Rational, e.g. 1, 2/27 or 0.25
        #[arg(long)]
        beta: Option<String>,
        #[arg(long)]
        order: Option<usize>,
    },
    /// Boundary growth chain against its stationary law.
    Boundary {
        #[arg(long)]
        lambda1: Option<f64>,
        #[arg(long)]
        lambda2: Option<f64>,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        events: Option<u64>,
        /// full or boundary
        #[arg(long)]
        mode: Option<String>,
    },
    /// Fixed point and contraction of the quadratic measure process.
    Nonlinear {
        #[arg(long)]
        r1: Option<f64>,
        #[arg(long)]
        r2: Option<f64>,
        #[arg(long)]
        nmax: Option<usize>,
    },
    /// Uniform trees coding maps with N faces and boundary m, and their degree law.
    Trees {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
    },
    /// Degree of a tracked vertex under the local moves.
    Internal {
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        horizon: Option<f64>,
    },
    /// One-dimensional gravity: closed forms and queue dynamics.
    Onedim {
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        gap: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        nu: Option<f64>,
    },
    /// Run the acceptance suite.
    Reproduce {
        /// fast or full
        #[arg(long)]
        level: Option<String>,
        /// Comma-separated ids such as 1,3,C07, or all
        #[arg(long)]
        criteria: Option<String>,
        /// Replacement for the frozen counts table
        #[arg(long)]
        fixture: Option<String>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] planar_gravity::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(planar_gravity::Error::ResourceCap(_)) => 3,
            CliError::Core(planar_gravity::Error::Domain(_) | planar_gravity::Error::Parse(_)) => 2,
            _ => 1,
        }
    }
}

const ACCEPTANCE_FAILURE: u8 = 4;

fn params_for(cmd: &Command, g: &Global) -> Result<(&'static str, Params), CliError> {
    let (name, keys) = match cmd {
        Command::Enumerate { .. } => ("enumerate", commands::ENUMERATE_KEYS),
        Command::Gf { .. } => ("gf", commands::GF_KEYS),
        Command::Boundary { .. } => ("boundary", commands::BOUNDARY_KEYS),
        Command::Nonlinear { .. } => ("nonlinear", commands::NONLINEAR_KEYS),
        Command::Trees { .. } => ("trees", commands::TREES_KEYS),
        Command::Internal { .. } => ("internal", commands::INTERNAL_KEYS),
        Command::Onedim { .. } => ("onedim", commands::ONEDIM_KEYS),
        Command::Reproduce { .. } => ("reproduce", commands::REPRODUCE_KEYS),
    };
    let mut defaults: Vec<(&'static str, &str)> = vec![("seed", "1"), ("format", "json"), ("threads", "0")];
    defaults.extend_from_slice(keys);
    let mut p = Params::new(&defaults);
    if let Some(path) = &g.config {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        p.apply_file(&text, &path.display().to_string())?;
    }
    p.set_opt("seed", &g.seed)?;
    p.set_opt("threads", &g.threads)?;
    if let Some(f) = g.format {
        p.set("format", if f == Format::Csv { "csv" } else { "json" })?;
    }
    if g.replicas.is_some() {
        if !keys.iter().any(|(k, _)| *k == "replicas") {
            return Err(CliError::Usage(format!("{name} takes no --replicas")));
        }
        p.set_opt("replicas", &g.replicas)?;
    }
    match cmd {
        Command::Enumerate { nmax, mmax, source } => {
            p.set_opt("nmax", nmax)?;
            p.set_opt("mmax", mmax)?;
            p.set_opt("source", source)?;
        }
        Command::Gf { beta, order } => {
            p.set_opt("beta", beta)?;
            p.set_opt("order", order)?;
        }
        Command::Boundary { lambda1, lambda2, mu, events, mode } => {
            p.set_opt("lambda1", lambda1)?;
            p.set_opt("lambda2", lambda2)?;
            p.set_opt("mu", mu)?;
            p.set_opt("events", events)?;
            p.set_opt("mode", mode)?;
        }
        Command::Nonlinear { r1, r2, nmax } => {
            p.set_opt("r1", r1)?;
            p.set_opt("r2", r2)?;
            p.set_opt("nmax", nmax)?;
        }
        Command::Trees { n, m } => {
            p.set_opt("n", n)?;
            p.set_opt("m", m)?;
        }
        Command::Internal { lambda, mu, horizon } => {
            p.set_opt("lambda", lambda)?;
            p.set_opt("mu", mu)?;
            p.set_opt("horizon", horizon)?;
        }
        Command::Onedim { d, gap, lambda, nu } => {
            p.set_opt("d", d)?;
            p.set_opt("gap", gap)?;
            p.set_opt("lambda", lambda)?;
            p.set_opt("nu", nu)?;
        }
        Command::Reproduce { level, criteria, fixture } => {
            p.set_opt("level", level)?;
            p.set_opt("criteria", criteria)?;
            p.set_opt("fixture", fixture)?;
        }
    }
    Ok((name, p))
}

fn configure_threads(n: usize) -> Result<(), CliError> {
    #[cfg(feature = "parallel")]
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("threads: {e}")))?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

/// Write through a temporary file in the same directory, then rename.
fn write_atomic(path: &Path, data: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| CliError::Usage(format!("bad output path {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let res = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(data)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if res.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    res.map_err(io)
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let (name, p) = params_for(&cli.command, &cli.global)?;
    let seed: u64 = p.get("seed")?;
    configure_threads(p.get("threads")?)?;
    let art = match &cli.command {
        Command::Enumerate { .. } => commands::enumerate(&p)?,
        Command::Gf { .. } => commands::gf(&p)?,
        Command::Boundary { .. } => commands::boundary(&p, seed)?,
        Command::Nonlinear { .. } => commands::nonlinear(&p, seed)?,
        Command::Trees { .. } => commands::trees(&p, seed)?,
        Command::Internal { .. } => commands::internal(&p, seed)?,
        Command::Onedim { .. } => commands::onedim(&p, seed)?,
        Command::Reproduce { .. } => commands::reproduce(&p)?,
    };
    let version = env!("CARGO_PKG_VERSION");
    let text = match p.raw("format") {
        "csv" => format!("# pgrav {version} {name} seed={seed}\n{}", art.csv),
        "json" => {
            // threads does not change results, so it is left out of the artifact
            let params: serde_json::Map<String, Value> = p
                .resolved()
                .iter()
                .filter(|(k, _)| k.as_str() != "threads" && k.as_str() != "format")
                .map(|(k, v)| (k.clone(), Value::String(v.clone())))
                .collect();
            let mut doc = json!({ "version": version, "schema": 1, "command": name, "seed": seed, "params": params });
            if let (Some(obj), Value::Object(body)) = (doc.as_object_mut(), art.body) {
                obj.extend(body);
            }
            serde_json::to_string_pretty(&doc).map_err(|e| CliError::Io(e.to_string()))? + "\n"
        }
        f => return Err(CliError::Usage(format!("format must be csv or json, got {f:?}"))),
    };
    match &cli.global.out {
        Some(path) => write_atomic(path, text.as_bytes())?,
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?,
    }
    Ok(if art.pass == Some(false) { ACCEPTANCE_FAILURE } else { 0 })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("pgrav: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
