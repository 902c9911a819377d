//! `mudk`: command line front end for the domain pipeline.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mu_domain_kit::discretize::Scheme;
use mu_domain_kit::pipeline::{self, DistSpec, RunConfig};
use mu_domain_kit::{Error, Result};

#[derive(Parser)]
#[command(name = "mudk", version, about = "Build and check Brownian embedding domains for a target law")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand)]
enum Cmd {
    /// Boundary CSV (and optional SVG) for one discretization level.
    Build,
    /// L1 distance and rate bound for each n in --n-list.
    Rates,
    /// Power-series coefficients of the map.
    Map,
    /// Brownian exit samples and a summary with the KS distance.
    Simulate,
    /// KS distance of an existing samples file against the target.
    Check,
}

#[derive(Args)]
struct Opts {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Distribution spec: inline JSON or a path to a JSON file.
    #[arg(long, global = true)]
    dist: Option<String>,
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true, value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    #[arg(long, global = true, value_parser = parse_scheme)]
    scheme: Option<Scheme>,
    /// Boundary samples per half curve.
    #[arg(long, global = true)]
    points: Option<usize>,
    /// Number of series coefficients.
    #[arg(long, global = true)]
    coeffs: Option<usize>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    svg: Option<PathBuf>,
    /// Boundary CSV to simulate on instead of building one.
    #[arg(long, global = true)]
    boundary: Option<PathBuf>,
    /// Samples CSV for `check`.
    #[arg(long, global = true)]
    samples: Option<PathBuf>,
    /// Where `simulate` writes its JSON summary (stdout always gets a copy).
    #[arg(long, global = true)]
    summary: Option<PathBuf>,
    #[arg(long, global = true)]
    walks: Option<usize>,
    #[arg(long, global = true)]
    step: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    max_steps: Option<u64>,
}

fn parse_scheme(s: &str) -> std::result::Result<Scheme, String> {
    match s {
        "cdf" => Ok(Scheme::Cdf),
        "pdf" => Ok(Scheme::Pdf),
        _ => Err(format!("expected `cdf` or `pdf`, got `{s}`")),
    }
}

fn config(opts: Opts) -> Result<RunConfig> {
    let mut cfg = match &opts.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(d) = &opts.dist {
        cfg.dist = Some(DistSpec::from_arg(d)?);
    }
    macro_rules! set {
        ($($field:ident),*) => { $( if let Some(v) = opts.$field { cfg.$field = v; } )* };
    }
    set!(n, n_list, scheme, points, walks, step, seed, max_steps);
    macro_rules! set_opt {
        ($($field:ident),*) => { $( if opts.$field.is_some() { cfg.$field = opts.$field; } )* };
    }
    set_opt!(coeffs, out, svg, boundary, samples, summary);
    Ok(cfg)
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serializes")
}

fn run(cli: Cli) -> Result<()> {
    let cfg = config(cli.opts)?;
    match cli.cmd {
        Cmd::Build => {
            let bp = pipeline::cmd_build(&cfg)?;
            let (x0, x1) = bp.x_range().unwrap_or((f64::NAN, f64::NAN));
            eprintln!("wrote {} boundary points, x in [{x0}, {x1}]", bp.len());
        }
        Cmd::Rates => {
            for r in pipeline::cmd_rates(&cfg)? {
                println!("n={} l1={} bound={} varpi={}", r.n, r.l1, r.bound, r.varpi);
            }
        }
        Cmd::Map => {
            let fc = pipeline::cmd_map(&cfg)?;
            eprintln!("wrote {} coefficients", fc.len());
        }
        Cmd::Simulate => {
            let (_, summary) = pipeline::cmd_simulate(&cfg)?;
            if summary.warning {
                eprintln!("warning: {} of {} walks truncated", summary.truncated, summary.walks);
            }
            println!("{}", json(&summary));
        }
        Cmd::Check => println!("{}", json(&pipeline::cmd_check(&cfg)?)),
    }
    Ok(())
}

fn main() -> ExitCode {
    if let Some(n) = std::env::var("MUDK_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // ignore a second initialization
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mudk: {e}");
            let code: Error = e;
            ExitCode::from(code.exit_code() as u8)
        }
    }
}
