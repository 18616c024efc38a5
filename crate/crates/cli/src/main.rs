//! `ncpsh` command-line tool.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::commands::{CliError, Report};
use crate::config::Config;

#[derive(Parser, Debug)]
#[command(name = "ncpsh", version, about = "Free noncommutative function calculus toolkit")]
struct Cli {
    /// TOML file with tolerances and seeds; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads for sampling loops.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate an expression at a matrix tuple.
    Eval {
        #[arg(long)]
        expr: PathBuf,
        #[arg(long)]
        point: PathBuf,
    },
    /// Expand an expression into a truncated series file.
    Expand {
        #[arg(long)]
        expr: PathBuf,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        maxdeg: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Directional derivative of an expression.
    Diff {
        #[arg(long)]
        expr: PathBuf,
        /// One of D, Dstar, hessian, DR, DR2.
        #[arg(long)]
        op: String,
        #[arg(long, conflicts_with = "fd")]
        symbolic: bool,
        #[arg(long)]
        fd: bool,
        #[arg(long)]
        point: PathBuf,
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        fd_step: Option<f64>,
    },
    /// Middle-matrix plurisubharmonicity certificate at level N.
    CertifyPsh {
        #[arg(long)]
        series: PathBuf,
        #[arg(long = "N")]
        n: usize,
        /// Also run the random Hessian sampler.
        #[arg(long)]
        sample: bool,
    },
    /// Build a realization from a plurisubharmonic series.
    Realize {
        #[arg(long)]
        series: PathBuf,
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare a stored realization against its series.
    VerifyRealization {
        #[arg(long)]
        realization: PathBuf,
        #[arg(long)]
        series: PathBuf,
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// Continue a realization along a path of scalar centers.
    Continue {
        #[arg(long)]
        realization: PathBuf,
        #[arg(long)]
        path: PathBuf,
        /// Truncation degree of the continued data.
        #[arg(long)]
        order: Option<usize>,
        /// Where to write the final realization.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monodromy experiments.
    Lab {
        #[command(subcommand)]
        experiment: Lab,
    },
    /// Analytic function whose real part is a pluriharmonic series.
    Conjugate {
        #[arg(long)]
        series: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum Lab {
    /// Root test for the logarithm of [[1, z], [z, 1 + z^2]].
    LogRadius {
        #[arg(long = "N", default_value_t = 200)]
        n: usize,
        /// Write (n, norm, root) rows here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Truncated BCH series against the principal logarithm.
    Bch {
        #[arg(long, default_value_t = 12)]
        maxdeg: usize,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Nilpotent substitution into the two-variable log series.
    MartinShamovich {
        #[arg(long, default_value_t = 12)]
        maxdeg: usize,
        #[arg(long)]
        divergence_degree: Option<usize>,
    },
    /// f([[X, c(X-Y)], [0, Y]]) against the block formula.
    Triangular {
        #[arg(long)]
        expr: PathBuf,
        #[arg(long = "X")]
        x: PathBuf,
        #[arg(long = "Y")]
        y: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        c: String,
    },
}

fn settings(cli: &Cli) -> Result<Config, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p).map_err(CliError::Usage)?,
        None => Config::default(),
    };
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn dispatch(cli: &Cli, cfg: &mut Config) -> Result<Report, CliError> {
    use commands as c;
    match &cli.command {
        Command::Eval { expr, point } => c::eval(cfg, expr, point),
        Command::Expand { expr, d, maxdeg, out } => c::expand_expr(expr, *d, *maxdeg, out.as_deref()),
        Command::Diff { expr, op, symbolic: _, fd, point, dir, fd_step } => {
            if let Some(h) = fd_step {
                cfg.fd_step = *h;
            }
            c::diff(cfg, expr, op, *fd, point, dir)
        }
        Command::CertifyPsh { series, n, sample } => c::certify(cfg, series, *n, *sample),
        Command::Realize { series, n, out } => c::realize(cfg, series, *n, out),
        Command::VerifyRealization { realization, series, samples } => {
            c::verify_realization(cfg, realization, series, *samples)
        }
        Command::Continue { realization, path, order, out } => {
            if order.is_some() {
                cfg.continuation_order = *order;
            }
            c::continue_path(cfg, realization, path, out.as_deref())
        }
        Command::Lab { experiment } => match experiment {
            Lab::LogRadius { n, csv } => c::log_radius(cfg, *n, csv.as_deref()),
            Lab::Bch { maxdeg, samples } => {
                if let Some(s) = samples {
                    cfg.bch_samples = *s;
                }
                c::bch(cfg, *maxdeg)
            }
            Lab::MartinShamovich { maxdeg, divergence_degree } => {
                if let Some(d) = divergence_degree {
                    cfg.divergence_degree = *d;
                }
                c::martin_shamovich(cfg, *maxdeg)
            }
            Lab::Triangular { expr, x, y, c: cc } => c::triangular(cfg, expr, x, y, cc),
        },
        Command::Conjugate { series } => c::conjugate(cfg, series),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = settings(&cli).and_then(|mut cfg| dispatch(&cli, &mut cfg).map(|r| (r, cfg)));
    match outcome {
        Ok((report, cfg)) => {
            let out = match cli.format {
                Format::Json => report.to_json(&cfg),
                Format::Text => report.to_text(&cfg),
            };
            let _ = writeln!(std::io::stdout(), "{out}");
            if report.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
