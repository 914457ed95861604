mod commands;
mod config;
mod plot;

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand, ValueEnum};

/// Bounds on the Brunn-Minkowski exponent of the measures with density
/// proportional to exp(-|x|^p/p), and numerical checks of the inequality.
#[derive(Parser, Debug)]
#[command(name = "ggbm", version)]
struct Cli {
    /// Run file of `key = value` lines naming long flags; flags given on
    /// the command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Print the lower and upper bound for one (n, p).
    Bounds {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
    },
    /// CSV table of both bounds over a range of n and a list of p.
    Table {
        /// Dimensions as a:b:step.
        #[arg(long, default_value = "2:10:1")]
        range: String,
        #[arg(long, value_delimiter = ',', default_value = "2")]
        p: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bound curves with reference curves, as CSV and SVG.
    Curve {
        #[arg(long, value_enum)]
        vary: Vary,
        /// Fixed dimension when p varies.
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Fixed exponent when n varies.
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// a:b:step; defaults to 2:50:1 for n and 1:100:0.5 for p.
        #[arg(long)]
        range: Option<String>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Logarithmic axes in the chart.
        #[arg(long)]
        loglog: bool,
    },
    /// Deficits of the inequality for a pair of bodies read from JSON.
    Verify {
        #[arg(long)]
        bodies: PathBuf,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,0.75")]
        lambda_grid: Vec<f64>,
        /// Exponent to test; defaults to the lower bound.
        #[arg(long)]
        alpha: Option<f64>,
        /// Monte Carlo directions (dimension 4 and up).
        #[arg(long, default_value_t = 200_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search truncated cone pairs for a violation with exponent q.
    Counterexample {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long, value_delimiter = ',')]
        alpha_grid: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        eps_grid: Option<Vec<f64>>,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Large-n behaviour of both bounds against their expansions.
    Asymptotics {
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Dimensions as a:b:step.
        #[arg(long, default_value = "50:400:50")]
        range: String,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Vary {
    N,
    P,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io { path: PathBuf, source: std::io::Error },
    Core(ggbm_core::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    fn exit_code(&self) -> u8 {
        use ggbm_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 2,
            CliError::Core(
                E::InvalidParams(_)
                | E::InvalidBody(_)
                | E::Schema { .. }
                | E::DimensionMismatch { .. }
                | E::UnsupportedRule(_)
                | E::UnsupportedCombination(_),
            ) => 2,
            CliError::Core(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<ggbm_core::Error> for CliError {
    fn from(e: ggbm_core::Error) -> Self {
        CliError::Core(e)
    }
}

/// Outcome of a command that ran to completion.
pub enum Status {
    Ok,
    Violation,
}

fn config_path(args: &[String]) -> Option<PathBuf> {
    args.iter().enumerate().find_map(|(i, a)| {
        if a == "--config" {
            args.get(i + 1).map(PathBuf::from)
        } else {
            a.strip_prefix("--config=").map(PathBuf::from)
        }
    })
}

/// Appends the config file entries that the command line leaves unset.
fn apply_config(mut args: Vec<String>) -> Result<Vec<String>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let entries = config::load(&path)?;
    let root = Cli::command();
    let known: BTreeSet<String> = root
        .get_subcommands()
        .flat_map(|c| c.get_arguments().filter_map(|a| a.get_long().map(str::to_string)))
        .chain(std::iter::once("config".to_string()))
        .collect();
    if let Some(bad) = entries.keys().find(|k| !known.contains(*k)) {
        return Err(CliError::Usage(format!("{}: unknown key `{bad}`", path.display())));
    }
    let Some(sub) = args.iter().skip(1).find_map(|a| root.find_subcommand(a)) else {
        return Ok(args);
    };
    let present: BTreeSet<String> = args
        .iter()
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .collect();
    let extra = config::injected_args(sub, &present, &entries)?;
    args.extend(extra);
    Ok(args)
}

fn run(cli: Cli) -> Result<Status, CliError> {
    match cli.command {
        Cmd::Bounds { n, p } => commands::bounds(n, p),
        Cmd::Table { range, p, out } => commands::table(&range, &p, out.as_deref()),
        Cmd::Curve { vary, n, p, range, out, loglog } => {
            let range = range.unwrap_or_else(|| if vary == Vary::N { "2:50:1" } else { "1:100:0.5" }.to_string());
            commands::curve(vary == Vary::N, n, p, &range, &out, loglog)
        }
        Cmd::Verify { bodies, n, p, lambda_grid, alpha, samples, seed, out } => {
            commands::verify(&bodies, n, p, &lambda_grid, alpha, samples, seed, out.as_deref())
        }
        Cmd::Counterexample { n, p, q, alpha_grid, eps_grid, radius, out } => {
            commands::counterexample(n, p, q, alpha_grid, eps_grid, radius, out.as_deref())
        }
        Cmd::Asymptotics { p, range } => commands::asymptotics(p, &range),
    }
}

fn main() -> ExitCode {
    let args = match apply_config(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Violation) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
