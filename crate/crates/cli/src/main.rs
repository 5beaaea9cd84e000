use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] fiedler_core::Error),

    #[error("{0}")]
    Usage(String),

    #[error("cannot write output: {0}")]
    Output(#[from] io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numeric() => 3,
            _ => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "fiedler-walk", version, about = "Estimate Fiedler vectors with interacting random walkers")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// JSON config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output CSV path; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for independent runs.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Overrides the config's master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the node numbering of the graph file.
    #[arg(long, global = true, value_parser = clap::value_parser!(u8).range(0..=1))]
    index_base: Option<u8>,
}

impl GlobalOpts {
    pub fn config(&self) -> CliResult<&PathBuf> {
        self.config.as_ref().ok_or_else(|| CliError::Usage("--config is required".into()))
    }

    pub fn jobs(&self) -> usize {
        self.jobs
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
            .max(1)
    }

    pub fn writer(&self) -> CliResult<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

const SERIES_COLUMNS: &str = "\
Output columns: t, epoch, lambda2 (reference λ₂ of the current topology),
rq_mean, cs_mean, then rq_<run> and cs_<run> for every run. With
\"instantaneous\": true the instantaneous z = (X - Y)/n adds inst_rq_mean,
inst_cs_mean, inst_rq_<run> and inst_cs_<run>. Lines starting with '#'
carry the resolved config as JSON and any warnings.";

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the time-averaged estimator on a static graph.
    #[command(after_help = SERIES_COLUMNS)]
    Simulate,
    /// Integrate the fluid-limit ODE.
    #[command(after_help = "Output columns: t, rq, cs, v (Lyapunov value of z/|z|), lambda (κ xᵀy).")]
    Ode,
    /// Dense spectrum and Fiedler vector of the configured kernel.
    #[command(after_help = "Output columns: node, v2 and, with --partition, side (0 or 1). \
                            Comment lines give the eigenvalues and, with --partition, the ratio cut.")]
    Spectral {
        /// Also report the sign partition of the Fiedler vector and its ratio cut.
        #[arg(long)]
        partition: bool,
    },
    /// Run the estimator with scheduled node removals.
    #[command(after_help = SERIES_COLUMNS)]
    Dynamic,
    /// Compare simulated densities with the ODE across population sizes.
    #[command(after_help = "Output columns: n, median, exceed_fraction, bound_raw, bound, dev_<seed>.")]
    Compare,
    /// Evaluate the deviation bound for a list of population sizes.
    #[command(after_help = "Output columns: n, bound_raw, bound.")]
    Bound,
}

fn run(cli: Cli) -> CliResult<()> {
    let g = &cli.global;
    match cli.command {
        Command::Simulate => commands::simulate(g, false),
        Command::Dynamic => commands::simulate(g, true),
        Command::Ode => commands::ode(g),
        Command::Spectral { partition } => commands::spectral(g, partition),
        Command::Compare => commands::compare(g),
        Command::Bound => commands::bound(g),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
