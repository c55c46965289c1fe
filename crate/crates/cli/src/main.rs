//! `mixedmop`: command-line front end for mixed-type multiple orthogonal
//! polynomials, their kernels, and non-intersecting Brownian motions.

mod artifacts;
mod brownian;
mod failure;
mod input;
mod kernel;
mod mop;
mod rh;

use std::panic;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mixedmop::Precision;

use artifacts::Artifacts;
use failure::Failure;
use input::GridSpec;

#[derive(Debug, Parser)]
#[command(name = "mixedmop", version, about = "Mixed-type multiple orthogonal polynomials and their kernels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    options: Options,
}

#[derive(Debug, Clone, Args)]
struct Options {
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Evaluation grid as `min:max:count`.
    #[arg(long, global = true, allow_hyphen_values = true, value_parser = input::parse_grid)]
    grid: Option<GridSpec>,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Override for the command's primary tolerance.
    #[arg(long, global = true, value_parser = input::parse_tol)]
    tol: Option<f64>,
    #[arg(long, global = true, default_value = "double")]
    precision: Precision,
}

#[derive(Debug, Clone, Subcommand)]
enum Command {
    /// Solve a defining pair under every admissible normalization.
    MopSolve,
    /// Kernel on a square grid by the biorthogonal and Christoffel-Darboux routes.
    KernelGrid,
    /// Check the Christoffel-Darboux formula against the biorthogonal kernel.
    CdCheck,
    /// Certify the Riemann-Hilbert solution built from the mixed forms.
    RhVerify,
    /// Correlation kernel of non-intersecting Brownian motions.
    BrownianKernel,
    /// Sample positions (and optionally path bundles) at the observation time.
    BrownianSample(SampleArgs),
    /// One-point function, normalization constant and determinantal identity.
    BrownianDensity,
}

#[derive(Debug, Clone, Args)]
struct SampleArgs {
    /// Number of position draws.
    #[arg(long, default_value_t = 10_000)]
    draws: usize,
    /// Number of discretized path bundles (0 skips path sampling).
    #[arg(long, default_value_t = 0)]
    paths: usize,
    /// Time steps of the path grid.
    #[arg(long, default_value_t = mixedmop::brownian::MIN_TIME_STEPS)]
    steps: usize,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::MopSolve => "mop-solve",
            Command::KernelGrid => "kernel-grid",
            Command::CdCheck => "cd-check",
            Command::RhVerify => "rh-verify",
            Command::BrownianKernel => "brownian-kernel",
            Command::BrownianSample(_) => "brownian-sample",
            Command::BrownianDensity => "brownian-density",
        }
    }
}

/// Everything a command needs besides its configuration file.
pub struct Context {
    pub command: &'static str,
    pub grid: Option<GridSpec>,
    pub seed: u64,
    pub tol: Option<f64>,
    pub precision: Precision,
    /// The parsed configuration, echoed into every report.
    pub config: Option<serde_json::Value>,
}

fn run(cli: &Cli, ctx: &mut Context) -> Result<Artifacts, Failure> {
    let path = cli
        .options
        .config
        .as_deref()
        .ok_or_else(|| Failure::validation("--config is required"))?;
    match &cli.command {
        Command::MopSolve => mop::solve(path, ctx),
        Command::KernelGrid => kernel::grid(path, ctx),
        Command::CdCheck => kernel::cd_check(path, ctx),
        Command::RhVerify => rh::verify(path, ctx),
        Command::BrownianKernel => brownian::kernel(path, ctx),
        Command::BrownianSample(args) => brownian::sample(path, ctx, args),
        Command::BrownianDensity => brownian::density(path, ctx),
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("MIXEDMOP_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Failure::validation(format!("MIXEDMOP_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::internal(format!("thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("E_USAGE: {first}");
            return ExitCode::from(1);
        }
    };
    let mut ctx = Context {
        command: cli.command.name(),
        grid: cli.options.grid,
        seed: cli.options.seed,
        tol: cli.options.tol,
        precision: cli.options.precision,
        config: None,
    };

    // Panics become exit status 3 with a single stderr line.
    panic::set_hook(Box::new(|_| {}));
    let outcome = panic::catch_unwind(panic::AssertUnwindSafe(|| {
        configure_threads()?;
        run(&cli, &mut ctx)
    }))
    .unwrap_or_else(|payload| {
        let msg = payload
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| payload.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "unknown panic".into());
        Err(Failure::internal(format!("panic: {msg}")))
    });

    let failure = match outcome.and_then(|a| a.write(&cli.options.out)) {
        Ok(()) => return ExitCode::SUCCESS,
        Err(f) => f,
    };
    eprintln!("{}", failure.line());
    if let Err(e) = failure.write_report(&cli.options.out, &ctx) {
        eprintln!("E_INTERNAL: could not write error report: {}", e.message());
    }
    ExitCode::from(failure.exit_code())
}
