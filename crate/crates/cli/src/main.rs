use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hjnet_cli::commands::{self, CliError, MinimalActionArgs, Overrides};

#[derive(Parser)]
#[command(
    name = "hjnet",
    version,
    about = "Hamilton-Jacobi equations on networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Grid override `n_s,dt,T`.
    #[arg(long, global = true, value_parser = commands::parse_grid_flag)]
    grid: Option<(usize, f64, f64)>,
    /// Largest jump, in nodes, of one scheme step along an arc.
    #[arg(long, global = true)]
    reach: Option<usize>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Multiplier applied to every verification tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the network, the Hamiltonians and the flux limiter.
    Validate {
        config: PathBuf,
        /// Print the normalized problem file after the diagnostics.
        #[arg(long)]
        echo: bool,
    },
    /// Critical constants per arc and limiter caps per vertex.
    Limits { config: PathBuf },
    /// Solve, export the value table and minimizers, and verify.
    Solve { config: PathBuf },
    /// Minimal action between two points, e.g. `ce@0.5` or `c`.
    MinimalAction {
        config: PathBuf,
        x: String,
        #[arg(allow_negative_numbers = true)]
        t: f64,
        y: String,
        #[arg(allow_negative_numbers = true)]
        r: f64,
        /// Also run the exhaustive oracle and print the gap.
        #[arg(long)]
        oracle: bool,
        /// Where to write the minimizing curve.
        #[arg(long)]
        curve: Option<String>,
    },
    /// Stationary solution of `H(s, u') = level` on one arc.
    Stationary {
        config: PathBuf,
        arc: String,
        #[arg(allow_negative_numbers = true)]
        level: f64,
        #[arg(long, default_value_t = 257)]
        nodes: usize,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Validation(format!("--threads: {e}")))?;
    }
    let overrides = Overrides {
        grid: cli.grid,
        reach: cli.reach,
        tol: cli.tol,
    };
    let mut out = io::stdout().lock();
    match &cli.command {
        Command::Validate { config, echo } => {
            commands::validate(&commands::load(config)?, *echo, &mut out)
        }
        Command::Limits { config } => commands::limits(&commands::load(config)?, &mut out),
        Command::Solve { config } => commands::solve(
            &commands::load(config)?,
            &overrides,
            &mut out,
            &mut io::stderr(),
        ),
        Command::MinimalAction {
            config,
            x,
            t,
            y,
            r,
            oracle,
            curve,
        } => commands::minimal_action(
            &commands::load(config)?,
            &overrides,
            &MinimalActionArgs {
                x,
                t: *t,
                y,
                r: *r,
                oracle: *oracle,
                curve: curve.as_deref(),
            },
            &mut out,
        ),
        Command::Stationary {
            config,
            arc,
            level,
            nodes,
        } => commands::stationary(&commands::load(config)?, arc, *level, *nodes, &mut out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("HJNET_LOG"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
