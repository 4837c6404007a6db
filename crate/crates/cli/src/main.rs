//! `bicons`: verify catalog and user surfaces, integrate the warp
//! equations, scan the nonexistence bounds.
//!
//! Exit codes: 0 pass, 1 fail, 2 degenerate or invalid input. A one-line
//! `status=... code=...` summary goes to stderr.

mod commands;
mod config;
mod user_map;

use std::path::PathBuf;
use std::process::ExitCode;

use bicons_core::{Error, Result};
use clap::{Parser, Subcommand};

use commands::{ScanTarget, SolveTarget, VerifyTarget};
use config::{
    FileConfig, GridParams, OutputParams, ScanParams, SolverParams, SurfaceParams, ToleranceParams,
};

#[derive(Parser, Debug)]
#[command(
    name = "bicons",
    version,
    about = "Checks space-like PMCV and biconservative surfaces in Lorentzian warped products"
)]
struct Cli {
    /// TOML file with defaults; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a surface on a grid and write the JSON report.
    Verify {
        #[arg(value_enum)]
        target: VerifyTarget,
        #[command(flatten)]
        surface: SurfaceParams,
        #[command(flatten)]
        grid: GridParams,
        #[command(flatten)]
        tolerances: ToleranceParams,
        #[command(flatten)]
        solver: SolverParams,
        #[command(flatten)]
        output: OutputParams,
    },
    /// Integrate a warp equation and write the solution table.
    Solve {
        #[arg(value_enum)]
        target: SolveTarget,
        #[command(flatten)]
        surface: SurfaceParams,
        #[command(flatten)]
        solver: SolverParams,
        #[command(flatten)]
        output: OutputParams,
    },
    /// Check a nonexistence bound node by node.
    Scan {
        #[arg(value_enum)]
        target: ScanTarget,
        #[command(flatten)]
        scan: ScanParams,
        #[command(flatten)]
        output: OutputParams,
    },
    /// Print a saved JSON report.
    Report { path: PathBuf },
}

fn run(cli: Cli) -> Result<commands::Outcome> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    if let Some(n) = cli.threads.or(file.threads) {
        if n == 0 {
            return Err(Error::Usage("threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Usage(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Verify {
            target,
            surface,
            grid,
            tolerances,
            solver,
            output,
        } => commands::verify(
            target,
            &commands::VerifyArgs {
                surface: surface.or(file.surface),
                grid: grid.or(file.grid),
                tolerances: tolerances.or(file.tolerances),
                solver: solver.or(file.solver),
                output: output.or(file.output),
            },
        ),
        Command::Solve {
            target,
            surface,
            solver,
            output,
        } => commands::solve(
            target,
            &commands::SolveArgs {
                surface: surface.or(file.surface),
                solver: solver.or(file.solver),
                output: output.or(file.output),
            },
        ),
        Command::Scan {
            target,
            scan,
            output,
        } => commands::scan(
            target,
            &commands::ScanArgs {
                scan: scan.or(file.scan),
                output: output.or(file.output),
            },
        ),
        Command::Report { path } => commands::report(&path),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(o) => {
            eprintln!("{}", o.status_line());
            ExitCode::from(o.code as u8)
        }
        Err(e) => {
            eprintln!("{}", commands::error_line(&e));
            ExitCode::from(2)
        }
    }
}
