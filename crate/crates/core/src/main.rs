use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use monodd::cli::{cmd_order, cmd_run, cmd_verify, Flags, EXIT_INVALID_CONFIG};

#[derive(Parser)]
#[command(
    name = "monodd",
    version,
    about = "Monotone overlapping domain decomposition for Volterra integro-parabolic problems"
)]
struct Cli {
    /// Check every assembled system for M-matrix structure
    #[arg(long, global = true)]
    audit_mmatrix: bool,

    /// Run the lower and upper branches one after the other
    #[arg(long, global = true)]
    sequential_branches: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve and write solution/history CSVs
    Run { config: PathBuf },
    /// Check problem hypotheses and the sub/supersolution bracket
    Verify { config: PathBuf },
    /// Grid refinement study against the closed-form solution
    Order { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INVALID_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let flags = Flags {
        audit_mmatrix: cli.audit_mmatrix,
        sequential_branches: cli.sequential_branches,
    };
    let mut out = io::stdout().lock();
    let mut err = io::stderr().lock();
    let code = match &cli.command {
        Command::Run { config } => cmd_run(config, flags, &mut out, &mut err),
        Command::Verify { config } => cmd_verify(config, flags, &mut out, &mut err),
        Command::Order { config } => cmd_order(config, flags, &mut out, &mut err),
    };
    ExitCode::from(code)
}
