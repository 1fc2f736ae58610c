//! `entroland`: run the test problems, merge traces, verify descent properties.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod compare;
mod run;
mod verify;

/// Exit code for unreadable or inconsistent inputs.
pub const EXIT_CONFIG: u8 = 2;
/// Exit code when a solver aborted (its partial trace is still written).
pub const EXIT_ABORT: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "entroland", version, about = "Entropic Landweber experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StopArg {
    Discrepancy,
    Apriori,
    Maxiter,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one or more methods on a problem config and write traces.
    Run(run::RunArgs),
    /// Merge the L1 error columns of several traces into one wide CSV.
    Compare {
        /// Trace CSVs; each needs its JSON sidecar next to it.
        #[arg(required = true)]
        traces: Vec<PathBuf>,
        /// Output file (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check residual and D(z,u_k) monotonicity of a trace.
    Verify {
        #[arg(long)]
        trace: PathBuf,
        /// Sidecar with the noise level; defaults to the trace path with a .json extension.
        #[arg(long)]
        sidecar: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => run::cmd_run(args),
        Command::Compare { traces, out } => compare::cmd_compare(&traces, out.as_deref()),
        Command::Verify { trace, sidecar } => verify::cmd_verify(&trace, sidecar.as_deref()),
    }
}

pub fn sidecar_path(trace: &std::path::Path) -> PathBuf {
    trace.with_extension("json")
}
