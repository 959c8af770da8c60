use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use vardist_cli::{report_to_json, run, RunFlags, Subcommand as Cmd};

/// Critical points, distance degrees, and best approximations on real
/// algebraic varieties.
#[derive(Parser)]
#[command(name = "vardist", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Flags {
    /// Master seed; all randomness in a run flows from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Fiber-count trials for the degree subcommand.
    #[arg(long)]
    trials: Option<usize>,
    /// Monodromy loops per round for the degree subcommand.
    #[arg(long)]
    loops: Option<usize>,
    /// Query samples for the probe subcommand.
    #[arg(long)]
    samples: Option<usize>,
    /// Gaussian scale of probe samples.
    #[arg(long)]
    scale: Option<f64>,
    /// Scaled residual below which a point counts as a solution.
    #[arg(long = "tol-residual")]
    tol_residual: Option<f64>,
    /// Imaginary-part tolerance for the reality flag.
    #[arg(long = "tol-real")]
    tol_real: Option<f64>,
    /// Relative y-distance below which solutions merge.
    #[arg(long = "tol-dedup")]
    tol_dedup: Option<f64>,
    /// Step budget per tracked path.
    #[arg(long = "max-steps")]
    max_steps: Option<usize>,
    /// Path-failure fraction above which a solve is rejected.
    #[arg(long = "paths-tol")]
    paths_tol: Option<f64>,
    /// Omit the timing field for byte-identical reports.
    #[arg(long = "no-timing")]
    no_timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check the problem file and print the critical system.
    Validate {
        problem: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Solve the critical system at the query point x.
    Solve {
        problem: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Estimate the distance degree and the real-component degree.
    Degree {
        problem: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Best approximation of x with uniqueness diagnostics.
    Approx {
        problem: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Sample query points and report the unique-best-approximation rate.
    Probe {
        problem: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
}

fn to_run_flags(flags: &Flags) -> RunFlags {
    RunFlags {
        seed: flags.seed,
        trials: flags.trials,
        loops: flags.loops,
        samples: flags.samples,
        scale: flags.scale,
        tol_residual: flags.tol_residual,
        tol_real: flags.tol_real,
        tol_dedup: flags.tol_dedup,
        max_steps: flags.max_steps,
        paths_tol: flags.paths_tol,
        no_timing: flags.no_timing,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, path, flags) = match &cli.command {
        Command::Validate { problem, flags } => (Cmd::Validate, problem, flags),
        Command::Solve { problem, flags } => (Cmd::Solve, problem, flags),
        Command::Degree { problem, flags } => (Cmd::Degree, problem, flags),
        Command::Approx { problem, flags } => (Cmd::Approx, problem, flags),
        Command::Probe { problem, flags } => (Cmd::Probe, problem, flags),
    };
    match run(cmd, path, &to_run_flags(flags)) {
        Ok(report) => {
            print!("{}", report_to_json(&report));
            ExitCode::SUCCESS
        }
        Err(error) => {
            println!("{}", error.to_json());
            ExitCode::from(error.exit_code() as u8)
        }
    }
}
