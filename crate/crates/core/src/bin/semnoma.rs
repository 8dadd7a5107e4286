use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use semnoma::experiment::{self, ExperimentConfig, ExperimentKind};
use semnoma::Result;

/// Semantic/bit multiple-access experiments.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Downlink OMA / NOMA / semi-NOMA rate regions for each channel case.
    RateRegion(RunArgs),
    /// Uplink ergodic rate of the secondary user versus the primary requirement.
    Opportunistic(RunArgs),
    /// Write a gnuplot script for the result CSVs in a directory.
    Plot {
        #[arg(long)]
        from: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file (a previous run's manifest.json also works).
    #[arg(long)]
    config: PathBuf,
    /// Override a config key, e.g. `--set uplink.p_avg=0.4`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn run_experiment(kind: ExperimentKind, args: &RunArgs) -> Result<()> {
    let cfg = ExperimentConfig::load(&args.config, &args.overrides)?;
    let threads = experiment::threads_from_env()?;
    let out = experiment::with_threads(threads, || experiment::run(kind, &cfg))??;
    for rec in &out.manifest.outputs {
        println!("wrote {}", out.path(&rec.file).display());
    }
    println!(
        "wrote {} ({:.2} s)",
        out.manifest_path.display(),
        out.manifest.wall_clock_seconds
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::RateRegion(args) => run_experiment(ExperimentKind::RateRegion, args),
        Command::Opportunistic(args) => run_experiment(ExperimentKind::Opportunistic, args),
        Command::Plot { from } => experiment::plot_from_dir(from).map(|p| println!("wrote {}", p.display())),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
