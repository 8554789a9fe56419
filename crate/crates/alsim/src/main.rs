use std::path::PathBuf;
use std::process::ExitCode;

use alsim::commands::{self, SweepAxis};
use alsim::CliResult;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "alsim", version, about = "Pool-based active learning with GP surrogates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every strategy of an experiment spec.
    Run { spec: PathBuf },
    /// Rerun a spec once per value of one hyperparameter.
    Sweep {
        spec: PathBuf,
        /// K, sigma_x_multiplier, sigma_f_multiplier, noise_variance or combination.
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
    },
    /// Write a synthetic dataset and its split file.
    Gen {
        spec: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run { spec } => {
            let rows = commands::cmd_run(&spec)?;
            println!("wrote {} curve rows", rows.len());
        }
        Command::Sweep { spec, axis, values } => {
            let axis: SweepAxis = axis.parse()?;
            let rows = commands::cmd_sweep(&spec, axis, &values)?;
            println!("wrote {} sweep rows", rows.len());
        }
        Command::Gen { spec, out } => {
            let (data, split) = commands::cmd_gen(&spec, &out)?;
            println!("wrote {} and {}", data.display(), split.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 2 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("alsim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
