//! `mixlog`: run advection experiments, self-checks and constant tables.

mod commands;
mod config;

use clap::{Parser, Subcommand};
use commands::{SharpnessArgs, Usage};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mixlog", version, about = "Logarithmic mixing diagnostics for passive scalars")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides `out` in the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides `seed` in the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// V along the exact self-similar rescaling schedule.
    Sharpness {
        #[arg(long, default_value_t = 2)]
        m: u64,
        #[arg(long, default_value_t = 8)]
        n_max: u32,
        /// Grid points per axis.
        #[arg(long, default_value_t = 1024)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// cosine, stripes or checkerboard.
        #[arg(long, default_value = "cosine")]
        pattern: String,
        #[arg(long, default_value_t = 1)]
        mode: u32,
        /// Constant added to the pattern.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        offset: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named self-check suite (or `all`).
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the results JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the dimensional constants as JSON.
    Constants {
        #[arg(long)]
        d: usize,
    },
    /// Recompute diagnostics for the snapshots of a run directory.
    Diagnostics {
        dir: PathBuf,
        /// Geometric mixing scale accuracy; omitted means no eps_geom column values.
        #[arg(long)]
        kappa: Option<f64>,
        /// Extra Sobolev index, repeatable.
        #[arg(long = "s", allow_negative_numbers = true)]
        s: Vec<f64>,
        /// Output CSV (default `<dir>/diagnostics.csv`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { config, out, seed } => commands::simulate(&config, out, seed),
        Command::Sharpness { m, n_max, n, d, pattern, mode, offset, out } => {
            commands::sharpness_cmd(&SharpnessArgs { m, n_max, n, d, pattern, mode, offset, out })
        }
        Command::Verify { suite, seed, out } => commands::verify(&suite, seed, out),
        Command::Constants { d } => commands::constants(d),
        Command::Diagnostics { dir, kappa, s, out } => commands::diagnostics(&dir, kappa, s, out),
    };
    match result {
        Ok(code) => code,
        Err(e) if e.downcast_ref::<Usage>().is_some() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
