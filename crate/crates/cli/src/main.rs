//! Batch front end: evolve level-set flows, verify the weak-solution
//! structure of their foliations, and rebuild the function from its
//! sub-level sets.
//!
//! Exit codes: 0 all checks pass, 1 some checks fail, 2 solver error,
//! 3 I/O error, 4 missing run data, 5 nesting violation.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mcflab_cli::commands::{
    cmd_evolve, cmd_reconstruct, cmd_verify, exit_code_for, ReconstructOptions, VerifyOptions,
};

#[derive(Parser)]
#[command(
    name = "mcflab",
    about = "Level-set mean curvature flow laboratory",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a datum and write frame snapshots plus a manifest.
    Evolve {
        /// JSON run configuration.
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the verification suite on an evolved run directory.
    Verify {
        /// Run directory written by `evolve`.
        #[arg(long)]
        run: PathBuf,
        /// Override the number of levels in the foliation.
        #[arg(long)]
        levels: Option<usize>,
        /// Comma-separated checks: variational, avoidance, comparison,
        /// fattening, viscosity.
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<String>>,
        /// Seed of the viscosity sampling.
        #[arg(long)]
        seed: Option<u64>,
        /// Second run directory for the comparison check.
        #[arg(long)]
        compare_run: Option<PathBuf>,
        /// Export contour CSVs for the level nearest zero.
        #[arg(long)]
        export_contours: bool,
    },
    /// Layer-cake reconstruction from the foliation of a run.
    Reconstruct {
        /// Run directory written by `evolve`.
        #[arg(long)]
        run: PathBuf,
        /// Number of reconstruction levels.
        #[arg(long, default_value_t = 64)]
        levels: usize,
        /// External family directory (indicator snapshots + family.json).
        #[arg(long)]
        family: Option<PathBuf>,
        /// Repair non-nested families by the intersection cascade instead
        /// of failing.
        #[arg(long)]
        repair_nesting: bool,
    },
}

fn init_thread_pool() {
    if let Ok(text) = std::env::var("MCF_THREADS") {
        if let Ok(n) = text.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    let outcome: anyhow::Result<i32> = match cli.command {
        Command::Evolve { config } => cmd_evolve(&config).map(|()| 0),
        Command::Verify {
            run,
            levels,
            checks,
            seed,
            compare_run,
            export_contours,
        } => cmd_verify(&VerifyOptions {
            run_dir: run,
            levels,
            checks,
            seed,
            compare_run,
            export_contours,
        })
        .map(|all_pass| if all_pass { 0 } else { 1 }),
        Command::Reconstruct {
            run,
            levels,
            family,
            repair_nesting,
        } => cmd_reconstruct(&ReconstructOptions {
            run_dir: run,
            levels,
            family,
            repair: repair_nesting,
        })
        .map(|()| 0),
    };
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err) as u8)
        }
    }
}
