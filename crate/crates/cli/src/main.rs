use std::path::PathBuf;
use std::process::ExitCode;

use burgers_cli::commands::{self, Direction, SweepAxes};
use burgers_cli::config::{Preset, RunConfig};
use burgers_cli::CliError;
use clap::{Parser, Subcommand};

/// Finite difference solver for viscous Burgers with boundary feedback.
#[derive(Parser, Debug)]
#[command(name = "burgers", version)]
struct Cli {
    /// Start from a named parameter set.
    #[arg(long, global = true, value_enum)]
    preset: Option<Preset>,
    /// Flat JSON object with dotted keys, applied after the preset.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// `key=value` override, applied last. Repeatable; goes before the
    /// subcommand.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One run: trajectory, metadata and plot panels.
    Simulate,
    /// Refine N at fixed M.
    ConvergeSpace {
        #[arg(long, value_delimiter = ',')]
        ladder: Option<Vec<usize>>,
        /// Held number of time steps.
        #[arg(long)]
        fixed: Option<usize>,
    },
    /// Refine M at fixed N, for each theta.
    ConvergeTime {
        #[arg(long, value_delimiter = ',')]
        ladder: Option<Vec<usize>>,
        /// Held number of intervals.
        #[arg(long)]
        fixed: Option<usize>,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1")]
        thetas: Vec<f64>,
    },
    /// Self-convergence of the boundary controls.
    ConvergeController {
        #[arg(long, value_enum, default_value = "space")]
        direction: Direction,
        #[arg(long, value_delimiter = ',')]
        ladder: Option<Vec<usize>>,
        #[arg(long)]
        fixed: Option<usize>,
    },
    /// Cartesian product of parameter lists, one run per point.
    Sweep {
        #[arg(long, value_delimiter = ',')]
        theta: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        nu: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        c0: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        c1: Vec<f64>,
        /// Numbers of time steps; the step is T / M.
        #[arg(long, value_delimiter = ',')]
        steps: Vec<usize>,
    },
    /// Runs at multiples of the smallest admissible step (theta < 1/2).
    StabilityProbe {
        #[arg(long, value_delimiter = ',', default_value = "0.5,10")]
        multipliers: Vec<f64>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = RunConfig::load(cli.preset, cli.config.as_deref(), &cli.sets)?;
    match cli.command {
        Command::Simulate => {
            let s = commands::cmd_simulate(&cfg)?;
            println!(
                "simulate: {} levels, final l2 {}, verdict {}",
                s.levels,
                s.final_l2.map(|v| format!("{v:.6e}")).unwrap_or_default(),
                s.verdict
            );
        }
        Command::ConvergeSpace { ladder, fixed } => {
            report(commands::converge_space(&cfg, ladder, fixed)?);
        }
        Command::ConvergeTime { ladder, fixed, thetas } => {
            report(commands::converge_time(&cfg, ladder, fixed, &thetas)?);
        }
        Command::ConvergeController {
            direction,
            ladder,
            fixed,
        } => {
            report(commands::converge_controller(&cfg, direction, ladder, fixed)?);
        }
        Command::Sweep {
            theta,
            nu,
            c0,
            c1,
            steps,
        } => {
            let s = commands::sweep(
                &cfg,
                &SweepAxes {
                    theta,
                    nu,
                    c0,
                    c1,
                    steps,
                },
            )?;
            println!("sweep: {} points written to {}", s.len(), cfg.directory.display());
        }
        Command::StabilityProbe { multipliers } => {
            for r in commands::stability_probe(&cfg, &multipliers)? {
                println!(
                    "probe: x{} M={} k={:.4e} predicted_stable={} -> {}",
                    r.multiplier, r.m, r.k, r.predicted_stable, r.outcome
                );
            }
        }
    }
    Ok(())
}

fn report(o: commands::ConvergeOutcome) {
    let verdict = match o.compared {
        Some(true) => "reference comparison passed",
        Some(false) => "reference comparison failed",
        None => "no reference comparison",
    };
    println!("{verdict}; wrote {} files", o.files.len());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("burgers: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
