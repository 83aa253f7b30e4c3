use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use voxelsoft::env::TaskId;
use voxelsoft::experiment::{self, ExperimentError, ReplayRequest};
use voxelsoft::grid::{deserialize_design, GridError};
use voxelsoft::physics::SimParams;

#[derive(Parser)]
#[command(name = "voxelsoft", version, about = "Voxel soft-robot co-design experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a co-design experiment described by a JSON config.
    Run { config: PathBuf },
    /// Overlay the fitness curves of several run reports.
    Compare {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Roll a checkpoint out on a design and dump trajectory CSVs.
    Replay {
        design: PathBuf,
        checkpoint: PathBuf,
        #[arg(long)]
        task: String,
        /// Control ticks to simulate.
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value = "replay")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check a design file against the validity rules.
    Validate { design: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), ExperimentError> {
    if let Some(n) = experiment::configure_threads()? {
        log::info!("worker threads capped at {n}");
    }
    match cmd {
        Command::Run { config } => {
            let report = experiment::run(&config)?;
            for s in &report.seeds {
                println!("seed {}: best fitness {:.6} ({})", s.seed, s.best_overall, s.best_id);
            }
            println!("wrote {}", report.config.output_dir.display());
        }
        Command::Compare { reports, out } => {
            let rows = experiment::compare(&reports, &out)?;
            println!("compared {} reports over {} rows; wrote {}", reports.len(), rows.len(), out.display());
        }
        Command::Replay {
            design,
            checkpoint,
            task,
            steps,
            out,
            seed,
        } => {
            let task: TaskId = task.parse().map_err(|e: voxelsoft::env::UnknownTask| ExperimentError::Config(e.to_string()))?;
            let r = experiment::replay(&ReplayRequest {
                design,
                checkpoint,
                task,
                steps,
                out_dir: out,
                sim: SimParams::default(),
                seed,
            })?;
            println!("{} ticks, return {:.6}", r.ticks, r.total_reward);
            println!("wrote {}, {}, {}", r.positions.display(), r.stiffness.display(), r.actuation.display());
        }
        Command::Validate { design } => {
            let text = std::fs::read_to_string(&design).map_err(|e| ExperimentError::Io {
                path: design.clone(),
                source: e,
            })?;
            match deserialize_design(&text) {
                Ok(d) => println!(
                    "{}: valid {}x{} design, {} voxels, {} actuators",
                    design.display(),
                    d.width(),
                    d.height(),
                    d.morphology.occupied_count(),
                    d.morphology.actuator_count()
                ),
                Err(e @ GridError::Validation(_)) => return Err(ExperimentError::InvalidDesign(e)),
                Err(e) => return Err(ExperimentError::Config(format!("{}: {e}", design.display()))),
            }
        }
    }
    Ok(())
}
