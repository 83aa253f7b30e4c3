use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::plot::{render_svg, Series};
use super::{read_file, write_file, ExperimentError};
use crate::codesign::{run_codesign, EvolutionConfig, Paradigm};
use crate::control::Checkpoint;
use crate::grid::serialize_design;

pub const REPORT_FORMAT: u32 = 1;
pub const CURVE_HEADER: &str = "generation,seed,best_fitness,mean_fitness";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedReport {
    pub seed: u64,
    /// Best fitness of each generation.
    pub best_fitness: Vec<f64>,
    pub mean_fitness: Vec<f64>,
    pub best_id: String,
    pub best_overall: f64,
    /// Paths relative to the output directory.
    pub best_design: String,
    pub best_controller: String,
    /// Wall-clock seconds per phase.
    pub timings: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub format: u32,
    pub task: String,
    pub paradigm: Paradigm,
    pub generations: usize,
    pub seeds: Vec<SeedReport>,
    pub wall_seconds: f64,
    /// Fully resolved config, defaults included.
    pub config: ExperimentConfig,
}

impl RunReport {
    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = read_file(path)?;
        let r: Self = serde_json::from_str(&text).map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))?;
        if r.format != REPORT_FORMAT {
            return Err(ExperimentError::Config(format!("{}: unsupported report format {}", path.display(), r.format)));
        }
        Ok(r)
    }

    /// Series name used in comparison plots.
    pub fn label(&self) -> String {
        format!("{} {}", self.paradigm, self.task)
    }
}

pub fn curves_csv(seeds: &[SeedReport]) -> String {
    let mut s = String::from(CURVE_HEADER);
    s.push('\n');
    for r in seeds {
        for (g, (best, mean)) in r.best_fitness.iter().zip(&r.mean_fitness).enumerate() {
            let _ = writeln!(s, "{g},{},{best},{mean}", r.seed);
        }
    }
    s
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

pub fn run(config_path: &Path) -> Result<RunReport, ExperimentError> {
    run_config(&ExperimentConfig::load(config_path)?)
}

/// Runs the configured paradigm once per seed and writes every artifact
/// under `config.output_dir`.
pub fn run_config(config: &ExperimentConfig) -> Result<RunReport, ExperimentError> {
    config.validate()?;
    let started = Instant::now();
    let spec = config.task_spec()?;
    let out = &config.output_dir;
    let mut seeds = Vec::with_capacity(config.seeds.len());

    for &seed in &config.seeds {
        let evo = EvolutionConfig {
            seed,
            ..config.codesign.clone()
        };
        log::info!("{} on {} with seed {seed}", evo.paradigm, spec.task);
        let outcome = run_codesign(&evo, &spec)?;
        let dir_name = format!("seed_{seed}");
        let dir = out.join(&dir_name);
        for log in &outcome.logs {
            write_file(&dir.join(format!("gen_{:04}.json", log.generation)), to_json(log))?;
        }
        for (id, d) in &outcome.designs {
            write_file(&dir.join(crate::codesign::design_ref(id)), serialize_design(d))?;
        }
        write_file(&dir.join("best_design.json"), serialize_design(&outcome.best.design))?;
        let controller = outcome.best.controller.as_ref().expect("best individual is trained");
        let ck = Checkpoint::new(controller, evo.paradigm.env_mode(), &evo.env_options());
        write_file(&dir.join("best_controller.json"), ck.to_json())?;

        seeds.push(SeedReport {
            seed,
            best_fitness: outcome.logs.iter().map(|l| l.best_fitness()).collect(),
            mean_fitness: outcome.logs.iter().map(|l| l.mean_fitness()).collect(),
            best_id: outcome.best.design.id.clone(),
            best_overall: outcome.best.fitness.expect("best individual is evaluated"),
            best_design: format!("{dir_name}/best_design.json"),
            best_controller: format!("{dir_name}/best_controller.json"),
            timings: outcome.timings.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        });
    }

    write_file(&out.join("curves.csv"), curves_csv(&seeds))?;
    let series: Vec<Series> = seeds
        .iter()
        .map(|r| Series {
            label: format!("seed {}", r.seed),
            x: (0..r.best_fitness.len()).map(|g| g as f64).collect(),
            y: r.best_fitness.clone(),
            band: None,
        })
        .collect();
    let title = format!("{} on {}", config.codesign.paradigm, spec.task);
    write_file(&out.join("fitness.svg"), render_svg(&title, "generation", "best fitness", &series))?;

    let report = RunReport {
        format: REPORT_FORMAT,
        task: spec.task.name().to_string(),
        paradigm: config.codesign.paradigm,
        generations: config.codesign.generations,
        seeds,
        wall_seconds: started.elapsed().as_secs_f64(),
        config: config.clone(),
    };
    write_file(&out.join("report.json"), to_json(&report))?;
    Ok(report)
}
