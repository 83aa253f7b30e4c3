use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::time::Instant;

use rand::Rng as _;
use rayon::prelude::*;

use super::inner::{material_local_search, train_inner, InnerContext};
use super::operators::{mutate_material, mutate_morphology, random_material, random_morphology};
use super::{design_ref, CodesignError, EvolutionConfig, GenerationLog, Individual, LogEntry, Paradigm};
use crate::env::TaskSpec;
use crate::grid::{RobotDesign, StiffnessField};
use crate::rng::{self, stream};

#[derive(Debug, Clone)]
pub struct CodesignOutcome {
    /// All-time best individual.
    pub best: Individual,
    pub logs: Vec<GenerationLog>,
    /// Every design that entered the population, by id.
    pub designs: BTreeMap<String, RobotDesign>,
    /// Wall-clock seconds per phase: `train`, `refine`, `vary`.
    pub timings: BTreeMap<&'static str, f64>,
}

pub fn run_reactive_codesign(config: &EvolutionConfig, task: &TaskSpec) -> Result<CodesignOutcome, CodesignError> {
    require(config, &[Paradigm::Reactive])?;
    evolve(config, task)
}

pub fn run_invariant_codesign(config: &EvolutionConfig, task: &TaskSpec) -> Result<CodesignOutcome, CodesignError> {
    require(config, &[Paradigm::Invariant])?;
    evolve(config, task)
}

pub fn run_ablation(config: &EvolutionConfig, task: &TaskSpec) -> Result<CodesignOutcome, CodesignError> {
    require(config, &[Paradigm::FixedMaterial, Paradigm::PrescribedMaterial])?;
    evolve(config, task)
}

/// Dispatches on `config.paradigm`.
pub fn run_codesign(config: &EvolutionConfig, task: &TaskSpec) -> Result<CodesignOutcome, CodesignError> {
    evolve(config, task)
}

fn require(config: &EvolutionConfig, allowed: &[Paradigm]) -> Result<(), CodesignError> {
    if allowed.contains(&config.paradigm) {
        Ok(())
    } else {
        Err(CodesignError::Config(format!("paradigm {} is not handled here", config.paradigm)))
    }
}

fn context(config: &EvolutionConfig, task: &TaskSpec) -> InnerContext {
    InnerContext {
        task: task.clone(),
        mode: config.paradigm.env_mode(),
        options: config.env_options(),
        sim: config.sim.clone(),
        train: config.train.clone(),
        eval_episodes: config.eval_episodes,
        eval_seed: rng::derive_seed(config.seed, &[stream::EVALUATE]),
    }
}

fn id_of(serial: u64) -> String {
    format!("{serial:06}")
}

/// Higher fitness first; equal fitness goes to the lower id.
fn rank(a: &Individual, b: &Individual) -> Ordering {
    let (fa, fb) = (a.fitness.unwrap_or(f64::NEG_INFINITY), b.fitness.unwrap_or(f64::NEG_INFINITY));
    fb.partial_cmp(&fa).unwrap_or(Ordering::Equal).then_with(|| a.serial.cmp(&b.serial))
}

fn initial_population(config: &EvolutionConfig) -> Vec<Individual> {
    (0..config.population as u64)
        .map(|serial| {
            let (w, h) = (config.grid_width, config.grid_height);
            let m = random_morphology(w, h, config.occupancy, &mut rng::derived(config.seed, &[stream::INIT_MORPHOLOGY, serial]));
            let stiffness = if config.paradigm.evolves_material() && config.random_initial_stiffness {
                random_material(w, h, &mut rng::derived(config.seed, &[stream::INIT_STIFFNESS, serial]))
            } else {
                StiffnessField::uniform(w, h, 1.0)
            };
            Individual {
                design: RobotDesign {
                    morphology: m,
                    stiffness,
                    id: id_of(serial),
                    parent_id: None,
                },
                controller: None,
                fitness: None,
                generation_born: 0,
                diverged: false,
                serial,
            }
        })
        .collect()
}

fn evolve(config: &EvolutionConfig, task: &TaskSpec) -> Result<CodesignOutcome, CodesignError> {
    config.validate()?;
    let ctx = context(config, task);
    let paradigm = config.paradigm;
    let k = config.survivor_count();
    let mut population = initial_population(config);
    let mut next_serial = config.population as u64;
    let mut designs = BTreeMap::new();
    let mut logs = Vec::with_capacity(config.generations);
    let mut best: Option<Individual> = None;
    let mut timings: BTreeMap<&'static str, f64> = [("train", 0.0), ("refine", 0.0), ("vary", 0.0)].into();
    let mut clock = |phase: &'static str, since: Instant| *timings.get_mut(phase).expect("known phase") += since.elapsed().as_secs_f64();

    for g in 0..config.generations {
        let started = Instant::now();
        // train everyone without a controller
        population = population
            .into_par_iter()
            .map(|mut ind| -> Result<Individual, CodesignError> {
                if ind.controller.is_none() {
                    let seed = rng::derive_seed(config.seed, &[stream::TRAIN, ind.serial]);
                    let out = train_inner(&ind.design, &ctx, config.train_updates, seed, None)?;
                    ind.fitness = Some(out.evaluation.fitness);
                    ind.diverged = out.evaluation.diverged;
                    ind.controller = Some(out.controller);
                }
                Ok(ind)
            })
            .collect::<Result<_, _>>()?;
        clock("train", started);

        population.sort_by(|a, b| a.serial.cmp(&b.serial));
        let log = generation_log(g, &population);
        log::info!(
            "{paradigm} generation {g}: best {:.4} ({}), mean {:.4}",
            log.best_fitness(),
            log.best_id,
            log.mean_fitness()
        );
        logs.push(log);
        for ind in &population {
            designs.entry(ind.design.id.clone()).or_insert_with(|| ind.design.clone());
            let better = best.as_ref().is_none_or(|b| rank(ind, b) == Ordering::Less);
            if better {
                best = Some(ind.clone());
            }
        }
        if population.iter().all(|i| i.diverged) {
            return Err(CodesignError::AllDiverged { generation: g });
        }
        if g + 1 == config.generations {
            break;
        }

        let mut ranked = population;
        ranked.sort_by(rank);
        ranked.truncate(k);
        let started = Instant::now();
        let mut survivors = if paradigm.refines_survivors() {
            refine_survivors(config, &ctx, ranked, g)?
        } else {
            ranked
        };
        clock("refine", started);
        let started = Instant::now();
        // survivors whose body changed take fresh ids, assigned in rank order
        for s in &mut survivors {
            if s.design.id.is_empty() {
                s.serial = next_serial;
                s.design.id = id_of(next_serial);
                next_serial += 1;
            }
        }

        let mut pick = rng::derived(config.seed, &[stream::PARENT_PICK, g as u64]);
        let mut children = Vec::with_capacity(config.population - k);
        for _ in k..config.population {
            let parent = &survivors[pick.random_range(0..survivors.len())];
            let serial = next_serial;
            next_serial += 1;
            let (m, fell_back) = mutate_morphology(
                &parent.design.morphology,
                config.mutation_rate,
                &mut rng::derived(config.seed, &[stream::MUTATE_MORPHOLOGY, serial]),
            );
            if fell_back {
                log::debug!("mutation of {} exhausted its attempts; child keeps the parent body", parent.design.id);
            }
            let stiffness = if paradigm.evolves_material() {
                mutate_material(
                    &parent.design.stiffness,
                    config.material_sigma,
                    &mut rng::derived(config.seed, &[stream::MUTATE_MATERIAL, serial]),
                )
            } else {
                parent.design.stiffness.clone()
            };
            children.push(Individual {
                design: RobotDesign {
                    morphology: m,
                    stiffness,
                    id: id_of(serial),
                    parent_id: Some(parent.design.id.clone()),
                },
                controller: None,
                fitness: None,
                generation_born: g + 1,
                diverged: false,
                serial,
            });
        }
        population = survivors;
        population.extend(children);
        clock("vary", started);
    }

    Ok(CodesignOutcome {
        best: best.expect("at least one generation ran"),
        logs,
        designs,
        timings,
    })
}

/// Material local search (when the field evolves), then fine-tuning of the
/// inherited controller on the updated body. A survivor whose field changed
/// comes back with an empty id so the caller can number it.
fn refine_survivors(config: &EvolutionConfig, ctx: &InnerContext, survivors: Vec<Individual>, g: usize) -> Result<Vec<Individual>, CodesignError> {
    survivors
        .into_par_iter()
        .map(|mut s| -> Result<Individual, CodesignError> {
            let controller = s.controller.take().expect("survivors are trained");
            if config.paradigm.evolves_material() {
                let seed = rng::derive_seed(config.seed, &[stream::LOCAL_SEARCH, s.serial, g as u64]);
                let ls = material_local_search(&s.design, &controller, ctx, config.local_search_iters, config.material_sigma, seed)?;
                if ls.stiffness != s.design.stiffness {
                    s.design.parent_id = Some(s.design.id.clone());
                    s.design.id = String::new();
                    s.design.stiffness = ls.stiffness;
                    s.generation_born = g + 1;
                }
                s.fitness = Some(ls.evaluation.fitness);
                s.diverged = ls.evaluation.diverged;
            }
            let seed = rng::derive_seed(config.seed, &[stream::FINE_TUNE, s.serial, g as u64]);
            let ft = train_inner(&s.design, ctx, config.fine_tune_updates, seed, Some(controller))?;
            s.fitness = Some(ft.evaluation.fitness);
            s.diverged = ft.evaluation.diverged;
            s.controller = Some(ft.controller);
            Ok(s)
        })
        .collect()
}

fn generation_log(g: usize, population: &[Individual]) -> GenerationLog {
    let best = population.iter().min_by(|a, b| rank(a, b)).expect("population is non-empty");
    GenerationLog {
        generation: g,
        individuals: population
            .iter()
            .map(|i| LogEntry {
                id: i.design.id.clone(),
                parent_id: i.design.parent_id.clone(),
                fitness: i.fitness.expect("evaluated before logging"),
                design: design_ref(&i.design.id),
                generation_born: i.generation_born,
                diverged: i.diverged,
            })
            .collect(),
        best_id: best.design.id.clone(),
    }
}
