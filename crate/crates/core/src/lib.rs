//! Voxel soft-robot simulation with continuous material stiffness, and the
//! reactive / invariant morphology-material-control co-design loops built on
//! top of it.
//!
//! Module map:
//! - [`grid`]: morphology + stiffness field designs and their file format
//! - [`physics`]: mass-spring lattice, stiffness scaling, integrator
//! - [`env`]: episodic task environments
//! - [`control`]: policy network, rollouts, advantage estimation, PPO
//! - [`codesign`]: outer-loop evolution, material local search, ablations
//! - [`experiment`]: config-driven runs, reports, plots, replays

pub mod codesign;
pub mod control;
pub mod env;
pub mod experiment;
pub mod grid;
pub mod physics;
pub mod rng;
