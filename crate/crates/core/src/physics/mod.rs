//! Cross-braced mass-spring lattice built from a [`RobotDesign`], with
//! continuous stiffness scaling and a semi-implicit Euler integrator.
//!
//! [`RobotDesign`]: crate::grid::RobotDesign

mod assembly;
mod dump;
mod dynamics;
mod ground;

pub use assembly::{effective_stiffness, MassSpringSystem, PointMass, Spring, SpringAxis, SpringKind, VoxelEntry};
pub use dump::{write_position_rows, write_stiffness_rows, POSITION_HEADER, STIFFNESS_HEADER};
pub use dynamics::{settle, step, SettleOutcome, SimState};
pub use ground::{Ground, HeightField};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::GridError;

/// Lower bound of the actuation ratio range (fraction of nominal length).
pub const ACTUATION_MIN: f64 = 0.6;
/// Upper bound of the actuation ratio range.
pub const ACTUATION_MAX: f64 = 1.6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhysicsError {
    #[error("invalid design: {0}")]
    InvalidDesign(#[from] GridError),
    #[error("expected {expected} {what}, got {actual}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("simulation diverged at step {step}: mass {mass} has a non-finite coordinate")]
    SimulationDiverged { step: u64, mass: usize },
    #[error("settle requires spring_damping > 0 (got {0})")]
    Undamped(f64),
    #[error("invalid simulation parameters: {0}")]
    InvalidParams(String),
}

/// Engine constants. Defaults give stable dynamics at `dt = 1e-3 s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimParams {
    /// Physics step, seconds.
    pub dt: f64,
    /// Gravitational acceleration magnitude, m/s²; acts toward -y.
    pub gravity: f64,
    /// Axial damping coefficient of every spring, N·s/m.
    pub spring_damping: f64,
    /// Height of the default flat ground, m.
    pub ground_height: f64,
    /// Penalty stiffness of ground contact, N/m. Zero disables contact.
    pub contact_stiffness: f64,
    /// Normal damping of ground contact, N·s/m.
    pub contact_damping: f64,
    pub friction_coefficient: f64,
    /// Mass of every lattice corner, kg.
    pub mass_per_corner: f64,
    /// Voxel side length, m.
    pub voxel_size: f64,
    /// Baseline constant of soft and actuator voxel springs, N/m.
    pub soft_k_base: f64,
    /// Rigid `k_base` as a multiple of `soft_k_base`.
    pub rigid_k_ratio: f64,
    /// When false, actuator voxels ignore their stiffness factor (scale 1.0).
    pub scale_actuator_stiffness: bool,
    /// Physics steps per control tick.
    pub control_decimation: usize,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            gravity: 9.81,
            spring_damping: 2.0,
            ground_height: 0.0,
            contact_stiffness: 1e5,
            contact_damping: 100.0,
            friction_coefficient: 0.6,
            mass_per_corner: 0.25,
            voxel_size: 0.1,
            soft_k_base: 1_000.0,
            rigid_k_ratio: 5.0,
            scale_actuator_stiffness: true,
            control_decimation: 10,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<(), PhysicsError> {
        let bad = |m: &str| Err(PhysicsError::InvalidParams(m.to_string()));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive");
        }
        if self.contact_stiffness < 0.0 || !self.contact_stiffness.is_finite() {
            return bad("contact_stiffness must be >= 0");
        }
        if self.contact_damping < 0.0 || self.spring_damping < 0.0 {
            return bad("damping coefficients must be >= 0");
        }
        if self.mass_per_corner <= 0.0 || self.voxel_size <= 0.0 || self.soft_k_base <= 0.0 || self.rigid_k_ratio <= 0.0 {
            return bad("mass, voxel size and spring constants must be positive");
        }
        if self.control_decimation == 0 {
            return bad("control_decimation must be >= 1");
        }
        Ok(())
    }

    /// Parameters with every external influence removed: no gravity,
    /// contact or damping.
    pub fn isolated() -> Self {
        Self {
            gravity: 0.0,
            spring_damping: 0.0,
            contact_stiffness: 0.0,
            contact_damping: 0.0,
            friction_coefficient: 0.0,
            ..Self::default()
        }
    }
}

#[inline]
pub fn clamp_actuation(r: f64) -> f64 {
    ACTUATION_MAX.min(ACTUATION_MIN.max(r))
}
