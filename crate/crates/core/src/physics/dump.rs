//! CSV trajectory dumps: one row per mass per recorded step, and a parallel
//! file of per-voxel stiffness snapshots.

use std::io::{self, Write};

use super::{MassSpringSystem, SimState};

pub const POSITION_HEADER: &str = "t,mass_index,x,y,vx,vy";
pub const STIFFNESS_HEADER: &str = "t,voxel_i,voxel_j,factor";

pub fn write_position_rows<W: Write>(out: &mut W, state: &SimState) -> io::Result<()> {
    for (i, (p, v)) in state.positions.iter().zip(&state.velocities).enumerate() {
        writeln!(out, "{},{},{},{},{},{}", state.t, i, p[0], p[1], v[0], v[1])?;
    }
    Ok(())
}

/// Writes the factors the physics currently applies, keyed by voxel grid
/// coordinates.
pub fn write_stiffness_rows<W: Write>(out: &mut W, t: f64, system: &MassSpringSystem) -> io::Result<()> {
    for (vi, v) in system.voxels.iter().enumerate() {
        writeln!(out, "{},{},{},{}", t, v.x, v.y, system.applied_factor(vi))?;
    }
    Ok(())
}
