use super::{Ground, MassSpringSystem, PhysicsError, SimParams};

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub positions: Vec<[f64; 2]>,
    pub velocities: Vec<[f64; 2]>,
    pub t: f64,
    pub step_count: u64,
    pub contact_flags: Vec<bool>,
}

impl SimState {
    /// Rest lattice translated by `offset`, at rest.
    pub fn at_rest(system: &MassSpringSystem, offset: [f64; 2]) -> Self {
        let n = system.n_masses();
        Self {
            positions: system
                .masses
                .iter()
                .map(|m| [m.rest_position[0] + offset[0], m.rest_position[1] + offset[1]])
                .collect(),
            velocities: vec![[0.0; 2]; n],
            t: 0.0,
            step_count: 0,
            contact_flags: vec![false; n],
        }
    }

    pub fn max_speed(&self) -> f64 {
        self.velocities
            .iter()
            .map(|v| v[0].abs().max(v[1].abs()))
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.positions
            .iter()
            .chain(&self.velocities)
            .all(|p| p[0].is_finite() && p[1].is_finite())
    }
}

/// Advances one physics step with semi-implicit Euler: forces at the current
/// state update velocities, and positions move with the new velocities.
///
/// Forces: spring elastic + axial damping, gravity, penalty floor/ceiling
/// contact with normal damping, and friction capped at `μ·N` that opposes
/// the tangential motion the other forces would produce.
pub fn step(
    system: &mut MassSpringSystem,
    state: &mut SimState,
    actuation: &[f64],
    params: &SimParams,
    ground: &Ground,
) -> Result<(), PhysicsError> {
    system.set_actuation(actuation)?;
    let dt = params.dt;
    let mut forces = std::mem::take(&mut system.forces);
    forces.clear();
    forces.extend(system.masses.iter().map(|m| [0.0, -m.mass * params.gravity]));

    for i in 0..system.springs.len() {
        let f = system.spring_force(i, &state.positions, &state.velocities, params.spring_damping);
        let s = &system.springs[i];
        forces[s.a][0] += f[0];
        forces[s.a][1] += f[1];
        forces[s.b][0] -= f[0];
        forces[s.b][1] -= f[1];
    }

    let contact_on = params.contact_stiffness > 0.0;
    for (i, m) in system.masses.iter().enumerate() {
        state.contact_flags[i] = false;
        if m.fixed || !contact_on {
            continue;
        }
        let [x, y] = state.positions[i];
        let [vx, vy] = state.velocities[i];
        let floor_pen = ground.floor.height_at(x) - y;
        let mut normal = 0.0;
        if floor_pen > 0.0 {
            let k = params.contact_stiffness * ground.stiffness_scale(x);
            let n = (k * floor_pen - params.contact_damping * vy).max(0.0);
            forces[i][1] += n;
            normal += n;
        }
        if let Some(ceiling) = &ground.ceiling {
            let pen = y - ceiling.height_at(x);
            if pen > 0.0 {
                let n = (params.contact_stiffness * pen + params.contact_damping * vy).max(0.0);
                forces[i][1] -= n;
                normal += n;
            }
        }
        if normal > 0.0 {
            state.contact_flags[i] = true;
            let cap = params.friction_coefficient * normal;
            let stop = -(m.mass * vx / dt + forces[i][0]);
            forces[i][0] += stop.clamp(-cap, cap);
        }
    }

    for (i, m) in system.masses.iter().enumerate() {
        if m.fixed {
            state.velocities[i] = [0.0, 0.0];
            continue;
        }
        let inv = dt / m.mass;
        let v = &mut state.velocities[i];
        v[0] += forces[i][0] * inv;
        v[1] += forces[i][1] * inv;
        let p = &mut state.positions[i];
        p[0] += dt * v[0];
        p[1] += dt * v[1];
    }
    system.forces = forces;

    state.t += dt;
    state.step_count += 1;
    if let Some(mass) = state
        .positions
        .iter()
        .zip(&state.velocities)
        .position(|(p, v)| !(p[0].is_finite() && p[1].is_finite() && v[0].is_finite() && v[1].is_finite()))
    {
        return Err(PhysicsError::SimulationDiverged {
            step: state.step_count,
            mass,
        });
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SettleOutcome {
    pub state: SimState,
    pub steps: usize,
    /// Number of velocity checks performed (one per step).
    pub checks: usize,
    pub converged: bool,
}

/// Steps with the current actuation until every velocity component is below
/// `velocity_tolerance`, or `max_steps` is reached.
pub fn settle(
    system: &mut MassSpringSystem,
    mut state: SimState,
    params: &SimParams,
    ground: &Ground,
    max_steps: usize,
    velocity_tolerance: f64,
) -> Result<SettleOutcome, PhysicsError> {
    if params.spring_damping <= 0.0 {
        return Err(PhysicsError::Undamped(params.spring_damping));
    }
    let actuation = system.actuation().to_vec();
    let mut steps = 0;
    while steps < max_steps {
        step(system, &mut state, &actuation, params, ground)?;
        steps += 1;
        if state.max_speed() < velocity_tolerance {
            return Ok(SettleOutcome {
                state,
                steps,
                checks: steps,
                converged: true,
            });
        }
    }
    Ok(SettleOutcome {
        state,
        steps,
        checks: steps,
        converged: false,
    })
}
