use std::collections::HashMap;

use crate::grid::{clamp_factor, ensure_valid, RobotDesign, VoxelKind};

use super::{clamp_actuation, PhysicsError, SimParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpringKind {
    Edge,
    Diagonal,
}

/// Geometric role of a spring inside its voxel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpringAxis {
    /// Edge parallel to x (bottom/top face).
    X,
    /// Edge parallel to y (left/right face).
    Y,
    Diagonal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointMass {
    /// Lattice position before any placement offset, m.
    pub rest_position: [f64; 2],
    pub mass: f64,
    pub fixed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spring {
    pub a: usize,
    pub b: usize,
    pub kind: SpringKind,
    pub axis: SpringAxis,
    pub nominal_length: f64,
    /// Current rest length after actuation.
    pub rest_length: f64,
    pub k_base: f64,
    pub k_effective: f64,
    /// Indices into the occupied-voxel list. Diagonals and boundary edges
    /// have a single owner.
    pub owners: [Option<usize>; 2],
}

impl Spring {
    pub fn owner_count(&self) -> usize {
        self.owners.iter().flatten().count()
    }
}

/// Per occupied voxel bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelEntry {
    pub x: usize,
    pub y: usize,
    pub kind: VoxelKind,
    /// Corner masses: bottom-left, bottom-right, top-right, top-left.
    pub corners: [usize; 4],
    /// Edge springs (bottom, right, top, left) followed by the two diagonals.
    pub springs: [usize; 6],
    /// Position in the actuator list when the voxel is an actuator.
    pub actuator: Option<usize>,
}

/// Continuous-material scaling rule: diagonals scale with their own
/// voxel; edges shared by two voxels use the mean factor; boundary edges
/// fall back to the single owner's factor.
#[inline]
pub fn effective_stiffness(kind: SpringKind, k_base: f64, s_local: f64, s_neighbor: Option<f64>) -> f64 {
    match (kind, s_neighbor) {
        (SpringKind::Edge, Some(n)) => 0.5 * (s_local + n) * k_base,
        _ => s_local * k_base,
    }
}

#[derive(Debug, Clone)]
pub struct MassSpringSystem {
    pub masses: Vec<PointMass>,
    pub springs: Vec<Spring>,
    /// Occupied voxels in row-major order.
    pub voxels: Vec<VoxelEntry>,
    /// Occupied-voxel indices of actuators, row-major.
    pub actuators: Vec<usize>,
    /// Directed boundary segments, counter-clockwise around the body.
    pub boundary: Vec<(usize, usize)>,
    voxel_lookup: HashMap<(usize, usize), usize>,
    /// Current stiffness factor per occupied voxel.
    factors: Vec<f64>,
    /// Current actuation ratio per actuator.
    ratios: Vec<f64>,
    scale_actuators: bool,
    pub(super) forces: Vec<[f64; 2]>,
}

impl MassSpringSystem {
    pub fn assemble(design: &RobotDesign, params: &SimParams) -> Result<Self, PhysicsError> {
        ensure_valid(design)?;
        params.validate()?;
        let m = &design.morphology;
        let (w, h) = (m.width(), m.height());
        let side = params.voxel_size;

        let mut corner_ids: HashMap<(usize, usize), usize> = HashMap::new();
        // lattice corners in row-major order so mass numbering is stable
        let mut used = vec![false; (w + 1) * (h + 1)];
        for (x, y) in m.occupied() {
            for (cx, cy) in [(x, y), (x + 1, y), (x + 1, y + 1), (x, y + 1)] {
                used[cy * (w + 1) + cx] = true;
            }
        }
        let mut masses = Vec::new();
        for cy in 0..=h {
            for cx in 0..=w {
                if used[cy * (w + 1) + cx] {
                    corner_ids.insert((cx, cy), masses.len());
                    masses.push(PointMass {
                        rest_position: [cx as f64 * side, cy as f64 * side],
                        mass: params.mass_per_corner,
                        fixed: false,
                    });
                }
            }
        }

        let mut voxel_lookup = HashMap::new();
        let occupied: Vec<(usize, usize)> = m.occupied().collect();
        for (i, &(x, y)) in occupied.iter().enumerate() {
            voxel_lookup.insert((x, y), i);
        }

        let k_for = |kind: VoxelKind| match kind {
            VoxelKind::Rigid => params.soft_k_base * params.rigid_k_ratio,
            _ => params.soft_k_base,
        };

        let mut springs: Vec<Spring> = Vec::new();
        let mut edge_ids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut voxels = Vec::with_capacity(occupied.len());
        let mut actuators = Vec::new();
        for (vi, &(x, y)) in occupied.iter().enumerate() {
            let kind = m.kind(x, y).expect("validated");
            let c = [
                corner_ids[&(x, y)],
                corner_ids[&(x + 1, y)],
                corner_ids[&(x + 1, y + 1)],
                corner_ids[&(x, y + 1)],
            ];
            let k = k_for(kind);
            let mut ids = [0usize; 6];
            let faces = [
                (c[0], c[1], SpringAxis::X),
                (c[1], c[2], SpringAxis::Y),
                (c[3], c[2], SpringAxis::X),
                (c[0], c[3], SpringAxis::Y),
            ];
            for (f, &(a, b, axis)) in faces.iter().enumerate() {
                let key = (a.min(b), a.max(b));
                ids[f] = match edge_ids.get(&key) {
                    Some(&si) => {
                        let s = &mut springs[si];
                        s.owners[1] = Some(vi);
                        // mixed-type faces use the mean baseline constant
                        s.k_base = 0.5 * (s.k_base + k);
                        si
                    }
                    None => {
                        let si = springs.len();
                        springs.push(Spring {
                            a,
                            b,
                            kind: SpringKind::Edge,
                            axis,
                            nominal_length: side,
                            rest_length: side,
                            k_base: k,
                            k_effective: k,
                            owners: [Some(vi), None],
                        });
                        edge_ids.insert(key, si);
                        si
                    }
                };
            }
            let diag = side * std::f64::consts::SQRT_2;
            for (d, (a, b)) in [(c[0], c[2]), (c[1], c[3])].into_iter().enumerate() {
                ids[4 + d] = springs.len();
                springs.push(Spring {
                    a,
                    b,
                    kind: SpringKind::Diagonal,
                    axis: SpringAxis::Diagonal,
                    nominal_length: diag,
                    rest_length: diag,
                    k_base: k,
                    k_effective: k,
                    owners: [Some(vi), None],
                });
            }
            let actuator = kind.is_actuator().then(|| {
                actuators.push(vi);
                actuators.len() - 1
            });
            voxels.push(VoxelEntry {
                x,
                y,
                kind,
                corners: c,
                springs: ids,
                actuator,
            });
        }

        let mut boundary = Vec::new();
        for v in &voxels {
            let c = v.corners;
            let ccw = [(c[0], c[1]), (c[1], c[2]), (c[2], c[3]), (c[3], c[0])];
            for (f, seg) in ccw.into_iter().enumerate() {
                if springs[v.springs[f]].owner_count() == 1 {
                    boundary.push(seg);
                }
            }
        }

        let n_masses = masses.len();
        let mut system = Self {
            masses,
            springs,
            factors: design.occupied_stiffness(),
            ratios: vec![1.0; actuators.len()],
            voxels,
            actuators,
            boundary,
            voxel_lookup,
            scale_actuators: params.scale_actuator_stiffness,
            forces: vec![[0.0; 2]; n_masses],
        };
        system.refresh_stiffness();
        Ok(system)
    }

    /// Raw lattice without voxel bookkeeping, for hand-built mechanisms.
    /// Springs keep the `k_effective` they are given.
    pub fn from_parts(masses: Vec<PointMass>, springs: Vec<Spring>) -> Self {
        let n = masses.len();
        Self {
            masses,
            springs,
            voxels: Vec::new(),
            actuators: Vec::new(),
            boundary: Vec::new(),
            voxel_lookup: HashMap::new(),
            factors: Vec::new(),
            ratios: Vec::new(),
            scale_actuators: true,
            forces: vec![[0.0; 2]; n],
        }
    }

    pub fn n_masses(&self) -> usize {
        self.masses.len()
    }

    pub fn n_occupied(&self) -> usize {
        self.voxels.len()
    }

    pub fn n_actuators(&self) -> usize {
        self.actuators.len()
    }

    pub fn voxel_index(&self, x: usize, y: usize) -> Option<usize> {
        self.voxel_lookup.get(&(x, y)).copied()
    }

    /// Current stiffness factor per occupied voxel.
    pub fn stiffness_factors(&self) -> &[f64] {
        &self.factors
    }

    pub fn actuation(&self) -> &[f64] {
        &self.ratios
    }

    /// Factor that physics actually applies for a voxel.
    pub fn applied_factor(&self, voxel: usize) -> f64 {
        if !self.scale_actuators && self.voxels[voxel].kind.is_actuator() {
            1.0
        } else {
            self.factors[voxel]
        }
    }

    /// Replaces the per-voxel stiffness factors (clamped to `[0.5, 2]`) and
    /// recomputes every `k_effective`; `k_base` is left untouched.
    pub fn set_reactive_stiffness(&mut self, factors: &[f64]) -> Result<(), PhysicsError> {
        if factors.len() != self.factors.len() {
            return Err(PhysicsError::ShapeMismatch {
                what: "stiffness factors",
                expected: self.factors.len(),
                actual: factors.len(),
            });
        }
        for (dst, &src) in self.factors.iter_mut().zip(factors) {
            *dst = clamp_factor(src);
        }
        self.refresh_stiffness();
        Ok(())
    }

    fn refresh_stiffness(&mut self) {
        for i in 0..self.springs.len() {
            let s = &self.springs[i];
            let local = self.applied_factor(s.owners[0].expect("every spring has an owner"));
            let neighbor = s.owners[1].map(|o| self.applied_factor(o));
            let k = effective_stiffness(s.kind, s.k_base, local, neighbor);
            self.springs[i].k_effective = k;
        }
    }

    /// Sets actuator target ratios (clamped to `[0.6, 1.6]`) and updates the
    /// rest lengths of the affected springs.
    pub fn set_actuation(&mut self, ratios: &[f64]) -> Result<(), PhysicsError> {
        if ratios.len() != self.ratios.len() {
            return Err(PhysicsError::ShapeMismatch {
                what: "actuation ratios",
                expected: self.ratios.len(),
                actual: ratios.len(),
            });
        }
        let mut changed = false;
        for (dst, &src) in self.ratios.iter_mut().zip(ratios) {
            let r = clamp_actuation(src);
            if *dst != r {
                *dst = r;
                changed = true;
            }
        }
        if changed {
            self.refresh_rest_lengths();
        }
        Ok(())
    }

    /// Stretch of a voxel's box along x and y under the current actuation.
    fn voxel_stretch(&self, voxel: usize) -> (f64, f64) {
        let v = &self.voxels[voxel];
        match (v.kind, v.actuator) {
            (VoxelKind::HorizontalActuator, Some(a)) => (self.ratios[a], 1.0),
            (VoxelKind::VerticalActuator, Some(a)) => (1.0, self.ratios[a]),
            _ => (1.0, 1.0),
        }
    }

    fn refresh_rest_lengths(&mut self) {
        for &vi in &self.actuators {
            for si in self.voxels[vi].springs {
                let s = &self.springs[si];
                let scale = match s.axis {
                    SpringAxis::Diagonal => {
                        let (sx, sy) = self.voxel_stretch(vi);
                        (0.5 * (sx * sx + sy * sy)).sqrt()
                    }
                    axis => {
                        let along = |o: usize| {
                            let (sx, sy) = self.voxel_stretch(o);
                            if axis == SpringAxis::X { sx } else { sy }
                        };
                        let owners: Vec<usize> = s.owners.iter().flatten().copied().collect();
                        owners.iter().map(|&o| along(o)).sum::<f64>() / owners.len() as f64
                    }
                };
                let rest = s.nominal_length * scale;
                self.springs[si].rest_length = rest;
            }
        }
    }

    pub fn fix_mass(&mut self, index: usize) {
        self.masses[index].fixed = true;
    }

    /// Shoelace area enclosed by the boundary segments.
    pub fn area(&self, positions: &[[f64; 2]]) -> f64 {
        0.5 * self
            .boundary
            .iter()
            .map(|&(a, b)| {
                let (pa, pb) = (positions[a], positions[b]);
                pa[0] * pb[1] - pb[0] * pa[1]
            })
            .sum::<f64>()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().map(|m| m.mass).sum()
    }

    pub fn center_of_mass(&self, positions: &[[f64; 2]]) -> [f64; 2] {
        let mut c = [0.0; 2];
        for (m, p) in self.masses.iter().zip(positions) {
            c[0] += m.mass * p[0];
            c[1] += m.mass * p[1];
        }
        let total = self.total_mass();
        [c[0] / total, c[1] / total]
    }

    /// Elastic force on endpoint `a` of spring `i` (endpoint `b` receives the
    /// exact negation), including axial damping.
    #[inline]
    pub fn spring_force(&self, i: usize, positions: &[[f64; 2]], velocities: &[[f64; 2]], damping: f64) -> [f64; 2] {
        let s = &self.springs[i];
        let (pa, pb) = (positions[s.a], positions[s.b]);
        let d = [pb[0] - pa[0], pb[1] - pa[1]];
        let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
        if len <= f64::EPSILON {
            return [0.0, 0.0];
        }
        let u = [d[0] / len, d[1] / len];
        let (va, vb) = (velocities[s.a], velocities[s.b]);
        let rel = (vb[0] - va[0]) * u[0] + (vb[1] - va[1]) * u[1];
        let mag = s.k_effective * (len - s.rest_length) + damping * rel;
        [mag * u[0], mag * u[1]]
    }

    pub fn elastic_energy(&self, positions: &[[f64; 2]]) -> f64 {
        self.springs
            .iter()
            .map(|s| {
                let (pa, pb) = (positions[s.a], positions[s.b]);
                let len = ((pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2)).sqrt();
                0.5 * s.k_effective * (len - s.rest_length).powi(2)
            })
            .sum()
    }

    pub fn kinetic_energy(&self, velocities: &[[f64; 2]]) -> f64 {
        self.masses
            .iter()
            .zip(velocities)
            .map(|(m, v)| 0.5 * m.mass * (v[0] * v[0] + v[1] * v[1]))
            .sum()
    }

    pub fn momentum(&self, velocities: &[[f64; 2]]) -> [f64; 2] {
        let mut p = [0.0; 2];
        for (m, v) in self.masses.iter().zip(velocities) {
            p[0] += m.mass * v[0];
            p[1] += m.mass * v[1];
        }
        p
    }
}
