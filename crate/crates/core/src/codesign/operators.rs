//! Variation operators over morphology and material.

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::grid::{clamp_factor, validate_design, Morphology, RobotDesign, StiffnessField};
use crate::rng::Rng;

pub const MUTATION_ATTEMPTS: usize = 100;

pub fn is_valid_morphology(m: &Morphology) -> bool {
    let probe = RobotDesign::with_unit_stiffness(m.clone(), "");
    validate_design(&probe).map(|v| v.is_ok()).unwrap_or(false)
}

/// Random cells (occupied with probability `occupancy`, type uniform over
/// the four voxel kinds), repaired to validity: keep the largest connected
/// component, and make sure something is there and something actuates.
pub fn random_morphology(width: usize, height: usize, occupancy: f64, rng: &mut Rng) -> Morphology {
    let cells: Vec<u8> = (0..width * height)
        .map(|_| if rng.random_bool(occupancy) { rng.random_range(1..=4) } else { 0 })
        .collect();
    let mut m = Morphology::new(width, height, cells).expect("non-empty grid of matching size");
    let mut parts = m.components();
    // first-found wins among equally large components
    let keep = parts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.len().cmp(&b.1.len()).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i);
    if let Some(k) = keep {
        for (i, part) in parts.iter().enumerate() {
            if i != k {
                for &(x, y) in part {
                    m.set_code(x, y, 0);
                }
            }
        }
    }
    let kept = keep.map(|k| std::mem::take(&mut parts[k])).unwrap_or_default();
    if kept.is_empty() {
        let (x, y) = (rng.random_range(0..width), rng.random_range(0..height));
        m.set_code(x, y, rng.random_range(3..=4));
    } else if m.actuator_count() == 0 {
        let (x, y) = kept[rng.random_range(0..kept.len())];
        m.set_code(x, y, rng.random_range(3..=4));
    }
    debug_assert!(is_valid_morphology(&m));
    m
}

/// Resamples each cell uniformly from {0..4} with probability `rate`,
/// retrying from the original until valid. Returns the original with
/// `true` when every attempt failed.
pub fn mutate_morphology(m: &Morphology, rate: f64, rng: &mut Rng) -> (Morphology, bool) {
    let rate = rate.clamp(0.0, 1.0);
    for _ in 0..MUTATION_ATTEMPTS {
        let mut child = m.clone();
        for y in 0..m.height() {
            for x in 0..m.width() {
                if rng.random_bool(rate) {
                    child.set_code(x, y, rng.random_range(0..=4));
                }
            }
        }
        if is_valid_morphology(&child) {
            return (child, false);
        }
    }
    (m.clone(), true)
}

/// Adds N(0, σ²) per cell and clamps to the stiffness range.
pub fn mutate_material(s: &StiffnessField, sigma: f64, rng: &mut Rng) -> StiffnessField {
    let mut out = s.clone();
    for v in out.values_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *v = clamp_factor(*v + sigma * z);
    }
    out
}

/// Uniform stiffness field drawn from the full range.
pub fn random_material(width: usize, height: usize, rng: &mut Rng) -> StiffnessField {
    use crate::grid::{STIFFNESS_MAX, STIFFNESS_MIN};
    let values = (0..width * height).map(|_| rng.random_range(STIFFNESS_MIN..=STIFFNESS_MAX)).collect();
    StiffnessField::new(width, height, values).expect("matching size")
}
