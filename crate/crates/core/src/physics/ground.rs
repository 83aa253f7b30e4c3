use serde::{Deserialize, Serialize};

/// Piecewise-linear height profile; constant beyond its end points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeightField {
    /// `(x, height)` knots sorted by x.
    pub points: Vec<[f64; 2]>,
}

impl HeightField {
    pub fn flat(height: f64) -> Self {
        Self {
            points: vec![[0.0, height]],
        }
    }

    pub fn new(mut points: Vec<[f64; 2]>) -> Self {
        points.sort_by(|a, b| a[0].total_cmp(&b[0]));
        Self { points }
    }

    pub fn height_at(&self, x: f64) -> f64 {
        let p = &self.points;
        match p.len() {
            0 => 0.0,
            1 => p[0][1],
            _ => {
                if x <= p[0][0] {
                    return p[0][1];
                }
                let last = p[p.len() - 1];
                if x >= last[0] {
                    return last[1];
                }
                let i = p.partition_point(|q| q[0] <= x);
                let (a, b) = (p[i - 1], p[i]);
                let span = b[0] - a[0];
                if span <= 0.0 {
                    return b[1];
                }
                a[1] + (b[1] - a[1]) * (x - a[0]) / span
            }
        }
    }

    pub fn max_over(&self, x0: f64, x1: f64) -> f64 {
        let mut h = self.height_at(x0).max(self.height_at(x1));
        for q in &self.points {
            if q[0] > x0 && q[0] < x1 {
                h = h.max(q[1]);
            }
        }
        h
    }

    pub fn min_over(&self, x0: f64, x1: f64) -> f64 {
        let mut h = self.height_at(x0).min(self.height_at(x1));
        for q in &self.points {
            if q[0] > x0 && q[0] < x1 {
                h = h.min(q[1]);
            }
        }
        h
    }

    pub fn is_finite(&self) -> bool {
        self.points.iter().all(|p| p[0].is_finite() && p[1].is_finite())
    }
}

/// Contact geometry: a floor, an optional ceiling, and floor intervals with
/// scaled contact stiffness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ground {
    pub floor: HeightField,
    #[serde(default)]
    pub ceiling: Option<HeightField>,
    /// `(x_start, x_end, stiffness_scale)` intervals on the floor.
    #[serde(default)]
    pub compliant: Vec<(f64, f64, f64)>,
}

impl Ground {
    pub fn flat(height: f64) -> Self {
        Self {
            floor: HeightField::flat(height),
            ceiling: None,
            compliant: Vec::new(),
        }
    }

    pub fn stiffness_scale(&self, x: f64) -> f64 {
        self.compliant
            .iter()
            .find(|&&(a, b, _)| x >= a && x < b)
            .map_or(1.0, |&(_, _, s)| s)
    }
}
