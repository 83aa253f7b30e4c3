//! Robot design representation: the discrete morphology grid, the continuous
//! stiffness field, and their JSON file format.
//!
//! Grids are stored row-major with row 0 at the bottom. A cell is addressed as
//! `(x, y)` = (column, row).

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Lower bound of the stiffness scaling range.
pub const STIFFNESS_MIN: f64 = 0.5;
/// Upper bound of the stiffness scaling range.
pub const STIFFNESS_MAX: f64 = 2.0;

/// Voxel material/actuation category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VoxelKind {
    Empty,
    Rigid,
    Soft,
    HorizontalActuator,
    VerticalActuator,
}

impl VoxelKind {
    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Self::Empty),
            1 => Some(Self::Rigid),
            2 => Some(Self::Soft),
            3 => Some(Self::HorizontalActuator),
            4 => Some(Self::VerticalActuator),
            _ => None,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Self::Empty => 0,
            Self::Rigid => 1,
            Self::Soft => 2,
            Self::HorizontalActuator => 3,
            Self::VerticalActuator => 4,
        }
    }

    pub fn is_occupied(self) -> bool {
        self != Self::Empty
    }

    pub fn is_actuator(self) -> bool {
        matches!(self, Self::HorizontalActuator | Self::VerticalActuator)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("dimension mismatch: {what} has {actual} entries, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("grid dimensions must be positive (got {width}x{height})")]
    EmptyGrid { width: usize, height: usize },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("design failed validation: {0}")]
    Validation(Verdict),
}

/// Discrete voxel-type matrix. Cells hold raw codes so out-of-alphabet input
/// can be represented and reported by [`validate_design`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Morphology {
    width: usize,
    height: usize,
    cells: Vec<u8>,
}

impl Morphology {
    pub fn new(width: usize, height: usize, cells: Vec<u8>) -> Result<Self, GridError> {
        if width == 0 || height == 0 {
            return Err(GridError::EmptyGrid { width, height });
        }
        if cells.len() != width * height {
            return Err(GridError::DimensionMismatch {
                what: "cells",
                expected: width * height,
                actual: cells.len(),
            });
        }
        Ok(Self {
            width,
            height,
            cells,
        })
    }

    /// Builds a morphology from rows listed top row first, which reads
    /// naturally in source code.
    pub fn from_rows_top_down(rows: &[&[u8]]) -> Result<Self, GridError> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        let mut cells = Vec::with_capacity(width * height);
        for row in rows.iter().rev() {
            if row.len() != width {
                return Err(GridError::DimensionMismatch {
                    what: "row",
                    expected: width,
                    actual: row.len(),
                });
            }
            cells.extend_from_slice(row);
        }
        Self::new(width, height, cells)
    }

    pub fn filled(width: usize, height: usize, code: u8) -> Result<Self, GridError> {
        Self::new(width, height, vec![code; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    pub fn code(&self, x: usize, y: usize) -> u8 {
        self.cells[self.index(x, y)]
    }

    pub fn set_code(&mut self, x: usize, y: usize, code: u8) {
        let i = self.index(x, y);
        self.cells[i] = code;
    }

    /// Voxel kind at `(x, y)`; unknown codes read as `None`.
    pub fn kind(&self, x: usize, y: usize) -> Option<VoxelKind> {
        VoxelKind::from_code(self.code(x, y))
    }

    pub fn is_occupied(&self, x: usize, y: usize) -> bool {
        self.code(x, y) != 0
    }

    /// Occupied cells in row-major order.
    pub fn occupied(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.height)
            .flat_map(move |y| (0..self.width).map(move |x| (x, y)))
            .filter(move |&(x, y)| self.is_occupied(x, y))
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c != 0).count()
    }

    pub fn actuator_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c == 3 || c == 4).count()
    }

    /// Labels 4-connected occupied components; returns one cell list per
    /// component, each in discovery order.
    pub fn components(&self) -> Vec<Vec<(usize, usize)>> {
        let mut seen = vec![false; self.cells.len()];
        let mut out = Vec::new();
        for (x, y) in self.occupied().collect::<Vec<_>>() {
            if seen[self.index(x, y)] {
                continue;
            }
            let mut comp = Vec::new();
            let mut queue = VecDeque::from([(x, y)]);
            seen[self.index(x, y)] = true;
            while let Some((cx, cy)) = queue.pop_front() {
                comp.push((cx, cy));
                for (nx, ny) in self.neighbors4(cx, cy) {
                    let ni = self.index(nx, ny);
                    if !seen[ni] && self.cells[ni] != 0 {
                        seen[ni] = true;
                        queue.push_back((nx, ny));
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    fn neighbors4(&self, x: usize, y: usize) -> impl Iterator<Item = (usize, usize)> {
        let (w, h) = (self.width as isize, self.height as isize);
        let (x, y) = (x as isize, y as isize);
        [(x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)]
            .into_iter()
            .filter(move |&(nx, ny)| nx >= 0 && ny >= 0 && nx < w && ny < h)
            .map(|(nx, ny)| (nx as usize, ny as usize))
    }
}

/// Per-cell relative stiffness multipliers. Values at empty cells are carried
/// along but never read by the physics.
#[derive(Debug, Clone, PartialEq)]
pub struct StiffnessField {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl StiffnessField {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self, GridError> {
        if width == 0 || height == 0 {
            return Err(GridError::EmptyGrid { width, height });
        }
        if values.len() != width * height {
            return Err(GridError::DimensionMismatch {
                what: "stiffness",
                expected: width * height,
                actual: values.len(),
            });
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn uniform(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            values: vec![value; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.values[y * self.width + x] = value;
    }
}

/// Clamps every entry into `[0.5, 2.0]`. NaN maps to the lower bound.
pub fn clamp_stiffness(width: usize, height: usize, raw: &[f64]) -> Result<StiffnessField, GridError> {
    StiffnessField::new(width, height, raw.iter().map(|&v| clamp_factor(v)).collect())
}

#[inline]
pub fn clamp_factor(v: f64) -> f64 {
    STIFFNESS_MAX.min(STIFFNESS_MIN.max(v))
}

/// The physical body plus identity metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotDesign {
    pub morphology: Morphology,
    pub stiffness: StiffnessField,
    pub id: String,
    pub parent_id: Option<String>,
}

impl RobotDesign {
    /// Pairs a morphology with a uniform stiffness of 1.0.
    pub fn with_unit_stiffness(morphology: Morphology, id: impl Into<String>) -> Self {
        let stiffness = StiffnessField::uniform(morphology.width(), morphology.height(), 1.0);
        Self {
            morphology,
            stiffness,
            id: id.into(),
            parent_id: None,
        }
    }

    pub fn width(&self) -> usize {
        self.morphology.width()
    }

    pub fn height(&self) -> usize {
        self.morphology.height()
    }

    /// Stiffness factors of occupied voxels, row-major.
    pub fn occupied_stiffness(&self) -> Vec<f64> {
        self.morphology
            .occupied()
            .map(|(x, y)| self.stiffness.get(x, y))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    InvalidCode { x: usize, y: usize, code: u8 },
    StiffnessOutOfRange { x: usize, y: usize, value: f64 },
    NoOccupiedVoxels,
    Disconnected { components: Vec<Vec<(usize, usize)>> },
    NoActuator,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::InvalidCode { x, y, code } => {
                write!(f, "InvalidCode: cell ({x}, {y}) has code {code}, expected 0..=4")
            }
            Violation::StiffnessOutOfRange { x, y, value } => write!(
                f,
                "StiffnessOutOfRange: cell ({x}, {y}) has factor {value}, expected [{STIFFNESS_MIN}, {STIFFNESS_MAX}]"
            ),
            Violation::NoOccupiedVoxels => write!(f, "NoOccupiedVoxels"),
            Violation::Disconnected { components } => {
                write!(f, "Disconnected: {} components", components.len())?;
                for (i, c) in components.iter().enumerate() {
                    write!(f, "; #{i} at {:?}", c)?;
                }
                Ok(())
            }
            Violation::NoActuator => write!(f, "NoActuator"),
        }
    }
}

/// Validation outcome: empty means the design is valid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Verdict {
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

pub fn validate_design(design: &RobotDesign) -> Result<Verdict, GridError> {
    let m = &design.morphology;
    let s = &design.stiffness;
    if m.width() != s.width() || m.height() != s.height() {
        return Err(GridError::DimensionMismatch {
            what: "stiffness",
            expected: m.width() * m.height(),
            actual: s.width() * s.height(),
        });
    }
    let mut violations = Vec::new();
    for y in 0..m.height() {
        for x in 0..m.width() {
            let code = m.code(x, y);
            if VoxelKind::from_code(code).is_none() {
                violations.push(Violation::InvalidCode { x, y, code });
            }
        }
    }
    for y in 0..m.height() {
        for x in 0..m.width() {
            let v = s.get(x, y);
            if !(STIFFNESS_MIN..=STIFFNESS_MAX).contains(&v) {
                violations.push(Violation::StiffnessOutOfRange { x, y, value: v });
            }
        }
    }
    let components = m.components();
    if components.is_empty() {
        violations.push(Violation::NoOccupiedVoxels);
    } else if components.len() > 1 {
        violations.push(Violation::Disconnected { components });
    }
    if m.occupied_count() > 0 && m.actuator_count() == 0 {
        violations.push(Violation::NoActuator);
    }
    Ok(Verdict { violations })
}

/// Convenience: `Ok(())` when valid, otherwise the verdict as an error.
pub fn ensure_valid(design: &RobotDesign) -> Result<(), GridError> {
    let verdict = validate_design(design)?;
    if verdict.is_ok() {
        Ok(())
    } else {
        Err(GridError::Validation(verdict))
    }
}

#[derive(Serialize, Deserialize)]
struct DesignDocument {
    width: usize,
    height: usize,
    cells: Vec<u8>,
    stiffness: Vec<f64>,
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    parent_id: Option<String>,
}

pub fn serialize_design(design: &RobotDesign) -> String {
    let doc = DesignDocument {
        width: design.width(),
        height: design.height(),
        cells: design.morphology.cells().to_vec(),
        stiffness: design.stiffness.values().to_vec(),
        id: design.id.clone(),
        parent_id: design.parent_id.clone(),
    };
    // serde_json emits shortest round-trip float representations
    serde_json::to_string_pretty(&doc).expect("design document is always serializable")
}

pub fn deserialize_design(text: &str) -> Result<RobotDesign, GridError> {
    let doc: DesignDocument = serde_json::from_str(text).map_err(|e| GridError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let morphology = Morphology::new(doc.width, doc.height, doc.cells)?;
    let stiffness = StiffnessField::new(doc.width, doc.height, doc.stiffness)?;
    let design = RobotDesign {
        morphology,
        stiffness,
        id: doc.id,
        parent_id: doc.parent_id,
    };
    ensure_valid(&design)?;
    Ok(design)
}
