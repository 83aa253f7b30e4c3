use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::physics::{Ground, HeightField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TaskId {
    Walker,
    BridgeWalker,
    DownStepper,
    CaveCrawler,
    AreaMaximizer,
    AreaMinimizer,
}

impl TaskId {
    pub const ALL: [TaskId; 6] = [
        TaskId::Walker,
        TaskId::BridgeWalker,
        TaskId::DownStepper,
        TaskId::CaveCrawler,
        TaskId::AreaMaximizer,
        TaskId::AreaMinimizer,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TaskId::Walker => "Walker",
            TaskId::BridgeWalker => "BridgeWalker",
            TaskId::DownStepper => "DownStepper",
            TaskId::CaveCrawler => "CaveCrawler",
            TaskId::AreaMaximizer => "AreaMaximizer",
            TaskId::AreaMinimizer => "AreaMinimizer",
        }
    }

    /// Locomotion tasks reward forward centre-of-mass displacement.
    pub fn is_locomotion(self) -> bool {
        !matches!(self, TaskId::AreaMaximizer | TaskId::AreaMinimizer)
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownTask(pub String);

impl fmt::Display for UnknownTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown task id `{}`", self.0)
    }
}

impl std::error::Error for UnknownTask {}

impl FromStr for TaskId {
    type Err = UnknownTask;

    /// Accepts the bare name or the `-v0` suffixed form, case-insensitively.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim();
        let key = key.strip_suffix("-v0").unwrap_or(key);
        TaskId::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(key))
            .ok_or_else(|| UnknownTask(s.to_string()))
    }
}

/// Geometry knobs for the cave analog.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaveGeometry {
    /// Ceiling height over the spawn area, m.
    pub mouth_height: f64,
    /// Ceiling height of the narrow passage, m.
    pub passage_height: f64,
    pub passage_start: f64,
    pub passage_end: f64,
}

impl Default for CaveGeometry {
    fn default() -> Self {
        Self {
            mouth_height: 0.4,
            passage_height: 0.15,
            passage_start: 0.8,
            passage_end: 1.4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub task: TaskId,
    /// Episode horizon in control ticks.
    pub episode_length: usize,
    pub ground: Ground,
    /// x of the robot's leftmost corner at spawn, m.
    pub spawn_x: f64,
    /// Uniform spawn x jitter drawn from the env seed, m.
    pub spawn_jitter: f64,
    /// Terrain probe offsets ahead of the centre of mass, in voxel widths.
    pub terrain_probes: Vec<f64>,
}

pub const DEFAULT_EPISODE_LENGTH: usize = 500;

impl TaskSpec {
    pub fn new(task: TaskId) -> Self {
        let ground = match task {
            TaskId::Walker | TaskId::AreaMaximizer | TaskId::AreaMinimizer => Ground::flat(0.0),
            TaskId::BridgeWalker => Ground {
                compliant: vec![(0.4, 2.0, 0.1)],
                ..Ground::flat(0.0)
            },
            TaskId::DownStepper => Ground {
                floor: descending_steps(0.6, 0.3, 0.05, 3),
                ..Ground::flat(0.0)
            },
            TaskId::CaveCrawler => cave(CaveGeometry::default()),
        };
        Self {
            task,
            episode_length: DEFAULT_EPISODE_LENGTH,
            ground,
            spawn_x: 0.0,
            spawn_jitter: 0.0,
            terrain_probes: vec![0.0, 0.5, 1.0, 1.5, 2.0],
        }
    }

    pub fn with_episode_length(mut self, ticks: usize) -> Self {
        self.episode_length = ticks;
        self
    }

    /// Replaces the floor with an inline height field.
    pub fn with_floor(mut self, points: Vec<[f64; 2]>) -> Self {
        self.ground.floor = HeightField::new(points);
        self
    }

    pub fn with_cave(mut self, geometry: CaveGeometry) -> Self {
        self.ground = cave(geometry);
        self
    }
}

/// Flat run-up, then `count` drops of `drop` metres every `tread` metres.
fn descending_steps(first_edge: f64, tread: f64, drop: f64, count: usize) -> HeightField {
    const RAMP: f64 = 0.01;
    let mut pts = vec![[-10.0, 0.0]];
    let mut h = 0.0;
    for i in 0..count {
        let x = first_edge + i as f64 * tread;
        pts.push([x, h]);
        h -= drop;
        pts.push([x + RAMP, h]);
    }
    pts.push([first_edge + count as f64 * tread + 10.0, h]);
    HeightField::new(pts)
}

fn cave(g: CaveGeometry) -> Ground {
    const RAMP: f64 = 0.05;
    let ceiling = HeightField::new(vec![
        [-10.0, g.mouth_height],
        [g.passage_start - RAMP, g.mouth_height],
        [g.passage_start, g.passage_height],
        [g.passage_end, g.passage_height],
        [g.passage_end + RAMP, g.mouth_height],
    ]);
    Ground {
        ceiling: Some(ceiling),
        ..Ground::flat(0.0)
    }
}
