//! Arena geometry: perimeter walls, cylinder obstacles, the goal beacon.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::geometry::{Circle, Rect, Vec2};

#[derive(Debug, Error, PartialEq)]
pub enum ArenaError {
    #[error("unknown arena preset `{0}` (expected default, corridor or open)")]
    UnknownPreset(String),
    #[error("layout line {line}: {reason}")]
    Layout { line: usize, reason: String },
    #[error("layout has no beacon")]
    MissingBeacon,
    #[error("snake spawn overlaps {0:?}")]
    SpawnBlocked(BodyId),
}

/// Index into `Arena::bodies()`: walls first, then obstacles, then the beacon.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BodyId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BodyKind {
    Wall,
    Obstacle,
    Beacon,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape {
    Rect(Rect),
    Circle(Circle),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Arena {
    pub walls: Vec<Rect>,
    pub obstacles: Vec<Circle>,
    pub beacon: Circle,
    pub spawn: Vec2,
}

pub const CORRIDOR: (f64, f64) = (-0.5, 3.5);
const WALL_THICKNESS: f64 = 0.5;
const BOTTOM_FACE: f64 = -0.5;
const TOP_FACE: f64 = 17.5;
const OBSTACLE_RADIUS: f64 = 0.25;

fn perimeter() -> Vec<Rect> {
    let (x0, x1) = CORRIDOR;
    let t = WALL_THICKNESS;
    let (y0, y1) = (BOTTOM_FACE - t, TOP_FACE + t);
    vec![
        Rect::from_corners(Vec2::new(x0 - t, y0), Vec2::new(x0, y1)),
        Rect::from_corners(Vec2::new(x1, y0), Vec2::new(x1 + t, y1)),
        Rect::from_corners(Vec2::new(x0, y0), Vec2::new(x1, BOTTOM_FACE)),
        Rect::from_corners(Vec2::new(x0, TOP_FACE), Vec2::new(x1, y1)),
    ]
}

fn staggered_rows() -> Vec<Circle> {
    let r = OBSTACLE_RADIUS;
    let (x0, x1) = CORRIDOR;
    let mut out = Vec::new();
    for row in 0..6 {
        let y = 3.0 + 2.0 * row as f64;
        let xs: &[f64] = if row % 2 == 0 { &[0.5, 2.5] } else { &[x0 + r, 1.5, x1 - r] };
        out.extend(xs.iter().map(|&x| Circle { center: Vec2::new(x, y), radius: r }));
    }
    out
}

impl Arena {
    /// `default`: staggered obstacle maze. `corridor`: same walls, no
    /// obstacles. `open`: nothing but the beacon.
    pub fn preset(name: &str) -> Result<Self, ArenaError> {
        let beacon = Circle { center: Vec2::new(1.5, 16.5), radius: 0.15 };
        let spawn = Vec2::new(1.5, 0.5);
        let (walls, obstacles) = match name {
            "default" => (perimeter(), staggered_rows()),
            "corridor" => (perimeter(), Vec::new()),
            "open" => (Vec::new(), Vec::new()),
            other => return Err(ArenaError::UnknownPreset(other.to_string())),
        };
        Ok(Self { walls, obstacles, beacon, spawn })
    }

    /// Loads a preset name, or a layout file when `spec` names an existing path.
    pub fn load(spec: &str) -> Result<Self, ArenaError> {
        match std::fs::read_to_string(spec) {
            Ok(text) => Self::parse_layout(&text),
            Err(_) => Self::preset(spec),
        }
    }

    pub fn parse_layout(text: &str) -> Result<Self, ArenaError> {
        let mut walls = Vec::new();
        let mut obstacles = Vec::new();
        let mut beacon = None;
        let mut spawn = Vec2::new(1.5, 0.5);
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |reason: String| ArenaError::Layout { line: i + 1, reason };
            let mut parts = line.split_whitespace();
            let kind = parts.next().expect("non-empty line");
            let nums: Vec<f64> = parts
                .map(|p| p.parse::<f64>().map_err(|e| err(format!("`{p}`: {e}"))))
                .collect::<Result<_, _>>()?;
            if nums.iter().any(|v| !v.is_finite()) {
                return Err(err("non-finite coordinate".into()));
            }
            let want = match kind {
                "wall" => 4,
                "cyl" | "beacon" => 3,
                "spawn" => 2,
                other => return Err(err(format!("unknown primitive `{other}`"))),
            };
            if nums.len() != want {
                return Err(err(format!("`{kind}` takes {want} numbers, got {}", nums.len())));
            }
            match kind {
                "wall" => walls.push(Rect::from_corners(
                    Vec2::new(nums[0], nums[1]),
                    Vec2::new(nums[2], nums[3]),
                )),
                "cyl" | "beacon" => {
                    if nums[2] <= 0.0 {
                        return Err(err("radius must be positive".into()));
                    }
                    let c = Circle { center: Vec2::new(nums[0], nums[1]), radius: nums[2] };
                    if kind == "cyl" {
                        obstacles.push(c);
                    } else {
                        beacon = Some(c);
                    }
                }
                _ => spawn = Vec2::new(nums[0], nums[1]),
            }
        }
        Ok(Self {
            walls,
            obstacles,
            beacon: beacon.ok_or(ArenaError::MissingBeacon)?,
            spawn,
        })
    }

    pub fn to_layout(&self) -> String {
        let mut s = String::new();
        for w in &self.walls {
            let _ = writeln!(s, "wall {} {} {} {}", w.min.x, w.min.y, w.max.x, w.max.y);
        }
        for c in &self.obstacles {
            let _ = writeln!(s, "cyl {} {} {}", c.center.x, c.center.y, c.radius);
        }
        let b = &self.beacon;
        let _ = writeln!(s, "beacon {} {} {}", b.center.x, b.center.y, b.radius);
        let _ = writeln!(s, "spawn {} {}", self.spawn.x, self.spawn.y);
        s
    }

    pub fn body_count(&self) -> usize {
        self.walls.len() + self.obstacles.len() + 1
    }

    pub fn beacon_id(&self) -> BodyId {
        BodyId((self.walls.len() + self.obstacles.len()) as u32)
    }

    pub fn kind(&self, id: BodyId) -> BodyKind {
        let i = id.0 as usize;
        if i < self.walls.len() {
            BodyKind::Wall
        } else if i < self.walls.len() + self.obstacles.len() {
            BodyKind::Obstacle
        } else {
            BodyKind::Beacon
        }
    }

    pub fn shape(&self, id: BodyId) -> Shape {
        let i = id.0 as usize;
        let nw = self.walls.len();
        if i < nw {
            Shape::Rect(self.walls[i])
        } else if i < nw + self.obstacles.len() {
            Shape::Circle(self.obstacles[i - nw])
        } else {
            Shape::Circle(self.beacon)
        }
    }

    /// All bodies in id order, beacon included.
    pub fn bodies(&self) -> impl Iterator<Item = (BodyId, Shape)> + '_ {
        (0..self.body_count() as u32).map(move |i| (BodyId(i), self.shape(BodyId(i))))
    }

    /// Smallest surface-to-surface gap over all obstacle pairs.
    pub fn min_obstacle_gap(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for (i, a) in self.obstacles.iter().enumerate() {
            for b in &self.obstacles[i + 1..] {
                let gap = (a.center - b.center).norm() - a.radius - b.radius;
                best = Some(best.map_or(gap, |g| g.min(gap)));
            }
        }
        best
    }

    /// Euclidean and goal-axis distance from `head` to the beacon centre.
    pub fn distance_to_goal(&self, head: Vec2) -> (f64, f64) {
        ((self.beacon.center - head).norm(), self.beacon.center.y - head.y)
    }
}
