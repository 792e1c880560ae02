//! Arena, sensing and rigid-body simulation of the snake.

pub mod arena;
pub mod geometry;
pub mod lidar;
pub mod snake;

pub use arena::{Arena, ArenaError, BodyId, BodyKind};
pub use geometry::Vec2;
pub use snake::{PhysicsConfig, Pose, RobotSpec, SimError, SnakeState, StepOutcome, World, JOINTS, LINKS};
