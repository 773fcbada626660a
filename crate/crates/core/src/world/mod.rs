//! Scene data model, built-in scene library and scene file I/O.

pub mod builtin;
pub mod grid;
pub mod io;
pub mod scene;

pub use builtin::{builtin_scene, corridor_width};
pub use grid::{free_mask, navigable_grid, Cell, OccupancyGrid};
pub use io::{load_scene, parse_scene, save_scene, scene_to_json};
pub use scene::{
    DynamicObstacle, Elevation, GraspTarget, RobotSpec, SceneSpec, Shape, StaticObstacle,
    SweepTarget, TargetStatus, TaskZone, ZoneKind, SCHEMA_VERSION,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WorldError {
    #[error("scene parse error: {0}")]
    Parse(String),
    #[error("invalid scene at `{path}`: {message}")]
    Validation { path: String, message: String },
    #[error("unknown built-in scene {category}/{variant}")]
    UnknownScene { category: u8, variant: usize },
    #[error("degenerate scene: {0}")]
    DegenerateScene(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl WorldError {
    pub fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        WorldError::Validation {
            path: path.into(),
            message: message.into(),
        }
    }
}
