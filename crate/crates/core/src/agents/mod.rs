//! Baseline policies behind one interface: lane and grid coverage, frontier
//! exploration, and a reference dual-mode planner, plus the grid search,
//! map, tracking and partitioning pieces they share.

pub mod astar;
pub mod boustrophedon;
pub mod coverage;
pub mod dual;
pub mod frontier;
pub mod navmap;
pub mod partition;
pub mod tracker;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::sim::{Action, Mode, Observation};
use crate::world::SceneSpec;

pub use astar::{astar_path, path_cost, Connectivity, Heuristic};
pub use boustrophedon::{boustrophedon_plan, lane_positions, LanePlan, LaneSegment, Orientation};
pub use coverage::{CoveragePolicy, CoverageVariant};
pub use dual::DualPolicy;
pub use frontier::{frontier_mask, select_frontier, FrontierPolicy};
pub use navmap::NavMap;
pub use partition::{assign_regions, partition_regions};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AgentError {
    #[error("unknown policy `{0}`")]
    UnknownPolicy(String),
    #[error("no navigable space")]
    NoNavigableSpace,
    #[error("bad parameter: {0}")]
    BadParameter(String),
}

/// What a policy learns at reset.
#[derive(Debug, Clone)]
pub struct PolicyContext {
    pub scene: Arc<SceneSpec>,
    pub robot: usize,
    pub n_robots: usize,
    /// Cells (0.1 m grid over the scene bounds) this robot should work in.
    pub region: Option<Arc<Vec<bool>>>,
    pub dt: f64,
}

impl PolicyContext {
    pub fn single(scene: Arc<SceneSpec>, dt: f64) -> Self {
        PolicyContext {
            scene,
            robot: 0,
            n_robots: 1,
            region: None,
            dt,
        }
    }

    /// The region mask when it matches `map`'s grid.
    pub fn region_for(&self, map: &NavMap) -> Option<&[bool]> {
        self.region
            .as_deref()
            .map(|r| r.as_slice())
            .filter(|r| r.len() == map.len())
    }
}

/// Uniform control interface. `act` must be a pure function of the reset
/// inputs and the observations seen so far.
pub trait Policy: Send {
    fn name(&self) -> &'static str;
    fn reset(&mut self, ctx: &PolicyContext, seed: u64);
    fn act(&mut self, obs: &Observation) -> Action;
    /// Whether observations must carry the sensed local grid.
    fn needs_local_grid(&self) -> bool {
        false
    }
}

/// Stands still in sweep mode.
#[derive(Debug, Clone, Default)]
pub struct IdlePolicy;

impl Policy for IdlePolicy {
    fn name(&self) -> &'static str {
        "idle"
    }

    fn reset(&mut self, _ctx: &PolicyContext, _seed: u64) {}

    fn act(&mut self, _obs: &Observation) -> Action {
        Action::idle(Mode::Sweep)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyId {
    Manhattan,
    Chebyshev,
    Vertical,
    Horizontal,
    Frontier,
    Dual,
    Idle,
}

impl PolicyId {
    pub const ALL: [PolicyId; 7] = [
        PolicyId::Manhattan,
        PolicyId::Chebyshev,
        PolicyId::Vertical,
        PolicyId::Horizontal,
        PolicyId::Frontier,
        PolicyId::Dual,
        PolicyId::Idle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyId::Manhattan => "manhattan",
            PolicyId::Chebyshev => "chebyshev",
            PolicyId::Vertical => "vertical",
            PolicyId::Horizontal => "horizontal",
            PolicyId::Frontier => "frontier",
            PolicyId::Dual => "dual",
            PolicyId::Idle => "idle",
        }
    }

    /// Never grasps.
    pub fn sweep_only(self) -> bool {
        self != PolicyId::Dual
    }

    pub fn build(self) -> Box<dyn Policy> {
        match self {
            PolicyId::Manhattan => Box::new(CoveragePolicy::new(CoverageVariant::Manhattan)),
            PolicyId::Chebyshev => Box::new(CoveragePolicy::new(CoverageVariant::Chebyshev)),
            PolicyId::Vertical => Box::new(CoveragePolicy::new(CoverageVariant::Vertical)),
            PolicyId::Horizontal => Box::new(CoveragePolicy::new(CoverageVariant::Horizontal)),
            PolicyId::Frontier => Box::new(FrontierPolicy::new()),
            PolicyId::Dual => Box::new(DualPolicy::new()),
            PolicyId::Idle => Box::new(IdlePolicy),
        }
    }
}

impl fmt::Display for PolicyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyId {
    type Err = AgentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PolicyId::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| AgentError::UnknownPolicy(s.to_string()))
    }
}

/// Policy instance by string id.
pub fn make_policy(id: &str) -> Result<Box<dyn Policy>, AgentError> {
    Ok(id.parse::<PolicyId>()?.build())
}
