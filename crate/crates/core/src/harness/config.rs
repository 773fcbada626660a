use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::agents::PolicyId;
use crate::procgen::{generate_scene, GenParams};
use crate::sim::DT_CTRL;
use crate::world::{builtin_scene, load_scene, SceneSpec};

use super::HarnessError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("weights must be non-negative and sum to one, got {alpha} + {beta}")]
    BadWeights { alpha: f64, beta: f64 },
    #[error("time budget must be positive, got {0}")]
    BadBudget(f64),
    #[error("robot count must be in 1..=3, got {0}")]
    BadRobots(usize),
    #[error("expected 1 or {n_robots} policies, got {got}")]
    PolicyCount { n_robots: usize, got: usize },
    #[error("`{field}` must be positive and finite, got {value}")]
    NotPositive { field: &'static str, value: f64 },
    #[error("collision limit must be at least 1")]
    BadCollisionLimit,
    #[error("scene has {available} spawns, fixed spawning needs {wanted}")]
    NotEnoughSpawns { wanted: usize, available: usize },
    #[error("bad scene source `{0}`: expected builtin:<1-5>, file:<path> or a path")]
    BadSceneSource(String),
    #[error("runs per config must be at least 1")]
    NoRuns,
    #[error("bad suite file: {0}")]
    BadSuite(String),
}

/// Where an episode's scene comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SceneSource {
    Builtin { category: u8 },
    File(PathBuf),
    Procgen(GenParams),
    Inline(Box<SceneSpec>),
}

impl SceneSource {
    pub fn builtin(category: u8) -> Self {
        SceneSource::Builtin { category }
    }

    pub fn load(&self) -> Result<SceneSpec, HarnessError> {
        Ok(match self {
            SceneSource::Builtin { category } => builtin_scene(*category, 0)?,
            SceneSource::File(p) => load_scene(p)?,
            SceneSource::Procgen(p) => generate_scene(p)?,
            SceneSource::Inline(s) => {
                s.validate()?;
                (**s).clone()
            }
        })
    }
}

impl fmt::Display for SceneSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SceneSource::Builtin { category } => write!(f, "builtin:{category}"),
            SceneSource::File(p) => write!(f, "file:{}", p.display()),
            SceneSource::Procgen(p) => {
                write!(
                    f,
                    "procgen:{}/{:.2}/{}/{}",
                    p.layout.as_str(),
                    p.density,
                    p.pattern.as_str(),
                    p.seed
                )
            }
            SceneSource::Inline(s) => write!(f, "inline:{}", s.id),
        }
    }
}

impl FromStr for SceneSource {
    type Err = ConfigError;

    /// `builtin:N`, `file:PATH`, or a bare path.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(n) = s.strip_prefix("builtin:") {
            return match n.parse::<u8>() {
                Ok(c) if (1..=5).contains(&c) => Ok(SceneSource::builtin(c)),
                _ => Err(ConfigError::BadSceneSource(s.to_string())),
            };
        }
        let path = s.strip_prefix("file:").unwrap_or(s);
        if path.is_empty() {
            return Err(ConfigError::BadSceneSource(s.to_string()));
        }
        Ok(SceneSource::File(PathBuf::from(path)))
    }
}

/// Everything that defines one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpisodeConfig {
    pub scene: SceneSource,
    /// One id for all robots, or one per robot.
    pub policies: Vec<PolicyId>,
    pub n_robots: usize,
    pub time_budget: f64,
    pub collision_limit: usize,
    pub seed: u64,
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub dt: f64,
    /// Radius of the uniform target displacement; zero disables it.
    pub jitter: f64,
    /// Seconds without motion or events before the episode is called idle.
    /// Off by default so that a stalled policy runs out the budget.
    pub idle_window: Option<f64>,
    /// Draw spawns at random; otherwise use the scene's listed spawns.
    pub randomize_spawn: bool,
    /// Drop moving obstacles from the scene.
    pub static_only: bool,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        EpisodeConfig {
            scene: SceneSource::builtin(1),
            policies: vec![PolicyId::Dual],
            n_robots: 1,
            time_budget: 300.0,
            collision_limit: 100,
            seed: 0,
            alpha: 0.5,
            beta: 0.5,
            delta: 0.1,
            dt: DT_CTRL,
            jitter: 0.2,
            idle_window: None,
            randomize_spawn: true,
            static_only: false,
        }
    }
}

impl EpisodeConfig {
    pub fn new(scene: SceneSource, policy: PolicyId, seed: u64) -> Self {
        EpisodeConfig {
            scene,
            policies: vec![policy],
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let (a, b) = (self.alpha, self.beta);
        if !(a >= 0.0 && b >= 0.0) || (a + b - 1.0).abs() > 1e-9 {
            return Err(ConfigError::BadWeights { alpha: a, beta: b });
        }
        if !(self.time_budget > 0.0) || !self.time_budget.is_finite() {
            return Err(ConfigError::BadBudget(self.time_budget));
        }
        if !(1..=3).contains(&self.n_robots) {
            return Err(ConfigError::BadRobots(self.n_robots));
        }
        if self.policies.len() != 1 && self.policies.len() != self.n_robots {
            return Err(ConfigError::PolicyCount {
                n_robots: self.n_robots,
                got: self.policies.len(),
            });
        }
        for (field, value) in [("delta", self.delta), ("dt", self.dt)] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(ConfigError::NotPositive { field, value });
            }
        }
        if !(self.jitter >= 0.0) || !self.jitter.is_finite() {
            return Err(ConfigError::NotPositive {
                field: "jitter",
                value: self.jitter,
            });
        }
        if let Some(w) = self.idle_window {
            if !(w > 0.0) || !w.is_finite() {
                return Err(ConfigError::NotPositive {
                    field: "idle_window",
                    value: w,
                });
            }
        }
        if self.collision_limit == 0 {
            return Err(ConfigError::BadCollisionLimit);
        }
        Ok(())
    }

    /// Policy driving robot `i`.
    pub fn policy_for(&self, i: usize) -> PolicyId {
        if self.policies.len() == 1 {
            self.policies[0]
        } else {
            self.policies[i]
        }
    }

    /// Short description used as the aggregate row key.
    pub fn label(&self) -> String {
        let names: Vec<&str> = self.policies.iter().map(|p| p.as_str()).collect();
        format!("{} {} x{}", self.scene, names.join("+"), self.n_robots)
    }
}
