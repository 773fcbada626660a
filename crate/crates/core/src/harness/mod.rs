//! Episode runner, seeded randomisation, termination and multi-run
//! aggregation.

pub mod bench;
pub mod config;
pub mod episode;
pub mod seeds;

pub use bench::{
    aggregate, run_benchmark, AggregateRow, BenchOutput, BenchSuite, EpisodeRecord, EpisodeSummary,
    Stat, SUITE_SCHEMA,
};
pub use config::{ConfigError, EpisodeConfig, SceneSource};
pub use episode::{
    jitter_targets, random_spawns, run_episode, run_episode_with, EpisodeResult, Termination,
};
pub use seeds::{seed_streams, stream, SeedStreams};

use crate::metrics::MetricError;
use crate::procgen::ProcgenError;
use crate::sim::SimError;
use crate::world::WorldError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Scene(#[from] WorldError),
    #[error(transparent)]
    Procgen(#[from] ProcgenError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("found {found} of {wanted} valid spawn poses")]
    NoValidSpawn { wanted: usize, found: usize },
    #[error("{0}")]
    Runtime(String),
}

impl HarnessError {
    /// Bad input (configuration, unreadable or invalid scene), as opposed to
    /// failures while running.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            HarnessError::Config(_)
                | HarnessError::Scene(_)
                | HarnessError::Procgen(ProcgenError::BadParams { .. })
        )
    }
}
