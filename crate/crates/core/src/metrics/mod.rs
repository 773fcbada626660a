//! Episode metrics computed from a trajectory log and its scene.

pub mod coverage;
pub mod motion;
pub mod safety;
pub mod task;

use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;
use crate::sim::TrajectoryLog;
use crate::world::{navigable_grid, RobotSpec, SceneSpec, WorldError};

pub use coverage::{
    coverage_ratio, coverage_stats, footprint_cells, sweep_redundancy, visit_counts, CoverageStats,
};
pub use motion::{kinematics, kinematics_multi, path_length, Kinematics};
pub use safety::{collision_count, timing};
pub use task::{task_completion, tcr_from_parts, TaskScore, VacuousMode};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("trajectory log has no poses")]
    EmptyLog,
    #[error("weights must be non-negative and sum to one, got {alpha} + {beta}")]
    BadWeights { alpha: f64, beta: f64 },
    #[error("need at least {needed} poses, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("inconsistent log: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    World(#[from] WorldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    pub alpha: f64,
    pub beta: f64,
    /// Grid resolution in meters.
    pub delta: f64,
    /// Episode budget; when set, the duration is checked against it.
    pub budget_s: Option<f64>,
    pub vacuous: VacuousMode,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            alpha: 0.5,
            beta: 0.5,
            delta: 0.1,
            budget_s: None,
            vacuous: VacuousMode::One,
        }
    }
}

/// Headers of the summary table, in display order.
pub const TABLE_COLUMNS: [&str; 10] = [
    "TCR", "TCR_S", "TCR_G", "ME", "SR", "CR", "FT", "CT", "Vel_avg", "Col",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub cr: f64,
    pub tcr: f64,
    pub tcr_sweep: f64,
    pub tcr_grasp: f64,
    pub sr: f64,
    /// Nothing was visited, so `sr` is a placeholder zero.
    pub sr_undefined: bool,
    /// Path length per success; unset with zero successes.
    pub me: Option<f64>,
    pub collision: usize,
    pub collision_dedup: usize,
    pub ct: f64,
    pub ft: f64,
    pub vel_avg: Option<f64>,
    pub acc_avg: Option<f64>,
    pub jerk_avg: Option<f64>,
    pub l_total: f64,
    pub sweep_success: usize,
    pub grasp_success: usize,
    pub sweep_total: usize,
    pub grasp_total: usize,
    /// A task kind had no targets.
    pub vacuous: bool,
    pub a_total: f64,
    pub a_covered: f64,
}

impl MetricReport {
    /// Value under a summary-table header.
    pub fn column(&self, name: &str) -> Option<f64> {
        match name {
            "TCR" => Some(self.tcr),
            "TCR_S" => Some(self.tcr_sweep),
            "TCR_G" => Some(self.tcr_grasp),
            "ME" => self.me,
            "SR" => Some(self.sr),
            "CR" => Some(self.cr),
            "FT" => Some(self.ft),
            "CT" => Some(self.ct),
            "Vel_avg" => self.vel_avg,
            "Col" => Some(self.collision as f64),
            _ => None,
        }
    }

    pub fn columns(&self) -> Vec<Option<f64>> {
        TABLE_COLUMNS.iter().map(|c| self.column(c)).collect()
    }
}

/// Per-robot position tracks in time order.
pub fn tracks(log: &TrajectoryLog) -> Vec<Vec<Vec2<f64>>> {
    let mut out = vec![Vec::new(); log.n_robots];
    for p in &log.poses {
        if let Some(t) = out.get_mut(p.robot) {
            t.push(p.pose.position());
        }
    }
    out.retain(|t| !t.is_empty());
    out
}

pub fn compile_report(
    log: &TrajectoryLog,
    scene: &SceneSpec,
    cfg: &MetricConfig,
) -> Result<MetricReport, MetricError> {
    if log.is_empty() {
        return Err(MetricError::EmptyLog);
    }
    if let Some(p) = log.poses.iter().find(|p| p.robot >= log.n_robots) {
        return Err(MetricError::Inconsistent(format!(
            "pose for robot {} in a {}-robot log",
            p.robot, log.n_robots
        )));
    }
    if log.poses.windows(2).any(|w| w[1].tau < w[0].tau) {
        return Err(MetricError::Inconsistent("poses out of time order".into()));
    }
    let robot = RobotSpec::default();
    let grid = navigable_grid(scene, cfg.delta)?;
    let cov = coverage_stats(log, &grid, &robot)?;
    let (sr, sr_undefined) = cov.sr();
    let task = task_completion(&log.events, scene, cfg.alpha, cfg.beta, cfg.vacuous)?;
    let tr = tracks(log);
    let l_total: f64 = tr.iter().map(|t| path_length(t)).sum();
    let kin = kinematics_multi(&tr, log.dt).ok();
    let (collision, collision_dedup) = collision_count(&log.events);
    let (ct, ft) = timing(log);
    let successes = task.sweep_success + task.grasp_success;

    if let Some(b) = cfg.budget_s {
        if ft > b + log.dt + 1e-9 {
            return Err(MetricError::Inconsistent(format!(
                "duration {ft} s exceeds budget {b} s"
            )));
        }
    }
    let identity = cfg.alpha * task.tcr_sweep + cfg.beta * task.tcr_grasp;
    if (identity - task.tcr).abs() > 1e-12 {
        return Err(MetricError::Inconsistent(
            "completion does not decompose".into(),
        ));
    }

    Ok(MetricReport {
        cr: cov.cr(),
        tcr: task.tcr,
        tcr_sweep: task.tcr_sweep,
        tcr_grasp: task.tcr_grasp,
        sr,
        sr_undefined,
        me: (successes > 0).then(|| l_total / successes as f64),
        collision,
        collision_dedup,
        ct,
        ft,
        vel_avg: kin.map(|k| k.vel),
        acc_avg: kin.and_then(|k| k.acc),
        jerk_avg: kin.and_then(|k| k.jerk),
        l_total,
        sweep_success: task.sweep_success,
        grasp_success: task.grasp_success,
        sweep_total: task.sweep_total,
        grasp_total: task.grasp_total,
        vacuous: task.vacuous,
        a_total: cov.a_total,
        a_covered: cov.a_covered,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Pose, Rect};
    use crate::sim::Mode;

    #[test]
    fn stationary_empty_task_episode() {
        let scene = SceneSpec::empty(
            "s",
            Rect::from_xywh(0.0, 0.0, 10.0, 10.0),
            Pose::new(5.0, 5.0, 0.0),
        );
        let mut log = TrajectoryLog::new(0.1, 1, "s");
        for tau in 0..10 {
            log.push_pose(
                tau,
                tau as f64 * 0.1,
                0,
                Pose::new(5.0, 5.0, 0.0),
                Mode::Sweep,
                Some(0.01),
            );
        }
        let r = compile_report(&log, &scene, &MetricConfig::default()).unwrap();
        assert!((r.cr - 0.16 / 100.0).abs() < 1e-12);
        assert_eq!((r.sr, r.tcr, r.collision), (0.0, 1.0, 0));
        assert!(r.vacuous);
        assert_eq!(r.me, None);
        assert!((r.ft - 0.9).abs() < 1e-12);
        assert_eq!(r.column("Col"), Some(0.0));
    }
}
