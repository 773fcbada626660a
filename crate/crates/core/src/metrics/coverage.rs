use crate::geometry::Pose;
use crate::sim::TrajectoryLog;
use crate::world::{OccupancyGrid, RobotSpec};

use super::MetricError;

/// Grid cells whose centers lie inside the footprint at `pose`, as flat
/// indices. Navigability is not checked.
pub fn footprint_cells(grid: &OccupancyGrid, robot: &RobotSpec, pose: &Pose<f64>) -> Vec<usize> {
    let fp = robot.footprint(pose);
    let bb = fp.aabb();
    let d = grid.delta();
    let o = grid.origin();
    // centers at o + (i + 0.5) d
    let lo = |v: f64, o: f64| ((v - o) / d - 0.5).ceil().max(0.0) as usize;
    let hi = |v: f64, o: f64, n: usize| {
        let k = ((v - o) / d - 0.5).floor();
        if k < 0.0 {
            None
        } else {
            Some((k as usize).min(n.saturating_sub(1)))
        }
    };
    let (Some(i1), Some(j1)) = (hi(bb.max.x, o.x, grid.nx()), hi(bb.max.y, o.y, grid.ny())) else {
        return Vec::new();
    };
    let (i0, j0) = (lo(bb.min.x, o.x), lo(bb.min.y, o.y));
    let mut out = Vec::new();
    for j in j0..=j1 {
        for i in i0..=i1 {
            if fp.contains(grid.center((i, j))) {
                out.push(grid.index((i, j)));
            }
        }
    }
    out
}

/// Per-cell visit counts over navigable cells.
///
/// The footprints of all robots at one control step are merged, and a visit
/// to a cell starts at every step where it is covered but was not covered at
/// the step before. A robot passing over a cell therefore adds one visit,
/// however many steps the footprint lingers on it.
pub fn visit_counts(log: &TrajectoryLog, grid: &OccupancyGrid, robot: &RobotSpec) -> Vec<u32> {
    let mut nu = vec![0u32; grid.len()];
    // step at which each cell was last covered
    let mut last: Vec<Option<u64>> = vec![None; grid.len()];
    let nav = grid.navigable_mask();
    for p in &log.poses {
        for c in footprint_cells(grid, robot, &p.pose) {
            if !nav[c] || last[c] == Some(p.tau) {
                continue;
            }
            let continuing = p.tau > 0 && last[c] == Some(p.tau - 1);
            if !continuing {
                nu[c] += 1;
            }
            last[c] = Some(p.tau);
        }
    }
    nu
}

/// Summary of the footprint union over an episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageStats {
    pub a_total: f64,
    pub a_covered: f64,
    pub visited: usize,
    pub revisited: usize,
}

impl CoverageStats {
    pub fn cr(&self) -> f64 {
        if self.a_total > 0.0 {
            self.a_covered / self.a_total
        } else {
            0.0
        }
    }

    /// Redundancy and a flag that is set when nothing was visited.
    pub fn sr(&self) -> (f64, bool) {
        if self.visited == 0 {
            (0.0, true)
        } else {
            (self.revisited as f64 / self.visited as f64, false)
        }
    }
}

pub fn coverage_stats(
    log: &TrajectoryLog,
    grid: &OccupancyGrid,
    robot: &RobotSpec,
) -> Result<CoverageStats, MetricError> {
    if log.is_empty() {
        return Err(MetricError::EmptyLog);
    }
    let nu = visit_counts(log, grid, robot);
    let visited = nu.iter().filter(|&&v| v >= 1).count();
    let revisited = nu.iter().filter(|&&v| v > 1).count();
    let cell = grid.delta() * grid.delta();
    Ok(CoverageStats {
        a_total: grid.a_total(),
        a_covered: visited as f64 * cell,
        visited,
        revisited,
    })
}

pub fn coverage_ratio(
    log: &TrajectoryLog,
    grid: &OccupancyGrid,
    robot: &RobotSpec,
) -> Result<f64, MetricError> {
    coverage_stats(log, grid, robot).map(|s| s.cr())
}

/// Fraction of visited cells visited more than once, with the
/// nothing-visited flag.
pub fn sweep_redundancy(
    log: &TrajectoryLog,
    grid: &OccupancyGrid,
    robot: &RobotSpec,
) -> Result<(f64, bool), MetricError> {
    coverage_stats(log, grid, robot).map(|s| s.sr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Rect;
    use crate::sim::Mode;

    fn grid() -> OccupancyGrid {
        OccupancyGrid::from_navigable(
            Rect::from_xywh(0.0, 0.0, 10.0, 10.0),
            0.1,
            vec![true; 10_000],
        )
    }

    fn log_of(poses: &[(u64, Pose<f64>)]) -> TrajectoryLog {
        let mut log = TrajectoryLog::new(0.1, 1, "t");
        for (tau, p) in poses {
            log.push_pose(*tau, *tau as f64 * 0.1, 0, *p, Mode::Sweep, None);
        }
        log
    }

    #[test]
    fn axis_aligned_footprint_cell_count() {
        // 0.41 x 0.47 centred on a cell corner: 4 x 4 centers along x, 4 x 4 along y
        let cells = footprint_cells(&grid(), &RobotSpec::default(), &Pose::new(5.0, 5.0, 0.0));
        assert_eq!(cells.len(), 16);
    }

    #[test]
    fn lingering_is_one_visit_and_return_is_two() {
        let p = Pose::new(5.0, 5.0, 0.0);
        let far = Pose::new(8.0, 8.0, 0.0);
        let stay = log_of(&[(0, p), (1, p), (2, p)]);
        let (sr, none) = sweep_redundancy(&stay, &grid(), &RobotSpec::default()).unwrap();
        assert_eq!((sr, none), (0.0, false));
        let back = log_of(&[(0, p), (1, far), (2, p)]);
        let (sr, _) = sweep_redundancy(&back, &grid(), &RobotSpec::default()).unwrap();
        assert!((sr - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empty_log_is_an_error() {
        let log = TrajectoryLog::new(0.1, 1, "t");
        assert_eq!(
            coverage_ratio(&log, &grid(), &RobotSpec::default()),
            Err(MetricError::EmptyLog)
        );
    }
}
