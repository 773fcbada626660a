use serde::{Deserialize, Serialize};

use crate::geometry::{Pose, Rect, Vec2};
use crate::world::{Cell, TargetStatus};

use super::{Mode, SimError, SimState};

/// Resolution of the local navigability patch.
pub const GRID_DELTA: f64 = 0.1;
/// Radius of the local navigability patch around the robot.
pub const LOCAL_RADIUS: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectKind {
    Sweep,
    Grasp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibleObject {
    pub id: String,
    pub kind: ObjectKind,
    pub position: Vec2<f64>,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskEntry {
    pub id: String,
    pub kind: ObjectKind,
    pub position: Vec2<f64>,
    pub completed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellKnowledge {
    Free,
    Occupied,
}

/// Cells seen this step, addressed on the global grid anchored at the scene
/// bounds' minimum corner.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LocalGrid {
    pub delta: f64,
    pub nx: usize,
    pub ny: usize,
    pub cells: Vec<(Cell, CellKnowledge)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub robot: usize,
    pub pose: Pose<f64>,
    pub lin_vel: f64,
    pub ang_vel: f64,
    pub mode: Mode,
    pub carrying: Option<String>,
    pub grasp_timer: f64,
    /// `(x, y, theta, lin_vel)` for up to three robots, own robot first,
    /// zero padded.
    pub proprioception: [f64; 12],
    pub others: Vec<Pose<f64>>,
    pub movers: Vec<Rect<f64>>,
    pub visible_objects: Vec<VisibleObject>,
    pub local_grid: LocalGrid,
    pub task_status: Vec<TaskEntry>,
    pub time: f64,
    pub step: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SenseOptions {
    pub local_grid: bool,
}

impl Default for SenseOptions {
    fn default() -> Self {
        SenseOptions { local_grid: true }
    }
}

pub fn sense(state: &SimState, robot: usize) -> Result<Observation, SimError> {
    sense_with(state, robot, SenseOptions::default())
}

pub fn sense_with(
    state: &SimState,
    robot: usize,
    opts: SenseOptions,
) -> Result<Observation, SimError> {
    let me = state
        .robots()
        .get(robot)
        .ok_or(SimError::NoSuchRobot(robot))?;
    let scene = state.scene();
    let range = state.robot_spec().sensor_range;
    let eye = me.pose.position();
    let statics = state.statics();

    let mut proprioception = [0.0; 12];
    let order = std::iter::once(robot).chain((0..state.robots().len()).filter(|&j| j != robot));
    for (slot, j) in order.take(3).enumerate() {
        let r = &state.robots()[j];
        proprioception[slot * 4..slot * 4 + 4].copy_from_slice(&[
            r.pose.x,
            r.pose.y,
            r.pose.theta,
            r.lin_vel,
        ]);
    }

    let visible = |p: Vec2<f64>| eye.distance(p) <= range && statics.line_of_sight(eye, p);
    let mut visible_objects = Vec::new();
    for (k, t) in scene.sweep_targets.iter().enumerate() {
        if state.sweep_status[k] == TargetStatus::Pending && visible(t.position) {
            visible_objects.push(VisibleObject {
                id: t.id.clone(),
                kind: ObjectKind::Sweep,
                position: t.position,
                distance: eye.distance(t.position),
            });
        }
    }
    for (k, t) in scene.grasp_targets.iter().enumerate() {
        if state.grasp_status[k] == TargetStatus::Pending
            && state.carried_by[k].is_none()
            && visible(t.position)
        {
            visible_objects.push(VisibleObject {
                id: t.id.clone(),
                kind: ObjectKind::Grasp,
                position: t.position,
                distance: eye.distance(t.position),
            });
        }
    }

    let task_status = scene
        .sweep_targets
        .iter()
        .zip(state.sweep_status.iter())
        .map(|(t, s)| TaskEntry {
            id: t.id.clone(),
            kind: ObjectKind::Sweep,
            position: t.position,
            completed: *s == TargetStatus::Completed,
        })
        .chain(
            scene
                .grasp_targets
                .iter()
                .zip(state.grasp_status.iter())
                .map(|(t, s)| TaskEntry {
                    id: t.id.clone(),
                    kind: ObjectKind::Grasp,
                    position: t.position,
                    completed: *s == TargetStatus::Completed,
                }),
        )
        .collect();

    let movers = state
        .mover_rects(state.clock())
        .into_iter()
        .filter(|r| visible(r.center()))
        .collect();
    let others = (0..state.robots().len())
        .filter(|&j| j != robot)
        .map(|j| state.robots()[j].pose)
        .collect();

    let local_grid = if opts.local_grid {
        local_patch(state, eye)
    } else {
        LocalGrid::default()
    };

    Ok(Observation {
        robot,
        pose: me.pose,
        lin_vel: me.lin_vel,
        ang_vel: me.ang_vel,
        mode: me.mode,
        carrying: me.carrying.clone(),
        grasp_timer: me.grasp_timer,
        proprioception,
        others,
        movers,
        visible_objects,
        local_grid,
        task_status,
        time: state.clock(),
        step: state.tau(),
    })
}

fn local_patch(state: &SimState, eye: Vec2<f64>) -> LocalGrid {
    let b = state.scene().bounds;
    let d = GRID_DELTA;
    let nx = ((b.width() / d) + 0.5 - 1e-9).floor() as usize;
    let ny = ((b.height() / d) + 0.5 - 1e-9).floor() as usize;
    let lo = |v: f64, o: f64| (((v - LOCAL_RADIUS - o) / d).floor().max(0.0)) as usize;
    let hi = |v: f64, o: f64, n: usize| ((((v + LOCAL_RADIUS - o) / d).ceil()) as usize).min(n);
    let (x0, x1) = (lo(eye.x, b.min.x), hi(eye.x, b.min.x, nx));
    let (y0, y1) = (lo(eye.y, b.min.y), hi(eye.y, b.min.y, ny));
    let mut cells = Vec::new();
    for j in y0..y1 {
        for i in x0..x1 {
            let c = Vec2::new(
                b.min.x + (i as f64 + 0.5) * d,
                b.min.y + (j as f64 + 0.5) * d,
            );
            if c.distance(eye) > LOCAL_RADIUS || !state.statics().line_of_sight(eye, c) {
                continue;
            }
            let k = if state.free_cells[j * nx + i] {
                CellKnowledge::Free
            } else {
                CellKnowledge::Occupied
            };
            cells.push(((i, j), k));
        }
    }
    LocalGrid {
        delta: d,
        nx,
        ny,
        cells,
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::sim::DT_CTRL;
    use crate::world::{SceneSpec, Shape, StaticObstacle, SweepTarget};

    fn target(id: &str, x: f64, y: f64) -> SweepTarget {
        SweepTarget {
            id: id.into(),
            position: Vec2::new(x, y),
            radius: 0.02,
            mass: 0.02,
            status: TargetStatus::Pending,
        }
    }

    #[test]
    fn visibility_and_occlusion() {
        let mut s = SceneSpec::empty(
            "v",
            Rect::from_xywh(0.0, 0.0, 10.0, 10.0),
            Pose::new(1.0, 5.0, 0.0),
        );
        s.sweep_targets.push(target("open", 4.0, 5.0));
        s.sweep_targets.push(target("hidden", 4.0, 8.0));
        s.obstacles.push(StaticObstacle {
            id: "wall".into(),
            shape: Shape::Rect(Rect::from_xywh(2.0, 6.0, 0.2, 3.5)),
            material_tag: String::new(),
        });
        let st = SimState::new(Arc::new(s), &[Pose::new(1.0, 5.0, 0.0)], DT_CTRL).unwrap();
        let obs = sense(&st, 0).unwrap();
        let ids: Vec<_> = obs.visible_objects.iter().map(|o| o.id.as_str()).collect();
        assert_eq!(ids, vec!["open"]);
        assert_eq!(obs.task_status.len(), 2);
        assert_eq!(obs.proprioception[0], 1.0);
        assert!(obs
            .local_grid
            .cells
            .iter()
            .any(|(_, k)| *k == CellKnowledge::Occupied));
    }
}
