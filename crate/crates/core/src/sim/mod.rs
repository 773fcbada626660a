//! Deterministic discrete-time simulator: unicycle kinematics with contact
//! blocking, sweep and grasp interactions, moving obstacles and idealized
//! observations.

pub mod collision;
pub mod interact;
pub mod log;
pub mod sense;

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::geometry::{convex_overlap, Pose, Rect};
use crate::world::{RobotSpec, SceneSpec, TargetStatus, ZoneKind};

pub use collision::{check_collision, check_collision_with, StaticWorld, CONTACT_TOL};
pub use log::{LogError, PoseRecord, TrajectoryLog};
pub use sense::{
    sense, sense_with, CellKnowledge, LocalGrid, ObjectKind, Observation, SenseOptions, TaskEntry,
    VisibleObject,
};

/// Control period in seconds.
pub const DT_CTRL: f64 = 0.1;
/// Physics substeps per control step (1/60 s each at the default period).
pub const SUBSTEPS: usize = 6;
/// Seconds a grasp takes once the robot holds still within reach.
pub const GRASP_DURATION: f64 = 3.0;
/// Linear speed below which the robot counts as stationary.
pub const STILL_SPEED: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Sweep,
    Grasp,
    Navigate,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Sweep => "sweep",
            Mode::Grasp => "grasp",
            Mode::Navigate => "navigate",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "sweep" => Some(Mode::Sweep),
            "grasp" => Some(Mode::Grasp),
            "navigate" => Some(Mode::Navigate),
            _ => None,
        }
    }
}

/// One decision: discrete mode, normalised velocity command and optional
/// manipulation target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub mode: Mode,
    pub nav: [f64; 2],
    pub manip: Option<String>,
}

impl Action {
    pub fn new(mode: Mode, lin: f64, ang: f64) -> Self {
        Action {
            mode,
            nav: [lin, ang],
            manip: None,
        }
    }

    pub fn idle(mode: Mode) -> Self {
        Action::new(mode, 0.0, 0.0)
    }

    pub fn grasp(target: impl Into<String>) -> Self {
        Action {
            mode: Mode::Grasp,
            nav: [0.0, 0.0],
            manip: Some(target.into()),
        }
    }

    /// Copy with both nav components clamped to `[-1, 1]`; NaN maps to 0.
    pub fn clamped(&self) -> Action {
        let c = |v: f64| if v.is_nan() { 0.0 } else { v.clamp(-1.0, 1.0) };
        Action {
            mode: self.mode,
            nav: [c(self.nav[0]), c(self.nav[1])],
            manip: self.manip.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobotState {
    pub pose: Pose<f64>,
    pub lin_vel: f64,
    pub ang_vel: f64,
    pub mode: Mode,
    pub carrying: Option<String>,
    /// Seconds left on a running grasp; zero when idle.
    pub grasp_timer: f64,
    pub grasp_target: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    SweepSuccess,
    GraspSuccess,
    Deposit,
    Collision,
    Timeout,
    Completed,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::SweepSuccess => "sweep_success",
            EventKind::GraspSuccess => "grasp_success",
            EventKind::Deposit => "deposit",
            EventKind::Collision => "collision",
            EventKind::Timeout => "timeout",
            EventKind::Completed => "completed",
        }
    }

    pub fn parse(s: &str) -> Option<EventKind> {
        Some(match s {
            "sweep_success" => EventKind::SweepSuccess,
            "grasp_success" => EventKind::GraspSuccess,
            "deposit" => EventKind::Deposit,
            "collision" => EventKind::Collision,
            "timeout" => EventKind::Timeout,
            "completed" => EventKind::Completed,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub step: u64,
    pub kind: EventKind,
    pub robot: Option<usize>,
    pub object: Option<String>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("step called on a terminated episode")]
    TerminalState,
    #[error("expected {expected} actions, got {got}")]
    ActionCount { expected: usize, got: usize },
    #[error("no robot with index {0}")]
    NoSuchRobot(usize),
    #[error("unknown target `{0}`")]
    UnknownTarget(String),
    #[error("target `{0}` is out of reach")]
    OutOfReach(String),
    #[error("robot already carrying `{0}`")]
    AlreadyCarrying(String),
    #[error("target `{0}` is not pending")]
    NotPending(String),
    #[error("robot {0} not in grasp mode")]
    WrongMode(usize),
    #[error("spawn {0} is blocked")]
    BlockedSpawn(usize),
    #[error("control period must be positive")]
    BadTimeStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum TargetRef {
    Sweep(usize),
    Grasp(usize),
}

/// Mutable episode state.
#[derive(Debug, Clone)]
pub struct SimState {
    scene: Arc<SceneSpec>,
    robot_spec: RobotSpec,
    statics: StaticWorld,
    pub(crate) robots: Vec<RobotState>,
    pub(crate) sweep_status: Vec<TargetStatus>,
    pub(crate) grasp_status: Vec<TargetStatus>,
    pub(crate) carried_by: Vec<Option<usize>>,
    pub(crate) ids: HashMap<String, TargetRef>,
    pub(crate) free_cells: Arc<Vec<bool>>,
    tau: u64,
    dt: f64,
    terminal: bool,
}

impl SimState {
    pub fn new(scene: Arc<SceneSpec>, spawns: &[Pose<f64>], dt: f64) -> Result<Self, SimError> {
        if !(dt > 0.0) {
            return Err(SimError::BadTimeStep);
        }
        let robot_spec = RobotSpec::default();
        let statics = StaticWorld::new(&scene);
        for (i, p) in spawns.iter().enumerate() {
            if statics.penetrates(&robot_spec.footprint(p).corners()) {
                return Err(SimError::BlockedSpawn(i));
            }
        }
        let mut ids = HashMap::new();
        for (i, t) in scene.sweep_targets.iter().enumerate() {
            ids.insert(t.id.clone(), TargetRef::Sweep(i));
        }
        for (i, t) in scene.grasp_targets.iter().enumerate() {
            ids.insert(t.id.clone(), TargetRef::Grasp(i));
        }
        let robots = spawns
            .iter()
            .map(|&pose| RobotState {
                pose,
                lin_vel: 0.0,
                ang_vel: 0.0,
                mode: Mode::Navigate,
                carrying: None,
                grasp_timer: 0.0,
                grasp_target: None,
            })
            .collect();
        let free_cells = Arc::new(crate::world::free_mask(&scene, sense::GRID_DELTA));
        Ok(SimState {
            sweep_status: scene.sweep_targets.iter().map(|t| t.status).collect(),
            grasp_status: scene.grasp_targets.iter().map(|t| t.status).collect(),
            carried_by: vec![None; scene.grasp_targets.len()],
            scene,
            robot_spec,
            statics,
            robots,
            ids,
            free_cells,
            tau: 0,
            dt,
            terminal: false,
        })
    }

    pub fn scene(&self) -> &SceneSpec {
        &self.scene
    }

    pub fn scene_arc(&self) -> Arc<SceneSpec> {
        Arc::clone(&self.scene)
    }

    pub fn robot_spec(&self) -> &RobotSpec {
        &self.robot_spec
    }

    pub fn statics(&self) -> &StaticWorld {
        &self.statics
    }

    pub fn robots(&self) -> &[RobotState] {
        &self.robots
    }

    pub fn tau(&self) -> u64 {
        self.tau
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn clock(&self) -> f64 {
        self.tau as f64 * self.dt
    }

    pub fn is_terminal(&self) -> bool {
        self.terminal
    }

    /// Marks the episode finished; further steps fail.
    pub fn terminate(&mut self) {
        self.terminal = true;
    }

    pub fn sweep_status(&self) -> &[TargetStatus] {
        &self.sweep_status
    }

    pub fn grasp_status(&self) -> &[TargetStatus] {
        &self.grasp_status
    }

    pub fn sweep_done(&self) -> usize {
        self.sweep_status
            .iter()
            .filter(|s| **s == TargetStatus::Completed)
            .count()
    }

    pub fn grasp_done(&self) -> usize {
        self.grasp_status
            .iter()
            .filter(|s| **s == TargetStatus::Completed)
            .count()
    }

    /// Every target of both kinds completed.
    pub fn all_complete(&self) -> bool {
        self.sweep_done() == self.sweep_status.len() && self.grasp_done() == self.grasp_status.len()
    }

    pub fn mover_rects(&self, t: f64) -> Vec<Rect<f64>> {
        self.scene.movers.iter().map(|m| m.rect_at(t)).collect()
    }

    /// Moving bodies that block robot `i`: other robots and movers at `t`.
    fn dynamic_loops(&self, i: usize, t: f64) -> Vec<Vec<crate::geometry::Vec2<f64>>> {
        let mut out: Vec<_> = self
            .robots
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, r)| self.robot_spec.footprint(&r.pose).corners().to_vec())
            .collect();
        out.extend(
            self.scene
                .movers
                .iter()
                .map(|m| m.rect_at(t).corners().to_vec()),
        );
        out
    }

    fn integrate(&mut self, i: usize, lin: f64, ang: f64, h: f64, t_end: f64) {
        let cur = self.robots[i].pose;
        let mid = cur.theta + 0.5 * ang * h;
        let cand = Pose::new(
            cur.x + lin * h * mid.cos(),
            cur.y + lin * h * mid.sin(),
            cur.theta + ang * h,
        );
        let dyn_loops = self.dynamic_loops(i, t_end);
        let cur_fp = self.robot_spec.footprint(&cur).corners();
        let dyn_active = !dyn_loops.iter().any(|d| convex_overlap(&cur_fp, d));
        let blocked = |p: &Pose<f64>| {
            let fp = self.robot_spec.footprint(p).corners();
            self.statics.penetrates(&fp)
                || (dyn_active && dyn_loops.iter().any(|d| convex_overlap(&fp, d)))
        };
        let lerp = |f: f64| {
            Pose::new(
                cur.x + (cand.x - cur.x) * f,
                cur.y + (cand.y - cur.y) * f,
                cur.theta + (cand.theta - cur.theta) * f,
            )
        };
        let next = if !blocked(&cand) {
            cand
        } else {
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..24 {
                let m = 0.5 * (lo + hi);
                if blocked(&lerp(m)) {
                    hi = m;
                } else {
                    lo = m;
                }
            }
            lerp(lo)
        };
        self.robots[i].pose = next;
    }

    /// Contact indicator for robot `i` at the current pose.
    pub fn in_contact(&self, i: usize) -> bool {
        let fp = self.robot_spec.footprint(&self.robots[i].pose);
        let corners = fp.corners();
        if self.statics.in_contact(&corners, CONTACT_TOL) {
            return true;
        }
        let t = self.clock();
        if self
            .dynamic_loops(i, t)
            .iter()
            .any(|d| crate::geometry::convex_distance(&corners, d) <= CONTACT_TOL)
        {
            return true;
        }
        self.scene
            .zones
            .iter()
            .filter(|z| z.kind == ZoneKind::Restricted)
            .any(|z| convex_overlap(&corners, &z.region.corners()))
    }

    fn event(&self, kind: EventKind, robot: Option<usize>, object: Option<String>) -> Event {
        Event {
            time: self.clock(),
            step: self.tau,
            kind,
            robot,
            object,
        }
    }

    /// Advances one control period.
    pub fn step(&mut self, actions: &[Action]) -> Result<Vec<Event>, SimError> {
        if self.terminal {
            return Err(SimError::TerminalState);
        }
        if actions.len() != self.robots.len() {
            return Err(SimError::ActionCount {
                expected: self.robots.len(),
                got: actions.len(),
            });
        }
        let actions: Vec<Action> = actions.iter().map(Action::clamped).collect();
        let t0 = self.clock();
        let h = self.dt / SUBSTEPS as f64;
        for (r, a) in self.robots.iter_mut().zip(&actions) {
            if r.mode != a.mode || r.grasp_target != a.manip {
                r.grasp_timer = 0.0;
            }
            r.mode = a.mode;
            r.lin_vel = a.nav[0] * self.robot_spec.max_lin_vel;
            r.ang_vel = a.nav[1] * self.robot_spec.max_ang_vel;
        }
        let mut pending_sweeps = Vec::new();
        for k in 0..SUBSTEPS {
            let t_end = t0 + (k + 1) as f64 * h;
            for i in 0..self.robots.len() {
                let (lin, ang) = (self.robots[i].lin_vel, self.robots[i].ang_vel);
                if lin != 0.0 || ang != 0.0 {
                    self.integrate(i, lin, ang, h, t_end);
                }
                if self.robots[i].mode == Mode::Sweep {
                    pending_sweeps.extend(self.collect_swept(i));
                }
            }
        }
        self.tau += 1;
        let mut events = Vec::new();
        for (i, obj) in pending_sweeps {
            events.push(self.event(EventKind::SweepSuccess, Some(i), Some(obj)));
        }
        for (i, a) in actions.iter().enumerate() {
            if a.mode == Mode::Grasp {
                // errors only mean the request was not actionable this step
                if let Ok(mut ev) = self.apply_grasp(i, a.manip.as_deref()) {
                    events.append(&mut ev);
                }
            } else {
                self.robots[i].grasp_timer = 0.0;
                self.robots[i].grasp_target = None;
            }
        }
        for i in 0..self.robots.len() {
            if self.in_contact(i) {
                events.push(self.event(EventKind::Collision, Some(i), None));
            }
        }
        Ok(events)
    }

    /// Appends a protocol event (timeout, completion) stamped at the
    /// current clock.
    pub fn protocol_event(&self, kind: EventKind) -> Event {
        self.event(kind, None, None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;

    fn room() -> Arc<SceneSpec> {
        Arc::new(SceneSpec::empty(
            "r",
            Rect::from_xywh(0.0, 0.0, 10.0, 10.0),
            Pose::new(5.0, 5.0, 0.0),
        ))
    }

    #[test]
    fn full_forward_moves_five_centimetres() {
        let mut s = SimState::new(room(), &[Pose::new(5.0, 5.0, 0.0)], DT_CTRL).unwrap();
        let ev = s.step(&[Action::new(Mode::Navigate, 1.0, 0.0)]).unwrap();
        assert!(ev.is_empty());
        assert!((s.robots()[0].pose.x - 5.05).abs() < 1e-12);
        assert_eq!(s.tau(), 1);
    }

    #[test]
    fn zero_command_is_identity() {
        let mut s = SimState::new(room(), &[Pose::new(5.0, 5.0, 0.4)], DT_CTRL).unwrap();
        let ev = s.step(&[Action::idle(Mode::Sweep)]).unwrap();
        assert!(ev.is_empty());
        assert_eq!(s.robots()[0].pose, Pose::new(5.0, 5.0, 0.4));
    }

    #[test]
    fn nav_is_clamped() {
        let mut s = SimState::new(room(), &[Pose::new(5.0, 5.0, 0.0)], DT_CTRL).unwrap();
        s.step(&[Action::new(Mode::Navigate, 7.0, f64::NAN)])
            .unwrap();
        assert!((s.robots()[0].pose.position().distance(Vec2::new(5.05, 5.0))) < 1e-12);
    }

    #[test]
    fn terminal_state_rejects_step() {
        let mut s = SimState::new(room(), &[Pose::new(5.0, 5.0, 0.0)], DT_CTRL).unwrap();
        s.terminate();
        assert_eq!(
            s.step(&[Action::idle(Mode::Sweep)]),
            Err(SimError::TerminalState)
        );
    }
}
