use crate::world::TargetStatus;

use super::{Event, EventKind, Mode, SimError, SimState, TargetRef, GRASP_DURATION, STILL_SPEED};

impl SimState {
    /// Completes every pending sweep target under robot `i`'s brush strip
    /// and returns `(robot, object id)` pairs.
    pub(crate) fn collect_swept(&mut self, i: usize) -> Vec<(usize, String)> {
        let strip = self.robot_spec().sweep_strip_local();
        let pose = self.robots[i].pose;
        let mut out = Vec::new();
        for (k, t) in self.scene().sweep_targets.iter().enumerate() {
            if self.sweep_status[k] == TargetStatus::Pending
                && strip.contains(pose.to_local(t.position))
            {
                out.push((i, t.id.clone()));
            }
        }
        for (_, id) in &out {
            if let Some(TargetRef::Sweep(k)) = self.ids.get(id) {
                self.sweep_status[*k] = TargetStatus::Completed;
            }
        }
        out
    }

    /// Sweeps at the current pose. No-op unless robot `i` is in sweep mode.
    pub fn apply_sweep(&mut self, i: usize) -> Result<Vec<Event>, SimError> {
        if i >= self.robots.len() {
            return Err(SimError::NoSuchRobot(i));
        }
        if self.robots[i].mode != Mode::Sweep {
            return Ok(Vec::new());
        }
        let swept = self.collect_swept(i);
        Ok(swept
            .into_iter()
            .map(|(r, id)| Event {
                time: self.clock(),
                step: self.tau(),
                kind: EventKind::SweepSuccess,
                robot: Some(r),
                object: Some(id),
            })
            .collect())
    }

    fn try_deposit(&mut self, i: usize) -> Vec<Event> {
        let Some(id) = self.robots[i].carrying.clone() else {
            return Vec::new();
        };
        let pos = self.robots[i].pose.position();
        let scene = self.scene_arc();
        let inside = scene.collection_zones().next().is_none()
            || scene.collection_zones().any(|z| z.region.contains(pos));
        if !inside {
            return Vec::new();
        }
        if let Some(TargetRef::Grasp(k)) = self.ids.get(&id).copied() {
            self.grasp_status[k] = TargetStatus::Completed;
            self.carried_by[k] = None;
        }
        self.robots[i].carrying = None;
        let mk = |kind| Event {
            time: self.clock(),
            step: self.tau(),
            kind,
            robot: Some(i),
            object: Some(id.clone()),
        };
        vec![mk(EventKind::Deposit), mk(EventKind::GraspSuccess)]
    }

    /// One control period of the grasp primitive for robot `i`.
    ///
    /// A carried object is deposited when the robot stands in a collection
    /// zone (anywhere if the scene has none). Otherwise a stationary robot
    /// within reach of `target` runs the grasp timer; motion cancels it.
    pub fn apply_grasp(&mut self, i: usize, target: Option<&str>) -> Result<Vec<Event>, SimError> {
        if i >= self.robots.len() {
            return Err(SimError::NoSuchRobot(i));
        }
        if self.robots[i].mode != Mode::Grasp {
            return Err(SimError::WrongMode(i));
        }
        if let Some(c) = self.robots[i].carrying.clone() {
            let ev = self.try_deposit(i);
            if ev.is_empty() && target.is_some_and(|t| t != c) {
                return Err(SimError::AlreadyCarrying(c));
            }
            return Ok(ev);
        }
        let Some(id) = target else {
            self.robots[i].grasp_timer = 0.0;
            self.robots[i].grasp_target = None;
            return Ok(Vec::new());
        };
        let k = match self.ids.get(id) {
            Some(TargetRef::Grasp(k)) => *k,
            _ => return Err(SimError::UnknownTarget(id.to_string())),
        };
        if self.grasp_status[k] != TargetStatus::Pending || self.carried_by[k].is_some() {
            return Err(SimError::NotPending(id.to_string()));
        }
        let robot = &self.robots[i];
        let reach = self.robot_spec().arm_reach;
        if robot
            .pose
            .position()
            .distance(self.scene().grasp_targets[k].position)
            > reach
        {
            let r = &mut self.robots[i];
            r.grasp_timer = 0.0;
            r.grasp_target = None;
            return Err(SimError::OutOfReach(id.to_string()));
        }
        let dt = self.dt();
        let r = &mut self.robots[i];
        if r.lin_vel.abs() >= STILL_SPEED {
            r.grasp_timer = 0.0;
            r.grasp_target = Some(id.to_string());
            return Ok(Vec::new());
        }
        if r.grasp_target.as_deref() != Some(id) || r.grasp_timer <= 0.0 {
            r.grasp_target = Some(id.to_string());
            r.grasp_timer = GRASP_DURATION;
        }
        r.grasp_timer -= dt;
        if r.grasp_timer > 1e-9 {
            return Ok(Vec::new());
        }
        r.grasp_timer = 0.0;
        r.grasp_target = None;
        r.carrying = Some(id.to_string());
        self.carried_by[k] = Some(i);
        Ok(self.try_deposit(i))
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::geometry::{Pose, Rect, Vec2};
    use crate::sim::{Action, DT_CTRL};
    use crate::world::{Elevation, GraspTarget, SceneSpec, SweepTarget};

    fn scene() -> Arc<SceneSpec> {
        let mut s = SceneSpec::empty(
            "g",
            Rect::from_xywh(0.0, 0.0, 6.0, 6.0),
            Pose::new(3.0, 3.0, 0.0),
        );
        s.grasp_targets.push(GraspTarget {
            id: "near".into(),
            position: Vec2::new(3.5, 3.0),
            radius: 0.04,
            mass: 0.3,
            elevation: Elevation::Floor,
            status: TargetStatus::Pending,
        });
        s.grasp_targets.push(GraspTarget {
            id: "far".into(),
            position: Vec2::new(4.0, 3.0),
            radius: 0.04,
            mass: 0.3,
            elevation: Elevation::Floor,
            status: TargetStatus::Pending,
        });
        s.sweep_targets.push(SweepTarget {
            id: "ahead".into(),
            position: Vec2::new(3.255, 3.0),
            radius: 0.02,
            mass: 0.02,
            status: TargetStatus::Pending,
        });
        s.sweep_targets.push(SweepTarget {
            id: "side".into(),
            position: Vec2::new(3.255, 3.3),
            radius: 0.02,
            mass: 0.02,
            status: TargetStatus::Pending,
        });
        Arc::new(s)
    }

    #[test]
    fn strip_catches_centred_target_only() {
        let mut s = SimState::new(scene(), &[Pose::new(3.0, 3.0, 0.0)], DT_CTRL).unwrap();
        s.robots[0].mode = Mode::Sweep;
        let ev = s.apply_sweep(0).unwrap();
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].object.as_deref(), Some("ahead"));
    }

    #[test]
    fn grasp_after_three_still_seconds() {
        let mut s = SimState::new(scene(), &[Pose::new(3.0, 3.0, 0.0)], DT_CTRL).unwrap();
        let mut successes = 0;
        for k in 0..30 {
            let ev = s.step(&[Action::grasp("near")]).unwrap();
            successes += ev
                .iter()
                .filter(|e| e.kind == EventKind::GraspSuccess)
                .count();
            if k < 29 {
                assert!(
                    s.robots()[0].carrying.is_none(),
                    "carried too early at step {k}"
                );
            }
        }
        assert_eq!(successes, 1);
        assert_eq!(s.grasp_done(), 1);
    }

    #[test]
    fn out_of_reach_and_already_carrying() {
        let mut s = SimState::new(scene(), &[Pose::new(3.0, 3.0, 0.0)], DT_CTRL).unwrap();
        s.robots[0].mode = Mode::Grasp;
        assert!(matches!(
            s.apply_grasp(0, Some("far")),
            Err(SimError::OutOfReach(_))
        ));
        s.robots[0].carrying = Some("near".into());
        s.carried_by[0] = Some(0);
        let zone = crate::world::TaskZone {
            id: "bin".into(),
            kind: crate::world::ZoneKind::Collection,
            region: Rect::from_xywh(0.0, 0.0, 0.5, 0.5),
        };
        let mut with_zone = (*s.scene_arc()).clone();
        with_zone.zones.push(zone);
        let mut s2 =
            SimState::new(Arc::new(with_zone), &[Pose::new(3.0, 3.0, 0.0)], DT_CTRL).unwrap();
        s2.robots[0].mode = Mode::Grasp;
        s2.robots[0].carrying = Some("near".into());
        assert!(matches!(
            s2.apply_grasp(0, Some("far")),
            Err(SimError::AlreadyCarrying(_))
        ));
    }
}
