use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::sim::{Event, EventKind};
use crate::world::SceneSpec;

use super::MetricError;

/// How a task kind with no targets enters the weighted completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VacuousMode {
    /// An empty kind counts as fully completed.
    #[default]
    One,
    /// An empty kind takes the other kind's completion, so all weight falls
    /// on the kind that has targets.
    Renormalize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskScore {
    pub tcr: f64,
    pub tcr_sweep: f64,
    pub tcr_grasp: f64,
    /// At least one kind had no targets.
    pub vacuous: bool,
    pub sweep_success: usize,
    pub grasp_success: usize,
    pub sweep_total: usize,
    pub grasp_total: usize,
}

fn check_weights(alpha: f64, beta: f64) -> Result<(), MetricError> {
    let ok = alpha >= 0.0 && beta >= 0.0 && (alpha + beta - 1.0).abs() <= 1e-9;
    if ok {
        Ok(())
    } else {
        Err(MetricError::BadWeights { alpha, beta })
    }
}

/// Weighted completion from the two per-kind fractions.
pub fn tcr_from_parts(
    tcr_sweep: f64,
    tcr_grasp: f64,
    alpha: f64,
    beta: f64,
) -> Result<f64, MetricError> {
    check_weights(alpha, beta)?;
    Ok(alpha * tcr_sweep + beta * tcr_grasp)
}

/// Distinct scene objects named by events of `kind`.
fn successes(events: &[Event], kind: EventKind, ids: &HashSet<&str>) -> usize {
    events
        .iter()
        .filter(|e| e.kind == kind)
        .filter_map(|e| e.object.as_deref())
        .filter(|id| ids.contains(id))
        .collect::<HashSet<_>>()
        .len()
}

pub fn task_completion(
    events: &[Event],
    scene: &SceneSpec,
    alpha: f64,
    beta: f64,
    mode: VacuousMode,
) -> Result<TaskScore, MetricError> {
    check_weights(alpha, beta)?;
    let sweep_ids: HashSet<&str> = scene.sweep_targets.iter().map(|t| t.id.as_str()).collect();
    let grasp_ids: HashSet<&str> = scene.grasp_targets.iter().map(|t| t.id.as_str()).collect();
    let ns = successes(events, EventKind::SweepSuccess, &sweep_ids);
    let ng = successes(events, EventKind::GraspSuccess, &grasp_ids);
    let (ts, tg) = (sweep_ids.len(), grasp_ids.len());
    let frac = |n: usize, t: usize| (t > 0).then(|| n as f64 / t as f64);
    let (fs, fg) = match (frac(ns, ts), frac(ng, tg), mode) {
        (Some(s), Some(g), _) => (s, g),
        (None, None, _) => (1.0, 1.0),
        (None, Some(g), VacuousMode::One) => (1.0, g),
        (Some(s), None, VacuousMode::One) => (s, 1.0),
        (None, Some(g), VacuousMode::Renormalize) => (g, g),
        (Some(s), None, VacuousMode::Renormalize) => (s, s),
    };
    Ok(TaskScore {
        tcr: alpha * fs + beta * fg,
        tcr_sweep: fs,
        tcr_grasp: fg,
        vacuous: ts == 0 || tg == 0,
        sweep_success: ns,
        grasp_success: ng,
        sweep_total: ts,
        grasp_total: tg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Pose, Rect, Vec2};
    use crate::world::{SweepTarget, TargetStatus};

    fn ev(kind: EventKind, obj: &str) -> Event {
        Event {
            time: 0.0,
            step: 0,
            kind,
            robot: Some(0),
            object: Some(obj.into()),
        }
    }

    #[test]
    fn weights_must_sum_to_one() {
        assert!(matches!(
            tcr_from_parts(0.3, 0.0, 0.6, 0.6),
            Err(MetricError::BadWeights { .. })
        ));
        assert!((tcr_from_parts(0.3, 0.0, 0.5, 0.5).unwrap() - 0.15).abs() < 1e-12);
    }

    #[test]
    fn duplicate_and_foreign_events_ignored() {
        let mut s = SceneSpec::empty(
            "t",
            Rect::from_xywh(0.0, 0.0, 4.0, 4.0),
            Pose::new(1.0, 1.0, 0.0),
        );
        for k in 0..4 {
            s.sweep_targets.push(SweepTarget {
                id: format!("d{k}"),
                position: Vec2::new(2.0, 0.5 + k as f64 * 0.5),
                radius: 0.02,
                mass: 0.02,
                status: TargetStatus::Pending,
            });
        }
        let events = [
            ev(EventKind::SweepSuccess, "d0"),
            ev(EventKind::SweepSuccess, "d0"),
            ev(EventKind::SweepSuccess, "zz"),
        ];
        let one = task_completion(&events, &s, 0.5, 0.5, VacuousMode::One).unwrap();
        assert_eq!(one.sweep_success, 1);
        assert!((one.tcr - (0.5 * 0.25 + 0.5)).abs() < 1e-12);
        assert!(one.vacuous);
        let ren = task_completion(&events, &s, 0.5, 0.5, VacuousMode::Renormalize).unwrap();
        assert!((ren.tcr - 0.25).abs() < 1e-12);
    }
}
