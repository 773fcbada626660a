use std::collections::BTreeMap;

use crate::sim::{Event, EventKind, TrajectoryLog};

/// Contact steps and contact intervals.
///
/// Each collision event marks one robot in contact at one control step. The
/// first number counts those robot-steps; the second counts maximal runs of
/// consecutive steps per robot.
pub fn collision_count(events: &[Event]) -> (usize, usize) {
    let mut steps: BTreeMap<Option<usize>, Vec<u64>> = BTreeMap::new();
    for e in events.iter().filter(|e| e.kind == EventKind::Collision) {
        steps.entry(e.robot).or_default().push(e.step);
    }
    let mut total = 0;
    let mut runs = 0;
    for v in steps.values_mut() {
        v.sort_unstable();
        v.dedup();
        total += v.len();
        runs += v.windows(2).filter(|w| w[1] != w[0] + 1).count() + usize::from(!v.is_empty());
    }
    (total, runs)
}

/// Mean recorded decision time and simulated episode duration.
pub fn timing(log: &TrajectoryLog) -> (f64, f64) {
    let times: Vec<f64> = log.poses.iter().filter_map(|p| p.compute_s).collect();
    let ct = if times.is_empty() {
        0.0
    } else {
        times.iter().sum::<f64>() / times.len() as f64
    };
    let ft = match (log.poses.first(), log.poses.last()) {
        (Some(a), Some(b)) => b.time - a.time,
        _ => 0.0,
    };
    (ct, ft)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hit(step: u64) -> Event {
        Event {
            time: step as f64 * 0.1,
            step,
            kind: EventKind::Collision,
            robot: Some(0),
            object: None,
        }
    }

    #[test]
    fn runs_and_steps() {
        let five: Vec<_> = (3..8).map(hit).collect();
        assert_eq!(collision_count(&five), (5, 1));
        assert_eq!(collision_count(&[]), (0, 0));
        let alt: Vec<_> = [0, 2, 4].into_iter().map(hit).collect();
        assert_eq!(collision_count(&alt), (3, 3));
    }
}
