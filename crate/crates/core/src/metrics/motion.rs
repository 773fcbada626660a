//! Path length and finite-difference kinematics, generic over the scalar.

use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;
use crate::scalar::Scalar;

use super::MetricError;

/// Length of the polyline through `pts`.
pub fn path_length<T: Scalar>(pts: &[Vec2<T>]) -> T {
    pts.windows(2)
        .fold(T::zero(), |acc, w| acc + w[0].distance(w[1]))
}

/// Mean speed, acceleration and jerk magnitudes of one sampled track.
/// Acceleration needs three samples and jerk four; shorter tracks leave
/// them unset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kinematics<T: Scalar> {
    pub vel: T,
    pub acc: Option<T>,
    pub jerk: Option<T>,
}

fn mean<T: Scalar>(v: impl Iterator<Item = T>) -> Option<T> {
    let (s, n) = v.fold((T::zero(), 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| s / T::from_usize(n).expect("count fits the scalar"))
}

pub fn kinematics<T: Scalar>(pts: &[Vec2<T>], dt: T) -> Result<Kinematics<T>, MetricError> {
    if pts.len() < 2 {
        return Err(MetricError::TooShort {
            needed: 2,
            got: pts.len(),
        });
    }
    let d: Vec<Vec2<T>> = pts.windows(2).map(|w| w[1] - w[0]).collect();
    // second differences, before scaling, so a constant step is exactly zero
    let dd: Vec<Vec2<T>> = d.windows(2).map(|w| w[1] - w[0]).collect();
    let ddd = dd.windows(2).map(|w| w[1] - w[0]);
    let dt2 = dt * dt;
    Ok(Kinematics {
        vel: mean(d.iter().map(|v| v.norm() / dt)).expect("two poses give one difference"),
        acc: mean(dd.iter().map(|a| a.norm() / dt2)),
        jerk: mean(ddd.map(|j| j.norm() / (dt2 * dt))),
    })
}

/// Per-track statistics averaged across tracks. A statistic is averaged
/// over the tracks long enough to have it.
pub fn kinematics_multi<T: Scalar>(
    tracks: &[Vec<Vec2<T>>],
    dt: T,
) -> Result<Kinematics<T>, MetricError> {
    let per: Vec<Kinematics<T>> = tracks
        .iter()
        .map(|t| kinematics(t, dt))
        .collect::<Result<_, _>>()?;
    if per.is_empty() {
        return Err(MetricError::TooShort { needed: 2, got: 0 });
    }
    Ok(Kinematics {
        vel: mean(per.iter().map(|k| k.vel)).expect("non-empty"),
        acc: mean(per.iter().filter_map(|k| k.acc)),
        jerk: mean(per.iter().filter_map(|k| k.jerk)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_step_is_exactly_still() {
        let pts: Vec<Vec2<f32>> = (0..20)
            .map(|k| Vec2::new(0.03125 * k as f32, 1.0))
            .collect();
        let k = kinematics(&pts, 0.1f32).unwrap();
        assert_eq!(k.acc, Some(0.0));
        assert_eq!(k.jerk, Some(0.0));
        assert!((k.vel - 0.3125).abs() < 1e-5);
    }

    #[test]
    fn three_poses_have_no_jerk() {
        let pts = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(3.0, 0.0),
        ];
        let k = kinematics(&pts, 1.0).unwrap();
        assert_eq!(k.acc, Some(1.0));
        assert_eq!(k.jerk, None);
        assert!(matches!(
            kinematics(&pts[..1], 1.0),
            Err(MetricError::TooShort { needed: 2, got: 1 })
        ));
    }

    #[test]
    fn polyline_length() {
        let pts = [
            Vec2::new(0.0, 0.0),
            Vec2::new(3.0, 4.0),
            Vec2::new(3.0, 0.0),
        ];
        assert_eq!(path_length(&pts), 9.0);
    }
}
