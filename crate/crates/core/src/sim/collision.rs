use crate::geometry::{
    aabb_of, convex_distance, convex_overlap, segment_crosses, OrientedRect, Pose, Rect, Vec2,
};
use crate::world::{RobotSpec, SceneSpec};

/// Contact tolerance: shapes closer than this are in contact.
pub const CONTACT_TOL: f64 = 0.01;

/// Static geometry of a scene with cached vertex loops and boxes.
#[derive(Debug, Clone)]
pub struct StaticWorld {
    pub bounds: Rect<f64>,
    polys: Vec<(Rect<f64>, Vec<Vec2<f64>>)>,
}

fn boxes_touch(a: &Rect<f64>, b: &Rect<f64>, margin: f64) -> bool {
    a.min.x <= b.max.x + margin
        && b.min.x <= a.max.x + margin
        && a.min.y <= b.max.y + margin
        && b.min.y <= a.max.y + margin
}

impl StaticWorld {
    pub fn new(scene: &SceneSpec) -> Self {
        let polys = scene
            .obstacles
            .iter()
            .map(|o| {
                let v = o.shape.vertices();
                (aabb_of(&v), v)
            })
            .collect();
        StaticWorld {
            bounds: scene.bounds,
            polys,
        }
    }

    pub fn polygons(&self) -> impl Iterator<Item = &[Vec2<f64>]> {
        self.polys.iter().map(|(_, v)| v.as_slice())
    }

    /// True when the convex loop reaches into an obstacle interior or past
    /// the bounds. Touching is allowed.
    pub fn penetrates(&self, loop_: &[Vec2<f64>]) -> bool {
        let bb = aabb_of(loop_);
        if !self.bounds.contains_rect(&bb, 0.0) {
            return true;
        }
        self.polys
            .iter()
            .any(|(pb, v)| boxes_touch(&bb, pb, 0.0) && convex_overlap(loop_, v))
    }

    /// True when the loop is within `tol` of an obstacle or the boundary.
    pub fn in_contact(&self, loop_: &[Vec2<f64>], tol: f64) -> bool {
        let bb = aabb_of(loop_);
        let inner = self.bounds.expand(-tol);
        if !inner.contains_rect(&bb, 0.0) {
            return true;
        }
        self.polys
            .iter()
            .any(|(pb, v)| boxes_touch(&bb, pb, tol) && convex_distance(loop_, v) <= tol)
    }

    /// Distance from a point to the nearest obstacle or wall.
    pub fn clearance(&self, p: Vec2<f64>) -> f64 {
        let b = &self.bounds;
        let walls = (p.x - b.min.x)
            .min(b.max.x - p.x)
            .min(p.y - b.min.y)
            .min(b.max.y - p.y);
        self.polys.iter().fold(walls, |acc, (pb, v)| {
            let dx = (pb.min.x - p.x).max(p.x - pb.max.x).max(0.0);
            let dy = (pb.min.y - p.y).max(p.y - pb.max.y).max(0.0);
            if dx.hypot(dy) >= acc {
                return acc;
            }
            acc.min(polygon_point_distance(v, p))
        })
    }

    /// Line of sight between two points. Obstacles containing `to` are
    /// skipped so that objects resting on a surface stay visible.
    pub fn line_of_sight(&self, from: Vec2<f64>, to: Vec2<f64>) -> bool {
        let seg = aabb_of(&[from, to]);
        self.polys.iter().all(|(pb, v)| {
            if !boxes_touch(&seg, pb, 0.0) {
                return true;
            }
            if pb.contains(to) && point_in_loop(v, to) {
                return true;
            }
            !segment_crosses(from, to, v, 1e-9)
        })
    }

    /// Minimum distance from the segment to any obstacle or wall.
    pub fn segment_clearance(&self, a: Vec2<f64>, b: Vec2<f64>) -> f64 {
        let bd = &self.bounds;
        let walls = [a, b]
            .iter()
            .map(|p| {
                (p.x - bd.min.x)
                    .min(bd.max.x - p.x)
                    .min(p.y - bd.min.y)
                    .min(bd.max.y - p.y)
            })
            .fold(f64::INFINITY, f64::min);
        let seg = [a, b];
        self.polys
            .iter()
            .fold(walls, |acc, (_, v)| acc.min(convex_distance(&seg, v)))
    }
}

fn point_in_loop(v: &[Vec2<f64>], p: Vec2<f64>) -> bool {
    let n = v.len();
    (0..n).all(|i| (v[(i + 1) % n] - v[i]).cross(p - v[i]) >= 0.0)
}

fn polygon_point_distance(v: &[Vec2<f64>], p: Vec2<f64>) -> f64 {
    if point_in_loop(v, p) {
        return 0.0;
    }
    let n = v.len();
    (0..n)
        .map(|i| crate::geometry::point_segment_distance(p, v[i], v[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

/// Footprint test against static obstacles and the boundary with the default
/// robot and contact tolerance.
pub fn check_collision(pose: &Pose<f64>, scene: &SceneSpec) -> bool {
    check_collision_with(&RobotSpec::default(), pose, scene, CONTACT_TOL)
}

pub fn check_collision_with(
    robot: &RobotSpec,
    pose: &Pose<f64>,
    scene: &SceneSpec,
    tol: f64,
) -> bool {
    let fp = robot.footprint(pose).corners();
    StaticWorld::new(scene).in_contact(&fp, tol)
}

/// Oriented footprint rectangles within `tol` of each other.
pub fn footprints_touch(a: &OrientedRect<f64>, b: &OrientedRect<f64>, tol: f64) -> bool {
    convex_distance(&a.corners(), &b.corners()) <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{Shape, StaticObstacle};

    fn scene_with_box() -> SceneSpec {
        let mut s = SceneSpec::empty(
            "t",
            Rect::from_xywh(0.0, 0.0, 10.0, 10.0),
            Pose::new(1.0, 1.0, 0.0),
        );
        s.obstacles.push(StaticObstacle {
            id: "b".into(),
            shape: Shape::Rect(Rect::from_xywh(5.0, 5.0, 1.0, 1.0)),
            material_tag: String::new(),
        });
        s
    }

    #[test]
    fn far_from_everything() {
        assert!(!check_collision(
            &Pose::new(2.5, 2.5, 0.3),
            &scene_with_box()
        ));
    }

    #[test]
    fn corner_overlap() {
        // footprint corner reaches 0.05 m into the box corner
        let p = Pose::new(5.0 - 0.205 + 0.05, 5.0 - 0.235 + 0.05, 0.0);
        assert!(check_collision(&p, &scene_with_box()));
    }

    #[test]
    fn tolerance_band() {
        let s = scene_with_box();
        let gap = |g: f64| Pose::new(5.0 - 0.205 - g, 5.5, 0.0);
        assert!(check_collision(&gap(0.009), &s));
        assert!(!check_collision(&gap(0.011), &s));
        // the boundary behaves like an obstacle
        assert!(check_collision(&Pose::new(0.21, 5.0, 0.0), &s));
    }

    #[test]
    fn sight_blocked_by_box() {
        let w = StaticWorld::new(&scene_with_box());
        assert!(!w.line_of_sight(Vec2::new(4.0, 5.5), Vec2::new(7.0, 5.5)));
        assert!(w.line_of_sight(Vec2::new(4.0, 4.5), Vec2::new(7.0, 4.5)));
        assert!(w.line_of_sight(Vec2::new(4.0, 5.5), Vec2::new(5.1, 5.5)));
    }
}
