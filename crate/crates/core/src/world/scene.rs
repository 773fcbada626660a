use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::geometry::{convex_overlap, ConvexPolygon, OrientedRect, Pose, Rect, Vec2};
use crate::world::WorldError;

pub const SCHEMA_VERSION: u32 = 1;

/// Obstacle geometry as stored in scene files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Rect(Rect<f64>),
    Polygon(ConvexPolygon<f64>),
}

impl Shape {
    pub fn vertices(&self) -> Vec<Vec2<f64>> {
        match self {
            Shape::Rect(r) => r.corners().to_vec(),
            Shape::Polygon(p) => p.vertices().to_vec(),
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            Shape::Rect(r) => r.area(),
            Shape::Polygon(p) => p.area(),
        }
    }

    pub fn aabb(&self) -> Rect<f64> {
        match self {
            Shape::Rect(r) => *r,
            Shape::Polygon(p) => p.aabb(),
        }
    }

    pub fn contains(&self, p: Vec2<f64>) -> bool {
        match self {
            Shape::Rect(r) => r.contains(p),
            Shape::Polygon(poly) => poly.contains(p),
        }
    }

    pub fn distance_to_point(&self, p: Vec2<f64>) -> f64 {
        match self {
            Shape::Rect(r) => {
                let dx = (r.min.x - p.x).max(0.0).max(p.x - r.max.x);
                let dy = (r.min.y - p.y).max(0.0).max(p.y - r.max.y);
                dx.hypot(dy)
            }
            Shape::Polygon(poly) => poly.distance_to_point(p),
        }
    }

    pub fn translate(&self, d: Vec2<f64>) -> Shape {
        match self {
            Shape::Rect(r) => Shape::Rect(r.translate(d)),
            Shape::Polygon(p) => Shape::Polygon(p.translate(d)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaticObstacle {
    pub id: String,
    pub shape: Shape,
    #[serde(default)]
    pub material_tag: String,
}

/// Rectangle that loops through its waypoints at constant speed, ignoring
/// everything else in the scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicObstacle {
    pub id: String,
    pub width: f64,
    pub height: f64,
    pub waypoints: Vec<Vec2<f64>>,
    pub speed: f64,
}

impl DynamicObstacle {
    fn legs(&self) -> impl Iterator<Item = (Vec2<f64>, Vec2<f64>)> + '_ {
        let n = self.waypoints.len();
        (0..n).map(move |i| (self.waypoints[i], self.waypoints[(i + 1) % n]))
    }

    /// Length of one full loop, closing back to the first waypoint.
    pub fn loop_length(&self) -> f64 {
        self.legs().map(|(a, b)| a.distance(b)).sum()
    }

    pub fn position_at(&self, t: f64) -> Vec2<f64> {
        let total = self.loop_length();
        if total <= 0.0 || self.speed <= 0.0 {
            return self.waypoints[0];
        }
        let mut s = (self.speed * t).rem_euclid(total);
        for (a, b) in self.legs() {
            let len = a.distance(b);
            if s <= len {
                return if len > 0.0 { a.lerp(b, s / len) } else { a };
            }
            s -= len;
        }
        self.waypoints[0]
    }

    pub fn rect_at(&self, t: f64) -> Rect<f64> {
        Rect::centered(self.position_at(t), self.width, self.height)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetStatus {
    #[default]
    Pending,
    Completed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Elevation {
    #[default]
    Floor,
    Surface,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepTarget {
    pub id: String,
    pub position: Vec2<f64>,
    pub radius: f64,
    pub mass: f64,
    #[serde(default)]
    pub status: TargetStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraspTarget {
    pub id: String,
    pub position: Vec2<f64>,
    pub radius: f64,
    pub mass: f64,
    #[serde(default)]
    pub elevation: Elevation,
    #[serde(default)]
    pub status: TargetStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZoneKind {
    Collection,
    Restricted,
    Target,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskZone {
    pub id: String,
    pub kind: ZoneKind,
    pub region: Rect<f64>,
}

/// Chassis and actuator parameters of the cleaning robot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotSpec {
    /// Extent along the heading.
    pub footprint_length: f64,
    /// Extent across the heading.
    pub footprint_width: f64,
    pub max_lin_vel: f64,
    pub max_ang_vel: f64,
    pub sweep_width: f64,
    pub brush_diameter: f64,
    pub arm_reach: f64,
    pub gripper_open_max: f64,
    pub sensor_range: f64,
}

impl Default for RobotSpec {
    fn default() -> Self {
        RobotSpec {
            footprint_length: 0.41,
            footprint_width: 0.47,
            max_lin_vel: 0.5,
            max_ang_vel: 1.0,
            sweep_width: 0.35,
            brush_diameter: 0.15,
            arm_reach: 0.855,
            gripper_open_max: 0.08,
            sensor_range: 10.0,
        }
    }
}

impl RobotSpec {
    pub fn footprint(&self, pose: &Pose<f64>) -> OrientedRect<f64> {
        OrientedRect::new(
            pose.position(),
            self.footprint_length,
            self.footprint_width,
            pose.theta,
        )
    }

    pub fn half_diagonal(&self) -> f64 {
        0.5 * self.footprint_length.hypot(self.footprint_width)
    }

    /// Brush strip in the body frame: starts at the front edge and extends
    /// one brush diameter forward.
    pub fn sweep_strip_local(&self) -> Rect<f64> {
        let front = 0.5 * self.footprint_length;
        Rect::new(
            Vec2::new(front, -0.5 * self.sweep_width),
            Vec2::new(front + self.brush_diameter, 0.5 * self.sweep_width),
        )
    }

    pub fn validate(&self) -> Result<(), WorldError> {
        let dims = [
            self.footprint_length,
            self.footprint_width,
            self.max_lin_vel,
            self.max_ang_vel,
            self.sweep_width,
            self.brush_diameter,
            self.arm_reach,
            self.gripper_open_max,
            self.sensor_range,
        ];
        if dims.iter().any(|d| !(*d > 0.0) || !d.is_finite()) {
            return Err(WorldError::validation(
                "robot",
                "all dimensions and limits must be positive",
            ));
        }
        if self.sweep_width > self.footprint_width + 2.0 * self.brush_diameter {
            return Err(WorldError::validation(
                "robot.sweep_width",
                "wider than footprint plus brushes",
            ));
        }
        Ok(())
    }
}

/// Immutable description of one world.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub schema: u32,
    pub id: String,
    pub bounds: Rect<f64>,
    #[serde(default)]
    pub obstacles: Vec<StaticObstacle>,
    #[serde(default)]
    pub movers: Vec<DynamicObstacle>,
    #[serde(default)]
    pub sweep_targets: Vec<SweepTarget>,
    #[serde(default)]
    pub grasp_targets: Vec<GraspTarget>,
    #[serde(default)]
    pub zones: Vec<TaskZone>,
    pub spawns: Vec<Pose<f64>>,
    pub complexity_score: u8,
    pub time_budget_s: f64,
}

const GEOM_TOL: f64 = 1e-9;

impl SceneSpec {
    /// Scene with the given bounds and a single spawn, nothing else.
    pub fn empty(id: &str, bounds: Rect<f64>, spawn: Pose<f64>) -> Self {
        SceneSpec {
            schema: SCHEMA_VERSION,
            id: id.to_string(),
            bounds,
            obstacles: Vec::new(),
            movers: Vec::new(),
            sweep_targets: Vec::new(),
            grasp_targets: Vec::new(),
            zones: Vec::new(),
            spawns: vec![spawn],
            complexity_score: 1,
            time_budget_s: 300.0,
        }
    }

    pub fn n_targets(&self) -> usize {
        self.sweep_targets.len() + self.grasp_targets.len()
    }

    pub fn collection_zones(&self) -> impl Iterator<Item = &TaskZone> {
        self.zones.iter().filter(|z| z.kind == ZoneKind::Collection)
    }

    /// True when the footprint at `pose` overlaps an obstacle interior or
    /// leaves the bounds.
    pub fn footprint_blocked(&self, robot: &RobotSpec, pose: &Pose<f64>) -> bool {
        let fp = robot.footprint(pose);
        if !self.bounds.contains_rect(&fp.aabb(), GEOM_TOL) {
            return true;
        }
        let corners = fp.corners();
        self.obstacles
            .iter()
            .any(|o| convex_overlap(&corners, &o.shape.vertices()))
    }

    /// Same scene with every dynamic obstacle removed.
    pub fn without_movers(&self) -> SceneSpec {
        let mut s = self.clone();
        s.movers.clear();
        s
    }

    pub fn validate(&self) -> Result<(), WorldError> {
        use WorldError as E;
        if self.schema != SCHEMA_VERSION {
            return Err(E::validation(
                "schema",
                format!("unsupported version {}", self.schema),
            ));
        }
        let b = &self.bounds;
        let finite = [b.min.x, b.min.y, b.max.x, b.max.y]
            .iter()
            .all(|v| v.is_finite());
        if !finite || !(b.width() > 0.0 && b.height() > 0.0) {
            return Err(E::validation("bounds", "area must be positive"));
        }
        if !(1..=5).contains(&self.complexity_score) {
            return Err(E::validation("complexity_score", "must be in 1..=5"));
        }
        if !(self.time_budget_s > 0.0) || !self.time_budget_s.is_finite() {
            return Err(E::validation("time_budget_s", "must be positive"));
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            if let Shape::Rect(r) = &o.shape {
                if !(r.width() > 0.0 && r.height() > 0.0) {
                    return Err(E::validation(
                        format!("obstacles[{i}].shape"),
                        "degenerate rectangle",
                    ));
                }
            }
            if !(o.shape.area() > 0.0) {
                return Err(E::validation(format!("obstacles[{i}].shape"), "zero area"));
            }
            if !b.contains_rect(&o.shape.aabb(), GEOM_TOL) {
                return Err(E::validation(format!("obstacles[{i}]"), "outside bounds"));
            }
        }
        for (i, m) in self.movers.iter().enumerate() {
            let path = format!("movers[{i}]");
            if !(m.speed >= 0.0) || !m.speed.is_finite() {
                return Err(E::validation(
                    format!("{path}.speed"),
                    "must be non-negative",
                ));
            }
            if m.waypoints.len() < 2 {
                return Err(E::validation(
                    format!("{path}.waypoints"),
                    "need at least two",
                ));
            }
            if !(m.width > 0.0 && m.height > 0.0) {
                return Err(E::validation(path.to_string(), "degenerate rectangle"));
            }
            for (k, w) in m.waypoints.iter().enumerate() {
                if !b.contains_rect(&Rect::centered(*w, m.width, m.height), GEOM_TOL) {
                    return Err(E::validation(
                        format!("{path}.waypoints[{k}]"),
                        "outside bounds",
                    ));
                }
            }
        }
        let bad_id = |id: &str| id.is_empty() || id.chars().any(char::is_whitespace);
        if bad_id(&self.id) {
            return Err(E::validation("id", "must be non-empty without whitespace"));
        }
        let all_ids = self
            .obstacles
            .iter()
            .map(|o| (o.id.as_str(), "obstacles"))
            .chain(self.movers.iter().map(|m| (m.id.as_str(), "movers")))
            .chain(
                self.sweep_targets
                    .iter()
                    .map(|t| (t.id.as_str(), "sweep_targets")),
            )
            .chain(
                self.grasp_targets
                    .iter()
                    .map(|t| (t.id.as_str(), "grasp_targets")),
            )
            .chain(self.zones.iter().map(|z| (z.id.as_str(), "zones")));
        for (id, list) in all_ids {
            if bad_id(id) {
                return Err(E::validation(
                    list,
                    format!("id `{id}` must be non-empty without whitespace"),
                ));
            }
        }
        let mut ids = HashSet::new();
        for (i, t) in self.sweep_targets.iter().enumerate() {
            let path = format!("sweep_targets[{i}]");
            if !ids.insert(t.id.as_str()) {
                return Err(E::validation(
                    format!("{path}.id"),
                    format!("duplicate id {}", t.id),
                ));
            }
            if !(0.01..=0.05).contains(&t.mass) {
                return Err(E::validation(
                    format!("{path}.mass"),
                    "must be in [0.01, 0.05] kg",
                ));
            }
            if !(t.radius > 0.0) {
                return Err(E::validation(format!("{path}.radius"), "must be positive"));
            }
            if !b.contains(t.position) {
                return Err(E::validation(format!("{path}.position"), "outside bounds"));
            }
        }
        for (i, t) in self.grasp_targets.iter().enumerate() {
            let path = format!("grasp_targets[{i}]");
            if !ids.insert(t.id.as_str()) {
                return Err(E::validation(
                    format!("{path}.id"),
                    format!("duplicate id {}", t.id),
                ));
            }
            if !(0.1..=0.8).contains(&t.mass) {
                return Err(E::validation(
                    format!("{path}.mass"),
                    "must be in [0.1, 0.8] kg",
                ));
            }
            if !(t.radius > 0.0) {
                return Err(E::validation(format!("{path}.radius"), "must be positive"));
            }
            if !b.contains(t.position) {
                return Err(E::validation(format!("{path}.position"), "outside bounds"));
            }
        }
        for (i, z) in self.zones.iter().enumerate() {
            if !(z.region.width() > 0.0 && z.region.height() > 0.0) {
                return Err(E::validation(
                    format!("zones[{i}].region"),
                    "degenerate rectangle",
                ));
            }
            if !b.contains_rect(&z.region, GEOM_TOL) {
                return Err(E::validation(
                    format!("zones[{i}].region"),
                    "outside bounds",
                ));
            }
        }
        if self.spawns.is_empty() {
            return Err(E::validation("spawns", "at least one spawn required"));
        }
        let robot = RobotSpec::default();
        for (i, s) in self.spawns.iter().enumerate() {
            if ![s.x, s.y, s.theta].iter().all(|v| v.is_finite()) {
                return Err(E::validation(format!("spawns[{i}]"), "non-finite pose"));
            }
            if self.footprint_blocked(&robot, s) {
                return Err(E::validation(format!("spawns[{i}]"), "spawn collides"));
            }
        }
        Ok(())
    }
}
