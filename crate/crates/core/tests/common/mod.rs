//! Helpers and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::VecDeque;

use dualsweep::geometry::point_segment_distance;
use dualsweep::sim::{Mode, TrajectoryLog};
use dualsweep::world::{
    Elevation, GraspTarget, RobotSpec, SceneSpec, Shape, StaticObstacle, SweepTarget, TargetStatus,
    TaskZone, ZoneKind,
};
use dualsweep::{Pose, Rect, Vec2};

pub fn room(w: f64, h: f64) -> SceneSpec {
    SceneSpec::empty(
        "room",
        Rect::from_xywh(0.0, 0.0, w, h),
        Pose::new(1.0, 1.0, 0.0),
    )
}

pub fn boxed(id: &str, x: f64, y: f64, w: f64, h: f64) -> StaticObstacle {
    StaticObstacle {
        id: id.into(),
        shape: Shape::Rect(Rect::from_xywh(x, y, w, h)),
        material_tag: String::new(),
    }
}

pub fn debris(id: &str, x: f64, y: f64) -> SweepTarget {
    SweepTarget {
        id: id.into(),
        position: Vec2::new(x, y),
        radius: 0.02,
        mass: 0.02,
        status: TargetStatus::Pending,
    }
}

pub fn item(id: &str, x: f64, y: f64) -> GraspTarget {
    GraspTarget {
        id: id.into(),
        position: Vec2::new(x, y),
        radius: 0.04,
        mass: 0.3,
        elevation: Elevation::Floor,
        status: TargetStatus::Pending,
    }
}

pub fn zone(id: &str, kind: ZoneKind, x: f64, y: f64, w: f64, h: f64) -> TaskZone {
    TaskZone {
        id: id.into(),
        kind,
        region: Rect::from_xywh(x, y, w, h),
    }
}

/// 6 x 5 m room with 4 sweep targets, 2 grasp targets and a collection bin.
pub fn mixed_micro_scene() -> SceneSpec {
    let mut s = room(6.0, 5.0);
    s.id = "micro-mixed".into();
    for (k, (x, y)) in [(1.5, 3.8), (4.5, 3.8), (4.5, 1.2), (3.0, 2.5)]
        .into_iter()
        .enumerate()
    {
        s.sweep_targets.push(debris(&format!("d{k}"), x, y));
    }
    for (k, (x, y)) in [(2.0, 1.5), (4.0, 3.3)].into_iter().enumerate() {
        s.grasp_targets.push(item(&format!("g{k}"), x, y));
    }
    s.zones
        .push(zone("bin", ZoneKind::Collection, 0.5, 4.0, 1.0, 0.6));
    s.validate().expect("micro scene is valid");
    s
}

/// Breadth-first flood fill over a row-major boolean mask, 4-connected.
pub fn flood4(free: &[bool], nx: usize, ny: usize, seeds: &[(usize, usize)]) -> Vec<bool> {
    let mut seen = vec![false; free.len()];
    let mut q = VecDeque::new();
    for &(i, j) in seeds {
        let k = j * nx + i;
        if free[k] && !seen[k] {
            seen[k] = true;
            q.push_back((i, j));
        }
    }
    while let Some((i, j)) = q.pop_front() {
        let mut go = |a: usize, b: usize| {
            let k = b * nx + a;
            if free[k] && !seen[k] {
                seen[k] = true;
                q.push_back((a, b));
            }
        };
        if i > 0 {
            go(i - 1, j);
        }
        if i + 1 < nx {
            go(i + 1, j);
        }
        if j > 0 {
            go(i, j - 1);
        }
        if j + 1 < ny {
            go(i, j + 1);
        }
    }
    seen
}

/// Log of one robot following `poses` at `dt` in sweep mode.
pub fn log_from(poses: &[Pose], dt: f64) -> TrajectoryLog {
    let mut log = TrajectoryLog::new(dt, 1, "room");
    for (k, p) in poses.iter().enumerate() {
        log.push_pose(k as u64, k as f64 * dt, 0, *p, Mode::Sweep, Some(0.0));
    }
    log
}

pub fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}

/// Visit counts recomputed from scratch: for every navigable cell, the
/// steps at which its centre lies in some footprint, then the number of
/// maximal runs of consecutive steps.
pub fn brute_visits(log: &TrajectoryLog, grid: &dualsweep::world::OccupancyGrid) -> Vec<u32> {
    use std::collections::BTreeSet;
    let spec = dualsweep::world::RobotSpec::default();
    let (hl, hw) = (spec.footprint_length / 2.0, spec.footprint_width / 2.0);
    let mut steps: Vec<BTreeSet<u64>> = vec![BTreeSet::new(); grid.len()];
    for p in &log.poses {
        let (s, c) = p.pose.theta.sin_cos();
        let reach = hl.hypot(hw) + grid.delta();
        for (k, cell_steps) in steps.iter_mut().enumerate() {
            if !grid.navigable_mask()[k] {
                continue;
            }
            let q = grid.center(grid.cell(k));
            let (dx, dy) = (q.x - p.pose.x, q.y - p.pose.y);
            if dx.abs() > reach || dy.abs() > reach {
                continue;
            }
            let (along, across) = (dx * c + dy * s, -dx * s + dy * c);
            if along.abs() <= hl && across.abs() <= hw {
                cell_steps.insert(p.tau);
            }
        }
    }
    steps
        .iter()
        .map(|set| {
            let v: Vec<u64> = set.iter().copied().collect();
            (v.windows(2).filter(|w| w[1] != w[0] + 1).count() + usize::from(!v.is_empty())) as u32
        })
        .collect()
}

/// Monte-Carlo estimate of the covered fraction of the navigable area:
/// uniform samples over the bounds, a sample counts when its cell is
/// navigable and it lies inside at least one logged footprint.
pub struct AreaSampler {
    pts: Vec<Vec2>,
    bins: Vec<Vec<u32>>,
    nbx: usize,
    nby: usize,
    bounds: Rect,
}

const BIN: f64 = 0.5;

impl AreaSampler {
    pub fn new(bounds: Rect, n: usize, seed: u64) -> Self {
        use rand::Rng;
        let mut r = rng(seed);
        let pts: Vec<Vec2> = (0..n)
            .map(|_| {
                Vec2::new(
                    r.gen_range(bounds.min.x..bounds.max.x),
                    r.gen_range(bounds.min.y..bounds.max.y),
                )
            })
            .collect();
        let nbx = (bounds.width() / BIN).ceil() as usize;
        let nby = (bounds.height() / BIN).ceil() as usize;
        let mut bins = vec![Vec::new(); nbx * nby];
        for (k, p) in pts.iter().enumerate() {
            let i = (((p.x - bounds.min.x) / BIN) as usize).min(nbx - 1);
            let j = (((p.y - bounds.min.y) / BIN) as usize).min(nby - 1);
            bins[j * nbx + i].push(k as u32);
        }
        AreaSampler {
            pts,
            bins,
            nbx,
            nby,
            bounds,
        }
    }

    /// Covered fraction of navigable samples.
    pub fn covered_fraction(
        &self,
        log: &TrajectoryLog,
        grid: &dualsweep::world::OccupancyGrid,
    ) -> f64 {
        let spec = dualsweep::world::RobotSpec::default();
        let mut hit = vec![false; self.pts.len()];
        for p in &log.poses {
            let fp = spec.footprint(&p.pose);
            let bb = fp.aabb();
            let bi =
                |v: f64, o: f64, n: usize| (((v - o) / BIN).floor().max(0.0) as usize).min(n - 1);
            for j in bi(bb.min.y, self.bounds.min.y, self.nby)
                ..=bi(bb.max.y, self.bounds.min.y, self.nby)
            {
                for i in bi(bb.min.x, self.bounds.min.x, self.nbx)
                    ..=bi(bb.max.x, self.bounds.min.x, self.nbx)
                {
                    for &k in &self.bins[j * self.nbx + i] {
                        if !hit[k as usize] && fp.contains(self.pts[k as usize]) {
                            hit[k as usize] = true;
                        }
                    }
                }
            }
        }
        let nav = |p: Vec2| grid.cell_at(p).is_some_and(|c| grid.is_navigable(c));
        let (mut inside, mut total) = (0usize, 0usize);
        for (k, p) in self.pts.iter().enumerate() {
            if nav(*p) {
                total += 1;
                inside += usize::from(hit[k]);
            }
        }
        inside as f64 / total as f64
    }
}

/// Single-robot rollout of uniformly random actions from the first spawn.
pub fn random_rollout(scene: &SceneSpec, steps: usize, seed: u64) -> TrajectoryLog {
    use dualsweep::sim::{Action, SimState, DT_CTRL};
    use rand::Rng;
    use std::sync::Arc;
    let mut r = rng(seed);
    let mut s =
        SimState::new(Arc::new(scene.clone()), &scene.spawns[..1], DT_CTRL).expect("spawn is free");
    let mut log = TrajectoryLog::new(DT_CTRL, 1, scene.id.clone());
    log.record_state(&s, None);
    // piecewise-constant commands so the robot actually travels
    let mut a = Action::new(Mode::Sweep, 1.0, 0.0);
    for k in 0..steps {
        if k % 10 == 0 {
            let mode = [Mode::Sweep, Mode::Navigate][r.gen_range(0..2)];
            a = Action::new(mode, r.gen_range(-0.2..1.0), r.gen_range(-1.0..1.0));
        }
        let ev = s.step(std::slice::from_ref(&a)).expect("step");
        log.record_state(&s, Some(&[0.0]));
        for e in &ev {
            log.push_event(e);
        }
    }
    log
}

// Scene accessibility oracles, from raw geometry on a 0.1 m grid.

const PG_DELTA: f64 = 0.1;

/// Distance from `p` to the nearest obstacle or wall, from raw geometry.
pub fn clearance(scene: &SceneSpec, p: Vec2) -> f64 {
    let b = scene.bounds;
    let mut best = (p.x - b.min.x)
        .min(b.max.x - p.x)
        .min(p.y - b.min.y)
        .min(b.max.y - p.y);
    for o in &scene.obstacles {
        if o.shape.contains(p) {
            return 0.0;
        }
        let v = o.shape.vertices();
        for i in 0..v.len() {
            best = best.min(point_segment_distance(p, v[i], v[(i + 1) % v.len()]));
        }
    }
    best
}

/// Independent accessibility check: cells whose centre clears the robot's
/// half-diagonal (any heading fits), flood-filled from the spawn.
pub struct ReachOracle {
    nx: usize,
    pub reach: Vec<bool>,
    pub free: Vec<bool>,
    origin: Vec2,
}

impl ReachOracle {
    pub fn new(scene: &SceneSpec) -> Self {
        let nx = (scene.bounds.width() / PG_DELTA).round() as usize;
        let ny = (scene.bounds.height() / PG_DELTA).round() as usize;
        let origin = scene.bounds.min;
        let centre = |k: usize| {
            origin
                + Vec2::new(
                    ((k % nx) as f64 + 0.5) * PG_DELTA,
                    ((k / nx) as f64 + 0.5) * PG_DELTA,
                )
        };
        let half = RobotSpec::default().half_diagonal();
        let roomy: Vec<bool> = (0..nx * ny)
            .map(|k| clearance(scene, centre(k)) >= half)
            .collect();
        let free: Vec<bool> = (0..nx * ny)
            .map(|k| !scene.obstacles.iter().any(|o| o.shape.contains(centre(k))))
            .collect();
        let s = scene.spawns[0].position() - origin;
        let seed = ((s.x / PG_DELTA) as usize, (s.y / PG_DELTA) as usize);
        ReachOracle {
            nx,
            reach: flood4(&roomy, nx, ny, &[seed]),
            free,
            origin,
        }
    }

    pub fn centre(&self, k: usize) -> Vec2 {
        self.origin
            + Vec2::new(
                ((k % self.nx) as f64 + 0.5) * PG_DELTA,
                ((k / self.nx) as f64 + 0.5) * PG_DELTA,
            )
    }

    /// Some reachable centre within `[lo, hi]` of `p`.
    pub fn near(&self, p: Vec2, lo: f64, hi: f64) -> bool {
        (0..self.reach.len())
            .any(|k| self.reach[k] && (lo..=hi).contains(&self.centre(k).distance(p)))
    }
}

/// Floor cells of `scene` 4-connected to its spawn.
pub fn floor_flood(scene: &SceneSpec) -> (Vec<bool>, usize) {
    let nx = (scene.bounds.width() / PG_DELTA).round() as usize;
    let ny = (scene.bounds.height() / PG_DELTA).round() as usize;
    let o = ReachOracle::new(scene);
    let s = scene.spawns[0].position() - scene.bounds.min;
    (
        flood4(
            &o.free,
            nx,
            ny,
            &[((s.x / PG_DELTA) as usize, (s.y / PG_DELTA) as usize)],
        ),
        nx,
    )
}

/// Every target reachable by the oracle's standards, or the first that is not.
pub fn check_accessible(scene: &SceneSpec) -> Result<(), String> {
    let oracle = ReachOracle::new(scene);
    let (flood, nx) = floor_flood(scene);
    let spec = RobotSpec::default();
    let front = spec.footprint_length / 2.0;
    for t in &scene.sweep_targets {
        let q = t.position - scene.bounds.min;
        if !flood[(q.y / PG_DELTA) as usize * nx + (q.x / PG_DELTA) as usize] {
            return Err(format!("{} cell unreachable", t.id));
        }
        // a reachable pose facing the target holds it in the brush strip
        if !oracle.near(t.position, front + 0.01, front + spec.brush_diameter - 0.01) {
            return Err(format!("{} not sweepable", t.id));
        }
    }
    for t in &scene.grasp_targets {
        if !oracle.near(t.position, 0.0, spec.arm_reach) {
            return Err(format!("{} out of reach", t.id));
        }
    }
    Ok(())
}

/// Every obstacle-free cell joins the spawn.
pub fn floor_connected(scene: &SceneSpec) -> bool {
    floor_flood(scene).0 == ReachOracle::new(scene).free
}
