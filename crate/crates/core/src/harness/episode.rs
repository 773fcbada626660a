use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agents::{assign_regions, partition_regions, Policy, PolicyContext};
use crate::geometry::{point_segment_distance, Pose, Vec2};
use crate::metrics::{compile_report, MetricConfig, MetricReport, VacuousMode};
use crate::sim::{
    sense_with, Action, EventKind, SenseOptions, SimState, StaticWorld, TrajectoryLog,
};
use crate::world::{
    navigable_grid, Elevation, OccupancyGrid, RobotSpec, SceneSpec, Shape, ZoneKind,
};

use super::{seed_streams, ConfigError, EpisodeConfig, HarnessError};

/// Centre clearance a random spawn needs: the planners' obstacle inflation
/// plus a little slack, so the start cell is passable for them.
pub const SPAWN_CLEARANCE: f64 = 0.40;
/// Minimum distance between two random spawns.
pub const SPAWN_SEPARATION: f64 = 1.0;
const SPAWN_TRIES: usize = 2000;
const JITTER_TRIES: usize = 20;
/// Jittered floor targets need at least this clearance, or as much as they
/// had before.
const FLOOR_KEEP: f64 = 0.35;
/// Jittered surface targets stay at least this far inside their obstacle.
const SURFACE_MIN_DEPTH: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Timeout,
    Completed,
    CollisionLimit,
    PolicyIdle,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Timeout => "timeout",
            Termination::Completed => "completed",
            Termination::CollisionLimit => "collision_limit",
            Termination::PolicyIdle => "policy_idle",
        }
    }
}

#[derive(Debug, Clone)]
pub struct EpisodeResult {
    pub report: MetricReport,
    pub log: TrajectoryLog,
    pub termination: Termination,
    pub seed: u64,
    pub steps: u64,
    /// The scene as run, after target jitter.
    pub scene: Arc<SceneSpec>,
    pub spawns: Vec<Pose<f64>>,
}

/// Runs one episode: spawn, jitter, then sense, timed act and step until a
/// termination condition holds, and score the log.
pub fn run_episode(cfg: &EpisodeConfig) -> Result<EpisodeResult, HarnessError> {
    let policies = (0..cfg.n_robots)
        .map(|i| cfg.policy_for(i).build())
        .collect();
    run_episode_with(cfg, policies)
}

/// [`run_episode`] with caller-supplied policy instances, one per robot;
/// `cfg.policies` is ignored.
pub fn run_episode_with(
    cfg: &EpisodeConfig,
    mut policies: Vec<Box<dyn Policy>>,
) -> Result<EpisodeResult, HarnessError> {
    cfg.validate()?;
    if policies.len() != cfg.n_robots {
        return Err(ConfigError::PolicyCount {
            n_robots: cfg.n_robots,
            got: policies.len(),
        }
        .into());
    }
    let mut scene = cfg.scene.load()?;
    if cfg.static_only {
        scene = scene.without_movers();
    }
    let mut streams = seed_streams(cfg.seed);
    let grid = navigable_grid(&scene, cfg.delta)?;
    let spawns = if cfg.randomize_spawn {
        random_spawns(&scene, &grid, cfg.n_robots, &mut streams.spawn)?
    } else {
        if scene.spawns.len() < cfg.n_robots {
            return Err(ConfigError::NotEnoughSpawns {
                wanted: cfg.n_robots,
                available: scene.spawns.len(),
            }
            .into());
        }
        scene.spawns[..cfg.n_robots].to_vec()
    };
    if cfg.jitter > 0.0 {
        jitter_targets(&mut scene, &grid, cfg.jitter, &mut streams.jitter);
        scene.validate()?;
    }
    let scene = Arc::new(scene);

    let regions = if cfg.n_robots > 1 {
        let part_grid = navigable_grid(&scene, 0.1)?;
        let parts = partition_regions(&part_grid, cfg.n_robots);
        let at: Vec<Vec2<f64>> = spawns.iter().map(|p| p.position()).collect();
        assign_regions(&part_grid, &parts, &at)
            .into_iter()
            .map(|r| r.map(Arc::new))
            .collect()
    } else {
        vec![None]
    };
    for (i, p) in policies.iter_mut().enumerate() {
        let ctx = PolicyContext {
            scene: Arc::clone(&scene),
            robot: i,
            n_robots: cfg.n_robots,
            region: regions[i].clone(),
            dt: cfg.dt,
        };
        p.reset(&ctx, streams.policy.gen());
    }

    let mut state = SimState::new(Arc::clone(&scene), &spawns, cfg.dt)?;
    let mut log = TrajectoryLog::new(cfg.dt, cfg.n_robots, scene.id.clone());
    log.record_state(&state, None);
    let opts: Vec<SenseOptions> = policies
        .iter()
        .map(|p| SenseOptions {
            local_grid: p.needs_local_grid(),
        })
        .collect();
    let mut collisions = 0usize;
    let mut last_activity = 0.0;
    let mut compute = vec![0.0; cfg.n_robots];
    let termination = loop {
        let mut actions: Vec<Action> = Vec::with_capacity(cfg.n_robots);
        for (i, p) in policies.iter_mut().enumerate() {
            let obs = sense_with(&state, i, opts[i])?;
            let t0 = Instant::now();
            actions.push(p.act(&obs));
            compute[i] = t0.elapsed().as_secs_f64();
        }
        let before: Vec<Pose<f64>> = state.robots().iter().map(|r| r.pose).collect();
        let events = state.step(&actions)?;
        log.record_state(&state, Some(&compute));
        for e in &events {
            log.push_event(e);
        }
        collisions += events
            .iter()
            .filter(|e| e.kind == EventKind::Collision)
            .count();
        let moved = state
            .robots()
            .iter()
            .zip(&before)
            .any(|(r, b)| r.pose != *b);
        if moved || !events.is_empty() {
            last_activity = state.clock();
        }

        if scene.n_targets() > 0 && state.all_complete() {
            log.push_event(&state.protocol_event(EventKind::Completed));
            break Termination::Completed;
        }
        if collisions >= cfg.collision_limit {
            break Termination::CollisionLimit;
        }
        if cfg
            .idle_window
            .is_some_and(|w| state.clock() - last_activity >= w - 1e-9)
        {
            break Termination::PolicyIdle;
        }
        if state.clock() >= cfg.time_budget - 1e-9 {
            log.push_event(&state.protocol_event(EventKind::Timeout));
            break Termination::Timeout;
        }
    };
    state.terminate();

    let mcfg = MetricConfig {
        alpha: cfg.alpha,
        beta: cfg.beta,
        delta: cfg.delta,
        budget_s: Some(cfg.time_budget),
        vacuous: VacuousMode::One,
    };
    let report = compile_report(&log, &scene, &mcfg)?;
    Ok(EpisodeResult {
        report,
        log,
        termination,
        seed: cfg.seed,
        steps: state.tau(),
        scene,
        spawns,
    })
}

fn in_restricted(scene: &SceneSpec, p: Vec2<f64>, margin: f64) -> bool {
    scene
        .zones
        .iter()
        .any(|z| z.kind == ZoneKind::Restricted && z.region.expand(margin).contains(p))
}

/// Uniform draws over navigable cells with enough clearance, random heading,
/// spread at least [`SPAWN_SEPARATION`] apart and clear of movers at t = 0.
pub fn random_spawns(
    scene: &SceneSpec,
    grid: &OccupancyGrid,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Pose<f64>>, HarnessError> {
    let statics = StaticWorld::new(scene);
    let robot = RobotSpec::default();
    let movers: Vec<_> = scene
        .movers
        .iter()
        .map(|m| m.rect_at(0.0).expand(0.6))
        .collect();
    let candidates: Vec<Vec2<f64>> = grid
        .navigable_cells()
        .map(|c| grid.center(c))
        .filter(|&p| {
            statics.clearance(p) >= SPAWN_CLEARANCE
                && !in_restricted(scene, p, SPAWN_CLEARANCE)
                && !movers.iter().any(|m| m.contains(p))
        })
        .collect();
    let mut out: Vec<Pose<f64>> = Vec::with_capacity(n);
    for _ in 0..SPAWN_TRIES {
        if out.len() == n || candidates.is_empty() {
            break;
        }
        let p = candidates[rng.gen_range(0..candidates.len())];
        let pose = Pose::new(p.x, p.y, rng.gen_range(-PI..PI));
        if out
            .iter()
            .all(|q| q.position().distance(p) >= SPAWN_SEPARATION)
            && !scene.footprint_blocked(&robot, &pose)
        {
            out.push(pose);
        }
    }
    if out.len() < n {
        return Err(HarnessError::NoValidSpawn {
            wanted: n,
            found: out.len(),
        });
    }
    Ok(out)
}

/// Depth of `p` inside a convex shape; zero outside.
fn depth(shape: &Shape, p: Vec2<f64>) -> f64 {
    if !shape.contains(p) {
        return 0.0;
    }
    let v = shape.vertices();
    (0..v.len())
        .map(|i| point_segment_distance(p, v[i], v[(i + 1) % v.len()]))
        .fold(f64::INFINITY, f64::min)
}

/// Moves every target by a uniform draw from the disk of radius `r`. A draw
/// is kept only if the target stays as reachable as it was: floor targets on
/// a navigable cell with enough clearance and outside restricted zones,
/// surface targets on the same obstacle and no deeper than before. After a
/// few rejected draws the target stays put.
pub fn jitter_targets(scene: &mut SceneSpec, grid: &OccupancyGrid, r: f64, rng: &mut ChaCha8Rng) {
    let statics = StaticWorld::new(scene);
    let disk = |rng: &mut ChaCha8Rng| {
        let (u, t): (f64, f64) = (rng.gen(), rng.gen_range(0.0..2.0 * PI));
        Vec2::new(t.cos(), t.sin()) * (r * u.sqrt())
    };
    let floor_ok = |from: Vec2<f64>, to: Vec2<f64>| {
        scene.bounds.contains(to)
            && grid.cell_at(to).is_some_and(|c| grid.is_navigable(c))
            && statics.clearance(to) >= statics.clearance(from).min(FLOOR_KEEP)
            && (in_restricted(scene, from, 0.3) || !in_restricted(scene, to, 0.3))
    };
    let mut moved_sweep = Vec::with_capacity(scene.sweep_targets.len());
    for t in &scene.sweep_targets {
        let p = (0..JITTER_TRIES)
            .map(|_| t.position + disk(rng))
            .find(|&q| floor_ok(t.position, q));
        moved_sweep.push(p.unwrap_or(t.position));
    }
    let mut moved_grasp = Vec::with_capacity(scene.grasp_targets.len());
    for t in &scene.grasp_targets {
        let host = (t.elevation == Elevation::Surface)
            .then(|| {
                scene
                    .obstacles
                    .iter()
                    .find(|o| o.shape.contains(t.position))
            })
            .flatten();
        let p = (0..JITTER_TRIES)
            .map(|_| t.position + disk(rng))
            .find(|&q| match host {
                Some(o) => {
                    let d = depth(&o.shape, q);
                    d >= SURFACE_MIN_DEPTH
                        && d <= depth(&o.shape, t.position).max(SURFACE_MIN_DEPTH)
                }
                None => floor_ok(t.position, q),
            });
        moved_grasp.push(p.unwrap_or(t.position));
    }
    for (t, p) in scene.sweep_targets.iter_mut().zip(moved_sweep) {
        t.position = p;
    }
    for (t, p) in scene.grasp_targets.iter_mut().zip(moved_grasp) {
        t.position = p;
    }
}
