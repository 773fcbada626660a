//! Seeded scene generator: floor plan, Poisson-seeded rectangular clutter
//! grown to a target density without breaking connectivity, then targets
//! placed where a robot can reach them.

pub mod connectivity;
pub mod layout;
pub mod poisson;
pub mod targets;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agents::NavMap;
use crate::geometry::{Pose, Rect, Vec2};
use crate::world::{
    navigable_grid, Cell, Elevation, GraspTarget, SceneSpec, Shape, StaticObstacle, SweepTarget,
    TargetStatus, TaskZone, ZoneKind, SCHEMA_VERSION,
};

pub use connectivity::verify_connectivity;
pub use layout::{merge_cells, Layout};
pub use poisson::poisson_disk_sample;
pub use targets::{place_targets, Pattern};

/// Grid resolution for generation.
pub const DELTA: f64 = 0.1;
/// Retries before giving up.
pub const MAX_ATTEMPTS: usize = 50;
/// Allowed gap between requested and achieved density.
pub const DENSITY_TOL: f64 = 0.05;
/// Radius around the spawn kept free of clutter.
pub const SPAWN_KEEPOUT: f64 = 0.6;
/// Grasp targets lie within this distance of a reachable robot position.
pub const GRASP_ACCESS: f64 = 0.80;
/// Sweep targets lie within this distance of a reachable robot position,
/// so a brush pass over them exists.
pub const SWEEP_ACCESS: f64 = 0.28;
/// Prefix of layout wall obstacle ids; walls do not count toward density.
pub const WALL_PREFIX: &str = "wall-";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProcgenError {
    #[error("invalid parameter `{field}`: {message}")]
    BadParams {
        field: &'static str,
        message: String,
    },
    #[error("need {wanted} target cells, only {available} available")]
    InsufficientSpace { wanted: usize, available: usize },
    #[error("generation failed after {attempts} attempts: {reason}")]
    GenerationFailure { attempts: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenParams {
    pub layout: Layout,
    /// Fraction of the floor covered by clutter.
    pub density: f64,
    pub pattern: Pattern,
    pub n_sweep: usize,
    pub n_grasp: usize,
    pub seed: u64,
    #[serde(default = "default_width")]
    pub width: f64,
    #[serde(default = "default_height")]
    pub height: f64,
}

fn default_width() -> f64 {
    10.0
}

fn default_height() -> f64 {
    8.0
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            layout: Layout::Rectangular,
            density: 0.3,
            pattern: Pattern::Random,
            n_sweep: 5,
            n_grasp: 5,
            seed: 0,
            width: default_width(),
            height: default_height(),
        }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<(), ProcgenError> {
        let bad = |field, message: &str| {
            Err(ProcgenError::BadParams {
                field,
                message: message.into(),
            })
        };
        if !(0.10..=0.80).contains(&self.density) {
            return bad("density", "must be in [0.10, 0.80]");
        }
        if !(self.width.is_finite() && self.height.is_finite())
            || self.width < 3.0
            || self.height < 3.0
        {
            return bad("width/height", "each side must be at least 3 m");
        }
        if self.width > 40.0 || self.height > 40.0 {
            return bad("width/height", "each side must be at most 40 m");
        }
        if self.width.max(self.height) / self.width.min(self.height) > 3.0 + 1e-9 {
            return bad("width/height", "aspect ratio must be at most 3");
        }
        Ok(())
    }
}

/// Complexity category 1..=5 from clutter density.
pub fn complexity_for(density: f64) -> u8 {
    (1.0 + (4.0 * (density - 0.1) / 0.7).round()).clamp(1.0, 5.0) as u8
}

/// Fraction of non-wall floor area covered by clutter, measured on the
/// generation grid.
pub fn clutter_density(scene: &SceneSpec) -> f64 {
    let nx = (scene.bounds.width() / DELTA).round() as usize;
    let ny = (scene.bounds.height() / DELTA).round() as usize;
    let (mut floor, mut cluttered) = (0usize, 0usize);
    for j in 0..ny {
        for i in 0..nx {
            let p = Vec2::new(
                scene.bounds.min.x + (i as f64 + 0.5) * DELTA,
                scene.bounds.min.y + (j as f64 + 0.5) * DELTA,
            );
            let hit = |wall: bool| {
                scene
                    .obstacles
                    .iter()
                    .any(|o| o.id.starts_with(WALL_PREFIX) == wall && o.shape.contains(p))
            };
            if hit(true) {
                continue;
            }
            floor += 1;
            cluttered += usize::from(hit(false));
        }
    }
    if floor == 0 {
        0.0
    } else {
        cluttered as f64 / floor as f64
    }
}

/// Generates a scene; a pure function of `p`.
pub fn generate_scene(p: &GenParams) -> Result<SceneSpec, ProcgenError> {
    p.validate()?;
    let mut last = String::new();
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
        rng.set_stream(attempt as u64);
        match attempt_scene(p, &mut rng) {
            Ok(s) => return Ok(s),
            Err(e) => last = e,
        }
    }
    Err(ProcgenError::GenerationFailure {
        attempts: MAX_ATTEMPTS,
        reason: last,
    })
}

struct Builder {
    nx: usize,
    ny: usize,
    floor: Vec<bool>,
    occ: Vec<bool>,
    keepout: Vec<bool>,
    spawn_cell: usize,
    covered: usize,
}

impl Builder {
    fn free(&self) -> Vec<bool> {
        self.floor
            .iter()
            .zip(&self.occ)
            .map(|(f, o)| *f && !*o)
            .collect()
    }

    /// Fills `cells` unless one is unavailable or the fill would split the
    /// free space.
    fn try_fill(&mut self, cells: &[usize]) -> bool {
        if cells
            .iter()
            .any(|&c| !self.floor[c] || self.occ[c] || self.keepout[c])
        {
            return false;
        }
        let mut free = self.free();
        let mut local = true;
        for &c in cells {
            local &= connectivity::locally_simple(&free, self.nx, self.ny, c);
            free[c] = false;
        }
        if !local && !connectivity::reached_all(&free, self.nx, self.ny, self.spawn_cell) {
            return false;
        }
        for &c in cells {
            self.occ[c] = true;
        }
        self.covered += cells.len();
        true
    }
}

#[derive(Clone, Copy)]
struct Grower {
    rect: layout::CellRect,
    order: [usize; 4],
    frozen: [bool; 4],
}

fn strip(b: &Builder, r: layout::CellRect, side: usize) -> Option<Vec<usize>> {
    let (i0, j0, i1, j1) = r;
    let col = |i: usize| (j0..j1).map(move |j| j * b.nx + i).collect::<Vec<_>>();
    let row = |j: usize| (i0..i1).map(move |i| j * b.nx + i).collect::<Vec<_>>();
    match side {
        0 => (i1 < b.nx).then(|| col(i1)),
        1 => (j1 < b.ny).then(|| row(j1)),
        2 => (i0 > 0).then(|| col(i0 - 1)),
        _ => (j0 > 0).then(|| row(j0 - 1)),
    }
}

fn grown(r: layout::CellRect, side: usize) -> layout::CellRect {
    let (i0, j0, i1, j1) = r;
    match side {
        0 => (i0, j0, i1 + 1, j1),
        1 => (i0, j0, i1, j1 + 1),
        2 => (i0 - 1, j0, i1, j1),
        _ => (i0, j0 - 1, i1, j1),
    }
}

fn cell_rect(bounds: &Rect<f64>, r: layout::CellRect) -> Rect<f64> {
    let (i0, j0, i1, j1) = r;
    Rect::new(
        Vec2::new(
            bounds.min.x + i0 as f64 * DELTA,
            bounds.min.y + j0 as f64 * DELTA,
        ),
        Vec2::new(
            bounds.min.x + i1 as f64 * DELTA,
            bounds.min.y + j1 as f64 * DELTA,
        ),
    )
}

fn attempt_scene(p: &GenParams, rng: &mut ChaCha8Rng) -> Result<SceneSpec, String> {
    let bounds = Rect::from_xywh(0.0, 0.0, p.width, p.height);
    let nx = (p.width / DELTA + 0.5 - 1e-9).floor() as usize;
    let ny = (p.height / DELTA + 0.5 - 1e-9).floor() as usize;
    let center = |c: usize| {
        Vec2::new(
            (c % nx) as f64 * DELTA + 0.5 * DELTA,
            (c / nx) as f64 * DELTA + 0.5 * DELTA,
        )
    };
    let plan = layout::build_plan(p.layout, nx, ny, DELTA, rng).ok_or("rooms not connected")?;
    let floor: Vec<bool> = plan.wall.iter().map(|w| !w).collect();

    // spawn: floor cell at least 0.8 m from walls and bounds
    let reach = (0.8 / DELTA).ceil() as isize + 1;
    let near_wall = |c: usize| {
        let (ci, cj) = ((c % nx) as isize, (c / nx) as isize);
        (-reach..=reach).any(|dy| {
            (-reach..=reach).any(|dx| {
                let (x, y) = (ci + dx, cj + dy);
                x >= 0
                    && y >= 0
                    && (x as usize) < nx
                    && (y as usize) < ny
                    && plan.wall[y as usize * nx + x as usize]
                    && center(y as usize * nx + x as usize).distance(center(c)) - 0.5 * DELTA < 0.8
            })
        })
    };
    let roomy: Vec<usize> = (0..nx * ny)
        .filter(|&c| {
            let q = center(c);
            let edge = q.x.min(p.width - q.x).min(q.y).min(p.height - q.y);
            floor[c] && edge >= 0.8 && !near_wall(c)
        })
        .collect();
    let spawn_cell = *roomy.choose(rng).ok_or("no room for a spawn")?;
    let spawn = center(spawn_cell);
    let keepout: Vec<bool> = (0..nx * ny)
        .map(|c| {
            let r = cell_rect(&bounds, (c % nx, c / nx, c % nx + 1, c / nx + 1));
            let dx = (r.min.x - spawn.x).max(spawn.x - r.max.x).max(0.0);
            let dy = (r.min.y - spawn.y).max(spawn.y - r.max.y).max(0.0);
            dx.hypot(dy) < SPAWN_KEEPOUT
        })
        .collect();
    let n_floor = floor.iter().filter(|f| **f).count();
    let want = (p.density * n_floor as f64).round() as usize;
    let mut b = Builder {
        nx,
        ny,
        floor,
        occ: vec![false; nx * ny],
        keepout,
        spawn_cell,
        covered: 0,
    };

    // clutter seeds from a Poisson disk set, then round-robin growth
    let min_dist = 0.9 * (0.7 / p.density).sqrt();
    let mut growers: Vec<Grower> = Vec::new();
    let add_seed = |b: &mut Builder, c: usize, rng: &mut ChaCha8Rng, growers: &mut Vec<Grower>| {
        if b.try_fill(&[c]) {
            let mut order = [0, 1, 2, 3];
            order.shuffle(rng);
            growers.push(Grower {
                rect: (c % nx, c / nx, c % nx + 1, c / nx + 1),
                order,
                frozen: [false; 4],
            });
        }
    };
    for q in poisson_disk_sample(bounds, min_dist, rng.gen()) {
        let c = ((q.y / DELTA) as usize).min(ny - 1) * nx + ((q.x / DELTA) as usize).min(nx - 1);
        add_seed(&mut b, c, rng, &mut growers);
    }
    let mut topups = 0;
    while b.covered < want {
        let mut progress = false;
        for g in growers.iter_mut() {
            if b.covered >= want {
                break;
            }
            for k in 0..4 {
                let side = g.order[k];
                if g.frozen[side] {
                    continue;
                }
                match strip(&b, g.rect, side) {
                    Some(cells) if b.try_fill(&cells) => {
                        g.rect = grown(g.rect, side);
                        progress = true;
                        break;
                    }
                    _ => g.frozen[side] = true,
                }
            }
        }
        if !progress {
            // everything is stuck: seed a fresh obstacle in open floor
            let open: Vec<usize> = (0..nx * ny)
                .filter(|&c| b.floor[c] && !b.occ[c] && !b.keepout[c])
                .collect();
            let before = growers.len();
            for _ in 0..20 {
                if let Some(&c) = open.choose(rng) {
                    add_seed(&mut b, c, rng, &mut growers);
                    if growers.len() > before {
                        break;
                    }
                }
            }
            topups += 1;
            if growers.len() == before || topups > 400 {
                break;
            }
        }
    }
    let achieved = b.covered as f64 / n_floor as f64;
    if (achieved - p.density).abs() > DENSITY_TOL {
        return Err(format!(
            "density {achieved:.3} missed request {:.3}",
            p.density
        ));
    }

    let mut scene = SceneSpec::empty(
        &format!(
            "gen-{}-{:.2}-{}-{}",
            p.layout.as_str(),
            p.density,
            p.pattern.as_str(),
            p.seed
        ),
        bounds,
        Pose::new(spawn.x, spawn.y, 0.0),
    );
    scene.schema = SCHEMA_VERSION;
    for (k, r) in merge_cells(&plan.wall, nx, ny).into_iter().enumerate() {
        scene.obstacles.push(StaticObstacle {
            id: format!("{WALL_PREFIX}{k:02}"),
            shape: Shape::Rect(cell_rect(&bounds, r)),
            material_tag: "drywall".into(),
        });
    }
    let clutter: Vec<Rect<f64>> = growers.iter().map(|g| cell_rect(&bounds, g.rect)).collect();
    for (k, r) in clutter.iter().enumerate() {
        scene.obstacles.push(StaticObstacle {
            id: format!("obs-{k:02}"),
            shape: Shape::Rect(*r),
            material_tag: if k % 2 == 0 {
                "wood".into()
            } else {
                "laminate".into()
            },
        });
    }
    scene.complexity_score = complexity_for(p.density);
    scene.time_budget_s = 300.0;
    let zone = Rect::centered(spawn, 0.8, 0.8);
    let zone = Rect::new(
        Vec2::new(zone.min.x.max(bounds.min.x), zone.min.y.max(bounds.min.y)),
        Vec2::new(zone.max.x.min(bounds.max.x), zone.max.y.min(bounds.max.y)),
    );
    scene.zones.push(TaskZone {
        id: "collect-00".into(),
        kind: ZoneKind::Collection,
        region: zone,
    });

    // reachable robot positions and targets around them
    let grid = navigable_grid(&scene, DELTA).map_err(|e| e.to_string())?;
    if !verify_connectivity(&grid, grid.cell_at(spawn).ok_or("spawn outside grid")?) {
        return Err("free space split".into());
    }
    let map = NavMap::from_scene(&scene, DELTA);
    let dist = map
        .nearest_passable(spawn, None)
        .map(|c| map.distances(c))
        .ok_or("spawn has no clearance")?;
    let feasible: Vec<bool> = dist.iter().map(|d| d.is_finite()).collect();
    let near_feasible = |q: Vec2<f64>, r: f64| {
        let c = map.cell_at(q);
        let k = (r / DELTA).ceil() as isize + 1;
        (-k..=k).any(|dy| {
            (-k..=k).any(|dx| {
                let (x, y) = (c.0 as isize + dx, c.1 as isize + dy);
                x >= 0
                    && y >= 0
                    && (x as usize) < nx
                    && (y as usize) < ny
                    && feasible[y as usize * nx + x as usize]
                    && map.center((x as usize, y as usize)).distance(q) <= r
            })
        })
    };
    let sweep_cells: Vec<Cell> = grid
        .navigable_cells()
        .filter(|&c| near_feasible(grid.center(c), SWEEP_ACCESS))
        .collect();
    let picked = place_targets(p.pattern, p.n_sweep, &sweep_cells, DELTA, rng.gen())
        .map_err(|e| e.to_string())?;
    for (i, c) in picked.iter().enumerate() {
        scene.sweep_targets.push(SweepTarget {
            id: format!("debris-{i:02}"),
            position: grid.center(*c),
            radius: 0.02,
            mass: 0.01 + 0.01 * (i % 5) as f64,
            status: TargetStatus::Pending,
        });
    }
    let mut used: Vec<Cell> = picked;
    let floor_grasp: Vec<Cell> = grid
        .navigable_cells()
        .filter(|&c| near_feasible(grid.center(c), GRASP_ACCESS))
        .collect();
    for i in 0..p.n_grasp {
        let mut spot = None;
        if i % 2 == 1 && !clutter.is_empty() {
            for _ in 0..MAX_ATTEMPTS {
                let r = clutter[rng.gen_range(0..clutter.len())];
                if r.width() < 0.2 || r.height() < 0.2 {
                    continue;
                }
                let t = rng.gen_range(0.0..1.0);
                let q = match rng.gen_range(0..4) {
                    0 => Vec2::new(r.min.x + 0.1, r.min.y + 0.1 + t * (r.height() - 0.2)),
                    1 => Vec2::new(r.max.x - 0.1, r.min.y + 0.1 + t * (r.height() - 0.2)),
                    2 => Vec2::new(r.min.x + 0.1 + t * (r.width() - 0.2), r.min.y + 0.1),
                    _ => Vec2::new(r.min.x + 0.1 + t * (r.width() - 0.2), r.max.y - 0.1),
                };
                if near_feasible(q, GRASP_ACCESS) {
                    spot = Some((q, Elevation::Surface));
                    break;
                }
            }
        }
        if spot.is_none() {
            let open: Vec<Cell> = floor_grasp
                .iter()
                .copied()
                .filter(|c| !used.contains(c))
                .collect();
            let c = *open
                .choose(rng)
                .ok_or("no accessible floor for grasp targets")?;
            used.push(c);
            spot = Some((grid.center(c), Elevation::Floor));
        }
        let (position, elevation) = spot.expect("set above");
        scene.grasp_targets.push(GraspTarget {
            id: format!("item-{i:02}"),
            position,
            radius: 0.04,
            mass: 0.1 + 0.1 * (i % 7) as f64,
            elevation,
            status: TargetStatus::Pending,
        });
    }

    // up to two more spawns, spread out
    let mut spots: Vec<usize> = (0..map.len()).filter(|&i| feasible[i]).collect();
    spots.shuffle(rng);
    for i in spots {
        if scene.spawns.len() >= 3 {
            break;
        }
        let q = map.center(map.cell(i));
        if scene.spawns.iter().all(|s| s.position().distance(q) >= 1.0) {
            scene.spawns.push(Pose::new(q.x, q.y, 0.0));
        }
    }
    scene.validate().map_err(|e| e.to_string())?;
    Ok(scene)
}
