//! Reference dual-mode planner: fetch every grasp target to a collection
//! zone, then sweep with horizontal lanes.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::geometry::Vec2;
use crate::sim::{Action, Mode, ObjectKind, Observation};
use crate::world::Cell;

use super::coverage::{CoveragePolicy, CoverageVariant};
use super::navmap::NavMap;
use super::tracker::Driver;
use super::{Policy, PolicyContext};

/// Approach cells lie this close to their target, inside arm reach.
pub const APPROACH_RADIUS: f64 = 0.80;
/// Grasp attempts give up after this many steps.
const GRASP_PATIENCE: u32 = 60;

#[derive(Debug, Clone, PartialEq)]
enum Stage {
    /// Nothing chosen yet.
    Pick,
    Approach {
        id: String,
    },
    Grasp {
        id: String,
        steps: u32,
    },
    Deliver {
        planned: bool,
    },
    Sweep,
}

#[derive(Debug, Clone)]
pub struct DualPolicy {
    ctx: Option<PolicyContext>,
    map: Option<Arc<NavMap>>,
    driver: Driver,
    inner: CoveragePolicy,
    stage: Stage,
    mine: Option<BTreeSet<String>>,
    unreachable: BTreeSet<String>,
}

impl Default for DualPolicy {
    fn default() -> Self {
        DualPolicy {
            ctx: None,
            map: None,
            driver: Driver::default(),
            inner: CoveragePolicy::new(CoverageVariant::Horizontal),
            stage: Stage::Pick,
            mine: None,
            unreachable: BTreeSet::new(),
        }
    }
}

/// Passable cells within `radius` of `p`.
fn cells_near(map: &NavMap, p: Vec2<f64>, radius: f64) -> Vec<usize> {
    let c = map.cell_at(p);
    let k = (radius / map.delta()).ceil() as isize + 1;
    let mut out = Vec::new();
    for dy in -k..=k {
        for dx in -k..=k {
            let (x, y) = (c.0 as isize + dx, c.1 as isize + dy);
            if x < 0 || y < 0 || x >= map.nx() as isize || y >= map.ny() as isize {
                continue;
            }
            let q: Cell = (x as usize, y as usize);
            if map.is_passable(q) && map.center(q).distance(p) <= radius {
                out.push(map.index(q));
            }
        }
    }
    out.sort_unstable();
    out
}

/// Cheapest entry of `cands` under `dist`, ties to the lowest index.
fn cheapest(dist: &[f64], cands: &[usize]) -> Option<(f64, usize)> {
    cands
        .iter()
        .filter(|&&i| dist[i].is_finite())
        .fold(None, |best: Option<(f64, usize)>, &i| match best {
            Some((d, _)) if d <= dist[i] => best,
            _ => Some((dist[i], i)),
        })
}

impl DualPolicy {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn unreachable(&self) -> &BTreeSet<String> {
        &self.unreachable
    }

    /// True once the sweep phase has begun.
    pub fn sweeping(&self) -> bool {
        self.stage == Stage::Sweep
    }

    /// Grasp targets this robot is responsible for: those whose nearest
    /// passable cell lies in its region.
    fn claim(&self, map: &NavMap, obs: &Observation) -> BTreeSet<String> {
        let region = self.ctx.as_ref().and_then(|c| c.region_for(map));
        obs.task_status
            .iter()
            .filter(|t| t.kind == ObjectKind::Grasp && !t.completed)
            .filter(|t| match region {
                None => true,
                Some(r) => map
                    .nearest_passable(t.position, None)
                    .is_some_and(|c| r[map.index(c)]),
            })
            .map(|t| t.id.clone())
            .collect()
    }

    fn pick(&mut self, map: &NavMap, obs: &Observation) -> Option<(String, Vec2<f64>)> {
        let mine = self.mine.as_ref()?;
        let from = map.nearest_passable(obs.pose.position(), None)?;
        let dist = map.distances(from);
        let mut best: Option<(f64, String, Vec2<f64>)> = None;
        for t in obs
            .task_status
            .iter()
            .filter(|t| t.kind == ObjectKind::Grasp && !t.completed)
        {
            if !mine.contains(&t.id) || self.unreachable.contains(&t.id) {
                continue;
            }
            match cheapest(&dist, &cells_near(map, t.position, APPROACH_RADIUS)) {
                Some((d, i)) => {
                    if best.as_ref().is_none_or(|(bd, _, _)| d < *bd - 1e-9) {
                        best = Some((d, t.id.clone(), map.center(map.cell(i))));
                    }
                }
                None => {
                    self.unreachable.insert(t.id.clone());
                }
            }
        }
        best.map(|(_, id, p)| (id, p))
    }

    /// Nearest passable spot inside a collection zone.
    fn drop_point(map: &NavMap, ctx: &PolicyContext, obs: &Observation) -> Option<Vec2<f64>> {
        let from = map.nearest_passable(obs.pose.position(), None)?;
        let dist = map.distances(from);
        let cands: Vec<usize> = (0..map.len())
            .filter(|&i| {
                let p = map.center(map.cell(i));
                map.passable()[i]
                    && ctx
                        .scene
                        .collection_zones()
                        .any(|z| z.region.expand(-0.02).contains(p))
            })
            .collect();
        cheapest(&dist, &cands).map(|(_, i)| map.center(map.cell(i)))
    }

    fn begin_sweep(&mut self, obs: &Observation) -> Action {
        self.stage = Stage::Sweep;
        self.driver.clear();
        self.inner.act(obs)
    }
}

impl Policy for DualPolicy {
    fn name(&self) -> &'static str {
        "dual"
    }

    fn reset(&mut self, ctx: &PolicyContext, seed: u64) {
        *self = DualPolicy {
            ctx: Some(ctx.clone()),
            ..Default::default()
        };
        self.inner.reset(ctx, seed);
    }

    fn act(&mut self, obs: &Observation) -> Action {
        let Some(ctx) = self.ctx.clone() else {
            return Action::idle(Mode::Sweep);
        };
        if self.stage == Stage::Sweep {
            return self.inner.act(obs);
        }
        let map = self
            .map
            .get_or_insert_with(|| Arc::new(NavMap::from_scene(&ctx.scene, 0.1)))
            .clone();
        if self.mine.is_none() {
            let mine = self.claim(&map, obs);
            if mine.is_empty() {
                return self.begin_sweep(obs);
            }
            self.mine = Some(mine);
        }
        if obs.carrying.is_some() && !matches!(self.stage, Stage::Deliver { .. }) {
            self.stage = Stage::Deliver { planned: false };
        }
        loop {
            match self.stage.clone() {
                Stage::Sweep => return self.begin_sweep(obs),
                Stage::Pick => match self.pick(&map, obs) {
                    None => {
                        self.stage = Stage::Sweep;
                    }
                    Some((id, goal)) => match map.plan(obs.pose.position(), goal) {
                        Some(path) => {
                            self.driver.set_path(&path, &map);
                            self.stage = Stage::Approach { id };
                        }
                        None => {
                            self.unreachable.insert(id);
                        }
                    },
                },
                Stage::Approach { id } => {
                    let done = obs.task_status.iter().any(|t| t.id == id && t.completed);
                    if done {
                        self.stage = Stage::Pick;
                        continue;
                    }
                    if self.driver.is_done() {
                        self.stage = Stage::Grasp { id, steps: 0 };
                        continue;
                    }
                    let [v, w] = self.driver.step(obs, &map, ctx.dt);
                    return Action::new(Mode::Navigate, v, w);
                }
                Stage::Grasp { id, steps } => {
                    if obs.task_status.iter().any(|t| t.id == id && t.completed) {
                        self.stage = Stage::Pick;
                        continue;
                    }
                    if steps >= GRASP_PATIENCE {
                        self.unreachable.insert(id);
                        self.stage = Stage::Pick;
                        continue;
                    }
                    self.stage = Stage::Grasp {
                        id: id.clone(),
                        steps: steps + 1,
                    };
                    return Action::grasp(id);
                }
                Stage::Deliver { planned } => {
                    if obs.carrying.is_none() {
                        self.stage = Stage::Pick;
                        continue;
                    }
                    if ctx.scene.collection_zones().next().is_none() {
                        return Action::idle(Mode::Grasp);
                    }
                    if !planned {
                        self.stage = Stage::Deliver { planned: true };
                        let path = Self::drop_point(&map, &ctx, obs)
                            .and_then(|p| map.plan(obs.pose.position(), p));
                        match path {
                            Some(p) => self.driver.set_path(&p, &map),
                            None => {
                                // nowhere to drop it; keep it and sweep
                                self.stage = Stage::Sweep;
                                continue;
                            }
                        }
                    }
                    if self.driver.is_done() {
                        return Action::idle(Mode::Grasp);
                    }
                    let [v, w] = self.driver.step(obs, &map, ctx.dt);
                    return Action::new(Mode::Navigate, v, w);
                }
            }
        }
    }
}
