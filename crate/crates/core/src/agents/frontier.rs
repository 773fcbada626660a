//! Frontier exploration on a map built from sensed cells only.

use std::collections::BTreeSet;

use crate::sim::{Action, CellKnowledge, Mode, Observation};
use crate::world::{Cell, ZoneKind};

use super::navmap::NavMap;
use super::tracker::Driver;
use super::{Policy, PolicyContext};

/// Known-free passable cells with an unknown 4-neighbour.
pub fn frontier_mask(map: &NavMap) -> Vec<bool> {
    let (nx, ny) = (map.nx(), map.ny());
    (0..map.len())
        .map(|i| {
            let c = map.cell(i);
            if !map.is_passable(c) || map.knowledge(c) != Some(CellKnowledge::Free) {
                return false;
            }
            let (x, y) = (c.0 as isize, c.1 as isize);
            [(1, 0), (-1, 0), (0, 1), (0, -1)].iter().any(|&(dx, dy)| {
                let (a, b) = (x + dx, y + dy);
                a >= 0
                    && b >= 0
                    && a < nx as isize
                    && b < ny as isize
                    && map.knowledge((a as usize, b as usize)).is_none()
            })
        })
        .collect()
}

/// Nearest frontier by path cost from `from`, ties to the lowest cell
/// index. Cells outside `region` or in `skip` are ignored.
pub fn select_frontier(
    map: &NavMap,
    from: Cell,
    region: Option<&[bool]>,
    skip: &BTreeSet<usize>,
) -> Option<(Cell, f64)> {
    let dist = map.distances(from);
    let front = frontier_mask(map);
    let mut best: Option<(f64, usize)> = None;
    for i in 0..map.len() {
        if !front[i] || skip.contains(&i) || region.is_some_and(|r| !r[i]) || !dist[i].is_finite() {
            continue;
        }
        if best.is_none_or(|(d, _)| dist[i] < d - 1e-9) {
            best = Some((dist[i], i));
        }
    }
    best.map(|(d, i)| (map.cell(i), d))
}

#[derive(Debug, Clone, Default)]
pub struct FrontierPolicy {
    ctx: Option<PolicyContext>,
    map: Option<NavMap>,
    driver: Driver,
    goal: Option<usize>,
    skip: BTreeSet<usize>,
    exhausted: bool,
}

impl FrontierPolicy {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn map(&self) -> Option<&NavMap> {
        self.map.as_ref()
    }

    pub fn goal(&self) -> Option<Cell> {
        let m = self.map.as_ref()?;
        self.goal.map(|g| m.cell(g))
    }

    /// Exploration finished: no reachable frontier remains.
    pub fn is_exhausted(&self) -> bool {
        self.exhausted
    }

    fn path_valid(&self, map: &NavMap, obs: &Observation) -> bool {
        let mut pts = vec![obs.pose.position()];
        pts.extend_from_slice(self.driver.tracker().remaining());
        pts.windows(2).skip(1).all(|w| map.segment_ok(w[0], w[1]))
    }
}

impl Policy for FrontierPolicy {
    fn name(&self) -> &'static str {
        "frontier"
    }

    fn reset(&mut self, ctx: &PolicyContext, _seed: u64) {
        *self = FrontierPolicy {
            ctx: Some(ctx.clone()),
            ..Default::default()
        };
    }

    fn needs_local_grid(&self) -> bool {
        true
    }

    fn act(&mut self, obs: &Observation) -> Action {
        let Some(ctx) = self.ctx.clone() else {
            return Action::idle(Mode::Sweep);
        };
        let mut map = self.map.take().unwrap_or_else(|| {
            let keep_out: Vec<_> = ctx
                .scene
                .zones
                .iter()
                .filter(|z| z.kind == ZoneKind::Restricted)
                .map(|z| z.region)
                .collect();
            NavMap::unknown(ctx.scene.bounds, 0.1).with_keep_out(&keep_out)
        });
        let changed = map.observe(&obs.local_grid.cells);
        let region = ctx.region_for(&map);
        let front = if changed || self.goal.is_some() {
            Some(frontier_mask(&map))
        } else {
            None
        };
        if let (Some(g), Some(f)) = (self.goal, &front) {
            let stale = !f[g] || self.driver.is_done() || (changed && !self.path_valid(&map, obs));
            if stale {
                if self.driver.is_done() && f[g] {
                    // arrived without clearing the frontier; do not come back
                    self.skip.insert(g);
                }
                self.goal = None;
                self.driver.clear();
            }
        }
        if self.goal.is_none() {
            let here = obs.pose.position();
            let from = map.nearest_passable(here, None);
            let pick = from.and_then(|f| select_frontier(&map, f, region, &self.skip));
            match pick {
                None => {
                    self.exhausted = true;
                    self.map = Some(map);
                    return Action::idle(Mode::Sweep);
                }
                Some((cell, _)) => {
                    let gi = map.index(cell);
                    match map.plan(here, map.center(cell)) {
                        Some(path) => {
                            self.driver.set_path(&path, &map);
                            self.goal = Some(gi);
                        }
                        None => {
                            self.skip.insert(gi);
                        }
                    }
                }
            }
        }
        self.exhausted = false;
        let [v, w] = self.driver.step(obs, &map, ctx.dt);
        self.map = Some(map);
        Action::new(Mode::Sweep, v, w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Rect;

    #[test]
    fn nearer_frontier_wins() {
        // a free corridor row y = 5..7 on a 20 x 12 grid, unknown at both ends
        let mut m = NavMap::unknown(Rect::from_xywh(0.0, 0.0, 2.0, 1.2), 0.1);
        let mut cells = Vec::new();
        for y in 0..12 {
            for x in 3..18 {
                cells.push(((x, y), CellKnowledge::Free));
            }
        }
        m.observe(&cells);
        let front = frontier_mask(&m);
        assert!(front.iter().any(|f| *f));
        let passable: Vec<Cell> = (0..m.len())
            .filter(|&i| m.passable()[i])
            .map(|i| m.cell(i))
            .collect();
        assert!(!passable.is_empty());
        let row = passable[0].1;
        let xs: Vec<usize> = passable
            .iter()
            .filter(|c| c.1 == row)
            .map(|c| c.0)
            .collect();
        let (lo, hi) = (*xs.first().unwrap(), *xs.last().unwrap());
        let start = (lo + 5, row);
        let (goal, cost) = select_frontier(&m, start, None, &BTreeSet::new()).unwrap();
        assert_eq!(goal.0, lo);
        assert!(hi - start.0 > start.0 - lo);
        assert!((cost - 0.5).abs() < 1e-9);
    }
}
