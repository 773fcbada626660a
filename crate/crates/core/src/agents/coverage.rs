//! Sweep-only coverage policies: lane sweeps and greedy grid tours.

use std::collections::VecDeque;
use std::sync::Arc;

use crate::geometry::{wrap_angle, Vec2};
use crate::sim::{Action, Mode, ObjectKind, Observation};

use super::astar::Connectivity;
use super::boustrophedon::{coverage_route, robot_lanes, Orientation};
use super::navmap::{NavMap, SEGMENT_CLEARANCE};
use super::tracker::Driver;
use super::{AgentError, Policy, PolicyContext};

/// Coarse tour graph: nodes at the crossings of the x and y lane sets.
#[derive(Debug, Clone)]
pub struct CoarseGraph {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub valid: Vec<bool>,
    pub adj: Vec<Vec<usize>>,
}

impl CoarseGraph {
    pub fn point(&self, i: usize) -> Vec2<f64> {
        Vec2::new(self.xs[i % self.xs.len()], self.ys[i / self.xs.len()])
    }

    pub fn len(&self) -> usize {
        self.xs.len() * self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn build(map: &NavMap, region: Option<&[bool]>, conn: Connectivity) -> Self {
        let xs = robot_lanes(map, region, Orientation::Vertical).lanes;
        let ys = robot_lanes(map, region, Orientation::Horizontal).lanes;
        let nx = xs.len();
        let mut g = CoarseGraph {
            xs,
            ys,
            valid: Vec::new(),
            adj: Vec::new(),
        };
        g.valid = (0..g.len())
            .map(|i| {
                let p = g.point(i);
                let c = map.cell_at(p);
                map.point_ok(p, SEGMENT_CLEARANCE)
                    && map.is_passable(c)
                    && region.is_none_or(|r| r[map.index(c)])
            })
            .collect();
        let steps: &[(isize, isize)] = match conn {
            Connectivity::Four => &[(1, 0), (-1, 0), (0, 1), (0, -1)],
            Connectivity::Eight => &[
                (1, 0),
                (-1, 0),
                (0, 1),
                (0, -1),
                (1, 1),
                (1, -1),
                (-1, 1),
                (-1, -1),
            ],
        };
        let ny = g.ys.len();
        g.adj = (0..g.len())
            .map(|i| {
                if !g.valid[i] {
                    return Vec::new();
                }
                let (x, y) = ((i % nx) as isize, (i / nx) as isize);
                steps
                    .iter()
                    .filter_map(|&(dx, dy)| {
                        let (a, b) = (x + dx, y + dy);
                        if a < 0 || b < 0 || a >= nx as isize || b >= ny as isize {
                            return None;
                        }
                        let j = b as usize * nx + a as usize;
                        (g.valid[j] && map.segment_ok(g.point(i), g.point(j))).then_some(j)
                    })
                    .collect()
            })
            .collect();
        g
    }
}

/// Next node of a greedy tour: the nearest unvisited node by hop count from
/// `cur`. Among equally near nodes, the one whose first hop turns least
/// from `heading` wins, then the lowest index. Returns the hop path,
/// `cur` excluded.
pub fn greedy_next(
    g: &CoarseGraph,
    visited: &[bool],
    cur: usize,
    heading: Option<f64>,
) -> Option<Vec<usize>> {
    let n = g.len();
    let mut depth = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut first = vec![usize::MAX; n];
    let mut q = VecDeque::from([cur]);
    depth[cur] = 0;
    let mut best: Option<(usize, f64, usize, usize)> = None;
    while let Some(u) = q.pop_front() {
        if best.is_some_and(|(d, _, _, _)| depth[u] > d) {
            break;
        }
        if u != cur && !visited[u] {
            let step = g.point(first[u]) - g.point(cur);
            let turn = heading.map_or(0.0, |h| wrap_angle(step.y.atan2(step.x) - h).abs());
            let open = g.adj[u]
                .iter()
                .filter(|&&v| !visited[v] && v != cur)
                .count();
            let better = match best {
                None => true,
                Some((_, bt, bo, bi)) => {
                    turn < bt - 1e-9 || ((turn - bt).abs() <= 1e-9 && (open, u) < (bo, bi))
                }
            };
            if better {
                best = Some((depth[u], turn, open, u));
            }
            continue;
        }
        for &v in &g.adj[u] {
            if depth[v] == usize::MAX {
                depth[v] = depth[u] + 1;
                parent[v] = u;
                first[v] = if u == cur { v } else { first[u] };
                q.push_back(v);
            }
        }
    }
    let (_, _, _, goal) = best?;
    let mut path = vec![goal];
    let mut k = goal;
    while parent[k] != cur {
        k = parent[k];
        path.push(k);
    }
    path.reverse();
    Some(path)
}

/// Greedy nearest-unvisited tour over the coarse graph, continuing with a
/// planned transit whenever the graph runs out of reachable nodes.
pub fn grid_route(
    map: &NavMap,
    region: Option<&[bool]>,
    conn: Connectivity,
    start: Vec2<f64>,
    heading: f64,
) -> Result<Vec<Vec2<f64>>, AgentError> {
    let g = CoarseGraph::build(map, region, conn);
    let mut visited: Vec<bool> = g.valid.iter().map(|v| !v).collect();
    let mut route = vec![start];
    let mut here = start;
    let mut heading = Some(heading);
    let mut cur: Option<usize> = None;
    loop {
        if let Some(c) = cur {
            if let Some(path) = greedy_next(&g, &visited, c, heading) {
                let mut prev = g.point(c);
                for &k in &path {
                    visited[k] = true;
                    let p = g.point(k);
                    let d = p - prev;
                    heading = Some(d.y.atan2(d.x));
                    route.push(p);
                    prev = p;
                }
                cur = path.last().copied();
                here = prev;
                continue;
            }
        }
        // jump to the nearest remaining node through the fine map
        let Some(from) = map.nearest_passable(here, None) else {
            break;
        };
        let dist = map.distances(from);
        // the tour starts at a corner of the graph so it can spiral inward
        let corner = |i: usize| {
            g.adj[i]
                .iter()
                .filter(|&&j| g.point(j).x == g.point(i).x || g.point(j).y == g.point(i).y)
                .count()
                <= 2
        };
        let any_corner = cur.is_none() && (0..g.len()).any(|i| !visited[i] && corner(i));
        let mut best: Option<(f64, usize)> = None;
        for i in (0..g.len()).filter(|&i| !visited[i] && (!any_corner || corner(i))) {
            let d = dist[map.index(map.cell_at(g.point(i)))];
            if d.is_finite() && best.is_none_or(|(bd, _)| d < bd - 1e-9) {
                best = Some((d, i));
            }
        }
        let Some((_, i)) = best else { break };
        visited[i] = true;
        let target = g.point(i);
        if here.distance(target) < 1e-6 {
            cur = Some(i);
            continue;
        }
        match map.plan(here, target) {
            Some(p) => {
                let (a, b) = (p[p.len().saturating_sub(2)], target);
                if a.distance(b) > 1e-9 {
                    heading = Some((b.y - a.y).atan2(b.x - a.x));
                }
                route.extend_from_slice(&p[1..]);
                if route.last().is_some_and(|l| l.distance(target) > 1e-9) {
                    route.push(target);
                }
            }
            None => continue,
        }
        here = target;
        cur = Some(i);
    }
    if route.len() < 2 {
        return Err(AgentError::NoNavigableSpace);
    }
    Ok(route)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverageVariant {
    Manhattan,
    Chebyshev,
    Vertical,
    Horizontal,
}

/// Sweeps the whole time along a precomputed coverage route.
#[derive(Debug, Clone)]
pub struct CoveragePolicy {
    variant: CoverageVariant,
    ctx: Option<PolicyContext>,
    map: Option<Arc<NavMap>>,
    driver: Driver,
    planned: bool,
}

impl CoveragePolicy {
    pub fn new(variant: CoverageVariant) -> Self {
        CoveragePolicy {
            variant,
            ctx: None,
            map: None,
            driver: Driver::default(),
            planned: false,
        }
    }

    pub fn variant(&self) -> CoverageVariant {
        self.variant
    }

    /// Planned route, available after the first action.
    pub fn route(&self) -> Option<&[Vec2<f64>]> {
        self.planned.then(|| self.driver.tracker().remaining())
    }

    fn plan(&mut self, obs: &Observation) {
        self.planned = true;
        let Some(ctx) = &self.ctx else { return };
        let map = self
            .map
            .get_or_insert_with(|| Arc::new(NavMap::from_scene(&ctx.scene, 0.1)))
            .clone();
        let region = ctx.region_for(&map);
        let start = obs.pose.position();
        let route = match self.variant {
            CoverageVariant::Manhattan => {
                grid_route(&map, region, Connectivity::Four, start, obs.pose.theta)
            }
            CoverageVariant::Chebyshev => {
                grid_route(&map, region, Connectivity::Eight, start, obs.pose.theta)
            }
            CoverageVariant::Vertical | CoverageVariant::Horizontal => {
                let o = if self.variant == CoverageVariant::Vertical {
                    Orientation::Vertical
                } else {
                    Orientation::Horizontal
                };
                let targets: Vec<Vec2<f64>> = obs
                    .task_status
                    .iter()
                    .filter(|t| t.kind == ObjectKind::Sweep && !t.completed)
                    .map(|t| t.position)
                    .collect();
                coverage_route(&map, region, o, start, &targets)
            }
        };
        if let Ok(r) = route {
            self.driver.set_path(&r, &map);
        }
    }

    /// Shares a prebuilt map instead of building one at the first action.
    pub fn with_map(mut self, map: Arc<NavMap>) -> Self {
        self.map = Some(map);
        self
    }
}

impl Policy for CoveragePolicy {
    fn name(&self) -> &'static str {
        match self.variant {
            CoverageVariant::Manhattan => "manhattan",
            CoverageVariant::Chebyshev => "chebyshev",
            CoverageVariant::Vertical => "vertical",
            CoverageVariant::Horizontal => "horizontal",
        }
    }

    fn reset(&mut self, ctx: &PolicyContext, _seed: u64) {
        self.map = None;
        self.ctx = Some(ctx.clone());
        self.driver = Driver::default();
        self.planned = false;
    }

    fn act(&mut self, obs: &Observation) -> Action {
        if !self.planned {
            self.plan(obs);
        }
        let (Some(map), Some(ctx)) = (&self.map, &self.ctx) else {
            return Action::idle(Mode::Sweep);
        };
        let [v, w] = self.driver.step(obs, map, ctx.dt);
        Action::new(Mode::Sweep, v, w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Pose, Rect};
    use crate::world::SceneSpec;

    fn room(w: f64, h: f64) -> NavMap {
        NavMap::from_scene(
            &SceneSpec::empty(
                "r",
                Rect::from_xywh(0.0, 0.0, w, h),
                Pose::new(0.5, 0.5, 0.0),
            ),
            0.1,
        )
    }

    #[test]
    fn last_unvisited_node_is_next() {
        let g = CoarseGraph::build(&room(3.0, 3.0), None, Connectivity::Four);
        let mut visited = vec![true; g.len()];
        let last = g.len() - 1;
        visited[last] = false;
        let path = greedy_next(&g, &visited, 0, Some(0.0)).unwrap();
        assert_eq!(path.last(), Some(&last));
    }

    #[test]
    fn corner_start_spirals_inward() {
        let m = room(3.0, 3.0);
        let g = CoarseGraph::build(&m, None, Connectivity::Four);
        let route = grid_route(&m, None, Connectivity::Four, g.point(0), 0.0).unwrap();
        // the first leg runs the whole bottom row, then turns up the side
        let nx = g.xs.len();
        assert!((route[nx].x - g.xs[nx - 1]).abs() < 1e-9 && route[nx].y > g.ys[0]);
        for k in 0..nx - 1 {
            assert!((route[1 + k].y - g.ys[0]).abs() < 1e-9);
        }
        assert!(route.len() >= g.valid.iter().filter(|v| **v).count());
    }
}
