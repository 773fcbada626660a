//! Planning map: per-cell clearance, inflated passability, path search and
//! clearance checks for segments and arcs.

use std::collections::VecDeque;

use crate::geometry::{Rect, Vec2};
use crate::sim::{CellKnowledge, StaticWorld};
use crate::world::{Cell, SceneSpec, ZoneKind};

use super::astar::{search, Connectivity, Heuristic, Mask};

/// Clearance a cell center needs to be passable. Exceeds half the footprint
/// diagonal (0.312 m) plus the contact tolerance.
pub const INFLATION: f64 = 0.35;
/// Clearance required along straight path pieces.
pub const SEGMENT_CLEARANCE: f64 = 0.34;
/// Clearance required along fillet arcs.
pub const ARC_CLEARANCE: f64 = 0.33;
/// Extra distance kept from cells only known to be occupied, covering the
/// part of an obstacle that can overhang its occupied cells.
const OVERHANG: f64 = 0.12;
const SAMPLE: f64 = 0.025;

#[derive(Debug, Clone)]
enum Source {
    /// Exact geometry of a known scene.
    Exact {
        statics: StaticWorld,
        zones: Vec<Rect<f64>>,
    },
    /// Cells sensed so far; unknown cells are not passable. Restricted
    /// zones are annotations, known up front and treated like walls.
    Sensed {
        known: Vec<Option<CellKnowledge>>,
        zones: Vec<Rect<f64>>,
    },
}

#[derive(Debug, Clone)]
pub struct NavMap {
    bounds: Rect<f64>,
    delta: f64,
    nx: usize,
    ny: usize,
    clear: Vec<f64>,
    passable: Vec<bool>,
    source: Source,
}

fn rect_distance(r: &Rect<f64>, p: Vec2<f64>) -> f64 {
    let dx = (r.min.x - p.x).max(0.0).max(p.x - r.max.x);
    let dy = (r.min.y - p.y).max(0.0).max(p.y - r.max.y);
    dx.hypot(dy)
}

fn cells_along(len: f64, delta: f64) -> usize {
    (len / delta + 0.5 - 1e-9).floor().max(0.0) as usize
}

impl NavMap {
    /// Map of a fully known scene. Restricted zones count as obstacles.
    pub fn from_scene(scene: &SceneSpec, delta: f64) -> Self {
        let statics = StaticWorld::new(scene);
        let zones = scene
            .zones
            .iter()
            .filter(|z| z.kind == ZoneKind::Restricted)
            .map(|z| z.region)
            .collect();
        let nx = cells_along(scene.bounds.width(), delta);
        let ny = cells_along(scene.bounds.height(), delta);
        let mut m = NavMap {
            bounds: scene.bounds,
            delta,
            nx,
            ny,
            clear: Vec::new(),
            passable: Vec::new(),
            source: Source::Exact { statics, zones },
        };
        m.clear = (0..nx * ny)
            .map(|i| m.point_clear(m.center(m.cell(i))))
            .collect();
        m.passable = m.clear.iter().map(|&c| c >= INFLATION).collect();
        m
    }

    /// Map with every cell unknown, to be filled by [`NavMap::observe`].
    pub fn unknown(bounds: Rect<f64>, delta: f64) -> Self {
        let nx = cells_along(bounds.width(), delta);
        let ny = cells_along(bounds.height(), delta);
        let mut m = NavMap {
            bounds,
            delta,
            nx,
            ny,
            clear: vec![f64::INFINITY; nx * ny],
            passable: vec![false; nx * ny],
            source: Source::Sensed {
                known: vec![None; nx * ny],
                zones: Vec::new(),
            },
        };
        for i in 0..nx * ny {
            m.clear[i] = m.wall_distance(m.center(m.cell(i)));
        }
        m
    }

    /// Adds keep-out rectangles to a sensed map.
    pub fn with_keep_out(mut self, rects: &[Rect<f64>]) -> Self {
        if let Source::Sensed { zones, .. } = &mut self.source {
            zones.extend_from_slice(rects);
            for i in 0..self.nx * self.ny {
                let d = self.wall_distance(self.center(self.cell(i)));
                self.clear[i] = self.clear[i].min(d);
                self.passable[i] &= self.clear[i] >= INFLATION;
            }
        }
        self
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn bounds(&self) -> Rect<f64> {
        self.bounds
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, c: Cell) -> usize {
        c.1 * self.nx + c.0
    }

    pub fn cell(&self, i: usize) -> Cell {
        (i % self.nx, i / self.nx)
    }

    pub fn center(&self, c: Cell) -> Vec2<f64> {
        Vec2::new(
            self.bounds.min.x + (c.0 as f64 + 0.5) * self.delta,
            self.bounds.min.y + (c.1 as f64 + 0.5) * self.delta,
        )
    }

    /// Cell containing `p`, clamped into the grid.
    pub fn cell_at(&self, p: Vec2<f64>) -> Cell {
        let f = |v: f64, o: f64, n: usize| {
            (((v - o) / self.delta).floor().max(0.0) as usize).min(n.saturating_sub(1))
        };
        (
            f(p.x, self.bounds.min.x, self.nx),
            f(p.y, self.bounds.min.y, self.ny),
        )
    }

    pub fn passable(&self) -> &[bool] {
        &self.passable
    }

    pub fn is_passable(&self, c: Cell) -> bool {
        c.0 < self.nx && c.1 < self.ny && self.passable[self.index(c)]
    }

    pub fn cell_clearance(&self, c: Cell) -> f64 {
        self.clear[self.index(c)]
    }

    pub fn knowledge(&self, c: Cell) -> Option<CellKnowledge> {
        match &self.source {
            Source::Exact { .. } => Some(if self.clear[self.index(c)] > 0.0 {
                CellKnowledge::Free
            } else {
                CellKnowledge::Occupied
            }),
            Source::Sensed { known, .. } => known[self.index(c)],
        }
    }

    fn wall_distance(&self, p: Vec2<f64>) -> f64 {
        let b = &self.bounds;
        let walls = (p.x - b.min.x)
            .min(b.max.x - p.x)
            .min(p.y - b.min.y)
            .min(b.max.y - p.y);
        match &self.source {
            Source::Sensed { zones, .. } => zones
                .iter()
                .fold(walls, |acc, z| acc.min(rect_distance(z, p))),
            Source::Exact { .. } => walls,
        }
    }

    /// Distance from `p` to the nearest known obstacle or wall, less the
    /// overhang allowance when only cells are known.
    pub fn point_clear(&self, p: Vec2<f64>) -> f64 {
        match &self.source {
            Source::Exact { statics, zones } => zones
                .iter()
                .fold(statics.clearance(p), |acc, z| acc.min(rect_distance(z, p))),
            Source::Sensed { known, .. } => {
                let walls = self.wall_distance(p);
                let reach = INFLATION + OVERHANG + 2.0 * self.delta;
                let c = self.cell_at(p);
                let k = (reach / self.delta).ceil() as isize;
                let mut best = f64::INFINITY;
                for dy in -k..=k {
                    for dx in -k..=k {
                        let (x, y) = (c.0 as isize + dx, c.1 as isize + dy);
                        if x < 0 || y < 0 || x >= self.nx as isize || y >= self.ny as isize {
                            continue;
                        }
                        let q = (x as usize, y as usize);
                        if known[self.index(q)] == Some(CellKnowledge::Occupied) {
                            best = best.min(self.center(q).distance(p));
                        }
                    }
                }
                walls.min(best - OVERHANG)
            }
        }
    }

    fn sensed_free(&self, p: Vec2<f64>) -> bool {
        match &self.source {
            Source::Exact { .. } => true,
            Source::Sensed { known, .. } => {
                known[self.index(self.cell_at(p))] == Some(CellKnowledge::Free)
            }
        }
    }

    /// Merges sensed cells. Returns whether anything changed.
    pub fn observe(&mut self, cells: &[(Cell, CellKnowledge)]) -> bool {
        let Source::Sensed { known, .. } = &mut self.source else {
            return false;
        };
        let mut fresh_occ = Vec::new();
        let mut fresh_free = Vec::new();
        for &(c, k) in cells {
            if c.0 >= self.nx || c.1 >= self.ny {
                continue;
            }
            let i = c.1 * self.nx + c.0;
            if known[i] != Some(k) {
                known[i] = Some(k);
                match k {
                    CellKnowledge::Occupied => fresh_occ.push(c),
                    CellKnowledge::Free => fresh_free.push(c),
                }
            }
        }
        if fresh_occ.is_empty() && fresh_free.is_empty() {
            return false;
        }
        let reach = INFLATION + OVERHANG + 2.0 * self.delta;
        let k = (reach / self.delta).ceil() as isize;
        for &c in &fresh_occ {
            let i = self.index(c);
            self.clear[i] = f64::NEG_INFINITY;
            self.passable[i] = false;
            let oc = self.center(c);
            for dy in -k..=k {
                for dx in -k..=k {
                    let (x, y) = (c.0 as isize + dx, c.1 as isize + dy);
                    if x < 0 || y < 0 || x >= self.nx as isize || y >= self.ny as isize {
                        continue;
                    }
                    let q = (x as usize, y as usize);
                    let qi = self.index(q);
                    let d = self.center(q).distance(oc) - OVERHANG;
                    if d < self.clear[qi] {
                        self.clear[qi] = d;
                        self.passable[qi] = false;
                    }
                }
            }
        }
        for &c in &fresh_free {
            let i = self.index(c);
            self.clear[i] = self.point_clear(self.center(c));
            self.passable[i] = self.clear[i] >= INFLATION;
        }
        // cells already known free whose clearance did not drop stay as they were
        if !fresh_occ.is_empty() {
            if let Source::Sensed { known, .. } = &self.source {
                for (i, p) in self.passable.iter_mut().enumerate() {
                    *p = known[i] == Some(CellKnowledge::Free) && self.clear[i] >= INFLATION;
                }
            }
        }
        true
    }

    pub fn point_ok(&self, p: Vec2<f64>, clearance: f64) -> bool {
        self.bounds.contains(p) && self.sensed_free(p) && self.point_clear(p) >= clearance
    }

    /// Straight motion from `a` to `b` keeps the required clearance.
    pub fn segment_ok(&self, a: Vec2<f64>, b: Vec2<f64>) -> bool {
        if let Source::Exact { statics, zones } = &self.source {
            if !self.bounds.contains(a) || !self.bounds.contains(b) {
                return false;
            }
            let seg = [a, b];
            let zone_ok = zones
                .iter()
                .all(|z| crate::geometry::convex_distance(&seg, &z.corners()) >= SEGMENT_CLEARANCE);
            return zone_ok && statics.segment_clearance(a, b) >= SEGMENT_CLEARANCE;
        }
        let n = (a.distance(b) / SAMPLE).ceil().max(1.0) as usize;
        (0..=n).all(|k| self.point_ok(a.lerp(b, k as f64 / n as f64), SEGMENT_CLEARANCE))
    }

    /// Circular arc about `c` of radius `r`, from polar angle `start`
    /// through signed `sweep`, keeps the arc clearance.
    pub fn arc_ok(&self, c: Vec2<f64>, r: f64, start: f64, sweep: f64) -> bool {
        let n = ((r * sweep.abs()) / 0.02).ceil().max(2.0) as usize;
        (0..=n).all(|k| {
            let a = start + sweep * k as f64 / n as f64;
            self.point_ok(c + Vec2::new(a.cos(), a.sin()) * r, ARC_CLEARANCE)
        })
    }

    /// Nearest passable cell to `p` (breadth first over all cells),
    /// skipping cells blocked in `extra`.
    pub fn nearest_passable(&self, p: Vec2<f64>, extra: Option<&[bool]>) -> Option<Cell> {
        let ok = |i: usize| self.passable[i] && extra.is_none_or(|e| !e[i]);
        let start = self.cell_at(p);
        let mut seen = vec![false; self.len()];
        let mut q = VecDeque::from([start]);
        seen[self.index(start)] = true;
        while let Some(c) = q.pop_front() {
            if ok(self.index(c)) {
                return Some(c);
            }
            for (dx, dy) in [(1isize, 0isize), (-1, 0), (0, 1), (0, -1)] {
                let (x, y) = (c.0 as isize + dx, c.1 as isize + dy);
                if x < 0 || y < 0 || x >= self.nx as isize || y >= self.ny as isize {
                    continue;
                }
                let n = (x as usize, y as usize);
                let ni = self.index(n);
                if !seen[ni] {
                    seen[ni] = true;
                    q.push_back(n);
                }
            }
        }
        None
    }

    fn open_mask(&self, extra: Option<&[bool]>) -> Vec<bool> {
        match extra {
            None => self.passable.clone(),
            Some(e) => self
                .passable
                .iter()
                .zip(e)
                .map(|(p, b)| *p && !*b)
                .collect(),
        }
    }

    /// Eight-connected path cost from `from` to every passable cell.
    pub fn distances(&self, from: Cell) -> Vec<f64> {
        use std::cmp::Reverse;
        use std::collections::BinaryHeap;
        let mut dist = vec![f64::INFINITY; self.len()];
        if !self.is_passable(from) {
            return dist;
        }
        let mask = Mask {
            nx: self.nx,
            ny: self.ny,
            open: &self.passable,
        };
        let mut heap = BinaryHeap::new();
        dist[self.index(from)] = 0.0;
        heap.push(Reverse((OrdF(0.0), self.index(from))));
        while let Some(Reverse((OrdF(d), i))) = heap.pop() {
            if d > dist[i] {
                continue;
            }
            for (n, w) in mask.moves(self.cell(i), Connectivity::Eight, std::f64::consts::SQRT_2) {
                let ni = self.index(n);
                let nd = d + w * self.delta;
                if nd < dist[ni] {
                    dist[ni] = nd;
                    heap.push(Reverse((OrdF(nd), ni)));
                }
            }
        }
        dist
    }

    /// Collision-checked polyline from `from` to `to`: A* over passable
    /// cells, then shortcut wherever a straight piece keeps clearance.
    /// `to` replaces the last cell center when it can be reached directly.
    pub fn plan(&self, from: Vec2<f64>, to: Vec2<f64>) -> Option<Vec<Vec2<f64>>> {
        self.plan_avoiding(from, to, None)
    }

    pub fn plan_avoiding(
        &self,
        from: Vec2<f64>,
        to: Vec2<f64>,
        extra: Option<&[bool]>,
    ) -> Option<Vec<Vec2<f64>>> {
        let s = self.nearest_passable(from, extra)?;
        let g = self.nearest_passable(to, extra)?;
        let open = self.open_mask(extra);
        let mask = Mask {
            nx: self.nx,
            ny: self.ny,
            open: &open,
        };
        let (cells, _) = search(
            mask,
            s,
            g,
            Connectivity::Eight,
            std::f64::consts::SQRT_2,
            Heuristic::Octile,
        )?;
        let mut pts = vec![from];
        pts.extend(cells.iter().map(|&c| self.center(c)));
        let last = *pts.last().expect("non-empty");
        if to.distance(last) > 1e-9 && self.segment_ok(last, to) {
            pts.push(to);
        }
        Some(self.string_pull(&pts))
    }

    /// Drops intermediate points while the straight shortcut stays clear.
    /// The first hop out of `pts[0]` is always kept.
    pub fn string_pull(&self, pts: &[Vec2<f64>]) -> Vec<Vec2<f64>> {
        if pts.len() <= 2 {
            return pts.to_vec();
        }
        let mut out = vec![pts[0]];
        let mut i = 0;
        while i + 1 < pts.len() {
            let mut j = i + 1;
            while j + 1 < pts.len() && self.segment_ok(pts[i], pts[j + 1]) {
                j += 1;
            }
            out.push(pts[j]);
            i = j;
        }
        out
    }
}

/// Total order wrapper for heap keys.
#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF(f64);

impl Eq for OrdF {}

impl PartialOrd for OrdF {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for OrdF {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&o.0)
    }
}
