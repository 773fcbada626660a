use std::collections::VecDeque;

use crate::geometry::{Rect, Vec2};
use crate::world::{SceneSpec, WorldError};

pub type Cell = (usize, usize);

/// Square-cell decomposition of the floor. A cell is free when its center
/// lies inside the bounds and outside every static obstacle; it is navigable
/// when it is free and 4-connected to a spawn cell.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    origin: Vec2<f64>,
    delta: f64,
    nx: usize,
    ny: usize,
    free: Vec<bool>,
    navigable: Vec<bool>,
}

fn cells_along(len: f64, delta: f64) -> usize {
    // centers must stay inside the extent
    let n = (len / delta + 0.5 - 1e-9).floor();
    n.max(0.0) as usize
}

impl OccupancyGrid {
    /// Grid over `bounds` with an explicit free mask; navigability is the
    /// 4-connected component(s) of the seed cells.
    pub fn from_mask(bounds: Rect<f64>, delta: f64, free: Vec<bool>, seeds: &[Cell]) -> Self {
        let nx = cells_along(bounds.width(), delta);
        let ny = cells_along(bounds.height(), delta);
        assert_eq!(free.len(), nx * ny, "mask size does not match grid");
        let mut g = OccupancyGrid {
            origin: bounds.min,
            delta,
            nx,
            ny,
            navigable: vec![false; free.len()],
            free,
        };
        g.navigable = g.flood(seeds);
        g
    }

    /// Grid whose navigable set is exactly `mask`.
    pub fn from_navigable(bounds: Rect<f64>, delta: f64, mask: Vec<bool>) -> Self {
        let nx = cells_along(bounds.width(), delta);
        let ny = cells_along(bounds.height(), delta);
        assert_eq!(mask.len(), nx * ny, "mask size does not match grid");
        OccupancyGrid {
            origin: bounds.min,
            delta,
            nx,
            ny,
            free: mask.clone(),
            navigable: mask,
        }
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

    pub fn origin(&self) -> Vec2<f64> {
        self.origin
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

    pub fn cell(&self, idx: usize) -> Cell {
        (idx % self.nx, idx / self.nx)
    }

    pub fn center(&self, c: Cell) -> Vec2<f64> {
        Vec2::new(
            self.origin.x + (c.0 as f64 + 0.5) * self.delta,
            self.origin.y + (c.1 as f64 + 0.5) * self.delta,
        )
    }

    /// Cell containing `p`, if inside the grid.
    pub fn cell_at(&self, p: Vec2<f64>) -> Option<Cell> {
        let fx = ((p.x - self.origin.x) / self.delta).floor();
        let fy = ((p.y - self.origin.y) / self.delta).floor();
        if fx < 0.0 || fy < 0.0 || fx >= self.nx as f64 || fy >= self.ny as f64 {
            return None;
        }
        Some((fx as usize, fy as usize))
    }

    pub fn is_free(&self, c: Cell) -> bool {
        self.free[self.index(c)]
    }

    pub fn is_navigable(&self, c: Cell) -> bool {
        c.0 < self.nx && c.1 < self.ny && self.navigable[self.index(c)]
    }

    pub fn free_mask(&self) -> &[bool] {
        &self.free
    }

    pub fn navigable_mask(&self) -> &[bool] {
        &self.navigable
    }

    pub fn count_navigable(&self) -> usize {
        self.navigable.iter().filter(|&&b| b).count()
    }

    /// Navigable area in square meters.
    pub fn a_total(&self) -> f64 {
        self.count_navigable() as f64 * self.delta * self.delta
    }

    pub fn navigable_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.len())
            .filter(|&i| self.navigable[i])
            .map(|i| self.cell(i))
    }

    pub fn neighbors4(&self, c: Cell) -> impl Iterator<Item = Cell> {
        let (nx, ny) = (self.nx as isize, self.ny as isize);
        let (x, y) = (c.0 as isize, c.1 as isize);
        [(1, 0), (-1, 0), (0, 1), (0, -1)]
            .into_iter()
            .filter_map(move |(dx, dy)| {
                let (a, b) = (x + dx, y + dy);
                (a >= 0 && b >= 0 && a < nx && b < ny).then_some((a as usize, b as usize))
            })
    }

    pub fn neighbors8(&self, c: Cell) -> impl Iterator<Item = Cell> {
        let (nx, ny) = (self.nx as isize, self.ny as isize);
        let (x, y) = (c.0 as isize, c.1 as isize);
        [
            (1, 0),
            (-1, 0),
            (0, 1),
            (0, -1),
            (1, 1),
            (1, -1),
            (-1, 1),
            (-1, -1),
        ]
        .into_iter()
        .filter_map(move |(dx, dy)| {
            let (a, b) = (x + dx, y + dy);
            (a >= 0 && b >= 0 && a < nx && b < ny).then_some((a as usize, b as usize))
        })
    }

    fn flood(&self, seeds: &[Cell]) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::new();
        for &s in seeds {
            if s.0 < self.nx && s.1 < self.ny && self.free[self.index(s)] && !seen[self.index(s)] {
                seen[self.index(s)] = true;
                queue.push_back(s);
            }
        }
        while let Some(c) = queue.pop_front() {
            for n in self.neighbors4(c) {
                let i = self.index(n);
                if self.free[i] && !seen[i] {
                    seen[i] = true;
                    queue.push_back(n);
                }
            }
        }
        seen
    }

    /// Nearest free cell to `p` by breadth-first search over the grid.
    pub fn nearest_free(&self, p: Vec2<f64>) -> Option<Cell> {
        let clamp = |v: f64, n: usize| {
            ((v / self.delta).floor().max(0.0) as usize).min(n.saturating_sub(1))
        };
        let start = (
            clamp(p.x - self.origin.x, self.nx),
            clamp(p.y - self.origin.y, self.ny),
        );
        if self.is_empty() {
            return None;
        }
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::from([start]);
        seen[self.index(start)] = true;
        while let Some(c) = queue.pop_front() {
            if self.free[self.index(c)] {
                return Some(c);
            }
            for n in self.neighbors4(c) {
                if !seen[self.index(n)] {
                    seen[self.index(n)] = true;
                    queue.push_back(n);
                }
            }
        }
        None
    }
}

/// Free mask for `scene` at resolution `delta`: cell centers outside all
/// static obstacles.
pub fn free_mask(scene: &SceneSpec, delta: f64) -> Vec<bool> {
    let nx = cells_along(scene.bounds.width(), delta);
    let ny = cells_along(scene.bounds.height(), delta);
    let shapes: Vec<_> = scene
        .obstacles
        .iter()
        .map(|o| (o.shape.aabb(), &o.shape))
        .collect();
    let mut mask = vec![true; nx * ny];
    for j in 0..ny {
        let y = scene.bounds.min.y + (j as f64 + 0.5) * delta;
        for i in 0..nx {
            let p = Vec2::new(scene.bounds.min.x + (i as f64 + 0.5) * delta, y);
            if shapes.iter().any(|(bb, s)| bb.contains(p) && s.contains(p)) {
                mask[j * nx + i] = false;
            }
        }
    }
    mask
}

pub fn navigable_grid(scene: &SceneSpec, delta: f64) -> Result<OccupancyGrid, WorldError> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(WorldError::validation(
            "delta",
            "resolution must be positive",
        ));
    }
    let mask = free_mask(scene, delta);
    let mut g = OccupancyGrid::from_mask(scene.bounds, delta, mask, &[]);
    let seeds: Vec<Cell> = scene
        .spawns
        .iter()
        .filter_map(|s| g.nearest_free(s.position()))
        .collect();
    g.navigable = g.flood(&seeds);
    if g.count_navigable() == 0 {
        return Err(WorldError::DegenerateScene(format!(
            "scene {} has no navigable cells",
            scene.id
        )));
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Pose;
    use crate::world::{Shape, StaticObstacle};

    fn room(w: f64, h: f64) -> SceneSpec {
        SceneSpec::empty(
            "room",
            Rect::from_xywh(0.0, 0.0, w, h),
            Pose::new(1.0, 1.0, 0.0),
        )
    }

    #[test]
    fn empty_room_area() {
        let g = navigable_grid(&room(10.0, 10.0), 0.1).unwrap();
        assert_eq!((g.nx(), g.ny()), (100, 100));
        assert_eq!(g.count_navigable(), 10_000);
        assert!((g.a_total() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn fully_blocked_room_is_degenerate() {
        let mut s = room(4.0, 4.0);
        s.obstacles.push(StaticObstacle {
            id: "all".into(),
            shape: Shape::Rect(Rect::from_xywh(0.0, 0.0, 4.0, 4.0)),
            material_tag: String::new(),
        });
        assert!(matches!(
            navigable_grid(&s, 0.1),
            Err(WorldError::DegenerateScene(_))
        ));
    }

    #[test]
    fn cell_lookup_round_trip() {
        let g = navigable_grid(&room(3.0, 2.0), 0.1).unwrap();
        for idx in [0, 7, 31, g.len() - 1] {
            let c = g.cell(idx);
            assert_eq!(g.cell_at(g.center(c)), Some(c));
        }
        assert_eq!(g.cell_at(Vec2::new(-0.01, 0.5)), None);
    }
}
