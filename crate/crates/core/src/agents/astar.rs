//! Grid A* with selectable connectivity and heuristic.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::world::{Cell, OccupancyGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Connectivity {
    Four,
    Eight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Heuristic {
    Manhattan,
    Chebyshev,
    /// Octile distance, admissible for eight-connected moves costing
    /// `sqrt(2)` diagonally.
    Octile,
}

impl Heuristic {
    fn eval(self, a: Cell, b: Cell) -> f64 {
        let dx = a.0.abs_diff(b.0) as f64;
        let dy = a.1.abs_diff(b.1) as f64;
        match self {
            Heuristic::Manhattan => dx + dy,
            Heuristic::Chebyshev => dx.max(dy),
            Heuristic::Octile => dx.max(dy) + (std::f64::consts::SQRT_2 - 1.0) * dx.min(dy),
        }
    }
}

/// Passability mask over an `nx` by `ny` cell array, row-major.
#[derive(Debug, Clone, Copy)]
pub struct Mask<'a> {
    pub nx: usize,
    pub ny: usize,
    pub open: &'a [bool],
}

impl Mask<'_> {
    fn is_open(&self, x: isize, y: isize) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.nx
            && (y as usize) < self.ny
            && self.open[y as usize * self.nx + x as usize]
    }

    /// Moves out of `c` as `(neighbor, step cost)`. Diagonal moves may not
    /// cut a blocked corner.
    pub fn moves(
        &self,
        c: Cell,
        conn: Connectivity,
        diag_cost: f64,
    ) -> impl Iterator<Item = (Cell, f64)> + '_ {
        const STEPS: [(isize, isize); 8] = [
            (1, 0),
            (-1, 0),
            (0, 1),
            (0, -1),
            (1, 1),
            (1, -1),
            (-1, 1),
            (-1, -1),
        ];
        let n = if conn == Connectivity::Four { 4 } else { 8 };
        let (x, y) = (c.0 as isize, c.1 as isize);
        STEPS[..n].iter().filter_map(move |&(dx, dy)| {
            let (a, b) = (x + dx, y + dy);
            if !self.is_open(a, b) {
                return None;
            }
            let diagonal = dx != 0 && dy != 0;
            if diagonal && !(self.is_open(x + dx, y) && self.is_open(x, y + dy)) {
                return None;
            }
            Some((
                (a as usize, b as usize),
                if diagonal { diag_cost } else { 1.0 },
            ))
        })
    }
}

#[derive(PartialEq)]
struct Node {
    f: f64,
    g: f64,
    idx: usize,
}

impl Eq for Node {}

impl Ord for Node {
    fn cmp(&self, o: &Self) -> Ordering {
        // min-heap on f, then larger g, then lower index
        o.f.total_cmp(&self.f)
            .then(self.g.total_cmp(&o.g))
            .then(o.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Least-cost path between two open cells, endpoints included, with its
/// cost. The heuristic must be admissible for the move costs to keep the
/// result optimal.
pub fn search(
    mask: Mask,
    start: Cell,
    goal: Cell,
    conn: Connectivity,
    diag_cost: f64,
    h: Heuristic,
) -> Option<(Vec<Cell>, f64)> {
    let idx = |c: Cell| c.1 * mask.nx + c.0;
    if start.0 >= mask.nx || start.1 >= mask.ny || goal.0 >= mask.nx || goal.1 >= mask.ny {
        return None;
    }
    if !mask.open[idx(start)] || !mask.open[idx(goal)] {
        return None;
    }
    let n = mask.nx * mask.ny;
    let mut g = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut heap = BinaryHeap::new();
    g[idx(start)] = 0.0;
    heap.push(Node {
        f: h.eval(start, goal),
        g: 0.0,
        idx: idx(start),
    });
    while let Some(Node { g: gc, idx: ci, .. }) = heap.pop() {
        if closed[ci] {
            continue;
        }
        closed[ci] = true;
        let c = (ci % mask.nx, ci / mask.nx);
        if c == goal {
            let mut path = vec![c];
            let mut k = ci;
            while parent[k] != usize::MAX {
                k = parent[k];
                path.push((k % mask.nx, k / mask.nx));
            }
            path.reverse();
            return Some((path, gc));
        }
        for (nb, w) in mask.moves(c, conn, diag_cost) {
            let ni = idx(nb);
            let ng = gc + w;
            if !closed[ni] && ng < g[ni] {
                g[ni] = ng;
                parent[ni] = ci;
                heap.push(Node {
                    f: ng + h.eval(nb, goal),
                    g: ng,
                    idx: ni,
                });
            }
        }
    }
    None
}

/// Shortest path over the navigable cells of `grid` with unit steps.
/// Diagonal steps (eight-connected) also cost one, matching the Chebyshev
/// metric.
pub fn astar_path(
    grid: &OccupancyGrid,
    start: Cell,
    goal: Cell,
    conn: Connectivity,
    heuristic: Heuristic,
) -> Option<Vec<Cell>> {
    let mask = Mask {
        nx: grid.nx(),
        ny: grid.ny(),
        open: grid.navigable_mask(),
    };
    search(mask, start, goal, conn, 1.0, heuristic).map(|(p, _)| p)
}

/// Number of moves along a cell path.
pub fn path_cost(path: &[Cell]) -> usize {
    path.len().saturating_sub(1)
}
