//! Grid connectivity checks used while placing obstacles.

use std::collections::VecDeque;

use crate::world::{Cell, OccupancyGrid};

/// Every free cell of `grid` is 4-connected to `spawn`.
pub fn verify_connectivity(grid: &OccupancyGrid, spawn: Cell) -> bool {
    if spawn.0 >= grid.nx() || spawn.1 >= grid.ny() || !grid.is_free(spawn) {
        return false;
    }
    let free = grid.free_mask();
    reached_all(free, grid.nx(), grid.ny(), grid.index(spawn))
}

/// Breadth-first search over `free` from `start`; true when every free cell
/// was reached.
pub(crate) fn reached_all(free: &[bool], nx: usize, ny: usize, start: usize) -> bool {
    let mut seen = vec![false; free.len()];
    let mut q = VecDeque::from([start]);
    seen[start] = true;
    let mut n = 1;
    while let Some(i) = q.pop_front() {
        let (x, y) = (i % nx, i / nx);
        let mut visit = |j: usize| {
            if free[j] && !seen[j] {
                seen[j] = true;
                n += 1;
                q.push_back(j);
            }
        };
        if x + 1 < nx {
            visit(i + 1);
        }
        if x > 0 {
            visit(i - 1);
        }
        if y + 1 < ny {
            visit(i + nx);
        }
        if y > 0 {
            visit(i - nx);
        }
    }
    n == free.iter().filter(|f| **f).count()
}

/// Local test: filling cell `i` cannot split the free cells around it.
///
/// Walks the eight surrounding cells in ring order, where consecutive
/// cells share an edge, and requires every free edge neighbour of `i` to
/// fall in one run of free ring cells. Passing is sufficient for global
/// connectivity to survive; failing is inconclusive.
pub(crate) fn locally_simple(free: &[bool], nx: usize, ny: usize, i: usize) -> bool {
    let (x, y) = ((i % nx) as isize, (i / nx) as isize);
    const RING: [(isize, isize); 8] = [
        (0, 1),
        (1, 1),
        (1, 0),
        (1, -1),
        (0, -1),
        (-1, -1),
        (-1, 0),
        (-1, 1),
    ];
    let f: Vec<bool> = RING
        .iter()
        .map(|&(dx, dy)| {
            let (a, b) = (x + dx, y + dy);
            a >= 0
                && b >= 0
                && a < nx as isize
                && b < ny as isize
                && free[b as usize * nx + a as usize]
        })
        .collect();
    // even ring slots are the edge neighbours
    let edges = (0..8).step_by(2).filter(|&k| f[k]).count();
    if edges <= 1 {
        return true;
    }
    let Some(gap) = (0..8).find(|&k| !f[k]) else {
        return true;
    };
    // count runs that contain an edge neighbour, starting just after a gap
    let mut runs_with_edge = 0;
    let mut in_run = false;
    let mut has_edge = false;
    for step in 1..=8 {
        let k = (gap + step) % 8;
        if f[k] {
            in_run = true;
            has_edge |= k % 2 == 0;
        } else if in_run {
            runs_with_edge += usize::from(has_edge);
            in_run = false;
            has_edge = false;
        }
    }
    runs_with_edge <= 1
}
