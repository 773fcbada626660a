//! Static split of the navigable cells among robots.

use std::collections::VecDeque;

use crate::geometry::Vec2;
use crate::world::OccupancyGrid;

fn bfs(grid: &OccupancyGrid, seeds: &[usize]) -> Vec<usize> {
    let mut d = vec![usize::MAX; grid.len()];
    let mut q = VecDeque::new();
    for &s in seeds {
        d[s] = 0;
        q.push_back(s);
    }
    while let Some(i) = q.pop_front() {
        for n in grid.neighbors4(grid.cell(i)) {
            let ni = grid.index(n);
            if grid.is_navigable(n) && d[ni] == usize::MAX {
                d[ni] = d[i] + 1;
                q.push_back(ni);
            }
        }
    }
    d
}

/// Spread seeds: each next seed is the cell farthest (in 4-connected steps)
/// from the seeds so far; the first is farthest from the lowest-index cell.
/// Ties go to the lowest index.
pub fn spread_seeds(grid: &OccupancyGrid, n: usize) -> Vec<usize> {
    let Some(first) = (0..grid.len()).find(|&i| grid.navigable_mask()[i]) else {
        return Vec::new();
    };
    let farthest = |d: &[usize]| {
        (0..grid.len())
            .filter(|&i| d[i] != usize::MAX)
            .fold(None, |best: Option<usize>, i| match best {
                Some(b) if d[b] >= d[i] => Some(b),
                _ => Some(i),
            })
    };
    let mut seeds = vec![farthest(&bfs(grid, &[first])).unwrap_or(first)];
    while seeds.len() < n {
        let d = bfs(grid, &seeds);
        match farthest(&d) {
            Some(s) if d[s] > 0 => seeds.push(s),
            _ => break,
        }
    }
    seeds
}

/// Splits the navigable cells into `n` connected regions of near-equal
/// size: regions grow breadth-first from spread seeds, the smallest region
/// taking one cell per round. Returns sorted cell indices per region.
pub fn partition_regions(grid: &OccupancyGrid, n: usize) -> Vec<Vec<usize>> {
    let n = n.max(1);
    if n == 1 {
        return vec![(0..grid.len())
            .filter(|&i| grid.navigable_mask()[i])
            .collect()];
    }
    let seeds = spread_seeds(grid, n);
    let mut owner = vec![usize::MAX; grid.len()];
    let mut size = vec![0usize; seeds.len()];
    let mut queue: Vec<VecDeque<usize>> = vec![VecDeque::new(); seeds.len()];
    for (r, &s) in seeds.iter().enumerate() {
        owner[s] = r;
        size[r] = 1;
        queue[r].extend(grid.neighbors4(grid.cell(s)).map(|c| grid.index(c)));
    }
    let mut alive = vec![true; seeds.len()];
    while let Some(r) = (0..seeds.len())
        .filter(|&r| alive[r])
        .min_by_key(|&r| (size[r], r))
    {
        let mut grown = false;
        while let Some(i) = queue[r].pop_front() {
            if owner[i] == usize::MAX && grid.navigable_mask()[i] {
                owner[i] = r;
                size[r] += 1;
                queue[r].extend(grid.neighbors4(grid.cell(i)).map(|c| grid.index(c)));
                grown = true;
                break;
            }
        }
        if !grown {
            alive[r] = false;
        }
    }
    let mut out = vec![Vec::new(); seeds.len()];
    for (i, &o) in owner.iter().enumerate() {
        if o != usize::MAX {
            out[o].push(i);
        }
    }
    out
}

/// Region masks in robot order: each robot takes the free region nearest to
/// it, closest pair first.
pub fn assign_regions(
    grid: &OccupancyGrid,
    regions: &[Vec<usize>],
    robots: &[Vec2<f64>],
) -> Vec<Option<Vec<bool>>> {
    let mut out = vec![None; robots.len()];
    let mut taken = vec![false; regions.len()];
    let mut pairs = Vec::new();
    for (k, p) in robots.iter().enumerate() {
        for (r, cells) in regions.iter().enumerate() {
            let d = cells
                .iter()
                .map(|&i| grid.center(grid.cell(i)).distance(*p))
                .fold(f64::INFINITY, f64::min);
            pairs.push((d, k, r));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    for (_, k, r) in pairs {
        if out[k].is_some() || taken[r] {
            continue;
        }
        taken[r] = true;
        let mut mask = vec![false; grid.len()];
        for &i in &regions[r] {
            mask[i] = true;
        }
        out[k] = Some(mask);
    }
    out
}
