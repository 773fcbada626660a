//! Base floor plans: open rectangle, L shape, and Voronoi rooms with doors.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;

use super::connectivity::reached_all;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    Rectangular,
    LShaped,
    MultiRoom,
}

impl Layout {
    pub const ALL: [Layout; 3] = [Layout::Rectangular, Layout::LShaped, Layout::MultiRoom];

    pub fn as_str(self) -> &'static str {
        match self {
            Layout::Rectangular => "rectangular",
            Layout::LShaped => "l_shaped",
            Layout::MultiRoom => "multi_room",
        }
    }

    pub fn parse(s: &str) -> Option<Layout> {
        Layout::ALL.into_iter().find(|l| l.as_str() == s)
    }
}

/// Wall cells of a floor plan on an `nx` by `ny` grid.
#[derive(Debug, Clone)]
pub struct Plan {
    pub nx: usize,
    pub ny: usize,
    pub wall: Vec<bool>,
}

/// Cell-aligned rectangle `[i0, i1) x [j0, j1)`.
pub type CellRect = (usize, usize, usize, usize);

/// Merges marked cells into rectangles: horizontal runs, stacked while the
/// run above has the same extent.
pub fn merge_cells(mask: &[bool], nx: usize, ny: usize) -> Vec<CellRect> {
    let mut open: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut out = Vec::new();
    for j in 0..=ny {
        let mut runs = Vec::new();
        if j < ny {
            let mut i = 0;
            while i < nx {
                if mask[j * nx + i] {
                    let s = i;
                    while i < nx && mask[j * nx + i] {
                        i += 1;
                    }
                    runs.push((s, i));
                } else {
                    i += 1;
                }
            }
        }
        let mut next = BTreeMap::new();
        for r in runs {
            let start = open.remove(&r).unwrap_or(j);
            next.insert(r, start);
        }
        for ((i0, i1), j0) in open {
            out.push((i0, j0, i1, j));
        }
        open = next;
    }
    out.sort_unstable();
    out
}

pub fn build_plan(
    layout: Layout,
    nx: usize,
    ny: usize,
    delta: f64,
    rng: &mut ChaCha8Rng,
) -> Option<Plan> {
    let mut wall = vec![false; nx * ny];
    match layout {
        Layout::Rectangular => {}
        Layout::LShaped => {
            for j in ny / 2..ny {
                for i in nx / 2..nx {
                    wall[j * nx + i] = true;
                }
            }
        }
        Layout::MultiRoom => {
            let k = rng.gen_range(2..=4usize);
            let seeds: Vec<Vec2<f64>> = (0..k)
                .map(|_| Vec2::new(rng.gen_range(0.0..nx as f64), rng.gen_range(0.0..ny as f64)))
                .collect();
            let label: Vec<usize> = (0..nx * ny)
                .map(|c| {
                    let p = Vec2::new((c % nx) as f64 + 0.5, (c / nx) as f64 + 0.5);
                    (0..k)
                        .min_by(|&a, &b| seeds[a].distance(p).total_cmp(&seeds[b].distance(p)))
                        .unwrap_or(0)
                })
                .collect();
            // boundary cells per adjacent room pair
            let mut pairs: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
            for c in 0..nx * ny {
                let (i, j) = (c % nx, c / nx);
                let mut other = None;
                if i + 1 < nx && label[c + 1] != label[c] {
                    other = Some(label[c + 1]);
                } else if j + 1 < ny && label[c + nx] != label[c] {
                    other = Some(label[c + nx]);
                }
                if let Some(o) = other {
                    wall[c] = true;
                    let key = (label[c].min(o), label[c].max(o));
                    pairs.entry(key).or_default().push(c);
                }
            }
            let door_half = 0.45 / delta;
            for cells in pairs.values() {
                if (cells.len() as f64) * delta < 1.2 {
                    continue;
                }
                let mid = cells[cells.len() / 2];
                let (mx, my) = ((mid % nx) as f64, (mid / nx) as f64);
                for &c in cells {
                    let (x, y) = ((c % nx) as f64, (c / nx) as f64);
                    if (x - mx).hypot(y - my) <= door_half {
                        wall[c] = false;
                    }
                }
            }
            let free: Vec<bool> = wall.iter().map(|w| !w).collect();
            let start = free.iter().position(|f| *f)?;
            if !reached_all(&free, nx, ny, start) {
                return None;
            }
        }
    }
    Some(Plan { nx, ny, wall })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn merge_covers_exactly() {
        let mut m = vec![false; 30];
        for c in [0, 1, 2, 6, 7, 8, 14, 20, 26, 27] {
            m[c] = true;
        }
        let rects = merge_cells(&m, 6, 5);
        let mut hit = vec![0; 30];
        for (i0, j0, i1, j1) in rects {
            for j in j0..j1 {
                for i in i0..i1 {
                    hit[j * 6 + i] += 1;
                }
            }
        }
        for c in 0..30 {
            assert_eq!(hit[c], usize::from(m[c]));
        }
    }

    #[test]
    fn rooms_stay_connected() {
        for s in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            if let Some(p) = build_plan(Layout::MultiRoom, 100, 80, 0.1, &mut rng) {
                let free: Vec<bool> = p.wall.iter().map(|w| !w).collect();
                assert!(reached_all(
                    &free,
                    100,
                    80,
                    free.iter().position(|f| *f).unwrap()
                ));
                assert!(p.wall.iter().any(|w| *w));
            }
        }
    }
}
