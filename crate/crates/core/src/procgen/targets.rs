//! Target placement patterns over candidate cells.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::world::Cell;

use super::ProcgenError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pattern {
    Random,
    Clustered,
    Linear,
}

impl Pattern {
    pub const ALL: [Pattern; 3] = [Pattern::Random, Pattern::Clustered, Pattern::Linear];

    pub fn as_str(self) -> &'static str {
        match self {
            Pattern::Random => "random",
            Pattern::Clustered => "clustered",
            Pattern::Linear => "linear",
        }
    }

    pub fn parse(s: &str) -> Option<Pattern> {
        Pattern::ALL.into_iter().find(|p| p.as_str() == s)
    }
}

/// Members of a cluster lie within this distance of its center.
pub const CLUSTER_RADIUS: f64 = 0.5;
const TRIES: usize = 50;

/// Chooses `n` distinct cells from `cells` (cell size `delta`).
///
/// Random picks uniformly without replacement. Clustered picks
/// `ceil(n / 5)` centers and fills each cluster from cells within
/// [`CLUSTER_RADIUS`] of its center. Linear finds a straight run of
/// consecutive cells along x or y and spaces the targets evenly along it.
pub fn place_targets(
    pattern: Pattern,
    n: usize,
    cells: &[Cell],
    delta: f64,
    seed: u64,
) -> Result<Vec<Cell>, ProcgenError> {
    if n == 0 {
        return Ok(Vec::new());
    }
    if n > cells.len() {
        return Err(ProcgenError::InsufficientSpace {
            wanted: n,
            available: cells.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match pattern {
        Pattern::Random => Ok(sample(&mut rng, cells.len(), n)
            .into_iter()
            .map(|i| cells[i])
            .collect()),
        Pattern::Clustered => clustered(n, cells, delta, &mut rng),
        Pattern::Linear => linear(n, cells, &mut rng),
    }
}

fn clustered(
    n: usize,
    cells: &[Cell],
    delta: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Cell>, ProcgenError> {
    let k = n.div_ceil(5);
    let reach = CLUSTER_RADIUS / delta;
    for _ in 0..TRIES {
        let mut used = BTreeSet::new();
        let mut out = Vec::with_capacity(n);
        let centers: Vec<Cell> = sample(rng, cells.len(), k.min(cells.len()))
            .into_iter()
            .map(|i| cells[i])
            .collect();
        let mut ok = true;
        for (c, center) in centers.iter().enumerate() {
            // spread n over k clusters as evenly as possible
            let want = n / k + usize::from(c < n % k);
            let near: Vec<Cell> = cells
                .iter()
                .copied()
                .filter(|q| !used.contains(q))
                .filter(|q| {
                    (q.0 as f64 - center.0 as f64).hypot(q.1 as f64 - center.1 as f64)
                        <= reach + 1e-9
                })
                .collect();
            if near.len() < want {
                ok = false;
                break;
            }
            for i in sample(rng, near.len(), want) {
                used.insert(near[i]);
                out.push(near[i]);
            }
        }
        if ok {
            return Ok(out);
        }
    }
    Err(ProcgenError::InsufficientSpace {
        wanted: n,
        available: cells.len(),
    })
}

fn linear(n: usize, cells: &[Cell], rng: &mut ChaCha8Rng) -> Result<Vec<Cell>, ProcgenError> {
    let set: BTreeSet<Cell> = cells.iter().copied().collect();
    for _ in 0..TRIES {
        let seed = cells[rng.gen_range(0..cells.len())];
        let along_x = rng.gen_bool(0.5);
        for horizontal in [along_x, !along_x] {
            let step = |c: Cell, d: isize| -> Option<Cell> {
                let (x, y) = (c.0 as isize, c.1 as isize);
                let q = if horizontal { (x + d, y) } else { (x, y + d) };
                (q.0 >= 0 && q.1 >= 0)
                    .then_some((q.0 as usize, q.1 as usize))
                    .filter(|q| set.contains(q))
            };
            let mut lo = seed;
            while let Some(q) = step(lo, -1) {
                lo = q;
            }
            let mut run = vec![lo];
            while let Some(q) = step(*run.last().expect("non-empty"), 1) {
                run.push(q);
            }
            if run.len() >= n {
                let span = run.len() - 1;
                return Ok((0..n)
                    .map(|k| run[if n == 1 { span / 2 } else { k * span / (n - 1) }])
                    .collect());
            }
        }
    }
    Err(ProcgenError::InsufficientSpace {
        wanted: n,
        available: cells.len(),
    })
}
