//! Bridson's Poisson disk sampler.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::geometry::{Rect, Vec2};

/// Candidates tried around each active point.
const K: usize = 30;

/// Points in `region` at least `min_dist` apart. The set is maximal up to
/// `K` dart throws per active point, and a pure function of the inputs.
pub fn poisson_disk_sample(region: Rect<f64>, min_dist: f64, seed: u64) -> Vec<Vec2<f64>> {
    assert!(min_dist > 0.0, "min_dist must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cell = min_dist / std::f64::consts::SQRT_2;
    let gw = (region.width() / cell).ceil().max(1.0) as usize;
    let gh = (region.height() / cell).ceil().max(1.0) as usize;
    let mut grid: Vec<Option<usize>> = vec![None; gw * gh];
    let slot = |p: Vec2<f64>| {
        let i = (((p.x - region.min.x) / cell) as usize).min(gw - 1);
        let j = (((p.y - region.min.y) / cell) as usize).min(gh - 1);
        (i, j)
    };
    let mut pts = Vec::new();
    let mut active = Vec::new();
    let first = Vec2::new(
        rng.gen_range(region.min.x..=region.max.x),
        rng.gen_range(region.min.y..=region.max.y),
    );
    let (i, j) = slot(first);
    grid[j * gw + i] = Some(0);
    pts.push(first);
    active.push(0);
    while !active.is_empty() {
        let a = rng.gen_range(0..active.len());
        let base = pts[active[a]];
        let mut placed = false;
        for _ in 0..K {
            let r = rng.gen_range(min_dist..2.0 * min_dist);
            let t = rng.gen_range(0.0..std::f64::consts::TAU);
            let q = base + Vec2::new(t.cos(), t.sin()) * r;
            if !region.contains(q) {
                continue;
            }
            let (qi, qj) = slot(q);
            let far = (qj.saturating_sub(2)..(qj + 3).min(gh)).all(|y| {
                (qi.saturating_sub(2)..(qi + 3).min(gw))
                    .all(|x| grid[y * gw + x].is_none_or(|k| pts[k].distance(q) >= min_dist))
            });
            if far {
                grid[qj * gw + qi] = Some(pts.len());
                active.push(pts.len());
                pts.push(q);
                placed = true;
                break;
            }
        }
        if !placed {
            active.swap_remove(a);
        }
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forced_single_point() {
        assert_eq!(
            poisson_disk_sample(Rect::from_xywh(0.0, 0.0, 1.0, 1.0), 2.0, 9).len(),
            1
        );
    }

    #[test]
    fn spacing_and_determinism() {
        let r = Rect::from_xywh(0.0, 0.0, 10.0, 10.0);
        let a = poisson_disk_sample(r, 1.0, 4);
        assert_eq!(a, poisson_disk_sample(r, 1.0, 4));
        for (i, p) in a.iter().enumerate() {
            for q in &a[i + 1..] {
                assert!(p.distance(*q) >= 1.0);
            }
        }
        assert!(a.len() > 50);
    }
}
