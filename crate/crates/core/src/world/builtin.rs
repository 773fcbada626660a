//! One hand-authored layout per complexity category. Obstacle layouts are
//! fixed; target positions are scattered once from a fixed seed and then
//! frozen by construction.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{convex_distance, Pose, Rect, Vec2};
use crate::world::{
    DynamicObstacle, Elevation, GraspTarget, SceneSpec, Shape, StaticObstacle, SweepTarget,
    TargetStatus, TaskZone, WorldError, ZoneKind, SCHEMA_VERSION,
};

const FLOOR_CLEARANCE: f64 = 0.45;

struct Layout {
    id: &'static str,
    size: (f64, f64),
    boxes: Vec<(f64, f64, f64, f64)>,
    movers: Vec<DynamicObstacle>,
    zones: Vec<TaskZone>,
    spawns: Vec<Pose<f64>>,
    n_sweep: usize,
    n_grasp: usize,
    complexity: u8,
}

fn boxes(spec: &[(f64, f64, f64, f64)]) -> Vec<(f64, f64, f64, f64)> {
    spec.to_vec()
}

fn mirrored_rows(xs: &[(f64, f64)], h: f64, height: f64, top: f64) -> Vec<(f64, f64, f64, f64)> {
    let mut out = Vec::new();
    for &(x0, x1) in xs {
        out.push((x0, 0.0, x1, h));
    }
    for &(x0, x1) in xs {
        out.push((x0, top - height, x1, top));
    }
    out
}

fn layout(category: u8) -> Option<Layout> {
    let l = match category {
        1 => Layout {
            id: "builtin-1-sparse",
            size: (8.0, 5.65),
            boxes: boxes(&[
                (0.0, 0.0, 1.0, 0.6),
                (3.5, 0.0, 4.5, 0.5),
                (7.0, 0.0, 8.0, 0.8),
                (2.5, 5.05, 3.5, 5.65),
                (7.0, 4.85, 8.0, 5.65),
            ]),
            movers: vec![],
            zones: vec![],
            spawns: vec![
                Pose::new(2.0, 2.8, 0.0),
                Pose::new(6.0, 2.8, PI),
                Pose::new(4.0, 2.0, FRAC_PI_2),
            ],
            n_sweep: 5,
            n_grasp: 5,
            complexity: 1,
        },
        2 => {
            let mut b = mirrored_rows(
                &[(0.0, 0.9), (2.7, 3.5), (5.3, 6.1), (7.9, 8.8)],
                0.6,
                0.6,
                6.0,
            );
            b.extend([
                (2.2, 2.6, 2.6, 3.4),
                (4.4, 2.6, 4.8, 3.4),
                (6.6, 2.6, 7.0, 3.4),
                (0.0, 2.6, 0.4, 3.4),
            ]);
            Layout {
                id: "builtin-2-medium",
                size: (8.8, 6.0),
                boxes: b,
                movers: vec![],
                zones: vec![],
                spawns: vec![
                    Pose::new(1.2, 1.6, 0.0),
                    Pose::new(5.6, 1.6, PI),
                    Pose::new(3.5, 4.4, 0.0),
                ],
                n_sweep: 10,
                n_grasp: 10,
                complexity: 3,
            }
        }
        3 => {
            let xs = [
                (0.0, 0.6),
                (1.8, 2.4),
                (3.6, 4.2),
                (5.4, 6.0),
                (7.2, 7.8),
                (9.0, 9.65),
            ];
            let mut b = mirrored_rows(&xs, 0.5, 0.5, 4.0);
            for x0 in [1.2, 2.8, 4.4, 6.0, 7.6] {
                b.push((x0, 1.7, x0 + 0.4, 2.3));
            }
            b.push((9.2, 1.7, 9.65, 2.3));
            Layout {
                id: "builtin-3-narrow",
                size: (9.65, 4.0),
                boxes: b,
                movers: vec![],
                zones: vec![],
                spawns: vec![
                    Pose::new(0.6, 1.1, 0.0),
                    Pose::new(5.0, 1.1, 0.0),
                    Pose::new(5.2, 2.9, PI),
                ],
                n_sweep: 15,
                n_grasp: 10,
                complexity: 4,
            }
        }
        4 => {
            let mut b = mirrored_rows(&[(0.0, 0.8), (2.8, 3.6), (5.6, 8.05)], 0.6, 0.6, 6.0);
            b.extend([
                (2.4, 2.6, 2.8, 3.4),
                (4.8, 2.6, 5.2, 3.4),
                (7.2, 2.6, 8.05, 3.4),
                (0.0, 2.6, 0.4, 3.4),
            ]);
            let mover = |id: &str, pts: &[(f64, f64)], speed: f64| DynamicObstacle {
                id: id.to_string(),
                width: 0.3,
                height: 0.3,
                waypoints: pts.iter().map(|&(x, y)| Vec2::new(x, y)).collect(),
                speed,
            };
            Layout {
                id: "builtin-4-dynamic",
                size: (8.05, 6.0),
                boxes: b,
                movers: vec![
                    mover("cart-a", &[(2.5, 1.9), (6.0, 1.9)], 0.25),
                    mover("cart-b", &[(6.5, 4.1), (1.5, 4.1)], 0.2),
                    mover("cart-c", &[(3.8, 1.0), (3.8, 5.0)], 0.25),
                ],
                zones: vec![],
                spawns: vec![
                    Pose::new(1.4, 1.2, 0.0),
                    Pose::new(4.0, 4.75, PI),
                    Pose::new(6.5, 1.2, PI),
                ],
                n_sweep: 20,
                n_grasp: 15,
                complexity: 5,
            }
        }
        5 => {
            let xs = [(0.0, 0.6), (2.1, 2.7), (4.2, 4.8), (6.3, 6.9), (8.4, 9.0)];
            let mut b = mirrored_rows(&xs, 0.3, 0.3, 7.5);
            for y0 in [1.8, 3.6, 5.4] {
                for x0 in [1.5, 3.375, 5.25, 7.125] {
                    b.push((x0, y0, x0 + 0.375, y0 + 0.3));
                }
            }
            let zone = |id: &str, kind, r: (f64, f64, f64, f64)| TaskZone {
                id: id.to_string(),
                kind,
                region: Rect::new(Vec2::new(r.0, r.1), Vec2::new(r.2, r.3)),
            };
            Layout {
                id: "builtin-5-multizone",
                size: (9.0, 7.5),
                boxes: b,
                movers: vec![],
                zones: vec![
                    zone("bin-west", ZoneKind::Collection, (0.6, 0.6, 1.8, 1.5)),
                    zone("bin-east", ZoneKind::Collection, (7.2, 6.0, 8.4, 6.9)),
                    zone("keep-out", ZoneKind::Restricted, (0.0, 6.0, 0.9, 7.2)),
                    zone("staging", ZoneKind::Target, (4.0, 4.2, 5.0, 5.1)),
                ],
                spawns: vec![
                    Pose::new(0.75, 1.05, 0.0),
                    Pose::new(4.5, 2.85, 0.0),
                    Pose::new(8.0, 4.65, PI),
                ],
                n_sweep: 30,
                n_grasp: 20,
                complexity: 5,
            }
        }
        _ => return None,
    };
    Some(l)
}

fn clearance(scene: &SceneSpec, p: Vec2<f64>) -> f64 {
    let b = &scene.bounds;
    let walls = (p.x - b.min.x)
        .min(b.max.x - p.x)
        .min(p.y - b.min.y)
        .min(b.max.y - p.y);
    scene
        .obstacles
        .iter()
        .map(|o| o.shape.distance_to_point(p))
        .fold(walls, f64::min)
}

fn scatter_floor(scene: &SceneSpec, rng: &mut ChaCha8Rng, taken: &[Vec2<f64>]) -> Vec2<f64> {
    let b = scene.bounds;
    loop {
        let p = Vec2::new(
            rng.gen_range(b.min.x..b.max.x),
            rng.gen_range(b.min.y..b.max.y),
        );
        let p = Vec2::new((p.x * 100.0).round() / 100.0, (p.y * 100.0).round() / 100.0);
        let in_restricted = scene
            .zones
            .iter()
            .any(|z| z.kind == ZoneKind::Restricted && z.region.expand(0.3).contains(p));
        if clearance(scene, p) >= FLOOR_CLEARANCE
            && !in_restricted
            && taken.iter().all(|q| q.distance(p) >= 0.3)
            && scene.spawns.iter().all(|s| s.position().distance(p) >= 0.6)
        {
            return p;
        }
    }
}

/// Point 0.1 m inside an obstacle edge that faces open floor.
fn surface_spot(scene: &SceneSpec, rng: &mut ChaCha8Rng, taken: &[Vec2<f64>]) -> Option<Vec2<f64>> {
    for _ in 0..200 {
        let o = &scene.obstacles[rng.gen_range(0..scene.obstacles.len())];
        let r = o.shape.aabb();
        let c = r.center();
        let candidates = [
            (Vec2::new(c.x, r.max.y - 0.1), Vec2::new(c.x, r.max.y + 0.6)),
            (Vec2::new(c.x, r.min.y + 0.1), Vec2::new(c.x, r.min.y - 0.6)),
            (Vec2::new(r.max.x - 0.1, c.y), Vec2::new(r.max.x + 0.6, c.y)),
            (Vec2::new(r.min.x + 0.1, c.y), Vec2::new(r.min.x - 0.6, c.y)),
        ];
        let k = rng.gen_range(0..4);
        let (spot, front) = candidates[k];
        if r.width() >= 0.2
            && r.height() >= 0.2
            && scene.bounds.contains(front)
            && clearance(scene, front) >= 0.5
        {
            let spot = Vec2::new(
                (spot.x * 1000.0).round() / 1000.0,
                (spot.y * 1000.0).round() / 1000.0,
            );
            if taken.iter().all(|q| q.distance(spot) >= 0.3) {
                return Some(spot);
            }
        }
    }
    None
}

/// Built-in scene for complexity category 1..=5. Only variant 0 exists.
pub fn builtin_scene(category: u8, variant: usize) -> Result<SceneSpec, WorldError> {
    let l = match (layout(category), variant) {
        (Some(l), 0) => l,
        _ => return Err(WorldError::UnknownScene { category, variant }),
    };
    let bounds = Rect::from_xywh(0.0, 0.0, l.size.0, l.size.1);
    let obstacles = l
        .boxes
        .iter()
        .enumerate()
        .map(|(i, &(x0, y0, x1, y1))| StaticObstacle {
            id: format!("box-{i:02}"),
            shape: Shape::Rect(Rect::new(Vec2::new(x0, y0), Vec2::new(x1, y1))),
            material_tag: if i % 3 == 0 {
                "wood".into()
            } else {
                "laminate".into()
            },
        })
        .collect();
    let mut scene = SceneSpec {
        schema: SCHEMA_VERSION,
        id: l.id.to_string(),
        bounds,
        obstacles,
        movers: l.movers,
        sweep_targets: vec![],
        grasp_targets: vec![],
        zones: l.zones,
        spawns: l.spawns,
        complexity_score: l.complexity,
        time_budget_s: 300.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0xD5_0000 + category as u64);
    let mut taken = Vec::new();
    for i in 0..l.n_sweep {
        let p = scatter_floor(&scene, &mut rng, &taken);
        taken.push(p);
        scene.sweep_targets.push(SweepTarget {
            id: format!("debris-{i:02}"),
            position: p,
            radius: 0.02,
            mass: 0.01 + 0.01 * (i % 5) as f64,
            status: TargetStatus::Pending,
        });
    }
    for i in 0..l.n_grasp {
        let surface = if i % 4 == 3 {
            surface_spot(&scene, &mut rng, &taken)
        } else {
            None
        };
        let (p, elevation) = match surface {
            Some(p) => (p, Elevation::Surface),
            None => (scatter_floor(&scene, &mut rng, &taken), Elevation::Floor),
        };
        taken.push(p);
        scene.grasp_targets.push(GraspTarget {
            id: format!("item-{i:02}"),
            position: p,
            radius: 0.04,
            mass: 0.1 + 0.1 * (i % 7) as f64,
            elevation,
            status: TargetStatus::Pending,
        });
    }
    scene.validate()?;
    Ok(scene)
}

/// Narrowest gap in the static layout: the smallest positive distance between
/// two obstacles or between an obstacle and a wall it does not touch.
pub fn corridor_width(scene: &SceneSpec) -> Option<f64> {
    const TOUCH: f64 = 1e-6;
    let verts: Vec<_> = scene.obstacles.iter().map(|o| o.shape.vertices()).collect();
    let b = &scene.bounds;
    let mut best: Option<f64> = None;
    let mut offer = |d: f64| {
        if d > TOUCH {
            best = Some(best.map_or(d, |b: f64| b.min(d)));
        }
    };
    for (i, a) in verts.iter().enumerate() {
        for c in &verts[i + 1..] {
            offer(convex_distance(a, c));
        }
        let fold = |f: &dyn Fn(&Vec2<f64>) -> f64| a.iter().map(f).fold(f64::INFINITY, f64::min);
        offer(fold(&|v| v.x - b.min.x));
        offer(fold(&|v| b.max.x - v.x));
        offer(fold(&|v| v.y - b.min.y));
        offer(fold(&|v| b.max.y - v.y));
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn out_of_range_category() {
        assert!(matches!(
            builtin_scene(6, 0),
            Err(WorldError::UnknownScene { .. })
        ));
        assert!(matches!(
            builtin_scene(0, 0),
            Err(WorldError::UnknownScene { .. })
        ));
        assert!(matches!(
            builtin_scene(1, 1),
            Err(WorldError::UnknownScene { .. })
        ));
    }

    #[test]
    fn all_builtins_validate() {
        for c in 1..=5 {
            let s = builtin_scene(c, 0).unwrap();
            assert_eq!(s.complexity_score == 1, c == 1);
        }
    }
}
