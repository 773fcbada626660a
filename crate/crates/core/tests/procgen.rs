mod common;

use std::collections::{BTreeSet, VecDeque};

use common::{check_accessible, flood4, floor_flood, ReachOracle};
use dualsweep::procgen::targets::CLUSTER_RADIUS;
use dualsweep::procgen::{
    clutter_density, generate_scene, place_targets, poisson_disk_sample, verify_connectivity,
    GenParams, Layout, Pattern, ProcgenError,
};
use dualsweep::world::{free_mask, Elevation, OccupancyGrid, SceneSpec};
use dualsweep::{Rect, Vec2};
use rand::Rng;

const D: f64 = 0.1;

#[test]
fn sparse_rectangular_example() {
    let p = GenParams {
        layout: Layout::Rectangular,
        density: 0.15,
        pattern: Pattern::Random,
        n_sweep: 5,
        n_grasp: 5,
        seed: 42,
        ..Default::default()
    };
    let s = generate_scene(&p).unwrap();
    s.validate().unwrap();
    assert_eq!((s.sweep_targets.len(), s.grasp_targets.len()), (5, 5));
    let grid = dualsweep::world::navigable_grid(&s, D).unwrap();
    assert!(
        grid.a_total() / s.bounds.area() >= 0.80,
        "{}",
        grid.a_total() / s.bounds.area()
    );
    check_accessible(&s).unwrap();
}

#[test]
fn empty_task_example() {
    let p = GenParams {
        density: 0.10,
        n_sweep: 0,
        n_grasp: 0,
        seed: 1,
        ..Default::default()
    };
    let s = generate_scene(&p).unwrap();
    s.validate().unwrap();
    assert!(s.sweep_targets.is_empty() && s.grasp_targets.is_empty());
}

#[test]
fn dense_l_shaped_clustered_example() {
    let p = GenParams {
        layout: Layout::LShaped,
        density: 0.70,
        pattern: Pattern::Clustered,
        n_sweep: 10,
        n_grasp: 5,
        seed: 7,
        ..Default::default()
    };
    let s = generate_scene(&p).unwrap();
    s.validate().unwrap();
    assert_eq!((s.sweep_targets.len(), s.grasp_targets.len()), (10, 5));
    assert!((clutter_density(&s) - 0.70).abs() <= 0.05);
    check_accessible(&s).unwrap();
}

#[test]
fn all_combinations_are_valid_connected_and_accessible() {
    let mut seed = 1000;
    let mut surfaces = 0;
    for layout in Layout::ALL {
        for density in [0.15, 0.45, 0.75] {
            for pattern in Pattern::ALL {
                seed += 1;
                let p = GenParams {
                    layout,
                    density,
                    pattern,
                    n_sweep: 8,
                    n_grasp: 6,
                    seed,
                    ..Default::default()
                };
                let s = generate_scene(&p).unwrap_or_else(|e| panic!("{p:?}: {e}"));
                s.validate().unwrap();
                let achieved = clutter_density(&s);
                assert!((achieved - density).abs() <= 0.05, "{p:?}: {achieved}");
                // every floor cell joined to the spawn
                let (flood, _) = floor_flood(&s);
                let free = ReachOracle::new(&s).free;
                assert_eq!(flood, free, "{p:?} disconnected");
                check_accessible(&s).unwrap();
                surfaces += s
                    .grasp_targets
                    .iter()
                    .filter(|g| g.elevation == Elevation::Surface)
                    .count();
                assert_eq!(generate_scene(&p).unwrap(), s, "not deterministic");
            }
        }
    }
    assert!(surfaces > 0, "no grasp target on a surface");
}

#[test]
fn bad_params_are_rejected() {
    for p in [
        GenParams {
            density: 0.05,
            ..Default::default()
        },
        GenParams {
            density: 0.85,
            ..Default::default()
        },
        GenParams {
            width: 20.0,
            height: 5.0,
            ..Default::default()
        },
        GenParams {
            width: 2.0,
            height: 2.0,
            ..Default::default()
        },
    ] {
        assert!(
            matches!(generate_scene(&p), Err(ProcgenError::BadParams { .. })),
            "{p:?}"
        );
    }
    let text = r#"{"layout":"rectangular","density":0.3,"pattern":"random","n_sweep":1,"n_grasp":1,"seed":1,"colour":2}"#;
    assert!(serde_json::from_str::<GenParams>(text).is_err());
}

#[test]
fn poisson_examples() {
    let unit = Rect::from_xywh(0.0, 0.0, 1.0, 1.0);
    for seed in 0..10 {
        assert_eq!(poisson_disk_sample(unit, 2.0, seed).len(), 1);
    }
    let big = Rect::from_xywh(0.0, 0.0, 10.0, 10.0);
    let pts = poisson_disk_sample(big, 1.0, 5);
    for i in 0..pts.len() {
        assert!(big.contains(pts[i]));
        for j in 0..i {
            assert!(pts[i].distance(pts[j]) >= 1.0);
        }
    }
    assert_eq!(pts, poisson_disk_sample(big, 1.0, 5));
    assert_ne!(pts, poisson_disk_sample(big, 1.0, 6));
    // near-maximal: few probe points could still take a new sample
    let mut rng = common::rng(1);
    let free = (0..4000)
        .filter(|_| {
            let q = Vec2::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0));
            pts.iter().all(|p| p.distance(q) >= 1.0)
        })
        .count();
    assert!(free < 40, "{free} of 4000 probes insertable");
}

#[test]
fn connectivity_matches_flood_fill() {
    let mut rng = common::rng(8);
    let (mut yes, mut no) = (0, 0);
    for k in 0..50 {
        let n = if k % 2 == 0 { 4 } else { 20 };
        let rho = if k % 2 == 0 { 0.1 } else { 0.3 };
        let mut free: Vec<bool> = (0..n * n).map(|_| rng.gen::<f64>() >= rho).collect();
        free[0] = true;
        let grid = OccupancyGrid::from_mask(
            Rect::from_xywh(0.0, 0.0, n as f64 * D, n as f64 * D),
            D,
            free.clone(),
            &[(0, 0)],
        );
        let oracle = flood4(&free, n, n, &[(0, 0)]) == free;
        assert_eq!(verify_connectivity(&grid, (0, 0)), oracle);
        if oracle {
            yes += 1;
        } else {
            no += 1;
        }
    }
    assert!(yes > 3 && no > 3, "{yes} {no}");
    let open = OccupancyGrid::from_mask(
        Rect::from_xywh(0.0, 0.0, 2.0, 2.0),
        D,
        vec![true; 400],
        &[(0, 0)],
    );
    assert!(verify_connectivity(&open, (3, 3)));
    let mut split = vec![true; 400];
    for j in 0..20 {
        split[j * 20 + 10] = false;
    }
    let grid = OccupancyGrid::from_mask(Rect::from_xywh(0.0, 0.0, 2.0, 2.0), D, split, &[(0, 0)]);
    assert!(!verify_connectivity(&grid, (0, 0)));
}

fn square(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|y| (0..n).map(move |x| (x, y))).collect()
}

#[test]
fn random_targets_are_distinct_free_cells() {
    let cells = square(10);
    let t = place_targets(Pattern::Random, 5, &cells, D, 3).unwrap();
    assert_eq!(t.iter().collect::<BTreeSet<_>>().len(), 5);
    assert!(t.iter().all(|c| cells.contains(c)));
    assert_eq!(t, place_targets(Pattern::Random, 5, &cells, D, 3).unwrap());
    assert!(matches!(
        place_targets(Pattern::Random, 101, &cells, D, 3),
        Err(ProcgenError::InsufficientSpace {
            wanted: 101,
            available: 100
        })
    ));
}

#[test]
fn clustered_targets_stay_within_cluster_diameter() {
    let cells = square(60);
    for seed in 0..20 {
        let n = 10 + seed as usize % 7;
        let t = place_targets(Pattern::Clustered, n, &cells, D, seed).unwrap();
        assert_eq!(t.iter().collect::<BTreeSet<_>>().len(), n);
        // members are emitted cluster by cluster
        let k = n.div_ceil(5);
        let mut start = 0;
        for c in 0..k {
            let size = n / k + usize::from(c < n % k);
            let group = &t[start..start + size];
            for a in group {
                for b in group {
                    let d = (a.0 as f64 - b.0 as f64).hypot(a.1 as f64 - b.1 as f64) * D;
                    assert!(d <= 2.0 * CLUSTER_RADIUS + 1e-9, "{d}");
                }
            }
            start += size;
        }
    }
}

#[test]
fn linear_targets_fit_a_line() {
    // an L of corridor cells plus scattered singletons
    let mut cells: Vec<(usize, usize)> = (0..40)
        .map(|x| (x, 5))
        .chain((0..30).map(|y| (3, y + 6)))
        .collect();
    cells.extend([(20, 20), (30, 2), (10, 30)]);
    for seed in 0..20 {
        let t = place_targets(Pattern::Linear, 6, &cells, D, seed).unwrap();
        assert_eq!(t.iter().collect::<BTreeSet<_>>().len(), 6);
        let pts: Vec<Vec2> = t
            .iter()
            .map(|c| Vec2::new(c.0 as f64 * D, c.1 as f64 * D))
            .collect();
        assert!(fit_residual(&pts) <= D, "seed {seed}");
    }
}

/// Largest perpendicular distance to the total-least-squares line.
fn fit_residual(pts: &[Vec2]) -> f64 {
    let n = pts.len() as f64;
    let m = pts.iter().fold(Vec2::zero(), |a, p| a + *p) * (1.0 / n);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in pts {
        let d = *p - m;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    let angle = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let normal = Vec2::new(-angle.sin(), angle.cos());
    pts.iter()
        .map(|p| (*p - m).dot(normal).abs())
        .fold(0.0, f64::max)
}

/// Mean BFS distance between random navigable cell pairs.
fn mean_path(scene: &SceneSpec, samples: usize, seed: u64) -> f64 {
    let grid = dualsweep::world::navigable_grid(scene, D).unwrap();
    let cells: Vec<_> = grid.navigable_cells().collect();
    let mut rng = common::rng(seed);
    let mut total = 0.0;
    for _ in 0..samples {
        let a = cells[rng.gen_range(0..cells.len())];
        let b = cells[rng.gen_range(0..cells.len())];
        let mut dist = vec![usize::MAX; grid.len()];
        let mut q = VecDeque::from([a]);
        dist[grid.index(a)] = 0;
        while let Some(c) = q.pop_front() {
            if c == b {
                break;
            }
            for n in grid.neighbors4(c) {
                if grid.is_navigable(n) && dist[grid.index(n)] == usize::MAX {
                    dist[grid.index(n)] = dist[grid.index(c)] + 1;
                    q.push_back(n);
                }
            }
        }
        total += dist[grid.index(b)] as f64 * D;
    }
    total / samples as f64
}

#[test]
fn path_length_grows_with_density() {
    let mut means = Vec::new();
    for density in [0.1, 0.4, 0.7] {
        let per: Vec<f64> = (0..20)
            .map(|seed| {
                let s = generate_scene(&GenParams {
                    density,
                    seed,
                    n_sweep: 0,
                    n_grasp: 0,
                    ..Default::default()
                })
                .unwrap();
                mean_path(&s, 15, seed)
            })
            .collect();
        means.push(per.iter().sum::<f64>() / per.len() as f64);
    }
    assert!(means.windows(2).all(|w| w[1] >= w[0]), "{means:?}");
}

#[test]
fn generated_free_mask_matches_world_module() {
    let s = generate_scene(&GenParams {
        layout: Layout::MultiRoom,
        seed: 3,
        ..Default::default()
    })
    .unwrap();
    let ours = ReachOracle::new(&s).free;
    assert_eq!(free_mask(&s, D), ours);
}
