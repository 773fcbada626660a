//! Acceptance criteria 1 to 10. Each test prints one PASS/FAIL line with its
//! tolerance and runtime limit, then asserts.

mod common;

use std::f64::consts::PI;
use std::sync::{Mutex, MutexGuard};
use std::time::{Duration, Instant};

use common::{
    brute_visits, check_accessible, floor_connected, mixed_micro_scene, room, AreaSampler,
};
use dualsweep::agents::{Policy, PolicyContext, PolicyId};
use dualsweep::harness::{run_episode, run_episode_with, EpisodeConfig, SceneSource, Termination};
use dualsweep::metrics::{
    coverage_ratio, kinematics, sweep_redundancy, task_completion, tcr_from_parts, VacuousMode,
};
use dualsweep::procgen::{clutter_density, generate_scene, GenParams, Layout, Pattern};
use dualsweep::sim::{Action, Event, EventKind, Mode, Observation, TrajectoryLog};
use dualsweep::world::{builtin_scene, navigable_grid, RobotSpec, SceneSpec};
use dualsweep::{Pose, Vec2};
use rand::Rng;

/// Criteria run one at a time so each runtime is measured alone.
static SERIAL: Mutex<()> = Mutex::new(());

fn exclusive() -> MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

/// Prints the verdict line and fails the test unless the check held within
/// the time limit.
fn verdict(n: u32, what: &str, ok: bool, detail: String, started: Instant, limit: Duration) {
    let took = started.elapsed();
    let pass = ok && took <= limit;
    println!(
        "{} criterion {n:>2} {what}: {detail}; runtime {:.2?} (limit {:?})",
        if pass { "PASS" } else { "FAIL" },
        took,
        limit
    );
    assert!(ok, "criterion {n} failed: {detail}");
    assert!(
        took <= limit,
        "criterion {n} over its runtime limit: {took:?} > {limit:?}"
    );
}

fn inline(s: SceneSpec, policy: PolicyId, seed: u64) -> EpisodeConfig {
    let mut cfg = EpisodeConfig::new(SceneSource::Inline(Box::new(s)), policy, seed);
    cfg.randomize_spawn = false;
    cfg.jitter = 0.0;
    cfg
}

fn successes(ns: usize, ng: usize) -> Vec<Event> {
    let ev = |kind, k: usize, id: String| Event {
        time: k as f64 * 0.1,
        step: k as u64,
        kind,
        robot: Some(0),
        object: Some(id),
    };
    (0..ns)
        .map(|k| ev(EventKind::SweepSuccess, k, format!("d{k}")))
        .chain((0..ng).map(|k| ev(EventKind::GraspSuccess, k, format!("g{k}"))))
        .collect()
}

fn ten_by_ten() -> SceneSpec {
    let mut s = room(12.0, 12.0);
    for k in 0..10 {
        s.sweep_targets
            .push(common::debris(&format!("d{k}"), 2.0 + 0.3 * k as f64, 3.0));
        s.grasp_targets
            .push(common::item(&format!("g{k}"), 2.0 + 0.3 * k as f64, 6.0));
    }
    s
}

#[test]
fn criterion_01_tcr_decomposition() {
    let _serial = exclusive();
    let t0 = Instant::now();
    let tol = 1e-12;
    let mut worst: f64 = 0.0;
    let mut episodes = 0;
    for c in 1..=5u8 {
        for p in [PolicyId::Dual, PolicyId::Horizontal] {
            let mut cfg = EpisodeConfig::new(SceneSource::builtin(c), p, c as u64);
            cfg.time_budget = 3.0;
            let r = run_episode(&cfg).unwrap().report;
            worst = worst.max((r.tcr - (0.5 * r.tcr_sweep + 0.5 * r.tcr_grasp)).abs());
            episodes += 1;
        }
    }
    let r = run_episode(&inline(mixed_micro_scene(), PolicyId::Dual, 0))
        .unwrap()
        .report;
    worst = worst.max((r.tcr - (0.5 * r.tcr_sweep + 0.5 * r.tcr_grasp)).abs());
    episodes += 1;

    // table rows: sweep-only, both kinds, grasp-only
    let scene = ten_by_ten();
    let rows = [((3, 0), 0.15), ((5, 7), 0.60), ((0, 6), 0.30)];
    let mut row_ok = true;
    for ((ns, ng), want) in rows {
        let t = task_completion(&successes(ns, ng), &scene, 0.5, 0.5, VacuousMode::One).unwrap();
        row_ok &= (t.tcr - want).abs() <= tol;
        row_ok &= (tcr_from_parts(ns as f64 / 10.0, ng as f64 / 10.0, 0.5, 0.5).unwrap() - want)
            .abs()
            <= tol;
    }
    verdict(
        1,
        "TCR decomposition",
        worst <= tol && row_ok,
        format!("max |tcr - (0.5 S + 0.5 G)| = {worst:.1e} over {episodes} episodes (tol {tol:.0e}); rows 0.15/0.60/0.30 ok = {row_ok}"),
        t0,
        Duration::from_secs(1),
    );
}

fn rollouts() -> (SceneSpec, Vec<TrajectoryLog>) {
    let scene = builtin_scene(1, 0).unwrap();
    let mut r = common::rng(2024);
    let logs = (0..50)
        .map(|k| common::random_rollout(&scene, r.gen_range(50..=200), 500 + k))
        .collect();
    (scene, logs)
}

#[test]
fn criterion_02_coverage_oracle() {
    let _serial = exclusive();
    let t0 = Instant::now();
    let (scene, logs) = rollouts();
    let grid = navigable_grid(&scene, 0.1).unwrap();
    let sampler = AreaSampler::new(scene.bounds, 1_000_000, 77);
    let spec = RobotSpec::default();
    let worst = logs
        .iter()
        .map(|log| {
            (coverage_ratio(log, &grid, &spec).unwrap() - sampler.covered_fraction(log, &grid))
                .abs()
        })
        .fold(0.0, f64::max);
    verdict(
        2,
        "coverage vs Monte-Carlo area",
        worst <= 0.02,
        format!("max |CR - MC| = {worst:.4} over 50 trajectories, 10^6 samples (tol 0.02)"),
        t0,
        Duration::from_secs(60),
    );
}

#[test]
fn criterion_03_sr_oracle() {
    let _serial = exclusive();
    let t0 = Instant::now();
    let (scene, logs) = rollouts();
    let grid = navigable_grid(&scene, 0.1).unwrap();
    let spec = RobotSpec::default();
    let mut mismatches = 0;
    let mut revisits = 0;
    for log in &logs {
        let nu = brute_visits(log, &grid);
        let visited = nu.iter().filter(|&&v| v >= 1).count();
        let again = nu.iter().filter(|&&v| v > 1).count();
        revisits += again;
        let (sr, _) = sweep_redundancy(log, &grid, &spec).unwrap();
        if sr != again as f64 / visited as f64 {
            mismatches += 1;
        }
    }
    verdict(
        3,
        "SR vs brute-force visit recount",
        mismatches == 0 && revisits > 0,
        format!("{mismatches} of 50 trajectories differ (exact match required); {revisits} revisited cells in total"),
        t0,
        Duration::from_secs(30),
    );
}

#[test]
fn criterion_04_heuristic_pattern() {
    let _serial = exclusive();
    let t0 = Instant::now();
    let mut s = room(20.0, 15.0);
    for (k, (x, y)) in [(5.0, 5.0), (14.0, 10.0), (10.0, 3.0)]
        .into_iter()
        .enumerate()
    {
        s.grasp_targets.push(common::item(&format!("g{k}"), x, y));
    }
    let mut lines = Vec::new();
    let mut ok = true;
    for p in [
        PolicyId::Manhattan,
        PolicyId::Chebyshev,
        PolicyId::Vertical,
        PolicyId::Horizontal,
    ] {
        let (mut sr, mut cr, mut tg) = (0.0f64, 1.0f64, 0.0f64);
        // random spawns; worst case over three seeds
        for seed in 1..=3 {
            let mut cfg = EpisodeConfig::new(SceneSource::Inline(Box::new(s.clone())), p, seed);
            cfg.time_budget = 3000.0;
            cfg.idle_window = Some(30.0);
            let r = run_episode(&cfg).unwrap().report;
            (sr, cr, tg) = (sr.max(r.sr), cr.min(r.cr), tg.max(r.tcr_grasp));
        }
        ok &= sr <= 0.05 && cr >= 0.90 && tg == 0.0;
        lines.push(format!("{p} max SR {sr:.3} min CR {cr:.3} TCR_G {tg:.2}"));
    }
    verdict(
        4,
        "coverage heuristics on an empty 20x15 m room",
        ok,
        format!(
            "{} (need SR <= 0.05, CR >= 0.90, TCR_G = 0)",
            lines.join("; ")
        ),
        t0,
        Duration::from_secs(120),
    );
}

#[test]
fn criterion_05_dual_beats_sweep_only() {
    let _serial = exclusive();
    let t0 = Instant::now();
    let mut lines = Vec::new();
    let mut ok = true;
    for p in PolicyId::ALL.into_iter().filter(|p| *p != PolicyId::Idle) {
        let mut cfg = inline(mixed_micro_scene(), p, 0);
        cfg.time_budget = 600.0;
        let r = run_episode(&cfg).unwrap().report;
        ok &= if p == PolicyId::Dual {
            r.tcr == 1.0
        } else {
            r.tcr <= 0.5
        };
        lines.push(format!("{p} {:.2}", r.tcr));
    }
    verdict(
        5,
        "dual-mode vs sweep-only TCR on the 4+2 micro scene",
        ok,
        format!("TCR {} (need dual = 1.0, others <= 0.5)", lines.join(", ")),
        t0,
        Duration::from_secs(60),
    );
}

#[test]
fn criterion_06_kinematics() {
    let _serial = exclusive();
    let t0 = Instant::now();
    let line: Vec<Vec2> = (0..100)
        .map(|k| Vec2::new(1.0 + 0.0625 * k as f64, 3.0 + 0.125 * k as f64))
        .collect();
    let k = kinematics(&line, 0.125).unwrap();
    let constant = k.acc == Some(0.0) && k.jerk == Some(0.0);
    let c = 1.3;
    let mut worst_rel: f64 = 0.0;
    for dt in [0.2, 0.1, 0.05] {
        let pts: Vec<Vec2> = (0..80)
            .map(|i| {
                let t = i as f64 * dt;
                Vec2::new(2.0 + 0.5 * c * t * t, 1.0)
            })
            .collect();
        let a = kinematics(&pts, dt).unwrap().acc.unwrap();
        worst_rel = worst_rel.max((a - c).abs() / dt);
    }
    verdict(
        6,
        "kinematic metrics",
        constant && worst_rel <= 1.0,
        format!(
            "constant velocity acc {:?} jerk {:?} (exact 0); quadratic |acc - a|/dt <= {worst_rel:.2e} (need <= 1)",
            k.acc, k.jerk
        ),
        t0,
        Duration::from_secs(1),
    );
}

#[test]
fn criterion_07_procgen_guarantees() {
    let _serial = exclusive();
    let t0 = Instant::now();
    let bands = [(0.10, 0.30), (0.30, 0.55), (0.55, 0.80)];
    let mut r = common::rng(7);
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for i in 0..100u64 {
        let layout = Layout::ALL[(i % 3) as usize];
        let (lo, hi) = bands[((i / 3) % 3) as usize];
        let pattern = Pattern::ALL[((i / 9) % 3) as usize];
        let p = GenParams {
            layout,
            density: r.gen_range(lo..hi),
            pattern,
            n_sweep: r.gen_range(0..=12),
            n_grasp: r.gen_range(0..=8),
            seed: 10_000 + i,
            ..Default::default()
        };
        let s = match generate_scene(&p) {
            Ok(s) => s,
            Err(e) => {
                failures.push(format!("{i}: {e}"));
                continue;
            }
        };
        let d = (clutter_density(&s) - p.density).abs();
        worst = worst.max(d);
        if s.validate().is_err() || !floor_connected(&s) || d > 0.05 {
            failures.push(format!(
                "{i}: invalid, disconnected or density off by {d:.3}"
            ));
        }
        if let Err(e) = check_accessible(&s) {
            failures.push(format!("{i}: {e}"));
        }
    }
    verdict(
        7,
        "procedural generation guarantees",
        failures.is_empty(),
        format!(
            "{} of 100 generations over 3 layouts x 3 density bands x 3 patterns failed {:?}; max density error {worst:.4} (tol 0.05)",
            failures.len(),
            failures
        ),
        t0,
        Duration::from_secs(120),
    );
}

#[test]
fn criterion_08_determinism() {
    let _serial = exclusive();
    let t0 = Instant::now();
    let mut r = common::rng(8);
    let mut differ = Vec::new();
    for k in 0..20 {
        let scene = if k % 4 == 3 {
            SceneSource::Procgen(GenParams {
                seed: r.gen(),
                density: 0.4,
                ..Default::default()
            })
        } else {
            SceneSource::builtin(r.gen_range(1..=5))
        };
        let policy = PolicyId::ALL[r.gen_range(0..PolicyId::ALL.len())];
        let cfg = EpisodeConfig::new(scene, policy, r.gen());
        let (a, b) = (run_episode(&cfg).unwrap(), run_episode(&cfg).unwrap());
        let report = |mut m: dualsweep::metrics::MetricReport| {
            m.ct = 0.0;
            serde_json::to_string(&m).unwrap()
        };
        if a.log.to_tsv(false) != b.log.to_tsv(false) || report(a.report) != report(b.report) {
            differ.push(cfg.label());
        }
    }
    verdict(
        8,
        "end-to-end determinism",
        differ.is_empty(),
        format!("{} of 20 random (scene, policy, seed) triples differ {:?} (byte equality, compute time excluded)", differ.len(), differ),
        t0,
        Duration::from_secs(120),
    );
}

#[test]
fn criterion_09_safe_planning() {
    let _serial = exclusive();
    let t0 = Instant::now();
    let mut hits = Vec::new();
    let mut runs = 0;
    for c in 1..=5u8 {
        for p in PolicyId::ALL.into_iter().filter(|p| *p != PolicyId::Idle) {
            let mut cfg = EpisodeConfig::new(SceneSource::builtin(c), p, 40 + c as u64);
            cfg.static_only = true;
            let r = run_episode(&cfg).unwrap();
            runs += 1;
            if r.report.collision != 0 {
                hits.push(format!("builtin {c} {p}: {}", r.report.collision));
            }
        }
    }
    verdict(
        9,
        "planned policies on static built-in scenes",
        hits.is_empty(),
        format!("{runs} full episodes, collisions {hits:?} (need 0)"),
        t0,
        Duration::from_secs(120),
    );
}

struct Rammer;

impl Policy for Rammer {
    fn name(&self) -> &'static str {
        "rammer"
    }
    fn reset(&mut self, _ctx: &PolicyContext, _seed: u64) {}
    fn act(&mut self, _obs: &Observation) -> Action {
        Action::new(Mode::Navigate, 1.0, 0.0)
    }
}

#[test]
fn criterion_10_termination() {
    let _serial = exclusive();
    let t0 = Instant::now();
    let mut notes = Vec::new();
    let mut ok = true;
    for budget in [300.0, 42.35] {
        let mut cfg = EpisodeConfig::new(SceneSource::builtin(2), PolicyId::Idle, 1);
        cfg.time_budget = budget;
        let r = run_episode(&cfg).unwrap();
        let good =
            r.termination == Termination::Timeout && (r.report.ft - budget).abs() <= 0.1 + 1e-9;
        ok &= good;
        notes.push(format!("timeout at budget {budget}: ft {:.2}", r.report.ft));
    }
    let mut cfg = inline(mixed_micro_scene(), PolicyId::Dual, 0);
    cfg.time_budget = 600.0;
    let r = run_episode(&cfg).unwrap();
    ok &= r.termination == Termination::Completed
        && r.report.tcr_sweep == 1.0
        && r.report.tcr_grasp == 1.0;
    notes.push(format!(
        "{:?} with TCR_S {} TCR_G {}",
        r.termination, r.report.tcr_sweep, r.report.tcr_grasp
    ));
    let mut s = room(5.0, 4.0);
    s.spawns = vec![Pose::new(1.0, 2.0, PI)];
    for limit in [100, 7] {
        let mut cfg = inline(s.clone(), PolicyId::Idle, 0);
        cfg.collision_limit = limit;
        let r = run_episode_with(&cfg, vec![Box::new(Rammer)]).unwrap();
        ok &= r.termination == Termination::CollisionLimit && r.report.collision == limit;
        notes.push(format!(
            "limit {limit}: {:?} after {} collisions",
            r.termination, r.report.collision
        ));
    }
    verdict(
        10,
        "termination protocol",
        ok,
        format!("{} (timeout tolerance one control step)", notes.join("; ")),
        t0,
        Duration::from_secs(30),
    );
}
