//! Polyline following for a unicycle: straight lines joined by fillet arcs
//! or in-place turns, with blocker waiting, detours and stuck recovery.

use std::f64::consts::FRAC_PI_2;

use crate::geometry::{wrap_angle, Pose, Rect, Vec2};
use crate::sim::Observation;

use super::navmap::NavMap;

pub const V_MAX: f64 = 0.5;
pub const W_MAX: f64 = 1.0;
/// Fillet radii tried at each corner, largest first.
pub const FILLET_RADII: [f64; 3] = [0.235, 0.15, 0.08];
/// Corners sharper than this always turn in place.
const MAX_FILLET_TURN: f64 = 2.6;
const DONE_TOL: f64 = 2e-3;
const SPIN_TOL: f64 = 0.02;
/// Steps without motion before the route is replanned.
pub const STUCK_STEPS: u32 = 30;
/// Steps spent waiting on a blocker before detouring.
pub const WAIT_STEPS: u32 = 30;
const LOOKAHEAD: f64 = 0.6;
const ROBOT_RADIUS: f64 = 0.32;

#[derive(Debug, Clone, PartialEq)]
pub enum Prim {
    Line {
        a: Vec2<f64>,
        b: Vec2<f64>,
    },
    /// Arc about `c`; `start` is the polar angle of the entry point and
    /// `sweep` the signed turn.
    Arc {
        c: Vec2<f64>,
        r: f64,
        start: f64,
        sweep: f64,
    },
    Spin {
        heading: f64,
    },
}

fn dir(a: Vec2<f64>, b: Vec2<f64>) -> Vec2<f64> {
    (b - a).normalized().unwrap_or(Vec2::new(1.0, 0.0))
}

fn angle(v: Vec2<f64>) -> f64 {
    v.y.atan2(v.x)
}

/// Removes repeated points.
fn dedup(path: &[Vec2<f64>]) -> Vec<Vec2<f64>> {
    let mut out: Vec<Vec2<f64>> = Vec::with_capacity(path.len());
    for &p in path {
        if out.last().is_none_or(|q| q.distance(p) > 1e-6) {
            out.push(p);
        }
    }
    out
}

/// Turns a polyline into motion primitives. Each corner gets the largest
/// fillet that fits the neighbouring segments and passes `map`'s arc check;
/// otherwise the robot stops and turns in place. `owner[k]` is the index of
/// the polyline vertex a primitive leads to.
pub fn build_prims(path: &[Vec2<f64>], map: &NavMap) -> (Vec<Prim>, Vec<usize>) {
    let pts = dedup(path);
    let mut prims = Vec::new();
    let mut owner = Vec::new();
    if pts.len() < 2 {
        return (prims, owner);
    }
    let nseg = pts.len() - 1;
    let len: Vec<f64> = (0..nseg).map(|i| pts[i].distance(pts[i + 1])).collect();
    let u: Vec<Vec2<f64>> = (0..nseg).map(|i| dir(pts[i], pts[i + 1])).collect();
    let mut trim_start = vec![0.0; nseg];
    let mut trim_end = vec![0.0; nseg];
    let mut corner: Vec<Option<Prim>> = vec![None; nseg];
    for k in 1..nseg {
        let phi = wrap_angle(angle(u[k]) - angle(u[k - 1]));
        if phi.abs() < 1e-6 {
            continue;
        }
        let mut chosen = None;
        if phi.abs() <= MAX_FILLET_TURN {
            let room_before = len[k - 1] - trim_start[k - 1];
            let room_after = if k + 1 < nseg { 0.5 * len[k] } else { len[k] };
            for r in FILLET_RADII {
                let t = r * (0.5 * phi.abs()).tan();
                if t > room_before + 1e-9 || t > room_after + 1e-9 {
                    continue;
                }
                let s = phi.signum();
                let p1 = pts[k] - u[k - 1] * t;
                let c = p1 + u[k - 1].perp() * (s * r);
                let start = angle(p1 - c);
                if map.arc_ok(c, r, start, phi) {
                    chosen = Some((
                        t,
                        Prim::Arc {
                            c,
                            r,
                            start,
                            sweep: phi,
                        },
                    ));
                    break;
                }
            }
        }
        match chosen {
            Some((t, arc)) => {
                trim_end[k - 1] = t;
                trim_start[k] = t;
                corner[k] = Some(arc);
            }
            None => {
                corner[k] = Some(Prim::Spin {
                    heading: angle(u[k]),
                })
            }
        }
    }
    prims.push(Prim::Spin {
        heading: angle(u[0]),
    });
    owner.push(0);
    for i in 0..nseg {
        let a = pts[i] + u[i] * trim_start[i];
        let b = pts[i + 1] - u[i] * trim_end[i];
        if a.distance(b) > 1e-6 {
            prims.push(Prim::Line { a, b });
            owner.push(i + 1);
        }
        if i + 1 < nseg {
            if let Some(p) = corner[i + 1].take() {
                prims.push(p);
                owner.push(i + 1);
            }
        }
    }
    (prims, owner)
}

/// Stateful primitive follower.
#[derive(Debug, Clone, Default)]
pub struct Tracker {
    points: Vec<Vec2<f64>>,
    prims: Vec<Prim>,
    owner: Vec<usize>,
    idx: usize,
    arc_last: Option<f64>,
    arc_prog: f64,
}

impl Tracker {
    pub fn new(path: &[Vec2<f64>], map: &NavMap) -> Self {
        let points = dedup(path);
        let (prims, owner) = build_prims(&points, map);
        Tracker {
            points,
            prims,
            owner,
            idx: 0,
            arc_last: None,
            arc_prog: 0.0,
        }
    }

    pub fn is_done(&self) -> bool {
        self.idx >= self.prims.len()
    }

    pub fn prims(&self) -> &[Prim] {
        &self.prims
    }

    /// Polyline vertices not yet reached.
    pub fn remaining(&self) -> &[Vec2<f64>] {
        match self.owner.get(self.idx) {
            Some(&v) => &self.points[v.min(self.points.len())..],
            None => &[],
        }
    }

    /// Final point of the route.
    pub fn goal(&self) -> Option<Vec2<f64>> {
        self.points.last().copied()
    }

    /// Skips the primitive in progress.
    pub fn skip(&mut self) {
        self.idx += 1;
        self.arc_last = None;
        self.arc_prog = 0.0;
    }

    /// Velocity command `(v, w)` in physical units, or `None` when done.
    pub fn command(&mut self, pose: &Pose<f64>, dt: f64) -> Option<(f64, f64)> {
        let p = pose.position();
        while let Some(prim) = self.prims.get(self.idx) {
            match *prim {
                Prim::Spin { heading } => {
                    let err = wrap_angle(heading - pose.theta);
                    if err.abs() < SPIN_TOL {
                        self.skip();
                        continue;
                    }
                    return Some((0.0, (err / dt).clamp(-W_MAX, W_MAX)));
                }
                Prim::Line { a, b } => {
                    let u = dir(a, b);
                    let rem = (b - p).dot(u);
                    if rem <= DONE_TOL {
                        self.skip();
                        continue;
                    }
                    let e = (p - a).dot(u.perp());
                    let want = angle(u) - (3.0 * e).atan();
                    let phi = wrap_angle(want - pose.theta);
                    if phi.abs() > 0.3 {
                        return Some((0.0, (phi / dt).clamp(-W_MAX, W_MAX)));
                    }
                    let v = V_MAX.min(rem / dt) * phi.cos();
                    return Some((v, (2.5 * phi).clamp(-W_MAX, W_MAX)));
                }
                Prim::Arc { c, r, start, sweep } => {
                    let s = sweep.signum();
                    let beta = angle(p - c);
                    let last = self.arc_last.unwrap_or(start);
                    self.arc_prog += s * wrap_angle(beta - last);
                    self.arc_last = Some(beta);
                    let rem = sweep.abs() - self.arc_prog;
                    if rem * r <= DONE_TOL {
                        self.skip();
                        continue;
                    }
                    let tangent = beta + s * FRAC_PI_2;
                    let herr = wrap_angle(tangent - pose.theta);
                    if herr.abs() > 0.6 {
                        return Some((0.0, (herr / dt).clamp(-W_MAX, W_MAX)));
                    }
                    let radial = p.distance(c) - r;
                    let v = V_MAX.min(0.85 * r * W_MAX).min(rem * r / dt);
                    let w = s * v / r + 2.0 * herr + s * 4.0 * radial;
                    return Some((v, w.clamp(-W_MAX, W_MAX)));
                }
            }
        }
        None
    }
}

/// Obstacles that move: mover boxes and other robots.
fn blocker_near(obs: &Observation, q: Vec2<f64>, margin: f64) -> bool {
    obs.movers
        .iter()
        .any(|m: &Rect<f64>| rect_dist(m, q) < ROBOT_RADIUS + margin)
        || obs
            .others
            .iter()
            .any(|o| o.position().distance(q) < 2.0 * ROBOT_RADIUS + margin)
}

fn rect_dist(r: &Rect<f64>, p: Vec2<f64>) -> f64 {
    let dx = (r.min.x - p.x).max(0.0).max(p.x - r.max.x);
    let dy = (r.min.y - p.y).max(0.0).max(p.y - r.max.y);
    dx.hypot(dy)
}

/// True when a moving body sits in the corridor ahead.
pub fn blocked_ahead(obs: &Observation, forward: bool) -> bool {
    if !forward {
        return false;
    }
    let p = obs.pose.position();
    let h = obs.pose.heading();
    (1..=4).any(|k| blocker_near(obs, p + h * (LOOKAHEAD * k as f64 / 4.0), 0.05))
}

/// Route follower with waiting, detours around moving bodies, and replanning
/// when motion stalls.
#[derive(Debug, Clone, Default)]
pub struct Driver {
    tracker: Tracker,
    wait: u32,
    stuck: u32,
    last: Option<Pose<f64>>,
}

impl Driver {
    pub fn set_path(&mut self, path: &[Vec2<f64>], map: &NavMap) {
        self.tracker = Tracker::new(path, map);
        self.wait = 0;
        self.stuck = 0;
        self.last = None;
    }

    pub fn clear(&mut self) {
        self.tracker = Tracker::default();
    }

    pub fn is_done(&self) -> bool {
        self.tracker.is_done()
    }

    pub fn tracker(&self) -> &Tracker {
        &self.tracker
    }

    /// Replaces the rest of the route by a fresh plan from `from` to the
    /// next vertex, followed by the untouched remainder. Returns false when
    /// no plan exists; the blocked vertex is then dropped.
    fn reroute(&mut self, from: Vec2<f64>, map: &NavMap, extra: Option<&[bool]>) -> bool {
        let rest = self.tracker.remaining().to_vec();
        if rest.is_empty() {
            return false;
        }
        // rejoin at the first vertex clear of the blockage
        let j = match extra {
            Some(e) => rest
                .iter()
                .position(|&q| !e[map.index(map.cell_at(q))])
                .unwrap_or(rest.len() - 1),
            None => 0,
        };
        match map.plan_avoiding(from, rest[j], extra) {
            Some(mut path) => {
                path.extend_from_slice(&rest[j + 1..]);
                self.set_path(&path, map);
                true
            }
            None => {
                let mut path = vec![from];
                path.extend_from_slice(&rest[(j + 1).min(rest.len())..]);
                self.set_path(&path, map);
                false
            }
        }
    }

    fn blocker_mask(obs: &Observation, map: &NavMap) -> Vec<bool> {
        (0..map.len())
            .map(|i| blocker_near(obs, map.center(map.cell(i)), 0.35))
            .collect()
    }

    /// Normalized `[lin, ang]` command for this step.
    pub fn step(&mut self, obs: &Observation, map: &NavMap, dt: f64) -> [f64; 2] {
        let pose = obs.pose;
        let moved = self.last.is_none_or(|l| {
            l.position().distance(pose.position()) > 1e-4
                || wrap_angle(l.theta - pose.theta).abs() > 1e-4
        });
        self.last = Some(pose);
        let Some((mut v, mut w)) = self.tracker.command(&pose, dt) else {
            return [0.0, 0.0];
        };
        if blocked_ahead(obs, v > 0.0) {
            self.wait += 1;
            self.stuck = 0;
            if self.wait >= WAIT_STEPS {
                self.wait = 0;
                let mask = Self::blocker_mask(obs, map);
                self.reroute(pose.position(), map, Some(&mask));
            }
            return [0.0, 0.0];
        }
        self.wait = 0;
        if moved {
            self.stuck = 0;
        } else {
            self.stuck += 1;
            if self.stuck >= STUCK_STEPS {
                self.stuck = 0;
                self.reroute(pose.position(), map, None);
                match self.tracker.command(&pose, dt) {
                    Some(c) => (v, w) = c,
                    None => return [0.0, 0.0],
                }
            }
        }
        [v / V_MAX, w / W_MAX]
    }
}
