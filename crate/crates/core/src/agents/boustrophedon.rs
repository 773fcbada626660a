//! Lane decomposition for back-and-forth coverage and the coverage route
//! built from it.

use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;
use crate::world::{Cell, OccupancyGrid};

use super::navmap::{NavMap, SEGMENT_CLEARANCE};
use super::AgentError;

/// Lane spacing used by the coverage policies: the footprint width, so
/// neighbouring footprints tile without gaps.
pub const PITCH: f64 = 0.47;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Lanes run along y and are stacked in x.
    Vertical,
    /// Lanes run along x and are stacked in y.
    Horizontal,
}

/// One straight coverage run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaneSegment {
    pub lane: usize,
    /// Cross-lane coordinate.
    pub at: f64,
    /// Along-lane interval, `from < to`.
    pub from: f64,
    pub to: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanePlan {
    pub orientation: Orientation,
    pub pitch: f64,
    pub lanes: Vec<f64>,
    pub segments: Vec<LaneSegment>,
}

impl LanePlan {
    pub fn point(&self, at: f64, along: f64) -> Vec2<f64> {
        match self.orientation {
            Orientation::Vertical => Vec2::new(at, along),
            Orientation::Horizontal => Vec2::new(along, at),
        }
    }

    pub fn ends(&self, s: &LaneSegment) -> (Vec2<f64>, Vec2<f64>) {
        (self.point(s.at, s.from), self.point(s.at, s.to))
    }

    /// Serpentine waypoints: segments lane by lane, direction alternating
    /// per lane.
    pub fn waypoints(&self) -> Vec<Vec2<f64>> {
        let mut out = Vec::new();
        for (k, _) in self.lanes.iter().enumerate() {
            let mut segs: Vec<&LaneSegment> =
                self.segments.iter().filter(|s| s.lane == k).collect();
            let flip = k % 2 == 1;
            if flip {
                segs.reverse();
            }
            for s in segs {
                let (a, b) = self.ends(s);
                if flip {
                    out.extend([b, a]);
                } else {
                    out.extend([a, b]);
                }
            }
        }
        out
    }
}

/// Lane coordinates covering the band of cell centers `[lo, hi]`.
///
/// The band is widened by half a cell and by `reach` on both sides and cut
/// into `ceil(width / pitch)` strips; lanes sit at strip centers except the
/// last, which is flush with the band's far edge. A flush lane closer than a
/// quarter pitch to its neighbour adds nothing and is dropped. Lanes are
/// clamped to `[lo, hi]`.
pub fn lane_positions(lo: f64, hi: f64, delta: f64, pitch: f64, reach: f64) -> Vec<f64> {
    let a = lo - 0.5 * delta - reach;
    let b = hi + 0.5 * delta + reach;
    let n = (((b - a) / pitch) - 1e-9).ceil().max(1.0) as usize;
    let mut out: Vec<f64> = if n == 1 {
        vec![0.5 * (a + b)]
    } else {
        let mut v: Vec<f64> = (0..n - 1).map(|k| a + (k as f64 + 0.5) * pitch).collect();
        let flush = b - 0.5 * pitch;
        if flush - v[n - 2] >= 0.25 * pitch {
            v.push(flush);
        }
        v
    };
    for x in &mut out {
        *x = x.clamp(lo, hi);
    }
    out.dedup_by(|x, y| (*x - *y).abs() < 1e-9);
    out
}

/// Generic lane decomposition over an `nx` by `ny` grid.
///
/// A lane is open at a column when the cells bracketing it are `open` and
/// `point_ok` accepts the lane point; maximal open runs of two or more
/// columns become segments.
#[allow(clippy::too_many_arguments)]
pub fn plan_lanes(
    origin: Vec2<f64>,
    nx: usize,
    ny: usize,
    delta: f64,
    open: impl Fn(Cell) -> bool,
    point_ok: impl Fn(Vec2<f64>) -> bool,
    orientation: Orientation,
    pitch: f64,
    reach: f64,
) -> LanePlan {
    let vertical = orientation == Orientation::Vertical;
    // (across count, along count, across origin, along origin)
    let (n_cross, n_along, o_cross, o_along) = if vertical {
        (nx, ny, origin.x, origin.y)
    } else {
        (ny, nx, origin.y, origin.x)
    };
    let cell = |c: usize, a: usize| if vertical { (c, a) } else { (a, c) };
    let center = |o: f64, i: usize| o + (i as f64 + 0.5) * delta;
    let mut plan = LanePlan {
        orientation,
        pitch,
        lanes: Vec::new(),
        segments: Vec::new(),
    };

    let used: Vec<usize> = (0..n_cross)
        .filter(|&c| (0..n_along).any(|a| open(cell(c, a))))
        .collect();
    let (Some(&lo), Some(&hi)) = (used.first(), used.last()) else {
        return plan;
    };
    plan.lanes = lane_positions(
        center(o_cross, lo),
        center(o_cross, hi),
        delta,
        pitch,
        reach,
    );

    for (k, &at) in plan.lanes.iter().enumerate() {
        let f = (at - o_cross) / delta - 0.5;
        let (c0, c1) = if (f - f.round()).abs() < 1e-9 {
            let r = f.round() as usize;
            (r, r)
        } else {
            (
                f.floor().max(0.0) as usize,
                (f.floor() as usize + 1).min(n_cross - 1),
            )
        };
        let mut run: Option<usize> = None;
        for a in 0..=n_along {
            let ok = a < n_along && open(cell(c0, a)) && open(cell(c1, a)) && {
                let along = center(o_along, a);
                point_ok(plan.point(at, along))
            };
            match (ok, run) {
                (true, None) => run = Some(a),
                (false, Some(s)) => {
                    if a - s >= 2 {
                        plan.segments.push(LaneSegment {
                            lane: k,
                            at,
                            from: center(o_along, s),
                            to: center(o_along, a - 1),
                        });
                    }
                    run = None;
                }
                _ => {}
            }
        }
    }
    plan
}

/// Lane decomposition of the navigable cells of `grid`, lanes reaching the
/// band edges without extra margin.
pub fn boustrophedon_plan(
    grid: &OccupancyGrid,
    orientation: Orientation,
    pitch: f64,
) -> Result<LanePlan, AgentError> {
    if !(pitch > 0.0) {
        return Err(AgentError::BadParameter(format!("pitch {pitch}")));
    }
    let plan = plan_lanes(
        grid.origin(),
        grid.nx(),
        grid.ny(),
        grid.delta(),
        |c| grid.is_navigable(c),
        |_| true,
        orientation,
        pitch,
        0.0,
    );
    if plan.segments.is_empty() {
        return Err(AgentError::NoNavigableSpace);
    }
    Ok(plan)
}

/// Lanes a robot can drive on `map`, restricted to `region` cells when
/// given. Edge lanes reach the inflation boundary.
pub fn robot_lanes(map: &NavMap, region: Option<&[bool]>, orientation: Orientation) -> LanePlan {
    let reach = 0.5 * PITCH - 0.5 * map.delta();
    plan_lanes(
        map.bounds().min,
        map.nx(),
        map.ny(),
        map.delta(),
        |c| map.is_passable(c) && region.is_none_or(|r| r[map.index(c)]),
        |p| map.point_ok(p, SEGMENT_CLEARANCE),
        orientation,
        PITCH,
        reach,
    )
}

/// Lateral offset below which the brush already catches a target.
const CATCH: f64 = 0.15;
/// Lateral offset a detour leaves between target and lane.
const DETOUR_KEEP: f64 = 0.12;

/// Shifted waypoints that bring the brush over targets lying between lanes.
/// `dir` is +1 when driving toward increasing along-coordinate.
fn detour_points(
    plan: &LanePlan,
    map: &NavMap,
    seg: &LaneSegment,
    dir: f64,
    targets: &[Vec2<f64>],
) -> Vec<Vec2<f64>> {
    let vertical = plan.orientation == Orientation::Vertical;
    let mut mine: Vec<(f64, f64)> = targets
        .iter()
        .filter_map(|t| {
            let (along, cross) = if vertical { (t.y, t.x) } else { (t.x, t.y) };
            if along < seg.from - 0.1 || along > seg.to + 0.1 {
                return None;
            }
            // owned by the nearest lane
            let near = plan
                .lanes
                .iter()
                .map(|l| (l - cross).abs())
                .fold(f64::INFINITY, f64::min);
            let d = cross - seg.at;
            (d.abs() <= near + 1e-9 && d.abs() > CATCH && d.abs() < 0.5 * PITCH + 0.08)
                .then_some((along, d))
        })
        .collect();
    mine.sort_by(|a, b| (dir * a.0).total_cmp(&(dir * b.0)));
    let mut out = Vec::new();
    let mut last_end = f64::NEG_INFINITY;
    for (t, d) in mine {
        let shift = d.signum() * (d.abs() - DETOUR_KEEP).min(DETOUR_KEEP);
        let ramp = [
            (t - dir * 0.8, 0.0),
            (t - dir * 0.45, shift),
            (t - dir * 0.1, shift),
            (t + dir * 0.25, 0.0),
        ];
        let inside = ramp
            .iter()
            .all(|(a, _)| *a >= seg.from - 1e-9 && *a <= seg.to + 1e-9);
        if !inside || dir * ramp[0].0 < last_end {
            continue;
        }
        let pts: Vec<Vec2<f64>> = ramp
            .iter()
            .map(|(a, s)| plan.point(seg.at + s, *a))
            .collect();
        if !pts.windows(2).all(|w| map.segment_ok(w[0], w[1])) {
            continue;
        }
        last_end = dir * ramp[3].0;
        out.extend(pts);
    }
    out
}

/// Full coverage route: every lane segment once, in greedy nearest-first
/// order, joined by direct connectors or planned transits. Adjacent lanes
/// link directly so the corner fillets form U-turns.
pub fn coverage_route(
    map: &NavMap,
    region: Option<&[bool]>,
    orientation: Orientation,
    start: Vec2<f64>,
    targets: &[Vec2<f64>],
) -> Result<Vec<Vec2<f64>>, AgentError> {
    let plan = robot_lanes(map, region, orientation);
    if plan.segments.is_empty() {
        return Err(AgentError::NoNavigableSpace);
    }
    let n = plan.segments.len();
    let first_lane = plan.segments[0].lane;
    let last_lane = plan.segments[n - 1].lane;
    let mut done = vec![false; n];
    let mut route = vec![start];
    let mut cur = start;
    let mut first = true;
    while let Some(from_cell) = map.nearest_passable(cur, None) {
        let dist = map.distances(from_cell);
        let cost =
            |p: Vec2<f64>| dist[map.index(map.cell_at(p))] + p.distance(map.center(map.cell_at(p)));
        let mut best: Option<(f64, usize, bool)> = None;
        for (k, s) in plan.segments.iter().enumerate() {
            if done[k] || (first && s.lane != first_lane && s.lane != last_lane) {
                continue;
            }
            let (a, b) = plan.ends(s);
            for (p, rev) in [(a, false), (b, true)] {
                let c = cost(p);
                if c.is_finite() && best.is_none_or(|(bc, _, _)| c < bc - 1e-9) {
                    best = Some((c, k, rev));
                }
            }
        }
        let Some((_, k, rev)) = best else { break };
        first = false;
        done[k] = true;
        let s = plan.segments[k];
        let (a, b) = plan.ends(&s);
        let (entry, exit, dir) = if rev { (b, a, -1.0) } else { (a, b, 1.0) };
        let direct = cur.distance(entry) <= 1.5 * PITCH && map.segment_ok(cur, entry);
        if direct || cur.distance(entry) < 1e-9 {
            route.push(entry);
        } else if let Some(p) = map.plan(cur, entry) {
            route.extend_from_slice(&p[1..]);
        } else {
            continue;
        }
        route.extend(detour_points(&plan, map, &s, dir, targets));
        route.push(exit);
        cur = exit;
    }
    if route.len() < 2 {
        return Err(AgentError::NoNavigableSpace);
    }
    Ok(route)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Rect;

    #[test]
    fn four_metre_room_has_twelve_lanes() {
        let g = OccupancyGrid::from_navigable(
            Rect::from_xywh(0.0, 0.0, 4.0, 4.0),
            0.1,
            vec![true; 1600],
        );
        let p = boustrophedon_plan(&g, Orientation::Vertical, 0.35).unwrap();
        assert_eq!(p.lanes.len(), 12);
        assert_eq!(p.segments.len(), 12);
        let w = p.waypoints();
        assert_eq!(w.len(), 24);
        assert!((w[0].x - 0.175).abs() < 1e-9 && (w[0].y - 0.05).abs() < 1e-9);
        assert!((w[3].y - 0.05).abs() < 1e-9, "second lane runs back down");
    }

    #[test]
    fn lanes_stay_inside_the_band() {
        let l = lane_positions(0.4, 5.6, 0.1, PITCH, 0.5 * PITCH - 0.05);
        assert!(l.iter().all(|x| (0.4..=5.6).contains(x)));
        assert!((l[0] - 0.4).abs() < 1e-9);
        // the flush lane would sit 3 cm from its neighbour, so it is dropped
        assert!(5.6 - l.last().unwrap() < 0.25 * PITCH);
        assert!(l.windows(2).all(|w| w[1] - w[0] <= PITCH + 1e-9));
    }
}
