//! Per-step trajectory record and its tab-separated text form.
//!
//! ```text
//! # dualsweep-trajectory schema=1 dt=0.1 robots=1 scene=builtin-1-sparse
//! tau  time  robot  x  y  theta  mode  event  object  compute_s
//! ```
//!
//! Pose rows carry `-` in the event and object columns; event rows carry `-`
//! in the pose and mode columns. Numbers use six decimals and are quantised
//! to that precision when recorded, so a parsed export equals the original.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::geometry::Pose;

use super::{Event, EventKind, Mode, SimState};

pub const LOG_SCHEMA: u32 = 1;
const MAGIC: &str = "# dualsweep-trajectory";
const COLUMNS: &str = "tau\ttime\trobot\tx\ty\ttheta\tmode\tevent\tobject\tcompute_s";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LogError {
    #[error("log schema error at line {line}: {message}")]
    Schema { line: usize, message: String },
}

fn schema_err(line: usize, message: impl Into<String>) -> LogError {
    LogError::Schema {
        line,
        message: message.into(),
    }
}

/// Rounds to the six-decimal grid used by the text format.
pub fn quantize(v: f64) -> f64 {
    let q = (v * 1e6).round() / 1e6;
    if q == 0.0 {
        0.0
    } else {
        q
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseRecord {
    pub tau: u64,
    pub time: f64,
    pub robot: usize,
    pub pose: Pose<f64>,
    pub mode: Mode,
    /// Wall-clock seconds spent deciding the action that led here.
    pub compute_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrajectoryLog {
    pub dt: f64,
    pub n_robots: usize,
    pub scene_id: String,
    pub poses: Vec<PoseRecord>,
    pub events: Vec<Event>,
}

impl TrajectoryLog {
    pub fn new(dt: f64, n_robots: usize, scene_id: impl Into<String>) -> Self {
        TrajectoryLog {
            dt,
            n_robots,
            scene_id: scene_id.into(),
            poses: Vec::new(),
            events: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn push_pose(
        &mut self,
        tau: u64,
        time: f64,
        robot: usize,
        pose: Pose<f64>,
        mode: Mode,
        compute_s: Option<f64>,
    ) {
        self.poses.push(PoseRecord {
            tau,
            time: quantize(time),
            robot,
            pose: Pose::new(quantize(pose.x), quantize(pose.y), quantize(pose.theta)),
            mode,
            compute_s: compute_s.map(quantize),
        });
    }

    /// Records every robot's current pose. `compute` holds the per-robot
    /// decision times for the step just taken, if any.
    pub fn record_state(&mut self, state: &SimState, compute: Option<&[f64]>) {
        for (i, r) in state.robots().iter().enumerate() {
            self.push_pose(
                state.tau(),
                state.clock(),
                i,
                r.pose,
                r.mode,
                compute.map(|c| c[i]),
            );
        }
    }

    pub fn push_event(&mut self, e: &Event) {
        let mut e = e.clone();
        e.time = quantize(e.time);
        self.events.push(e);
    }

    /// Pose records of one robot in time order.
    pub fn robot_poses(&self, robot: usize) -> Vec<&PoseRecord> {
        self.poses.iter().filter(|p| p.robot == robot).collect()
    }

    /// Copy truncated to the first `steps` control steps (poses with
    /// `tau <= steps` and events stamped no later).
    pub fn prefix(&self, steps: u64) -> TrajectoryLog {
        TrajectoryLog {
            dt: self.dt,
            n_robots: self.n_robots,
            scene_id: self.scene_id.clone(),
            poses: self
                .poses
                .iter()
                .filter(|p| p.tau <= steps)
                .cloned()
                .collect(),
            events: self
                .events
                .iter()
                .filter(|e| e.step <= steps)
                .cloned()
                .collect(),
        }
    }

    /// Text export. With `timing = false` compute times are written as `-`,
    /// which makes runs comparable byte for byte.
    pub fn to_tsv(&self, timing: bool) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{MAGIC} schema={LOG_SCHEMA} dt={} robots={} scene={}",
            self.dt, self.n_robots, self.scene_id
        );
        out.push_str(COLUMNS);
        out.push('\n');
        let mut ev = self.events.iter().peekable();
        let flush_events =
            |out: &mut String,
             upto: Option<u64>,
             ev: &mut std::iter::Peekable<std::slice::Iter<Event>>| {
                while let Some(e) = ev.peek() {
                    if upto.is_some_and(|u| e.step > u) {
                        break;
                    }
                    let robot = e.robot.map_or("-".to_string(), |r| r.to_string());
                    let object = e.object.as_deref().unwrap_or("-");
                    let _ = writeln!(
                        out,
                        "{}\t{:.6}\t{robot}\t-\t-\t-\t-\t{}\t{object}\t-",
                        e.step,
                        e.time,
                        e.kind.as_str()
                    );
                    ev.next();
                }
            };
        let mut i = 0;
        while i < self.poses.len() {
            let tau = self.poses[i].tau;
            while i < self.poses.len() && self.poses[i].tau == tau {
                let p = &self.poses[i];
                let compute = match (timing, p.compute_s) {
                    (true, Some(c)) => format!("{c:.6}"),
                    _ => "-".to_string(),
                };
                let _ = writeln!(
                    out,
                    "{}\t{:.6}\t{}\t{:.6}\t{:.6}\t{:.6}\t{}\t-\t-\t{compute}",
                    p.tau,
                    p.time,
                    p.robot,
                    p.pose.x,
                    p.pose.y,
                    p.pose.theta,
                    p.mode.as_str()
                );
                i += 1;
            }
            flush_events(&mut out, Some(tau), &mut ev);
        }
        flush_events(&mut out, None, &mut ev);
        out
    }

    pub fn parse_tsv(text: &str) -> Result<TrajectoryLog, LogError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| schema_err(1, "missing header"))?;
        let rest = header
            .strip_prefix(MAGIC)
            .ok_or_else(|| schema_err(1, "not a trajectory log"))?;
        let mut log = TrajectoryLog::default();
        let mut schema = None;
        for kv in rest.split_whitespace() {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| schema_err(1, format!("bad header field `{kv}`")))?;
            match k {
                "schema" => {
                    schema = Some(v.parse::<u32>().map_err(|_| schema_err(1, "bad schema"))?)
                }
                "dt" => log.dt = v.parse().map_err(|_| schema_err(1, "bad dt"))?,
                "robots" => log.n_robots = v.parse().map_err(|_| schema_err(1, "bad robots"))?,
                "scene" => log.scene_id = v.to_string(),
                _ => return Err(schema_err(1, format!("unknown header field `{k}`"))),
            }
        }
        if schema != Some(LOG_SCHEMA) {
            return Err(schema_err(1, format!("expected schema={LOG_SCHEMA}")));
        }
        if !(log.dt > 0.0) || log.n_robots == 0 {
            return Err(schema_err(1, "header needs positive dt and robots"));
        }
        match lines.next() {
            Some((_, l)) if l == COLUMNS => {}
            Some((n, _)) => return Err(schema_err(n + 1, "unexpected column header")),
            None => return Ok(log),
        }
        for (n, line) in lines {
            let ln = n + 1;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 10 {
                return Err(schema_err(
                    ln,
                    format!("expected 10 columns, found {}", f.len()),
                ));
            }
            let num = |s: &str, what: &str| {
                s.parse::<f64>()
                    .map_err(|_| schema_err(ln, format!("bad {what} `{s}`")))
            };
            let tau: u64 = f[0].parse().map_err(|_| schema_err(ln, "bad tau"))?;
            let time = num(f[1], "time")?;
            let robot = if f[2] == "-" {
                None
            } else {
                let r: usize = f[2].parse().map_err(|_| schema_err(ln, "bad robot"))?;
                if r >= log.n_robots {
                    return Err(schema_err(ln, "robot index out of range"));
                }
                Some(r)
            };
            if f[7] == "-" {
                let robot = robot.ok_or_else(|| schema_err(ln, "pose row without robot"))?;
                let mode = Mode::parse(f[6])
                    .ok_or_else(|| schema_err(ln, format!("bad mode `{}`", f[6])))?;
                let compute_s = if f[9] == "-" {
                    None
                } else {
                    Some(num(f[9], "compute_s")?)
                };
                let pose = Pose::new(num(f[3], "x")?, num(f[4], "y")?, num(f[5], "theta")?);
                if let Some(last) = log.poses.last() {
                    if tau < last.tau {
                        return Err(schema_err(ln, "rows out of time order"));
                    }
                }
                log.push_pose(tau, time, robot, pose, mode, compute_s);
            } else {
                let kind = EventKind::parse(f[7])
                    .ok_or_else(|| schema_err(ln, format!("bad event `{}`", f[7])))?;
                let object = (f[8] != "-").then(|| f[8].to_string());
                log.push_event(&Event {
                    time,
                    step: tau,
                    kind,
                    robot,
                    object,
                });
            }
        }
        Ok(log)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut log = TrajectoryLog::new(0.1, 1, "demo");
        log.push_pose(
            0,
            0.0,
            0,
            Pose::new(1.0, 2.0, 0.1234567891),
            Mode::Sweep,
            None,
        );
        log.push_pose(
            1,
            0.1,
            0,
            Pose::new(1.05, 2.0, -0.0000001),
            Mode::Sweep,
            Some(0.0123),
        );
        log.push_event(&Event {
            time: 0.1,
            step: 1,
            kind: EventKind::SweepSuccess,
            robot: Some(0),
            object: Some("d1".into()),
        });
        log.push_event(&Event {
            time: 0.1,
            step: 1,
            kind: EventKind::Timeout,
            robot: None,
            object: None,
        });
        let text = log.to_tsv(true);
        let back = TrajectoryLog::parse_tsv(&text).unwrap();
        assert_eq!(back, log);
        assert_eq!(back.to_tsv(true), text);
    }

    #[test]
    fn rejects_bad_schema() {
        assert!(
            TrajectoryLog::parse_tsv("# dualsweep-trajectory schema=9 dt=0.1 robots=1\n").is_err()
        );
        assert!(TrajectoryLog::parse_tsv("hello\n").is_err());
        let bad = format!("{MAGIC} schema=1 dt=0.1 robots=1\n{COLUMNS}\n0\t0\t0\t1\t1\n");
        assert!(TrajectoryLog::parse_tsv(&bad).is_err());
    }
}
