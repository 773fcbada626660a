//! JSON documents written by the CLI.
//!
//! `report.json` leaves out the compute-time metric so that reruns with the
//! same flags produce identical bytes; it goes to `timing.json` instead.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use dualsweep::harness::{AggregateRow, BenchOutput, EpisodeConfig, EpisodeResult, Stat};
use dualsweep::metrics::{MetricReport, TABLE_COLUMNS};

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeInfo {
    pub label: String,
    pub policies: Vec<String>,
    pub n_robots: usize,
    pub seed: u64,
    pub termination: String,
    pub steps: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDoc {
    pub schema: u32,
    pub scene: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub episode: Option<EpisodeInfo>,
    /// Every [`MetricReport`] field except `ct`.
    pub metrics: Value,
}

fn metrics_without_ct(r: &MetricReport) -> Value {
    let mut v = serde_json::to_value(r).expect("report serialises");
    if let Value::Object(m) = &mut v {
        m.remove("ct");
    }
    v
}

impl ReportDoc {
    pub fn from_report(scene: &str, r: &MetricReport) -> Self {
        ReportDoc {
            schema: REPORT_SCHEMA,
            scene: scene.to_string(),
            episode: None,
            metrics: metrics_without_ct(r),
        }
    }

    pub fn from_episode(cfg: &EpisodeConfig, res: &EpisodeResult) -> Self {
        let mut doc = ReportDoc::from_report(&res.scene.id, &res.report);
        doc.episode = Some(EpisodeInfo {
            label: cfg.label(),
            policies: cfg.policies.iter().map(|p| p.to_string()).collect(),
            n_robots: cfg.n_robots,
            seed: cfg.seed,
            termination: res.termination.as_str().to_string(),
            steps: res.steps,
        });
        doc
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises") + "\n"
    }

    /// The metrics with `ct` filled in.
    pub fn report(&self, ct: f64) -> Result<MetricReport, String> {
        let mut v = self.metrics.clone();
        match &mut v {
            Value::Object(m) => {
                m.insert("ct".into(), ct.into());
            }
            _ => return Err("`metrics` is not an object".into()),
        }
        serde_json::from_value(v).map_err(|e| e.to_string())
    }

    pub fn summary_line(&self) -> String {
        let r = self.report(0.0).expect("own metrics parse");
        let head = match &self.episode {
            Some(e) => format!(
                "{} seed {}: {} after {} steps",
                e.label, e.seed, e.termination, e.steps
            ),
            None => self.scene.clone(),
        };
        let me = r.me.map_or("-".to_string(), |v| format!("{v:.2}"));
        format!(
            "{head} | TCR {:.3} (S {:.3}, G {:.3}) ME {me} SR {:.3} CR {:.3} FT {:.1} Col {}",
            r.tcr, r.tcr_sweep, r.tcr_grasp, r.sr, r.cr, r.ft, r.collision
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingDoc {
    pub schema: u32,
    /// Mean decision time per step, seconds.
    pub ct: f64,
}

impl TimingDoc {
    pub fn new(r: &MetricReport) -> Self {
        TimingDoc {
            schema: REPORT_SCHEMA,
            ct: r.ct,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("timing serialises") + "\n"
    }
}

/// Table rows from a bench.json (all its rows) or a report.json (one row,
/// CT taken from a sibling timing.json when present).
pub fn rows_from_file(path: &Path, text: &str) -> Result<Vec<AggregateRow>, String> {
    let v: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if v.get("rows").is_some() {
        let b: BenchOutput = serde_json::from_value(v).map_err(|e| e.to_string())?;
        return Ok(b.rows);
    }
    let doc: ReportDoc = serde_json::from_value(v).map_err(|e| e.to_string())?;
    if doc.schema != REPORT_SCHEMA {
        return Err(format!("unsupported report schema {}", doc.schema));
    }
    let ct = path
        .parent()
        .map(|d| d.join("timing.json"))
        .and_then(|p| std::fs::read_to_string(p).ok())
        .and_then(|t| serde_json::from_str::<TimingDoc>(&t).ok())
        .map(|t| t.ct);
    let r = doc.report(ct.unwrap_or(0.0))?;
    let stats = TABLE_COLUMNS
        .iter()
        .map(|&c| match c {
            "CT" if ct.is_none() => Stat::of(&[]),
            _ => Stat::of(&r.column(c).into_iter().collect::<Vec<_>>()),
        })
        .collect();
    let label = doc.episode.as_ref().map_or(doc.scene.clone(), |e| {
        format!("{} seed {}", e.label, e.seed)
    });
    Ok(vec![AggregateRow {
        config: 0,
        label,
        runs: 1,
        failed: 0,
        stats,
    }])
}
