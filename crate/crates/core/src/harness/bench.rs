use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::metrics::{MetricReport, TABLE_COLUMNS};

use super::{run_episode, ConfigError, EpisodeConfig, HarnessError, Termination};

pub const SUITE_SCHEMA: u32 = 1;

/// Benchmark suite file: a list of episode configs and the run count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSuite {
    pub schema: u32,
    #[serde(default = "default_runs")]
    pub runs_per_config: usize,
    pub configs: Vec<EpisodeConfig>,
}

fn default_runs() -> usize {
    5
}

impl BenchSuite {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let suite: BenchSuite =
            serde_json::from_str(text).map_err(|e| ConfigError::BadSuite(e.to_string()))?;
        if suite.schema != SUITE_SCHEMA {
            return Err(ConfigError::BadSuite(format!(
                "unsupported schema {}",
                suite.schema
            )));
        }
        if suite.configs.is_empty() {
            return Err(ConfigError::BadSuite("no configs".into()));
        }
        Ok(suite)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("suite serialises")
    }
}

/// Outcome of one benchmark episode. Failures are kept with their message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub config: usize,
    pub run: usize,
    pub seed: u64,
    pub label: String,
    pub outcome: Result<EpisodeSummary, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub termination: Termination,
    pub steps: u64,
    pub report: MetricReport,
}

/// Mean and sample standard deviation of one table column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    /// Runs where the column was defined.
    pub n: usize,
    pub mean: Option<f64>,
    /// Needs at least two defined runs.
    pub std: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

impl Stat {
    pub fn of(values: &[f64]) -> Stat {
        let n = values.len();
        if n == 0 {
            return Stat {
                n,
                mean: None,
                std: None,
                min: None,
                max: None,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = (n > 1).then(|| {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        });
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // keep the mean inside [min, max] despite rounding
        Stat {
            n,
            mean: Some(mean.clamp(min, max)),
            std,
            min: Some(min),
            max: Some(max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub config: usize,
    pub label: String,
    pub runs: usize,
    pub failed: usize,
    /// One entry per [`TABLE_COLUMNS`] header, same order.
    pub stats: Vec<Stat>,
}

impl AggregateRow {
    pub fn stat(&self, column: &str) -> Option<&Stat> {
        TABLE_COLUMNS
            .iter()
            .position(|c| *c == column)
            .map(|i| &self.stats[i])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchOutput {
    pub episodes: Vec<EpisodeRecord>,
    pub rows: Vec<AggregateRow>,
}

/// Runs every config `runs_per_cfg` times with seeds `seed + i` on `jobs`
/// worker threads (0 picks the default) and aggregates per config. Results
/// do not depend on the thread count.
pub fn run_benchmark(
    suite: &[EpisodeConfig],
    runs_per_cfg: usize,
    jobs: usize,
) -> Result<BenchOutput, HarnessError> {
    if runs_per_cfg == 0 {
        return Err(ConfigError::NoRuns.into());
    }
    for c in suite {
        c.validate()?;
    }
    let work: Vec<(usize, usize)> = (0..suite.len())
        .flat_map(|c| (0..runs_per_cfg).map(move |r| (c, r)))
        .collect();
    let one = |&(c, r): &(usize, usize)| {
        let mut cfg = suite[c].clone();
        cfg.seed = cfg.seed.wrapping_add(r as u64);
        let outcome = run_episode(&cfg)
            .map(|res| EpisodeSummary {
                termination: res.termination,
                steps: res.steps,
                report: res.report,
            })
            .map_err(|e| e.to_string());
        EpisodeRecord {
            config: c,
            run: r,
            seed: cfg.seed,
            label: cfg.label(),
            outcome,
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| HarnessError::Runtime(e.to_string()))?;
    let episodes: Vec<EpisodeRecord> = pool.install(|| work.par_iter().map(one).collect());
    let rows = aggregate(suite, &episodes);
    Ok(BenchOutput { episodes, rows })
}

/// Per-config statistics over the successful episodes.
pub fn aggregate(suite: &[EpisodeConfig], episodes: &[EpisodeRecord]) -> Vec<AggregateRow> {
    suite
        .iter()
        .enumerate()
        .map(|(c, cfg)| {
            let mine: Vec<&EpisodeRecord> = episodes.iter().filter(|e| e.config == c).collect();
            let ok: Vec<&MetricReport> = mine
                .iter()
                .filter_map(|e| e.outcome.as_ref().ok())
                .map(|s| &s.report)
                .collect();
            let stats = TABLE_COLUMNS
                .iter()
                .map(|col| Stat::of(&ok.iter().filter_map(|r| r.column(col)).collect::<Vec<_>>()))
                .collect();
            AggregateRow {
                config: c,
                label: cfg.label(),
                runs: mine.len(),
                failed: mine.len() - ok.len(),
                stats,
            }
        })
        .collect()
}

impl BenchOutput {
    /// Comma-separated table: label, counts, then mean and std per column.
    /// Undefined values are empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("config,label,runs,failed");
        for c in TABLE_COLUMNS {
            let _ = write!(out, ",{c}_mean,{c}_std");
        }
        out.push('\n');
        let cell = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.6}"));
        for r in &self.rows {
            let _ = write!(
                out,
                "{},\"{}\",{},{}",
                r.config,
                r.label.replace('"', "'"),
                r.runs,
                r.failed
            );
            for s in &r.stats {
                let _ = write!(out, ",{},{}", cell(s.mean), cell(s.std));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bench output serialises")
    }

    /// Fixed-width text table of the means.
    pub fn to_text(&self) -> String {
        let mut out = format!("{:<36}", "config");
        for c in TABLE_COLUMNS {
            let _ = write!(out, " {c:>8}");
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{:<36}", r.label);
            for s in &r.stats {
                match s.mean {
                    Some(m) => {
                        let _ = write!(out, " {m:>8.3}");
                    }
                    None => out.push_str("        -"),
                }
            }
            if r.failed > 0 {
                let _ = write!(out, "  ({} failed)", r.failed);
            }
            out.push('\n');
        }
        out
    }
}
