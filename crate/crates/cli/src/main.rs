//! `dualsweep` command line: run episodes and benchmarks, generate scenes,
//! rescore logs and render reports.
//!
//! Exit codes: 0 on success, 2 for bad input, 3 for failures while running.

mod docs;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dualsweep::agents::PolicyId;
use dualsweep::harness::{
    run_benchmark, BenchSuite, EpisodeConfig, HarnessError, SceneSource, SUITE_SCHEMA,
};
use dualsweep::metrics::{compile_report, MetricConfig, MetricError, VacuousMode};
use dualsweep::procgen::{generate_scene, GenParams, Layout, Pattern, ProcgenError};
use dualsweep::sim::TrajectoryLog;
use dualsweep::world::{load_scene, save_scene};

use docs::{ReportDoc, TimingDoc};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        if e.is_config() {
            CliError::Config(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

#[derive(Parser, Debug)]
#[command(
    name = "dualsweep",
    version,
    about = "Dual-mode cleaning robot benchmark"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run one episode and write its log and report.
    Run(RunArgs),
    /// Run a suite of configs several times each and aggregate.
    Bench(BenchArgs),
    /// Generate a scene file.
    Gen(GenArgs),
    /// Recompute a report from a trajectory log and its scene.
    Eval(EvalArgs),
    /// Render reports or bench results as a table.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct EpisodeArgs {
    /// builtin:<1-5>, file:<path> or a scene file path.
    #[arg(long, default_value = "builtin:1")]
    scene: SceneSource,
    /// Policy id, once for all robots or once per robot.
    #[arg(long, value_delimiter = ',', default_value = "dual")]
    policy: Vec<PolicyId>,
    #[arg(long, default_value_t = 1)]
    robots: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Time budget in seconds.
    #[arg(long, default_value_t = 300.0)]
    budget: f64,
    #[arg(long, default_value_t = 100)]
    collision_limit: usize,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    /// Target displacement radius in meters; 0 disables it.
    #[arg(long, default_value_t = 0.2)]
    jitter: f64,
    /// Stop after this many seconds without motion or events.
    #[arg(long)]
    idle_window: Option<f64>,
    /// Use the scene's listed spawns instead of random ones.
    #[arg(long)]
    fixed_spawn: bool,
    /// Remove moving obstacles.
    #[arg(long)]
    static_only: bool,
}

impl EpisodeArgs {
    fn config(&self) -> EpisodeConfig {
        EpisodeConfig {
            scene: self.scene.clone(),
            policies: self.policy.clone(),
            n_robots: self.robots,
            time_budget: self.budget,
            collision_limit: self.collision_limit,
            seed: self.seed,
            alpha: self.alpha,
            beta: self.beta,
            jitter: self.jitter,
            idle_window: self.idle_window,
            randomize_spawn: !self.fixed_spawn,
            static_only: self.static_only,
            ..EpisodeConfig::default()
        }
    }
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    episode: EpisodeArgs,
    /// Output directory.
    #[arg(long, env = "DUALSWEEP_OUT", default_value = "dualsweep-out")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Suite file; overrides the episode flags.
    #[arg(long)]
    suite: Option<PathBuf>,
    #[command(flatten)]
    episode: EpisodeArgs,
    /// Runs per config, seeds seed..seed+runs.
    #[arg(long)]
    runs: Option<usize>,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, env = "DUALSWEEP_OUT", default_value = "dualsweep-out")]
    out: PathBuf,
}

fn parse_layout(s: &str) -> Result<Layout, String> {
    match s {
        "rect" => Ok(Layout::Rectangular),
        "l" | "lshape" => Ok(Layout::LShaped),
        "multi" => Ok(Layout::MultiRoom),
        _ => Layout::parse(s).ok_or_else(|| {
            "expected rectangular (rect), l_shaped (l) or multi_room (multi)".into()
        }),
    }
}

fn parse_pattern(s: &str) -> Result<Pattern, String> {
    Pattern::parse(s).ok_or_else(|| "expected random, clustered or linear".into())
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, value_parser = parse_layout, default_value = "rectangular")]
    layout: Layout,
    /// Clutter density in [0.10, 0.80].
    #[arg(long, default_value_t = 0.15)]
    density: f64,
    #[arg(long, value_parser = parse_pattern, default_value = "random")]
    pattern: Pattern,
    #[arg(long, default_value_t = 10)]
    n_sweep: usize,
    #[arg(long, default_value_t = 5)]
    n_grasp: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10.0)]
    width: f64,
    #[arg(long, default_value_t = 8.0)]
    height: f64,
    /// Scene file to write; defaults to <out>/<scene id>.json.
    #[arg(long)]
    file: Option<PathBuf>,
    #[arg(long, env = "DUALSWEEP_OUT", default_value = "dualsweep-out")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Trajectory log (TSV).
    #[arg(long)]
    log: PathBuf,
    /// Scene file the log was recorded in.
    #[arg(long)]
    scene: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long)]
    budget: Option<f64>,
    /// Write the report here instead of printing it.
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// report.json or bench.json files.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

fn cmd_run(a: &RunArgs) -> Result<(), CliError> {
    let cfg = a.episode.config();
    let res = dualsweep::harness::run_episode(&cfg)?;
    let doc = ReportDoc::from_episode(&cfg, &res);
    let dir = &a.out;
    write(&dir.join("report.json"), &doc.to_json())?;
    write(
        &dir.join("timing.json"),
        &TimingDoc::new(&res.report).to_json(),
    )?;
    write(&dir.join("trajectory.tsv"), &res.log.to_tsv(true))?;
    save_scene(&res.scene, dir.join("scene.json")).map_err(|e| CliError::Runtime(e.to_string()))?;
    println!("{}", doc.summary_line());
    Ok(())
}

fn cmd_bench(a: &BenchArgs) -> Result<(), CliError> {
    let suite = match &a.suite {
        Some(p) => BenchSuite::from_json(&read(p)?).map_err(|e| CliError::Config(e.to_string()))?,
        None => BenchSuite {
            schema: SUITE_SCHEMA,
            runs_per_config: 5,
            configs: vec![a.episode.config()],
        },
    };
    let runs = a.runs.unwrap_or(suite.runs_per_config);
    let out = run_benchmark(&suite.configs, runs, a.jobs)?;
    write(&a.out.join("bench.csv"), &out.to_csv())?;
    write(&a.out.join("bench.json"), &out.to_json())?;
    print!("{}", out.to_text());
    let failed: Vec<String> = out
        .episodes
        .iter()
        .filter_map(|e| {
            e.outcome
                .as_ref()
                .err()
                .map(|m| format!("{} seed {}: {m}", e.label, e.seed))
        })
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Runtime(format!(
            "{} episode(s) failed:\n  {}",
            failed.len(),
            failed.join("\n  ")
        )))
    }
}

fn cmd_gen(a: &GenArgs) -> Result<(), CliError> {
    let params = GenParams {
        layout: a.layout,
        density: a.density,
        pattern: a.pattern,
        n_sweep: a.n_sweep,
        n_grasp: a.n_grasp,
        seed: a.seed,
        width: a.width,
        height: a.height,
    };
    let scene = generate_scene(&params).map_err(|e| match e {
        ProcgenError::BadParams { .. } => CliError::Config(e.to_string()),
        _ => CliError::Runtime(e.to_string()),
    })?;
    let path = a
        .file
        .clone()
        .unwrap_or_else(|| a.out.join(format!("{}.json", scene.id)));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    save_scene(&scene, &path).map_err(|e| CliError::Runtime(e.to_string()))?;
    println!("{}", path.display());
    Ok(())
}

fn cmd_eval(a: &EvalArgs) -> Result<(), CliError> {
    let log =
        TrajectoryLog::parse_tsv(&read(&a.log)?).map_err(|e| CliError::Config(e.to_string()))?;
    let scene = load_scene(&a.scene).map_err(|e| CliError::Config(e.to_string()))?;
    let mcfg = MetricConfig {
        alpha: a.alpha,
        beta: a.beta,
        delta: a.delta,
        budget_s: a.budget,
        vacuous: VacuousMode::One,
    };
    let report = compile_report(&log, &scene, &mcfg).map_err(|e| match e {
        MetricError::BadWeights { .. } => CliError::Config(e.to_string()),
        _ => CliError::Runtime(e.to_string()),
    })?;
    let doc = ReportDoc::from_report(&scene.id, &report);
    match &a.file {
        Some(p) => write(p, &doc.to_json())?,
        None => print!("{}", doc.to_json()),
    }
    Ok(())
}

fn cmd_report(a: &ReportArgs) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for p in &a.inputs {
        let text = read(p)?;
        rows.extend(
            docs::rows_from_file(p, &text)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?,
        );
    }
    let table = dualsweep::harness::BenchOutput {
        episodes: Vec::new(),
        rows,
    };
    match a.format {
        Format::Text => print!("{}", table.to_text()),
        Format::Csv => print!("{}", table.to_csv()),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.cmd {
        Cmd::Run(a) => cmd_run(a),
        Cmd::Bench(a) => cmd_bench(a),
        Cmd::Gen(a) => cmd_gen(a),
        Cmd::Eval(a) => cmd_eval(a),
        Cmd::Report(a) => cmd_report(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
