//! `tumbler` subcommands. Reports go to stdout as JSON, human summaries
//! to stderr, and file artifacts are written atomically.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use tumbler_core::exec::Execution;
use tumbler_core::geometry::Vec2;
use tumbler_core::planner::{astar_plan, bfs_plan, Plan, PlanError, PlanOptions};
use tumbler_core::reachability::{enumerate, EnumerateOptions, LocomotionMode, ReachError};
use tumbler_core::robot::{Configuration, EdgeLabel, StableState};
use tumbler_core::session::SessionOptions;
use tumbler_core::statics::{Gait, StaticsError, StaticsModel};
use tumbler_core::trace_io::{
    load_robot_config, load_scene, read_trace, render_svg, report_json, validate_trace, FormatError, LoadedScene,
    ReportDoc, RobotConfigDoc, RobotSetup, SvgOptions, TraceDoc, TraceHeader, TraceKind, REPORT_FORMAT,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_NO_PATH: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;

#[derive(Debug, Parser)]
#[command(name = "tumbler", version, about = "Simulate, plan and analyse a robot that moves by tipping over")]
pub struct Cli {
    /// Robot config (JSON); the embedded default is used when omitted.
    #[arg(long, global = true)]
    pub robot: Option<PathBuf>,
    /// Artifact path: trace for reach/plan, SVG for render, report otherwise.
    #[arg(long, short = 'o', global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Planner expansion budget (overrides the config).
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    /// Only emit artifacts.
    #[arg(long, short = 'q', global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Bfs,
    Astar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DocKind {
    Robot,
    Scene,
    Trace,
    Report,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Enumerate reachable configurations.
    Reach {
        #[arg(long, default_value = "tristate")]
        mode: LocomotionMode,
        /// Expansion budget for the closure.
        #[arg(long, default_value_t = 10_000)]
        max_flips: usize,
        /// Take start pose and arena from a scene file.
        #[arg(long)]
        scene: Option<PathBuf>,
        #[arg(long)]
        state: Option<StableState>,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        x: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        y: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        alpha_deg: f64,
    },
    /// Plan a flip sequence to a scene's target.
    Plan {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long, value_enum, default_value_t = Algo::Astar)]
        algo: Algo,
        /// Overrides the scene's mode.
        #[arg(long)]
        mode: Option<LocomotionMode>,
    },
    /// Steepest climbable and descendable slopes.
    Slope {
        /// Explicit gait cycle as comma-separated edge labels; default follows the fall line.
        #[arg(long, value_delimiter = ',')]
        edges: Option<Vec<EdgeLabel>>,
    },
    /// Monte-Carlo landing-state probabilities after a random throw.
    Landing {
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long)]
        sequential: bool,
    },
    /// Draw a trace (and optionally its scene) as SVG.
    Render {
        trace: PathBuf,
        #[arg(long)]
        scene: Option<PathBuf>,
        /// Force the centroid polyline on or off.
        #[arg(long)]
        path: Option<bool>,
        #[arg(long, default_value_t = 100.0)]
        scale: f64,
    },
    /// Run the interactive session service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long)]
        tick_ms: Option<u64>,
    },
    /// Check a file against its schema.
    Validate {
        file: PathBuf,
        #[arg(long, value_enum)]
        kind: Option<DocKind>,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    NoPath(String),
    Budget(String),
    Failure(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::NoPath(_) => EXIT_NO_PATH,
            CliError::Budget(_) => EXIT_BUDGET,
            CliError::Failure(_) => EXIT_FAILURE,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::NoPath(m) | CliError::Budget(m) | CliError::Failure(m) => m,
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::Data(e.to_string())
    }
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    quiet: bool,
}

impl Io<'_> {
    fn note(&mut self, msg: std::fmt::Arguments) {
        if !self.quiet {
            let _ = writeln!(self.err, "{msg}");
        }
    }

    fn emit(&mut self, text: &str) -> Result<(), CliError> {
        self.out.write_all(text.as_bytes()).map_err(|e| CliError::Failure(e.to_string()))
    }
}

/// Parses `args` (including the program name) and runs one subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    let quiet = cli.quiet;
    let mut io = Io { out, err, quiet };
    match execute(&cli, &mut io) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            // diagnostics survive --quiet: they are the only output on failure
            let _ = writeln!(io.err, "tumbler: {}", e.message());
            e.code()
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Writes via a sibling temp file and renames, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let fail = |e: std::io::Error| CliError::Failure(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(bytes).map_err(fail)?;
    tmp.as_file().sync_all().map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

fn robot(cli: &Cli) -> Result<RobotSetup, CliError> {
    match &cli.robot {
        None => Ok(RobotConfigDoc::default().build()?),
        Some(p) => Ok(load_robot_config(&read(p)?)?.1),
    }
}

fn scene(path: &Path) -> Result<LoadedScene, CliError> {
    load_scene(&read(path)?).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn execute(cli: &Cli, io: &mut Io) -> Result<(), CliError> {
    match &cli.cmd {
        Cmd::Reach {
            mode,
            max_flips,
            scene: scene_path,
            state,
            x,
            y,
            alpha_deg,
        } => reach(cli, io, *mode, *max_flips, scene_path.as_deref(), *state, [*x, *y, *alpha_deg]),
        Cmd::Plan { scene, algo, mode } => plan(cli, io, scene, *algo, *mode),
        Cmd::Slope { edges } => slope(cli, io, edges.clone()),
        Cmd::Landing { samples, sequential } => landing(cli, io, *samples, *sequential),
        Cmd::Render {
            trace,
            scene: scene_path,
            path,
            scale,
        } => render(cli, io, trace, scene_path.as_deref(), *path, *scale),
        Cmd::Serve { port, host, tick_ms } => serve(cli, io, host, *port, *tick_ms),
        Cmd::Validate { file, kind } => validate(cli, io, file, *kind),
    }
}

/// Writes a report to `--out` if given, stdout otherwise.
fn report<T: Serialize>(cli: &Cli, io: &mut Io, kind: &str, body: &T) -> Result<(), CliError> {
    let text = report_json(kind, body);
    match &cli.out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => io.emit(&text),
    }
}

fn reach(
    cli: &Cli,
    io: &mut Io,
    mode: LocomotionMode,
    budget: usize,
    scene_path: Option<&Path>,
    state: Option<StableState>,
    pose: [f64; 3],
) -> Result<(), CliError> {
    let setup = robot(cli)?;
    let (start, arena) = match scene_path {
        Some(p) => {
            let s = scene(p)?.scene;
            (s.start, s.arena)
        }
        None => {
            let default_state = if mode == LocomotionMode::BistateHdSd {
                StableState::Hd
            } else {
                StableState::Hu
            };
            let s = state.unwrap_or(default_state);
            (Configuration::new(Vec2::new(pose[0], pose[1]), s, pose[2].to_radians()), None)
        }
    };
    let opts = EnumerateOptions {
        mode,
        arena,
        budget,
        keys: Some(setup.keys),
    };
    let run = enumerate(&setup.geometry, &setup.table, start, &opts).map_err(|e| match e {
        ReachError::StartOutsideArena => CliError::Data(e.to_string()),
        _ => CliError::Usage(e.to_string()),
    })?;
    if let Some(p) = &cli.out {
        let doc = TraceDoc::from_steps(TraceHeader::new(TraceKind::Reach, &setup.geometry, Some(mode)), &run.trace)?;
        write_atomic(p, doc.to_ndjson().as_bytes())?;
    }
    let r = &run.report;
    io.note(format_args!(
        "{mode}: {} configurations, {} footprint positions, {}",
        r.visited,
        r.footprint_positions,
        if r.exhausted { "closure finite" } else { "budget reached, frontier open" }
    ));
    io.emit(&report_json("reach", r))
}

#[derive(Debug, Clone, Serialize)]
pub struct PoseDoc {
    pub x: f64,
    pub y: f64,
    pub alpha_deg: f64,
    pub state: StableState,
}

impl From<&Configuration> for PoseDoc {
    fn from(c: &Configuration) -> Self {
        Self {
            x: c.centroid.x,
            y: c.centroid.y,
            alpha_deg: c.alpha().to_degrees(),
            state: c.state,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StepDoc {
    pub edge: EdgeLabel,
    #[serde(flatten)]
    pub pose: PoseDoc,
}

#[derive(Debug, Clone, Serialize)]
pub struct PlanReport {
    pub status: &'static str,
    pub algo: &'static str,
    pub mode: LocomotionMode,
    pub expansions: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flips: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path_length: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<PoseDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<Vec<StepDoc>>,
}

impl PlanReport {
    fn of(algo: Algo, mode: LocomotionMode, plan: &Plan) -> Self {
        Self {
            status: "ok",
            algo: algo_name(algo),
            mode,
            expansions: plan.expansions,
            flips: Some(plan.flips),
            path_length: Some(plan.path_length),
            start: Some((&plan.start).into()),
            steps: Some(
                plan.steps
                    .iter()
                    .map(|s| StepDoc {
                        edge: s.edge,
                        pose: (&s.config).into(),
                    })
                    .collect(),
            ),
        }
    }
}

fn algo_name(a: Algo) -> &'static str {
    match a {
        Algo::Bfs => "bfs",
        Algo::Astar => "astar",
    }
}

fn plan(cli: &Cli, io: &mut Io, scene_path: &Path, algo: Algo, mode: Option<LocomotionMode>) -> Result<(), CliError> {
    let setup = robot(cli)?;
    let loaded = scene(scene_path)?;
    let mode = mode.or(loaded.mode).unwrap_or_default();
    let opts = PlanOptions {
        mode,
        budget: cli.budget.unwrap_or(setup.budget),
        keys: Some(setup.keys),
        ..Default::default()
    };
    let run = match algo {
        Algo::Bfs => bfs_plan(&setup.geometry, &setup.table, &loaded.scene, &opts),
        Algo::Astar => astar_plan(&setup.geometry, &setup.table, &loaded.scene, &opts),
    };
    let failed = |status, expansions| PlanReport {
        status,
        algo: algo_name(algo),
        mode,
        expansions,
        flips: None,
        path_length: None,
        start: None,
        steps: None,
    };
    match run {
        Ok(p) => {
            if let Some(out) = &cli.out {
                let header = TraceHeader::new(TraceKind::Plan, &setup.geometry, Some(mode));
                let doc = TraceDoc::from_steps(header, &p.trace())?;
                write_atomic(out, doc.to_ndjson().as_bytes())?;
            }
            io.note(format_args!(
                "{}: {} flips, path length {:.4}, {} expansions",
                algo_name(algo),
                p.flips,
                p.path_length,
                p.expansions
            ));
            io.emit(&report_json("plan", &PlanReport::of(algo, mode, &p)))
        }
        Err(PlanError::NoPath { expansions }) => {
            io.emit(&report_json("plan", &failed("no_path", expansions)))?;
            Err(CliError::NoPath(format!("no path after {expansions} expansions")))
        }
        Err(PlanError::BudgetExhausted { expansions }) => {
            io.emit(&report_json("plan", &failed("budget_exhausted", expansions)))?;
            Err(CliError::Budget(format!("budget exhausted after {expansions} expansions")))
        }
        Err(PlanError::InvalidScene(m)) => Err(CliError::Data(m)),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SlopeReport {
    pub gait: Gait,
    pub alpha_c_deg: f64,
    pub alpha_a_deg: f64,
    pub bracket_c_deg: f64,
    pub bracket_a_deg: f64,
    pub converged: bool,
    pub iterations: u32,
}

fn statics_error(e: StaticsError) -> CliError {
    match e {
        StaticsError::InvalidSlope(_) | StaticsError::InvalidEdge { .. } | StaticsError::DisallowedTransition { .. } => {
            CliError::Usage(e.to_string())
        }
        StaticsError::ZeroSamples => CliError::Usage(e.to_string()),
        _ => CliError::Data(e.to_string()),
    }
}

fn statics_model(setup: RobotSetup) -> StaticsModel {
    StaticsModel::new(setup.geometry, setup.masses, setup.table)
}

fn slope(cli: &Cli, io: &mut Io, edges: Option<Vec<EdgeLabel>>) -> Result<(), CliError> {
    let m = statics_model(robot(cli)?);
    let gait = edges.map_or(Gait::FallLine, Gait::Edges);
    let r = m.max_slopes(&gait).map_err(statics_error)?;
    io.note(format_args!(
        "climb {:.3} deg, descend {:.3} deg",
        r.alpha_c.to_degrees(),
        r.alpha_a.to_degrees()
    ));
    let body = SlopeReport {
        gait,
        alpha_c_deg: r.alpha_c.to_degrees(),
        alpha_a_deg: r.alpha_a.to_degrees(),
        bracket_c_deg: r.bracket_c.to_degrees(),
        bracket_a_deg: r.bracket_a.to_degrees(),
        converged: r.converged,
        iterations: r.iterations,
    };
    report(cli, io, "slope", &body)
}

fn landing(cli: &Cli, io: &mut Io, samples: u64, sequential: bool) -> Result<(), CliError> {
    let m = statics_model(robot(cli)?);
    let exec = if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let est = m.landing_probabilities(samples, cli.seed, exec).map_err(statics_error)?;
    io.note(format_args!(
        "HU {:.4}  HD {:.4}  SD {:.4}  ({} samples, seed {})",
        est.p_hu, est.p_hd, est.p_sd, est.samples, est.seed
    ));
    report(cli, io, "landing", &est)
}

fn render(
    cli: &Cli,
    io: &mut Io,
    trace_path: &Path,
    scene_path: Option<&Path>,
    path: Option<bool>,
    scale: f64,
) -> Result<(), CliError> {
    let bytes = read(trace_path)?;
    let doc = read_trace(&bytes[..]).map_err(|e| CliError::Data(format!("{}: {e}", trace_path.display())))?;
    let scene_doc = scene_path.map(scene).transpose()?.map(|s| s.doc);
    let opts = SvgOptions {
        px_per_unit: scale,
        path,
        ..Default::default()
    };
    let svg = render_svg(&doc, scene_doc.as_ref(), &opts)?;
    io.note(format_args!("{} footprints rendered", doc.records.len()));
    match &cli.out {
        Some(p) => write_atomic(p, svg.as_bytes()),
        None => io.emit(&svg),
    }
}

fn serve(cli: &Cli, io: &mut Io, host: &str, port: u16, tick_ms: Option<u64>) -> Result<(), CliError> {
    let mut session = SessionOptions::default();
    if let Some(t) = tick_ms {
        if t == 0 {
            return Err(CliError::Usage("--tick-ms must be positive".into()));
        }
        session.tick_ms = t;
    }
    if let Some(b) = cli.budget {
        session.budget = b;
    }
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::Failure(e.to_string()))?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind((host, port))
            .await
            .map_err(|e| CliError::Failure(format!("bind {host}:{port}: {e}")))?;
        let addr = listener.local_addr().map_err(|e| CliError::Failure(e.to_string()))?;
        io.note(format_args!("listening on http://{addr}"));
        tumbler_server::serve(listener, tumbler_server::ServerOptions { session })
            .await
            .map_err(|e| CliError::Failure(e.to_string()))
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub file: String,
    pub kind: &'static str,
    pub valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub records: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn sniff(path: &Path, bytes: &[u8]) -> DocKind {
    if path.extension().is_some_and(|e| e == "ndjson" || e == "jsonl") {
        return DocKind::Trace;
    }
    let first = serde_json::from_slice::<serde_json::Value>(bytes);
    match first {
        Ok(v) if v.get("format").and_then(|f| f.as_str()) == Some(REPORT_FORMAT) => DocKind::Report,
        Ok(v) if v.get("ell").is_some() => DocKind::Robot,
        Ok(v) if v.get("start").is_some() => DocKind::Scene,
        Ok(_) => DocKind::Scene,
        // several JSON values in a row: a trace
        Err(_) => DocKind::Trace,
    }
}

fn validate(cli: &Cli, io: &mut Io, file: &Path, kind: Option<DocKind>) -> Result<(), CliError> {
    let bytes = read(file)?;
    let kind = kind.unwrap_or_else(|| sniff(file, &bytes));
    let (name, result): (&'static str, Result<Option<usize>, FormatError>) = match kind {
        DocKind::Robot => ("robot", load_robot_config(&bytes).map(|_| None)),
        DocKind::Scene => ("scene", load_scene(&bytes).map(|_| None)),
        DocKind::Trace => (
            "trace",
            read_trace(&bytes[..]).and_then(|d| validate_trace(&d).map(|_| Some(d.records.len()))),
        ),
        DocKind::Report => ("report", ReportDoc::<serde_json::Value>::parse(&bytes).map(|_| None)),
    };
    let body = ValidationReport {
        file: file.display().to_string(),
        kind: name,
        valid: result.is_ok(),
        records: result.as_ref().ok().copied().flatten(),
        error: result.as_ref().err().map(|e| e.to_string()),
    };
    report(cli, io, "validate", &body)?;
    match result {
        Ok(_) => {
            io.note(format_args!("{}: valid {name}", file.display()));
            Ok(())
        }
        Err(e) => Err(CliError::Data(format!("{}: {e}", file.display()))),
    }
}
