//! `latpat`: analyze, certify, simulate and sweep lateral-inhibition
//! models on cell-contact graphs.
//!
//! ```text
//! latpat analyze  --model run.toml --generator cycle:4 --out results/
//! latpat certify  --model notch.toml
//! latpat simulate --model run.toml --graph cells.txt --mode ensemble --trials 100
//! latpat sweep    --model run.toml --generator cycle:4 --sweep model.stages[0].a=1:9:33
//! ```
//!
//! Exit codes: 0 ok, 2 config error, 3 numerical failure, 4 certification
//! failure. Errors are written to stderr as one JSON object.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use latpat::config::{GraphSource, RunConfig, SimulateMode, SweepSpec};
use latpat::graph::GraphGenerator;
use latpat::pipeline::{self, SimulationOutput, ToolInfo};
use latpat::sim::{write_snapshot_csv, write_trajectory_csv, SnapshotMeta};
use latpat::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_CERTIFICATION: u8 = 4;

#[derive(Parser)]
#[command(name = "latpat", version, about = "Lateral-inhibition pattern analysis on cell-contact graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Homogeneous instability, period-two orbit and checkerboard stability.
    Analyze(Common),
    /// Steady-state evidence, orthant sign pattern and incidence analysis.
    Certify(Common),
    /// Integrate the network from a perturbed or random initial state.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Number of ensemble trials.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Criterion values over a range of one parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// KEY=LO:HI:STEPS, e.g. `model.stages[0].a=1:9:33`.
        #[arg(long)]
        sweep: Option<SweepSpec>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML run config.
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
    /// Edge-list file; overrides the config's graph.
    #[arg(long, value_name = "FILE", conflicts_with = "generator")]
    graph: Option<PathBuf>,
    /// Generator such as `cycle:4`, `grid:2x3`, `path:5`, `complete_bipartite:2,3`.
    #[arg(long, value_name = "SPEC")]
    generator: Option<GraphGenerator>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// KEY=VAL tolerance override (repeatable), e.g. `fp_tol=1e-12`.
    #[arg(long = "tol", value_name = "KEY=VAL")]
    tol: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Perturbed,
    Random,
    Ensemble,
}

impl From<Mode> for SimulateMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Perturbed => SimulateMode::Perturbed,
            Mode::Random => SimulateMode::Random,
            Mode::Ensemble => SimulateMode::Ensemble,
        }
    }
}

/// Failure with its exit code.
struct Failure {
    exit: u8,
    code: String,
    message: String,
    pointer: Option<String>,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let exit = if e.is_validation() { EXIT_CONFIG } else { EXIT_NUMERICAL };
        let pointer = match &e {
            Error::Config { pointer, .. } => Some(pointer.clone()),
            _ => None,
        };
        Self {
            exit,
            code: e.code().into(),
            message: e.to_string(),
            pointer,
        }
    }
}

impl Failure {
    fn io(path: &Path, e: std::io::Error, exit: u8) -> Self {
        Self {
            exit,
            code: "Io".into(),
            message: format!("{}: {e}", path.display()),
            pointer: None,
        }
    }
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    tool: ToolInfo,
    exit_code: u8,
    code: &'a str,
    message: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pointer: Option<&'a str>,
}

/// Reads the config and applies command-line overrides.
fn load(common: &Common) -> Result<(RunConfig, PathBuf), Failure> {
    let text = fs::read_to_string(&common.model).map_err(|e| Failure::io(&common.model, e, EXIT_CONFIG))?;
    let mut cfg = RunConfig::from_toml_str(&text)?;
    let base = common
        .model
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    if let Some(g) = &common.generator {
        cfg.graph = Some(GraphSource::generator(g.clone()));
    }
    if let Some(f) = &common.graph {
        // relative to the working directory, like every other path flag
        cfg.graph = Some(GraphSource::file(std::path::absolute(f).map_err(|e| Failure::io(f, e, EXIT_CONFIG))?));
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    for t in &common.tol {
        cfg = cfg.with_tolerance(t)?;
    }
    Ok((cfg, base))
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, Failure> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| Failure::io(&path, e, EXIT_NUMERICAL))?;
    Ok(path)
}

fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("reports serialize");
    v.push(b'\n');
    v
}

#[derive(Serialize)]
struct SnapshotReport<'a> {
    tool: ToolInfo,
    config: &'a RunConfig,
    #[serde(flatten)]
    meta: SnapshotMeta,
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let (common, command) = match &cli.command {
        Command::Analyze(c) | Command::Certify(c) => (c, &cli.command),
        Command::Simulate { common, .. } | Command::Sweep { common, .. } => (common, &cli.command),
    };
    let (mut cfg, base) = load(common)?;
    let out = &common.out;
    fs::create_dir_all(out).map_err(|e| Failure::io(out, e, EXIT_CONFIG))?;
    match command {
        Command::Analyze(_) => {
            let report = pipeline::analyze(&cfg, Some(&base))?;
            write(out, "analysis.json", &json(&report))?;
            let summary = report.summary();
            write(out, "summary.txt", summary.as_bytes())?;
            print!("{summary}");
            Ok(0)
        }
        Command::Certify(_) => {
            let report = pipeline::certify(&cfg)?;
            let path = write(out, "certificate.json", &json(&report))?;
            println!("certified: {} ({})", report.certified, path.display());
            Ok(if report.certified { 0 } else { EXIT_CERTIFICATION })
        }
        Command::Simulate { mode, trials, .. } => {
            if let Some(m) = mode {
                cfg.simulate.mode = (*m).into();
            }
            if let Some(t) = trials {
                cfg.simulate.trials = *t;
                if mode.is_none() {
                    cfg.simulate.mode = SimulateMode::Ensemble;
                }
            }
            match pipeline::simulate(&cfg, Some(&base))? {
                SimulationOutput::Single { result, state_dim } => {
                    let mut buf = Vec::new();
                    write_trajectory_csv(&mut buf, &result, state_dim)?;
                    write(out, "trajectory.csv", &buf)?;
                    buf.clear();
                    write_snapshot_csv(&mut buf, &result.final_state, state_dim)?;
                    write(out, "snapshot.csv", &buf)?;
                    let report = SnapshotReport {
                        tool: ToolInfo::current(),
                        config: &cfg,
                        meta: SnapshotMeta::from(&result),
                    };
                    write(out, "snapshot.json", &json(&report))?;
                    println!(
                        "converged: {}, pattern: {:?}, residual {:.3e}",
                        result.converged, result.classification.pattern, result.residual
                    );
                }
                SimulationOutput::Ensemble(stats) => {
                    let report = pipeline::EnsembleReport {
                        tool: ToolInfo::current(),
                        config: cfg.clone(),
                        stats,
                    };
                    write(out, "ensemble.json", &json(&report))?;
                    let s = &report.stats;
                    println!(
                        "converged {}/{} ({:.3}); histogram {:?}",
                        s.converged, s.trials, s.converged_fraction, s.histogram
                    );
                }
            }
            Ok(0)
        }
        Command::Sweep { sweep, .. } => {
            if let Some(s) = sweep {
                cfg.sweep = Some(s.clone());
            }
            let rows = pipeline::sweep(&cfg, Some(&base))?;
            let mut buf = Vec::new();
            pipeline::write_sweep_csv(&mut buf, &rows)?;
            let path = write(out, "sweep.csv", &buf)?;
            println!("{} rows ({})", rows.len(), path.display());
            Ok(0)
        }
    }
}

/// Caps the global thread pool at `LATPAT_THREADS` when set.
fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("LATPAT_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| Failure {
        exit: EXIT_CONFIG,
        code: "Config".into(),
        message: format!("LATPAT_THREADS must be a positive integer, got `{v}`"),
        pointer: Some("LATPAT_THREADS".into()),
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure {
            exit: EXIT_NUMERICAL,
            code: "ThreadPool".into(),
            message: e.to_string(),
            pointer: None,
        })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| run(cli)) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            let report = ErrorReport {
                tool: ToolInfo::current(),
                exit_code: f.exit,
                code: &f.code,
                message: &f.message,
                pointer: f.pointer.as_deref(),
            };
            eprintln!("{}", serde_json::to_string(&report).expect("error report serializes"));
            ExitCode::from(f.exit)
        }
    }
}
