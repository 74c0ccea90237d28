//! End-to-end runs driven by a [`RunConfig`]: analysis, certification,
//! simulation and parameter sweeps. Every function is deterministic for a
//! fixed config.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    build_checkerboard, checkerboard_stability_test, find_homogeneous_fixed_point, find_period_two, instability_test,
    refine_period_two, HomogeneousState, PeriodTwoOrbit, StabilityVerdict, Verdict,
};
use crate::config::{RunConfig, SimulateMode};
use crate::error::{Error, Result};
use crate::graph::{Bipartition, ContactGraph, RandomWalkSpectrum};
use crate::model::{BuiltinModel, CellModel, Characteristic};
use crate::monotone::{assumption_report, AssumptionReport};
use crate::sim::{
    ensemble_converge, integrate, perturbed_homogeneous, random_initial_state, EnsembleStats, Network, SimulationResult,
    Targets,
};

pub const TOOL_NAME: &str = "latpat";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl ToolInfo {
    pub fn current() -> Self {
        Self {
            name: TOOL_NAME.into(),
            version: TOOL_VERSION.into(),
        }
    }
}

/// Graph and model built from a config.
pub struct Setup {
    pub graph: ContactGraph,
    pub model: BuiltinModel,
}

impl Setup {
    /// Builds both; `base` resolves relative graph files.
    pub fn from_config(cfg: &RunConfig, base: Option<&Path>) -> Result<Self> {
        let graph = cfg
            .graph
            .as_ref()
            .ok_or_else(|| Error::Config {
                pointer: "graph".into(),
                message: "no graph given (use a [graph] section, --graph or --generator)".into(),
            })?
            .build(base)?;
        Ok(Self {
            graph,
            model: cfg.model.build()?,
        })
    }

    pub fn characteristic<'a>(&'a self, cfg: &RunConfig) -> Characteristic<'a> {
        Characteristic::with_config(&self.model, cfg.solver)
    }
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub nodes: usize,
    pub edges: usize,
    pub min_degree: usize,
    pub max_degree: usize,
    pub bipartite: bool,
    /// Random-walk eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    pub lambda_n: f64,
    pub spectrum_residual: f64,
}

impl GraphSummary {
    fn new(g: &ContactGraph, s: &RandomWalkSpectrum) -> Self {
        let d = g.degrees();
        Self {
            nodes: g.node_count(),
            edges: g.edge_count(),
            min_degree: d.iter().copied().min().unwrap_or(0),
            max_degree: d.iter().copied().max().unwrap_or(0),
            bipartite: g.bipartition().is_some(),
            eigenvalues: s.eigenvalues.clone(),
            lambda_n: s.lambda_min(),
            spectrum_residual: s.max_residual(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousSummary {
    pub u_star: Vec<f64>,
    pub x_star: Vec<f64>,
    /// `T'(u*)`, row-major.
    pub t_prime: Vec<Vec<f64>>,
    /// Spectral radius of `T'(u*)`.
    pub rho: f64,
    pub lambda_n_rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitSummary {
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub t_prime1: Vec<Vec<f64>>,
    pub t_prime2: Vec<Vec<f64>>,
    pub rho_product: f64,
    pub residual: f64,
}

impl From<&PeriodTwoOrbit> for OrbitSummary {
    fn from(o: &PeriodTwoOrbit) -> Self {
        Self {
            u1: o.u1.clone(),
            u2: o.u2.clone(),
            x1: o.x1.clone(),
            x2: o.x2.clone(),
            t_prime1: matrix_rows(&o.t_prime1),
            t_prime2: matrix_rows(&o.t_prime2),
            rho_product: o.rho_product,
            residual: o.residual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckerboardSummary {
    pub bipartition: Bipartition,
    pub on_off: Vec<f64>,
    pub off_on: Vec<f64>,
    pub residual_on_off: f64,
    pub residual_off_on: f64,
    pub stability: StabilityVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub tool: ToolInfo,
    pub config: RunConfig,
    pub graph: GraphSummary,
    pub homogeneous: HomogeneousSummary,
    pub instability: StabilityVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orbit: Option<OrbitSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checkerboard: Option<CheckerboardSummary>,
    pub assumptions: AssumptionReport,
    pub notes: Vec<String>,
}

/// Period-two orbit from the scan (scalar) or from the configured
/// candidate (any dimension). `Ok(None)` with a note when neither applies.
fn locate_orbit(cfg: &RunConfig, c: &Characteristic<'_>, notes: &mut Vec<String>) -> Result<Option<PeriodTwoOrbit>> {
    if let Some(cand) = &cfg.orbit {
        return refine_period_two(c, &cand.u1, &cand.u2, &cfg.tolerances).map(Some);
    }
    if c.io_dim() != 1 {
        notes.push(format!(
            "period-two search needs a scalar characteristic (m = {}); give an [orbit] candidate",
            c.io_dim()
        ));
        return Ok(None);
    }
    let orbit = find_period_two(c, &cfg.tolerances)?;
    if orbit.is_none() {
        notes.push("no period-two orbit of T: no checkerboard steady state".into());
    }
    Ok(orbit)
}

struct Core {
    spectrum: RandomWalkSpectrum,
    hs: HomogeneousState,
    instability: StabilityVerdict,
}

fn core(setup: &Setup, cfg: &RunConfig) -> Result<Core> {
    let spectrum = setup.graph.spectrum()?;
    let hs = find_homogeneous_fixed_point(&setup.characteristic(cfg), &cfg.tolerances)?;
    let instability = instability_test(&spectrum, &hs, &cfg.tolerances)?;
    Ok(Core {
        spectrum,
        hs,
        instability,
    })
}

pub fn analyze(cfg: &RunConfig, base: Option<&Path>) -> Result<AnalysisReport> {
    let setup = Setup::from_config(cfg, base)?;
    let c = setup.characteristic(cfg);
    let Core {
        spectrum,
        hs,
        instability,
    } = core(&setup, cfg)?;
    let mut notes = Vec::new();
    if instability.verdict == Verdict::CriterionNotMet {
        notes.push(format!(
            "instability criterion not met; numerical verdict from the mode table: {}",
            verdict_name(instability.numerical_verdict)
        ));
    }
    let bipartition = setup.graph.bipartition();
    let (orbit, checkerboard) = match &bipartition {
        None => {
            notes.push("graph is not bipartite: checkerboard analysis omitted".into());
            (None, None)
        }
        Some(bp) => {
            let orbit = locate_orbit(cfg, &c, &mut notes)?;
            let checkerboard = match &orbit {
                Some(o) => {
                    let cb = build_checkerboard(&setup.graph, o, &c)?;
                    let stability = checkerboard_stability_test(o, &spectrum, bp, &cfg.tolerances)?;
                    Some(CheckerboardSummary {
                        bipartition: cb.bipartition,
                        on_off: cb.on_off,
                        off_on: cb.off_on,
                        residual_on_off: cb.residual_on_off,
                        residual_off_on: cb.residual_off_on,
                        stability,
                    })
                }
                None => None,
            };
            (orbit.as_ref().map(OrbitSummary::from), checkerboard)
        }
    };
    let assumptions = assumption_report(&setup.model, cfg.model.restriction(), &cfg.certify)?;
    if !assumptions.all_satisfied() {
        notes.push("structural assumptions not all certified: see `assumptions`".into());
    }
    Ok(AnalysisReport {
        tool: ToolInfo::current(),
        config: cfg.clone(),
        graph: GraphSummary::new(&setup.graph, &spectrum),
        homogeneous: HomogeneousSummary {
            lambda_n_rho: spectrum.lambda_min() * hs.rho,
            u_star: hs.u_star.clone(),
            x_star: hs.x_star.clone(),
            t_prime: matrix_rows(&hs.t_prime),
            rho: hs.rho,
        },
        instability,
        orbit,
        checkerboard,
        assumptions,
        notes,
    })
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Stable => "stable",
        Verdict::Unstable => "unstable",
        Verdict::CriterionNotMet => "criterion not met",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn fmt_vec(v: &[f64]) -> String {
    // adding 0.0 turns -0.0 into 0.0
    let parts: Vec<String> = v.iter().map(|x| format!("{:.10}", x + 0.0)).collect();
    format!("[{}]", parts.join(", "))
}

impl AnalysisReport {
    /// Plain-text summary for humans.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let g = &self.graph;
        let _ = writeln!(s, "{} {}", self.tool.name, self.tool.version);
        let _ = writeln!(
            s,
            "graph: {} nodes, {} edges, degree {}..{}, bipartite: {}",
            g.nodes, g.edges, g.min_degree, g.max_degree, g.bipartite
        );
        let _ = writeln!(s, "spectrum of P: {}", fmt_vec(&g.eigenvalues));
        let _ = writeln!(s, "lambda_N = {:.10}", g.lambda_n);
        let h = &self.homogeneous;
        let _ = writeln!(s, "u* = {}", fmt_vec(&h.u_star));
        let _ = writeln!(s, "x* = {}", fmt_vec(&h.x_star));
        let _ = writeln!(s, "rho(T'(u*)) = {:.10}, lambda_N * rho = {:.10}", h.rho, h.lambda_n_rho);
        let i = &self.instability;
        let _ = writeln!(
            s,
            "homogeneous instability: {} (margin {:.3e}; numerical: {})",
            verdict_name(i.verdict),
            i.margin,
            verdict_name(i.numerical_verdict)
        );
        if let Some(o) = &self.orbit {
            let _ = writeln!(
                s,
                "period-two orbit: u1 = {}, u2 = {}, rho(T'(u1)T'(u2)) = {:.10}, residual {:.2e}",
                fmt_vec(&o.u1),
                fmt_vec(&o.u2),
                o.rho_product,
                o.residual
            );
        }
        if let Some(cb) = &self.checkerboard {
            let _ = writeln!(
                s,
                "checkerboard: residuals {:.2e} / {:.2e}; stability: {} (margin {:.3e}; numerical: {})",
                cb.residual_on_off,
                cb.residual_off_on,
                verdict_name(cb.stability.verdict),
                cb.stability.margin,
                verdict_name(cb.stability.numerical_verdict)
            );
            let _ = writeln!(s, "  I  = {:?}", cb.bipartition.set_i);
            let _ = writeln!(s, "  I' = {:?}", cb.bipartition.set_i_prime);
        }
        let _ = writeln!(s, "assumptions certified: {}", self.assumptions.all_satisfied());
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyReport {
    pub tool: ToolInfo,
    pub config: RunConfig,
    pub certified: bool,
    pub assumptions: AssumptionReport,
}

/// Certification does not need a graph.
pub fn certify(cfg: &RunConfig) -> Result<CertifyReport> {
    let model = cfg.model.build()?;
    let assumptions = assumption_report(&model, cfg.model.restriction(), &cfg.certify)?;
    Ok(CertifyReport {
        tool: ToolInfo::current(),
        config: cfg.clone(),
        certified: assumptions.all_satisfied(),
        assumptions,
    })
}

/// Output of a simulation run.
#[derive(Debug, Clone, PartialEq)]
pub enum SimulationOutput {
    Single {
        result: SimulationResult,
        state_dim: usize,
    },
    Ensemble(EnsembleStats),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub tool: ToolInfo,
    pub config: RunConfig,
    pub stats: EnsembleStats,
}

/// Classification targets: the homogeneous state and, on bipartite graphs
/// with a period-two orbit, both checkerboards. Failures leave a target
/// empty.
fn targets(setup: &Setup, cfg: &RunConfig, hs: Option<&HomogeneousState>) -> Targets {
    let net = Network::new(&setup.graph, &setup.model);
    let c = setup.characteristic(cfg);
    let checkerboards = setup.graph.bipartition().and_then(|_| {
        let orbit = locate_orbit(cfg, &c, &mut Vec::new()).ok()??;
        let cb = build_checkerboard(&setup.graph, &orbit, &c).ok()?;
        Some((cb.on_off, cb.off_on))
    });
    Targets {
        homogeneous: hs.map(|h| net.homogeneous(&h.x_star)),
        checkerboards,
    }
}

pub fn simulate(cfg: &RunConfig, base: Option<&Path>) -> Result<SimulationOutput> {
    let setup = Setup::from_config(cfg, base)?;
    let net = Network::new(&setup.graph, &setup.model);
    let hs = find_homogeneous_fixed_point(&setup.characteristic(cfg), &cfg.tolerances);
    let targets = targets(&setup, cfg, hs.as_ref().ok());
    let single = |x0: Vec<f64>| -> Result<SimulationOutput> {
        Ok(SimulationOutput::Single {
            result: integrate(&net, &x0, &cfg.sim, &targets)?,
            state_dim: setup.model.state_dim(),
        })
    };
    match cfg.simulate.mode {
        SimulateMode::Perturbed => {
            let hs = hs?;
            let spectrum = setup.graph.spectrum()?;
            single(perturbed_homogeneous(&net, &hs.x_star, &spectrum, cfg.simulate.perturbation))
        }
        SimulateMode::Random => single(random_initial_state(&net, cfg.seed, 0)),
        SimulateMode::Ensemble => Ok(SimulationOutput::Ensemble(ensemble_converge(
            &net,
            &cfg.sim,
            &targets,
            cfg.simulate.trials,
            cfg.seed,
        ))),
    }
}

/// One row of a sweep. Empty fields mean "not applicable" or "failed";
/// `error` then says why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub rho: Option<f64>,
    pub lambda_n_rho: Option<f64>,
    pub verdict: Option<Verdict>,
    pub orbit_exists: Option<bool>,
    pub rho_product: Option<f64>,
    pub error: Option<String>,
}

fn sweep_row(cfg: &RunConfig, key: &str, value: f64, base: Option<&Path>) -> SweepRow {
    let mut row = SweepRow {
        value,
        rho: None,
        lambda_n_rho: None,
        verdict: None,
        orbit_exists: None,
        rho_product: None,
        error: None,
    };
    let run = |row: &mut SweepRow| -> Result<()> {
        let cfg = cfg.with_value(key, value)?;
        let setup = Setup::from_config(&cfg, base)?;
        let core = core(&setup, &cfg)?;
        row.rho = Some(core.hs.rho);
        row.lambda_n_rho = Some(core.spectrum.lambda_min() * core.hs.rho);
        row.verdict = Some(core.instability.verdict);
        if setup.graph.bipartition().is_some() {
            let orbit = locate_orbit(&cfg, &setup.characteristic(&cfg), &mut Vec::new())?;
            row.orbit_exists = Some(orbit.is_some());
            row.rho_product = orbit.map(|o| o.rho_product);
        }
        Ok(())
    };
    if let Err(e) = run(&mut row) {
        row.error = Some(format!("{}: {e}", e.code()));
    }
    row
}

/// Evaluates the criteria at each sweep value. Per-value numerical
/// failures are recorded in the row; an invalid sweep key fails the run.
pub fn sweep(cfg: &RunConfig, base: Option<&Path>) -> Result<Vec<SweepRow>> {
    let spec = cfg.sweep.as_ref().ok_or_else(|| Error::Config {
        pointer: "sweep".into(),
        message: "no sweep given (use a [sweep] section or --sweep)".into(),
    })?;
    let values = spec.values();
    if let Some(&v) = values.first() {
        // surface bad keys and invalid parameter values as config errors
        cfg.with_value(&spec.key, v)?;
    }
    Ok(values.par_iter().map(|&v| sweep_row(cfg, &spec.key, v, base)).collect())
}

/// Writes sweep rows as CSV; empty cells for missing values.
pub fn write_sweep_csv<W: std::io::Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["value", "rho", "lambda_n_rho", "verdict", "orbit_exists", "rho_product", "error"])
        .map_err(err)?;
    let num = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.value.to_string(),
            num(r.rho),
            num(r.lambda_n_rho),
            r.verdict.map(|v| verdict_name(v).replace(' ', "_")).unwrap_or_default(),
            r.orbit_exists.map(|b| b.to_string()).unwrap_or_default(),
            num(r.rho_product),
            r.error.clone().unwrap_or_default(),
        ])
        .map_err(err)?;
    }
    w.flush()?;
    Ok(())
}
