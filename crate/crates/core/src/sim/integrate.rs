use serde::{Deserialize, Serialize};

use super::network::Network;
use crate::error::{Error, Result};
use crate::graph::RandomWalkSpectrum;
use crate::model::CellModel;
use crate::ode::{Rk4, Rkf45};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Rk4,
    Rkf45,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub method: Method,
    /// Fixed step for RK4, initial step for RKF45.
    pub step: f64,
    pub horizon: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Store every `decimation`-th accepted step.
    pub decimation: usize,
    /// `||F(X)||_∞` bound for convergence.
    pub sim_ss_tol: f64,
    /// Consecutive stored samples below `sim_ss_tol` that end the run.
    pub window: usize,
    /// Distance to a predicted state accepted as a match.
    pub class_tol: f64,
    /// Keep the decimated trajectory in the result.
    pub record: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            method: Method::Rk4,
            step: 0.01,
            horizon: 200.0,
            rtol: 1e-8,
            atol: 1e-10,
            decimation: 10,
            sim_ss_tol: 1e-8,
            window: 10,
            class_tol: 1e-4,
            record: true,
        }
    }
}

/// Predicted steady states used for classification.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Targets {
    pub homogeneous: Option<Vec<f64>>,
    /// `(on_off, off_on)` checkerboards.
    pub checkerboards: Option<(Vec<f64>, Vec<f64>)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pattern {
    Homogeneous,
    /// `S(u1)` on `set_i`.
    CheckerboardOnOff,
    /// `S(u2)` on `set_i`.
    CheckerboardOffOn,
    Other,
}

impl Pattern {
    pub fn is_checkerboard(self) -> bool {
        matches!(self, Pattern::CheckerboardOnOff | Pattern::CheckerboardOffOn)
    }
}

/// Classification of a state against the predicted steady states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub pattern: Pattern,
    /// Distance (max norm) to the nearest predicted state, if any.
    pub distance: Option<f64>,
}

pub fn classify(x: &[f64], targets: &Targets, class_tol: f64) -> Classification {
    let dist = |t: &[f64]| x.iter().zip(t).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let mut candidates = Vec::new();
    if let Some(h) = &targets.homogeneous {
        candidates.push((Pattern::Homogeneous, dist(h)));
    }
    if let Some((a, b)) = &targets.checkerboards {
        candidates.push((Pattern::CheckerboardOnOff, dist(a)));
        candidates.push((Pattern::CheckerboardOffOn, dist(b)));
    }
    let nearest = candidates.iter().copied().min_by(|a, b| a.1.total_cmp(&b.1));
    match nearest {
        Some((p, d)) if d <= class_tol => Classification {
            pattern: p,
            distance: Some(d),
        },
        Some((_, d)) => Classification {
            pattern: Pattern::Other,
            distance: Some(d),
        },
        None => Classification {
            pattern: Pattern::Other,
            distance: None,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub time: f64,
    pub state: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub trajectory: Vec<TrajectorySample>,
    pub final_state: Vec<f64>,
    pub final_time: f64,
    pub converged: bool,
    pub residual: f64,
    pub classification: Classification,
    /// Inter-cell spread of the initial state and its maximum over the run.
    pub initial_spread: f64,
    pub max_spread: f64,
}

/// Integrates the network from `x0` up to `cfg.horizon`.
///
/// Stops early once the residual stays below `sim_ss_tol` for `window`
/// consecutive stored samples.
pub fn integrate(net: &Network<'_>, x0: &[f64], cfg: &SimConfig, targets: &Targets) -> Result<SimulationResult> {
    net.check_len(x0)?;
    if !(cfg.horizon > 0.0) || !(cfg.step > 0.0) {
        return Err(Error::InvalidParameter {
            name: "horizon/step".into(),
            reason: "must be positive".into(),
        });
    }
    let mut x = x0.to_vec();
    net.guard(&mut x, 0.0)?;
    let rhs = |y: &[f64], out: &mut [f64]| net.rhs_unchecked(y, out);
    let decimation = cfg.decimation.max(1);
    let mut trajectory = Vec::new();
    let mut t = 0.0;
    let mut steps = 0usize;
    let mut calm = 0usize;
    let initial_spread = net.spread(&x);
    let mut max_spread = initial_spread;
    if cfg.record {
        trajectory.push(TrajectorySample { time: 0.0, state: x.clone() });
    }
    let mut record = |t: f64, x: &[f64], trajectory: &mut Vec<TrajectorySample>| -> bool {
        if cfg.record {
            trajectory.push(TrajectorySample { time: t, state: x.to_vec() });
        }
        if net.residual(x) <= cfg.sim_ss_tol {
            calm += 1;
        } else {
            calm = 0;
        }
        calm >= cfg.window.max(1)
    };
    match cfg.method {
        Method::Rk4 => {
            let mut rk = Rk4::new(x.len());
            let total = (cfg.horizon / cfg.step).round().max(1.0) as usize;
            while steps < total {
                rk.step(&rhs, &mut x, cfg.step);
                steps += 1;
                t = steps as f64 * cfg.step;
                net.guard(&mut x, t)?;
                max_spread = max_spread.max(net.spread(&x));
                if steps % decimation == 0 && record(t, &x, &mut trajectory) {
                    break;
                }
            }
        }
        Method::Rkf45 => {
            let mut rk = Rkf45::new(x.len(), cfg.rtol, cfg.atol);
            let mut h = cfg.step;
            while t < cfg.horizon {
                let h_try = h.min(cfg.horizon - t);
                let mut trial = x.clone();
                let s = rk.step(&rhs, &mut trial, h_try);
                if s.accepted {
                    x = trial;
                    t += s.taken;
                    steps += 1;
                    net.guard(&mut x, t)?;
                    max_spread = max_spread.max(net.spread(&x));
                    if steps % decimation == 0 && record(t, &x, &mut trajectory) {
                        break;
                    }
                } else if h_try <= rk.h_min {
                    return Err(Error::StepFailure { time: t, step: h_try });
                }
                h = s.next;
            }
        }
    }
    if cfg.record && trajectory.last().is_none_or(|s| s.time != t) {
        trajectory.push(TrajectorySample { time: t, state: x.clone() });
    }
    let residual = net.residual(&x);
    Ok(SimulationResult {
        classification: classify(&x, targets, cfg.class_tol),
        converged: residual <= cfg.sim_ss_tol,
        residual,
        final_state: x,
        final_time: t,
        trajectory,
        initial_spread,
        max_spread,
    })
}

/// Integrates the lumped single-cell system `x' = f(x, h(x))`, which is the
/// homogeneous dynamics of any network. Returns the final state.
pub fn integrate_lumped(model: &dyn CellModel, x0: &[f64], cfg: &SimConfig) -> Result<Vec<f64>> {
    let rhs = |x: &[f64], out: &mut [f64]| model.rhs(x, &model.eval_output(x), out);
    let mut x = x0.to_vec();
    let mut rk = Rk4::new(x.len());
    let total = (cfg.horizon / cfg.step).round().max(1.0) as usize;
    let mut out = vec![0.0; x.len()];
    for _ in 0..total {
        rk.step(&rhs, &mut x, cfg.step);
        rhs(&x, &mut out);
        if out.iter().all(|v| v.abs() <= cfg.sim_ss_tol) {
            break;
        }
    }
    Ok(x)
}

/// `1 ⊗ x* + δ v_N ⊗ e_1`: the homogeneous state nudged along the
/// eigenvector of the smallest eigenvalue in the first state coordinate.
pub fn perturbed_homogeneous(net: &Network<'_>, x_star: &[f64], spectrum: &RandomWalkSpectrum, delta: f64) -> Vec<f64> {
    let n = x_star.len();
    let v = spectrum.eigenvector(spectrum.eigenvalues.len() - 1);
    let mut x = net.homogeneous(x_star);
    for i in 0..net.cells() {
        x[i * n] += delta * v[i];
    }
    x
}

/// Default perturbation size for instability confirmation.
pub const PERTURBATION: f64 = 1e-4;
