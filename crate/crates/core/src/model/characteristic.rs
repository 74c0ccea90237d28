//! Input-state characteristic `S(u)` and input-output characteristic
//! `T(u) = h(S(u))` with derivative `T'(u) = -C A^{-1} B`.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::CellModel;
use crate::error::{Error, Result};
use crate::linalg;
use crate::ode::Rkf45;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// `||f(S(u), u)||_∞` bound accepted as a steady state.
    pub ss_tol: f64,
    pub newton_max_iter: usize,
    /// Relaxation hands over to Newton once `||f||_∞` drops below this.
    pub relax_tol: f64,
    pub relax_max_time: f64,
    /// Slack allowed when checking that an input lies in the input domain.
    pub input_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            ss_tol: 1e-10,
            newton_max_iter: 60,
            relax_tol: 1e-6,
            relax_max_time: 1e4,
            input_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    /// Closed form when the model has one, otherwise `Newton`.
    Auto,
    Analytic,
    /// ODE relaxation from the domain centre, then damped Newton.
    Newton,
    /// Long-horizon ODE relaxation only.
    Relaxation,
}

/// Jacobians `A = f_x`, `B = f_u`, `C = h_x` at `(S(u), u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linearization {
    pub u: Vec<f64>,
    pub x: Vec<f64>,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
}

impl Linearization {
    /// `-C A^{-1} B`, refusing nearly singular `A`.
    pub fn dc_gain(&self) -> Result<DMatrix<f64>> {
        let det = self.a.determinant();
        let hadamard: f64 = self.a.column_iter().map(|c| c.norm()).product();
        if det.abs() < 1e-12 * hadamard || det == 0.0 {
            return Err(Error::SingularA { det });
        }
        let ainv_b = linalg::solve(&self.a, &self.b).ok_or(Error::SingularA { det })?;
        Ok(-(&self.c * ainv_b))
    }
}

/// Summary of the numerical evidence for the steady-state assumption:
/// local Hurwitz-ness at sampled inputs and convergence of relaxation
/// from random initial states. Evidence, not proof.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assumption1Evidence {
    pub inputs_checked: usize,
    pub all_hurwitz: bool,
    pub max_abscissa: f64,
    pub probes: usize,
    pub converged_probes: usize,
    pub max_probe_distance: f64,
    pub holds: bool,
}

/// Steady-state characteristic of a cell model.
#[derive(Clone, Copy)]
pub struct Characteristic<'a> {
    model: &'a dyn CellModel,
    config: SolverConfig,
}

impl<'a> Characteristic<'a> {
    pub fn new(model: &'a dyn CellModel) -> Self {
        Self::with_config(model, SolverConfig::default())
    }

    pub fn with_config(model: &'a dyn CellModel, config: SolverConfig) -> Self {
        Self { model, config }
    }

    pub fn model(&self) -> &'a dyn CellModel {
        self.model
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn io_dim(&self) -> usize {
        self.model.io_dim()
    }

    pub fn solve(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.solve_with(u, SolveMethod::Auto)
    }

    pub fn solve_with(&self, u: &[f64], method: SolveMethod) -> Result<Vec<f64>> {
        let m = self.model;
        if u.len() != m.io_dim() {
            return Err(Error::DimensionMismatch(format!(
                "input of length {} for io_dim {}",
                u.len(),
                m.io_dim()
            )));
        }
        if !m.input_domain().contains(u, self.config.input_tol) {
            return Err(Error::InputOutOfDomain(u.to_vec()));
        }
        let x = match method {
            SolveMethod::Auto => match m.steady_state(u) {
                Some(x) => self.polish_if_needed(x, u)?,
                None => self.newton_from_relaxation(u)?,
            },
            SolveMethod::Analytic => {
                let x = m.steady_state(u).ok_or_else(|| Error::InvalidParameter {
                    name: "method".into(),
                    reason: format!("model `{}` has no closed-form steady state", m.name()),
                })?;
                self.polish_if_needed(x, u)?
            }
            SolveMethod::Newton => self.newton_from_relaxation(u)?,
            SolveMethod::Relaxation => {
                let x0 = m.state_domain().center();
                self.relax(x0, u, self.config.ss_tol)?
            }
        };
        let max_real = linalg::spectral_abscissa(&m.jac_x(&x, u))?;
        if max_real >= 0.0 {
            return Err(Error::NotHurwitz { max_real });
        }
        Ok(x)
    }

    fn polish_if_needed(&self, x: Vec<f64>, u: &[f64]) -> Result<Vec<f64>> {
        if residual(self.model, &x, u) <= self.config.ss_tol {
            Ok(x)
        } else {
            self.newton(x, u)
        }
    }

    fn newton_from_relaxation(&self, u: &[f64]) -> Result<Vec<f64>> {
        let x0 = self.model.state_domain().center();
        let seed = self.relax(x0, u, self.config.relax_tol)?;
        self.newton(seed, u)
    }

    /// Integrates `x' = f(x, u)` until `||f||_∞ <= tol`.
    pub fn relax(&self, mut x: Vec<f64>, u: &[f64], tol: f64) -> Result<Vec<f64>> {
        let m = self.model;
        let rhs = |y: &[f64], out: &mut [f64]| m.rhs(y, u, out);
        let mut stepper = Rkf45::new(x.len(), 1e-10, 1e-12);
        let (mut t, mut h) = (0.0, 1e-2);
        loop {
            let r = residual(m, &x, u);
            if r <= tol {
                return Ok(x);
            }
            if t >= self.config.relax_max_time || !r.is_finite() {
                return Err(Error::NoConvergence {
                    what: "steady-state relaxation".into(),
                    residual: r,
                });
            }
            let step = stepper.step(&rhs, &mut x, h);
            if !step.accepted && h <= stepper.h_min {
                return Err(Error::NoConvergence {
                    what: "steady-state relaxation (step underflow)".into(),
                    residual: r,
                });
            }
            t += step.taken;
            h = step.next;
        }
    }

    /// Damped Newton on `f(·, u) = 0` with backtracking halving.
    pub fn newton(&self, mut x: Vec<f64>, u: &[f64]) -> Result<Vec<f64>> {
        let m = self.model;
        let mut r = residual(m, &x, u);
        for _ in 0..self.config.newton_max_iter {
            if r <= self.config.ss_tol {
                return Ok(x);
            }
            let f = DMatrix::from_column_slice(x.len(), 1, &m.eval_rhs(&x, u));
            let step = linalg::solve(&m.jac_x(&x, u), &f).ok_or_else(|| Error::SingularA {
                det: m.jac_x(&x, u).determinant(),
            })?;
            let mut alpha = 1.0;
            let mut improved = false;
            for _ in 0..40 {
                let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(xi, si)| xi - alpha * si).collect();
                let rt = residual(m, &trial, u);
                if rt < r {
                    x = trial;
                    r = rt;
                    improved = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !improved {
                break;
            }
        }
        if r <= self.config.ss_tol {
            Ok(x)
        } else {
            Err(Error::NoConvergence {
                what: "Newton steady-state solve".into(),
                residual: r,
            })
        }
    }

    /// `T(u) = h(S(u))`.
    pub fn t(&self, u: &[f64]) -> Result<Vec<f64>> {
        Ok(self.model.eval_output(&self.solve(u)?))
    }

    pub fn linearize(&self, u: &[f64]) -> Result<Linearization> {
        let x = self.solve(u)?;
        Ok(Linearization {
            a: self.model.jac_x(&x, u),
            b: self.model.jac_u(&x, u),
            c: self.model.jac_h(&x),
            u: u.to_vec(),
            x,
        })
    }

    /// `T'(u) = -C A^{-1} B`.
    pub fn t_prime(&self, u: &[f64]) -> Result<DMatrix<f64>> {
        self.linearize(u)?.dc_gain()
    }

    /// Checks Hurwitz-ness of `A` at `inputs` sampled inputs and relaxes
    /// from `probes` random states per input, requiring convergence to
    /// `S(u)` within `1e-6`.
    pub fn assumption1_evidence(&self, inputs: usize, probes: usize, seed: u64) -> Result<Assumption1Evidence> {
        let m = self.model;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut max_abscissa = f64::NEG_INFINITY;
        let mut converged = 0;
        let mut max_distance = 0.0f64;
        let samples = m.input_domain().sample(inputs, seed as u32);
        for u in &samples {
            let x = self.solve_with(u, SolveMethod::Auto).or_else(|e| match e {
                Error::NotHurwitz { .. } => Err(e),
                _ => self.solve_with(u, SolveMethod::Newton),
            });
            let x = match x {
                Ok(x) => x,
                Err(Error::NotHurwitz { max_real }) => {
                    max_abscissa = max_abscissa.max(max_real);
                    continue;
                }
                Err(e) => return Err(e),
            };
            max_abscissa = max_abscissa.max(linalg::spectral_abscissa(&m.jac_x(&x, u))?);
            for _ in 0..probes {
                let x0 = m.state_domain().sample_central(&mut rng, 1.0);
                if let Ok(xr) = self.relax(x0, u, 1e-10) {
                    let d = xr.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    max_distance = max_distance.max(d);
                    if d <= 1e-6 {
                        converged += 1;
                    }
                }
            }
        }
        let total = samples.len() * probes;
        let all_hurwitz = max_abscissa < 0.0;
        Ok(Assumption1Evidence {
            inputs_checked: samples.len(),
            all_hurwitz,
            max_abscissa,
            probes: total,
            converged_probes: converged,
            max_probe_distance: max_distance,
            holds: all_hurwitz && converged == total,
        })
    }
}

/// `||f(x, u)||_∞`.
pub fn residual(model: &dyn CellModel, x: &[f64], u: &[f64]) -> f64 {
    model.eval_rhs(x, u).iter().fold(0.0, |acc, v| acc.max(v.abs()))
}
