use nalgebra::DMatrix;

use super::{CellModel, Domain, Interval, Sign, SignStructure, Stage};
use crate::error::{Error, Result};

/// Single-input single-output cascade
///
/// ```text
/// x_j' = -γ_j x_j + g_j(x_{j+1}),  j < n
/// x_n' = -γ_n x_n + g_n(u)
/// y    = x_1
/// ```
///
/// The state box is `[0, sup g_j / γ_j]` per coordinate, propagated from
/// the input box, which makes it forward invariant.
#[derive(Debug, Clone)]
pub struct Cascade {
    gammas: Vec<f64>,
    stages: Vec<Stage>,
    state_domain: Domain,
    input_domain: Domain,
}

/// Used when every stage is unbounded (pure linear cascade).
const UNBOUNDED_FALLBACK: f64 = 10.0;

impl Cascade {
    pub fn new(gammas: Vec<f64>, stages: Vec<Stage>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::EmptyStages);
        }
        if gammas.len() != stages.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} degradation rates for {} stages",
                gammas.len(),
                stages.len()
            )));
        }
        for (j, &g) in gammas.iter().enumerate() {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: format!("gammas[{j}]"),
                    reason: "degradation rate must be positive".into(),
                });
            }
        }
        for s in &stages {
            s.validate()?;
        }
        let out_sup = Self::propagate(&gammas, &stages, f64::INFINITY)[0];
        let u_max = if out_sup.is_finite() && out_sup > 0.0 {
            out_sup
        } else {
            UNBOUNDED_FALLBACK
        };
        let uppers = Self::propagate(&gammas, &stages, u_max);
        let state_domain = Domain::from_box(uppers.iter().map(|&hi| Interval::closed(0.0, hi)).collect());
        let input_domain = Domain::from_box(vec![Interval::closed(0.0, u_max)]);
        Ok(Self {
            gammas,
            stages,
            state_domain,
            input_domain,
        })
    }

    /// Upper bounds of each coordinate's steady range for inputs in `[0, u_max]`.
    fn propagate(gammas: &[f64], stages: &[Stage], u_max: f64) -> Vec<f64> {
        let n = stages.len();
        let mut hi = vec![0.0; n];
        let mut arg = u_max;
        for j in (0..n).rev() {
            let (_, top) = stages[j].range(0.0, arg);
            hi[j] = top / gammas[j];
            arg = hi[j];
        }
        hi
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    fn arg(&self, j: usize, x: &[f64], u: &[f64]) -> f64 {
        if j + 1 < self.stages.len() {
            x[j + 1]
        } else {
            u[0]
        }
    }
}

impl CellModel for Cascade {
    fn name(&self) -> &str {
        "cascade"
    }

    fn state_dim(&self) -> usize {
        self.stages.len()
    }

    fn io_dim(&self) -> usize {
        1
    }

    fn rhs(&self, x: &[f64], u: &[f64], out: &mut [f64]) {
        for j in 0..self.stages.len() {
            out[j] = -self.gammas[j] * x[j] + self.stages[j].value(self.arg(j, x, u));
        }
    }

    fn output(&self, x: &[f64], out: &mut [f64]) {
        out[0] = x[0];
    }

    fn state_domain(&self) -> &Domain {
        &self.state_domain
    }

    fn input_domain(&self) -> &Domain {
        &self.input_domain
    }

    fn jac_x(&self, x: &[f64], u: &[f64]) -> DMatrix<f64> {
        let n = self.stages.len();
        let mut a = DMatrix::zeros(n, n);
        for j in 0..n {
            a[(j, j)] = -self.gammas[j];
            if j + 1 < n {
                a[(j, j + 1)] = self.stages[j].derivative(self.arg(j, x, u));
            }
        }
        a
    }

    fn jac_u(&self, x: &[f64], u: &[f64]) -> DMatrix<f64> {
        let n = self.stages.len();
        let mut b = DMatrix::zeros(n, 1);
        b[(n - 1, 0)] = self.stages[n - 1].derivative(self.arg(n - 1, x, u));
        b
    }

    fn jac_h(&self, _x: &[f64]) -> DMatrix<f64> {
        let mut c = DMatrix::zeros(1, self.stages.len());
        c[(0, 0)] = 1.0;
        c
    }

    fn steady_state(&self, u: &[f64]) -> Option<Vec<f64>> {
        let n = self.stages.len();
        let mut x = vec![0.0; n];
        let mut arg = u[0];
        for j in (0..n).rev() {
            x[j] = self.stages[j].value(arg) / self.gammas[j];
            arg = x[j];
        }
        Some(x)
    }

    fn sign_structure(&self) -> Option<SignStructure> {
        let n = self.stages.len();
        let sign = |s: &Stage| match s.monotonicity() {
            1 => Sign::NonNeg,
            -1 => Sign::NonPos,
            _ => Sign::Zero,
        };
        let mut f_x = vec![vec![Sign::Zero; n]; n];
        for j in 0..n.saturating_sub(1) {
            f_x[j][j + 1] = sign(&self.stages[j]);
        }
        let mut f_u = vec![vec![Sign::Zero; 1]; n];
        f_u[n - 1][0] = sign(&self.stages[n - 1]);
        let mut h_x = vec![vec![Sign::Zero; n]; 1];
        h_x[0][0] = Sign::NonNeg;
        Some(SignStructure { f_x, f_u, h_x })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::HillParams;

    #[test]
    fn constant_stage_characteristic() {
        let c = Cascade::new(vec![2.0], vec![Stage::Constant { value: 3.0 }]).unwrap();
        for u in [0.0, 0.5, 1.0] {
            assert_eq!(c.steady_state(&[u]).unwrap(), vec![1.5]);
            assert_eq!(c.eval_rhs(&[0.0], &[u]), vec![3.0]);
        }
    }

    #[test]
    fn two_stage_steady_state_closed_form() {
        let g1 = HillParams::inhibiting(9.0, 1.0, 2.0).unwrap();
        let g2 = HillParams::activating(2.0, 0.5, 2.0).unwrap();
        let c = Cascade::new(vec![1.5, 0.5], vec![Stage::Hill(g1), Stage::Hill(g2)]).unwrap();
        let u = 0.8;
        let x2 = g2.value(u) / 0.5;
        let x1 = g1.value(x2) / 1.5;
        let s = c.steady_state(&[u]).unwrap();
        assert!((s[0] - x1).abs() < 1e-15 && (s[1] - x2).abs() < 1e-15);
        assert!(c.eval_rhs(&s, &[u]).iter().all(|r| r.abs() < 1e-14));
    }

    #[test]
    fn construction_errors() {
        assert_eq!(Cascade::new(vec![], vec![]).unwrap_err(), Error::EmptyStages);
        assert!(Cascade::new(vec![0.0], vec![Stage::Constant { value: 1.0 }]).is_err());
        assert!(Cascade::new(vec![1.0, 1.0], vec![Stage::Constant { value: 1.0 }]).is_err());
    }

    #[test]
    fn domain_bounds_propagate_from_first_stage() {
        let c = Cascade::new(
            vec![1.0, 1.0],
            vec![
                Stage::Hill(HillParams::inhibiting(9.0, 1.0, 2.0).unwrap()),
                Stage::Linear { slope: 1.0 },
            ],
        )
        .unwrap();
        assert_eq!(c.input_domain().upper(), vec![9.0]);
        assert_eq!(c.state_domain().upper(), vec![9.0, 9.0]);
    }
}
