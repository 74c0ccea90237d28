use nalgebra::DMatrix;

use super::{CellModel, Domain, HillParams, Interval, Sign, SignStructure};
use crate::error::{Error, Result};

/// Two-input two-output Notch/Delta model in transformed coordinates
/// `x = (N, D, N + S)`:
///
/// ```text
/// x1' = β - γ x1 - k x1 u1
/// x2' = g(x3 - x1) - γ x2 - k x2 u2
/// x3' = β - γ x3
/// y   = (x2, x1)
/// ```
///
/// with `u1` the neighbour-averaged Delta and `u2` the neighbour-averaged
/// Notch. The domain is `x1, x2 >= 0`, `x3 >= x1`, boxed by the forward
/// invariant bounds `x1, x3 <= β/γ`, `x2 <= sup g / γ`.
#[derive(Debug, Clone)]
pub struct NotchMimo {
    beta: f64,
    gamma: f64,
    k: f64,
    g: HillParams,
    state_domain: Domain,
    input_domain: Domain,
}

impl NotchMimo {
    pub fn new(beta: f64, gamma: f64, k: f64, g: HillParams) -> Result<Self> {
        for (name, v) in [("beta", beta), ("gamma", gamma), ("k", k)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: name.into(),
                    reason: "must be positive".into(),
                });
            }
        }
        let g = HillParams::new(g.amplitude, g.threshold, g.exponent, g.direction)?;
        let x1_max = beta / gamma;
        let x2_max = g.sup() / gamma;
        let state_domain = Domain::from_box(vec![
            Interval::closed(0.0, x1_max),
            Interval::closed(0.0, x2_max),
            Interval::closed(0.0, x1_max),
        ])
        .with_constraint(vec![-1.0, 0.0, 1.0]);
        let input_domain = Domain::from_box(vec![Interval::closed(0.0, x2_max), Interval::closed(0.0, x1_max)]);
        Ok(Self {
            beta,
            gamma,
            k,
            g,
            state_domain,
            input_domain,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn production(&self) -> &HillParams {
        &self.g
    }

    /// `β/γ`, the steady value of `x3` for every input.
    pub fn x3_star(&self) -> f64 {
        self.beta / self.gamma
    }
}

impl CellModel for NotchMimo {
    fn name(&self) -> &str {
        "notch_mimo"
    }

    fn state_dim(&self) -> usize {
        3
    }

    fn io_dim(&self) -> usize {
        2
    }

    fn rhs(&self, x: &[f64], u: &[f64], out: &mut [f64]) {
        let (b, g, k) = (self.beta, self.gamma, self.k);
        out[0] = b - g * x[0] - k * x[0] * u[0];
        out[1] = self.g.value(x[2] - x[0]) - g * x[1] - k * x[1] * u[1];
        out[2] = -g * x[2] + b;
    }

    fn output(&self, x: &[f64], out: &mut [f64]) {
        out[0] = x[1];
        out[1] = x[0];
    }

    fn state_domain(&self) -> &Domain {
        &self.state_domain
    }

    fn input_domain(&self) -> &Domain {
        &self.input_domain
    }

    fn jac_x(&self, x: &[f64], u: &[f64]) -> DMatrix<f64> {
        let dg = self.g.derivative(x[2] - x[0]);
        let (g, k) = (self.gamma, self.k);
        DMatrix::from_row_slice(
            3,
            3,
            &[-g - k * u[0], 0.0, 0.0, -dg, -g - k * u[1], dg, 0.0, 0.0, -g],
        )
    }

    fn jac_u(&self, x: &[f64], _u: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(3, 2, &[-self.k * x[0], 0.0, 0.0, -self.k * x[1], 0.0, 0.0])
    }

    fn jac_h(&self, _x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0])
    }

    fn steady_state(&self, u: &[f64]) -> Option<Vec<f64>> {
        let (b, g, k) = (self.beta, self.gamma, self.k);
        let x1 = b / (g + k * u[0]);
        let x3 = b / g;
        let x2 = self.g.value(x3 - x1) / (g + k * u[1]);
        Some(vec![x1, x2, x3])
    }

    fn sign_structure(&self) -> Option<SignStructure> {
        use Sign::*;
        // g' has the sign of the production direction
        let (dg, neg_dg) = match self.g.direction {
            super::Direction::Inhibiting => (NonPos, NonNeg),
            super::Direction::Activating => (NonNeg, NonPos),
        };
        Some(SignStructure {
            f_x: vec![vec![Zero, Zero, Zero], vec![neg_dg, Zero, dg], vec![Zero, Zero, Zero]],
            f_u: vec![vec![NonPos, Zero], vec![Zero, NonPos], vec![Zero, Zero]],
            h_x: vec![vec![Zero, NonNeg, Zero], vec![NonNeg, Zero, Zero]],
        })
    }
}
