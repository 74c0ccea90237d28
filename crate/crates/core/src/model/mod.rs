//! Per-cell input-output systems `x' = f(x, u)`, `y = h(x)` and their
//! steady-state characteristics.

mod cascade;
mod characteristic;
mod domain;
mod hill;
mod notch;

pub use cascade::Cascade;
pub use characteristic::{
    Assumption1Evidence, Characteristic, Linearization, SolveMethod, SolverConfig,
};
pub use domain::{CoordBound, CoordPin, Domain, Interval, LinearConstraint, Restriction};
pub use hill::{Direction, HillParams, Stage};
pub use notch::NotchMimo;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Closed-form sign of a partial derivative over the whole domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Zero,
    NonNeg,
    NonPos,
}

/// Closed-form sign pattern of `f_x` (n×n), `f_u` (n×m) and `h_x` (m×n).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignStructure {
    pub f_x: Vec<Vec<Sign>>,
    pub f_u: Vec<Vec<Sign>>,
    pub h_x: Vec<Vec<Sign>>,
}

/// A cell's dynamics. Input and output spaces have the same dimension.
///
/// Jacobians default to central finite differences with step
/// `1e-6 * max(1, |x_k|)`; built-in models override them analytically.
pub trait CellModel: Send + Sync {
    fn name(&self) -> &str;
    fn state_dim(&self) -> usize;
    fn io_dim(&self) -> usize;
    fn rhs(&self, x: &[f64], u: &[f64], out: &mut [f64]);
    fn output(&self, x: &[f64], out: &mut [f64]);
    fn state_domain(&self) -> &Domain;
    fn input_domain(&self) -> &Domain;

    fn jac_x(&self, x: &[f64], u: &[f64]) -> DMatrix<f64> {
        fd_jacobian(x, self.state_dim(), |xx, out| self.rhs(xx, u, out))
    }

    fn jac_u(&self, x: &[f64], u: &[f64]) -> DMatrix<f64> {
        fd_jacobian(u, self.state_dim(), |uu, out| self.rhs(x, uu, out))
    }

    fn jac_h(&self, x: &[f64]) -> DMatrix<f64> {
        fd_jacobian(x, self.io_dim(), |xx, out| self.output(xx, out))
    }

    /// Closed-form `S(u)` when available.
    fn steady_state(&self, _u: &[f64]) -> Option<Vec<f64>> {
        None
    }

    /// Closed-form sign structure when available.
    fn sign_structure(&self) -> Option<SignStructure> {
        None
    }

    fn eval_rhs(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.state_dim()];
        self.rhs(x, u, &mut out);
        out
    }

    fn eval_output(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.io_dim()];
        self.output(x, &mut out);
        out
    }
}

/// Central-difference Jacobian of `g: R^k -> R^rows` at `at`.
pub fn fd_jacobian<G>(at: &[f64], rows: usize, g: G) -> DMatrix<f64>
where
    G: Fn(&[f64], &mut [f64]),
{
    let mut jac = DMatrix::zeros(rows, at.len());
    let mut probe = at.to_vec();
    let mut plus = vec![0.0; rows];
    let mut minus = vec![0.0; rows];
    for k in 0..at.len() {
        let h = 1e-6 * at[k].abs().max(1.0);
        probe[k] = at[k] + h;
        g(&probe, &mut plus);
        probe[k] = at[k] - h;
        g(&probe, &mut minus);
        probe[k] = at[k];
        for r in 0..rows {
            jac[(r, k)] = (plus[r] - minus[r]) / (2.0 * h);
        }
    }
    jac
}

/// A model defined only by `f` and `h`, using finite-difference Jacobians.
/// Wraps a built-in model in tests to exercise the generic solver paths.
pub struct FiniteDifferenceModel<M: CellModel> {
    pub inner: M,
}

impl<M: CellModel> CellModel for FiniteDifferenceModel<M> {
    fn name(&self) -> &str {
        self.inner.name()
    }
    fn state_dim(&self) -> usize {
        self.inner.state_dim()
    }
    fn io_dim(&self) -> usize {
        self.inner.io_dim()
    }
    fn rhs(&self, x: &[f64], u: &[f64], out: &mut [f64]) {
        self.inner.rhs(x, u, out)
    }
    fn output(&self, x: &[f64], out: &mut [f64]) {
        self.inner.output(x, out)
    }
    fn state_domain(&self) -> &Domain {
        self.inner.state_domain()
    }
    fn input_domain(&self) -> &Domain {
        self.inner.input_domain()
    }
}

/// Either built-in model, selected at run time from a config.
#[derive(Debug, Clone)]
pub enum BuiltinModel {
    Cascade(Cascade),
    NotchMimo(NotchMimo),
}

impl BuiltinModel {
    fn inner(&self) -> &dyn CellModel {
        match self {
            BuiltinModel::Cascade(c) => c,
            BuiltinModel::NotchMimo(n) => n,
        }
    }
}

impl CellModel for BuiltinModel {
    fn name(&self) -> &str {
        self.inner().name()
    }
    fn state_dim(&self) -> usize {
        self.inner().state_dim()
    }
    fn io_dim(&self) -> usize {
        self.inner().io_dim()
    }
    fn rhs(&self, x: &[f64], u: &[f64], out: &mut [f64]) {
        self.inner().rhs(x, u, out)
    }
    fn output(&self, x: &[f64], out: &mut [f64]) {
        self.inner().output(x, out)
    }
    fn state_domain(&self) -> &Domain {
        self.inner().state_domain()
    }
    fn input_domain(&self) -> &Domain {
        self.inner().input_domain()
    }
    fn jac_x(&self, x: &[f64], u: &[f64]) -> DMatrix<f64> {
        self.inner().jac_x(x, u)
    }
    fn jac_u(&self, x: &[f64], u: &[f64]) -> DMatrix<f64> {
        self.inner().jac_u(x, u)
    }
    fn jac_h(&self, x: &[f64]) -> DMatrix<f64> {
        self.inner().jac_h(x)
    }
    fn steady_state(&self, u: &[f64]) -> Option<Vec<f64>> {
        self.inner().steady_state(u)
    }
    fn sign_structure(&self) -> Option<SignStructure> {
        self.inner().sign_structure()
    }
}

impl From<Cascade> for BuiltinModel {
    fn from(c: Cascade) -> Self {
        BuiltinModel::Cascade(c)
    }
}

impl From<NotchMimo> for BuiltinModel {
    fn from(n: NotchMimo) -> Self {
        BuiltinModel::NotchMimo(n)
    }
}
