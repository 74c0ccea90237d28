use crate::error::{Error, Result};
use crate::graph::ContactGraph;
use crate::model::CellModel;

/// Boundary violations up to this size are projected back into the domain.
pub const PROJ_TOL: f64 = 1e-12;

/// The interconnected system: every cell runs `model`, and cell `i`
/// receives `u^i = (1/d_i) sum_{j ~ i} h(x^j)`.
///
/// Network states are flat `N * n` vectors, cell-major.
#[derive(Clone, Copy)]
pub struct Network<'a> {
    graph: &'a ContactGraph,
    model: &'a dyn CellModel,
}

impl<'a> Network<'a> {
    pub fn new(graph: &'a ContactGraph, model: &'a dyn CellModel) -> Self {
        Self { graph, model }
    }

    pub fn graph(&self) -> &'a ContactGraph {
        self.graph
    }

    pub fn model(&self) -> &'a dyn CellModel {
        self.model
    }

    pub fn cells(&self) -> usize {
        self.graph.node_count()
    }

    pub fn dim(&self) -> usize {
        self.graph.node_count() * self.model.state_dim()
    }

    pub fn cell<'x>(&self, x: &'x [f64], i: usize) -> &'x [f64] {
        let n = self.model.state_dim();
        &x[i * n..(i + 1) * n]
    }

    /// Stacks one cell state `N` times.
    pub fn homogeneous(&self, cell: &[f64]) -> Vec<f64> {
        cell.repeat(self.cells())
    }

    /// Neighbour-averaged inputs, `N * m`, cell-major.
    pub fn inputs(&self, x: &[f64]) -> Vec<f64> {
        let (n, m) = (self.model.state_dim(), self.model.io_dim());
        let big_n = self.cells();
        let mut y = vec![0.0; big_n * m];
        for i in 0..big_n {
            self.model.output(&x[i * n..(i + 1) * n], &mut y[i * m..(i + 1) * m]);
        }
        let mut u = vec![0.0; big_n * m];
        for i in 0..big_n {
            let nbrs = self.graph.neighbors(i);
            let w = 1.0 / nbrs.len() as f64;
            let ui = &mut u[i * m..(i + 1) * m];
            for &j in nbrs {
                for k in 0..m {
                    ui[k] += y[j * m + k];
                }
            }
            for v in ui.iter_mut() {
                *v *= w;
            }
        }
        u
    }

    /// `X' = F(X)` without domain checks; used inside integrator stages.
    pub fn rhs_unchecked(&self, x: &[f64], out: &mut [f64]) {
        let (n, m) = (self.model.state_dim(), self.model.io_dim());
        let u = self.inputs(x);
        for i in 0..self.cells() {
            self.model
                .rhs(&x[i * n..(i + 1) * n], &u[i * m..(i + 1) * m], &mut out[i * n..(i + 1) * n]);
        }
    }

    /// `X' = F(X)`, refusing states outside the domain by more than
    /// [`PROJ_TOL`].
    pub fn rhs(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_len(x)?;
        self.check_domain(x, f64::NAN)?;
        self.rhs_unchecked(x, out);
        Ok(())
    }

    /// `||F(X)||_∞`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        let mut out = vec![0.0; x.len()];
        self.rhs_unchecked(x, &mut out);
        out.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Largest distance between any two cells, coordinatewise.
    pub fn spread(&self, x: &[f64]) -> f64 {
        let n = self.model.state_dim();
        (0..n)
            .map(|k| {
                let vals = (0..self.cells()).map(|i| x[i * n + k]);
                let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
                hi - lo
            })
            .fold(0.0, f64::max)
    }

    pub fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "network state has length {}, expected {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// Errors if any cell leaves its state domain by more than `PROJ_TOL`.
    pub fn check_domain(&self, x: &[f64], time: f64) -> Result<()> {
        let n = self.model.state_dim();
        let dom = self.model.state_domain();
        for i in 0..self.cells() {
            let xi = &x[i * n..(i + 1) * n];
            if let Some(k) = xi.iter().position(|v| !v.is_finite()) {
                return Err(Error::DomainViolation {
                    cell: i,
                    coord: k,
                    value: xi[k],
                    time,
                });
            }
            let (coord, amount) = dom.violation(xi);
            if amount > PROJ_TOL {
                return Err(Error::DomainViolation {
                    cell: i,
                    coord,
                    value: xi[coord],
                    time,
                });
            }
        }
        Ok(())
    }

    /// Projects marginal violations back into the box; larger ones abort.
    pub fn guard(&self, x: &mut [f64], time: f64) -> Result<()> {
        self.check_domain(x, time)?;
        let n = self.model.state_dim();
        let dom = self.model.state_domain();
        for xi in x.chunks_mut(n) {
            dom.clamp(xi);
        }
        Ok(())
    }
}

/// `X' = F(X)` for the network of `model` cells on `graph`.
pub fn network_rhs(graph: &ContactGraph, model: &dyn CellModel, x: &[f64]) -> Result<Vec<f64>> {
    let net = Network::new(graph, model);
    let mut out = vec![0.0; x.len()];
    net.rhs(x, &mut out)?;
    Ok(out)
}
