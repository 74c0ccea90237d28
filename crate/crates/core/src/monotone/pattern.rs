use std::collections::VecDeque;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::CertifyConfig;
use crate::error::{Error, Result};
use crate::model::{CellModel, Domain, Sign, SignStructure};

/// Jacobians sampled at one joint point `(x, u)`.
pub(super) struct JacobianSample {
    pub point: Vec<f64>,
    pub f_x: DMatrix<f64>,
    pub f_u: DMatrix<f64>,
    pub h_x: DMatrix<f64>,
}

/// Samples `(x, u)` from `state × input` and evaluates all three Jacobians.
pub(super) fn sample_jacobians(
    model: &dyn CellModel,
    state: &Domain,
    input: &Domain,
    count: usize,
    seed: u32,
) -> Vec<JacobianSample> {
    let n = model.state_dim();
    state
        .product(input)
        .sample(count, seed)
        .into_par_iter()
        .map(|p| {
            let (x, u) = p.split_at(n);
            JacobianSample {
                f_x: model.jac_x(x, u),
                f_u: model.jac_u(x, u),
                h_x: model.jac_h(x),
                point: p.clone(),
            }
        })
        .collect()
}

/// How a certificate was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    /// Sign conditions hold at every sample and in closed form.
    Exact,
    /// Sign conditions hold at every sample.
    Sampled,
}

/// Orthant signs: the state cone is `{x : (-1)^{ε_j} x_j >= 0}`, the input
/// cone uses `δ`, the output cone uses `μ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignPattern {
    pub epsilon: Vec<u8>,
    pub delta: Vec<u8>,
    pub mu: Vec<u8>,
    pub sample_count: usize,
    pub witness_box: Domain,
    pub kind: CertificateKind,
}

impl SignPattern {
    /// `(-1)^{ε_j}` per state coordinate.
    pub fn state_signs(&self) -> Vec<f64> {
        self.epsilon.iter().map(|&e| if e == 0 { 1.0 } else { -1.0 }).collect()
    }

    /// Smallest signed partial `(-1)^{a+b} ∂` over all three inequalities
    /// at `samples` fresh points (off-diagonal `f_x` entries only).
    pub fn min_signed_partial(&self, model: &dyn CellModel, samples: usize, seed: u32) -> f64 {
        let pts = sample_jacobians(model, &self.witness_box, model.input_domain(), samples, seed);
        let sgn = |a: u8, b: u8| if (a + b) % 2 == 0 { 1.0 } else { -1.0 };
        let mut worst = f64::INFINITY;
        for s in &pts {
            for j in 0..self.epsilon.len() {
                for k in 0..self.epsilon.len() {
                    if j != k {
                        worst = worst.min(sgn(self.epsilon[j], self.epsilon[k]) * s.f_x[(j, k)]);
                    }
                }
                for k in 0..self.delta.len() {
                    worst = worst.min(sgn(self.epsilon[j], self.delta[k]) * s.f_u[(j, k)]);
                    worst = worst.min(sgn(self.epsilon[j], self.mu[k]) * s.h_x[(k, j)]);
                }
            }
        }
        worst
    }
}

/// Parity constraint `color[a] xor color[b] = odd`, with provenance.
struct Constraint {
    a: usize,
    b: usize,
    odd: bool,
    entry: String,
    witness: Vec<f64>,
}

/// Certifies orthant monotonicity by sign-pattern search.
///
/// Every off-diagonal `∂f_j/∂x_k`, every `∂f_j/∂u_k` and every `∂h_k/∂x_j`
/// that is nonzero somewhere induces a parity constraint between the
/// corresponding signs; a partial with both signs is inconsistent. The
/// constraints are solved by 2-colouring, first freely and then with the
/// gauge `δ = 0`, `μ = 1`.
pub fn certify_sign_pattern(model: &dyn CellModel, config: &CertifyConfig) -> Result<SignPattern> {
    certify_on(model, model.state_domain(), config)
}

pub(super) fn certify_on(model: &dyn CellModel, state: &Domain, config: &CertifyConfig) -> Result<SignPattern> {
    let (n, m) = (model.state_dim(), model.io_dim());
    let samples = sample_jacobians(model, state, model.input_domain(), config.samples, config.seed);
    let eps = |j: usize| j;
    let delta = |k: usize| n + k;
    let mu = |k: usize| n + m + k;
    let mut constraints = Vec::new();
    let mut push = |a: usize, b: usize, entry: String, values: &dyn Fn(&JacobianSample) -> f64| -> Result<()> {
        let mut pos = None;
        let mut neg = None;
        for s in &samples {
            let v = values(s);
            if v > config.sign_tol && pos.is_none() {
                pos = Some(s.point.clone());
            } else if v < -config.sign_tol && neg.is_none() {
                neg = Some(s.point.clone());
            }
        }
        match (pos, neg) {
            (Some(p), Some(q)) => Err(Error::Inconsistent {
                entry,
                positive_at: p,
                negative_at: q,
            }),
            (Some(p), None) => {
                constraints.push(Constraint { a, b, odd: false, entry, witness: p });
                Ok(())
            }
            (None, Some(q)) => {
                constraints.push(Constraint { a, b, odd: true, entry, witness: q });
                Ok(())
            }
            (None, None) => Ok(()),
        }
    };
    for j in 0..n {
        for k in 0..n {
            if j != k {
                push(eps(j), eps(k), format!("df{j}/dx{k}"), &|s| s.f_x[(j, k)])?;
            }
        }
        for k in 0..m {
            push(eps(j), delta(k), format!("df{j}/du{k}"), &|s| s.f_u[(j, k)])?;
        }
    }
    for k in 0..m {
        for j in 0..n {
            push(eps(j), mu(k), format!("dh{k}/dx{j}"), &|s| s.h_x[(k, j)])?;
        }
    }
    let nodes = n + 2 * m;
    two_color(nodes, &constraints, None).map_err(|c| Error::Inconsistent {
        entry: format!("parity cycle closed by {}", c.entry),
        positive_at: if c.odd { Vec::new() } else { c.witness.clone() },
        negative_at: if c.odd { c.witness.clone() } else { Vec::new() },
    })?;
    // ground node fixes δ_k = 0 and μ_k = 1
    let ground = nodes;
    let mut gauged = constraints;
    for k in 0..m {
        gauged.push(Constraint { a: ground, b: delta(k), odd: false, entry: format!("gauge delta{k} = 0"), witness: Vec::new() });
        gauged.push(Constraint { a: ground, b: mu(k), odd: true, entry: format!("gauge mu{k} = 1"), witness: Vec::new() });
    }
    let colors = two_color(nodes + 1, &gauged, Some(ground))
        .map_err(|c| Error::GaugeViolation(format!("conflict at {}", c.entry)))?;
    let bit = |i: usize| u8::from(colors[i] != colors[ground]);
    let epsilon: Vec<u8> = (0..n).map(|j| bit(eps(j))).collect();
    let delta_v: Vec<u8> = (0..m).map(|k| bit(delta(k))).collect();
    let mu_v: Vec<u8> = (0..m).map(|k| bit(mu(k))).collect();
    let kind = match model.sign_structure() {
        Some(ss) if symbolic_agrees(&ss, &epsilon, &delta_v, &mu_v) => CertificateKind::Exact,
        _ => CertificateKind::Sampled,
    };
    Ok(SignPattern {
        epsilon,
        delta: delta_v,
        mu: mu_v,
        sample_count: samples.len(),
        witness_box: state.clone(),
        kind,
    })
}

/// Breadth-first 2-colouring; components are rooted at `root` first,
/// then at their lowest-index node with colour `false`.
fn two_color<'c>(nodes: usize, constraints: &'c [Constraint], root: Option<usize>) -> std::result::Result<Vec<bool>, &'c Constraint> {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    for (i, c) in constraints.iter().enumerate() {
        adj[c.a].push(i);
        adj[c.b].push(i);
    }
    let mut color: Vec<Option<bool>> = vec![None; nodes];
    let starts = root.into_iter().chain(0..nodes);
    for s in starts {
        if color[s].is_some() {
            continue;
        }
        color[s] = Some(false);
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            let cv = color[v].expect("queued nodes are coloured");
            for &ci in &adj[v] {
                let c = &constraints[ci];
                let w = if c.a == v { c.b } else { c.a };
                let want = cv ^ c.odd;
                match color[w] {
                    None => {
                        color[w] = Some(want);
                        queue.push_back(w);
                    }
                    Some(cw) if cw != want => return Err(c),
                    Some(_) => {}
                }
            }
        }
    }
    Ok(color.into_iter().map(|c| c.unwrap_or(false)).collect())
}

fn symbolic_agrees(ss: &SignStructure, eps: &[u8], delta: &[u8], mu: &[u8]) -> bool {
    let ok = |sign: Sign, a: u8, b: u8| match sign {
        Sign::Zero => true,
        Sign::NonNeg => (a + b) % 2 == 0,
        Sign::NonPos => (a + b) % 2 == 1,
    };
    let (n, m) = (eps.len(), delta.len());
    (0..n).all(|j| {
        (0..n).all(|k| j == k || ok(ss.f_x[j][k], eps[j], eps[k]))
            && (0..m).all(|k| ok(ss.f_u[j][k], eps[j], delta[k]) && ok(ss.h_x[k][j], eps[j], mu[k]))
    })
}
