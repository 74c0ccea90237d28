use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::pattern::{sample_jacobians, JacobianSample};
use super::CertifyConfig;
use crate::error::{Error, MixedSignEntry, Result};
use crate::model::{CellModel, Domain};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "index", rename_all = "snake_case")]
pub enum Vertex {
    X(usize),
    U(usize),
    Y(usize),
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Vertex::X(i) => write!(f, "x{}", i + 1),
            Vertex::U(i) => write!(f, "u{}", i + 1),
            Vertex::Y(i) => write!(f, "y{}", i + 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncidenceEdge {
    pub from: Vertex,
    pub to: Vertex,
    /// `1` or `-1`.
    pub sign: i8,
}

/// Directed incidence graph over `x_1..x_n`, `u_1..u_m`, `y_1..y_m` with
/// an edge for every partial that is strictly one-signed at all samples.
/// Pinned state coordinates are left out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncidenceGraph {
    pub state_dim: usize,
    pub io_dim: usize,
    /// State coordinates that take part (not pinned).
    pub active_states: Vec<usize>,
    pub edges: Vec<IncidenceEdge>,
    pub sample_count: usize,
}

/// Per-channel flags from directed reachability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelFlags {
    pub channel: usize,
    /// Every active state is reachable from `u_k`.
    pub excitable: bool,
    /// `y_k` is reachable from every active state.
    pub transparent: bool,
}

impl IncidenceGraph {
    pub fn has_edge(&self, from: Vertex, to: Vertex) -> bool {
        self.edges.iter().any(|e| e.from == from && e.to == to)
    }

    /// Edge set as `(from, to)` pairs, sorted.
    pub fn edge_pairs(&self) -> Vec<(Vertex, Vertex)> {
        let mut v: Vec<_> = self.edges.iter().map(|e| (e.from, e.to)).collect();
        v.sort();
        v
    }

    fn reachable_from(&self, start: Vertex) -> Vec<Vertex> {
        let mut seen = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for e in self.edges.iter().filter(|e| e.from == v) {
                if !seen.contains(&e.to) {
                    seen.push(e.to);
                    queue.push_back(e.to);
                }
            }
        }
        seen
    }

    /// Excitability and transparency for each channel `k`.
    pub fn channels(&self) -> Vec<ChannelFlags> {
        (0..self.io_dim)
            .map(|k| {
                let from_u = self.reachable_from(Vertex::U(k));
                let excitable = self.active_states.iter().all(|&j| from_u.contains(&Vertex::X(j)));
                let transparent = self
                    .active_states
                    .iter()
                    .all(|&j| self.reachable_from(Vertex::X(j)).contains(&Vertex::Y(k)));
                ChannelFlags {
                    channel: k,
                    excitable,
                    transparent,
                }
            })
            .collect()
    }

    /// Smallest channel that is both excitable and transparent.
    pub fn chosen_channel(&self) -> Option<usize> {
        self.channels().into_iter().find(|c| c.excitable && c.transparent).map(|c| c.channel)
    }
}

/// Per-channel excitability and transparency of an incidence graph.
pub fn excitability_transparency(ig: &IncidenceGraph) -> Vec<ChannelFlags> {
    ig.channels()
}

enum Definiteness {
    Zero,
    Strict(i8),
    Mixed { nonzero_at: Vec<f64>, other_at: Vec<f64> },
}

fn definiteness(samples: &[JacobianSample], tol: f64, value: impl Fn(&JacobianSample) -> f64) -> Definiteness {
    let mut pos = None;
    let mut neg = None;
    let mut zero = None;
    for s in samples {
        let v = value(s);
        let slot = if v > tol {
            &mut pos
        } else if v < -tol {
            &mut neg
        } else {
            &mut zero
        };
        if slot.is_none() {
            *slot = Some(s.point.clone());
        }
    }
    match (pos, neg, zero) {
        (None, None, _) => Definiteness::Zero,
        (Some(_), None, None) => Definiteness::Strict(1),
        (None, Some(_), None) => Definiteness::Strict(-1),
        (Some(p), Some(q), _) => Definiteness::Mixed { nonzero_at: p, other_at: q },
        (Some(p), None, Some(z)) | (None, Some(p), Some(z)) => Definiteness::Mixed { nonzero_at: p, other_at: z },
    }
}

/// Builds the incidence graph on `state` (typically a restriction of the
/// model's state domain) times the model's input domain.
pub fn build_incidence_graph(model: &dyn CellModel, state: &Domain, config: &CertifyConfig) -> Result<IncidenceGraph> {
    let (n, m) = (model.state_dim(), model.io_dim());
    let samples = sample_jacobians(model, state, model.input_domain(), config.samples, config.seed);
    let pinned = state.pinned();
    let active: Vec<usize> = (0..n).filter(|&j| !pinned[j]).collect();
    let mut edges = Vec::new();
    let mut mixed = Vec::new();
    let mut consider = |from: Vertex, to: Vertex, entry: String, value: &dyn Fn(&JacobianSample) -> f64| {
        match definiteness(&samples, config.sign_tol, value) {
            Definiteness::Zero => {}
            Definiteness::Strict(sign) => edges.push(IncidenceEdge { from, to, sign }),
            Definiteness::Mixed { nonzero_at, other_at } => mixed.push(MixedSignEntry {
                entry,
                nonzero_at,
                other_at,
            }),
        }
    };
    for &j in &active {
        for &k in &active {
            if j != k {
                consider(Vertex::X(k), Vertex::X(j), format!("df{j}/dx{k}"), &|s| s.f_x[(j, k)]);
            }
        }
        for k in 0..m {
            consider(Vertex::U(k), Vertex::X(j), format!("df{j}/du{k}"), &|s| s.f_u[(j, k)]);
        }
        for k in 0..m {
            consider(Vertex::X(j), Vertex::Y(k), format!("dh{k}/dx{j}"), &|s| s.h_x[(k, j)]);
        }
    }
    if !mixed.is_empty() {
        return Err(Error::MixedSign(mixed));
    }
    edges.sort_by_key(|e| (e.from, e.to));
    Ok(IncidenceGraph {
        state_dim: n,
        io_dim: m,
        active_states: active,
        edges,
        sample_count: samples.len(),
    })
}
