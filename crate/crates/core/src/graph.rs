//! Cell-contact graphs, their random-walk matrices and spectra.
//!
//! Nodes are cells, edges are physical contacts. Graphs are undirected,
//! simple and connected; every constructor validates this. The random-walk
//! matrix `P` has `p_ij = 1/d_i` for neighbours `i ~ j`, so the input to a
//! cell is the average of its neighbours' outputs.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Undirected, connected, simple contact graph with 0-based node indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContactGraph {
    node_count: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl ContactGraph {
    /// Validates and builds a graph. Edges are unordered; `(i, j)` and
    /// `(j, i)` count as the same contact and repeating one is an error.
    pub fn new(node_count: usize, edge_list: &[(usize, usize)]) -> Result<Self> {
        if node_count < 2 {
            return Err(Error::TooFewNodes(node_count));
        }
        let mut seen = BTreeSet::new();
        let mut edges = Vec::with_capacity(edge_list.len());
        let mut adjacency = vec![Vec::new(); node_count];
        for &(i, j) in edge_list {
            for index in [i, j] {
                if index >= node_count {
                    return Err(Error::IndexOutOfRange { index, node_count });
                }
            }
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            let key = (i.min(j), i.max(j));
            if !seen.insert(key) {
                return Err(Error::DuplicateEdge(i, j));
            }
            edges.push(key);
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        let graph = Self {
            node_count,
            edges,
            adjacency,
        };
        if let Some(unreachable) = graph.first_unreachable() {
            return Err(Error::DisconnectedGraph { unreachable });
        }
        Ok(graph)
    }

    fn first_unreachable(&self) -> Option<usize> {
        let mut seen = vec![false; self.node_count];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &w in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.iter().position(|s| !s)
    }

    /// Path `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGeneratorSize(format!("path({n}) needs n >= 2")));
        }
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        Self::new(n, &edges)
    }

    /// Cycle on `n >= 3` nodes.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidGeneratorSize(format!("cycle({n}) needs n >= 3")));
        }
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::new(n, &edges)
    }

    /// Rectangular grid; node `(r, c)` has index `r * cols + c`.
    pub fn grid(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 || rows * cols < 2 {
            return Err(Error::InvalidGeneratorSize(format!(
                "grid({rows}, {cols}) needs rows*cols >= 2"
            )));
        }
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let v = r * cols + c;
                if c + 1 < cols {
                    edges.push((v, v + 1));
                }
                if r + 1 < rows {
                    edges.push((v, v + cols));
                }
            }
        }
        Self::new(rows * cols, &edges)
    }

    /// `K_{a,b}`: nodes `0..a` on one side, `a..a+b` on the other.
    pub fn complete_bipartite(a: usize, b: usize) -> Result<Self> {
        if a == 0 || b == 0 {
            return Err(Error::InvalidGeneratorSize(format!(
                "complete_bipartite({a}, {b}) needs a, b >= 1"
            )));
        }
        let edges: Vec<_> = (0..a).flat_map(|i| (a..a + b).map(move |j| (i, j))).collect();
        Self::new(a + b, &edges)
    }

    /// Cartesian product `g □ h`; node `(i, j)` has index `i * |h| + j`.
    pub fn cartesian_product(g: &Self, h: &Self) -> Result<Self> {
        let nh = h.node_count;
        let mut edges = Vec::new();
        for i in 0..g.node_count {
            for &(a, b) in &h.edges {
                edges.push((i * nh + a, i * nh + b));
            }
        }
        for &(a, b) in &g.edges {
            for j in 0..nh {
                edges.push((a * nh + j, b * nh + j));
            }
        }
        Self::new(g.node_count * nh, &edges)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(min, max)` pairs in insertion order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency.get(i).is_some_and(|n| n.binary_search(&j).is_ok())
    }

    /// Random-walk transition matrix: `p_ij = 1/d_i` iff `i ~ j`.
    pub fn random_walk_matrix(&self) -> DMatrix<f64> {
        let mut p = DMatrix::zeros(self.node_count, self.node_count);
        for (i, nbrs) in self.adjacency.iter().enumerate() {
            let w = 1.0 / nbrs.len() as f64;
            for &j in nbrs {
                p[(i, j)] = w;
            }
        }
        p
    }

    /// Spectrum of the random-walk matrix.
    ///
    /// Computed on the symmetric similarity `D^{1/2} P D^{-1/2}`, whose
    /// `(i, j)` entry is `1/sqrt(d_i d_j)` for neighbours; eigenvectors are
    /// mapped back by `D^{-1/2}`, normalised to unit 2-norm with the first
    /// nonzero entry positive.
    pub fn spectrum(&self) -> Result<RandomWalkSpectrum> {
        let n = self.node_count;
        let deg: Vec<f64> = self.degrees().into_iter().map(|d| d as f64).collect();
        let mut sym = DMatrix::zeros(n, n);
        for &(i, j) in &self.edges {
            let w = 1.0 / (deg[i] * deg[j]).sqrt();
            sym[(i, j)] = w;
            sym[(j, i)] = w;
        }
        let (eigenvalues, w) = linalg::symmetric_eigen(&sym)?;
        let mut vectors = DMatrix::zeros(n, n);
        for k in 0..n {
            let mut v = DVector::from_fn(n, |i, _| w[(i, k)] / deg[i].sqrt());
            v /= v.norm();
            if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
                if *first < 0.0 {
                    v.neg_mut();
                }
            }
            vectors.set_column(k, &v);
        }
        Ok(RandomWalkSpectrum {
            p: self.random_walk_matrix(),
            eigenvalues,
            eigenvectors: vectors,
        })
    }

    /// Breadth-first 2-colouring from node 0; `None` for odd cycles.
    pub fn bipartition(&self) -> Option<Bipartition> {
        let mut color: Vec<Option<bool>> = vec![None; self.node_count];
        color[0] = Some(false);
        let mut queue = VecDeque::from([0]);
        while let Some(v) = queue.pop_front() {
            let cv = color[v]?;
            for &w in &self.adjacency[v] {
                match color[w] {
                    None => {
                        color[w] = Some(!cv);
                        queue.push_back(w);
                    }
                    Some(cw) if cw == cv => return None,
                    Some(_) => {}
                }
            }
        }
        let (mut set_i, mut set_i_prime) = (Vec::new(), Vec::new());
        for (v, c) in color.iter().enumerate() {
            if c == &Some(false) {
                set_i.push(v);
            } else {
                set_i_prime.push(v);
            }
        }
        Some(Bipartition { set_i, set_i_prime })
    }

    /// Parses the edge-list format: a header line `N E`, then `E` lines
    /// `i j`. Blank lines and `#` comments are ignored.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(no, l)| (no + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (header_line, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing header `N E`".into(),
        })?;
        let (n, e) = parse_pair(header_line, header)?;
        let mut edges = Vec::with_capacity(e);
        let mut last_line = header_line;
        for (line, content) in lines {
            last_line = line;
            if edges.len() == e {
                return Err(Error::Parse {
                    line,
                    message: format!("more than the declared {e} edges"),
                });
            }
            let (i, j) = parse_pair(line, content)?;
            if i == j {
                return Err(Error::Parse { line, message: format!("self-loop at node {i}") });
            }
            if edges.iter().any(|&(a, b)| (a, b) == (i, j) || (a, b) == (j, i)) {
                return Err(Error::Parse { line, message: format!("repeated edge ({i}, {j})") });
            }
            edges.push((i, j));
        }
        if edges.len() != e {
            return Err(Error::Parse {
                line: last_line,
                message: format!("declared {e} edges, found {}", edges.len()),
            });
        }
        Self::new(n, &edges)
    }

    /// Serialises to the edge-list format accepted by [`Self::parse_edge_list`].
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.node_count, self.edges.len());
        for (i, j) in &self.edges {
            out.push_str(&format!("{i} {j}\n"));
        }
        out
    }
}

fn parse_pair(line: usize, content: &str) -> Result<(usize, usize)> {
    let fields: Vec<&str> = content.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(Error::Parse {
            line,
            message: format!("expected two integers, got `{content}`"),
        });
    }
    let parse = |s: &str| {
        s.parse::<usize>().map_err(|_| Error::Parse {
            line,
            message: format!("`{s}` is not a non-negative integer"),
        })
    };
    Ok((parse(fields[0])?, parse(fields[1])?))
}

/// Eigen-decomposition of the random-walk matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct RandomWalkSpectrum {
    pub p: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the eigenvector of `eigenvalues[k]`.
    pub eigenvectors: DMatrix<f64>,
}

impl RandomWalkSpectrum {
    pub fn lambda_min(&self) -> f64 {
        *self.eigenvalues.last().expect("spectrum of a non-empty graph")
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn eigenvector(&self, k: usize) -> DVector<f64> {
        self.eigenvectors.column(k).into_owned()
    }

    /// `max_k ||P v_k - λ_k v_k||_∞`.
    pub fn max_residual(&self) -> f64 {
        (0..self.eigenvalues.len())
            .map(|k| {
                let v = self.eigenvector(k);
                (&self.p * &v - &v * self.eigenvalues[k]).amax()
            })
            .fold(0.0, f64::max)
    }
}

/// Two-colouring of a bipartite graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bipartition {
    pub set_i: Vec<usize>,
    pub set_i_prime: Vec<usize>,
}

impl Bipartition {
    /// `true` for nodes in `set_i`.
    pub fn membership(&self, node_count: usize) -> Vec<bool> {
        let mut m = vec![false; node_count];
        for &v in &self.set_i {
            m[v] = true;
        }
        m
    }

    /// Node order with `set_i` first, then `set_i_prime`.
    pub fn ordering(&self) -> Vec<usize> {
        self.set_i.iter().chain(&self.set_i_prime).copied().collect()
    }

    pub fn swapped(&self) -> Self {
        Self {
            set_i: self.set_i_prime.clone(),
            set_i_prime: self.set_i.clone(),
        }
    }
}

/// Named graph generator, written `kind:args` (e.g. `cycle:4`, `grid:2x3`,
/// `complete_bipartite:2,3`, `path:5`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum GraphGenerator {
    Path(usize),
    Cycle(usize),
    Grid(usize, usize),
    CompleteBipartite(usize, usize),
}

impl GraphGenerator {
    pub fn build(&self) -> Result<ContactGraph> {
        match *self {
            Self::Path(n) => ContactGraph::path(n),
            Self::Cycle(n) => ContactGraph::cycle(n),
            Self::Grid(r, c) => ContactGraph::grid(r, c),
            Self::CompleteBipartite(a, b) => ContactGraph::complete_bipartite(a, b),
        }
    }
}

impl FromStr for GraphGenerator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidGeneratorSize(format!("cannot parse generator `{s}`"));
        let (kind, args) = s.split_once(':').ok_or_else(bad)?;
        let nums = |sep: char| -> Result<Vec<usize>> {
            args.split(sep)
                .map(|a| a.trim().parse::<usize>().map_err(|_| bad()))
                .collect()
        };
        match kind.trim() {
            "path" => Ok(Self::Path(args.trim().parse().map_err(|_| bad())?)),
            "cycle" => Ok(Self::Cycle(args.trim().parse().map_err(|_| bad())?)),
            "grid" => match nums('x')?.as_slice() {
                [r, c] => Ok(Self::Grid(*r, *c)),
                _ => Err(bad()),
            },
            "complete_bipartite" => match nums(',')?.as_slice() {
                [a, b] => Ok(Self::CompleteBipartite(*a, *b)),
                _ => Err(bad()),
            },
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for GraphGenerator {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<GraphGenerator> for String {
    fn from(g: GraphGenerator) -> String {
        g.to_string()
    }
}

impl fmt::Display for GraphGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Path(n) => write!(f, "path:{n}"),
            Self::Cycle(n) => write!(f, "cycle:{n}"),
            Self::Grid(r, c) => write!(f, "grid:{r}x{c}"),
            Self::CompleteBipartite(a, b) => write!(f, "complete_bipartite:{a},{b}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn smallest_graph() {
        let g = ContactGraph::new(2, &[(0, 1)]).unwrap();
        assert_eq!(g.degrees(), vec![1, 1]);
        assert_eq!(g, ContactGraph::path(2).unwrap());
    }

    #[test]
    fn four_cycle_degrees() {
        let g = ContactGraph::new(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert!(g.degrees().iter().all(|&d| d == 2));
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            ContactGraph::new(3, &[(0, 1)]),
            Err(Error::DisconnectedGraph { unreachable: 2 })
        );
        assert_eq!(ContactGraph::new(2, &[(0, 0)]), Err(Error::SelfLoop(0)));
        assert_eq!(
            ContactGraph::new(2, &[(0, 2)]),
            Err(Error::IndexOutOfRange { index: 2, node_count: 2 })
        );
        assert_eq!(ContactGraph::new(2, &[(0, 1), (1, 0)]), Err(Error::DuplicateEdge(1, 0)));
        assert_eq!(ContactGraph::new(1, &[]), Err(Error::TooFewNodes(1)));
    }

    #[test]
    fn generator_size_checks() {
        assert!(ContactGraph::path(1).is_err());
        assert!(ContactGraph::cycle(2).is_err());
        assert!(ContactGraph::grid(0, 3).is_err());
        assert!(ContactGraph::grid(1, 1).is_err());
        assert!(ContactGraph::complete_bipartite(0, 2).is_err());
        assert!(ContactGraph::grid(1, 2).is_ok());
    }

    #[test]
    fn grid_two_by_two_is_four_cycle() {
        let g = ContactGraph::grid(2, 2).unwrap();
        // 0-1-3-2-0
        let relabel = [0, 1, 3, 2];
        let c4 = ContactGraph::cycle(4).unwrap();
        for &(i, j) in c4.edges() {
            assert!(g.has_edge(relabel[i], relabel[j]));
        }
        assert_eq!(g.edge_count(), 4);
    }

    #[test]
    fn product_of_paths_is_grid() {
        let p = ContactGraph::cartesian_product(
            &ContactGraph::path(2).unwrap(),
            &ContactGraph::path(3).unwrap(),
        )
        .unwrap();
        // independent count: |V_g||E_h| + |E_g||V_h| = 2*2 + 1*3
        assert_eq!((p.node_count(), p.edge_count()), (6, 7));
        let grid = ContactGraph::grid(2, 3).unwrap();
        for &(i, j) in grid.edges() {
            assert!(p.has_edge(i, j));
        }
    }

    #[test]
    fn random_walk_rows() {
        let p = ContactGraph::path(2).unwrap().random_walk_matrix();
        assert_eq!(p, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        let p3 = ContactGraph::path(3).unwrap().random_walk_matrix();
        assert_eq!(p3.row(1).iter().copied().collect::<Vec<_>>(), vec![0.5, 0.0, 0.5]);
        let c3 = ContactGraph::cycle(3).unwrap().random_walk_matrix();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(c3[(i, j)], if i == j { 0.0 } else { 0.5 });
            }
        }
    }

    #[test]
    fn path_two_spectrum() {
        let s = ContactGraph::path(2).unwrap().spectrum().unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!((s.eigenvalues[1] + 1.0).abs() < 1e-12);
        let v = s.eigenvector(1);
        assert!((v[0] + v[1]).abs() < 1e-12 && v[0] > 0.0);
    }

    #[test]
    fn cycle_spectra_match_cosines() {
        for n in [3usize, 4, 5, 8] {
            let s = ContactGraph::cycle(n).unwrap().spectrum().unwrap();
            let analytic: Vec<f64> = (0..n)
                .map(|k| (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos())
                .collect();
            let got = sorted(s.eigenvalues.clone());
            for (a, b) in got.iter().zip(sorted(analytic)) {
                assert!((a - b).abs() < 1e-12, "cycle({n}): {a} vs {b}");
            }
            assert!(s.max_residual() < 1e-10);
        }
        let c3 = ContactGraph::cycle(3).unwrap().spectrum().unwrap();
        assert!((c3.lambda_min() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn first_eigenvector_is_constant() {
        let s = ContactGraph::grid(3, 4).unwrap().spectrum().unwrap();
        let v = s.eigenvector(0);
        let c = v[0];
        assert!(c > 0.0);
        assert!(v.iter().all(|x| (x - c).abs() < 1e-10));
    }

    #[test]
    fn bipartitions() {
        let b = ContactGraph::cycle(4).unwrap().bipartition().unwrap();
        assert_eq!(b.set_i, vec![0, 2]);
        assert_eq!(b.set_i_prime, vec![1, 3]);
        assert!(ContactGraph::cycle(5).unwrap().bipartition().is_none());
        let kb = ContactGraph::complete_bipartite(2, 3).unwrap();
        let b = kb.bipartition().unwrap();
        assert_eq!((b.set_i.len(), b.set_i_prime.len()), (2, 3));
        assert!((kb.spectrum().unwrap().lambda_min() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn edge_list_format() {
        let text = "# a square\n4 4\n0 1\n1 2 # middle\n\n2 3\n3 0\n";
        let g = ContactGraph::parse_edge_list(text).unwrap();
        assert_eq!(g, ContactGraph::cycle(4).unwrap());
        assert_eq!(ContactGraph::parse_edge_list(&g.to_edge_list()).unwrap(), g);

        let repeated = ContactGraph::parse_edge_list("2 2\n0 1\n1 0\n");
        assert!(matches!(repeated, Err(Error::Parse { line: 3, .. })));
        let short = ContactGraph::parse_edge_list("3 2\n0 1\n");
        assert!(matches!(short, Err(Error::Parse { .. })));
        let junk = ContactGraph::parse_edge_list("2 1\n0 x\n");
        assert!(matches!(junk, Err(Error::Parse { line: 2, .. })));
        let disconnected = ContactGraph::parse_edge_list("3 1\n0 1\n");
        assert!(matches!(disconnected, Err(Error::DisconnectedGraph { .. })));
    }

    #[test]
    fn generator_specs_round_trip() {
        for s in ["path:5", "cycle:4", "grid:2x3", "complete_bipartite:2,3"] {
            let g: GraphGenerator = s.parse().unwrap();
            assert_eq!(g.to_string(), s);
            g.build().unwrap();
        }
        assert!("ring:4".parse::<GraphGenerator>().is_err());
        assert!("grid:2".parse::<GraphGenerator>().is_err());
    }
}
