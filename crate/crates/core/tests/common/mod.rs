//! Independent oracles shared by the integration tests. Nothing here calls
//! the library routine it is used to check.

#![allow(dead_code)]

use std::collections::VecDeque;

use latpat::graph::ContactGraph;
use latpat::model::{Cascade, HillParams, Linearization, NotchMimo, Stage};
use nalgebra::linalg::Schur;
use nalgebra::{Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random connected graph: a random tree plus each other pair with
/// probability `p`.
pub fn random_connected(rng: &mut ChaCha8Rng, n: usize, p: f64) -> ContactGraph {
    let mut edges = Vec::new();
    for i in 1..n {
        edges.push((rng.random_range(0..i), i));
    }
    for i in 0..n {
        for j in i + 1..n {
            if !edges.contains(&(i, j)) && rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    ContactGraph::new(n, &edges).expect("tree plus extra edges is a valid graph")
}

/// Random connected bipartite graph with a random side assignment.
pub fn random_bipartite(rng: &mut ChaCha8Rng, n: usize, p: f64) -> ContactGraph {
    let mut side: Vec<bool> = (0..n).map(|_| rng.random()).collect();
    side[0] = true;
    side[1] = false;
    let mut edges = Vec::new();
    for i in 1..n {
        let earlier: Vec<usize> = (0..i).filter(|&j| side[j] != side[i]).collect();
        let j = if earlier.is_empty() {
            // no opposite-side node yet: flip this one to the other side of node 0
            side[i] = !side[0];
            0
        } else {
            earlier[rng.random_range(0..earlier.len())]
        };
        edges.push((j.min(i), j.max(i)));
    }
    for i in 0..n {
        for j in i + 1..n {
            if side[i] != side[j] && !edges.contains(&(i, j)) && rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    ContactGraph::new(n, &edges).expect("valid bipartite graph")
}

/// BFS two-colouring; `None` when an odd cycle exists.
pub fn two_colour(g: &ContactGraph) -> Option<Vec<bool>> {
    let n = g.node_count();
    let mut colour: Vec<Option<bool>> = vec![None; n];
    colour[0] = Some(true);
    let mut queue = VecDeque::from([0]);
    while let Some(v) = queue.pop_front() {
        let c = colour[v].unwrap();
        for &w in g.neighbors(v) {
            match colour[w] {
                None => {
                    colour[w] = Some(!c);
                    queue.push_back(w);
                }
                Some(cw) if cw == c => return None,
                _ => {}
            }
        }
    }
    Some(colour.into_iter().map(|c| c.unwrap()).collect())
}

/// Random-walk matrix built from adjacency and degrees.
pub fn walk_matrix(g: &ContactGraph) -> DMatrix<f64> {
    let n = g.node_count();
    DMatrix::from_fn(n, n, |i, j| if g.has_edge(i, j) { 1.0 / g.degree(i) as f64 } else { 0.0 })
}

/// Dense eigenvalues through nalgebra's real Schur form, with an iteration
/// cap so a stalled QR sweep fails loudly instead of spinning.
pub fn eig(m: &DMatrix<f64>) -> Vec<Complex<f64>> {
    let schur = Schur::try_new(m.clone(), 1e-15, 100_000)
        .unwrap_or_else(|| panic!("Schur iteration stalled on {m:.3}"));
    schur.complex_eigenvalues().iter().copied().collect()
}

/// Largest distance of a greedy nearest-neighbour matching between two
/// multisets; `INFINITY` on size mismatch.
pub fn matching_distance(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    let mut order: Vec<&Complex<f64>> = a.iter().collect();
    order.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    for z in order {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, w)| (k, (z - w).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}

/// Random `n x n` Hurwitz matrix: Gaussian-like entries shifted left past
/// the Gershgorin bound.
pub fn random_hurwitz(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let mut a: DMatrix<f64> = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let bound = (0..n)
        .map(|i| a.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let shift = bound + rng.random_range(0.1..1.0);
    for i in 0..n {
        a[(i, i)] -= shift;
    }
    a
}

pub fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| scale * rng.random_range(-1.0..1.0))
}

pub fn random_lin(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Linearization {
    Linearization {
        u: vec![0.0; m],
        x: vec![0.0; n],
        a: random_hurwitz(rng, n),
        b: random_matrix(rng, n, m, 1.0),
        c: random_matrix(rng, m, n, 1.0),
    }
}

/// Network Jacobian written cell by cell: block `(i, j)` is
/// `δ_ij A_i + p_ij B_i C_j`, where `(A_i, B_i, C_i)` is the linearization
/// of cell `i`.
pub fn network_jacobian(p: &DMatrix<f64>, lins: &[&Linearization]) -> DMatrix<f64> {
    let n = lins[0].a.nrows();
    let cells = p.nrows();
    let mut j = DMatrix::zeros(cells * n, cells * n);
    for i in 0..cells {
        j.view_mut((i * n, i * n), (n, n)).copy_from(&lins[i].a);
        for k in 0..cells {
            if p[(i, k)] != 0.0 {
                let coupling = &lins[i].b * &lins[k].c * p[(i, k)];
                let mut block = j.view_mut((i * n, k * n), (n, n));
                block += coupling;
            }
        }
    }
    j
}

/// `g1 = a/(1+s^2)` inhibiting followed by a pass-through stage, unit rates.
pub fn square_cascade(a: f64) -> Cascade {
    Cascade::new(
        vec![1.0, 1.0],
        vec![Stage::Hill(HillParams::inhibiting(a, 1.0, 2.0).unwrap()), Stage::Linear { slope: 1.0 }],
    )
    .unwrap()
}

pub fn notch() -> NotchMimo {
    NotchMimo::new(1.0, 1.0, 1.0, HillParams::inhibiting(10.0, 0.3, 4.0).unwrap()).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
